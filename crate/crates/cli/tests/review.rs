use std::path::Path;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use serde_json::Value;
use slidetx_cli::cmd::synth::render;
use slidetx_cli::review::{router, ReviewState};
use slidetx_core::dataset::{GeometryConfig, GroundTruthDoc, SyntheticScript};
use slidetx_core::eval::evaluate;
use slidetx_core::{EvalConfig, Roi};
use tower::ServiceExt;

fn small_script(video: &str, seed: u64) -> SyntheticScript {
    let mut s = SyntheticScript::random(video, seed);
    s.geometry = GeometryConfig {
        width: 64,
        height: 40,
        slide_region: Roi::new(4, 2, 56, 36),
    };
    s
}

fn corpus(dir: &Path) {
    render(&small_script("alpha", 1), dir, false).unwrap();
    render(&small_script("beta", 2), dir, true).unwrap();
    std::fs::remove_dir_all(dir.join("beta/frames")).unwrap();
    std::fs::create_dir_all(dir.join("empty")).unwrap();
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>, Option<String>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(serde_json::to_vec(&v).unwrap())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let source = resp
        .headers()
        .get("x-annotation-source")
        .map(|v| v.to_str().unwrap().to_string());
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec();
    (status, bytes, source)
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

fn tree_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[tokio::test]
async fn lists_videos_with_frame_counts() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let app = router(ReviewState::new(tmp.path()), None);
    let (status, body, _) = call(&app, Method::GET, "/api/videos", None).await;
    assert_eq!(status, StatusCode::OK);
    let list = json(&body);
    let list = list.as_array().unwrap();
    assert_eq!(list.len(), 2);
    for (entry, seed) in list.iter().zip([1, 2]) {
        let gt = GroundTruthDoc::load(&tmp.path().join(entry["id"].as_str().unwrap()).join("gt.json")).unwrap();
        assert_eq!(entry["frame_count"], gt.frame_count, "seed {seed}");
        assert_eq!(entry["has_ground_truth"], true);
        assert_eq!(entry["has_annotations"], false);
    }

    let (status, body, _) = call(&app, Method::GET, "/api/videos/alpha", None).await;
    assert_eq!(status, StatusCode::OK);
    let d = json(&body);
    assert_eq!((d["width"].as_u64(), d["height"].as_u64()), (Some(64), Some(40)));
    assert_eq!(d["crop"]["w"], 56);

    for missing in ["/api/videos/nope", "/api/videos/empty", "/api/videos/..", "/api/videos/alpha/detections"] {
        assert_eq!(call(&app, Method::GET, missing, None).await.0, StatusCode::NOT_FOUND, "{missing}");
    }
}

#[tokio::test]
async fn serves_frames_as_png() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let app = router(ReviewState::new(tmp.path()), None);
    for id in ["alpha", "beta"] {
        let (status, body, _) = call(&app, Method::GET, &format!("/api/videos/{id}/frames/3"), None).await;
        assert_eq!(status, StatusCode::OK, "{id}");
        let img = image::load_from_memory(&body).unwrap();
        assert_eq!((img.width(), img.height()), (64, 40));
    }
    // Raw and image-directory storage serve identical pixels.
    let video = slidetx_core::dataset::synthesize_video(&small_script("alpha", 1)).unwrap();
    let (_, body, _) = call(&app, Method::GET, "/api/videos/alpha/frames/5", None).await;
    assert_eq!(image::load_from_memory(&body).unwrap().to_rgb8().into_raw(), video.frame(5).unwrap().pixels());
    assert_eq!(
        call(&app, Method::GET, "/api/videos/alpha/frames/100000", None).await.0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        call(&app, Method::GET, "/api/videos/alpha/frames/x", None).await.0,
        StatusCode::BAD_REQUEST
    );
}

#[tokio::test]
async fn put_round_trips_and_get_never_writes() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let app = router(ReviewState::new(tmp.path()), None);

    let before = tree_snapshot(tmp.path());
    for uri in ["/api/videos", "/api/videos/alpha", "/api/videos/alpha/annotations", "/api/videos/alpha/frames/0"] {
        call(&app, Method::GET, uri, None).await;
    }
    assert_eq!(tree_snapshot(tmp.path()), before);

    let (status, body, source) = call(&app, Method::GET, "/api/videos/alpha/annotations", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(source.as_deref(), Some("ground_truth"));
    let mut doc = json(&body);
    let gt: GroundTruthDoc = serde_json::from_value(doc.clone()).unwrap();

    let (status, _, _) = call(&app, Method::PUT, "/api/videos/alpha/annotations", Some(doc.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let saved = GroundTruthDoc::load(&tmp.path().join("alpha/annotations.json")).unwrap();
    assert_eq!(saved, gt);
    let (_, _, source) = call(&app, Method::GET, "/api/videos/alpha/annotations", None).await;
    assert_eq!(source.as_deref(), Some("annotations"));

    // Overlapping slide intervals are rejected with the field path.
    doc["slide_intervals"][1]["start"] = doc["slide_intervals"][0]["end"].clone();
    let (status, body, _) = call(&app, Method::PUT, "/api/videos/alpha/annotations", Some(doc)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let err = json(&body);
    let paths: Vec<&str> = err["issues"].as_array().unwrap().iter().map(|i| i["path"].as_str().unwrap()).collect();
    assert!(paths.contains(&"slide_intervals[1]"), "{paths:?}");
    assert_eq!(GroundTruthDoc::load(&tmp.path().join("alpha/annotations.json")).unwrap(), gt);

    // Schema errors carry paths too.
    let bad = serde_json::json!({"video": "alpha", "fps": "fast"});
    let (status, body, _) = call(&app, Method::PUT, "/api/videos/alpha/annotations", Some(bad)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(json(&body)["issues"][0]["path"], "fps");

    // A document for another video is refused.
    let mut other = serde_json::to_value(&gt).unwrap();
    other["video"] = "beta".into();
    let (status, body, _) = call(&app, Method::PUT, "/api/videos/alpha/annotations", Some(other)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(json(&body)["issues"][0]["path"], "video");
}

#[tokio::test]
async fn accept_all_detections_then_drag_boundary() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let gt_path = tmp.path().join("alpha/gt.json");
    let gt = GroundTruthDoc::load(&gt_path).unwrap();
    gt.to_detection_doc().save(&tmp.path().join("alpha/detections.json")).unwrap();
    std::fs::remove_file(&gt_path).unwrap();
    let app = router(ReviewState::new(tmp.path()), None);

    let (status, body, _) = call(&app, Method::GET, "/api/videos/alpha/detections", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json(&body)["transitions"].as_array().unwrap().len(), gt.transitions.len());

    // Without annotations or ground truth, GET offers a draft built from
    // the detections; accepting it unchanged must validate.
    let (status, body, source) = call(&app, Method::GET, "/api/videos/alpha/annotations", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(source.as_deref(), Some("draft"));
    let draft = json(&body);
    let (status, _, _) = call(&app, Method::PUT, "/api/videos/alpha/annotations", Some(draft.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let saved = GroundTruthDoc::load(&tmp.path().join("alpha/annotations.json")).unwrap();
    let f1 = evaluate(saved.records(), saved.records(), &EvalConfig::default()).f1;
    assert_eq!(f1, Some(100.0));
    assert_eq!(saved.records(), gt.records());

    // Move the last transition three frames later, along with the
    // intervals it touches.
    let mut edited: GroundTruthDoc = serde_json::from_value(draft).unwrap();
    let t = edited.transitions.last_mut().unwrap();
    let (old_start, old_end) = (t.start, t.end);
    t.start += 3;
    t.end += 3;
    for s in &mut edited.slide_intervals {
        if s.end == old_start {
            s.end += 3;
        }
        if s.start == old_end {
            s.start += 3;
        }
    }
    for v in &mut edited.video_intervals {
        if v.end == old_start {
            v.end += 3;
        }
        if v.start == old_end {
            v.start += 3;
        }
    }
    let (status, body, _) = call(
        &app,
        Method::PUT,
        "/api/videos/alpha/annotations",
        Some(serde_json::to_value(&edited).unwrap()),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
    let saved = GroundTruthDoc::load(&tmp.path().join("alpha/annotations.json")).unwrap();
    let last = saved.transitions.last().unwrap();
    assert_eq!((last.start, last.end), (old_start + 3, old_end + 3));
}

#[tokio::test]
async fn concurrent_puts_leave_a_whole_file() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let app = router(ReviewState::new(tmp.path()), None);
    let (_, body, _) = call(&app, Method::GET, "/api/videos/alpha/annotations", None).await;
    let base: GroundTruthDoc = serde_json::from_slice(&body).unwrap();
    let mut tasks = Vec::new();
    for i in 0..8 {
        let app = app.clone();
        let mut doc = base.clone();
        doc.fps = 20.0 + i as f64;
        tasks.push(tokio::spawn(async move {
            call(&app, Method::PUT, "/api/videos/alpha/annotations", Some(serde_json::to_value(&doc).unwrap())).await.0
        }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    let saved = GroundTruthDoc::load(&tmp.path().join("alpha/annotations.json")).unwrap();
    assert!((20.0..28.0).contains(&saved.fps));
    let leftovers: Vec<_> = std::fs::read_dir(tmp.path().join("alpha"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[tokio::test]
async fn static_bundle_served_at_root() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<html>review</html>").unwrap();
    let app = router(ReviewState::new(tmp.path()), Some(ui.path()));
    let (status, body, _) = call(&app, Method::GET, "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<html>review</html>");
    assert_eq!(call(&app, Method::GET, "/api/videos", None).await.0, StatusCode::OK);
}
