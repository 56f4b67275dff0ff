//! HTTP backend of the annotation review UI.
//!
//! Annotations are read from `annotations.json`, falling back to `gt.json`
//! and then to a draft built from `detections.json`. Only a successful PUT
//! writes, and it writes `annotations.json` through a temporary file and a
//! rename while holding that video's lock.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use slidetx_core::dataset::GroundTruthDoc;
use slidetx_core::frame::{raw, ImageDir, VideoSidecar};
use slidetx_core::{DetectionDoc, Error, Roi, ValidationIssue, VideoSource};
use tokio::sync::Mutex;

use crate::corpus::{self, VideoDir};

#[derive(Debug)]
pub struct ReviewState {
    corpus: PathBuf,
    locks: std::sync::Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl ReviewState {
    pub fn new(corpus: impl Into<PathBuf>) -> Arc<Self> {
        Arc::new(Self {
            corpus: corpus.into(),
            locks: Default::default(),
        })
    }

    fn lock_for(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }

    fn video(&self, id: &str) -> Result<VideoDir, ApiError> {
        let valid = !id.is_empty() && id != "." && id != ".." && !id.contains(['/', '\\']);
        let dir = self.corpus.join(id);
        match VideoDir::open(&dir) {
            Some(v) if valid => Ok(VideoDir { id: id.to_string(), ..v }),
            _ => Err(ApiError::not_found(format!("no video {id:?}"))),
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    issues: Vec<ValidationIssue>,
}

impl ApiError {
    fn not_found(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            message: message.into(),
            issues: Vec::new(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
            issues: Vec::new(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(issues) => Self {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                message: "validation failed".into(),
                issues,
            },
            other => Self {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                message: other.to_string(),
                issues: Vec::new(),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}", self.message);
        }
        let mut body = serde_json::json!({ "error": self.message });
        if !self.issues.is_empty() {
            body["issues"] = serde_json::to_value(&self.issues).unwrap_or_default();
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VideoSummary {
    pub id: String,
    pub frame_count: Option<usize>,
    pub fps: Option<f64>,
    pub has_ground_truth: bool,
    pub has_detections: bool,
    pub has_annotations: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VideoDetail {
    #[serde(flatten)]
    pub summary: VideoSummary,
    pub width: u32,
    pub height: u32,
    pub crop: Option<Roi>,
}

fn frame_geometry(video: &VideoDir) -> Result<(usize, u32, u32), Error> {
    match video.source() {
        VideoSource::ImageDir(dir) => {
            let d = ImageDir::open(&dir)?;
            let (w, h) = d.dimensions();
            Ok((d.len(), w, h))
        }
        VideoSource::Raw(path) => {
            let (header, n) = raw::probe_file(&path)?;
            Ok((n, header.width, header.height))
        }
        VideoSource::Container { path, .. } => Err(Error::UnreadableSource(format!(
            "{}: container sources are not served",
            path.display()
        ))),
    }
}

fn detail(video: &VideoDir) -> Result<VideoDetail, Error> {
    let (n, width, height) = frame_geometry(video)?;
    let sidecar: Option<VideoSidecar> = video.sidecar()?;
    Ok(VideoDetail {
        summary: VideoSummary {
            id: video.id.clone(),
            frame_count: Some(n),
            fps: sidecar.as_ref().map(|s| s.fps),
            has_ground_truth: video.existing(corpus::GROUND_TRUTH).is_some(),
            has_detections: video.existing(corpus::DETECTIONS).is_some(),
            has_annotations: video.existing(corpus::ANNOTATIONS).is_some(),
        },
        width,
        height,
        crop: sidecar.and_then(|s| s.crop),
    })
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        message: format!("worker failed: {e}"),
        issues: Vec::new(),
    })?
}

async fn list_videos(State(state): State<Arc<ReviewState>>) -> ApiResult<Json<Vec<VideoSummary>>> {
    blocking(move || {
        let mut out = Vec::new();
        for v in corpus::discover(&state.corpus)? {
            match detail(&v) {
                Ok(d) => out.push(d.summary),
                Err(e) => log::warn!("skipping {}: {e}", v.id),
            }
        }
        Ok(Json(out))
    })
    .await
}

async fn get_video(State(state): State<Arc<ReviewState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<VideoDetail>> {
    blocking(move || Ok(Json(detail(&state.video(&id)?)?))).await
}

async fn get_frame(
    State(state): State<Arc<ReviewState>>,
    UrlPath((id, n)): UrlPath<(String, String)>,
) -> ApiResult<Response> {
    let n: usize = n
        .trim_end_matches(".png")
        .parse()
        .map_err(|_| ApiError::bad_request(format!("bad frame index {n:?}")))?;
    blocking(move || {
        let video = state.video(&id)?;
        let (count, _, _) = frame_geometry(&video)?;
        if n >= count {
            return Err(ApiError::not_found(format!("frame {n} out of range (0..{count})")));
        }
        let frame = match video.source() {
            VideoSource::ImageDir(dir) => ImageDir::open(&dir)?.read_frame(n)?,
            VideoSource::Raw(path) => raw::read_frame_at(&path, n)?,
            VideoSource::Container { .. } => unreachable!("rejected by frame_geometry"),
        };
        let png = frame.encode_png()?;
        Ok((
            [
                (header::CONTENT_TYPE, HeaderValue::from_static("image/png")),
                (header::CACHE_CONTROL, HeaderValue::from_static("max-age=3600")),
            ],
            png,
        )
            .into_response())
    })
    .await
}

fn read_detections(video: &VideoDir) -> ApiResult<DetectionDoc> {
    let path = video
        .existing(corpus::DETECTIONS)
        .ok_or_else(|| ApiError::not_found(format!("{}: no detections", video.id)))?;
    Ok(DetectionDoc::load(&path)?)
}

async fn get_detections(
    State(state): State<Arc<ReviewState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<DetectionDoc>> {
    blocking(move || Ok(Json(read_detections(&state.video(&id)?)?))).await
}

/// Current annotation of a video and where it came from.
pub fn current_annotations(video: &VideoDir) -> ApiResult<(GroundTruthDoc, &'static str)> {
    for (name, source) in [(corpus::ANNOTATIONS, "annotations"), (corpus::GROUND_TRUTH, "ground_truth")] {
        if let Some(path) = video.existing(name) {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
            // Served even when invalid so the reviewer can fix it.
            let doc: GroundTruthDoc = serde_json::from_value(value).map_err(|e| Error::json(&path, e))?;
            return Ok((doc, source));
        }
    }
    let det = read_detections(video)
        .map_err(|_| ApiError::not_found(format!("{}: no annotations, ground truth or detections", video.id)))?;
    let frame_count = match det.frame_count {
        Some(n) => n,
        None => frame_geometry(video)?.0,
    };
    let fps = det
        .fps
        .or(video.sidecar()?.map(|s| s.fps))
        .unwrap_or(VideoSidecar::default().fps);
    Ok((GroundTruthDoc::draft_from_detections(&det, fps, frame_count), "draft"))
}

async fn get_annotations(State(state): State<Arc<ReviewState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    blocking(move || {
        let (doc, source) = current_annotations(&state.video(&id)?)?;
        let mut resp = Json(doc).into_response();
        resp.headers_mut()
            .insert("x-annotation-source", HeaderValue::from_static(source));
        Ok(resp)
    })
    .await
}

async fn put_annotations(
    State(state): State<Arc<ReviewState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Json<serde_json::Value>> {
    let video = state.video(&id)?;
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    let doc = GroundTruthDoc::from_json_str(text)?;
    if doc.video != video.id {
        return Err(Error::Validation(vec![ValidationIssue::new(
            "video",
            format!("document is for {:?}, not {:?}", doc.video, video.id),
        )])
        .into());
    }
    let (count, _, _) = frame_geometry(&video)?;
    if doc.frame_count != count {
        return Err(Error::Validation(vec![ValidationIssue::new(
            "frame_count",
            format!("video has {count} frames, document says {}", doc.frame_count),
        )])
        .into());
    }
    let lock = state.lock_for(&video.id);
    let _guard = lock.lock().await;
    let path = video.file(corpus::ANNOTATIONS);
    let n = doc.transitions.len();
    blocking(move || Ok(doc.save(&path)?)).await?;
    log::info!("{}: saved {n} transitions", video.id);
    Ok(Json(serde_json::json!({ "video": video.id, "transitions": n })))
}

pub fn router(state: Arc<ReviewState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/videos", get(list_videos))
        .route("/api/videos/{id}", get(get_video))
        .route("/api/videos/{id}/frames/{n}", get(get_frame))
        .route("/api/videos/{id}/detections", get(get_detections))
        .route("/api/videos/{id}/annotations", get(get_annotations).put(put_annotations))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(args: &crate::args::ReviewArgs) -> anyhow::Result<()> {
    if !args.corpus.is_dir() {
        anyhow::bail!("{}: not a directory", args.corpus.display());
    }
    let state = ReviewState::new(&args.corpus);
    let app = router(state, args.static_dir.as_deref());
    let addr = std::net::SocketAddr::new(args.host, args.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| anyhow::anyhow!("cannot listen on {addr}: {e}"))?;
    println!("serving {} on http://{}", args.corpus.display(), listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
