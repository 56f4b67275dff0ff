//! Acceptance suite. One line per criterion; exits non-zero if any fails.
//!
//! Runs the real binary for the end-to-end checks and the library for the
//! property checks. Every random input is seeded.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::Value;
use slidetx_core::clip::ClassifiedCandidate;
use slidetx_core::dataset::{
    generate_clip_manifest, generate_pair_manifest, ClipClass, ClipTask, GroundTruthDoc, PairManifestConfig,
};
use slidetx_core::frame::content_size;
use slidetx_core::oracles::{brute_force_mutual_matches, reference_segments, VerdictScript};
use slidetx_core::record::TransitionKind;
use slidetx_core::{
    compute_metrics, detect_segments, fuse, match_bidirectional, preprocess, CandidateKind, ClipConfig,
    DetectionDoc, DetectorConfig, EvalConfig, Frame, FrameSpec, PairLabel, Roi, SceneLabel, TransitionCandidate,
    TransitionLabel, TransitionRecord,
};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn bin(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_slidetx"))
        .args(args)
        .env_remove("SLIDETX_DECODER")
        .output()
        .map_err(|e| format!("cannot start slidetx: {e}"))?;
    if !out.status.success() {
        return Err(format!("slidetx {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

#[derive(Deserialize)]
struct PublishedRow {
    name: String,
    transitions: usize,
    tp: usize,
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    precision: f64,
    recall: f64,
    f1: f64,
}

#[derive(Deserialize)]
struct Published {
    ground_truth_total: usize,
    rows: Vec<PublishedRow>,
}

fn published() -> Result<Published, String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/published_counts.json");
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn table_arithmetic() -> Check {
    let start = Instant::now();
    let table = published()?;
    ensure!(table.rows.len() == 10, "expected 10 rows, got {}", table.rows.len());
    let mut worst = 0f64;
    for row in &table.rows {
        let m = compute_metrics(row.tp, row.fp, row.fn_);
        for (what, got, want) in [
            ("precision", m.precision, row.precision),
            ("recall", m.recall, row.recall),
            ("f1", m.f1, row.f1),
        ] {
            let got = got.ok_or_else(|| format!("{}: {what} undefined", row.name))?;
            let err = (got - want).abs();
            ensure!(err <= 0.01, "{}: {what} {got:.4} vs published {want:.2}", row.name);
            worst = worst.max(err);
        }
    }
    let gt = &table.rows[0];
    ensure!(
        (gt.precision, gt.recall, gt.f1) == (100.0, 100.0, 100.0),
        "ground-truth row is not 100/100/100"
    );
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("{} rows, max deviation {worst:.4}", table.rows.len()))
}

fn count_consistency() -> Check {
    let table = published()?;
    ensure!(table.ground_truth_total == 380, "ground truth total {}", table.ground_truth_total);
    for row in &table.rows {
        let m = compute_metrics(row.tp, row.fp, row.fn_);
        ensure!(m.n_predicted == row.transitions, "{}: TP + FP = {} but {} transitions", row.name, m.n_predicted, row.transitions);
        ensure!(row.fn_ == table.ground_truth_total - row.tp, "{}: FN {} != 380 - TP", row.name, row.fn_);
        ensure!(m.n_ground_truth == 380, "{}: TP + FN = {}", row.name, m.n_ground_truth);
    }
    Ok(format!("{} rows", table.rows.len()))
}

fn corpus_videos(corpus: &Path) -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(corpus)
        .map(|rd| rd.filter_map(|e| e.ok()).map(|e| e.path()).filter(|p| p.is_dir()).collect())
        .unwrap_or_default();
    dirs.sort();
    dirs
}

fn load_gt(dir: &Path) -> Result<GroundTruthDoc, String> {
    GroundTruthDoc::load(&dir.join("gt.json")).map_err(|e| e.to_string())
}

fn pooled(corpus: &Path) -> Result<Value, String> {
    let text = bin(&["evaluate", "--corpus", p(corpus), "--radius", "20", "--format", "json"])?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok(v["pooled"].clone())
}

const VIDEOS: usize = 26;

/// Renders the shared corpus (noise sigma 1), then runs oracle detection.
fn oracle_end_to_end(corpus: &Path) -> Check {
    let start = Instant::now();
    bin(&["synth", "-o", p(corpus), "--count", &VIDEOS.to_string(), "--seed", "2024", "--noise", "1"])?;
    let videos = corpus_videos(corpus);
    ensure!(videos.len() >= VIDEOS, "{} videos rendered", videos.len());
    let (mut hard, mut gradual, mut video) = (0, 0, 0);
    for dir in &videos {
        let gt = load_gt(dir)?;
        hard += gt.transitions.iter().filter(|t| t.kind == TransitionKind::Hard).count();
        gradual += gt.transitions.iter().filter(|t| t.kind == TransitionKind::Gradual).count();
        video += gt.video_intervals.len();
    }
    ensure!(hard >= 50 && gradual >= 20 && video >= 10, "corpus too small: {hard} hard, {gradual} gradual, {video} video");

    bin(&["detect", "--corpus", p(corpus), "--pair-backend", "oracle", "--clip-backend", "oracle"])?;
    let pooled = pooled(corpus)?;
    let f1 = pooled["f1"].as_f64().ok_or("no pooled f1")?;
    ensure!(f1 == 100.0, "pooled F1 {f1}: {pooled}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!(
        "{} videos, {hard} hard / {gradual} gradual / {video} video segments, F1 100.00 in {:.1} s",
        videos.len(),
        elapsed.as_secs_f64()
    ))
}

/// Unmatched predictions lying wholly inside a labeled video interval.
fn false_positives_in_video(corpus: &Path) -> Result<usize, String> {
    let mut count = 0;
    for dir in corpus_videos(corpus) {
        let gt = load_gt(&dir)?;
        let det = DetectionDoc::load(&dir.join("detections.json")).map_err(|e| e.to_string())?;
        let pred = det.records();
        let matched: Vec<usize> = match_bidirectional(&pred, &gt.transitions, &EvalConfig::default())
            .pairs
            .iter()
            .map(|&(i, _)| i)
            .collect();
        count += pred
            .iter()
            .enumerate()
            .filter(|(i, r)| {
                !matched.contains(i)
                    && gt.video_intervals.iter().any(|v| v.start <= r.start && r.end <= v.end)
            })
            .count();
    }
    Ok(count)
}

fn diff_baseline(corpus: &Path) -> Check {
    ensure!(!corpus_videos(corpus).is_empty(), "shared corpus missing");
    bin(&["detect", "--corpus", p(corpus), "--pair-backend", "diff", "--first-stage-only", "--static-min-frames", "8"])?;
    let first = pooled(corpus)?;
    let recall = first["recall"].as_f64().ok_or("no recall")?;
    let fp_video = false_positives_in_video(corpus)?;
    ensure!(recall >= 95.0, "first-stage recall {recall:.2}");
    ensure!(fp_video >= 1, "no first-stage false positive inside video segments");

    bin(&["detect", "--corpus", p(corpus), "--pair-backend", "diff", "--clip-backend", "oracle", "--static-min-frames", "8"])?;
    let fused = pooled(corpus)?;
    let left = false_positives_in_video(corpus)?;
    ensure!(left == 0, "{left} false positives inside video segments after fusion");
    Ok(format!(
        "first stage recall {recall:.2}, precision {:.2}, {fp_video} FP in video; fused precision {:.2}, 0 FP in video",
        first["precision"].as_f64().unwrap_or(f64::NAN),
        fused["precision"].as_f64().unwrap_or(f64::NAN)
    ))
}

fn state_machine() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut frames = 0usize;
    for case in 0..10_000u64 {
        let n = rng.random_range(0..=500);
        let t = rng.random_range(1..=20);
        let cfg = DetectorConfig {
            static_min_frames: t,
            ..DetectorConfig::default()
        };
        let script = VerdictScript::random(case, n);
        let mut calls = 0;
        let got = detect_segments(n, &cfg, |a, k| {
            calls += 1;
            Ok(script.verdict(a, k))
        })
        .map_err(|e| format!("case {case}: {e}"))?;
        let want = reference_segments(n, t, |a, k| script.verdict(a, k));
        ensure!(got == want, "case {case} (n {n}, t {t}): segments differ");
        ensure!(calls == n.saturating_sub(1), "case {case}: {calls} classifier calls for {n} frames");
        frames += n;
    }
    Ok(format!("10000 scripts, {frames} frames"))
}

fn random_records(rng: &mut ChaCha8Rng) -> Vec<TransitionRecord> {
    let n = rng.random_range(0..25);
    (0..n)
        .map(|_| {
            let start = rng.random_range(0..400);
            TransitionRecord::new(TransitionKind::Hard, start, start + rng.random_range(0..25))
        })
        .collect()
}

fn matcher() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..1000 {
        let pred = random_records(&mut rng);
        let gt = random_records(&mut rng);
        let radius = rng.random_range(0.0..40.0);
        let cfg = EvalConfig { match_radius: radius };
        let m = match_bidirectional(&pred, &gt, &cfg);
        ensure!(m.tp <= pred.len().min(gt.len()), "case {case}: tp {} exceeds list sizes", m.tp);
        ensure!(m.tp == m.pairs.len(), "case {case}: tp disagrees with pairs");

        let mut ps: Vec<usize> = m.pairs.iter().map(|p| p.0).collect();
        let mut gs: Vec<usize> = m.pairs.iter().map(|p| p.1).collect();
        ps.sort_unstable();
        ps.dedup();
        gs.sort_unstable();
        gs.dedup();
        ensure!(ps.len() == m.tp && gs.len() == m.tp, "case {case}: a record matched twice");

        let mut want = brute_force_mutual_matches(&pred, &gt, radius);
        let mut got = m.pairs.clone();
        want.sort_unstable();
        got.sort_unstable();
        ensure!(got == want, "case {case}: pairs differ from brute force");

        let mut sp = pred.clone();
        let mut sg = gt.clone();
        sp.shuffle(&mut rng);
        sg.shuffle(&mut rng);
        let shuffled = match_bidirectional(&sp, &sg, &cfg);
        ensure!(shuffled.tp == m.tp, "case {case}: tp changed under permutation");
        let values = |pairs: &[(usize, usize)], p: &[TransitionRecord], g: &[TransitionRecord]| {
            let mut v: Vec<_> = pairs.iter().map(|&(i, j)| (p[i], g[j])).collect();
            v.sort_by_key(|(a, b)| (a.start, a.end, b.start, b.end));
            v
        };
        ensure!(
            values(&shuffled.pairs, &sp, &sg) == values(&m.pairs, &pred, &gt),
            "case {case}: matched records changed under permutation"
        );

        let wider = match_bidirectional(&pred, &gt, &EvalConfig { match_radius: radius + rng.random_range(0.0..20.0) });
        ensure!(wider.tp >= m.tp, "case {case}: larger radius lost matches");
    }
    Ok("1000 instances".into())
}

fn check_patch(frame: &Frame, spec: &FrameSpec, expect_content: (u32, u32)) -> Result<(), String> {
    let out = preprocess(frame, spec).map_err(|e| e.to_string())?;
    ensure!((out.width(), out.height()) == (256, 256), "output {}x{}", out.width(), out.height());
    let (cw, ch) = expect_content;
    for (i, px) in out.pixels().chunks_exact(3).enumerate() {
        let (x, y) = (i as u32 % 256, i as u32 / 256);
        let inside = x < cw && y < ch;
        ensure!(inside || px == [0, 0, 0], "padding pixel ({x},{y}) is {px:?}");
        ensure!(!inside || px.iter().all(|&v| v > 0), "content pixel ({x},{y}) is zero");
    }
    Ok(())
}

fn nonzero_frame(rng: &mut ChaCha8Rng, w: u32, h: u32) -> Frame {
    let pixels = (0..w * h * 3).map(|_| rng.random_range(1..=255u8)).collect();
    Frame::new(0, w, h, 3, pixels).expect("sized buffer")
}

fn preprocessing() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..200 {
        let (w, h) = (rng.random_range(1..=1200), rng.random_range(1..=1200));
        let frame = nonzero_frame(&mut rng, w, h);
        let crop = rng.random_bool(0.5).then(|| {
            let cw = rng.random_range(1..=w);
            let ch = rng.random_range(1..=h);
            Roi::new(rng.random_range(0..=w - cw), rng.random_range(0..=h - ch), cw, ch)
        });
        let (rw, rh) = crop.map_or((w, h), |r| (r.width, r.height));
        let content = content_size(rw, rh, 256);
        ensure!(content.0.max(content.1) == 256, "case {case}: longer side {content:?}");
        // Content height implied by the width and the source aspect ratio.
        let (long, short, c_long, c_short) = if rw >= rh {
            (rw, rh, content.0, content.1)
        } else {
            (rh, rw, content.1, content.0)
        };
        let ideal = f64::from(c_long) * f64::from(short) / f64::from(long);
        ensure!(
            (f64::from(c_short) - ideal).abs() <= 1.0 || c_short == 1,
            "case {case}: {rw}x{rh} scaled to {content:?}"
        );
        let spec = FrameSpec {
            crop,
            ..FrameSpec::default()
        };
        check_patch(&frame, &spec, content).map_err(|e| format!("case {case} ({w}x{h}, crop {crop:?}): {e}"))?;
    }
    ensure!(content_size(1920, 1080, 256) == (256, 144), "1920x1080 -> {:?}", content_size(1920, 1080, 256));
    let hd = nonzero_frame(&mut rng, 1920, 1080);
    check_patch(&hd, &FrameSpec::default(), (256, 144)).map_err(|e| format!("1920x1080: {e}"))?;
    Ok("200 geometries, 1920x1080 -> 256x144".into())
}

fn fusion() -> Check {
    let mut dropped = Vec::new();
    for t in TransitionLabel::ALL {
        for s in SceneLabel::ALL {
            for kind in [CandidateKind::SlideSlide, CandidateKind::SlideVideo, CandidateKind::VideoSlide] {
                let item = ClassifiedCandidate {
                    candidate: TransitionCandidate {
                        kind,
                        gap_start: 40,
                        gap_end: 41,
                        context: (0, 1),
                    },
                    transition: t,
                    scene: s,
                };
                let out = fuse(&[item]);
                let should_drop = t == TransitionLabel::Video && s == SceneLabel::Video;
                ensure!(out.is_empty() == should_drop, "({t}, {s}) on {kind:?}: kept {}", out.len());
                if out.is_empty() && !dropped.contains(&(t, s)) {
                    dropped.push((t, s));
                }
            }
        }
    }
    ensure!(dropped == [(TransitionLabel::Video, SceneLabel::Video)], "dropped {dropped:?}");
    Ok("12 combinations, only (video, video) dropped".into())
}

#[derive(Clone, Copy, PartialEq)]
enum Cat {
    Slide(i64),
    Video,
    Between,
}

/// What the labeled intervals say about one frame.
fn category(gt: &GroundTruthDoc, f: usize) -> Cat {
    if let Some(s) = gt.slide_intervals.iter().find(|s| s.start <= f && f <= s.end) {
        Cat::Slide(s.slide_id)
    } else if gt.video_intervals.iter().any(|v| v.start <= f && f <= v.end) {
        Cat::Video
    } else {
        Cat::Between
    }
}

fn expected_class(gt: &GroundTruthDoc, start: usize, len: usize, task: ClipTask) -> ClipClass {
    let cats: Vec<Cat> = (start..start + len).map(|f| category(gt, f)).collect();
    let videos = cats.iter().filter(|&&c| c == Cat::Video).count();
    match task {
        ClipTask::Scene => ClipClass::Scene(match videos {
            0 => SceneLabel::Slide,
            v if v == len => SceneLabel::Video,
            _ => SceneLabel::SlideVideoTransition,
        }),
        ClipTask::Transition => ClipClass::Transition(if videos > 0 {
            TransitionLabel::Video
        } else if cats.contains(&Cat::Between) {
            TransitionLabel::Gradual
        } else if cats.iter().all(|&c| c == cats[0]) {
            TransitionLabel::StaticSlide
        } else {
            TransitionLabel::Hard
        }),
    }
}

fn manifests(corpus: &Path, scratch: &Path) -> Check {
    let videos = corpus_videos(corpus);
    ensure!(!videos.is_empty(), "shared corpus missing");
    let clip_cfg = ClipConfig::default();
    let (mut pairs, mut clips) = (0, 0);
    for dir in &videos {
        let gt = load_gt(dir)?;
        let m = generate_pair_manifest(&gt, &PairManifestConfig { seed: 3, ..Default::default() }).map_err(|e| e.to_string())?;
        ensure!(m.positives() == m.negatives() && m.positives() > 0, "{}: {} positives, {} negatives", gt.video, m.positives(), m.negatives());
        for e in &m.entries {
            let (a, b) = (category(&gt, e.frame_i), category(&gt, e.frame_j));
            let ok = match (a, b, e.label) {
                (Cat::Slide(x), Cat::Slide(y), PairLabel::Same) => x == y,
                (Cat::Slide(x), Cat::Slide(y), PairLabel::Different) => x != y,
                _ => false,
            };
            ensure!(ok, "{}: pair ({}, {}) labeled {:?}", gt.video, e.frame_i, e.frame_j, e.label);
        }
        pairs += m.entries.len();
        for task in [ClipTask::Transition, ClipTask::Scene] {
            let m = generate_clip_manifest(&gt, &clip_cfg, task, 3).map_err(|e| e.to_string())?;
            for e in &m.entries {
                ensure!(e.start + clip_cfg.clip_len <= gt.frame_count, "{}: clip at {} leaves the video", gt.video, e.start);
                let want = expected_class(&gt, e.start, clip_cfg.clip_len, task);
                ensure!(e.class == want, "{}: clip at {} labeled {} but frames say {}", gt.video, e.start, e.class, want);
            }
            clips += m.entries.len();
        }
    }

    let gts: Vec<PathBuf> = videos.iter().map(|d| d.join("gt.json")).collect();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = scratch.join(name);
        let mut args = vec!["make-data", "-o", p(&out), "--seed", "9"];
        args.extend(gts.iter().map(|g| p(g)));
        bin(&args)?;
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok())
            .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap_or_default()))
            .collect();
        files.sort();
        outputs.push(files);
    }
    ensure!(!outputs[0].is_empty(), "make-data wrote nothing");
    ensure!(outputs[0] == outputs[1], "seeded regeneration differs");
    Ok(format!(
        "{pairs} pairs balanced, {clips} clip labels checked, {} files byte-identical",
        outputs[0].len()
    ))
}

fn main() {
    let scratch = tempfile::tempdir().expect("temp dir");
    let corpus = scratch.path().join("corpus");
    let checks: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("table arithmetic", Box::new(table_arithmetic)),
        ("count consistency", Box::new(count_consistency)),
        ("oracle end-to-end", Box::new(|| oracle_end_to_end(&corpus))),
        ("diff baseline and fusion", Box::new(|| diff_baseline(&corpus))),
        ("state machine equivalence", Box::new(state_machine)),
        ("matcher properties", Box::new(matcher)),
        ("preprocessing geometry", Box::new(preprocessing)),
        ("fusion exhaustiveness", Box::new(fusion)),
        ("manifest soundness", Box::new(|| manifests(&corpus, scratch.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.2} s)"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why} ({secs:.2} s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
