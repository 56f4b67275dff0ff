//! Transition records and the detection document shared by the detector,
//! the evaluator and the review server.

use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    Hard,
    Gradual,
    SlideVideo,
    VideoSlide,
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransitionKind::Hard => "hard",
            TransitionKind::Gradual => "gradual",
            TransitionKind::SlideVideo => "slide_video",
            TransitionKind::VideoSlide => "video_slide",
        })
    }
}

/// A transition as a frame pair: for hard cuts `(last old frame, first new
/// frame)`, for gradual ones the frames bracketing the blend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub kind: TransitionKind,
    pub start: usize,
    pub end: usize,
}

impl TransitionRecord {
    pub fn new(kind: TransitionKind, start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { kind, start, end }
    }

    pub fn point(&self) -> (f64, f64) {
        (self.start as f64, self.end as f64)
    }
}

/// Aggregated clip votes attached to a detected transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteSummary {
    pub transition: String,
    pub scene: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectedTransition {
    pub kind: TransitionKind,
    pub start: usize,
    pub end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub votes: Option<VoteSummary>,
}

impl DetectedTransition {
    pub fn record(&self) -> TransitionRecord {
        TransitionRecord::new(self.kind, self.start, self.end)
    }
}

impl From<TransitionRecord> for DetectedTransition {
    fn from(r: TransitionRecord) -> Self {
        Self {
            kind: r.kind,
            start: r.start,
            end: r.end,
            votes: None,
        }
    }
}

/// Detection output file. Ground-truth documents carry the same
/// `transitions` array, so either can be read as a `DetectionDoc` for
/// evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionDoc {
    pub video: String,
    #[serde(default)]
    pub fps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_count: Option<usize>,
    pub transitions: Vec<DetectedTransition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl DetectionDoc {
    pub fn records(&self) -> Vec<TransitionRecord> {
        self.transitions.iter().map(DetectedTransition::record).collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        for (i, t) in doc.transitions.iter().enumerate() {
            if t.start > t.end {
                return Err(Error::Validation(vec![crate::ValidationIssue::new(
                    format!("transitions[{i}]"),
                    format!("start {} after end {}", t.start, t.end),
                )]));
            }
        }
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json_atomic(path, self)
    }
}

/// Serialize to `path` through a temporary sibling and a rename, so readers
/// never observe a partially written file.
pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = dir.join(format!(".{name}.{}.{n}.tmp", std::process::id()));
    std::fs::write(&tmp, text + "\n").map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// One representative frame per slide: the last frame before each
/// transition, plus the final frame of the video. Stretches between a
/// slide-video and the next video-slide transition are footage and yield
/// nothing.
pub fn slide_keyframes(transitions: &[TransitionRecord], frame_count: usize) -> Vec<usize> {
    let mut sorted = transitions.to_vec();
    sorted.sort_by_key(|t| (t.start, t.end));
    let mut out = Vec::new();
    let mut in_video = false;
    let mut from = 0;
    for t in &sorted {
        if !in_video && t.kind != TransitionKind::VideoSlide && t.start >= from && t.start < frame_count {
            out.push(t.start);
        }
        in_video = t.kind == TransitionKind::SlideVideo;
        from = t.end;
    }
    if !in_video && frame_count > 0 && from < frame_count {
        out.push(frame_count - 1);
    }
    out.dedup();
    out
}
