//! Slide-transition detection for lecture videos.
//!
//! The pipeline compares each frame against an anchor frame to find static
//! slides and moving (video) stretches, proposes transition candidates at
//! the gaps between them, then classifies short clips around each candidate
//! with two clip classifiers and drops candidates both call video.

pub mod clip;
pub mod dataset;
pub mod detector;
mod error;
pub mod eval;
pub mod frame;
pub mod model;
pub mod pair;
pub mod pipeline;
pub mod record;

#[cfg(any(test, feature = "oracles"))]
pub mod oracles;

pub use error::{Error, Result, ValidationIssue};

pub use clip::{
    aggregate_votes, fuse, ClipBackend, ClipConfig, SceneClass, SceneLabel, TransitionClass,
    TransitionLabel,
};
pub use dataset::GroundTruthDoc;
pub use detector::{
    derive_candidates, detect_segments, CandidateKind, DetectorConfig, Segment, SegmentKind,
    TransitionCandidate,
};
pub use eval::{compute_metrics, match_bidirectional, EvalConfig, MetricsReport};
pub use frame::{preprocess, ColorMode, Frame, FrameSpec, Roi, VideoSource};
pub use pair::{classify_pair, PairBackend, PairLabel, PairVerdict};
pub use record::{slide_keyframes, write_json_atomic, DetectionDoc, TransitionKind, TransitionRecord};

/// Crate version, embedded in every output artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
