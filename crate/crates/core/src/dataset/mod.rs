//! Ground-truth documents, training manifests and the synthetic lecture
//! video generator.

mod gt;
mod manifest;
mod synth;

pub use gt::{FrameCategory, GroundTruthDoc, Interval, SlideInterval};
pub use crate::clip::ClipTask;
pub use manifest::{
    class_weights, inverse_frequency_weights, generate_clip_manifest, generate_pair_manifest, ClassWeights, ClipClass, ClipEntry,
    ClipManifest, PairEntry, PairManifest, PairManifestConfig, SkipReport, TrainingMeta,
};
pub use synth::{
    synthesize_video, write_synthetic_video, GeometryConfig, Hold, SceneKind, SceneSpec, SyntheticScript,
    SyntheticVideo, TransitionOut, MIN_HOLD_MARGIN,
};
