//! Shared inputs for the benchmarks.

use slidetx_core::dataset::{synthesize_video, SyntheticScript, SyntheticVideo};
use slidetx_core::Frame;

/// A fixed synthetic lecture used by every benchmark.
pub fn lecture(seed: u64) -> SyntheticVideo {
    let mut script = SyntheticScript::random(format!("bench{seed}"), seed);
    script.noise_sigma = 1.0;
    synthesize_video(&script).expect("random scripts are valid")
}

/// Full-HD frame with a deterministic pattern.
pub fn full_hd_frame() -> Frame {
    let (w, h) = (1920u32, 1080u32);
    let pixels = (0..w * h * 3).map(|i| (i.wrapping_mul(2_654_435_761) >> 24) as u8).collect();
    Frame::new(0, w, h, 3, pixels).expect("buffer sized for geometry")
}
