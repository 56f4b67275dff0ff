//! Second stage: short clips around each candidate, classified by a
//! transition network on the cropped stream and a scene network on the raw
//! stream, then fused.

mod backend;
mod fuse;
mod labels;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::detector::TransitionCandidate;
use crate::error::{Error, Result};
use crate::frame::Frame;

pub use backend::{
    classify_clip, load_clip_model, scene_label_for, transition_label_for, ClipBackend, ClipModelContract,
    ClipOracle, ClipVerdict, NeuralClipModel,
};
pub use fuse::{candidate_records, fuse, ClassifiedCandidate};
pub use labels::{aggregate_votes, ClipTask, SceneClass, SceneLabel, TransitionClass, TransitionLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipConfig {
    pub clip_len: usize,
    pub stride: usize,
    /// Frames on either side of the gap that clips must also cover.
    pub margin: usize,
}

impl Default for ClipConfig {
    fn default() -> Self {
        Self {
            clip_len: 8,
            stride: 4,
            margin: 4,
        }
    }
}

impl ClipConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clip_len < 2 {
            return Err(Error::Config(format!("clip_len must be >= 2, got {}", self.clip_len)));
        }
        if self.stride == 0 || self.stride > self.clip_len {
            return Err(Error::Config(format!(
                "stride must be in 1..={}, got {}",
                self.clip_len, self.stride
            )));
        }
        Ok(())
    }
}

/// Which preprocessed stream a clip was cut from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamKind {
    /// Slide region only.
    Cropped,
    /// Full frame.
    Raw,
}

impl fmt::Display for StreamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StreamKind::Cropped => "cropped",
            StreamKind::Raw => "raw",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Clip {
    start: usize,
    frames: Vec<Frame>,
    stream: StreamKind,
}

impl Clip {
    /// Frames must be consecutive, starting at `start`, with one geometry.
    pub fn new(start: usize, frames: Vec<Frame>, stream: StreamKind) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::InvalidInput("empty clip".into()));
        };
        for (i, f) in frames.iter().enumerate() {
            if f.index() != start + i {
                return Err(Error::InvalidInput(format!(
                    "clip at {start}: position {i} holds frame {}",
                    f.index()
                )));
            }
            if !f.same_geometry(first) {
                return Err(Error::FrameMismatch(format!(
                    "clip at {start}: frame {} geometry differs",
                    f.index()
                )));
            }
        }
        Ok(Self { start, frames, stream })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.start + self.frames.len() - 1
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn stream(&self) -> StreamKind {
        self.stream
    }
}

/// Clip starts for a gap. Starts lie on a grid of step `stride` through
/// `gap_start` (so one clip begins at the gap when it can), beginning at the
/// last grid point not after `gap_start - margin` and continuing until
/// `gap_end + margin` is covered. Starts are clamped to `[0, n - clip_len]`.
pub fn plan_clip_starts(gap_start: usize, gap_end: usize, n_frames: usize, cfg: &ClipConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let l = cfg.clip_len;
    if n_frames < l {
        return Err(Error::InvalidInput(format!(
            "stream has {n_frames} frames, shorter than clip_len {l}"
        )));
    }
    if gap_start > gap_end || gap_end >= n_frames {
        return Err(Error::InvalidInput(format!(
            "gap {gap_start}->{gap_end} outside stream of {n_frames} frames"
        )));
    }
    let max_start = n_frames - l;
    let lo = gap_start.saturating_sub(cfg.margin);
    let hi = (gap_end + cfg.margin).min(n_frames - 1);
    let back = (gap_start - lo).div_ceil(cfg.stride) * cfg.stride;
    let first = gap_start.saturating_sub(back).min(max_start);

    // Smallest grid point after `s`; only off-grid after clamping at 0.
    let phase = gap_start % cfg.stride;
    let next_grid = |s: usize| {
        if s < phase {
            phase
        } else {
            s + cfg.stride - (s - phase) % cfg.stride
        }
    };
    let mut starts = vec![first];
    let mut s = first;
    while s + l - 1 < hi {
        let next = next_grid(s).min(max_start);
        if next == s {
            break;
        }
        starts.push(next);
        s = next;
    }
    Ok(starts)
}

/// Random access to preprocessed frames by index.
pub trait FrameLookup {
    fn frame(&self, index: usize) -> Result<Frame>;
}

impl FrameLookup for BTreeMap<usize, Frame> {
    fn frame(&self, index: usize) -> Result<Frame> {
        self.get(&index)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("frame {index} not loaded")))
    }
}

impl FrameLookup for [Frame] {
    fn frame(&self, index: usize) -> Result<Frame> {
        self.get(index)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("frame {index} out of range")))
    }
}

impl FrameLookup for Vec<Frame> {
    fn frame(&self, index: usize) -> Result<Frame> {
        self.as_slice().frame(index)
    }
}

pub fn extract_clips(
    candidate: &TransitionCandidate,
    frames: &(impl FrameLookup + ?Sized),
    n_frames: usize,
    stream: StreamKind,
    cfg: &ClipConfig,
) -> Result<Vec<Clip>> {
    plan_clip_starts(candidate.gap_start, candidate.gap_end, n_frames, cfg)?
        .into_iter()
        .map(|s| {
            let frames = (s..s + cfg.clip_len).map(|i| frames.frame(i)).collect::<Result<Vec<_>>>()?;
            Clip::new(s, frames, stream)
        })
        .collect()
}
