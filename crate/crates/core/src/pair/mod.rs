//! Same-slide / different-slide decisions for a pair of preprocessed frames.

mod blur;
mod neural;
mod oracle;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{ColorMode, Frame};

pub use blur::{gaussian_blur, gaussian_kernel, sigma_for_kernel, DiffBlur, DiffBlurConfig};
pub use neural::{load_pair_model, NeuralPairModel, PairModelContract};
pub use oracle::{OracleScript, PairOracle};

/// Class 1 of the pair task is "same slide", class 0 "different".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairLabel {
    Different,
    Same,
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairLabel::Same => "same",
            PairLabel::Different => "different",
        })
    }
}

/// Outcome of one comparison. `score` is a dissimilarity in `[0, 1]`:
/// the normalized mean blurred difference for the diff backend, the
/// probability of "different" for the neural one, 0 or 1 for the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairVerdict {
    pub value: PairLabel,
    pub score: f64,
}

impl PairVerdict {
    pub fn is_same(&self) -> bool {
        self.value == PairLabel::Same
    }
}

/// A frame after backend-specific preparation (blurring, normalization),
/// so detection can prepare each frame once and compare it many times.
#[derive(Debug, Clone)]
pub struct PreparedFrame {
    index: usize,
    width: u32,
    height: u32,
    channels: u8,
    payload: Payload,
}

#[derive(Debug, Clone)]
enum Payload {
    Blurred(Vec<f32>),
    Frame(Frame),
    IndexOnly,
}

impl PreparedFrame {
    pub fn index(&self) -> usize {
        self.index
    }

    fn geometry_matches(&self, other: &PreparedFrame) -> Result<()> {
        if self.width != other.width || self.height != other.height || self.channels != other.channels
        {
            return Err(Error::FrameMismatch(format!(
                "frame {} is {}x{}x{}, frame {} is {}x{}x{}",
                self.index,
                self.width,
                self.height,
                self.channels,
                other.index,
                other.width,
                other.height,
                other.channels
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum PairBackend {
    Diff(DiffBlur),
    Neural(NeuralPairModel),
    Oracle(PairOracle),
}

impl PairBackend {
    pub fn name(&self) -> &'static str {
        match self {
            PairBackend::Diff(_) => "diff",
            PairBackend::Neural(_) => "neural",
            PairBackend::Oracle(_) => "oracle",
        }
    }

    /// Color mode the backend expects its input frames in, if it cares.
    pub fn color_mode(&self) -> Option<ColorMode> {
        match self {
            PairBackend::Diff(d) => Some(d.config().color_mode),
            PairBackend::Neural(n) => Some(n.contract().color_mode),
            PairBackend::Oracle(_) => None,
        }
    }

    pub fn prepare(&self, frame: &Frame) -> Result<PreparedFrame> {
        let payload = match self {
            PairBackend::Diff(diff) => Payload::Blurred(diff.prepare(frame)?),
            PairBackend::Neural(model) => {
                model.check_frame(frame)?;
                Payload::Frame(frame.clone())
            }
            PairBackend::Oracle(_) => Payload::IndexOnly,
        };
        let channels = match (self, &payload) {
            (PairBackend::Diff(diff), _) => diff.config().color_mode.channels(),
            _ => frame.channels(),
        };
        Ok(PreparedFrame {
            index: frame.index(),
            width: frame.width(),
            height: frame.height(),
            channels,
            payload,
        })
    }

    pub fn compare(&self, a: &PreparedFrame, b: &PreparedFrame) -> Result<PairVerdict> {
        a.geometry_matches(b)?;
        match (self, &a.payload, &b.payload) {
            (PairBackend::Diff(diff), Payload::Blurred(x), Payload::Blurred(y)) => {
                Ok(diff.verdict(x, y))
            }
            (PairBackend::Neural(model), Payload::Frame(x), Payload::Frame(y)) => model.classify(x, y),
            (PairBackend::Oracle(oracle), _, _) => oracle.verdict(a.index, b.index),
            _ => Err(Error::Backend(format!(
                "frames were prepared for a different backend than {}",
                self.name()
            ))),
        }
    }
}

/// Classify two preprocessed frames as showing the same slide or not.
pub fn classify_pair(a: &Frame, b: &Frame, backend: &PairBackend) -> Result<PairVerdict> {
    if !a.same_geometry(b) {
        return Err(Error::FrameMismatch(format!(
            "frame {} is {}x{}x{}, frame {} is {}x{}x{}",
            a.index(),
            a.width(),
            a.height(),
            a.channels(),
            b.index(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    let pa = backend.prepare(a)?;
    let pb = backend.prepare(b)?;
    backend.compare(&pa, &pb)
}
