use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PairBackend, PairLabel, PairVerdict};
use crate::error::{Error, Result};
use crate::frame::{ColorMode, Frame, DEFAULT_PATCH_SIZE};
use crate::model::{softmax, OnnxModel};

/// Input/output contract of a pair network: both frames stacked along the
/// channel axis (`2 * channels x patch x patch`, NCHW, values in `[0, 1]`),
/// two output scores where index 0 is "different" and index 1 is "same".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairModelContract {
    pub patch_size: u32,
    pub color_mode: ColorMode,
}

impl Default for PairModelContract {
    fn default() -> Self {
        Self {
            patch_size: DEFAULT_PATCH_SIZE,
            color_mode: ColorMode::Rgb,
        }
    }
}

impl PairModelContract {
    pub fn input_channels(&self) -> usize {
        2 * self.color_mode.channels() as usize
    }

    pub fn input_shape(&self) -> [usize; 3] {
        let p = self.patch_size as usize;
        [self.input_channels(), p, p]
    }
}

#[derive(Debug, Clone)]
pub struct NeuralPairModel {
    model: OnnxModel,
    contract: PairModelContract,
}

impl NeuralPairModel {
    pub fn load(path: &Path, contract: PairModelContract) -> Result<Self> {
        let model = OnnxModel::load(
            path,
            &contract.input_shape(),
            &["channels", "rows", "columns"],
            2,
        )?;
        Ok(Self { model, contract })
    }

    pub fn contract(&self) -> &PairModelContract {
        &self.contract
    }

    pub(crate) fn check_frame(&self, frame: &Frame) -> Result<()> {
        let p = self.contract.patch_size;
        let c = self.contract.color_mode.channels();
        if frame.width() != p || frame.height() != p || frame.channels() != c {
            return Err(Error::FrameMismatch(format!(
                "pair model expects {p}x{p}x{c} frames, frame {} is {}x{}x{}",
                frame.index(),
                frame.width(),
                frame.height(),
                frame.channels()
            )));
        }
        Ok(())
    }

    /// Raw output scores for a pair.
    pub fn scores(&self, a: &Frame, b: &Frame) -> Result<[f32; 2]> {
        self.check_frame(a)?;
        self.check_frame(b)?;
        let c = a.channels() as usize;
        let plane = a.width() as usize * a.height() as usize;
        let mut input = Vec::with_capacity(2 * c * plane);
        for frame in [a, b] {
            for ch in 0..c {
                input.extend(
                    frame
                        .pixels()
                        .iter()
                        .skip(ch)
                        .step_by(c)
                        .map(|&v| f32::from(v) / 255.0),
                );
            }
        }
        let out = self.model.run(input)?;
        match out.as_slice() {
            [d, s] if d.is_finite() && s.is_finite() => Ok([*d, *s]),
            other => Err(Error::Backend(format!(
                "pair model returned {} scores {:?}, expected 2 finite values",
                other.len(),
                other
            ))),
        }
    }

    pub(crate) fn classify(&self, a: &Frame, b: &Frame) -> Result<PairVerdict> {
        let probs = softmax(&self.scores(a, b)?);
        let value = if probs[1] >= 0.5 {
            PairLabel::Same
        } else {
            PairLabel::Different
        };
        Ok(PairVerdict {
            value,
            score: probs[0],
        })
    }
}

/// Load a serialized pair network and check it against `contract`.
pub fn load_pair_model(path: &Path, contract: PairModelContract) -> Result<PairBackend> {
    Ok(PairBackend::Neural(NeuralPairModel::load(path, contract)?))
}
