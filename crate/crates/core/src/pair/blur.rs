use serde::{Deserialize, Serialize};

use super::{PairLabel, PairVerdict};
use crate::error::{Error, Result};
use crate::frame::{to_gray, ColorMode, Frame};

/// Frame-difference baseline settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffBlurConfig {
    /// Odd Gaussian kernel size in pixels.
    pub blur_kernel: u32,
    /// Mean absolute difference (0..=255 scale) at or below which two frames
    /// count as the same slide.
    pub diff_threshold: f64,
    pub color_mode: ColorMode,
}

impl Default for DiffBlurConfig {
    fn default() -> Self {
        Self {
            blur_kernel: 21,
            diff_threshold: 4.0,
            color_mode: ColorMode::Rgb,
        }
    }
}

impl DiffBlurConfig {
    pub fn validate(&self) -> Result<()> {
        if self.blur_kernel == 0 || self.blur_kernel % 2 == 0 {
            return Err(Error::Config(format!(
                "blur_kernel must be odd and >= 1, got {}",
                self.blur_kernel
            )));
        }
        if !(self.diff_threshold >= 0.0 && self.diff_threshold.is_finite()) {
            return Err(Error::Config(format!(
                "diff_threshold must be >= 0, got {}",
                self.diff_threshold
            )));
        }
        Ok(())
    }
}

/// Standard deviation used for a kernel of size `k` when none is given:
/// `0.3 * ((k - 1) / 2 - 1) + 0.8`.
pub fn sigma_for_kernel(k: u32) -> f64 {
    0.3 * ((f64::from(k) - 1.0) * 0.5 - 1.0) + 0.8
}

/// Normalized 1-D Gaussian taps.
pub fn gaussian_kernel(k: u32) -> Vec<f32> {
    if k == 1 {
        return vec![1.0];
    }
    let sigma = sigma_for_kernel(k);
    let r = (k / 2) as i64;
    let raw: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| (v / sum) as f32).collect()
}

/// Mirror an out-of-range coordinate without repeating the edge sample
/// (`dcb|abcd|cba`).
#[inline]
fn reflect101(mut i: i64, n: i64) -> usize {
    if n == 1 {
        return 0;
    }
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * n - 2 - i;
        } else {
            return i as usize;
        }
    }
}

/// Separable Gaussian blur of an interleaved 8-bit image into `f32` samples
/// (same layout).
pub fn gaussian_blur(pixels: &[u8], width: u32, height: u32, channels: u8, k: u32) -> Vec<f32> {
    let (w, h, c) = (width as usize, height as usize, channels as usize);
    debug_assert_eq!(pixels.len(), w * h * c);
    let taps = gaussian_kernel(k);
    let r = (taps.len() / 2) as i64;

    // Each row is padded once, then every tap adds a shifted copy.
    let mut padded = vec![0f32; (w + 2 * r as usize) * c];
    let mut horizontal = vec![0f32; pixels.len()];
    for y in 0..h {
        let row = &pixels[y * w * c..(y + 1) * w * c];
        for (px, chunk) in padded.chunks_exact_mut(c).enumerate() {
            let sx = reflect101(px as i64 - r, w as i64);
            for (d, s) in chunk.iter_mut().zip(&row[sx * c..(sx + 1) * c]) {
                *d = f32::from(*s);
            }
        }
        let out = &mut horizontal[y * w * c..(y + 1) * w * c];
        for (i, t) in taps.iter().enumerate() {
            for (d, s) in out.iter_mut().zip(&padded[i * c..i * c + w * c]) {
                *d += t * s;
            }
        }
    }

    let mut out = vec![0f32; pixels.len()];
    let stride = w * c;
    for y in 0..h {
        let rows: Vec<usize> = (-r..=r).map(|o| reflect101(y as i64 + o, h as i64)).collect();
        let dst = &mut out[y * stride..(y + 1) * stride];
        for (t, &sy) in taps.iter().zip(&rows) {
            let src = &horizontal[sy * stride..(sy + 1) * stride];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += t * s;
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct DiffBlur {
    config: DiffBlurConfig,
}

impl DiffBlur {
    pub fn new(config: DiffBlurConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &DiffBlurConfig {
        &self.config
    }

    pub(crate) fn prepare(&self, frame: &Frame) -> Result<Vec<f32>> {
        let frame = match (self.config.color_mode, frame.channels()) {
            (ColorMode::Gray, 3) => to_gray(frame)?,
            (ColorMode::Rgb, 1) => {
                return Err(Error::FrameMismatch(format!(
                    "diff backend configured for rgb, frame {} is gray",
                    frame.index()
                )))
            }
            _ => frame.clone(),
        };
        Ok(gaussian_blur(
            frame.pixels(),
            frame.width(),
            frame.height(),
            frame.channels(),
            self.config.blur_kernel,
        ))
    }

    /// Mean absolute difference of two blurred buffers, on the 0..=255 scale.
    pub fn mean_difference(a: &[f32], b: &[f32]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        if a.is_empty() {
            return 0.0;
        }
        let total: f64 = a.iter().zip(b).map(|(x, y)| f64::from((x - y).abs())).sum();
        total / a.len() as f64
    }

    pub(crate) fn verdict(&self, a: &[f32], b: &[f32]) -> PairVerdict {
        let diff = Self::mean_difference(a, b);
        let value = if diff <= self.config.diff_threshold {
            PairLabel::Same
        } else {
            PairLabel::Different
        };
        PairVerdict {
            value,
            score: (diff / 255.0).clamp(0.0, 1.0),
        }
    }
}
