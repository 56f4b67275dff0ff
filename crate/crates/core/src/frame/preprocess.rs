use super::{ColorMode, Frame, FrameSpec, Roi};
use crate::error::{Error, Result};

/// Size of the scaled content rectangle: the longer side becomes `patch`,
/// the shorter one keeps the aspect ratio (rounded to nearest, at least 1).
pub fn content_size(width: u32, height: u32, patch: u32) -> (u32, u32) {
    let longest = u64::from(width.max(height));
    let scale = |side: u32| -> u32 {
        let scaled = (u64::from(side) * u64::from(patch) + longest / 2) / longest;
        scaled.clamp(1, u64::from(patch)) as u32
    };
    (scale(width), scale(height))
}

/// Crop, scale the longer side to `patch_size` with bilinear sampling
/// (half-pixel centers), anchor the content top-left and zero-pad to a
/// square patch. Gray output uses BT.601 luma.
pub fn preprocess(frame: &Frame, spec: &FrameSpec) -> Result<Frame> {
    if frame.channels() != 3 {
        return Err(Error::InvalidFrame(format!(
            "preprocess expects 3 channels, frame {} has {}",
            frame.index(),
            frame.channels()
        )));
    }
    spec.validate()?;
    let roi = match spec.crop {
        Some(roi) => {
            if !roi.fits_within(frame.width(), frame.height()) {
                return Err(Error::CropOutOfBounds {
                    roi,
                    width: frame.width(),
                    height: frame.height(),
                });
            }
            roi
        }
        None => Roi::new(0, 0, frame.width(), frame.height()),
    };

    let patch = spec.patch_size;
    let (cw, ch) = content_size(roi.width, roi.height, patch);
    let xs = axis_taps(roi.x, roi.width, cw);
    let ys = axis_taps(roi.y, roi.height, ch);

    let src = frame.pixels();
    let src_stride = frame.width() as usize * 3;
    let out_channels = spec.color_mode.channels() as usize;
    let mut out = vec![0u8; patch as usize * patch as usize * out_channels];
    let out_stride = patch as usize * out_channels;

    for (oy, ty) in ys.iter().enumerate() {
        let row0 = &src[ty.lo * src_stride..][..src_stride];
        let row1 = &src[ty.hi * src_stride..][..src_stride];
        let out_row = &mut out[oy * out_stride..][..out_stride];
        for (ox, tx) in xs.iter().enumerate() {
            let mut rgb = [0u8; 3];
            for (c, v) in rgb.iter_mut().enumerate() {
                let p00 = f32::from(row0[tx.lo * 3 + c]);
                let p01 = f32::from(row0[tx.hi * 3 + c]);
                let p10 = f32::from(row1[tx.lo * 3 + c]);
                let p11 = f32::from(row1[tx.hi * 3 + c]);
                let top = p00 + (p01 - p00) * tx.w;
                let bottom = p10 + (p11 - p10) * tx.w;
                let value = top + (bottom - top) * ty.w;
                *v = (value + 0.5).floor().clamp(0.0, 255.0) as u8;
            }
            match spec.color_mode {
                ColorMode::Rgb => out_row[ox * 3..ox * 3 + 3].copy_from_slice(&rgb),
                ColorMode::Gray => out_row[ox] = luma(rgb),
            }
        }
    }

    Frame::new(frame.index(), patch, patch, out_channels as u8, out)
}

/// BT.601 luma in integer arithmetic; exact when R = G = B.
#[inline]
fn luma([r, g, b]: [u8; 3]) -> u8 {
    ((299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b) + 500) / 1000) as u8
}

/// Convert an RGB frame to single-channel luma without resampling.
pub fn to_gray(frame: &Frame) -> Result<Frame> {
    match frame.channels() {
        1 => Ok(frame.clone()),
        3 => {
            let pixels = frame
                .pixels()
                .chunks_exact(3)
                .map(|p| luma([p[0], p[1], p[2]]))
                .collect();
            Frame::new(frame.index(), frame.width(), frame.height(), 1, pixels)
        }
        c => Err(Error::InvalidFrame(format!("cannot convert {c}-channel frame"))),
    }
}

#[derive(Debug, Clone, Copy)]
struct Tap {
    lo: usize,
    hi: usize,
    w: f32,
}

/// Source sample positions for each output coordinate along one axis.
fn axis_taps(offset: u32, src_len: u32, dst_len: u32) -> Vec<Tap> {
    let scale = f64::from(src_len) / f64::from(dst_len);
    let last = f64::from(src_len - 1);
    (0..dst_len)
        .map(|d| {
            let s = ((f64::from(d) + 0.5) * scale - 0.5).clamp(0.0, last);
            let lo = s.floor();
            let w = (s - lo) as f32;
            let lo = lo as u32;
            let hi = (lo + 1).min(src_len - 1);
            Tap {
                lo: (offset + lo) as usize,
                hi: (offset + hi) as usize,
                w,
            }
        })
        .collect()
}
