//! Frame types, video sources and the fixed-size preprocessing applied before
//! any classifier sees a frame.

mod preprocess;
pub mod raw;
mod sidecar;
mod source;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use preprocess::{content_size, preprocess, to_gray};
pub use sidecar::VideoSidecar;
pub use source::{open_stream, FrameStream, ImageDir, PreprocessedStream, StreamInfo, VideoSource};

/// Side length of the square network input patch.
pub const DEFAULT_PATCH_SIZE: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorMode {
    #[default]
    Rgb,
    Gray,
}

impl ColorMode {
    pub fn channels(self) -> u8 {
        match self {
            ColorMode::Rgb => 3,
            ColorMode::Gray => 1,
        }
    }
}

impl fmt::Display for ColorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColorMode::Rgb => "rgb",
            ColorMode::Gray => "gray",
        })
    }
}

/// Rectangular region of interest in source pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Roi {
    pub x: u32,
    pub y: u32,
    #[serde(rename = "w", alias = "width")]
    pub width: u32,
    #[serde(rename = "h", alias = "height")]
    pub height: u32,
}

impl Roi {
    pub fn new(x: u32, y: u32, width: u32, height: u32) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.width > 0
            && self.height > 0
            && u64::from(self.x) + u64::from(self.width) <= u64::from(width)
            && u64::from(self.y) + u64::from(self.height) <= u64::from(height)
    }
}

impl fmt::Display for Roi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Roi({}, {}, {}x{})", self.x, self.y, self.width, self.height)
    }
}

/// How a decoded frame is turned into classifier input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub patch_size: u32,
    pub color_mode: ColorMode,
    pub crop: Option<Roi>,
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self {
            patch_size: DEFAULT_PATCH_SIZE,
            color_mode: ColorMode::Rgb,
            crop: None,
        }
    }
}

impl FrameSpec {
    pub fn with_color_mode(mut self, color_mode: ColorMode) -> Self {
        self.color_mode = color_mode;
        self
    }

    pub fn with_crop(mut self, crop: Option<Roi>) -> Self {
        self.crop = crop;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size < 16 {
            return Err(Error::Config(format!(
                "patch_size must be >= 16, got {}",
                self.patch_size
            )));
        }
        if let Some(roi) = self.crop {
            if roi.width == 0 || roi.height == 0 {
                return Err(Error::Config(format!("empty crop {roi}")));
            }
        }
        Ok(())
    }
}

/// One decoded (or preprocessed) frame: row-major interleaved 8-bit samples.
#[derive(Clone, PartialEq, Eq)]
pub struct Frame {
    index: usize,
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Frame")
            .field("index", &self.index)
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl Frame {
    pub fn new(index: usize, width: u32, height: u32, channels: u8, pixels: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidFrame(format!("channels must be 1 or 3, got {channels}")));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(Error::InvalidFrame(format!(
                "buffer holds {} bytes, {width}x{height}x{channels} needs {expected}",
                pixels.len()
            )));
        }
        Ok(Self {
            index,
            width,
            height,
            channels,
            pixels,
        })
    }

    /// A frame filled with one value per channel.
    pub fn filled(index: usize, width: u32, height: u32, color: &[u8]) -> Result<Self> {
        let channels = color.len() as u8;
        let pixels = color
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * color.len())
            .collect();
        Self::new(index, width, height, channels, pixels)
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.channels as usize;
        let at = (y as usize * self.width as usize + x as usize) * c;
        &self.pixels[at..at + c]
    }

    pub fn color_mode(&self) -> ColorMode {
        if self.channels == 1 {
            ColorMode::Gray
        } else {
            ColorMode::Rgb
        }
    }

    /// Copy of the region `roi`.
    pub fn crop(&self, roi: Roi) -> Result<Frame> {
        if !roi.fits_within(self.width, self.height) {
            return Err(Error::CropOutOfBounds {
                roi,
                width: self.width,
                height: self.height,
            });
        }
        let c = self.channels as usize;
        let row = self.width as usize * c;
        let mut pixels = Vec::with_capacity(roi.width as usize * roi.height as usize * c);
        for y in roi.y..roi.y + roi.height {
            let at = y as usize * row + roi.x as usize * c;
            pixels.extend_from_slice(&self.pixels[at..at + roi.width as usize * c]);
        }
        Frame::new(self.index, roi.width, roi.height, self.channels, pixels)
    }

    pub fn same_geometry(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub fn to_image(&self) -> image::DynamicImage {
        match self.channels {
            1 => image::DynamicImage::ImageLuma8(
                image::GrayImage::from_raw(self.width, self.height, self.pixels.clone())
                    .expect("length checked at construction"),
            ),
            _ => image::DynamicImage::ImageRgb8(
                image::RgbImage::from_raw(self.width, self.height, self.pixels.clone())
                    .expect("length checked at construction"),
            ),
        }
    }

    pub fn from_rgb_image(index: usize, img: image::RgbImage) -> Self {
        let (width, height) = img.dimensions();
        Self {
            index,
            width,
            height,
            channels: 3,
            pixels: img.into_raw(),
        }
    }

    /// Encode as PNG bytes (fast compression).
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        use image::codecs::png::{CompressionType, FilterType, PngEncoder};
        use image::ImageEncoder;
        let mut out = Vec::new();
        let color = if self.channels == 1 {
            image::ExtendedColorType::L8
        } else {
            image::ExtendedColorType::Rgb8
        };
        PngEncoder::new_with_quality(&mut out, CompressionType::Fast, FilterType::Adaptive)
            .write_image(&self.pixels, self.width, self.height, color)
            .map_err(|e| Error::Backend(format!("png encode: {e}")))?;
        Ok(out)
    }

    pub fn save_png(&self, path: &std::path::Path) -> Result<()> {
        let bytes = self.encode_png()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}
