//! On-disk layout of a corpus: one directory per video.
//!
//! ```text
//! corpus/
//!   lecture01/
//!     frames/00000000.png ...   (or video.sltf)
//!     sidecar.json              crop and fps
//!     gt.json                   ground truth, if any
//!     detections.json           written by `detect`
//!     annotations.json          written by the review server
//! ```

use std::path::{Path, PathBuf};

use slidetx_core::frame::VideoSidecar;
use slidetx_core::{Error, Result, VideoSource};

pub const FRAMES: &str = "frames";
pub const RAW: &str = "video.sltf";
pub const SIDECAR: &str = "sidecar.json";
pub const GROUND_TRUTH: &str = "gt.json";
pub const PAIR_ORACLE: &str = "pair_oracle.json";
pub const DETECTIONS: &str = "detections.json";
pub const SEGMENTS: &str = "segments.json";
pub const ANNOTATIONS: &str = "annotations.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoDir {
    pub id: String,
    pub root: PathBuf,
}

impl VideoDir {
    pub fn is_video_dir(path: &Path) -> bool {
        path.join(FRAMES).is_dir() || path.join(RAW).is_file()
    }

    pub fn open(root: &Path) -> Option<Self> {
        if !Self::is_video_dir(root) {
            return None;
        }
        let id = root
            .canonicalize()
            .ok()
            .as_deref()
            .and_then(Path::file_name)
            .or_else(|| root.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "video".into());
        Some(Self {
            id,
            root: root.to_path_buf(),
        })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Existing file in the directory, if present.
    pub fn existing(&self, name: &str) -> Option<PathBuf> {
        let p = self.file(name);
        p.is_file().then_some(p)
    }

    pub fn source(&self) -> VideoSource {
        let frames = self.file(FRAMES);
        if frames.is_dir() {
            VideoSource::ImageDir(frames)
        } else {
            VideoSource::Raw(self.file(RAW))
        }
    }

    pub fn sidecar(&self) -> Result<Option<VideoSidecar>> {
        self.existing(SIDECAR).map(|p| VideoSidecar::load(&p)).transpose()
    }
}

/// Video directories directly below `corpus`, sorted by id.
pub fn discover(corpus: &Path) -> Result<Vec<VideoDir>> {
    let entries = std::fs::read_dir(corpus).map_err(|e| Error::io(corpus, e))?;
    let mut videos = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(corpus, e))?;
        let path = entry.path();
        if !path.is_dir() {
            continue;
        }
        match VideoDir::open(&path) {
            Some(v) => videos.push(v),
            None => log::debug!("skipping {}: no frames", path.display()),
        }
    }
    videos.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(videos)
}
