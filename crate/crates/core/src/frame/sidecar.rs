use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Roi;
use crate::error::{Error, Result};

/// Per-video settings stored next to the frames (`sidecar.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoSidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crop: Option<Roi>,
    pub fps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_count: Option<usize>,
}

impl Default for VideoSidecar {
    fn default() -> Self {
        Self {
            crop: None,
            fps: 25.0,
            frame_count: None,
        }
    }
}

impl VideoSidecar {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let sidecar: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        if !(sidecar.fps.is_finite() && sidecar.fps > 0.0) {
            return Err(Error::Config(format!(
                "{}: fps must be positive, got {}",
                path.display(),
                sidecar.fps
            )));
        }
        Ok(sidecar)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}
