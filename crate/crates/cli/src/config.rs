use std::path::{Path, PathBuf};

use serde::Serialize;
use slidetx_core::pair::DiffBlurConfig;
use slidetx_core::pipeline::PipelineConfig;
use slidetx_core::{Error, Result, Roi, VideoSource};

use crate::args::{ClipBackendKind, DetectArgs, PairBackendKind, SourceArgs};
use crate::corpus::{self, VideoDir};

/// Files a detection run reads and writes. Only the ones that apply are set.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunPaths {
    pub input: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sidecar: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoder: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_oracle: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition_model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scene_model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip_oracle: Option<PathBuf>,
    pub output: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slides_dir: Option<PathBuf>,
}

/// Fully resolved settings of one detection run; echoed into its output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub video: String,
    pub paths: RunPaths,
    pub pair_backend: PairBackendKind,
    /// `None` when only the first stage runs.
    pub clip_backend: Option<ClipBackendKind>,
    pub crop: Option<Roi>,
    pub fps: Option<f64>,
    pub pipeline: PipelineConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<DiffBlurConfig>,
}

/// Tool name, version, command and configuration, for embedding in outputs.
pub fn provenance(command: &str, config: &impl Serialize) -> serde_json::Value {
    serde_json::json!({
        "tool": "slidetx",
        "version": slidetx_core::VERSION,
        "command": command,
        "config": config,
    })
}

fn input_name(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "video".into())
}

/// Crop and fps from flags, falling back to the sidecar.
pub fn resolve_source(
    src: &SourceArgs,
    dir: Option<&VideoDir>,
) -> Result<(Option<PathBuf>, Option<Roi>, Option<f64>)> {
    let sidecar_path = src
        .sidecar
        .clone()
        .or_else(|| dir.and_then(|d| d.existing(corpus::SIDECAR)));
    let sidecar = sidecar_path
        .as_deref()
        .map(slidetx_core::frame::VideoSidecar::load)
        .transpose()?;
    let crop = src.crop.or(sidecar.as_ref().and_then(|s| s.crop));
    let fps = src.fps.or(sidecar.as_ref().map(|s| s.fps));
    Ok((sidecar_path, crop, fps))
}

impl RunConfig {
    /// Resolve `args` for one input. `dir` is set when the input is a video
    /// directory; its files then serve as defaults.
    pub fn resolve(args: &DetectArgs, input: &Path, dir: Option<&VideoDir>) -> Result<Self> {
        let (sidecar, crop, fps) = resolve_source(&args.source, dir)?;
        let in_dir = |name: &str| dir.map(|d| d.file(name));
        let frames = match dir {
            Some(d) => d.source().path().to_path_buf(),
            None => input.to_path_buf(),
        };
        let output = match (&args.output, dir) {
            (Some(o), _) => o.clone(),
            (None, Some(d)) => d.file(corpus::DETECTIONS),
            (None, None) => {
                return Err(Error::Config(format!(
                    "{} is not a video directory; pass --output",
                    input.display()
                )))
            }
        };
        let segments = args
            .segments
            .clone()
            .or_else(|| args.corpus.as_ref().and(in_dir(corpus::SEGMENTS)));

        let mut pipeline = PipelineConfig::default();
        if let Some(c) = args.color_mode {
            pipeline.frame.color_mode = c.into();
        }
        if let Some(p) = args.patch_size {
            pipeline.frame.patch_size = p;
        }
        if let Some(v) = args.static_min_frames {
            pipeline.detector.static_min_frames = v;
        }
        if let Some(v) = args.min_video_len {
            pipeline.detector.min_video_len = v;
        }
        if let Some(v) = args.clip_len {
            pipeline.clip.clip_len = v;
        }
        if let Some(v) = args.clip_stride {
            pipeline.clip.stride = v;
        }
        if let Some(v) = args.clip_margin {
            pipeline.clip.margin = v;
        }
        pipeline.first_stage_only = args.first_stage_only;
        pipeline.frame.crop = crop;

        let diff = (args.pair_backend == PairBackendKind::Diff).then(|| {
            let mut d = DiffBlurConfig {
                color_mode: pipeline.frame.color_mode,
                ..DiffBlurConfig::default()
            };
            if let Some(k) = args.blur_kernel {
                d.blur_kernel = k;
            }
            if let Some(t) = args.diff_threshold {
                d.diff_threshold = t;
            }
            d
        });
        let clip_backend = (!args.first_stage_only).then_some(args.clip_backend);
        let pair_oracle = (args.pair_backend == PairBackendKind::Oracle)
            .then(|| args.pair_oracle.clone().or_else(|| in_dir(corpus::PAIR_ORACLE)))
            .flatten();
        let clip_oracle = (clip_backend == Some(ClipBackendKind::Oracle))
            .then(|| args.clip_oracle.clone().or_else(|| in_dir(corpus::GROUND_TRUTH)))
            .flatten();
        let neural_clips = clip_backend == Some(ClipBackendKind::Neural);

        let cfg = Self {
            video: args
                .id
                .clone()
                .or_else(|| dir.map(|d| d.id.clone()))
                .unwrap_or_else(|| input_name(input)),
            paths: RunPaths {
                input: frames,
                sidecar,
                decoder: args.source.decoder.clone(),
                pair_model: (args.pair_backend == PairBackendKind::Neural)
                    .then(|| args.pair_model.clone())
                    .flatten(),
                pair_oracle,
                transition_model: neural_clips.then(|| args.transition_model.clone()).flatten(),
                scene_model: neural_clips.then(|| args.scene_model.clone()).flatten(),
                clip_oracle,
                output,
                segments,
                slides_dir: args.slides_dir.clone(),
            },
            pair_backend: args.pair_backend,
            clip_backend,
            crop,
            fps,
            pipeline,
            diff,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check parameters and that every file the run needs exists.
    pub fn validate(&self) -> Result<()> {
        self.pipeline.frame.validate()?;
        self.pipeline.detector.validate()?;
        self.pipeline.clip.validate()?;
        if let Some(d) = &self.diff {
            d.validate()?;
        }
        let require = |what: &str, flag: &str, path: &Option<PathBuf>, model: bool| -> Result<()> {
            match path {
                None => Err(Error::Config(format!("{what} needs {flag}"))),
                Some(p) if !p.is_file() && model => Err(Error::Model {
                    path: p.clone(),
                    message: "model file not found".into(),
                }),
                Some(p) if !p.is_file() => Err(Error::Config(format!("{}: file not found", p.display()))),
                Some(_) => Ok(()),
            }
        };
        match self.pair_backend {
            PairBackendKind::Neural => require("--pair-backend neural", "--pair-model", &self.paths.pair_model, true)?,
            PairBackendKind::Oracle => require("--pair-backend oracle", "--pair-oracle", &self.paths.pair_oracle, false)?,
            PairBackendKind::Diff => {}
        }
        match self.clip_backend {
            Some(ClipBackendKind::Neural) => {
                require("--clip-backend neural", "--transition-model", &self.paths.transition_model, true)?;
                require("--clip-backend neural", "--scene-model", &self.paths.scene_model, true)?;
            }
            Some(ClipBackendKind::Oracle) => {
                require("--clip-backend oracle", "--clip-oracle", &self.paths.clip_oracle, false)?
            }
            None => {}
        }
        if !self.paths.input.exists() {
            return Err(Error::UnreadableSource(format!("{}: no such file or directory", self.paths.input.display())));
        }
        Ok(())
    }

    pub fn source(&self) -> Result<VideoSource> {
        VideoSource::from_path(&self.paths.input, self.paths.decoder.clone())
    }

    pub fn provenance(&self) -> serde_json::Value {
        provenance("detect", self)
    }
}
