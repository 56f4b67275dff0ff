use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slidetx_core::{ColorMode, Roi};

#[derive(Debug, Parser)]
#[command(name = "slidetx", version, about = "Slide transition detection for lecture videos")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect slide transitions in one video or a whole corpus.
    Detect(DetectArgs),
    /// Score detections against ground truth.
    Evaluate(EvaluateArgs),
    /// Build pair and clip training manifests from ground truth.
    MakeData(MakeDataArgs),
    /// Render synthetic lecture videos with exact ground truth.
    Synth(SynthArgs),
    /// Serve a corpus to the annotation review UI.
    Review(ReviewArgs),
    /// Save one frame per detected slide as PNG.
    ExtractSlides(ExtractSlidesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairBackendKind {
    Diff,
    Neural,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClipBackendKind {
    Oracle,
    Neural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorArg {
    Rgb,
    Gray,
}

impl From<ColorArg> for ColorMode {
    fn from(c: ColorArg) -> Self {
        match c {
            ColorArg::Rgb => ColorMode::Rgb,
            ColorArg::Gray => ColorMode::Gray,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

/// Parse `x,y,width,height`.
pub fn parse_roi(s: &str) -> Result<Roi, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [x, y, w, h] = parts.as_slice() else {
        return Err(format!("expected x,y,width,height, got {s:?}"));
    };
    let n = |v: &str| v.parse::<u32>().map_err(|e| format!("{v:?}: {e}"));
    let roi = Roi::new(n(x)?, n(y)?, n(w)?, n(h)?);
    if roi.width == 0 || roi.height == 0 {
        return Err("crop width and height must be positive".into());
    }
    Ok(roi)
}

/// Frame source and per-video overrides shared by commands that read video.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Slide region as x,y,width,height; overrides the sidecar.
    #[arg(long, value_parser = parse_roi)]
    pub crop: Option<Roi>,

    /// Frame rate; overrides the sidecar and the stream header.
    #[arg(long)]
    pub fps: Option<f64>,

    /// Sidecar JSON with crop and fps (default: sidecar.json in a video directory).
    #[arg(long)]
    pub sidecar: Option<PathBuf>,

    /// Decoder program for container files; it is run with the file path and
    /// must write raw frames to stdout.
    #[arg(long, env = "SLIDETX_DECODER")]
    pub decoder: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    /// A frame directory, raw frame stream, container file, or video
    /// directory (one holding frames/).
    #[arg(required_unless_present = "corpus", conflicts_with = "corpus")]
    pub input: Option<PathBuf>,

    /// Process every video directory below this one.
    #[arg(long)]
    pub corpus: Option<PathBuf>,

    /// Video id recorded in the output (default: input name).
    #[arg(long, conflicts_with = "corpus")]
    pub id: Option<String>,

    /// Detection JSON (default: detections.json in a video directory).
    #[arg(short, long, conflicts_with = "corpus")]
    pub output: Option<PathBuf>,

    /// Also write the first-stage segment and candidate dump here.
    #[arg(long, conflicts_with = "corpus")]
    pub segments: Option<PathBuf>,

    /// Save one PNG per detected slide into this directory.
    #[arg(long, conflicts_with = "corpus")]
    pub slides_dir: Option<PathBuf>,

    #[command(flatten)]
    pub source: SourceArgs,

    #[arg(long, value_enum, default_value_t = PairBackendKind::Diff)]
    pub pair_backend: PairBackendKind,

    /// ONNX pair network (required with --pair-backend neural).
    #[arg(long)]
    pub pair_model: Option<PathBuf>,

    /// Pair oracle script (default: pair_oracle.json in a video directory).
    #[arg(long)]
    pub pair_oracle: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = ClipBackendKind::Neural)]
    pub clip_backend: ClipBackendKind,

    /// ONNX transition clip network.
    #[arg(long)]
    pub transition_model: Option<PathBuf>,

    /// ONNX scene clip network.
    #[arg(long)]
    pub scene_model: Option<PathBuf>,

    /// Ground truth the clip oracle answers from (default: gt.json in a
    /// video directory).
    #[arg(long)]
    pub clip_oracle: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub color_mode: Option<ColorArg>,

    /// Side of the square network input.
    #[arg(long)]
    pub patch_size: Option<u32>,

    /// Shortest run of unchanged frames that counts as a slide.
    #[arg(long)]
    pub static_min_frames: Option<usize>,

    /// Shortest video segment that yields its own candidates.
    #[arg(long)]
    pub min_video_len: Option<usize>,

    /// Gaussian kernel of the difference baseline (odd).
    #[arg(long)]
    pub blur_kernel: Option<u32>,

    /// Mean absolute difference at or below which frames count as the same.
    #[arg(long)]
    pub diff_threshold: Option<f64>,

    #[arg(long)]
    pub clip_len: Option<usize>,

    #[arg(long)]
    pub clip_stride: Option<usize>,

    #[arg(long)]
    pub clip_margin: Option<usize>,

    /// Report first-stage candidates without clip refinement.
    #[arg(long)]
    pub first_stage_only: bool,

    /// Reserved: pair classification in reverse frame order (not implemented).
    #[arg(long)]
    pub reverse_order: bool,

    /// Worker threads for --corpus (default: all cores).
    #[arg(short, long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Detection file; repeat together with --gt for several videos.
    #[arg(long, requires = "gt")]
    pub pred: Vec<PathBuf>,

    /// Ground-truth file, paired with --pred in order.
    #[arg(long)]
    pub gt: Vec<PathBuf>,

    /// Evaluate every video directory below this one.
    #[arg(long, conflicts_with_all = ["pred", "gt", "counts"])]
    pub corpus: Option<PathBuf>,

    /// Detection file name inside each corpus video directory.
    #[arg(long, default_value = "detections.json")]
    pub pred_name: String,

    /// Ground-truth file name inside each corpus video directory.
    #[arg(long, default_value = "gt.json")]
    pub gt_name: String,

    /// Score precomputed (tp, fp, fn) rows instead of matching files.
    #[arg(long, conflicts_with_all = ["pred", "gt"])]
    pub counts: Option<PathBuf>,

    /// Match radius in frames.
    #[arg(long)]
    pub radius: Option<f64>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    /// Also write the JSON report here.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MakeDataArgs {
    /// Ground-truth files.
    #[arg(required = true)]
    pub gt: Vec<PathBuf>,

    #[arg(short, long)]
    pub out_dir: PathBuf,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Skip the pair manifest.
    #[arg(long)]
    pub no_pairs: bool,

    /// Skip the clip manifests.
    #[arg(long)]
    pub no_clips: bool,

    #[arg(long)]
    pub max_pairs_per_slide: Option<usize>,

    #[arg(long)]
    pub clip_len: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Output corpus directory; one subdirectory per video.
    #[arg(short, long)]
    pub out_dir: PathBuf,

    /// Script files to render.
    #[arg(long, conflicts_with = "count")]
    pub script: Vec<PathBuf>,

    /// Number of random scripts to render.
    #[arg(long, required_unless_present = "script")]
    pub count: Option<usize>,

    /// Seed of the first random script; later ones use seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Additive Gaussian noise sigma in gray levels (overrides scripts).
    #[arg(long)]
    pub noise: Option<f64>,

    /// Also write each video as a raw frame stream (video.sltf).
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReviewArgs {
    /// Corpus directory with one subdirectory per video.
    pub corpus: PathBuf,

    #[arg(long, default_value_t = 8080)]
    pub port: u16,

    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,

    /// Built UI bundle served at / (default: none, API only).
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExtractSlidesArgs {
    /// Frame source or video directory.
    pub input: PathBuf,

    /// Detection (or ground-truth) JSON (default: detections.json in a video directory).
    #[arg(long)]
    pub detections: Option<PathBuf>,

    #[arg(short, long)]
    pub out_dir: PathBuf,

    /// Save full frames instead of the slide region.
    #[arg(long)]
    pub full_frame: bool,

    #[command(flatten)]
    pub source: SourceArgs,
}
