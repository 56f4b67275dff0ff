use std::borrow::Cow;
use std::path::Path;

use slidetx_core::clip::{load_clip_model, ClipBackend, ClipModelContract, ClipOracle, ClipTask};
use slidetx_core::pair::{load_pair_model, DiffBlur, PairModelContract, PairOracle};
use slidetx_core::pipeline::{run_detection, ClipBackends, DetectionOutput, VideoInput};
use slidetx_core::{slide_keyframes, write_json_atomic, Error, PairBackend, Result};

use crate::args::{ClipBackendKind, DetectArgs, PairBackendKind};
use crate::cmd::extract::save_keyframes;
use crate::config::RunConfig;
use crate::corpus::{self, VideoDir};
use crate::CliError;

const MODEL_STAGE: &str = "model loading";

pub fn load_pair(cfg: &RunConfig) -> Result<PairBackend> {
    let frame = &cfg.pipeline.frame;
    let backend = match cfg.pair_backend {
        PairBackendKind::Diff => PairBackend::Diff(DiffBlur::new(cfg.diff.unwrap_or_default())?),
        PairBackendKind::Neural => {
            let path = cfg.paths.pair_model.as_deref().expect("validated");
            let contract = PairModelContract {
                patch_size: frame.patch_size,
                color_mode: frame.color_mode,
            };
            load_pair_model(path, contract)?
        }
        PairBackendKind::Oracle => PairBackend::Oracle(PairOracle::load(cfg.paths.pair_oracle.as_deref().expect("validated"))?),
    };
    Ok(backend)
}

pub fn load_clips(cfg: &RunConfig) -> Result<Option<ClipBackends>> {
    let contract = |task| ClipModelContract {
        task,
        clip_len: cfg.pipeline.clip.clip_len,
        patch_size: cfg.pipeline.frame.patch_size,
    };
    let backends = match cfg.clip_backend {
        None => return Ok(None),
        Some(ClipBackendKind::Oracle) => {
            let gt = cfg.paths.clip_oracle.as_deref().expect("validated");
            ClipBackends::new(
                ClipBackend::Oracle(ClipOracle::load(gt, ClipTask::Transition)?),
                ClipBackend::Oracle(ClipOracle::load(gt, ClipTask::Scene)?),
            )?
        }
        Some(ClipBackendKind::Neural) => ClipBackends::new(
            load_clip_model(
                cfg.paths.transition_model.as_deref().expect("validated"),
                contract(ClipTask::Transition),
            )?,
            load_clip_model(cfg.paths.scene_model.as_deref().expect("validated"), contract(ClipTask::Scene))?,
        )?,
    };
    Ok(Some(backends))
}

/// Networks loaded once and shared across the videos of a corpus run.
#[derive(Debug, Default)]
pub struct SharedModels {
    pub pair: Option<PairBackend>,
    pub clips: Option<ClipBackends>,
}

impl SharedModels {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let pair = match cfg.pair_backend {
            PairBackendKind::Neural => Some(load_pair(cfg).map_err(|e| e.in_stage(MODEL_STAGE))?),
            _ => None,
        };
        let clips = match cfg.clip_backend {
            Some(ClipBackendKind::Neural) => load_clips(cfg).map_err(|e| e.in_stage(MODEL_STAGE))?,
            _ => None,
        };
        Ok(Self { pair, clips })
    }
}

pub fn detect_video(cfg: &RunConfig, shared: &SharedModels) -> Result<DetectionOutput> {
    let pair = match &shared.pair {
        Some(p) => Cow::Borrowed(p),
        None => Cow::Owned(load_pair(cfg).map_err(|e| e.in_stage(MODEL_STAGE))?),
    };
    let clips = match &shared.clips {
        Some(c) => Some(Cow::Borrowed(c)),
        None => load_clips(cfg).map_err(|e| e.in_stage(MODEL_STAGE))?.map(Cow::Owned),
    };
    let input = VideoInput {
        id: cfg.video.clone(),
        source: cfg.source().map_err(|e| e.in_stage("frame input"))?,
        crop: cfg.crop,
        fps: cfg.fps,
    };
    run_detection(&input, &cfg.pipeline, &pair, clips.as_deref())
}

pub fn write_outputs(cfg: &RunConfig, out: &DetectionOutput) -> Result<()> {
    let provenance = cfg.provenance();
    out.to_doc(Some(provenance.clone())).save(&cfg.paths.output)?;
    if let Some(path) = &cfg.paths.segments {
        let mut dump = out.segments_doc();
        dump["provenance"] = provenance;
        write_json_atomic(path, &dump)?;
    }
    if let Some(dir) = &cfg.paths.slides_dir {
        let records: Vec<_> = out.transitions.iter().map(|t| t.record()).collect();
        let keyframes = slide_keyframes(&records, out.frame_count);
        save_keyframes(&cfg.source()?, cfg.crop, &keyframes, dir).map_err(|e| e.in_stage("slide extraction"))?;
    }
    Ok(())
}

fn run_one(cfg: &RunConfig, shared: &SharedModels) -> Result<DetectionOutput> {
    let out = detect_video(cfg, shared)?;
    write_outputs(cfg, &out).map_err(|e| e.in_stage("output"))?;
    Ok(out)
}

fn summary(cfg: &RunConfig, out: &DetectionOutput) -> String {
    let what = if cfg.pipeline.first_stage_only {
        "candidates"
    } else {
        "transitions"
    };
    format!(
        "{}: {} frames, {} {what} -> {}",
        cfg.video,
        out.frame_count,
        out.transitions.len(),
        cfg.paths.output.display()
    )
}

pub fn run(args: &DetectArgs) -> anyhow::Result<()> {
    if args.reverse_order {
        return Err(CliError::Unsupported(
            "--reverse-order is reserved and not implemented: reverse-order pair classification is out of scope".into(),
        )
        .into());
    }
    match (&args.input, &args.corpus) {
        (Some(input), _) => {
            let dir = VideoDir::open(input);
            let cfg = RunConfig::resolve(args, input, dir.as_ref()).map_err(|e| e.in_stage("configuration"))?;
            let out = run_one(&cfg, &SharedModels::default())?;
            crate::emit(&format!("{}\n", summary(&cfg, &out)))?;
            Ok(())
        }
        (None, Some(corpus)) => run_corpus(args, corpus),
        (None, None) => unreachable!("clap requires input or corpus"),
    }
}

fn run_corpus(args: &DetectArgs, corpus_dir: &Path) -> anyhow::Result<()> {
    let videos = corpus::discover(corpus_dir)?;
    if videos.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no video directories", corpus_dir.display())).into());
    }
    let configs: Vec<std::result::Result<RunConfig, Error>> = videos
        .iter()
        .map(|v| RunConfig::resolve(args, &v.root, Some(v)).map_err(|e| e.in_stage("configuration")))
        .collect();
    let shared = match configs.iter().find_map(|c| c.as_ref().ok()) {
        Some(cfg) => SharedModels::load(cfg)?,
        None => SharedModels::default(),
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build()?;
    let results: Vec<std::result::Result<String, String>> = pool.install(|| {
        use rayon::prelude::*;
        videos
            .par_iter()
            .zip(configs.par_iter())
            .map(|(video, cfg)| {
                let cfg = cfg.as_ref().map_err(|e| format!("{}: {e}", video.id))?;
                run_one(cfg, &shared)
                    .map(|out| summary(cfg, &out))
                    .map_err(|e| format!("{}: {e}", video.id))
            })
            .collect()
    });
    let mut failed = 0;
    for r in &results {
        match r {
            Ok(line) => crate::emit(&format!("{line}\n"))?,
            Err(line) => {
                failed += 1;
                eprintln!("error: {line}");
            }
        }
    }
    if failed > 0 {
        anyhow::bail!("{failed} of {} videos failed", results.len());
    }
    Ok(())
}
