use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use slidetx_core::dataset::{
    generate_clip_manifest, generate_pair_manifest, inverse_frequency_weights, ClassWeights, ClipManifest, ClipTask,
    GroundTruthDoc, PairManifestConfig,
};
use slidetx_core::{write_json_atomic, ClipConfig, Error, Result};

use crate::args::MakeDataArgs;
use crate::config::provenance;

#[derive(Debug, Clone, Serialize)]
struct MakeDataConfig<'a> {
    ground_truth: &'a [std::path::PathBuf],
    seed: u64,
    pairs: Option<PairManifestConfig>,
    clips: Option<ClipConfig>,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Class weights over several manifests of one task, counts pooled.
pub fn pooled_weights(task: ClipTask, manifests: &[ClipManifest]) -> Result<ClassWeights> {
    let mut counts: BTreeMap<String, usize> = slidetx_core::dataset::ClipClass::all(task)
        .into_iter()
        .map(|c| (c.to_string(), 0))
        .collect();
    for m in manifests {
        for e in &m.entries {
            *counts.entry(e.class.to_string()).or_default() += 1;
        }
    }
    let counts: Vec<(String, usize)> = counts.into_iter().collect();
    inverse_frequency_weights(&counts)
}

pub fn run(args: &MakeDataArgs) -> anyhow::Result<()> {
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let mut pair_cfg = PairManifestConfig {
        seed: args.seed,
        ..PairManifestConfig::default()
    };
    if let Some(m) = args.max_pairs_per_slide {
        pair_cfg.max_pairs_per_slide = m;
    }
    let mut clip_cfg = ClipConfig::default();
    if let Some(l) = args.clip_len {
        clip_cfg.clip_len = l;
    }
    clip_cfg.validate()?;
    let config = MakeDataConfig {
        ground_truth: &args.gt,
        seed: args.seed,
        pairs: (!args.no_pairs).then_some(pair_cfg),
        clips: (!args.no_clips).then_some(clip_cfg),
    };
    let prov = provenance("make-data", &config);

    let mut by_task: BTreeMap<&str, (ClipTask, Vec<ClipManifest>)> = BTreeMap::new();
    for path in &args.gt {
        let gt = GroundTruthDoc::load(path)?;
        if !args.no_pairs {
            let m = generate_pair_manifest(&gt, &pair_cfg).map_err(|e| e.in_stage("pair manifest"))?;
            let out = args.out_dir.join(format!("{}.pairs.jsonl", gt.video));
            write_text(&out, &m.to_jsonl_with(Some(&prov)))?;
            crate::emit(&format!("{}: {} pairs -> {}\n", gt.video, m.entries.len(), out.display()))?;
        }
        if !args.no_clips {
            for (name, task) in [("transition", ClipTask::Transition), ("scene", ClipTask::Scene)] {
                let m = generate_clip_manifest(&gt, &clip_cfg, task, args.seed).map_err(|e| e.in_stage("clip manifest"))?;
                let out = args.out_dir.join(format!("{}.{name}.jsonl", gt.video));
                write_text(&out, &m.to_jsonl_with(Some(&prov)))?;
                crate::emit(&format!(
                    "{}: {} {name} clips, {} skipped -> {}\n",
                    gt.video,
                    m.entries.len(),
                    m.skips.len(),
                    out.display()
                ))?;
                by_task.entry(name).or_insert((task, Vec::new())).1.push(m);
            }
        }
    }
    if !by_task.is_empty() {
        let mut weights = serde_json::Map::new();
        for (name, (task, manifests)) in &by_task {
            let w = pooled_weights(*task, manifests)?;
            if !w.missing.is_empty() {
                log::warn!("{name}: no samples for {}", w.missing.join(", "));
            }
            weights.insert(name.to_string(), serde_json::to_value(w)?);
        }
        weights.insert("provenance".into(), prov);
        write_json_atomic(&args.out_dir.join("class_weights.json"), &weights)?;
    }
    Ok(())
}
