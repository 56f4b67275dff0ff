use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slidetx_core::eval::{evaluate, report_table, NamedReport, TableReport};
use slidetx_core::{compute_metrics, write_json_atomic, DetectionDoc, Error, EvalConfig, Result};

use crate::args::{EvaluateArgs, OutputFormat};
use crate::config::provenance;
use crate::corpus;

/// One row of precomputed counts, e.g. a published results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRow {
    pub name: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsFile {
    pub rows: Vec<CountsRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationConfig {
    pub eval: EvalConfig,
    pub inputs: Vec<(PathBuf, PathBuf)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub match_radius: Option<f64>,
    #[serde(flatten)]
    pub table: TableReport,
    pub provenance: serde_json::Value,
}

pub fn counts_table(file: &CountsFile) -> TableReport {
    let rows: Vec<NamedReport> = file
        .rows
        .iter()
        .map(|r| NamedReport::new(r.name.clone(), compute_metrics(r.tp, r.fp, r.fn_)))
        .collect();
    report_table(&rows)
}

pub fn load_counts(path: &Path) -> Result<CountsFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// Score each (prediction, ground truth) file pair; rows are named after
/// the ground-truth video.
pub fn evaluate_files(pairs: &[(PathBuf, PathBuf)], cfg: &EvalConfig) -> Result<TableReport> {
    let mut rows = Vec::new();
    for (pred_path, gt_path) in pairs {
        let pred = DetectionDoc::load(pred_path)?;
        let gt = DetectionDoc::load(gt_path)?;
        if pred.video != gt.video {
            log::warn!(
                "{} is for video {:?} but {} is for {:?}",
                pred_path.display(),
                pred.video,
                gt_path.display(),
                gt.video
            );
        }
        rows.push(NamedReport::new(gt.video.clone(), evaluate(&pred.records(), &gt.records(), cfg)));
    }
    Ok(report_table(&rows))
}

fn corpus_pairs(dir: &Path, pred_name: &str, gt_name: &str) -> Result<Vec<(PathBuf, PathBuf)>> {
    let mut pairs = Vec::new();
    let mut missing = Vec::new();
    for v in corpus::discover(dir)? {
        match (v.existing(pred_name), v.existing(gt_name)) {
            (Some(p), Some(g)) => pairs.push((p, g)),
            (None, Some(_)) => missing.push(v.id),
            (_, None) => log::warn!("{}: no {gt_name}, skipped", v.id),
        }
    }
    if !missing.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no {pred_name} for: {}",
            missing.join(", ")
        )));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidInput(format!("{}: nothing to evaluate", dir.display())));
    }
    Ok(pairs)
}

pub fn run(args: &EvaluateArgs) -> anyhow::Result<()> {
    let mut eval = EvalConfig::default();
    if let Some(r) = args.radius {
        eval.match_radius = r;
    }
    eval.validate()?;

    let (table, config, pooled) = if let Some(counts) = &args.counts {
        let table = counts_table(&load_counts(counts)?);
        let config = EvaluationConfig {
            eval,
            inputs: Vec::new(),
            counts: Some(counts.clone()),
        };
        (table, config, false)
    } else {
        let pairs = match &args.corpus {
            Some(dir) => corpus_pairs(dir, &args.pred_name, &args.gt_name)?,
            None => {
                if args.pred.len() != args.gt.len() || args.pred.is_empty() {
                    anyhow::bail!(
                        "give --pred and --gt the same number of times ({} vs {})",
                        args.pred.len(),
                        args.gt.len()
                    );
                }
                args.pred.iter().cloned().zip(args.gt.iter().cloned()).collect()
            }
        };
        let table = evaluate_files(&pairs, &eval)?;
        let config = EvaluationConfig {
            eval,
            inputs: pairs,
            counts: None,
        };
        (table, config, true)
    };

    let report = EvaluationReport {
        match_radius: config.counts.is_none().then_some(eval.match_radius),
        table,
        provenance: provenance("evaluate", &config),
    };
    if let Some(out) = &args.output {
        write_json_atomic(out, &report)?;
    }
    let text = match args.format {
        OutputFormat::Text if pooled => report.table.render(),
        OutputFormat::Text => report.table.render_rows(),
        OutputFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
    };
    crate::emit(&text)?;
    Ok(())
}
