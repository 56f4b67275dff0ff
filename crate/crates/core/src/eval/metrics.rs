use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::matching::{match_bidirectional, EvalConfig};
use crate::record::TransitionRecord;

/// Counts and percentages for one video or a pooled corpus. Percentages are
/// `None` when their denominator is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_predicted: usize,
    pub n_ground_truth: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn compute_metrics(tp: usize, fp: usize, fn_: usize) -> MetricsReport {
    let pct = |num: usize, den: usize| (den > 0).then(|| 100.0 * num as f64 / den as f64);
    let precision = pct(tp, tp + fp);
    let recall = pct(tp, tp + fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    MetricsReport {
        n_predicted: tp + fp,
        n_ground_truth: tp + fn_,
        tp,
        fp,
        fn_,
        precision,
        recall,
        f1,
    }
}

/// Match and score one video.
pub fn evaluate(predicted: &[TransitionRecord], labeled: &[TransitionRecord], cfg: &EvalConfig) -> MetricsReport {
    let m = match_bidirectional(predicted, labeled, cfg);
    compute_metrics(m.tp, predicted.len() - m.tp, labeled.len() - m.tp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedReport {
    pub name: String,
    #[serde(flatten)]
    pub report: MetricsReport,
}

impl NamedReport {
    pub fn new(name: impl Into<String>, report: MetricsReport) -> Self {
        Self {
            name: name.into(),
            report,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub rows: Vec<NamedReport>,
    /// Micro-average: counts summed over rows, then scored.
    pub pooled: MetricsReport,
}

pub fn report_table(per_video: &[NamedReport]) -> TableReport {
    let (tp, fp, fn_) = per_video.iter().fold((0, 0, 0), |(tp, fp, fn_), r| {
        (tp + r.report.tp, fp + r.report.fp, fn_ + r.report.fn_)
    });
    TableReport {
        rows: per_video.to_vec(),
        pooled: compute_metrics(tp, fp, fn_),
    }
}

fn fmt_pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"))
}

impl TableReport {
    /// Aligned plain-text table, one line per row plus the pooled row.
    pub fn render(&self) -> String {
        self.render_with(true)
    }

    /// Same table without the pooled row, for rows that are not parts of one
    /// whole (e.g. competing methods on the same videos).
    pub fn render_rows(&self) -> String {
        self.render_with(false)
    }

    fn render_with(&self, pooled: bool) -> String {
        let mut lines: Vec<[String; 8]> = vec![[
            "name".into(),
            "transitions".into(),
            "TP".into(),
            "FP".into(),
            "FN".into(),
            "precision".into(),
            "recall".into(),
            "F1".into(),
        ]];
        let row = |name: &str, r: &MetricsReport| -> [String; 8] {
            [
                name.to_string(),
                r.n_predicted.to_string(),
                r.tp.to_string(),
                r.fp.to_string(),
                r.fn_.to_string(),
                fmt_pct(r.precision),
                fmt_pct(r.recall),
                fmt_pct(r.f1),
            ]
        };
        for r in &self.rows {
            lines.push(row(&r.name, &r.report));
        }
        if pooled {
            lines.push(row("pooled", &self.pooled));
        }

        let mut widths = [0usize; 8];
        for l in &lines {
            for (w, cell) in widths.iter_mut().zip(l) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for (n, l) in lines.iter().enumerate() {
            if pooled && n == lines.len() - 1 {
                let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
            let mut line = format!("{:<w$}", l[0], w = widths[0]);
            for (cell, w) in l.iter().zip(widths).skip(1) {
                let _ = write!(line, "  {cell:>w$}");
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        out
    }
}
