//! Transition-level evaluation: mutual-nearest matching of predicted and
//! labeled transitions in `(start, end)` space, and precision / recall / F1.

mod matching;
mod metrics;

pub use matching::{match_bidirectional, EvalConfig, MatchResult};
pub use metrics::{compute_metrics, evaluate, report_table, MetricsReport, NamedReport, TableReport};
