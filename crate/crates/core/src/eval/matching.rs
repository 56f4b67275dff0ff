use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::TransitionRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Largest Euclidean distance between `(start, end)` points that still
    /// counts as a match (inclusive).
    pub match_radius: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { match_radius: 20.0 }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.match_radius >= 0.0 && self.match_radius.is_finite()) {
            return Err(Error::Config(format!(
                "match_radius must be >= 0, got {}",
                self.match_radius
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatchResult {
    pub tp: usize,
    /// `(predicted index, labeled index)` for every matched pair.
    pub pairs: Vec<(usize, usize)>,
}

fn squared_distance(a: &TransitionRecord, b: &TransitionRecord) -> u128 {
    let ds = a.start.abs_diff(b.start) as u128;
    let de = a.end.abs_diff(b.end) as u128;
    ds * ds + de * de
}

/// Index of the record in `pool` nearest to `from`. Equal distances go to
/// the lexicographically smaller `(start, end)`, then the lower index, so
/// the choice does not depend on list order except between identical
/// records.
fn nearest(from: &TransitionRecord, pool: &[TransitionRecord]) -> Option<(usize, u128)> {
    pool.iter()
        .enumerate()
        .map(|(i, r)| (i, squared_distance(from, r)))
        .min_by(|(i, d), (j, e)| {
            d.cmp(e)
                .then_with(|| (pool[*i].start, pool[*i].end).cmp(&(pool[*j].start, pool[*j].end)))
                .then_with(|| i.cmp(j))
        })
}

/// A prediction and a label match when each is the other's nearest record
/// and they lie within `match_radius`. Kinds are not compared.
pub fn match_bidirectional(
    predicted: &[TransitionRecord],
    labeled: &[TransitionRecord],
    cfg: &EvalConfig,
) -> MatchResult {
    let radius_sq = cfg.match_radius * cfg.match_radius;
    let label_nearest: Vec<Option<usize>> = labeled
        .iter()
        .map(|g| nearest(g, predicted).map(|(i, _)| i))
        .collect();
    let mut pairs = Vec::new();
    for (i, p) in predicted.iter().enumerate() {
        let Some((j, d2)) = nearest(p, labeled) else {
            continue;
        };
        if label_nearest[j] == Some(i) && (d2 as f64) <= radius_sq {
            pairs.push((i, j));
        }
    }
    MatchResult {
        tp: pairs.len(),
        pairs,
    }
}
