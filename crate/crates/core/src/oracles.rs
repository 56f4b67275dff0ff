//! Brute-force reference implementations used to cross-check the production
//! code paths. Each one is written from the definition, with no shared code
//! with the module it checks. Compiled for tests and behind the `oracles`
//! feature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detector::Segment;
use crate::pair::PairLabel;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// A random but fixed pair classifier over `n` frames: a slide-id sequence
/// mixing static runs and moving stretches, with a small rate of flipped
/// verdicts that depends only on the (anchor, frame) pair.
#[derive(Debug, Clone)]
pub struct VerdictScript {
    seed: u64,
    ids: Vec<i64>,
    flip_per_mille: u64,
}

impl VerdictScript {
    pub fn random(seed: u64, n: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids = Vec::with_capacity(n);
        let mut next_id = 0i64;
        while ids.len() < n {
            if rng.random_bool(0.6) {
                let len = rng.random_range(1..40usize);
                ids.extend(std::iter::repeat_n(next_id, len));
                next_id += 1;
            } else {
                for _ in 0..rng.random_range(1..30usize) {
                    ids.push(next_id);
                    next_id += 1;
                }
            }
        }
        ids.truncate(n);
        Self {
            seed,
            ids,
            flip_per_mille: rng.random_range(0..60),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn verdict(&self, anchor: usize, k: usize) -> PairLabel {
        let same = self.ids[anchor] == self.ids[k];
        let h = splitmix(self.seed ^ splitmix((anchor as u64) << 32 | k as u64));
        let flip = h % 1000 < self.flip_per_mille;
        if same != flip {
            PairLabel::Same
        } else {
            PairLabel::Different
        }
    }
}

/// Segments from the anchor rule, computed by first materializing each
/// anchor's verdict row to split the video into maximal runs, then labeling
/// runs: a run of at least `t` frames is a static slide; each group of short
/// runs is a video interval starting where its first run ends and stopping
/// just before the next static slide (or at the last frame).
pub fn reference_segments(
    n: usize,
    t: usize,
    mut verdict: impl FnMut(usize, usize) -> PairLabel,
) -> Vec<Segment> {
    if n <= 1 {
        return Vec::new();
    }
    // Runs as half-open [start, end).
    let mut runs = Vec::new();
    let mut anchor = 0;
    loop {
        let row: Vec<PairLabel> = (anchor + 1..n).map(|j| verdict(anchor, j)).collect();
        let end = row
            .iter()
            .position(|&v| v == PairLabel::Different)
            .map_or(n, |p| anchor + 1 + p);
        runs.push((anchor, end));
        if end == n {
            break;
        }
        anchor = end;
    }

    let mut out = Vec::new();
    let mut i = 0;
    while i < runs.len() {
        let (s, e) = runs[i];
        if e - s >= t {
            out.push(Segment::slide(s, e - 1));
            i += 1;
            continue;
        }
        let group_start = i;
        while i < runs.len() && runs[i].1 - runs[i].0 < t {
            i += 1;
        }
        let first_end = runs[group_start].1;
        if i < runs.len() {
            // Closed by the static run starting at runs[i].0.
            let stop = runs[i].0;
            if stop > first_end {
                out.push(Segment::video(first_end, stop - 1));
            }
        } else if first_end < n {
            out.push(Segment::video(first_end, n - 1));
        }
    }
    out
}

/// All mutual-nearest pairs `(p, g)` within `radius`, from the full distance
/// matrix. Ties on distance go to the smaller `(start, end)` and then the
/// smaller index.
pub fn brute_force_mutual_matches(
    predicted: &[crate::record::TransitionRecord],
    labeled: &[crate::record::TransitionRecord],
    radius: f64,
) -> Vec<(usize, usize)> {
    let dist = |i: usize, j: usize| {
        let ds = predicted[i].start as f64 - labeled[j].start as f64;
        let de = predicted[i].end as f64 - labeled[j].end as f64;
        ds * ds + de * de
    };
    let best = |cands: Vec<(f64, usize, usize, usize)>| {
        let mut c = cands;
        c.sort_by(|a, b| a.partial_cmp(b).unwrap());
        c.first().map(|x| x.3)
    };
    let mut out = Vec::new();
    for i in 0..predicted.len() {
        let Some(j) = best(
            (0..labeled.len())
                .map(|j| (dist(i, j), labeled[j].start, labeled[j].end, j))
                .collect(),
        ) else {
            continue;
        };
        let back = best(
            (0..predicted.len())
                .map(|q| (dist(q, j), predicted[q].start, predicted[q].end, q))
                .collect(),
        );
        if back == Some(i) && dist(i, j).sqrt() <= radius + 1e-9 {
            out.push((i, j));
        }
    }
    out
}

/// Most frequent element of `votes`; among equally frequent ones, the one
/// listed first in `priority`.
pub fn majority_with_priority<T: PartialEq + Copy>(votes: &[T], priority: &[T]) -> Option<T> {
    let counts: Vec<usize> = priority
        .iter()
        .map(|p| votes.iter().filter(|v| *v == p).count())
        .collect();
    let max = *counts.iter().max()?;
    if max == 0 {
        return None;
    }
    priority.iter().zip(&counts).find(|(_, &c)| c == max).map(|(p, _)| *p)
}

/// Smallest clip count that covers `[lo, hi]` with windows of `len` frames
/// whose starts step by `stride`, found by trying counts one at a time.
pub fn minimal_cover_count(lo: usize, hi: usize, len: usize, stride: usize) -> usize {
    (1..)
        .find(|&c| {
            let frames: std::collections::BTreeSet<usize> =
                (0..c).flat_map(|i| lo + i * stride..lo + i * stride + len).collect();
            (lo..=hi).all(|f| frames.contains(&f))
        })
        .unwrap()
}
