use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gt::{GroundTruthDoc, SlideInterval};
use crate::clip::{scene_label_for, transition_label_for, ClipConfig, ClipTask, SceneLabel, StreamKind, TransitionLabel};
use crate::error::{Error, Result};
use crate::pair::PairLabel;
use crate::record::TransitionKind;

/// Training settings recorded alongside a manifest. Nothing here is executed;
/// it documents how the samples are meant to be used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub network: String,
    pub loss: String,
    pub solver: String,
    pub betas: [f64; 2],
    pub learning_rate: f64,
    pub linear_decay_from_epoch: u32,
    pub epochs: u32,
    pub early_stopping: bool,
    pub batch_size: u32,
    pub augmentation: Vec<String>,
}

impl TrainingMeta {
    fn base(network: &str, loss: &str, decay: u32, batch: u32) -> Self {
        Self {
            network: network.into(),
            loss: loss.into(),
            solver: "adam".into(),
            betas: [0.9, 0.999],
            learning_rate: 2e-4,
            linear_decay_from_epoch: decay,
            epochs: 100,
            early_stopping: true,
            batch_size: batch,
            augmentation: [
                "color_jitter",
                "horizontal_flip",
                "color_inversion",
                "gaussian_blur_kernel_1_to_21",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        }
    }

    pub fn pair_network() -> Self {
        Self::base("resnet18_2d", "binary_cross_entropy", 50, 64)
    }

    pub fn clip_network() -> Self {
        let mut m = Self::base("resnet50_3d", "weighted_cross_entropy", 60, 32);
        m.augmentation.push("reversed_clip_order".into());
        m.augmentation.push("one_frame_offset".into());
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEntry {
    pub frame_i: usize,
    pub frame_j: usize,
    pub label: PairLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairManifestConfig {
    pub seed: u64,
    /// Most positive pairs drawn from one slide interval.
    pub max_pairs_per_slide: usize,
}

impl Default for PairManifestConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_pairs_per_slide: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairManifest {
    pub video: String,
    pub config: PairManifestConfig,
    pub training: TrainingMeta,
    pub entries: Vec<PairEntry>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn random_frame(rng: &mut ChaCha8Rng, s: &SlideInterval) -> usize {
    rng.random_range(s.start..=s.end)
}

/// Sample up to `count` distinct unordered pairs from `make`, skipping ones
/// already in `seen`. Gives up after a bounded number of attempts.
fn draw_pairs(
    rng: &mut ChaCha8Rng,
    count: usize,
    seen: &mut BTreeSet<(usize, usize)>,
    mut make: impl FnMut(&mut ChaCha8Rng) -> Option<(usize, usize)>,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 50 * count + 50 {
        attempts += 1;
        let Some((a, b)) = make(rng) else { break };
        if a != b && seen.insert(key(a, b)) {
            out.push(key(a, b));
        }
    }
    out
}

/// Balanced same/different frame pairs. For each slide interval, positives
/// are pairs inside it; the same number of negatives come first from the
/// neighboring slide intervals (at least one per neighbor, up to half the
/// quota) and then from random frames of any other slide.
pub fn generate_pair_manifest(gt: &GroundTruthDoc, cfg: &PairManifestConfig) -> Result<PairManifest> {
    gt.validate()?;
    let slides = &gt.slide_intervals;
    let ids: BTreeSet<i64> = slides.iter().map(|s| s.slide_id).collect();
    if ids.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "{}: need at least two distinct slides for negative pairs, found {}",
            gt.video,
            ids.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seen = BTreeSet::new();
    let mut positives = Vec::new();
    // Per slide: neighbor negatives (protected from trimming), then fill.
    let mut neighbor_neg = Vec::new();
    let mut fill_neg = Vec::new();

    for (si, s) in slides.iter().enumerate() {
        let len = s.end - s.start + 1;
        let all_pairs = len * (len - 1) / 2;
        let quota = all_pairs.min(cfg.max_pairs_per_slide);
        let pos = if all_pairs <= cfg.max_pairs_per_slide {
            let mut v = Vec::new();
            for a in s.start..=s.end {
                for b in a + 1..=s.end {
                    if seen.insert((a, b)) {
                        v.push((a, b));
                    }
                }
            }
            v
        } else {
            draw_pairs(&mut rng, quota, &mut seen, |r| {
                Some((random_frame(r, s), random_frame(r, s)))
            })
        };
        positives.extend(pos.iter().map(|&(a, b)| (a, b, PairLabel::Same)));

        let neighbors: Vec<&SlideInterval> = [si.checked_sub(1), Some(si + 1)]
            .into_iter()
            .flatten()
            .filter_map(|i| slides.get(i))
            .filter(|n| n.slide_id != s.slide_id)
            .collect();
        let want = pos.len();
        let neighbor_quota = if neighbors.is_empty() {
            0
        } else {
            want.div_ceil(2).max(neighbors.len())
        };
        let mut got = 0;
        for (k, n) in neighbors.iter().enumerate() {
            let share = neighbor_quota / neighbors.len() + usize::from(k < neighbor_quota % neighbors.len());
            let drawn = draw_pairs(&mut rng, share, &mut seen, |r| Some((random_frame(r, s), random_frame(r, n))));
            got += drawn.len();
            neighbor_neg.extend(drawn.into_iter().map(|(a, b)| (a, b, PairLabel::Different)));
        }
        let others: Vec<&SlideInterval> = slides.iter().filter(|o| o.slide_id != s.slide_id).collect();
        let drawn = draw_pairs(&mut rng, want.saturating_sub(got), &mut seen, |r| {
            let o = others.choose(r)?;
            Some((random_frame(r, s), random_frame(r, o)))
        });
        fill_neg.extend(drawn.into_iter().map(|(a, b)| (a, b, PairLabel::Different)));
    }

    // Exact balance: trim whichever side is longer, random fill negatives
    // before neighbor negatives.
    let n_neg = neighbor_neg.len() + fill_neg.len();
    if positives.len() > n_neg {
        positives.shuffle(&mut rng);
        positives.truncate(n_neg);
    } else if n_neg > positives.len() {
        let mut excess = n_neg - positives.len();
        fill_neg.shuffle(&mut rng);
        let cut = excess.min(fill_neg.len());
        fill_neg.truncate(fill_neg.len() - cut);
        excess -= cut;
        neighbor_neg.shuffle(&mut rng);
        neighbor_neg.truncate(neighbor_neg.len() - excess);
    }

    let mut entries: Vec<PairEntry> = positives
        .into_iter()
        .chain(neighbor_neg)
        .chain(fill_neg)
        .map(|(frame_i, frame_j, label)| PairEntry { frame_i, frame_j, label })
        .collect();
    entries.sort_by_key(|e| (e.frame_i, e.frame_j));
    Ok(PairManifest {
        video: gt.video.clone(),
        config: *cfg,
        training: TrainingMeta::pair_network(),
        entries,
    })
}

/// A clip class of either network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClipClass {
    Transition(TransitionLabel),
    Scene(SceneLabel),
}

impl fmt::Display for ClipClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClipClass::Transition(t) => t.fmt(f),
            ClipClass::Scene(s) => s.fmt(f),
        }
    }
}

impl ClipClass {
    pub fn all(task: ClipTask) -> Vec<ClipClass> {
        match task {
            ClipTask::Transition => TransitionLabel::ALL.iter().map(|&t| ClipClass::Transition(t)).collect(),
            ClipTask::Scene => SceneLabel::ALL.iter().map(|&s| ClipClass::Scene(s)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipEntry {
    pub start: usize,
    pub class: ClipClass,
    pub stream: StreamKind,
    /// Placement rule that produced the entry, e.g. `hard+1` or `static`.
    pub position: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedPosition {
    pub position: String,
    pub start: usize,
    pub end: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipReport {
    pub skipped: Vec<SkippedPosition>,
}

impl SkipReport {
    pub fn len(&self) -> usize {
        self.skipped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skipped.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipManifest {
    pub video: String,
    pub task: ClipTask,
    pub clip: ClipConfig,
    pub seed: u64,
    pub training: TrainingMeta,
    pub entries: Vec<ClipEntry>,
    pub skips: SkipReport,
}

/// Clip starts by placement rule, before bounds checks. `center` is the
/// frame the clip's middle lands on: a clip of length `L` starting at `s`
/// has its middle at `s + L / 2`.
fn placements(gt: &GroundTruthDoc, l: usize, per_video_stretch: usize) -> Vec<(String, i64, (usize, usize))> {
    let half = (l / 2) as i64;
    let mut out = Vec::new();
    for t in &gt.transitions {
        let span = (t.start, t.end);
        match t.kind {
            TransitionKind::Gradual => {
                let begin = t.start as i64 + 1;
                let middle = ((t.start + t.end + 1) / 2) as i64;
                let end = t.end as i64;
                out.push(("gradual_begin".into(), begin - half, span));
                out.push(("gradual_middle".into(), middle - half, span));
                out.push(("gradual_end".into(), end - half, span));
            }
            _ => {
                let c = ((t.start + t.end + 1) / 2) as i64;
                let name = t.kind.to_string();
                for off in [-1i64, 0, 1] {
                    let tag = if off == 0 { name.clone() } else { format!("{name}{off:+}") };
                    out.push((tag, c + off - half, span));
                }
            }
        }
    }
    for s in &gt.slide_intervals {
        let len = s.end - s.start + 1;
        if len < l {
            out.push(("static".into(), -1, (s.start, s.end)));
            continue;
        }
        let c = ((s.start + s.end + 1) / 2) as i64;
        out.push(("static".into(), c - half, (s.start, s.end)));
    }
    for v in &gt.video_intervals {
        let len = v.end - v.start + 1;
        if len < l {
            out.push(("video".into(), -1, (v.start, v.end)));
            continue;
        }
        let count = (len / per_video_stretch.max(1)).clamp(1, 16);
        let room = len - l;
        for k in 0..count {
            let offset = if count == 1 { room / 2 } else { k * room / (count - 1) };
            out.push((format!("video{k}"), (v.start + offset) as i64, (v.start, v.end)));
        }
    }
    out
}

/// Clips at the characteristic positions of the ground truth: centered on
/// hard cuts (and one frame either side), at the beginning, middle and end
/// of gradual transitions, in the middle of each slide interval and equally
/// spaced through video intervals. Labels come from the frames each clip
/// covers. Positions whose clip would leave the video or the interval it
/// samples are skipped and reported.
pub fn generate_clip_manifest(gt: &GroundTruthDoc, cfg: &ClipConfig, task: ClipTask, seed: u64) -> Result<ClipManifest> {
    gt.validate()?;
    cfg.validate()?;
    let l = cfg.clip_len;
    let n = gt.frame_count;
    let cats = gt.frame_categories();
    let mut entries = Vec::new();
    let mut skips = SkipReport::default();
    let mut seen = BTreeSet::new();
    // One clip per static-threshold-length stretch of a video interval.
    let stretch = crate::detector::DetectorConfig::default().static_min_frames;
    for (position, start, (a, b)) in placements(gt, l, stretch) {
        let in_bounds = start >= 0 && start as usize + l <= n;
        if !in_bounds {
            let reason = if start < 0 && (b - a + 1) < l {
                format!("interval of {} frames shorter than clip_len {l}", b - a + 1)
            } else {
                format!("clip at {start} leaves the video of {n} frames")
            };
            skips.skipped.push(SkippedPosition {
                position,
                start: a,
                end: b,
                reason,
            });
            continue;
        }
        let start = start as usize;
        let window = &cats[start..start + l];
        let class = match task {
            ClipTask::Transition => ClipClass::Transition(transition_label_for(window)),
            ClipTask::Scene => ClipClass::Scene(scene_label_for(window)),
        };
        if seen.insert((start, class)) {
            entries.push(ClipEntry {
                start,
                class,
                stream: task.stream(),
                position,
            });
        }
    }
    entries.sort_by(|x, y| (x.start, x.class).cmp(&(y.start, y.class)));
    Ok(ClipManifest {
        video: gt.video.clone(),
        task,
        clip: *cfg,
        seed,
        training: TrainingMeta::clip_network(),
        entries,
        skips,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub total: usize,
    pub counts: BTreeMap<String, usize>,
    pub weights: BTreeMap<String, f64>,
    /// Classes with no samples; they get no weight.
    pub missing: Vec<String>,
}

/// Inverse-frequency weights `N / (K * count)` over the given classes.
pub fn inverse_frequency_weights(counts: &[(String, usize)]) -> Result<ClassWeights> {
    let total: usize = counts.iter().map(|c| c.1).sum();
    if total == 0 {
        return Err(Error::InvalidInput("no samples to weight".into()));
    }
    let k = counts.len() as f64;
    let mut out = ClassWeights {
        total,
        counts: BTreeMap::new(),
        weights: BTreeMap::new(),
        missing: Vec::new(),
    };
    for (name, c) in counts {
        out.counts.insert(name.clone(), *c);
        if *c == 0 {
            out.missing.push(name.clone());
        } else {
            out.weights.insert(name.clone(), total as f64 / (k * *c as f64));
        }
    }
    Ok(out)
}

pub fn class_weights(manifest: &ClipManifest) -> Result<ClassWeights> {
    if manifest.entries.is_empty() {
        return Err(Error::InvalidInput(format!("{}: empty clip manifest", manifest.video)));
    }
    let counts: Vec<(String, usize)> = ClipClass::all(manifest.task)
        .into_iter()
        .map(|c| (c.to_string(), manifest.entries.iter().filter(|e| e.class == c).count()))
        .collect();
    inverse_frequency_weights(&counts)
}

/// JSON-lines text: a header object carrying everything but the entries,
/// then one entry per line.
fn to_jsonl<E: Serialize>(header: serde_json::Value, entries: &[E]) -> String {
    let mut out = serde_json::to_string(&serde_json::json!({ "meta": header })).expect("header serializes");
    out.push('\n');
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("entry serializes"));
        out.push('\n');
    }
    out
}

impl PairManifest {
    pub fn positives(&self) -> usize {
        self.entries.iter().filter(|e| e.label == PairLabel::Same).count()
    }

    pub fn negatives(&self) -> usize {
        self.entries.len() - self.positives()
    }

    pub fn to_jsonl(&self) -> String {
        self.to_jsonl_with(None)
    }

    /// JSON lines with `provenance` recorded in the header line.
    pub fn to_jsonl_with(&self, provenance: Option<&serde_json::Value>) -> String {
        let mut header = serde_json::json!({
            "kind": "pair",
            "video": self.video,
            "config": self.config,
            "training": self.training,
            "positives": self.positives(),
            "negatives": self.negatives(),
        });
        if let Some(p) = provenance {
            header["provenance"] = p.clone();
        }
        to_jsonl(header, &self.entries)
    }
}

impl ClipManifest {
    pub fn to_jsonl(&self) -> String {
        self.to_jsonl_with(None)
    }

    pub fn to_jsonl_with(&self, provenance: Option<&serde_json::Value>) -> String {
        let mut header = serde_json::json!({
            "kind": "clip",
            "video": self.video,
            "task": self.task,
            "clip": self.clip,
            "seed": self.seed,
            "training": self.training,
            "skips": self.skips,
        });
        if let Some(p) = provenance {
            header["provenance"] = p.clone();
        }
        to_jsonl(header, &self.entries)
    }
}
