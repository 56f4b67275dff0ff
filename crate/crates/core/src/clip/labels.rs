use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two clip networks a backend stands in for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClipTask {
    /// Four classes, cropped stream.
    Transition,
    /// Three classes, raw stream.
    Scene,
}

impl ClipTask {
    pub fn num_classes(self) -> usize {
        match self {
            ClipTask::Transition => TransitionLabel::ALL.len(),
            ClipTask::Scene => SceneLabel::ALL.len(),
        }
    }

    pub fn stream(self) -> super::StreamKind {
        match self {
            ClipTask::Transition => super::StreamKind::Cropped,
            ClipTask::Scene => super::StreamKind::Raw,
        }
    }
}

impl fmt::Display for ClipTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClipTask::Transition => "transition",
            ClipTask::Scene => "scene",
        })
    }
}

/// Output classes of the transition network, in model output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionLabel {
    Hard,
    Gradual,
    StaticSlide,
    Video,
}

impl TransitionLabel {
    pub const ALL: [TransitionLabel; 4] = [
        TransitionLabel::Hard,
        TransitionLabel::Gradual,
        TransitionLabel::StaticSlide,
        TransitionLabel::Video,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransitionLabel::Hard => "hard",
            TransitionLabel::Gradual => "gradual",
            TransitionLabel::StaticSlide => "static_slide",
            TransitionLabel::Video => "video",
        }
    }
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Output classes of the scene network, in model output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneLabel {
    SlideVideoTransition,
    Slide,
    Video,
}

impl SceneLabel {
    pub const ALL: [SceneLabel; 3] = [SceneLabel::SlideVideoTransition, SceneLabel::Slide, SceneLabel::Video];

    pub fn as_str(self) -> &'static str {
        match self {
            SceneLabel::SlideVideoTransition => "slide_video_transition",
            SceneLabel::Slide => "slide",
            SceneLabel::Video => "video",
        }
    }
}

impl fmt::Display for SceneLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionClass {
    pub value: TransitionLabel,
    pub scores: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneClass {
    pub value: SceneLabel,
    pub scores: [f64; 3],
}

/// Index of the largest score; the earlier class wins exact ties.
pub(crate) fn argmax(scores: &[f64]) -> Result<usize> {
    if scores.is_empty() || scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Backend(format!("scores not finite: {scores:?}")));
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(best)
}

impl TransitionClass {
    pub fn from_scores(scores: [f64; 4]) -> Result<Self> {
        Ok(Self {
            value: TransitionLabel::ALL[argmax(&scores)?],
            scores,
        })
    }

    pub fn certain(value: TransitionLabel) -> Self {
        let mut scores = [0.0; 4];
        scores[value as usize] = 1.0;
        Self { value, scores }
    }
}

impl SceneClass {
    pub fn from_scores(scores: [f64; 3]) -> Result<Self> {
        Ok(Self {
            value: SceneLabel::ALL[argmax(&scores)?],
            scores,
        })
    }

    pub fn certain(value: SceneLabel) -> Self {
        let mut scores = [0.0; 3];
        scores[value as usize] = 1.0;
        Self { value, scores }
    }
}

/// Majority label; ties go to the label listed first in `order`.
fn majority<T: Copy + PartialEq>(votes: &[T], order: &[T]) -> T {
    let mut best = order[0];
    let mut best_count = 0;
    for &label in order {
        let c = votes.iter().filter(|&&v| v == label).count();
        if c > best_count {
            best = label;
            best_count = c;
        }
    }
    best
}

/// One decision per network from its per-clip votes. Ties prefer
/// non-video, then hard over gradual over static slide (scene network:
/// slide-video transition over slide).
pub fn aggregate_votes(transition: &[TransitionLabel], scene: &[SceneLabel]) -> Result<(TransitionLabel, SceneLabel)> {
    if transition.is_empty() || scene.is_empty() {
        return Err(Error::InvalidInput("aggregate_votes needs at least one vote per network".into()));
    }
    Ok((
        majority(transition, &TransitionLabel::ALL),
        majority(scene, &SceneLabel::ALL),
    ))
}
