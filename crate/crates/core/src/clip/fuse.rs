use serde::{Deserialize, Serialize};

use super::labels::{SceneLabel, TransitionLabel};
use crate::detector::{CandidateKind, TransitionCandidate};
use crate::record::{DetectedTransition, TransitionKind, VoteSummary};

/// A candidate with the aggregated vote of each clip network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedCandidate {
    pub candidate: TransitionCandidate,
    pub transition: TransitionLabel,
    pub scene: SceneLabel,
}

impl ClassifiedCandidate {
    fn dropped(&self) -> bool {
        self.transition == TransitionLabel::Video && self.scene == SceneLabel::Video
    }

    /// Both networks see a slide change rather than footage.
    fn slide_gradual(&self) -> bool {
        self.transition == TransitionLabel::Gradual && self.scene == SceneLabel::Slide
    }

    fn votes(&self) -> VoteSummary {
        VoteSummary {
            transition: self.transition.to_string(),
            scene: self.scene.to_string(),
        }
    }
}

fn geometric_kind(c: &TransitionCandidate) -> TransitionKind {
    if c.gap_end - c.gap_start == 1 {
        TransitionKind::Hard
    } else {
        TransitionKind::Gradual
    }
}

/// First-stage output: every candidate as a record, slide-slide gaps typed
/// hard when the two segments touch and gradual otherwise.
pub fn candidate_records(candidates: &[TransitionCandidate]) -> Vec<DetectedTransition> {
    candidates
        .iter()
        .map(|c| DetectedTransition {
            kind: match c.kind {
                CandidateKind::SlideSlide => geometric_kind(c),
                CandidateKind::SlideVideo => TransitionKind::SlideVideo,
                CandidateKind::VideoSlide => TransitionKind::VideoSlide,
            },
            start: c.gap_start,
            end: c.gap_end,
            votes: None,
        })
        .collect()
}

/// Drop candidates both networks call video and map the rest to records.
///
/// A slide-video candidate directly followed by the video-slide candidate
/// on the far side of the same video segment, both voted gradual by the
/// transition network and slide by the scene network, is a long blend that
/// the first stage split in two; it is reported as one gradual record
/// spanning both gaps.
pub fn fuse(items: &[ClassifiedCandidate]) -> Vec<DetectedTransition> {
    let mut out = Vec::with_capacity(items.len());
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        let c = &item.candidate;
        if item.dropped() {
            i += 1;
            continue;
        }
        if let Some(next) = items.get(i + 1) {
            let n = &next.candidate;
            if c.kind == CandidateKind::SlideVideo
                && n.kind == CandidateKind::VideoSlide
                && c.context.1 == n.context.0
                && item.slide_gradual()
                && next.slide_gradual()
            {
                out.push(DetectedTransition {
                    kind: TransitionKind::Gradual,
                    start: c.gap_start,
                    end: n.gap_end,
                    votes: Some(item.votes()),
                });
                i += 2;
                continue;
            }
        }
        let kind = match c.kind {
            CandidateKind::SlideSlide => match item.transition {
                TransitionLabel::Hard => TransitionKind::Hard,
                TransitionLabel::Gradual => TransitionKind::Gradual,
                TransitionLabel::StaticSlide | TransitionLabel::Video => geometric_kind(c),
            },
            CandidateKind::SlideVideo => TransitionKind::SlideVideo,
            CandidateKind::VideoSlide => TransitionKind::VideoSlide,
        };
        out.push(DetectedTransition {
            kind,
            start: c.gap_start,
            end: c.gap_end,
            votes: Some(item.votes()),
        });
        i += 1;
    }
    out.sort_by_key(|t| (t.start, t.end));
    out
}
