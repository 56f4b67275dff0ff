//! First stage: compare every frame with an anchor frame and turn the
//! verdict stream into static-slide and video segments, then into
//! transition candidates.
//!
//! The anchor starts at frame 0. When frame `k` is judged different from
//! the anchor, the run `d = k - anchor` decides what happened:
//!
//! * `d >= static_min_frames`: the run was a static slide `[anchor, k-1]`;
//!   any pending video interval is closed first.
//! * otherwise the frames are moving: the first such frame opens a video
//!   interval (previous video anchor), later ones extend it (video anchor).
//!
//! Either way the anchor moves to `k`. A pending video interval ends right
//! before the static slide that closes it, so segments never overlap.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pair::PairLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Shortest run of unchanged frames that counts as a static slide.
    pub static_min_frames: usize,
    /// Shortest video segment that gets its own slide-video / video-slide
    /// candidates; shorter ones are treated as part of a gradual gap.
    pub min_video_len: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            static_min_frames: 8,
            min_video_len: 9,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.static_min_frames == 0 {
            return Err(Error::Config("static_min_frames must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    StaticSlide,
    Video,
}

/// Inclusive frame interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn new(kind: SegmentKind, start: usize, end: usize) -> Self {
        Self { kind, start, end }
    }

    pub fn slide(start: usize, end: usize) -> Self {
        Self::new(SegmentKind::StaticSlide, start, end)
    }

    pub fn video(start: usize, end: usize) -> Self {
        Self::new(SegmentKind::Video, start, end)
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            SegmentKind::StaticSlide => "Slide",
            SegmentKind::Video => "Video",
        };
        write!(f, "{kind}({}, {})", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    SlideSlide,
    SlideVideo,
    VideoSlide,
}

/// Gap between two segments that may hold a transition. `gap_start` is the
/// last frame of the preceding segment, `gap_end` the first of the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransitionCandidate {
    pub kind: CandidateKind,
    pub gap_start: usize,
    pub gap_end: usize,
    /// Indices of the segments on either side.
    pub context: (usize, usize),
}

/// Streaming anchor state machine. Feed it one verdict per frame `k >= 1`
/// (frame `k` compared with [`AnchorTracker::anchor`]).
#[derive(Debug, Clone)]
pub struct AnchorTracker {
    cfg: DetectorConfig,
    anchor: usize,
    prev_video_anchor: Option<usize>,
    video_anchor: Option<usize>,
    next_frame: usize,
    segments: Vec<Segment>,
}

impl AnchorTracker {
    pub fn new(cfg: DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            anchor: 0,
            prev_video_anchor: None,
            video_anchor: None,
            next_frame: 1,
            segments: Vec::new(),
        })
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    /// Frame index the next verdict must be for.
    pub fn next_frame(&self) -> usize {
        self.next_frame
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Record the verdict for frame `k` against the current anchor. Returns
    /// true when the anchor moved to `k`.
    pub fn observe(&mut self, k: usize, label: PairLabel) -> Result<bool> {
        if k != self.next_frame {
            return Err(Error::InvalidInput(format!(
                "verdict for frame {k}, expected frame {}",
                self.next_frame
            )));
        }
        self.next_frame += 1;
        if label == PairLabel::Same {
            return Ok(false);
        }
        let run = k - self.anchor;
        if run >= self.cfg.static_min_frames {
            self.close_video();
            self.segments.push(Segment::slide(self.anchor, k - 1));
        } else {
            if self.prev_video_anchor.is_none() {
                self.prev_video_anchor = Some(k);
            }
            self.video_anchor = Some(k);
        }
        self.anchor = k;
        Ok(true)
    }

    /// Close a pending video interval right before the current anchor.
    fn close_video(&mut self) {
        if let Some(start) = self.prev_video_anchor.take() {
            self.video_anchor = None;
            if self.anchor > start {
                self.segments.push(Segment::video(start, self.anchor - 1));
            }
        }
    }

    /// Flush the trailing run. `n_frames` must equal the number of frames
    /// seen (verdicts + 1).
    pub fn finish(mut self) -> Vec<Segment> {
        let n_frames = self.next_frame;
        if n_frames <= 1 {
            return self.segments;
        }
        let run = n_frames - self.anchor;
        if run >= self.cfg.static_min_frames {
            self.close_video();
            self.segments.push(Segment::slide(self.anchor, n_frames - 1));
        } else if let Some(start) = self.prev_video_anchor.take() {
            self.segments.push(Segment::video(start, n_frames - 1));
        }
        self.segments
    }
}

/// Run the state machine over `n_frames` frames, calling
/// `classify(anchor, k)` exactly once for every `k` in `1..n_frames`.
pub fn detect_segments<F>(n_frames: usize, cfg: &DetectorConfig, mut classify: F) -> Result<Vec<Segment>>
where
    F: FnMut(usize, usize) -> Result<PairLabel>,
{
    let mut tracker = AnchorTracker::new(*cfg)?;
    if n_frames == 0 {
        return Ok(Vec::new());
    }
    for k in 1..n_frames {
        let label = classify(tracker.anchor(), k).map_err(|e| Error::Classifier {
            frame: k,
            source: Box::new(e),
        })?;
        tracker.observe(k, label)?;
    }
    Ok(tracker.finish())
}

fn check_segments(segments: &[Segment]) -> Result<()> {
    for (i, s) in segments.iter().enumerate() {
        if s.start > s.end {
            return Err(Error::Segments(format!("segment {i} {s} has start after end")));
        }
        if i > 0 && segments[i - 1].end >= s.start {
            return Err(Error::Segments(format!(
                "segment {} {} overlaps or precedes segment {i} {s}",
                i - 1,
                segments[i - 1]
            )));
        }
    }
    Ok(())
}

/// Turn segments into candidates: consecutive static slides give a
/// slide-slide candidate; a video segment of at least `min_video_len` frames
/// gives slide-video / video-slide candidates at whichever of its borders
/// touches a static slide. Shorter video segments are absorbed into the gap.
pub fn derive_candidates(segments: &[Segment], cfg: &DetectorConfig) -> Result<Vec<TransitionCandidate>> {
    check_segments(segments)?;
    let effective: Vec<usize> = segments
        .iter()
        .enumerate()
        .filter(|(_, s)| s.kind == SegmentKind::StaticSlide || s.len() >= cfg.min_video_len)
        .map(|(i, _)| i)
        .collect();
    let mut out = Vec::new();
    for pair in effective.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        let (a, b) = (&segments[i], &segments[j]);
        let kind = match (a.kind, b.kind) {
            (SegmentKind::StaticSlide, SegmentKind::StaticSlide) => CandidateKind::SlideSlide,
            (SegmentKind::StaticSlide, SegmentKind::Video) => CandidateKind::SlideVideo,
            (SegmentKind::Video, SegmentKind::StaticSlide) => CandidateKind::VideoSlide,
            (SegmentKind::Video, SegmentKind::Video) => continue,
        };
        out.push(TransitionCandidate {
            kind,
            gap_start: a.end,
            gap_end: b.start,
            context: (i, j),
        });
    }
    Ok(out)
}
