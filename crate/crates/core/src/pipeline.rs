//! End-to-end detection over one video: a single streaming pass of pair
//! classification against the anchor, then clip classification around each
//! candidate and fusion.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::clip::{
    aggregate_votes, candidate_records, classify_clip, extract_clips, fuse, plan_clip_starts, ClassifiedCandidate,
    ClipBackend, ClipConfig, ClipTask, StreamKind,
};
use crate::detector::{derive_candidates, AnchorTracker, DetectorConfig, Segment, TransitionCandidate};
use crate::error::{Error, Result};
use crate::frame::{preprocess, ColorMode, Frame, FrameSpec, FrameStream, Roi, VideoSource};
use crate::pair::{PairBackend, PairLabel, PreparedFrame};
use crate::record::{DetectedTransition, DetectionDoc};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub frame: FrameSpec,
    pub detector: DetectorConfig,
    pub clip: ClipConfig,
    /// Report the first-stage candidates without clip refinement.
    pub first_stage_only: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            frame: FrameSpec::default(),
            detector: DetectorConfig::default(),
            clip: ClipConfig::default(),
            first_stage_only: false,
        }
    }
}

/// The two clip networks (or their stand-ins).
#[derive(Debug, Clone)]
pub struct ClipBackends {
    pub transition: ClipBackend,
    pub scene: ClipBackend,
}

impl ClipBackends {
    pub fn new(transition: ClipBackend, scene: ClipBackend) -> Result<Self> {
        if transition.task() != ClipTask::Transition || scene.task() != ClipTask::Scene {
            return Err(Error::Config(format!(
                "clip backends swapped: got {} and {} models",
                transition.task(),
                scene.task()
            )));
        }
        Ok(Self { transition, scene })
    }
}

/// Where a video's frames come from and how to crop them.
#[derive(Debug, Clone)]
pub struct VideoInput {
    pub id: String,
    pub source: VideoSource,
    pub crop: Option<Roi>,
    pub fps: Option<f64>,
}

/// Intermediate and final results of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutput {
    pub video: String,
    pub fps: Option<f64>,
    pub frame_count: usize,
    pub segments: Vec<Segment>,
    pub candidates: Vec<TransitionCandidate>,
    pub classified: Vec<ClassifiedCandidate>,
    pub transitions: Vec<DetectedTransition>,
}

impl DetectionOutput {
    pub fn to_doc(&self, provenance: Option<serde_json::Value>) -> DetectionDoc {
        DetectionDoc {
            video: self.video.clone(),
            fps: self.fps,
            frame_count: Some(self.frame_count),
            transitions: self.transitions.clone(),
            provenance,
        }
    }

    /// Segment and candidate dump.
    pub fn segments_doc(&self) -> serde_json::Value {
        serde_json::json!({
            "video": self.video,
            "segments": self.segments,
            "candidates": self.candidates,
        })
    }
}

fn pair_spec(cfg: &PipelineConfig, input: &VideoInput, backend: &PairBackend) -> FrameSpec {
    FrameSpec {
        color_mode: backend.color_mode().unwrap_or(cfg.frame.color_mode),
        crop: input.crop,
        ..cfg.frame
    }
}

/// First stage: one pass over the stream, each frame compared once with the
/// current anchor.
pub fn first_stage(input: &VideoInput, cfg: &PipelineConfig, pair: &PairBackend) -> Result<(usize, Option<f64>, Vec<Segment>)> {
    cfg.frame.validate()?;
    let stream = FrameStream::open(&input.source)?.with_fps(input.fps);
    let fps = stream.info().fps;
    let spec = pair_spec(cfg, input, pair);
    let needs_pixels = !matches!(pair, PairBackend::Oracle(_));
    let mut tracker = AnchorTracker::new(cfg.detector)?;
    let mut anchor: Option<PreparedFrame> = None;
    let mut n = 0;
    for frame in stream {
        let frame = frame?;
        let k = frame.index();
        let frame = if needs_pixels { preprocess(&frame, &spec)? } else { frame };
        let prepared = pair.prepare(&frame).map_err(|e| Error::Classifier {
            frame: k,
            source: Box::new(e),
        })?;
        n = k + 1;
        let Some(a) = &anchor else {
            anchor = Some(prepared);
            continue;
        };
        debug_assert_eq!(a.index(), tracker.anchor());
        let label = pair.compare(a, &prepared).map_err(|e| Error::Classifier {
            frame: k,
            source: Box::new(e),
        })?;
        if tracker.observe(k, label.value)? {
            anchor = Some(prepared);
        }
        debug_assert!(label.value == PairLabel::Same || tracker.anchor() == k);
    }
    Ok((n, fps, tracker.finish()))
}

/// Preprocessed frames for the given indices from both streams, read in a
/// second sequential pass.
fn load_clip_frames(
    input: &VideoInput,
    cfg: &PipelineConfig,
    wanted: &BTreeSet<usize>,
) -> Result<(BTreeMap<usize, Frame>, BTreeMap<usize, Frame>)> {
    let cropped_spec = FrameSpec {
        color_mode: ColorMode::Rgb,
        crop: input.crop,
        ..cfg.frame
    };
    let raw_spec = FrameSpec {
        color_mode: ColorMode::Rgb,
        crop: None,
        ..cfg.frame
    };
    let mut cropped = BTreeMap::new();
    let mut raw = BTreeMap::new();
    let Some(&last) = wanted.last() else {
        return Ok((cropped, raw));
    };
    for frame in FrameStream::open(&input.source)? {
        let frame = frame?;
        let k = frame.index();
        if wanted.contains(&k) {
            cropped.insert(k, preprocess(&frame, &cropped_spec)?);
            raw.insert(k, preprocess(&frame, &raw_spec)?);
        }
        if k >= last {
            break;
        }
    }
    Ok((cropped, raw))
}

/// Classify each candidate's clips with both networks and aggregate.
pub fn refine(
    input: &VideoInput,
    cfg: &PipelineConfig,
    n_frames: usize,
    candidates: &[TransitionCandidate],
    clips: &ClipBackends,
) -> Result<Vec<ClassifiedCandidate>> {
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let mut wanted = BTreeSet::new();
    for c in candidates {
        for s in plan_clip_starts(c.gap_start, c.gap_end, n_frames, &cfg.clip)? {
            wanted.extend(s..s + cfg.clip.clip_len);
        }
    }
    let (cropped, raw) = load_clip_frames(input, cfg, &wanted)?;
    candidates
        .iter()
        .map(|c| {
            let t_votes = extract_clips(c, &cropped, n_frames, StreamKind::Cropped, &cfg.clip)?
                .iter()
                .map(|clip| {
                    classify_clip(clip, &clips.transition)?
                        .transition()
                        .ok_or_else(|| Error::Backend("transition backend returned a scene class".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            let s_votes = extract_clips(c, &raw, n_frames, StreamKind::Raw, &cfg.clip)?
                .iter()
                .map(|clip| {
                    classify_clip(clip, &clips.scene)?
                        .scene()
                        .ok_or_else(|| Error::Backend("scene backend returned a transition class".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            let (transition, scene) = aggregate_votes(&t_votes, &s_votes)?;
            Ok(ClassifiedCandidate {
                candidate: *c,
                transition,
                scene,
            })
        })
        .collect()
}

/// Run the whole pipeline on one video. `clips` may be `None` only with
/// `first_stage_only`.
pub fn run_detection(
    input: &VideoInput,
    cfg: &PipelineConfig,
    pair: &PairBackend,
    clips: Option<&ClipBackends>,
) -> Result<DetectionOutput> {
    let (n, fps, segments) = first_stage(input, cfg, pair).map_err(|e| e.in_stage("pair classification"))?;
    let candidates = derive_candidates(&segments, &cfg.detector).map_err(|e| e.in_stage("candidate detection"))?;
    let (classified, transitions) = if cfg.first_stage_only {
        (Vec::new(), candidate_records(&candidates))
    } else {
        let clips = clips.ok_or_else(|| Error::Config("clip backends required unless first_stage_only".into()))?;
        let classified = refine(input, cfg, n, &candidates, clips).map_err(|e| e.in_stage("clip refinement"))?;
        let fused = fuse(&classified);
        (classified, fused)
    };
    Ok(DetectionOutput {
        video: input.id.clone(),
        fps,
        frame_count: n,
        segments,
        candidates,
        classified,
        transitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::ClipOracle;
    use crate::dataset::{synthesize_video, write_synthetic_video, SyntheticScript};
    use crate::eval::{evaluate, EvalConfig};
    use crate::pair::PairOracle;

    #[test]
    fn oracle_run_recovers_ground_truth() {
        let dir = tempfile::tempdir().unwrap();
        let mut script = SyntheticScript::random("p", 11);
        script.geometry = crate::dataset::GeometryConfig {
            width: 64,
            height: 48,
            slide_region: Roi::new(8, 6, 48, 36),
        };
        let video = synthesize_video(&script).unwrap();
        write_synthetic_video(&video, dir.path()).unwrap();
        let gt = video.ground_truth();
        let input = VideoInput {
            id: "p".into(),
            source: VideoSource::ImageDir(dir.path().join("frames")),
            crop: Some(video.crop()),
            fps: Some(25.0),
        };
        let cfg = PipelineConfig {
            frame: FrameSpec {
                patch_size: 32,
                ..FrameSpec::default()
            },
            ..PipelineConfig::default()
        };
        let pair = PairBackend::Oracle(PairOracle::from_slide_ids(video.pair_oracle_ids().to_vec()));
        let clips = ClipBackends::new(
            ClipBackend::Oracle(ClipOracle::from_ground_truth(gt, ClipTask::Transition)),
            ClipBackend::Oracle(ClipOracle::from_ground_truth(gt, ClipTask::Scene)),
        )
        .unwrap();
        let out = run_detection(&input, &cfg, &pair, Some(&clips)).unwrap();
        assert_eq!(out.frame_count, gt.frame_count);
        let preds: Vec<_> = out.transitions.iter().map(|t| t.record()).collect();
        let r = evaluate(&preds, &gt.transitions, &EvalConfig { match_radius: 1.0 });
        assert_eq!((r.fp, r.fn_), (0, 0), "{preds:?} vs {:?}", gt.transitions);
    }

    #[test]
    fn clip_backends_must_match_tasks() {
        let gt = synthesize_video(&SyntheticScript::random("q", 1)).unwrap().ground_truth().clone();
        let t = ClipBackend::Oracle(ClipOracle::from_ground_truth(&gt, ClipTask::Transition));
        let s = ClipBackend::Oracle(ClipOracle::from_ground_truth(&gt, ClipTask::Scene));
        assert!(ClipBackends::new(s, t).is_err());
    }
}
