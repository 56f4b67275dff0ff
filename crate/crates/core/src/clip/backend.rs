use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::labels::{ClipTask, SceneClass, SceneLabel, TransitionClass, TransitionLabel};
use super::Clip;
use crate::dataset::{FrameCategory, GroundTruthDoc};
use crate::error::{Error, Result};
use crate::frame::DEFAULT_PATCH_SIZE;
use crate::model::{softmax, OnnxModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClipVerdict {
    Transition(TransitionClass),
    Scene(SceneClass),
}

impl ClipVerdict {
    pub fn transition(&self) -> Option<TransitionLabel> {
        match self {
            ClipVerdict::Transition(c) => Some(c.value),
            ClipVerdict::Scene(_) => None,
        }
    }

    pub fn scene(&self) -> Option<SceneLabel> {
        match self {
            ClipVerdict::Scene(c) => Some(c.value),
            ClipVerdict::Transition(_) => None,
        }
    }
}

/// Transition class of a clip whose frames have the given ground-truth
/// categories.
pub fn transition_label_for(cats: &[FrameCategory]) -> TransitionLabel {
    if cats.contains(&FrameCategory::Video) {
        return TransitionLabel::Video;
    }
    if cats.contains(&FrameCategory::Between) {
        return TransitionLabel::Gradual;
    }
    let first = cats.first();
    if cats.iter().any(|c| Some(c) != first) {
        TransitionLabel::Hard
    } else {
        TransitionLabel::StaticSlide
    }
}

/// Scene class of a clip whose frames have the given ground-truth categories.
pub fn scene_label_for(cats: &[FrameCategory]) -> SceneLabel {
    let videos = cats.iter().filter(|&&c| c == FrameCategory::Video).count();
    if videos == cats.len() {
        SceneLabel::Video
    } else if videos > 0 {
        SceneLabel::SlideVideoTransition
    } else {
        SceneLabel::Slide
    }
}

/// Clip classifier answering from ground-truth frame categories.
#[derive(Debug, Clone)]
pub struct ClipOracle {
    task: ClipTask,
    categories: Arc<Vec<FrameCategory>>,
}

impl ClipOracle {
    pub fn from_ground_truth(gt: &GroundTruthDoc, task: ClipTask) -> Self {
        Self {
            task,
            categories: Arc::new(gt.frame_categories()),
        }
    }

    pub fn load(path: &Path, task: ClipTask) -> Result<Self> {
        Ok(Self::from_ground_truth(&GroundTruthDoc::load(path)?, task))
    }

    pub fn task(&self) -> ClipTask {
        self.task
    }

    pub fn classify_range(&self, start: usize, end: usize) -> Result<ClipVerdict> {
        let cats = self
            .categories
            .get(start..=end)
            .ok_or(Error::OracleMissing(start, end))?;
        Ok(match self.task {
            ClipTask::Transition => ClipVerdict::Transition(TransitionClass::certain(transition_label_for(cats))),
            ClipTask::Scene => ClipVerdict::Scene(SceneClass::certain(scene_label_for(cats))),
        })
    }
}

/// Input/output contract of a clip network: `clip_len x patch x patch x 3`
/// (frames, rows, columns, RGB; values in `[0, 1]`) and 4 transition or 3
/// scene scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipModelContract {
    pub task: ClipTask,
    pub clip_len: usize,
    pub patch_size: u32,
}

impl ClipModelContract {
    pub fn new(task: ClipTask) -> Self {
        Self {
            task,
            clip_len: 8,
            patch_size: DEFAULT_PATCH_SIZE,
        }
    }

    pub fn input_shape(&self) -> [usize; 4] {
        let p = self.patch_size as usize;
        [self.clip_len, p, p, 3]
    }

    pub fn outputs(&self) -> usize {
        self.task.num_classes()
    }
}

#[derive(Debug, Clone)]
pub struct NeuralClipModel {
    model: OnnxModel,
    contract: ClipModelContract,
}

impl NeuralClipModel {
    pub fn load(path: &Path, contract: ClipModelContract) -> Result<Self> {
        let model = OnnxModel::load(
            path,
            &contract.input_shape(),
            &["frames", "rows", "columns", "channels"],
            contract.outputs(),
        )?;
        Ok(Self { model, contract })
    }

    pub fn contract(&self) -> &ClipModelContract {
        &self.contract
    }

    /// Class probabilities (softmax of the model outputs).
    pub fn probabilities(&self, clip: &Clip) -> Result<Vec<f64>> {
        let c = &self.contract;
        let p = c.patch_size;
        if clip.len() != c.clip_len {
            return Err(Error::FrameMismatch(format!(
                "clip model expects {} frames, clip at {} has {}",
                c.clip_len,
                clip.start(),
                clip.len()
            )));
        }
        let first = &clip.frames()[0];
        if first.width() != p || first.height() != p || first.channels() != 3 {
            return Err(Error::FrameMismatch(format!(
                "clip model expects {p}x{p}x3 frames, clip at {} has {}x{}x{}",
                clip.start(),
                first.width(),
                first.height(),
                first.channels()
            )));
        }
        let input: Vec<f32> = clip
            .frames()
            .iter()
            .flat_map(|f| f.pixels().iter().map(|&v| f32::from(v) / 255.0))
            .collect();
        let out = self.model.run(input)?;
        if out.len() != c.outputs() || out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Backend(format!(
                "clip model returned {:?}, expected {} finite scores",
                out,
                c.outputs()
            )));
        }
        Ok(softmax(&out))
    }
}

#[derive(Debug, Clone)]
pub enum ClipBackend {
    Oracle(ClipOracle),
    Neural(NeuralClipModel),
}

impl ClipBackend {
    pub fn task(&self) -> ClipTask {
        match self {
            ClipBackend::Oracle(o) => o.task,
            ClipBackend::Neural(m) => m.contract.task,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClipBackend::Oracle(_) => "oracle",
            ClipBackend::Neural(_) => "neural",
        }
    }
}

pub fn load_clip_model(path: &Path, contract: ClipModelContract) -> Result<ClipBackend> {
    Ok(ClipBackend::Neural(NeuralClipModel::load(path, contract)?))
}

/// Classify one clip. The clip's stream must match the backend's task:
/// cropped clips go to the transition network, raw clips to the scene
/// network.
pub fn classify_clip(clip: &Clip, backend: &ClipBackend) -> Result<ClipVerdict> {
    let task = backend.task();
    if clip.stream() != task.stream() {
        return Err(Error::InvalidInput(format!(
            "{task} backend takes {} clips, got a {} clip at {}",
            task.stream(),
            clip.stream(),
            clip.start()
        )));
    }
    match backend {
        ClipBackend::Oracle(o) => o.classify_range(clip.start(), clip.end()),
        ClipBackend::Neural(m) => {
            let probs = m.probabilities(clip)?;
            Ok(match task {
                ClipTask::Transition => {
                    ClipVerdict::Transition(TransitionClass::from_scores([probs[0], probs[1], probs[2], probs[3]])?)
                }
                ClipTask::Scene => ClipVerdict::Scene(SceneClass::from_scores([probs[0], probs[1], probs[2]])?),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::StreamKind;
    use crate::dataset::{Interval, SlideInterval};
    use crate::frame::Frame;
    use crate::record::{TransitionKind, TransitionRecord};

    fn gt() -> GroundTruthDoc {
        GroundTruthDoc {
            video: "v".into(),
            fps: 25.0,
            frame_count: 200,
            slide_intervals: vec![
                SlideInterval { slide_id: 0, start: 0, end: 39 },
                SlideInterval { slide_id: 1, start: 40, end: 79 },
                SlideInterval { slide_id: 2, start: 92, end: 119 },
            ],
            video_intervals: vec![Interval { start: 120, end: 199 }],
            transitions: vec![
                TransitionRecord::new(TransitionKind::Hard, 39, 40),
                TransitionRecord::new(TransitionKind::Gradual, 79, 92),
                TransitionRecord::new(TransitionKind::SlideVideo, 119, 120),
            ],
            user_added: vec![],
        }
    }

    fn clip(start: usize, stream: StreamKind) -> Clip {
        let frames = (start..start + 8).map(|i| Frame::filled(i, 4, 4, &[1, 2, 3]).unwrap()).collect();
        Clip::new(start, frames, stream).unwrap()
    }

    #[test]
    fn oracle_lookups() {
        let t = ClipBackend::Oracle(ClipOracle::from_ground_truth(&gt(), ClipTask::Transition));
        let s = ClipBackend::Oracle(ClipOracle::from_ground_truth(&gt(), ClipTask::Scene));
        let tl = |start| classify_clip(&clip(start, StreamKind::Cropped), &t).unwrap().transition().unwrap();
        let sl = |start| classify_clip(&clip(start, StreamKind::Raw), &s).unwrap().scene().unwrap();
        assert_eq!(tl(36), TransitionLabel::Hard);
        assert_eq!(tl(10), TransitionLabel::StaticSlide);
        assert_eq!(tl(82), TransitionLabel::Gradual);
        assert_eq!(tl(150), TransitionLabel::Video);
        assert_eq!(sl(116), SceneLabel::SlideVideoTransition);
        assert_eq!(sl(36), SceneLabel::Slide);
        assert_eq!(sl(150), SceneLabel::Video);
    }

    #[test]
    fn stream_must_match_task() {
        let t = ClipBackend::Oracle(ClipOracle::from_ground_truth(&gt(), ClipTask::Transition));
        assert!(classify_clip(&clip(10, StreamKind::Raw), &t).is_err());
    }

    #[test]
    fn oracle_out_of_range() {
        let t = ClipBackend::Oracle(ClipOracle::from_ground_truth(&gt(), ClipTask::Transition));
        assert!(classify_clip(&clip(195, StreamKind::Cropped), &t).is_err());
    }
}
