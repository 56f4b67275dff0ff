use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationIssue};
use crate::record::{write_json_atomic, DetectedTransition, DetectionDoc, TransitionKind, TransitionRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlideInterval {
    pub slide_id: i64,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

/// What a single frame shows according to the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameCategory {
    Slide(i64),
    Video,
    /// Part of a gradual transition between two slides.
    Between,
}

/// Frame-level annotation of one video. Also the payload of the review
/// server's annotation endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthDoc {
    pub video: String,
    pub fps: f64,
    pub frame_count: usize,
    pub slide_intervals: Vec<SlideInterval>,
    #[serde(default)]
    pub video_intervals: Vec<Interval>,
    pub transitions: Vec<TransitionRecord>,
    /// Indices into `transitions` of entries a reviewer added by hand.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub user_added: Vec<usize>,
}

impl GroundTruthDoc {
    pub fn records(&self) -> &[TransitionRecord] {
        &self.transitions
    }

    pub fn to_detection_doc(&self) -> DetectionDoc {
        DetectionDoc {
            video: self.video.clone(),
            fps: Some(self.fps),
            frame_count: Some(self.frame_count),
            transitions: self.transitions.iter().copied().map(DetectedTransition::from).collect(),
            provenance: None,
        }
    }

    /// Every invariant violation, each with the path of the offending field.
    pub fn issues(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let n = self.frame_count;
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            issues.push(ValidationIssue::new("fps", format!("must be positive, got {}", self.fps)));
        }

        // (path, start, end, slide id)
        let mut spans: Vec<(String, usize, usize, Option<i64>)> = Vec::new();
        for (i, s) in self.slide_intervals.iter().enumerate() {
            spans.push((format!("slide_intervals[{i}]"), s.start, s.end, Some(s.slide_id)));
        }
        for (i, v) in self.video_intervals.iter().enumerate() {
            spans.push((format!("video_intervals[{i}]"), v.start, v.end, None));
        }
        for (path, start, end, _) in &spans {
            if start > end {
                issues.push(ValidationIssue::new(format!("{path}.start"), format!("start {start} after end {end}")));
            }
            if *end >= n {
                issues.push(ValidationIssue::new(
                    format!("{path}.end"),
                    format!("end {end} beyond frame_count {n}"),
                ));
            }
        }
        for (name, list) in [
            ("slide_intervals", self.slide_intervals.iter().map(|s| s.start).collect::<Vec<_>>()),
            ("video_intervals", self.video_intervals.iter().map(|s| s.start).collect()),
        ] {
            for i in 1..list.len() {
                if list[i] < list[i - 1] {
                    issues.push(ValidationIssue::new(
                        format!("{name}[{i}].start"),
                        format!("not sorted: starts before {name}[{}]", i - 1),
                    ));
                }
            }
        }

        spans.sort_by_key(|s| (s.1, s.2));
        for w in spans.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if b.1 <= a.2 {
                issues.push(ValidationIssue::new(
                    b.0.clone(),
                    format!("overlaps {} (frames {}..={} and {}..={})", a.0, a.1, a.2, b.1, b.2),
                ));
            } else if let (Some(x), Some(y)) = (a.3, b.3) {
                if x == y && b.1 == a.2 + 1 {
                    issues.push(ValidationIssue::new(
                        format!("{}.slide_id", b.0),
                        format!("slide id {y} repeats across the boundary with {}", a.0),
                    ));
                }
            }
        }

        for (i, t) in self.transitions.iter().enumerate() {
            let path = format!("transitions[{i}]");
            if t.start > t.end {
                issues.push(ValidationIssue::new(
                    format!("{path}.start"),
                    format!("start {} after end {}", t.start, t.end),
                ));
                continue;
            }
            if t.end >= n {
                issues.push(ValidationIssue::new(
                    format!("{path}.end"),
                    format!("end {} beyond frame_count {n}", t.end),
                ));
            }
            for (span, s, e, _) in &spans {
                // The transition may touch an interval only with its first
                // frame at the interval's last, or its last frame at the
                // interval's first.
                let start_inside = t.start >= *s && t.start < *e;
                let end_inside = t.end > *s && t.end <= *e;
                let covers = t.start < *s && t.end > *e;
                let bad_touch = (t.start == *e && t.end <= *e) || (t.end == *s && t.start >= *s);
                if start_inside || end_inside || covers || bad_touch {
                    issues.push(ValidationIssue::new(
                        path.clone(),
                        format!("({}, {}) cuts into {span} ({s}..={e})", t.start, t.end),
                    ));
                }
            }
        }
        for (k, &i) in self.user_added.iter().enumerate() {
            if i >= self.transitions.len() {
                issues.push(ValidationIssue::new(
                    format!("user_added[{k}]"),
                    format!("index {i} out of range"),
                ));
            }
        }
        issues
    }

    /// Starting point for a reviewer: the detected transitions, with slide
    /// and video intervals filled in between them. Spans that would come out
    /// empty are left out; the result is not validated.
    pub fn draft_from_detections(doc: &DetectionDoc, fps: f64, frame_count: usize) -> Self {
        let mut transitions = doc.records();
        transitions.sort_by_key(|t| (t.start, t.end));
        let mut slide_intervals = Vec::new();
        let mut video_intervals = Vec::new();
        let mut from = 0usize;
        let mut in_video = false;
        let mut push = |in_video: bool, start: usize, end: usize, slides: &mut Vec<SlideInterval>| {
            if start > end || end >= frame_count {
                return;
            }
            if in_video {
                video_intervals.push(Interval { start, end });
            } else {
                let slide_id = slides.len() as i64;
                slides.push(SlideInterval { slide_id, start, end });
            }
        };
        for t in &transitions {
            if t.start >= from {
                push(in_video, from, t.start, &mut slide_intervals);
            }
            in_video = t.kind == TransitionKind::SlideVideo;
            from = t.end;
        }
        if frame_count > 0 {
            push(in_video, from, frame_count - 1, &mut slide_intervals);
        }
        Self {
            video: doc.video.clone(),
            fps,
            frame_count,
            slide_intervals,
            video_intervals,
            transitions,
            user_added: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }

    /// Parse and validate; type errors carry the path of the bad field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Validation(vec![ValidationIssue::new(path, e.into_inner().to_string())])
        })?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let doc: Self = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::Validation(vec![ValidationIssue::new(path, e.into_inner().to_string())])
        })?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// Validate, then write atomically.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        write_json_atomic(path, self)
    }

    /// Category of every frame. Frames in no interval count as `Between`.
    pub fn frame_categories(&self) -> Vec<FrameCategory> {
        let mut cats = vec![FrameCategory::Between; self.frame_count];
        for s in &self.slide_intervals {
            for c in cats.iter_mut().take(s.end + 1).skip(s.start) {
                *c = FrameCategory::Slide(s.slide_id);
            }
        }
        for v in &self.video_intervals {
            for c in cats.iter_mut().take(v.end + 1).skip(v.start) {
                *c = FrameCategory::Video;
            }
        }
        cats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::TransitionKind;

    fn doc() -> GroundTruthDoc {
        GroundTruthDoc {
            video: "v".into(),
            fps: 25.0,
            frame_count: 200,
            slide_intervals: vec![
                SlideInterval { slide_id: 0, start: 0, end: 39 },
                SlideInterval { slide_id: 1, start: 40, end: 79 },
                SlideInterval { slide_id: 2, start: 92, end: 119 },
                SlideInterval { slide_id: 3, start: 180, end: 199 },
            ],
            video_intervals: vec![Interval { start: 120, end: 179 }],
            transitions: vec![
                TransitionRecord::new(TransitionKind::Hard, 39, 40),
                TransitionRecord::new(TransitionKind::Gradual, 79, 92),
                TransitionRecord::new(TransitionKind::SlideVideo, 119, 120),
                TransitionRecord::new(TransitionKind::VideoSlide, 179, 180),
            ],
            user_added: vec![],
        }
    }

    #[test]
    fn draft_reproduces_annotation() {
        let gt = doc();
        let draft = GroundTruthDoc::draft_from_detections(&gt.to_detection_doc(), gt.fps, gt.frame_count);
        assert!(draft.issues().is_empty(), "{:?}", draft.issues());
        assert_eq!(draft.transitions, gt.transitions);
        assert_eq!(draft.video_intervals, gt.video_intervals);
        let spans: Vec<_> = draft.slide_intervals.iter().map(|s| (s.start, s.end)).collect();
        let want: Vec<_> = gt.slide_intervals.iter().map(|s| (s.start, s.end)).collect();
        assert_eq!(spans, want);
    }

    #[test]
    fn valid_doc_passes() {
        assert_eq!(doc().issues(), vec![]);
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gt.json");
        let d = doc();
        d.save(&path).unwrap();
        assert_eq!(GroundTruthDoc::load(&path).unwrap(), d);
    }

    #[test]
    fn overlap_names_both_intervals() {
        let mut d = doc();
        d.slide_intervals[1].start = 30;
        let issues = d.issues();
        assert!(
            issues
                .iter()
                .any(|i| i.path == "slide_intervals[1]" && i.message.contains("slide_intervals[0]")),
            "{issues:?}"
        );
    }

    #[test]
    fn video_overlap_detected() {
        let mut d = doc();
        d.video_intervals[0].start = 110;
        assert!(d.issues().iter().any(|i| i.path == "video_intervals[0]"));
    }

    #[test]
    fn transition_inside_interval_rejected() {
        let mut d = doc();
        d.transitions[0] = TransitionRecord::new(TransitionKind::Hard, 20, 21);
        assert!(d.issues().iter().any(|i| i.path == "transitions[0]"));
    }

    #[test]
    fn repeated_adjacent_slide_id() {
        let mut d = doc();
        d.slide_intervals[1].slide_id = 0;
        assert!(d.issues().iter().any(|i| i.path == "slide_intervals[1].slide_id"));
    }

    #[test]
    fn type_error_has_path() {
        let mut v = serde_json::to_value(doc()).unwrap();
        v["slide_intervals"][2]["end"] = serde_json::json!("x");
        match GroundTruthDoc::from_value(v) {
            Err(Error::Validation(issues)) => assert_eq!(issues[0].path, "slide_intervals[2].end"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn categories() {
        let c = doc().frame_categories();
        assert_eq!(c[0], FrameCategory::Slide(0));
        assert_eq!(c[85], FrameCategory::Between);
        assert_eq!(c[150], FrameCategory::Video);
        assert_eq!(c[199], FrameCategory::Slide(3));
    }

    #[test]
    fn reads_as_detection_doc() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gt.json");
        doc().save(&path).unwrap();
        let det = DetectionDoc::load(&path).unwrap();
        assert_eq!(det.records(), doc().transitions);
    }
}
