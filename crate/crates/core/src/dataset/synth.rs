use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::gt::{GroundTruthDoc, Interval, SlideInterval};
use crate::error::{Error, Result, ValidationIssue};
use crate::frame::{Frame, Roi, VideoSidecar};
use crate::pair::OracleScript;
use crate::record::{write_json_atomic, TransitionKind, TransitionRecord};

/// Frozen frames inside a video scene must stay this far from its edges so
/// the footage on either side still reads as video.
pub const MIN_HOLD_MARGIN: usize = 12;

/// Gray level outside the slide region on slide frames.
const SURROUND: u8 = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneKind {
    Slide,
    Video,
}

/// How a scene hands over to the next one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TransitionOut {
    Hard,
    /// Linear cross-fade through `len` inserted frames.
    Gradual { len: usize },
    CutToVideo,
}

/// A stretch of frozen frames inside a video scene, `at` frames in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hold {
    pub at: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub kind: SceneKind,
    pub duration: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition_out: Option<TransitionOut>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holds: Vec<Hold>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub width: u32,
    pub height: u32,
    /// Where slides are drawn; also the crop written to the sidecar.
    pub slide_region: Roi,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            width: 320,
            height: 180,
            slide_region: Roi::new(32, 18, 256, 144),
        }
    }
}

fn default_fps() -> f64 {
    25.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScript {
    pub video: String,
    pub seed: u64,
    #[serde(default = "default_fps")]
    pub fps: f64,
    /// Standard deviation of additive Gaussian pixel noise; 0 disables it.
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub geometry: GeometryConfig,
    pub scenes: Vec<SceneSpec>,
}

impl SyntheticScript {
    pub fn issues(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let g = &self.geometry;
        if g.width < 32 || g.height < 32 {
            issues.push(ValidationIssue::new(
                "geometry",
                format!("{}x{} too small to render, need at least 32x32", g.width, g.height),
            ));
        }
        let r = g.slide_region;
        if r.width < 32 || r.height < 32 || !r.fits_within(g.width, g.height) {
            issues.push(ValidationIssue::new(
                "geometry.slide_region",
                format!("{r} must be at least 32x32 and inside {}x{}", g.width, g.height),
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            issues.push(ValidationIssue::new("noise_sigma", "must be finite and >= 0"));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            issues.push(ValidationIssue::new("fps", "must be positive"));
        }
        if self.scenes.is_empty() {
            issues.push(ValidationIssue::new("scenes", "no scenes"));
        }
        for (i, s) in self.scenes.iter().enumerate() {
            let path = format!("scenes[{i}]");
            if s.duration == 0 {
                issues.push(ValidationIssue::new(format!("{path}.duration"), "must be >= 1"));
            }
            if !s.holds.is_empty() && s.kind != SceneKind::Video {
                issues.push(ValidationIssue::new(format!("{path}.holds"), "only video scenes can hold"));
            }
            for (h, hold) in s.holds.iter().enumerate() {
                if hold.len == 0
                    || hold.at < MIN_HOLD_MARGIN
                    || hold.at + hold.len + MIN_HOLD_MARGIN > s.duration
                {
                    issues.push(ValidationIssue::new(
                        format!("{path}.holds[{h}]"),
                        format!("hold must be non-empty and at least {MIN_HOLD_MARGIN} frames from the scene edges"),
                    ));
                }
            }
            let Some(next) = self.scenes.get(i + 1) else { continue };
            let out = s.transition_out;
            match (s.kind, next.kind, out) {
                (SceneKind::Video, SceneKind::Video, _) => issues.push(ValidationIssue::new(
                    path.clone(),
                    "two consecutive video scenes; merge them",
                )),
                (SceneKind::Slide, SceneKind::Slide, Some(TransitionOut::CutToVideo)) => issues.push(
                    ValidationIssue::new(format!("{path}.transition_out"), "cut_to_video between two slides"),
                ),
                (SceneKind::Slide, SceneKind::Slide, Some(TransitionOut::Gradual { len })) if len < 2 => {
                    issues.push(ValidationIssue::new(
                        format!("{path}.transition_out.len"),
                        "gradual transitions need at least 2 frames",
                    ))
                }
                (_, _, Some(TransitionOut::Gradual { .. })) if s.kind != next.kind => issues.push(
                    ValidationIssue::new(format!("{path}.transition_out"), "gradual transitions join two slides"),
                ),
                _ => {}
            }
        }
        issues
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let script: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        script.validate()?;
        Ok(script)
    }

    /// A plausible lecture: five to seven slides joined by hard cuts and
    /// cross-fades, usually with one video scene, sometimes frozen for a
    /// while.
    pub fn random(video: impl Into<String>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_slides = rng.random_range(5..=7);
        let mut scenes: Vec<SceneSpec> = (0..n_slides)
            .map(|_| SceneSpec {
                kind: SceneKind::Slide,
                duration: rng.random_range(20..=50),
                transition_out: Some(if rng.random_bool(0.6) {
                    TransitionOut::Hard
                } else {
                    TransitionOut::Gradual {
                        len: rng.random_range(4..=16),
                    }
                }),
                holds: vec![],
            })
            .collect();
        if rng.random_bool(0.75) {
            let duration = rng.random_range(50..=90);
            let holds = if rng.random_bool(0.5) {
                vec![Hold {
                    at: rng.random_range(MIN_HOLD_MARGIN + 3..=MIN_HOLD_MARGIN + 10),
                    len: rng.random_range(10..=14),
                }]
            } else {
                vec![]
            };
            let slot = rng.random_range(0..=n_slides);
            if slot > 0 {
                scenes[slot - 1].transition_out = Some(TransitionOut::CutToVideo);
            }
            scenes.insert(
                slot,
                SceneSpec {
                    kind: SceneKind::Video,
                    duration,
                    transition_out: Some(TransitionOut::Hard),
                    holds,
                },
            );
        }
        if let Some(last) = scenes.last_mut() {
            last.transition_out = None;
        }
        Self {
            video: video.into(),
            seed,
            fps: 25.0,
            noise_sigma: 0.0,
            geometry: GeometryConfig::default(),
            scenes,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Slide(usize),
    Video { scene: usize, t: usize },
    /// Blend weight of slide `b` is `num / den`.
    Fade { a: usize, b: usize, num: u32, den: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Blob {
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    r: f64,
    color: [u8; 3],
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    x = (x ^ (x >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    x ^ (x >> 33)
}

/// A rendered-on-demand synthetic video and its exact ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticVideo {
    script: SyntheticScript,
    plan: Vec<Source>,
    slides: Vec<Vec<u8>>,
    blobs: Vec<Vec<Blob>>,
    gt: GroundTruthDoc,
    oracle_ids: Vec<i64>,
}

fn render_slide(geom: &GeometryConfig, seed: u64, index: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, 1, index as u64));
    let (w, h) = (geom.width as usize, geom.height as usize);
    let mut px = vec![SURROUND; w * h * 3];
    let r = geom.slide_region;
    // Alternate light and dark backgrounds so consecutive slides differ
    // strongly even when blended.
    let light = index % 2 == 0;
    let base: [i32; 3] = std::array::from_fn(|_| {
        if light {
            rng.random_range(170..=245)
        } else {
            rng.random_range(10..=80)
        }
    });
    let ramp: i32 = if rng.random_bool(0.5) { rng.random_range(-30..=30) } else { 0 };
    let (rx, ry, rw, rh) = (r.x as usize, r.y as usize, r.width as usize, r.height as usize);
    for y in ry..ry + rh {
        let shade = ramp * (y - ry) as i32 / rh as i32;
        for x in rx..rx + rw {
            let o = (y * w + x) * 3;
            for c in 0..3 {
                px[o + c] = (base[c] + shade).clamp(0, 255) as u8;
            }
        }
    }
    let ink = |rng: &mut ChaCha8Rng| -> [u8; 3] {
        std::array::from_fn(|_| {
            if light {
                rng.random_range(0..=90)
            } else {
                rng.random_range(160..=255)
            }
        })
    };
    // Title bar and text blocks.
    let mut blocks = vec![(rx + rw / 10, ry + rh / 12, rw * 8 / 10, (rh / 10).max(2), ink(&mut rng))];
    for _ in 0..rng.random_range(3..=8) {
        let bw = rng.random_range(rw / 8..=rw / 2);
        let bh = rng.random_range(2..=(rh / 12).max(3));
        let bx = rx + rng.random_range(rw / 20..rw - bw);
        let by = ry + rng.random_range(rh / 4..rh - bh);
        blocks.push((bx, by, bw, bh, ink(&mut rng)));
    }
    for (bx, by, bw, bh, color) in blocks {
        for y in by..(by + bh).min(ry + rh) {
            for x in bx..(bx + bw).min(rx + rw) {
                let o = (y * w + x) * 3;
                px[o..o + 3].copy_from_slice(&color);
            }
        }
    }
    px
}

impl SyntheticVideo {
    pub fn script(&self) -> &SyntheticScript {
        &self.script
    }

    pub fn frame_count(&self) -> usize {
        self.plan.len()
    }

    pub fn ground_truth(&self) -> &GroundTruthDoc {
        &self.gt
    }

    /// One id per frame, equal exactly for frames that show the same image
    /// before noise: slide frames share their slide's id, frames of one
    /// frozen stretch share an id, every other frame has its own.
    pub fn pair_oracle_ids(&self) -> &[i64] {
        &self.oracle_ids
    }

    pub fn crop(&self) -> Roi {
        self.script.geometry.slide_region
    }

    fn render_video(&self, scene: usize, t: usize) -> Vec<u8> {
        let geom = &self.script.geometry;
        let (w, h) = (geom.width as usize, geom.height as usize);
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.script.seed, 2 + scene as u64, t as u64));
        let base: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..255.0));
        let gx: f64 = rng.random_range(-80.0..80.0);
        let gy: f64 = rng.random_range(-80.0..80.0);
        let mut px = vec![0u8; w * h * 3];
        for y in 0..h {
            let fy = y as f64 / h as f64 - 0.5;
            for x in 0..w {
                let fx = x as f64 / w as f64 - 0.5;
                let o = (y * w + x) * 3;
                for c in 0..3 {
                    px[o + c] = (base[c] + gx * fx + gy * fy).clamp(0.0, 255.0) as u8;
                }
            }
        }
        for b in &self.blobs[scene] {
            let cx = (b.x + b.vx * t as f64).rem_euclid(w as f64);
            let cy = (b.y + b.vy * t as f64).rem_euclid(h as f64);
            let (x0, x1) = ((cx - b.r).max(0.0) as usize, ((cx + b.r) as usize).min(w - 1));
            let (y0, y1) = ((cy - b.r).max(0.0) as usize, ((cy + b.r) as usize).min(h - 1));
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                    if dx * dx + dy * dy <= b.r * b.r {
                        let o = (y * w + x) * 3;
                        px[o..o + 3].copy_from_slice(&b.color);
                    }
                }
            }
        }
        px
    }

    /// Pixels of frame `index` without noise.
    pub fn clean_pixels(&self, index: usize) -> Result<Vec<u8>> {
        let src = *self
            .plan
            .get(index)
            .ok_or_else(|| Error::InvalidInput(format!("frame {index} beyond {}", self.plan.len())))?;
        Ok(match src {
            Source::Slide(s) => self.slides[s].clone(),
            Source::Video { scene, t } => self.render_video(scene, t),
            Source::Fade { a, b, num, den } => {
                let (pa, pb) = (&self.slides[a], &self.slides[b]);
                pa.iter()
                    .zip(pb)
                    .map(|(&x, &y)| {
                        // round((x * (den - num) + y * num) / den)
                        ((x as u32 * (den - num) + y as u32 * num + den / 2) / den) as u8
                    })
                    .collect()
            }
        })
    }

    pub fn frame(&self, index: usize) -> Result<Frame> {
        let mut px = self.clean_pixels(index)?;
        let sigma = self.script.noise_sigma;
        if sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(self.script.seed, 3, index as u64));
            let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("noise: {e}")))?;
            for v in px.iter_mut() {
                let n: f64 = normal.sample(&mut rng);
                *v = (*v as f64 + n).round().clamp(0.0, 255.0) as u8;
            }
        }
        let g = &self.script.geometry;
        Frame::new(index, g.width, g.height, 3, px)
    }

    pub fn sidecar(&self) -> VideoSidecar {
        VideoSidecar {
            crop: Some(self.crop()),
            fps: self.script.fps,
            frame_count: Some(self.frame_count()),
        }
    }
}

/// Lay out the script's frames and derive the ground truth.
pub fn synthesize_video(script: &SyntheticScript) -> Result<SyntheticVideo> {
    script.validate()?;
    let mut plan = Vec::new();
    let mut slide_intervals = Vec::new();
    let mut video_intervals = Vec::new();
    let mut transitions = Vec::new();
    let mut oracle_ids = Vec::new();
    let mut next_id = 0i64;
    let mut fresh = || {
        next_id += 1;
        next_id - 1
    };
    let mut slide_count = 0;
    let mut blobs = Vec::new();
    // Slide index of each scene, for fades.
    let mut scene_slide = vec![None; script.scenes.len()];

    for (si, s) in script.scenes.iter().enumerate() {
        let start = plan.len();
        match s.kind {
            SceneKind::Slide => {
                let id = fresh();
                scene_slide[si] = Some(slide_count);
                plan.extend(std::iter::repeat_n(Source::Slide(slide_count), s.duration));
                oracle_ids.extend(std::iter::repeat_n(id, s.duration));
                slide_intervals.push(SlideInterval {
                    slide_id: id,
                    start,
                    end: start + s.duration - 1,
                });
                slide_count += 1;
                blobs.push(Vec::new());
            }
            SceneKind::Video => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(script.seed, 4, si as u64));
                let g = &script.geometry;
                blobs.push(
                    (0..rng.random_range(2..=4))
                        .map(|_| Blob {
                            x: rng.random_range(0.0..g.width as f64),
                            y: rng.random_range(0.0..g.height as f64),
                            vx: rng.random_range(-6.0..6.0),
                            vy: rng.random_range(-4.0..4.0),
                            r: rng.random_range(8.0..(g.height as f64 / 4.0).max(9.0)),
                            color: std::array::from_fn(|_| rng.random_range(0..=255)),
                        })
                        .collect(),
                );
                let mut t = 0;
                while t < s.duration {
                    if let Some(h) = s.holds.iter().find(|h| h.at == t) {
                        let id = fresh();
                        plan.extend(std::iter::repeat_n(Source::Video { scene: si, t }, h.len));
                        oracle_ids.extend(std::iter::repeat_n(id, h.len));
                        t += h.len;
                    } else {
                        plan.push(Source::Video { scene: si, t });
                        oracle_ids.push(fresh());
                        t += 1;
                    }
                }
                video_intervals.push(Interval {
                    start,
                    end: start + s.duration - 1,
                });
            }
        }
        let end = plan.len() - 1;
        let Some(next) = script.scenes.get(si + 1) else { break };
        match (s.kind, next.kind) {
            (SceneKind::Slide, SceneKind::Slide) => match s.transition_out {
                Some(TransitionOut::Gradual { len }) => {
                    let a = scene_slide[si].expect("slide scene");
                    let b = slide_count;
                    let den = len as u32 + 1;
                    for j in 0..len {
                        plan.push(Source::Fade {
                            a,
                            b,
                            num: j as u32 + 1,
                            den,
                        });
                        oracle_ids.push(fresh());
                    }
                    transitions.push(TransitionRecord::new(TransitionKind::Gradual, end, end + len + 1));
                }
                _ => transitions.push(TransitionRecord::new(TransitionKind::Hard, end, end + 1)),
            },
            (SceneKind::Slide, SceneKind::Video) => {
                transitions.push(TransitionRecord::new(TransitionKind::SlideVideo, end, end + 1))
            }
            (SceneKind::Video, SceneKind::Slide) => {
                transitions.push(TransitionRecord::new(TransitionKind::VideoSlide, end, end + 1))
            }
            (SceneKind::Video, SceneKind::Video) => unreachable!("rejected by validation"),
        }
    }

    let slides = (0..slide_count)
        .map(|i| render_slide(&script.geometry, script.seed, i))
        .collect();
    let gt = GroundTruthDoc {
        video: script.video.clone(),
        fps: script.fps,
        frame_count: plan.len(),
        slide_intervals,
        video_intervals,
        transitions,
        user_added: vec![],
    };
    gt.validate()?;
    Ok(SyntheticVideo {
        script: script.clone(),
        plan,
        slides,
        blobs,
        gt,
        oracle_ids,
    })
}

/// Write `<dir>/frames/%08d.png`, `sidecar.json`, `gt.json`,
/// `pair_oracle.json` and `script.json`.
pub fn write_synthetic_video(video: &SyntheticVideo, dir: &Path) -> Result<()> {
    let frames = dir.join("frames");
    std::fs::create_dir_all(&frames).map_err(|e| Error::io(&frames, e))?;
    for i in 0..video.frame_count() {
        video.frame(i)?.save_png(&frames.join(format!("{i:08}.png")))?;
    }
    write_json_atomic(&dir.join("sidecar.json"), &video.sidecar())?;
    video.gt.save(&dir.join("gt.json"))?;
    write_json_atomic(
        &dir.join("pair_oracle.json"),
        &OracleScript::SlideIds {
            slide_id_per_frame: video.oracle_ids.clone(),
        },
    )?;
    write_json_atomic(&dir.join("script.json"), &video.script)
}
