use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::Context;
use slidetx_core::frame::FrameStream;
use slidetx_core::{slide_keyframes, DetectionDoc, Error, Result, Roi, VideoSource};

use crate::args::ExtractSlidesArgs;
use crate::config::{provenance, resolve_source};
use crate::corpus::{self, VideoDir};

pub fn keyframe_name(slide: usize, frame: usize) -> String {
    format!("slide_{slide:04}_frame{frame:08}.png")
}

/// Decode `source` once and save the frames at `keyframes` (cropped to
/// `crop` if given) into `out_dir`.
pub fn save_keyframes(source: &VideoSource, crop: Option<Roi>, keyframes: &[usize], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let wanted: BTreeSet<usize> = keyframes.iter().copied().collect();
    let Some(&last) = wanted.iter().next_back() else {
        return Ok(Vec::new());
    };
    let mut written = Vec::new();
    for frame in FrameStream::open(source)? {
        let frame = frame?;
        let k = frame.index();
        if wanted.contains(&k) {
            let frame = match crop {
                Some(roi) => frame.crop(roi)?,
                None => frame,
            };
            let path = out_dir.join(keyframe_name(written.len(), k));
            frame.save_png(&path)?;
            written.push(path);
        }
        if k >= last {
            break;
        }
    }
    if written.len() < wanted.len() {
        return Err(Error::InvalidInput(format!(
            "stream ended before frame {last}; saved {} of {} slides",
            written.len(),
            wanted.len()
        )));
    }
    Ok(written)
}

pub fn run(args: &ExtractSlidesArgs) -> anyhow::Result<()> {
    let dir = VideoDir::open(&args.input);
    let (_, crop, _) = resolve_source(&args.source, dir.as_ref())?;
    let det_path = args
        .detections
        .clone()
        .or_else(|| dir.as_ref().map(|d| d.file(corpus::DETECTIONS)))
        .context("pass --detections (input is not a video directory)")?;
    let doc = DetectionDoc::load(&det_path)?;
    let source = match &dir {
        Some(d) => d.source(),
        None => VideoSource::from_path(&args.input, args.source.decoder.clone())?,
    };
    let frame_count = match doc.frame_count {
        Some(n) => n,
        None => FrameStream::open(&source)?.count(),
    };
    let keyframes = slide_keyframes(&doc.records(), frame_count);
    let crop = if args.full_frame { None } else { crop };
    let written = save_keyframes(&source, crop, &keyframes, &args.out_dir)?;
    let manifest = serde_json::json!({
        "video": doc.video,
        "slides": written.iter().zip(&keyframes).map(|(p, k)| serde_json::json!({
            "frame": k,
            "file": p.file_name().map(|n| n.to_string_lossy().into_owned()),
        })).collect::<Vec<_>>(),
        "provenance": provenance("extract-slides", &serde_json::json!({
            "input": args.input,
            "detections": det_path,
            "crop": crop,
        })),
    });
    slidetx_core::write_json_atomic(&args.out_dir.join("slides.json"), &manifest)?;
    crate::emit(&format!("{}: {} slides -> {}\n", doc.video, written.len(), args.out_dir.display()))?;
    Ok(())
}
