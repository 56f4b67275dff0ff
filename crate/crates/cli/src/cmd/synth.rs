use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use slidetx_core::dataset::{synthesize_video, write_synthetic_video, SyntheticScript, SyntheticVideo};
use slidetx_core::frame::raw::{RawFrameWriter, RawHeader};
use slidetx_core::{write_json_atomic, Error, Result};

use crate::args::SynthArgs;
use crate::config::provenance;
use crate::corpus;

/// Write every frame of `video` as one raw frame stream.
pub fn write_raw(video: &SyntheticVideo, path: &Path) -> Result<()> {
    let g = video.script().geometry;
    let header = RawHeader {
        width: g.width,
        height: g.height,
        channels: 3,
        frame_count: Some(video.frame_count() as u32),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = RawFrameWriter::new(BufWriter::new(file), header).map_err(|e| Error::io(path, e))?;
    for i in 0..video.frame_count() {
        w.write_frame(&video.frame(i)?)?;
    }
    w.finish().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn scripts(args: &SynthArgs) -> Result<Vec<SyntheticScript>> {
    let mut scripts = if args.script.is_empty() {
        let n = args.count.unwrap_or(0);
        (0..n)
            .map(|i| SyntheticScript::random(format!("synth{i:03}"), args.seed.wrapping_add(i as u64)))
            .collect()
    } else {
        args.script
            .iter()
            .map(|p| SyntheticScript::load(p))
            .collect::<Result<Vec<_>>>()?
    };
    if let Some(sigma) = args.noise {
        for s in &mut scripts {
            s.noise_sigma = sigma;
        }
    }
    Ok(scripts)
}

pub fn render(script: &SyntheticScript, out_dir: &Path, raw: bool) -> Result<SyntheticVideo> {
    let video = synthesize_video(script)?;
    let dir = out_dir.join(&script.video);
    write_synthetic_video(&video, &dir)?;
    if raw {
        write_raw(&video, &dir.join(corpus::RAW))?;
    }
    write_json_atomic(
        &dir.join("provenance.json"),
        &provenance("synth", &serde_json::json!({ "script": script, "raw": raw })),
    )?;
    Ok(video)
}

pub fn run(args: &SynthArgs) -> anyhow::Result<()> {
    let scripts = scripts(args)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let mut seen = std::collections::BTreeSet::new();
    for s in &scripts {
        if !seen.insert(s.video.as_str()) {
            anyhow::bail!("two scripts name the same video {:?}", s.video);
        }
    }
    let results: Vec<Result<String>> = scripts
        .par_iter()
        .map(|s| {
            render(s, &args.out_dir, args.raw).map(|v| {
                let gt = v.ground_truth();
                format!(
                    "{}: {} frames, {} transitions",
                    s.video,
                    v.frame_count(),
                    gt.transitions.len()
                )
            })
        })
        .collect();
    for r in results {
        crate::emit(&format!("{}\n", r?))?;
    }
    Ok(())
}
