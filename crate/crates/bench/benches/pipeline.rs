use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slidetx_bench::{full_hd_frame, lecture};
use slidetx_core::pair::{DiffBlur, DiffBlurConfig};
use slidetx_core::record::TransitionKind;
use slidetx_core::{
    detect_segments, match_bidirectional, preprocess, ColorMode, DetectorConfig, EvalConfig, Frame, FrameSpec,
    PairBackend, TransitionRecord,
};

fn diff_backend(color_mode: ColorMode) -> PairBackend {
    PairBackend::Diff(
        DiffBlur::new(DiffBlurConfig {
            color_mode,
            ..DiffBlurConfig::default()
        })
        .unwrap(),
    )
}

fn bench_preprocess(c: &mut Criterion) {
    let frame = full_hd_frame();
    let mut g = c.benchmark_group("preprocess_1080p");
    for mode in [ColorMode::Rgb, ColorMode::Gray] {
        let spec = FrameSpec {
            color_mode: mode,
            ..FrameSpec::default()
        };
        g.bench_function(format!("{mode:?}").to_lowercase(), |b| {
            b.iter(|| preprocess(black_box(&frame), &spec).unwrap())
        });
    }
    g.finish();
}

fn patches(n: usize) -> Vec<Frame> {
    let video = lecture(5);
    let spec = FrameSpec {
        crop: Some(video.crop()),
        ..FrameSpec::default()
    };
    (0..n.min(video.frame_count()))
        .map(|i| preprocess(&video.frame(i).unwrap(), &spec).unwrap())
        .collect()
}

fn bench_diff(c: &mut Criterion) {
    let frames = patches(2);
    let backend = diff_backend(ColorMode::Rgb);
    let a = backend.prepare(&frames[0]).unwrap();
    let b = backend.prepare(&frames[1]).unwrap();
    c.bench_function("diff_blur_prepare_256", |bench| {
        bench.iter(|| backend.prepare(black_box(&frames[0])).unwrap())
    });
    c.bench_function("diff_blur_compare_256", |bench| {
        bench.iter(|| backend.compare(black_box(&a), black_box(&b)).unwrap())
    });
}

fn bench_first_stage(c: &mut Criterion) {
    let frames = patches(usize::MAX);
    let backend = diff_backend(ColorMode::Rgb);
    let cfg = DetectorConfig::default();
    let mut g = c.benchmark_group("first_stage");
    g.sample_size(10);
    g.bench_function(format!("diff_{}_frames", frames.len()), |b| {
        b.iter(|| {
            let prepared: Vec<_> = frames.iter().map(|f| backend.prepare(f).unwrap()).collect();
            detect_segments(prepared.len(), &cfg, |a, k| {
                Ok(backend.compare(&prepared[a], &prepared[k])?.value)
            })
            .unwrap()
        })
    });
    g.finish();
}

fn records(rng: &mut ChaCha8Rng, n: usize) -> Vec<TransitionRecord> {
    (0..n)
        .map(|_| {
            let start = rng.random_range(0..100_000);
            TransitionRecord::new(TransitionKind::Hard, start, start + rng.random_range(1..20))
        })
        .collect()
}

fn bench_matching(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = EvalConfig::default();
    c.bench_function("match_500x400", |b| {
        b.iter_batched(
            || (records(&mut rng, 500), records(&mut rng, 400)),
            |(p, g)| match_bidirectional(&p, &g, &cfg),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_preprocess, bench_diff, bench_first_stage, bench_matching);
criterion_main!(benches);
