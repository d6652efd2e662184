use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hyperkin::{run_grid, GeomFrame, KinFrame, RunOptions, VariationRecord};
use hyperkin_bench::scenario;

fn point_pipeline(c: &mut Criterion) {
    for name in ["balloon", "conformal-ambient"] {
        let s = scenario(name);
        c.bench_function(&format!("point_{name}"), |b| {
            b.iter(|| {
                let frame = GeomFrame::compute(&s.motion, black_box(&[0.3, 0.4]), 1.0).unwrap();
                let kin = KinFrame::compute(&frame).unwrap();
                VariationRecord::compute(&frame, &kin).unwrap()
            })
        });
    }
}

fn grids(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid");
    group.sample_size(10);
    for name in ["balloon", "hyperbolic-circle"] {
        let s = scenario(name);
        group.bench_function(name, |b| b.iter(|| run_grid(&s, &RunOptions::default()).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, point_pipeline, grids);
criterion_main!(benches);
