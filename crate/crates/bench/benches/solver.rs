use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion, Throughput};

use lmsurf_bench::{fast_grid, synthetic_map};
use lmsurf_core::analysis;
use lmsurf_core::medium::{surface_impedance, tm_wave_parameters};
use lmsurf_core::solver::Solver;
use lmsurf_core::{channel_layout, rasterize, SurfaceSpec};

fn medium(c: &mut Criterion) {
    let spec = SurfaceSpec::default();
    c.bench_function("surface_impedance", |b| {
        b.iter(|| {
            tm_wave_parameters(&surface_impedance(black_box(&spec), black_box(30e9)).unwrap())
        })
    });
}

fn geometry(c: &mut Criterion) {
    let (cfg, _) = fast_grid();
    let s = cfg.scenario;
    c.bench_function("layout_and_rasterize_fast", |b| {
        b.iter(|| {
            let pattern = channel_layout(&s).unwrap();
            rasterize(&pattern, &s, cfg.dx, &cfg.raster_options()).unwrap()
        })
    });
}

fn solver(c: &mut Criterion) {
    let (cfg, grid) = fast_grid();
    let steps = 20;
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.throughput(Throughput::Elements((grid.nx * grid.ny * steps) as u64));
    group.bench_function("fast_preset_20_steps", |b| {
        b.iter_batched_ref(
            || Solver::new(&grid, &cfg.solver).unwrap(),
            |s| {
                for _ in 0..steps {
                    s.step();
                }
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let (cfg, _) = fast_grid();
    let map = synthetic_map(&cfg);
    let window = analysis::default_smoothing_window(&cfg.scenario).unwrap();
    c.bench_function("isolation_fast", |b| {
        b.iter(|| analysis::isolation(black_box(&map), &cfg.scenario).unwrap())
    });
    c.bench_function("path_loss_fast", |b| {
        b.iter(|| analysis::path_loss_curve(black_box(&map), &cfg.scenario, window).unwrap())
    });
}

criterion_group!(benches, medium, geometry, solver, metrics);
criterion_main!(benches);
