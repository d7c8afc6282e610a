use std::hint::black_box;

use criterion::{Criterion, criterion_group, criterion_main};
use zeno_trap::analysis::{DEFAULT_PROMINENCE, find_peaks};
use zeno_trap::{SpectralDensityParams, SystemParams, TimeGrid, WindowId, build_liouvillian};
use zeno_trap_bench::pipeline;

fn generator(c: &mut Criterion) {
    let params = SystemParams::default();
    let sd = SpectralDensityParams::default();
    c.bench_function("build_liouvillian", |b| b.iter(|| build_liouvillian(black_box(&params), &sd).unwrap()));
}

fn propagation(c: &mut Criterion) {
    let p = pipeline(100.0);
    let grid = TimeGrid::new(0.0, 100.0, 1001).unwrap();
    let mut g = c.benchmark_group("propagate_1001");
    g.bench_function("eigen", |b| {
        b.iter(|| p.liouvillian.propagate_eigen(&p.params.initial_state, black_box(&grid)).unwrap())
    });
    g.sample_size(20);
    g.bench_function("ode", |b| {
        b.iter(|| p.liouvillian.propagate_ode(&p.params.initial_state, black_box(&grid)).unwrap())
    });
    g.finish();
}

fn spectra(c: &mut Criterion) {
    let p = pipeline(100.0);
    let nu = 0.01;
    let window = p.window(WindowId::Pe, nu, 401);
    let mut g = c.benchmark_group("spectra");
    g.sample_size(10);
    g.bench_function("integrated_pe_401x3001", |b| {
        b.iter(|| p.integrated_spectra(nu, black_box(300.0), &[window]).unwrap())
    });
    let grid = TimeGrid::new(0.0, 50.0, 501).unwrap();
    let eg = p.window(WindowId::Eg, 0.5, 401);
    g.bench_function("time_dependent_eg_401x501", |b| {
        b.iter(|| p.time_dependent_spectra(0.5, black_box(&grid), &[eg]).unwrap())
    });
    let run = p.integrated_spectra(nu, 300.0, &[window]).unwrap();
    let s = &run.spectra[0];
    g.bench_function("find_peaks_401", |b| {
        b.iter(|| find_peaks(black_box(&s.domega), &s.values, DEFAULT_PROMINENCE).unwrap())
    });
    g.finish();
}

criterion_group!(benches, generator, propagation, spectra);
criterion_main!(benches);
