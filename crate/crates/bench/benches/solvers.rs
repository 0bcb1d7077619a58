use beats_core::scenarios::{MARKOVIAN_FULL, NONMARKOVIAN_FULL};
use beats_core::{
    amplitudes_from_modes, canonical_paper_params, dde_integrate, find_poles, solve_sector, time_grid, DdeConfig,
    InitialState, SearchWindow, SymmetrySector, DEFAULT_DT,
};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn poles(c: &mut Criterion) {
    let base = canonical_paper_params();
    let mut g = c.benchmark_group("find_poles");
    for sc in [MARKOVIAN_FULL, NONMARKOVIAN_FULL] {
        let p = sc.params(&base);
        let w = SearchWindow::preset(sc.window, &p);
        g.bench_function(sc.name, |b| b.iter(|| find_poles(black_box(&p), SymmetrySector::Symmetric, &w).unwrap()));
    }
    g.finish();
}

fn dde(c: &mut Criterion) {
    let p = NONMARKOVIAN_FULL.params(&canonical_paper_params());
    let cfg = DdeConfig::new(DEFAULT_DT, 8.0);
    let init = InitialState::symmetric();
    c.bench_function("dde_integrate/nonmarkovian_8", |b| b.iter(|| dde_integrate(black_box(&p), &init, &cfg).unwrap()));
}

fn mode_sum(c: &mut Criterion) {
    let p = MARKOVIAN_FULL.params(&canonical_paper_params());
    let exp = solve_sector(&p, SymmetrySector::Symmetric, &SearchWindow::preset(MARKOVIAN_FULL.window, &p)).unwrap();
    let times = time_grid(&p, 8.0, DEFAULT_DT).unwrap();
    c.bench_function("amplitudes_from_modes/markovian_beat", |b| {
        b.iter(|| amplitudes_from_modes(black_box(&exp), &times).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = poles, dde, mode_sum
}
criterion_main!(benches);
