use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use groundstate::cc::{classify, synthetic, Family, DEFAULT_RADII};
use groundstate::config::CcThresholds;
use groundstate::fields::random_smooth_field;
use groundstate::rearrange::decreasing_rearrangement;
use groundstate::solvers::{maximize_w, minimize_f, rescale_to_unit_k, shoot_amplitude};
use groundstate::spectral::{assemble_la, lowest_eigs};
use groundstate::{ModelSpace, ProblemParams, RadialGrid, SolverConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn descent(c: &mut Criterion) {
    let mut g = c.benchmark_group("minimize_f");
    g.sample_size(10);
    for m in [1000usize, 4000] {
        let cfg = SolverConfig::default().with_m(m);
        for (name, space) in [("euclidean3", ModelSpace::euclidean(3).unwrap()), ("hyperbolic2", ModelSpace::hyperbolic(2).unwrap())] {
            let params = ProblemParams::new(space.n, 3.0, 1.0, 1.0);
            g.bench_with_input(BenchmarkId::new(name, m), &m, |b, _| {
                b.iter(|| minimize_f(black_box(&space), &params, &cfg).unwrap())
            });
        }
    }
    g.finish();
}

fn weinstein(c: &mut Criterion) {
    let mut g = c.benchmark_group("maximize_w");
    g.sample_size(10);
    let cfg = SolverConfig::default().with_m(2000);
    let space = ModelSpace::euclidean(2).unwrap();
    let params = ProblemParams::new(2, 3.0, 1.0, 1.0);
    g.bench_function("euclidean2", |b| b.iter(|| maximize_w(black_box(&space), &params, &cfg).unwrap()));
    g.finish();
}

fn shooting(c: &mut Criterion) {
    c.bench_function("shoot_amplitude/n3", |b| b.iter(|| shoot_amplitude(black_box(3), 1.0, 3.0).unwrap()));
}

fn spectrum(c: &mut Criterion) {
    let params = ProblemParams::new(3, 3.0, 1.0, 1.0);
    let mut g = c.benchmark_group("lowest_eigs");
    for m in [4000usize, 16000] {
        let cfg = SolverConfig::default().with_m(m).with_r_max(20.0);
        let rep = minimize_f(&ModelSpace::euclidean(3).unwrap(), &params, &cfg).unwrap();
        let (u, _) = rescale_to_unit_k(&rep).unwrap();
        let op = assemble_la(&u, &params, 3.0, 1).unwrap();
        g.bench_with_input(BenchmarkId::new("l1_k2", m), &m, |b, _| b.iter(|| lowest_eigs(black_box(&op), 2).unwrap()));
    }
    g.finish();
}

fn rearrangement(c: &mut Criterion) {
    let grid = RadialGrid::new(ModelSpace::euclidean(2).unwrap(), Some(12.0), 4000).unwrap();
    let u = random_smooth_field(&grid, &mut ChaCha8Rng::seed_from_u64(1));
    c.bench_function("rearrangement/m4000", |b| b.iter(|| decreasing_rearrangement(black_box(&u)).unwrap()));
}

fn trichotomy(c: &mut Criterion) {
    let mut g = c.benchmark_group("classify");
    g.sample_size(10);
    for family in [Family::FixedBump, Family::Spreading, Family::SeparatingPair] {
        let seq = synthetic(family, 12).unwrap();
        g.bench_function(format!("{family:?}"), |b| {
            b.iter(|| classify(black_box(&seq), &DEFAULT_RADII, &CcThresholds::default()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, descent, weinstein, shooting, spectrum, rearrangement, trichotomy);
criterion_main!(benches);
