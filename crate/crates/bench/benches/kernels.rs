//! Timings for the kernels every experiment leans on: profile evaluation and
//! its closed-form functionals, parameter inversion, exact counting, the
//! joint PMF with its Gaussian comparison, and the pair-exchange sampler.

use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use younglat::ensemble::{count, sample_mcmc, CanonicalSpec, McmcOptions};
use younglat::inversion::invert;
use younglat::llt::WeightedSumModel;
use younglat::profile::dilog;
use younglat::{MacroState, ProfileParams};

fn profile_kernels(c: &mut Criterion) {
    let params = ProfileParams::new(0.35, 1.4).unwrap();

    c.bench_function("dilog", |b| {
        b.iter(|| dilog(black_box(-0.7)).unwrap());
    });

    c.bench_function("beta_grid_201", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..201 {
                let x = -1.0 + i as f64 / 100.0;
                acc += params.beta(black_box(x));
            }
            acc
        });
    });

    c.bench_function("density_and_moment_closed_form", |b| {
        b.iter(|| (params.density(), params.moment()));
    });
}

fn inversion_kernels(c: &mut Criterion) {
    // a 3 x 3 grid spanning flat, moderate, and steep targets
    let targets: Vec<MacroState> = [0.2, 0.5, 0.8]
        .iter()
        .flat_map(|&rho| {
            [0.0, 0.4, 0.8].iter().map(move |&f| {
                let half_width = rho * (1.0 - rho) / 2.0;
                MacroState::new(rho, f * half_width).unwrap()
            })
        })
        .collect();

    c.bench_function("invert_grid_3x3", |b| {
        b.iter(|| {
            for t in &targets {
                black_box(invert(t, 1e-12).unwrap());
            }
        });
    });
}

fn ensemble_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);

    let spec = CanonicalSpec::new(40, 32, 100).unwrap();
    group.bench_function("count_ell_40", |b| {
        b.iter(|| count(black_box(&spec)).unwrap());
    });

    let chain_spec = CanonicalSpec::new(30, 24, 80).unwrap();
    group.bench_function("mcmc_10_samples_ell_30", |b| {
        b.iter(|| {
            sample_mcmc(
                black_box(&chain_spec),
                10,
                McmcOptions::for_size(30),
                2024,
            )
            .unwrap()
        });
    });

    group.finish();
}

fn llt_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("llt");
    group.sample_size(10);

    let model = WeightedSumModel::from_const(120, 0.5, BTreeSet::new()).unwrap();
    group.bench_function("exact_pmf_n_120", |b| {
        b.iter(|| model.exact_pmf().unwrap());
    });

    let pmf = WeightedSumModel::from_const(80, 0.5, BTreeSet::new())
        .unwrap()
        .exact_pmf()
        .unwrap();
    group.bench_function("sup_error_n_80", |b| {
        b.iter(|| pmf.sup_error().unwrap());
    });

    group.finish();
}

criterion_group!(
    benches,
    profile_kernels,
    inversion_kernels,
    ensemble_kernels,
    llt_kernels
);
criterion_main!(benches);
