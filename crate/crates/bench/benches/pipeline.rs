use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graphsig::analysis::{density_overlap_1d, mixture_demo, OverlapAggregation};
use graphsig::classify::{build_wsa_classifier, optimize_alpha_grid, sca_deflection, sca_moments, wsa_moments};
use graphsig::synthgraph::{generate_dcsbm, DegreeSpec};
use graphsig::{sca_aggregate, AlphaGrid, DegreePriors, NeighborhoodSampler, StreamSeed};
use graphsig_bench::{simplex_model, transition};

fn moments(c: &mut Criterion) {
    let model = simplex_model(4, 20, 4.0);
    let p = transition(3, 0.7);
    let priors = DegreePriors::from_model(&model);
    c.bench_function("wsa_moments_and_classifier_f20_m4", |b| {
        b.iter(|| build_wsa_classifier(&wsa_moments(&model, &p, black_box(0.3), 8, &priors).unwrap()).unwrap())
    });
    c.bench_function("sca_deflection_f20_m4", |b| {
        b.iter(|| sca_deflection(&sca_moments(&model, &p, black_box(8), &priors).unwrap()).unwrap())
    });
    c.bench_function("alpha_grid_401_points", |b| {
        b.iter(|| optimize_alpha_grid(&model, &p, black_box(4), &AlphaGrid::default(), &priors).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let model = simplex_model(4, 20, 4.0);
    let p = transition(2, 0.6);
    let mut group = c.benchmark_group("sample_and_aggregate_1000");
    for d in [1usize, 8] {
        let sampler = NeighborhoodSampler::new(&model, &p, &[d], StreamSeed::new(1)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &sampler, |b, s| {
            b.iter(|| {
                let mut acc = 0.0;
                for t in 0..1000 {
                    let n = s.sample(t);
                    acc += sca_aggregate(&n.focal_feature, &n.neighbor_features, false).unwrap().values[0];
                }
                acc
            })
        });
    }
    group.finish();
}

fn graphs(c: &mut Criterion) {
    let model = simplex_model(2, 2, 4.0);
    let p = transition(1, 0.8);
    let mut group = c.benchmark_group("dcsbm");
    group.sample_size(10);
    group.bench_function("n10000_degree10", |b| {
        b.iter(|| generate_dcsbm(&model, &p, &DegreeSpec::Constant(10.0), 10_000, black_box(3)).unwrap())
    });
    group.finish();
}

fn overlap(c: &mut Criterion) {
    let (a, b2) = mixture_demo();
    c.bench_function("overlap_pairwise_mean_2e14", |b| {
        b.iter(|| density_overlap_1d(&a, &b2, OverlapAggregation::PairwiseMean, [0.5, 0.5], None).unwrap())
    });
}

criterion_group!(benches, moments, sampling, graphs, overlap);
criterion_main!(benches);
