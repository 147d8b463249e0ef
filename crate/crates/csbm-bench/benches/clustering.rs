use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use csbm::cluster::{estimate_params, iterate, ClusterConfig};
use csbm::expfam::Family;
use csbm::init::{kmeans_embedding, spectral_embedding};
use csbm::model::generate_seeded;
use csbm_bench::binary_gaussian_spec;

fn bench_pipeline(c: &mut Criterion) {
    let spec = binary_gaussian_spec(500, 9.0, 1.0, 1.0);
    let g2 = Family::gaussian(1.0, 2).unwrap();

    c.bench_function("generate_n500", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            generate_seeded(black_box(&spec), seed).unwrap()
        })
    });

    let ds = generate_seeded(&spec, 7).unwrap();
    c.bench_function("spectral_embedding_n500", |b| {
        b.iter(|| spectral_embedding(black_box(&ds), 2, 0).unwrap())
    });

    let emb = spectral_embedding(&ds, 2, 0).unwrap();
    c.bench_function("kmeans_10_restarts", |b| {
        b.iter(|| kmeans_embedding(black_box(&emb), 0, 10).unwrap())
    });

    let z0 = kmeans_embedding(&emb, 0, 10).unwrap();
    let cfg = ClusterConfig::default();
    c.bench_function("estimate_params_n500", |b| {
        b.iter(|| estimate_params(black_box(&ds), &z0, 2, Family::Bernoulli, g2, &cfg).unwrap())
    });
    c.bench_function("iterate_n500", |b| {
        b.iter(|| iterate(black_box(&ds), &z0, 2, Family::Bernoulli, g2, &cfg).unwrap())
    });
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
