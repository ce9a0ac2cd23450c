use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qsot_core::interferometer::temporal_paths;
use qsot_core::linops::random_unitary;
use qsot_core::procmat::ordered_process_matrix;
use qsot_core::qsot::star;
use qsot_core::timesym::{compass_recover_left, weyl_pair_basis, CompassSetup};
use qsot_core::tomography::{reconstruct, QsotOracle};
use qsot_core::{DensityOperator, Dynamics, ProbeConfig, ProductKind, QuantumChannel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn products(c: &mut Criterion) {
    let mut group = c.benchmark_group("star");
    for d in [2usize, 3, 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        let rho = DensityOperator::random(d, &mut rng);
        let e = QuantumChannel::random(d, d, 2, &mut rng);
        for kind in ProductKind::ALL {
            group.bench_with_input(BenchmarkId::new(kind.to_string(), d), &d, |b, _| {
                b.iter(|| star(kind, black_box(&e), black_box(&rho)).unwrap())
            });
        }
    }
    group.finish();
}

fn interferometry(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut group = c.benchmark_group("temporal_paths");
    for d in [2usize, 3] {
        let dy = Dynamics::random(d, d, 2, &mut rng);
        let (v, w) = (random_unitary(d, &mut rng), random_unitary(d, &mut rng));
        let probe = ProbeConfig::max_visibility();
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| temporal_paths(black_box(&dy), &v, &w, &probe).unwrap())
        });
    }
    group.finish();
}

fn reconstruction(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dy = Dynamics::random(2, 2, 2, &mut rng);
    let q = star(ProductKind::Left, dy.channel(), dy.initial()).unwrap();
    c.bench_function("reconstruct/2x2", |b| b.iter(|| reconstruct(&QsotOracle(q.clone()), &[2, 2]).unwrap()));

    let s = CompassSetup::new(dy.clone());
    let basis = weyl_pair_basis(2, 2);
    c.bench_function("compass_recover_left/2x2", |b| b.iter(|| compass_recover_left(&s, &basis).unwrap()));

    c.bench_function("ordered_process_matrix/2x2", |b| b.iter(|| ordered_process_matrix(black_box(&dy)).unwrap()));
}

criterion_group!(benches, products, interferometry, reconstruction);
criterion_main!(benches);
