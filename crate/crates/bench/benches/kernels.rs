//! Criterion benchmarks for the hot kernels: exact determinants, the
//! symbolic Strassen expansion and its numeric evaluation, prime-field
//! rank, plane-curve elimination and one EM start.

use algstat_core::fp::{rank_mod_p, Fp, FpMat};
use algstat_core::invariants::{strassen_coord_value, strassen_expand, StrassenCoord};
use algstat_core::mle::{em_low_rank, ml_degree_plane, CountVector, PlaneCurve};
use algstat_core::rat::frac;
use algstat_core::tensor::random_low_rank;
use algstat_core::Mat;
use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn bench_det_exact(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = Mat::new(
        6,
        6,
        (0..36)
            .map(|_| frac(rng.random_range(-20..=20), rng.random_range(1..=9)))
            .collect(),
    );
    c.bench_function("det_exact_6x6_rational", |b| {
        b.iter(|| black_box(&m).det_exact().unwrap())
    });
}

fn bench_strassen(c: &mut Criterion) {
    // build once so the cache cost is excluded from the evaluation bench
    let poly = strassen_expand();
    assert_eq!(poly.num_terms(), 9216);
    let (table, _) = random_low_rank((4, 4, 4), 5, 10, 7);
    let coord = StrassenCoord { axis: 1, sel: [[0, 1, 2], [0, 1, 2], [0, 1, 2]] };
    c.bench_function("strassen_value_exact", |b| {
        b.iter(|| strassen_coord_value(black_box(&table), black_box(&coord)).unwrap())
    });
}

fn bench_rank_mod_p(c: &mut Criterion) {
    let fp = Fp::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = FpMat::random(&fp, 300, 300, &mut rng);
    c.bench_function("rank_mod_p_300x300", |b| {
        b.iter(|| rank_mod_p(&fp, black_box(m.clone())))
    });
}

fn bench_plane_ml_degree(c: &mut Criterion) {
    let curve = PlaneCurve::parse("2*p0^2 + 3*p0*p1 - p1^2 + 5*p1*p2 + 7*p2^2 - p0*p2").unwrap();
    let u = CountVector::new(vec![3, 5, 7]);
    c.bench_function("ml_degree_plane_quadric", |b| {
        b.iter(|| ml_degree_plane(black_box(&curve), black_box(&u), 7).unwrap())
    });
}

fn bench_em(c: &mut Criterion) {
    let u: Vec<Vec<u64>> = (0..4)
        .map(|i| (0..4).map(|j| if i == j { 4 } else { 2 }).collect())
        .collect();
    c.bench_function("em_low_rank_4x4_r2_one_start", |b| {
        b.iter(|| em_low_rank(black_box(&u), 2, 1, 10_000, 1e-12, 5, false).unwrap())
    });
}

criterion_group!(
    benches,
    bench_det_exact,
    bench_strassen,
    bench_rank_mod_p,
    bench_plane_ml_degree,
    bench_em
);
criterion_main!(benches);
