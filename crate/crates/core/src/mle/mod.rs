//! Likelihood machinery: the projective log-likelihood, closed-form
//! estimators, critical points of plane curves and determinantal models,
//! and a multi-start latent-class EM loop.
//!
//! The likelihood of data `u` at a point `p` of the probability simplex is
//! `prod p_i^{u_i} / (sum p_i)^N`; its logarithm is used everywhere. It is
//! homogeneous of degree zero in `p`, so all critical-point counts are
//! projective.

pub mod detrank;
pub mod em;
pub mod plane;

pub use detrank::{check_critical, det_critical_points, CriticalityReport};
pub use em::{em_low_rank, EMResult};
pub use plane::{ml_degree_plane, plane_critical_system, PlaneCurve};

use crate::error::Error;
use crate::mat::Mat;
use crate::rat::Rat;
use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Non-negative observation counts `(u_0, ..., u_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    pub u: Vec<u64>,
}

impl CountVector {
    pub fn new(u: Vec<u64>) -> Self {
        CountVector { u }
    }

    pub fn total(&self) -> u64 {
        self.u.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// `sum u_i log p_i - N log(sum p_i)`; scale-invariant in `p`.
pub fn log_likelihood(p: &[f64], u: &CountVector) -> Result<f64, Error> {
    if p.len() != u.len() {
        return Err(Error::Dimension(format!(
            "{} probabilities vs {} counts",
            p.len(),
            u.len()
        )));
    }
    if u.total() == 0 {
        return Err(Error::Domain("all counts are zero".into()));
    }
    let mut acc = 0.0;
    let mut total = 0.0;
    for (&pi, &ui) in p.iter().zip(&u.u) {
        if pi <= 0.0 {
            return Err(Error::Domain(format!("nonpositive probability {pi}")));
        }
        acc += ui as f64 * pi.ln();
        total += pi;
    }
    Ok(acc - u.total() as f64 * total.ln())
}

/// Gradient of [`log_likelihood`] at `p`: `u_i/p_i - N/sum(p)`.
pub fn log_likelihood_grad(p: &[f64], u: &CountVector) -> Result<Vec<f64>, Error> {
    if p.iter().any(|&x| x <= 0.0) {
        return Err(Error::Domain("nonpositive probability".into()));
    }
    let total: f64 = p.iter().sum();
    let n = u.total() as f64;
    Ok(p.iter().zip(&u.u).map(|(&pi, &ui)| ui as f64 / pi - n / total).collect())
}

/// Closed-form maximum of the likelihood on the conic `p1^2 = 4 p0 p2`:
/// `((2u0+u1)^2 : 2(2u0+u1)(u1+2u2) : (u1+2u2)^2)`, normalised to sum one.
pub fn hardy_weinberg_mle(u0: u64, u1: u64, u2: u64) -> Result<[Rat; 3], Error> {
    if u0 + u1 + u2 == 0 {
        return Err(Error::Domain("all counts are zero".into()));
    }
    let a = Rat::from_integer(BigInt::from(2 * u0 + u1));
    let b = Rat::from_integer(BigInt::from(u1 + 2 * u2));
    let two_n = &a + &b; // = 2N
    let denom = &two_n * &two_n;
    Ok([&a * &a / &denom, Rat::from_integer(2.into()) * &a * &b / &denom, &b * &b / &denom])
}

/// Rank-one maximum-likelihood table for a two-way contingency table:
/// `p[i][j] = rowsum_i * colsum_j / N^2`, exact.
pub fn independence_mle(u: &[Vec<u64>]) -> Result<Mat<Rat>, Error> {
    let m = u.len();
    let n = u.first().map_or(0, |r| r.len());
    if m == 0 || n == 0 || u.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("counts must form a rectangular matrix".into()));
    }
    let total: u64 = u.iter().flatten().sum();
    if total == 0 {
        return Err(Error::Domain("all counts are zero".into()));
    }
    let rows: Vec<u64> = u.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..n).map(|j| u.iter().map(|r| r[j]).sum()).collect();
    let nn = Rat::from_integer(BigInt::from(total)) * Rat::from_integer(BigInt::from(total));
    let mut out = Mat::zero(m, n);
    for i in 0..m {
        for j in 0..n {
            let v = Rat::from_integer(BigInt::from(rows[i] * cols[j])) / &nn;
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Deduplicated complex critical points of a likelihood restriction.
///
/// Points are stored normalised so the largest-modulus coordinate equals
/// one; `residuals` holds the per-point maximum scaled equation residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalSet {
    pub points: Vec<Vec<[f64; 2]>>,
    pub residuals: Vec<f64>,
    pub count: usize,
    /// Points that sat too close to the excluded locus to classify.
    pub flagged: usize,
    /// Degree of the eliminant, when one was computed.
    pub resultant_degree: Option<usize>,
    pub possibly_incomplete: bool,
}

impl CriticalSet {
    pub fn point(&self, idx: usize) -> Vec<Complex64> {
        self.points[idx].iter().map(|&[re, im]| Complex64::new(re, im)).collect()
    }
}

pub(crate) fn pack_point(p: &[Complex64]) -> Vec<[f64; 2]> {
    p.iter().map(|z| [z.re, z.im]).collect()
}

/// Normalise so the largest-modulus coordinate is exactly 1 (canonical
/// projective representative; stable for deduplication).
pub(crate) fn normalize_max_modulus(p: &[Complex64]) -> Vec<Complex64> {
    let mut best = 0usize;
    let mut best_norm = 0.0f64;
    for (i, z) in p.iter().enumerate() {
        let n = z.norm_sqr();
        if n > best_norm * (1.0 + 1e-12) {
            best = i;
            best_norm = n;
        }
    }
    let pivot = p[best];
    p.iter().map(|z| z / pivot).collect()
}

pub(crate) fn points_close(a: &[Complex64], b: &[Complex64], radius: f64) -> bool {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt() <= radius
}

/// Deterministic ordering and deduplication (radius in normalised
/// coordinates, keeping the smaller residual).
pub(crate) fn dedup_points(
    mut pts: Vec<(Vec<Complex64>, f64)>,
    radius: f64,
) -> Vec<(Vec<Complex64>, f64)> {
    pts.sort_by(|a, b| {
        a.1.total_cmp(&b.1).then_with(|| {
            for (x, y) in a.0.iter().zip(&b.0) {
                let c = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    let mut out: Vec<(Vec<Complex64>, f64)> = Vec::new();
    for (p, r) in pts {
        if !out.iter().any(|(q, _)| points_close(&p, q, radius)) {
            out.push((p, r));
        }
    }
    // final order: lexicographic for reproducible reports
    out.sort_by(|a, b| {
        for (x, y) in a.0.iter().zip(&b.0) {
            let c = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if c != std::cmp::Ordering::Equal {
                return c;
            }
        }
        std::cmp::Ordering::Equal
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, rat};
    use num_traits::Zero;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn log_likelihood_examples() {
        let u = CountVector::new(vec![1, 1]);
        let v = log_likelihood(&[1.0, 1.0], &u).unwrap();
        assert!((v - (-2.0 * 2.0f64.ln())).abs() < 1e-14);
        // homogeneity
        let u = CountVector::new(vec![3, 5, 7]);
        let p = [0.2, 0.5, 0.3];
        let p7: Vec<f64> = p.iter().map(|x| 7.0 * x).collect();
        let a = log_likelihood(&p, &u).unwrap();
        let b = log_likelihood(&p7, &u).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(log_likelihood(&[0.0, 1.0, 1.0], &u).is_err());
    }

    #[test]
    fn data_point_is_global_maximum() {
        let mut rng = stream(3, 0);
        for _ in 0..10 {
            let u = CountVector::new((0..4).map(|_| rng.random_range(1..30)).collect());
            let pu: Vec<f64> = u.u.iter().map(|&x| x as f64).collect();
            let at_u = log_likelihood(&pu, &u).unwrap();
            for _ in 0..100 {
                let q: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..1.0)).collect();
                assert!(log_likelihood(&q, &u).unwrap() <= at_u + 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = stream(4, 0);
        for _ in 0..20 {
            let u = CountVector::new((0..5).map(|_| rng.random_range(1..20)).collect());
            let p: Vec<f64> = (0..5).map(|_| rng.random_range(0.05..1.0)).collect();
            let g = log_likelihood_grad(&p, &u).unwrap();
            for i in 0..5 {
                let h = 1e-6;
                let mut pp = p.clone();
                pp[i] += h;
                let fp = log_likelihood(&pp, &u).unwrap();
                pp[i] -= 2.0 * h;
                let fm = log_likelihood(&pp, &u).unwrap();
                let fd = (fp - fm) / (2.0 * h);
                assert!(
                    (g[i] - fd).abs() <= 1e-6 * (1.0 + g[i].abs()),
                    "component {i}: analytic {} vs fd {}",
                    g[i],
                    fd
                );
            }
        }
    }

    #[test]
    fn hardy_weinberg_closed_form() {
        let p = hardy_weinberg_mle(1, 2, 1).unwrap();
        assert_eq!(p, [frac(1, 4), frac(1, 2), frac(1, 4)]);
        let p = hardy_weinberg_mle(1, 0, 0).unwrap();
        assert_eq!(p, [rat(1), rat(0), rat(0)]);
        assert!(hardy_weinberg_mle(0, 0, 0).is_err());
    }

    #[test]
    fn hardy_weinberg_lies_on_curve_and_sums_to_one() {
        let mut rng = stream(5, 0);
        for _ in 0..50 {
            let (u0, u1, u2) =
                (rng.random_range(0..50), rng.random_range(0..50), rng.random_range(1..50));
            let p = hardy_weinberg_mle(u0, u1, u2).unwrap();
            let sum = &p[0] + &p[1] + &p[2];
            assert_eq!(sum, rat(1));
            // p1^2 = 4 p0 p2, exactly
            assert_eq!(&p[1] * &p[1], rat(4) * &p[0] * &p[2]);
        }
    }

    #[test]
    fn independence_closed_form() {
        let all_ones = vec![vec![1u64; 3]; 3];
        let p = independence_mle(&all_ones).unwrap();
        assert!(p.data.iter().all(|x| *x == frac(1, 9)));
        let diag = vec![vec![1, 0], vec![0, 1]];
        let p = independence_mle(&diag).unwrap();
        assert!(p.data.iter().all(|x| *x == frac(1, 4)));
        assert!(independence_mle(&vec![vec![0u64; 2]; 2]).is_err());
    }

    #[test]
    fn independence_minors_vanish_and_beats_in_model_points() {
        let mut rng = stream(6, 0);
        let u: Vec<Vec<u64>> =
            (0..3).map(|_| (0..3).map(|_| rng.random_range(1..20)).collect()).collect();
        let p = independence_mle(&u).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in i + 1..3 {
                    for l in j + 1..3 {
                        let det = p.at(i, j) * p.at(k, l) - p.at(i, l) * p.at(k, j);
                        assert!(det.is_zero());
                    }
                }
            }
        }
        // beats random rank-one competitors
        use num_traits::ToPrimitive;
        let uv = CountVector::new(u.iter().flatten().copied().collect());
        let pf: Vec<f64> = p.data.iter().map(|x| x.to_f64().unwrap()).collect();
        let best = log_likelihood(&pf, &uv).unwrap();
        for _ in 0..100 {
            let a: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
            let b: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
            let q: Vec<f64> = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| a[i] * b[j])
                .collect();
            assert!(log_likelihood(&q, &uv).unwrap() <= best + 1e-10);
        }
    }

    #[test]
    fn normalization_and_dedup() {
        let p = vec![Complex64::new(0.0, 2.0), Complex64::new(1.0, 0.0)];
        let n = normalize_max_modulus(&p);
        assert!((n[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let a = vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5)];
        let b = vec![Complex64::new(1.0, 1e-12), Complex64::new(0.5, 0.5)];
        let out = dedup_points(vec![(a, 1e-12), (b, 2e-12)], 1e-8);
        assert_eq!(out.len(), 1);
    }
}
