//! Critical points of the likelihood on determinantal models.
//!
//! For square tables and corank one (`r = n - 1`, constraint `det P = 0`)
//! the affine Lagrange system
//!
//! ```text
//! u_ij - p_ij (lambda adj(P)_ji + mu) = 0      (stationarity)
//! det P = 0                                    (model)
//! sum p_ij = 1                                 (chart)
//! ```
//!
//! is solved by damped Newton iteration from many complex Gaussian starts.
//! Multi-start carries no completeness certificate, so short counts are
//! reported with a `possibly_incomplete` flag. The rank-one case has the
//! closed-form independence estimator instead.

use crate::error::Error;
use crate::mat::{solve_complex, Mat};
use crate::mle::{
    dedup_points, independence_mle, normalize_max_modulus, pack_point, CriticalSet,
};
use crate::rat::Rat;
use crate::rng::stream;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const DEDUP_RADIUS: f64 = 1e-8;
const NEWTON_ITERS: usize = 120;

/// Multi-start critical points of the likelihood on the determinantal
/// hypersurface of `m x n` tables of rank `<= r`.
///
/// Supports `r = 1` (closed form) and the square hypersurface case
/// `m = n = r + 1`.
pub fn det_critical_points(
    m: usize,
    n: usize,
    r: usize,
    u: &[Vec<u64>],
    n_starts: usize,
    seed: u64,
) -> Result<CriticalSet, Error> {
    if u.len() != m || u.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension("count matrix shape mismatch".into()));
    }
    if r == 1 {
        let p = independence_mle(u)?;
        let point: Vec<Complex64> = p
            .data
            .iter()
            .map(|x| Complex64::new(x.to_f64().unwrap(), 0.0))
            .collect();
        let pn = normalize_max_modulus(&point);
        return Ok(CriticalSet {
            points: vec![pack_point(&pn)],
            residuals: vec![0.0],
            count: 1,
            flagged: 0,
            resultant_degree: None,
            possibly_incomplete: false,
        });
    }
    if m != n || r + 1 != n {
        return Err(Error::Domain(format!(
            "supported models: r = 1, or square m = n = r + 1; got ({m},{n},{r})"
        )));
    }

    let uf: Vec<f64> = u.iter().flatten().map(|&x| x as f64).collect();
    let total: f64 = uf.iter().sum();
    if total == 0.0 {
        return Err(Error::Domain("all counts are zero".into()));
    }
    let scale = 1.0 + total;

    let sols: Vec<(Vec<Complex64>, f64)> = (0..n_starts)
        .into_par_iter()
        .filter_map(|start| {
            let mut rng = stream(seed, start as u64);
            let z0 = random_start(n, total, &mut rng);
            newton_solve(n, &uf, z0, scale)
        })
        .collect();

    // keep only the table part, deduplicate
    let pts: Vec<(Vec<Complex64>, f64)> = sols
        .into_iter()
        .map(|(z, res)| (normalize_max_modulus(&z[..n * n]), res))
        .collect();
    let found = dedup_points(pts, DEDUP_RADIUS);
    let expected = 10; // 3x3 rank-2 reference count
    let count = found.len();
    Ok(CriticalSet {
        points: found.iter().map(|(p, _)| pack_point(p)).collect(),
        residuals: found.iter().map(|(_, r)| *r).collect(),
        count,
        flagged: 0,
        resultant_degree: None,
        possibly_incomplete: n == 3 && count < expected,
    })
}

fn random_start(n: usize, total: f64, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut z: Vec<Complex64> = Vec::with_capacity(n * n + 2);
    fn cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    }
    for _ in 0..n * n {
        z.push(cn(rng));
    }
    let sum: Complex64 = z.iter().sum();
    if sum.norm() > 1e-9 {
        for x in z.iter_mut() {
            *x /= sum;
        }
    }
    z.push(cn(rng) * total); // lambda
    z.push(total * (Complex64::ONE + cn(rng) * 0.2)); // mu
    z
}

/// Cofactor of the `n x n` complex matrix at `(i, j)`: the signed minor,
/// equal to `adj(P)[j][i]` and to `d det / d p_ij`.
fn cofactor(p: &[Complex64], n: usize, i: usize, j: usize) -> Complex64 {
    let mut sub = Vec::with_capacity((n - 1) * (n - 1));
    for r in 0..n {
        if r == i {
            continue;
        }
        for c in 0..n {
            if c == j {
                continue;
            }
            sub.push(p[r * n + c]);
        }
    }
    let d = det_complex(&sub, n - 1);
    if (i + j) % 2 == 0 {
        d
    } else {
        -d
    }
}

fn det_complex(m: &[Complex64], n: usize) -> Complex64 {
    match n {
        0 => Complex64::ONE,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            let mut acc = Complex64::ZERO;
            for c in 0..n {
                let mut sub = Vec::with_capacity((n - 1) * (n - 1));
                for i in 1..n {
                    for j in 0..n {
                        if j != c {
                            sub.push(m[i * n + j]);
                        }
                    }
                }
                let term = m[c] * det_complex(&sub, n - 1);
                acc += if c % 2 == 0 { term } else { -term };
            }
            acc
        }
    }
}

/// Residual vector of the Lagrange system, scaled: stationarity residuals
/// divided by `1 + N`.
fn residuals(z: &[Complex64], n: usize, uf: &[f64], scale: f64) -> Vec<Complex64> {
    let p = &z[..n * n];
    let lambda = z[n * n];
    let mu = z[n * n + 1];
    let mut out = Vec::with_capacity(n * n + 2);
    for i in 0..n {
        for j in 0..n {
            let cof = cofactor(p, n, i, j);
            let e = uf[i * n + j] - p[i * n + j] * (lambda * cof + mu);
            out.push(e / scale);
        }
    }
    out.push(det_complex(p, n));
    let sum: Complex64 = p.iter().sum();
    out.push(sum - Complex64::ONE);
    out
}

fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Damped Newton with a central-difference Jacobian (the system is
/// polynomial, so directional real steps give the complex derivative).
fn newton_solve(
    n: usize,
    uf: &[f64],
    mut z: Vec<Complex64>,
    scale: f64,
) -> Option<(Vec<Complex64>, f64)> {
    let dim = n * n + 2;
    let mut fz = residuals(&z, n, uf, scale);
    let mut err = norm_inf(&fz);
    for _ in 0..NEWTON_ITERS {
        if err <= 1e-13 {
            break;
        }
        // Jacobian by central differences
        let mut jac = Mat::new(dim, dim, vec![Complex64::ZERO; dim * dim]);
        for k in 0..dim {
            let h = 1e-6 * (1.0 + z[k].norm());
            let mut zp = z.clone();
            zp[k] += Complex64::new(h, 0.0);
            let fp = residuals(&zp, n, uf, scale);
            zp[k] -= Complex64::new(2.0 * h, 0.0);
            let fm = residuals(&zp, n, uf, scale);
            for row in 0..dim {
                jac.set(row, k, (fp[row] - fm[row]) / (2.0 * h));
            }
        }
        let rhs: Vec<Complex64> = fz.iter().map(|x| -x).collect();
        let delta = solve_complex(&jac, &rhs, 1e-13)?;
        // backtracking line search
        let mut step = 1.0f64;
        let mut accepted = false;
        for _ in 0..20 {
            let znew: Vec<Complex64> = z
                .iter()
                .zip(&delta)
                .map(|(a, d)| a + d * step)
                .collect();
            let fnew = residuals(&znew, n, uf, scale);
            let enew = norm_inf(&fnew);
            if enew < err * (1.0 - 0.25 * step) || enew < 1e-13 {
                z = znew;
                fz = fnew;
                err = enew;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    if err <= 1e-12 {
        // genericity: table entries away from zero
        if z[..n * n].iter().any(|p| p.norm() < 1e-8) {
            return None;
        }
        Some((z, err))
    } else {
        None
    }
}

/// Stationarity report for a table under a rank constraint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalityReport {
    /// Exact rank of the table.
    pub exact_rank: usize,
    /// The rank constraint checked against.
    pub target_rank: usize,
    pub on_model: bool,
    /// `|det P|` in the square corank-one case, `0` when the exact rank
    /// matches, `+inf` for an irreparable rank mismatch.
    pub constraint_residual: f64,
    /// Euclidean norm of the likelihood gradient projected onto the tangent
    /// space of `{rank constraint, sum p = 1}`.
    pub projected_gradient_norm: f64,
}

impl CriticalityReport {
    pub fn is_critical(&self, tol: f64) -> bool {
        self.on_model && self.projected_gradient_norm <= tol
    }
}

/// Projected-gradient criticality check at an exact rational table.
///
/// When the exact rank of `p` equals `r`, the normal space of the rank
/// variety at `p` is spanned by `a bᵀ` over exact kernel bases `a` (left)
/// and `b` (right); the gradient is projected against those directions plus
/// the all-ones chart normal. An off-model table still gets a report (with
/// `on_model = false`), using whatever normal directions exist.
pub fn check_critical(
    p: &Mat<Rat>,
    u: &[Vec<u64>],
    r: usize,
) -> Result<CriticalityReport, Error> {
    let (m, n) = (p.rows, p.cols);
    if u.len() != m || u.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension("count matrix shape mismatch".into()));
    }
    if p.data.iter().any(|x| !x.is_positive()) {
        return Err(Error::Domain("table must be strictly positive".into()));
    }
    let exact_rank = p.rank_exact();
    let on_model = exact_rank == r;
    let constraint_residual = if on_model {
        0.0
    } else if m == n && r + 1 == n {
        p.det_exact()?.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    };

    // normal directions
    let mut normals: Vec<Vec<f64>> = Vec::new();
    if exact_rank <= r {
        let right = p.kernel_basis(); // P b = 0
        let left = p.transpose().kernel_basis(); // Pᵀ a = 0
        for a in &left {
            for b in &right {
                let mut nrm = vec![0.0; m * n];
                for i in 0..m {
                    for j in 0..n {
                        nrm[i * n + j] = rat_f64(&a[i]) * rat_f64(&b[j]);
                    }
                }
                normals.push(nrm);
            }
        }
    }
    normals.push(vec![1.0; m * n]);

    // gradient of log-likelihood in the sum-one chart
    let total: f64 = u.iter().flatten().map(|&x| x as f64).sum();
    let psum: f64 = p.data.iter().map(rat_f64).sum();
    let mut g: Vec<f64> = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            g.push(u[i][j] as f64 / rat_f64(p.at(i, j)) - total / psum);
        }
    }

    // project out the span of the normals (Gram-Schmidt)
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in normals {
        for b in &basis {
            let d = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let nv = dot(&v, &v).sqrt();
        if nv > 1e-13 {
            for x in v.iter_mut() {
                *x /= nv;
            }
            basis.push(v);
        }
    }
    for b in &basis {
        let d = dot(&g, b);
        for (x, y) in g.iter_mut().zip(b) {
            *x -= d * y;
        }
    }
    Ok(CriticalityReport {
        exact_rank,
        target_rank: r,
        on_model,
        constraint_residual,
        projected_gradient_norm: dot(&g, &g).sqrt(),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rat_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
