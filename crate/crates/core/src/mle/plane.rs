//! Maximum-likelihood degrees of plane curves.
//!
//! For a homogeneous curve `F(p0,p1,p2) = 0` and counts `u`, critical points
//! of the likelihood restriction solve `F = G = 0` where `G` is the
//! determinant of the 3×3 matrix with columns `u`, `p`, `p ∘ grad F`
//! (degree `d+1`). The solver applies a seeded random rational projective
//! change of coordinates, dehomogenises, eliminates one variable by an
//! exact resultant, takes its squarefree part, finds roots numerically,
//! back-substitutes and polishes, then filters against the excluded locus
//! `p0 p1 p2 (p0+p1+p2) = 0`.

use crate::error::Error;
use crate::mat::Mat;
use crate::mle::{
    dedup_points, normalize_max_modulus, pack_point, CountVector, CriticalSet,
};
use crate::mpoly::{parse_mpoly, resultant, squarefree_part, to_dense_univariate, MPoly};
use crate::rat::{rat, Rat};
use crate::rng::stream;
use crate::upoly::CPoly;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;

/// Admissibility filter: distances below this (after max-modulus
/// normalisation) count as lying on the excluded locus.
const EXCLUDED_TOL: f64 = 1e-8;
/// Ambiguity band above the filter: candidates in it are flagged.
const FLAG_TOL: f64 = 1e-7;
/// Scaled residual accepted for a polished solution.
const RESIDUAL_TOL: f64 = 1e-10;
/// Deduplication radius in normalised coordinates.
const DEDUP_RADIUS: f64 = 1e-8;

/// A nonzero homogeneous curve in `p0, p1, p2`.
#[derive(Debug, Clone)]
pub struct PlaneCurve {
    f: MPoly,
    degree: u32,
}

impl PlaneCurve {
    pub fn new(f: MPoly) -> Result<Self, Error> {
        if f.nvars() != 3 {
            return Err(Error::Dimension("plane curves live in p0, p1, p2".into()));
        }
        if f.is_zero() {
            return Err(Error::Domain("zero polynomial is not a curve".into()));
        }
        let Some(degree) = f.homogeneous_degree() else {
            return Err(Error::Domain("curve polynomial must be homogeneous".into()));
        };
        if degree == 0 {
            return Err(Error::Domain("constant polynomial is not a curve".into()));
        }
        Ok(PlaneCurve { f, degree })
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        Self::new(parse_mpoly(s, &["p0", "p1", "p2"])?)
    }

    pub fn poly(&self) -> &MPoly {
        &self.f
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Transversality to the arrangement `p0 p1 p2 (p0+p1+p2) = 0`: the
    /// curve misses the six pairwise intersection points of the arrangement
    /// lines and is nowhere tangent to them. Exactly under this condition
    /// the full count of critical points stays off the excluded locus (a
    /// curve through a special point, or tangent to a line, parks one
    /// solution of the critical system there — by Euler's relation the
    /// determinantal equation inherits the zero).
    pub fn transverse_to_arrangement(&self) -> bool {
        let special: [[i64; 3]; 6] = [
            [1, 0, 0],
            [0, 1, 0],
            [0, 0, 1],
            [0, 1, -1],
            [1, 0, -1],
            [1, -1, 0],
        ];
        for q in special {
            let point: Vec<Rat> = q.iter().map(|&x| rat(x)).collect();
            if self.f.eval_rat(&point).is_zero() {
                return false;
            }
        }
        // restrictions to the four lines as univariate polynomials in a
        // chart plus a degree-drop check for the point at infinity
        let restrictions: Vec<MPoly> = vec![
            self.f.substitute_value(0, &Rat::zero()),
            self.f.substitute_value(1, &Rat::zero()),
            self.f.substitute_value(2, &Rat::zero()),
            sum_line_restriction(&self.f),
        ];
        for g in &restrictions {
            // pick the surviving variable pair and dehomogenise the later one
            let vars = g.used_vars();
            if vars.len() < 2 {
                return false; // the line is a component or meets in one point
            }
            let (s, t) = (vars[0], vars[1]);
            let affine = g.substitute_value(t, &Rat::one());
            let d = self.degree as usize;
            let deg_s = affine.degree_in(s) as usize;
            if d - deg_s >= 2 {
                return false; // multiple root at the chart's infinity
            }
            match squarefree_part(&affine) {
                Ok(sf) => {
                    if sf.degree_in(s) as usize != deg_s {
                        return false; // repeated finite root: tangency
                    }
                }
                Err(_) => return false,
            }
        }
        true
    }
}

/// Restriction of a ternary form to the line `p0 + p1 + p2 = 0` via
/// `p2 <- -p0 - p1`.
fn sum_line_restriction(f: &MPoly) -> MPoly {
    let mut t = Mat::identity(3);
    t.set(2, 0, rat(-1));
    t.set(2, 1, rat(-1));
    t.set(2, 2, Rat::zero());
    f.substitute_linear(&t)
}

/// The critical system `{F, G}` with
/// `G = det [[u0, p0, p0*dF/dp0], [u1, p1, p1*dF/dp1], [u2, p2, p2*dF/dp2]]`,
/// of degree `d + 1`.
pub fn plane_critical_system(curve: &PlaneCurve, u: &CountVector) -> Result<(MPoly, MPoly), Error> {
    if u.len() != 3 {
        return Err(Error::Dimension("plane curves need three counts".into()));
    }
    let f = &curve.f;
    let mut rows = Vec::with_capacity(3);
    for i in 0..3 {
        let ui = MPoly::constant(3, rat(u.u[i] as i64));
        let pi = MPoly::var(3, i);
        let pdf = pi.mul(&f.derivative(i));
        rows.push(vec![ui, pi, pdf]);
    }
    let g = Mat::from_rows(rows).det_cofactor()?;
    Ok((f.clone(), g))
}

/// Result of [`ml_degree_plane`]: the admissible critical points plus the
/// recorded coordinate change.
#[derive(Debug, Clone)]
pub struct PlaneMlResult {
    pub critical: CriticalSet,
    /// The seeded projective change of coordinates used for elimination.
    pub transform: Mat<Rat>,
}

impl PlaneMlResult {
    pub fn ml_degree(&self) -> usize {
        self.critical.count
    }
}

/// Count the complex critical points of the likelihood on a plane curve.
///
/// A single elimination chart can lose candidates when the seeded
/// coordinate change is ill-conditioned, so the solver runs three charts,
/// re-polishes every candidate in the original coordinates and counts the
/// deduplicated union. Chart-level convergence failures are tolerated as
/// long as one chart succeeds.
pub fn ml_degree_plane(
    curve: &PlaneCurve,
    u: &CountVector,
    seed: u64,
) -> Result<PlaneMlResult, Error> {
    let (f, g) = plane_critical_system(curve, u)?;
    let mut all: Vec<(Vec<Complex64>, f64)> = Vec::new();
    let mut flagged_pts: Vec<(Vec<Complex64>, f64)> = Vec::new();
    let mut first_ok: Option<(usize, Mat<Rat>)> = None;
    let mut last_err = None;
    for attempt in 0..3 {
        match ml_degree_chart(&f, &g, seed, attempt) {
            Ok(chart) => {
                all.extend(chart.found);
                flagged_pts.extend(chart.flagged);
                if first_ok.is_none() {
                    first_ok = Some((chart.resultant_degree, chart.transform));
                }
            }
            Err(e @ Error::Convergence { .. }) | Err(e @ Error::Degenerate(_)) => {
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    let Some((resultant_degree, transform)) = first_ok else {
        return Err(
            last_err.unwrap_or_else(|| Error::Degenerate("no usable coordinate change".into())),
        );
    };
    let found = dedup_points(all, DEDUP_RADIUS);
    let flagged = dedup_points(flagged_pts, DEDUP_RADIUS).len();
    let count = found.len();
    Ok(PlaneMlResult {
        critical: CriticalSet {
            points: found.iter().map(|(p, _)| pack_point(p)).collect(),
            residuals: found.iter().map(|(_, r)| *r).collect(),
            count,
            flagged,
            resultant_degree: Some(resultant_degree),
            possibly_incomplete: false,
        },
        transform,
    })
}

struct ChartOutcome {
    found: Vec<(Vec<Complex64>, f64)>,
    flagged: Vec<(Vec<Complex64>, f64)>,
    resultant_degree: usize,
    transform: Mat<Rat>,
}

fn ml_degree_chart(
    f: &MPoly,
    g: &MPoly,
    seed: u64,
    attempt: u64,
) -> Result<ChartOutcome, Error> {
    let mut rng = stream(seed, attempt);

    // seeded random projective coordinate change q = T p, recorded
    let (t, t_inv) = loop {
        let cand = Mat::new(
            3,
            3,
            (0..9).map(|_| rat(rng.random_range(-6i64..=6))).collect::<Vec<_>>(),
        );
        let det = cand.det_exact()?;
        if !det.is_zero() {
            let adj = cand.adjugate()?;
            let inv = adj.map(|x| x / &det);
            break (cand, inv);
        }
    };

    // substitute p = T^{-1} q and dehomogenise at q2 = 1
    let f_q = f.substitute_linear(&t_inv).substitute_value(2, &Rat::from_integer(1.into()));
    let g_q = g.substitute_linear(&t_inv).substitute_value(2, &Rat::from_integer(1.into()));
    if f_q.degree_in(0) == 0 || g_q.degree_in(0) == 0 {
        return Err(Error::Degenerate("curve lost the eliminated variable; reseed".into()));
    }

    let mut g_q = g_q;
    let mut res = resultant(&f_q, &g_q, 0)?;
    if res.is_zero() {
        // F divides G when the curve has a critical component; strip it once
        // (its points land on the excluded locus or are degenerate anyway)
        match g_q.exact_div(&f_q) {
            Ok(reduced) if reduced.degree_in(0) > 0 => {
                g_q = reduced;
                res = resultant(&f_q, &g_q, 0)?;
            }
            _ => {
                return Err(Error::Degenerate(
                    "identically zero resultant: shared component".into(),
                ))
            }
        }
    }
    if res.is_zero() {
        return Err(Error::Degenerate("identically zero resultant: shared component".into()));
    }
    let (_, res_coeffs) = to_dense_univariate(&res)?;
    let resultant_degree = res_coeffs.len().saturating_sub(1);
    let sf = squarefree_part(&res)?;
    let (sf_var, sf_coeffs) = to_dense_univariate(&sf)?;
    if sf_var.is_none() {
        // constant squarefree part: no roots, no critical points off infinity
        return Ok(ChartOutcome {
            found: vec![],
            flagged: vec![],
            resultant_degree,
            transform: t,
        });
    }
    let ys = CPoly::from_rat_coeffs(&sf_coeffs).roots(1e-9)?;

    // scale for residual tests on the original pair
    let f_norm = f.coeff_norm_l1();
    let g_norm = g.coeff_norm_l1();
    let fq_x = f_q.coeffs_in(0);
    let t_inv_f64: Vec<Vec<f64>> = (0..3)
        .map(|i| (0..3).map(|j| rat_f64(t_inv.at(i, j))).collect())
        .collect();

    // dehomogenisations of the original pair for the final polish, one per
    // pinnable coordinate
    let dehom: Vec<(MPoly, MPoly)> = (0..3)
        .map(|m| {
            (
                f.substitute_value(m, &Rat::one()),
                g.substitute_value(m, &Rat::one()),
            )
        })
        .collect();

    let mut found: Vec<(Vec<Complex64>, f64)> = Vec::new();
    let mut flagged: Vec<(Vec<Complex64>, f64)> = Vec::new();
    for y in ys {
        // solve F(x, y) = 0 in x for candidates
        let coeffs: Vec<Complex64> = fq_x
            .iter()
            .map(|c| c.eval_complex(&[Complex64::ZERO, y, Complex64::ONE]))
            .collect();
        let fx = CPoly::new(coeffs);
        if fx.degree() < 1 || fx.is_zero() {
            continue;
        }
        let xs = fx.roots(1e-8)?;
        for x in xs {
            // Newton-polish on the affine pair (F_q, G_q)
            let Some((x, y)) = polish(&f_q, &g_q, 0, 1, 2, x, y) else { continue };
            // back to original coordinates
            let q = [x, y, Complex64::ONE];
            let p: Vec<Complex64> = (0..3)
                .map(|i| (0..3).map(|j| t_inv_f64[i][j] * q[j]).sum())
                .collect();
            let mut pn = normalize_max_modulus(&p);
            // second polish in the original coordinates, where the residual
            // gate lives (removes the chart's conditioning from the result)
            let pin = (0..3)
                .max_by(|&a, &b| pn[a].norm().total_cmp(&pn[b].norm()))
                .unwrap();
            let free: Vec<usize> = (0..3).filter(|&v| v != pin).collect();
            let (fd, gd) = &dehom[pin];
            if let Some((a, b)) = polish(fd, gd, free[0], free[1], pin, pn[free[0]], pn[free[1]]) {
                pn[free[0]] = a;
                pn[free[1]] = b;
                pn[pin] = Complex64::ONE;
            }
            let pn = normalize_max_modulus(&pn);
            // residuals of the original homogeneous system at the
            // normalised representative
            let rf = f.eval_complex(&pn).norm() / f_norm;
            let rg = g.eval_complex(&pn).norm() / g_norm;
            let residual = rf.max(rg);
            if residual > RESIDUAL_TOL {
                continue;
            }
            // genericity filter
            let sum: Complex64 = pn.iter().sum();
            let locus_dist = pn.iter().map(|z| z.norm()).fold(sum.norm(), f64::min);
            if locus_dist < EXCLUDED_TOL {
                continue; // on the excluded locus
            }
            if locus_dist < FLAG_TOL {
                flagged.push((pn, residual));
                continue;
            }
            found.push((pn, residual));
        }
    }
    Ok(ChartOutcome { found, flagged, resultant_degree, transform: t })
}

fn rat_f64(x: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// A few damped Newton steps on the bivariate affine system obtained by
/// pinning variable `pin` at one; `va`, `vb` are the free variables.
fn polish(
    f: &MPoly,
    g: &MPoly,
    va: usize,
    vb: usize,
    pin: usize,
    mut x: Complex64,
    mut y: Complex64,
) -> Option<(Complex64, Complex64)> {
    let fx = f.derivative(va);
    let fy = f.derivative(vb);
    let gx = g.derivative(va);
    let gy = g.derivative(vb);
    let eval = |p: &MPoly, x: Complex64, y: Complex64| {
        let mut point = [Complex64::ONE; 3];
        point[va] = x;
        point[vb] = y;
        point[pin] = Complex64::ONE;
        p.eval_complex(&point)
    };
    let mut best = f64::INFINITY;
    for _ in 0..30 {
        let fv = eval(f, x, y);
        let gv = eval(g, x, y);
        let err = fv.norm() + gv.norm();
        if err < 1e-14 * (1.0 + x.norm() + y.norm()) {
            break;
        }
        if err >= best * 0.999 && err < 1e-10 {
            break; // stagnated at an acceptable level
        }
        best = best.min(err);
        let j11 = eval(&fx, x, y);
        let j12 = eval(&fy, x, y);
        let j21 = eval(&gx, x, y);
        let j22 = eval(&gy, x, y);
        let det = j11 * j22 - j12 * j21;
        if det.norm() < 1e-14 {
            return None;
        }
        let dx = (fv * j22 - gv * j12) / det;
        let dy = (j11 * gv - j21 * fv) / det;
        x -= dx;
        y -= dy;
        if !x.is_finite() || !y.is_finite() {
            return None;
        }
    }
    Some((x, y))
}
