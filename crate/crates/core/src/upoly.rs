//! Dense univariate polynomials over complex floats and simultaneous root
//! finding (Aberth–Ehrlich iteration from a perturbed circle start).

use crate::error::Error;
use crate::rat::Rat;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

const MAX_SWEEPS: usize = 1000;

/// Coefficients lowest degree first; the leading coefficient is nonzero
/// unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CPoly {
    pub coeffs: Vec<Complex64>,
}

impl CPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm_sqr() == 0.0) {
            coeffs.pop();
        }
        CPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Exact max-normalisation before the float conversion, so huge exact
    /// coefficients (e.g. from resultants) stay representable.
    pub fn from_rat_coeffs(coeffs: &[Rat]) -> Self {
        let max = coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rat::zero);
        if max.is_zero() {
            return CPoly { coeffs: vec![] };
        }
        Self::new(
            coeffs
                .iter()
                .map(|c| Complex64::new((c / &max).to_f64().unwrap_or(0.0), 0.0))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> CPoly {
        if self.coeffs.len() <= 1 {
            return CPoly { coeffs: vec![] };
        }
        CPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// All `deg` roots with multiplicity. Each returned root `r` satisfies
    /// `|p(r)| <= tol * max|coeff|`.
    pub fn roots(&self, tol: f64) -> Result<Vec<Complex64>, Error> {
        if self.is_zero() {
            return Err(Error::Domain("roots of the zero polynomial".into()));
        }
        if self.degree() < 1 {
            return Err(Error::Domain("roots of a constant polynomial".into()));
        }
        // peel off exact roots at the origin
        let zeros_at_origin = self.coeffs.iter().take_while(|c| c.norm_sqr() == 0.0).count();
        let mut roots = vec![Complex64::ZERO; zeros_at_origin];
        let reduced = &self.coeffs[zeros_at_origin..];
        if reduced.len() > 1 {
            roots.extend(aberth(reduced, tol)?);
        }
        Ok(roots)
    }
}

fn aberth(coeffs: &[Complex64], tol: f64) -> Result<Vec<Complex64>, Error> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let maxc = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let target = tol * maxc;

    // Cauchy-style inclusion radius and centroid start on a perturbed circle.
    let radius = 1.0 + coeffs[..d].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
    let center = -coeffs[d - 1] / (lead * d as f64);
    let mut z: Vec<Complex64> = (0..d)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / d as f64 + 0.573;
            let r = radius * (0.55 + 0.12 * ((j % 5) as f64));
            center + Complex64::from_polar(r, theta)
        })
        .collect();

    let eval = |z: Complex64| -> (Complex64, Complex64) {
        // p(z) and p'(z) by a joint Horner pass
        let mut p = Complex64::ZERO;
        let mut dp = Complex64::ZERO;
        for c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };

    let mut worst = f64::INFINITY;
    for _sweep in 0..MAX_SWEEPS {
        let mut moved = 0.0f64;
        for j in 0..d {
            let (p, dp) = eval(z[j]);
            if p.norm() <= target * 0.01 {
                continue;
            }
            let w = if dp.norm_sqr() > 0.0 {
                p / dp
            } else {
                // nudge off a critical point
                let mag = 1.0 + z[j].norm();
                z[j] += Complex64::new(1e-6 * mag, 1e-6);
                continue;
            };
            let mut s = Complex64::ZERO;
            for (k, zk) in z.iter().enumerate() {
                if k != j {
                    let diff = z[j] - zk;
                    if diff.norm_sqr() > 0.0 {
                        s += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - w * s;
            let delta = if denom.norm_sqr() > 1e-30 { w / denom } else { w };
            z[j] -= delta;
            moved = moved.max(delta.norm());
        }
        worst = z.iter().map(|&zj| eval(zj).0.norm()).fold(0.0, f64::max);
        if worst <= target || moved < 1e-16 * radius.max(1.0) {
            break;
        }
    }
    if worst > target {
        return Err(Error::Convergence { iters: MAX_SWEEPS, residual: worst / maxc });
    }
    Ok(z)
}
