//! Latent-class EM for low-rank contingency tables.
//!
//! Model: `p_ij = sum_l pi_l a_il b_jl` with mixing weights `pi` and column
//! distributions `a_(.l)`, `b_(.l)`. The E-step computes posterior class
//! responsibilities per cell, the M-step the closed-form updates; the
//! log-likelihood is asserted non-decreasing on every iteration of every
//! start.

use crate::error::Error;
use crate::rng::stream;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Outcome of a multi-start EM run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EMResult {
    /// Best fitted table (entries sum to one; rank `<= r` by construction).
    pub best_table: Vec<Vec<f64>>,
    /// `sum u_ij log p_ij` at the best table.
    pub log_likelihood: f64,
    pub n_starts: usize,
    /// Number of starts that strictly improved the best value so far
    /// (in start order).
    pub n_improvals: usize,
    /// Iterations used by the best start.
    pub best_iters: usize,
    /// Log-likelihood trace of the best start, when tracing is on.
    pub trace: Option<Vec<f64>>,
}

/// Multi-start EM. `tol` is the stopping threshold on the log-likelihood
/// improvement per iteration (default used by callers: 1e-12);
/// initial factor entries are i.i.d. uniform on (0.2, 1.8), then normalised.
pub fn em_low_rank(
    u: &[Vec<u64>],
    r: usize,
    n_starts: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
    keep_trace: bool,
) -> Result<EMResult, Error> {
    if r == 0 {
        return Err(Error::Domain("rank must be at least 1".into()));
    }
    let m = u.len();
    let n = u.first().map_or(0, |row| row.len());
    if m == 0 || n == 0 || u.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension("counts must form a rectangular matrix".into()));
    }
    let total: f64 = u.iter().flatten().map(|&x| x as f64).sum();
    if total == 0.0 {
        return Err(Error::Domain("all counts are zero".into()));
    }
    let uf: Vec<f64> = u.iter().flatten().map(|&x| x as f64).collect();

    let runs: Vec<(f64, Vec<f64>, usize, Option<Vec<f64>>)> = (0..n_starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = stream(seed, start as u64);
            em_single(&uf, m, n, r, max_iters, tol, &mut rng, keep_trace)
        })
        .collect();

    // deterministic best-of reduction in start order
    let mut best_idx = 0usize;
    let mut improvals = 0usize;
    let mut best_ll = f64::NEG_INFINITY;
    for (i, run) in runs.iter().enumerate() {
        if run.0 > best_ll {
            best_ll = run.0;
            best_idx = i;
            improvals += 1;
        }
    }
    let (ll, table, iters, trace) = runs.into_iter().nth(best_idx).unwrap();
    Ok(EMResult {
        best_table: (0..m).map(|i| table[i * n..(i + 1) * n].to_vec()).collect(),
        log_likelihood: ll,
        n_starts,
        n_improvals: improvals,
        best_iters: iters,
        trace,
    })
}

#[allow(clippy::too_many_arguments)]
fn em_single(
    uf: &[f64],
    m: usize,
    n: usize,
    r: usize,
    max_iters: usize,
    tol: f64,
    rng: &mut impl Rng,
    keep_trace: bool,
) -> (f64, Vec<f64>, usize, Option<Vec<f64>>) {
    let total: f64 = uf.iter().sum();
    let draw = |rng: &mut dyn rand::RngCore, len: usize| -> Vec<f64> {
        let mut v: Vec<f64> = (0..len).map(|_| rng.random_range(0.2..1.8)).collect();
        let s: f64 = v.iter().sum();
        for x in v.iter_mut() {
            *x /= s;
        }
        v
    };
    let mut pi = draw(rng, r);
    let mut a: Vec<Vec<f64>> = (0..r).map(|_| draw(rng, m)).collect(); // a[l][i]
    let mut b: Vec<Vec<f64>> = (0..r).map(|_| draw(rng, n)).collect(); // b[l][j]

    let table = |pi: &[f64], a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<f64> {
        let mut p = vec![0.0; m * n];
        for l in 0..r {
            for i in 0..m {
                let w = pi[l] * a[l][i];
                for j in 0..n {
                    p[i * n + j] += w * b[l][j];
                }
            }
        }
        p
    };
    let loglik = |p: &[f64]| -> f64 {
        uf.iter().zip(p).map(|(&c, &x)| if c > 0.0 { c * x.ln() } else { 0.0 }).sum()
    };

    let mut p = table(&pi, &a, &b);
    let mut ll = loglik(&p);
    let mut trace = keep_trace.then(|| vec![ll]);
    let mut iters = 0usize;
    for it in 0..max_iters {
        iters = it + 1;
        // E + M in one pass: expected counts per class
        let mut npi = vec![0.0; r];
        let mut na = vec![vec![0.0; m]; r];
        let mut nb = vec![vec![0.0; n]; r];
        for i in 0..m {
            for j in 0..n {
                let c = uf[i * n + j];
                if c == 0.0 {
                    continue;
                }
                let denom = p[i * n + j];
                for l in 0..r {
                    let w = c * pi[l] * a[l][i] * b[l][j] / denom;
                    npi[l] += w;
                    na[l][i] += w;
                    nb[l][j] += w;
                }
            }
        }
        for l in 0..r {
            if npi[l] <= 0.0 {
                continue; // empty class stays put
            }
            for i in 0..m {
                a[l][i] = na[l][i] / npi[l];
            }
            for j in 0..n {
                b[l][j] = nb[l][j] / npi[l];
            }
            pi[l] = npi[l] / total;
        }
        p = table(&pi, &a, &b);
        let next = loglik(&p);
        assert!(
            next >= ll - 1e-9 * (1.0 + ll.abs()),
            "EM log-likelihood decreased: {ll} -> {next}"
        );
        if let Some(t) = trace.as_mut() {
            t.push(next);
        }
        let gain = next - ll;
        ll = next;
        if gain < tol {
            break;
        }
    }
    (ll, p, iters, trace)
}

/// The conjectured optimum for the symmetric match/mismatch data: block
/// pattern `3,3,2,2` over 40.
pub fn swiss_francs_conjectured_table() -> Vec<Vec<f64>> {
    let pat = [
        [3.0, 3.0, 2.0, 2.0],
        [3.0, 3.0, 2.0, 2.0],
        [2.0, 2.0, 3.0, 3.0],
        [2.0, 2.0, 3.0, 3.0],
    ];
    pat.iter().map(|row| row.iter().map(|x| x / 40.0).collect()).collect()
}

/// The match/mismatch count matrix with `diag` on the diagonal and `off`
/// elsewhere.
pub fn swiss_francs_counts(diag: u64, off: u64) -> Vec<Vec<u64>> {
    (0..4)
        .map(|i| (0..4).map(|j| if i == j { diag } else { off }).collect())
        .collect()
}
