//! Gaussian conditional independence: almost-principal minors, gaussoid
//! axioms and enumeration, representability search over the positive
//! definite cone, the five-cycle contradiction, and the entropy map into
//! the submodular cone.
//!
//! The almost-principal minor `[i ⊥ j | K]` of a symmetric matrix is the
//! determinant of the submatrix with rows `{i} ∪ K` and columns `{j} ∪ K`
//! (`i` and `j` first, `K` ascending on both axes — this fixes the sign).
//! It vanishes on a positive definite matrix exactly when the corresponding
//! Gaussian conditional independence holds.

use crate::error::Error;
use crate::mat::Mat;
use crate::mpoly::MPoly;
use crate::rat::{ln_rat, rationalize, Rat};
use crate::rng::stream;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Tolerance for classifying floating-point submodularity margins.
const SUBMOD_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Statements and candidates
// ---------------------------------------------------------------------------

/// A conditional independence statement `[i ⊥ j | K]` with `i < j` and
/// `K` disjoint from `{i,j}`, encoded as a bitmask. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CIStatement {
    pub i: usize,
    pub j: usize,
    pub k_mask: u32,
}

impl CIStatement {
    pub fn new(n: usize, a: usize, b: usize, k_mask: u32) -> Result<Self, Error> {
        if a == b || a >= n || b >= n {
            return Err(Error::Domain(format!("invalid pair ({a},{b}) for n={n}")));
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        if k_mask & ((1 << i) | (1 << j)) != 0 || k_mask >= (1 << n) {
            return Err(Error::Domain("conditioning set must avoid the pair".into()));
        }
        Ok(CIStatement { i, j, k_mask })
    }

    pub fn k_indices(&self) -> Vec<usize> {
        (0..32).filter(|b| self.k_mask & (1 << b) != 0).collect()
    }

    /// `"1,2|3"` (1-based, empty conditioning set as `"1,2|"`).
    pub fn display(&self) -> String {
        let ks: Vec<String> = self.k_indices().iter().map(|k| (k + 1).to_string()).collect();
        format!("{},{}|{}", self.i + 1, self.j + 1, ks.join(","))
    }

    /// Parse `"i,j|k1,k2"`, 1-based.
    pub fn parse(n: usize, s: &str) -> Result<Self, Error> {
        let (pair, cond) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("missing `|` in statement `{s}`")))?;
        let idx = |t: &str| -> Result<usize, Error> {
            let v: usize =
                t.trim().parse().map_err(|_| Error::Parse(format!("bad index `{t}`")))?;
            if v == 0 || v > n {
                return Err(Error::Parse(format!("index {v} out of range 1..={n}")));
            }
            Ok(v - 1)
        };
        let (a, b) = pair
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("missing `,` in pair of `{s}`")))?;
        let mut mask = 0u32;
        for t in cond.split(',') {
            if t.trim().is_empty() {
                continue;
            }
            mask |= 1 << idx(t)?;
        }
        CIStatement::new(n, idx(a)?, idx(b)?, mask)
    }
}

impl fmt::Display for CIStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

/// All statements for ground set size `n`, ordered by `(i, j, k_mask)`.
/// There are `C(n,2) * 2^(n-2)` of them (6, 24, 80 for n = 3, 4, 5).
pub fn all_statements(n: usize) -> Vec<CIStatement> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let others: Vec<usize> = (0..n).filter(|&x| x != i && x != j).collect();
            for sub in 0u32..(1 << others.len()) {
                let mut mask = 0u32;
                for (bit, &x) in others.iter().enumerate() {
                    if sub & (1 << bit) != 0 {
                        mask |= 1 << x;
                    }
                }
                out.push(CIStatement { i, j, k_mask: mask });
            }
        }
    }
    out.sort();
    out
}

/// A set of CI statements over `n` indices, stored as a bitset against the
/// canonical [`all_statements`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussoidCandidate {
    pub n: usize,
    pub bits: u128,
}

impl GaussoidCandidate {
    pub fn empty(n: usize) -> Self {
        GaussoidCandidate { n, bits: 0 }
    }

    pub fn full(n: usize) -> Self {
        let len = all_statements(n).len();
        GaussoidCandidate { n, bits: (1u128 << len) - 1 }
    }

    pub fn from_statements(n: usize, stmts: &[CIStatement]) -> Result<Self, Error> {
        let table = StatementTable::new(n);
        let mut bits = 0u128;
        for s in stmts {
            let idx = table
                .index(s)
                .ok_or_else(|| Error::Domain(format!("statement {s} invalid for n={n}")))?;
            bits |= 1 << idx;
        }
        Ok(GaussoidCandidate { n, bits })
    }

    pub fn members(&self) -> Vec<CIStatement> {
        all_statements(self.n)
            .into_iter()
            .enumerate()
            .filter(|(idx, _)| self.bits & (1 << idx) != 0)
            .map(|(_, s)| s)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }
}

/// Lookup table from statements to bit positions.
pub struct StatementTable {
    pub n: usize,
    pub stmts: Vec<CIStatement>,
}

impl StatementTable {
    pub fn new(n: usize) -> Self {
        StatementTable { n, stmts: all_statements(n) }
    }

    pub fn index(&self, s: &CIStatement) -> Option<usize> {
        self.stmts.binary_search(s).ok()
    }

    fn has(&self, bits: u128, i: usize, j: usize, k_mask: u32) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let s = CIStatement { i, j, k_mask };
        match self.index(&s) {
            Some(idx) => bits & (1 << idx) != 0,
            None => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Covariance matrices with a positive-definiteness certificate
// ---------------------------------------------------------------------------

/// Symmetric rational matrix certified positive definite (all leading
/// principal minors positive, checked exactly on construction).
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    n: usize,
    mat: Mat<Rat>,
}

impl CovMatrix {
    pub fn new(mat: Mat<Rat>) -> Result<Self, Error> {
        if !mat.is_square() {
            return Err(Error::Dimension("covariance matrix must be square".into()));
        }
        let n = mat.rows;
        for i in 0..n {
            for j in i + 1..n {
                if mat.at(i, j) != mat.at(j, i) {
                    return Err(Error::Domain(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        for k in 1..=n {
            let lead = principal_submatrix(&mat, (1u32 << k) - 1);
            let d = lead.det_exact()?;
            if !d.is_positive() {
                return Err(Error::NotPositiveDefinite(format!(
                    "leading principal minor of order {k} is {}",
                    crate::rat::rat_to_string(&d)
                )));
            }
        }
        Ok(CovMatrix { n, mat })
    }

    /// From the row-major upper triangle including the diagonal.
    pub fn from_upper(n: usize, upper: &[Rat]) -> Result<Self, Error> {
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::Dimension(format!(
                "expected {} upper-triangle entries, got {}",
                n * (n + 1) / 2,
                upper.len()
            )));
        }
        let mut m = Mat::zero(n, n);
        let mut it = upper.iter();
        for i in 0..n {
            for j in i..n {
                let v = it.next().unwrap().clone();
                m.set(i, j, v.clone());
                m.set(j, i, v);
            }
        }
        Self::new(m)
    }

    pub fn identity(n: usize) -> Self {
        CovMatrix { n, mat: Mat::identity(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mat(&self) -> &Mat<Rat> {
        &self.mat
    }

    pub fn upper(&self) -> Vec<Rat> {
        let mut out = Vec::with_capacity(self.n * (self.n + 1) / 2);
        for i in 0..self.n {
            for j in i..self.n {
                out.push(self.mat.at(i, j).clone());
            }
        }
        out
    }
}

fn principal_submatrix(m: &Mat<Rat>, mask: u32) -> Mat<Rat> {
    let idx: Vec<usize> = (0..m.rows).filter(|b| mask & (1 << b) != 0).collect();
    let mut out = Mat::zero(idx.len(), idx.len());
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            out.set(r, c, m.at(i, j).clone());
        }
    }
    out
}

/// Determinant of the principal submatrix on `mask` (1 for the empty set).
pub fn principal_minor(m: &Mat<Rat>, mask: u32) -> Result<Rat, Error> {
    if mask == 0 {
        return Ok(Rat::one());
    }
    principal_submatrix(m, mask).det_exact()
}

// ---------------------------------------------------------------------------
// Almost-principal minors
// ---------------------------------------------------------------------------

/// Exact almost-principal minor: rows `{i} ∪ K`, columns `{j} ∪ K`, with
/// `i`/`j` first and `K` ascending on both axes. With `K = {}` this is
/// `sigma_ij` itself.
pub fn apm(sigma: &CovMatrix, s: &CIStatement) -> Result<Rat, Error> {
    apm_mat(sigma.mat(), s)
}

pub(crate) fn apm_mat(m: &Mat<Rat>, s: &CIStatement) -> Result<Rat, Error> {
    let n = m.rows;
    if s.j >= n || s.k_mask >= (1 << n) || s.k_mask & ((1 << s.i) | (1 << s.j)) != 0 {
        return Err(Error::Domain(format!("statement {s} invalid for n={n}")));
    }
    let ks = s.k_indices();
    let mut rows = vec![s.i];
    rows.extend(&ks);
    let mut cols = vec![s.j];
    cols.extend(&ks);
    let mut sub = Mat::zero(rows.len(), rows.len());
    for (r, &ri) in rows.iter().enumerate() {
        for (c, &cj) in cols.iter().enumerate() {
            sub.set(r, c, m.at(ri, cj).clone());
        }
    }
    sub.det_exact()
}

/// Floating-point almost-principal minor (for the numeric search phases).
fn apm_f64(m: &[f64], n: usize, s: &CIStatement) -> f64 {
    let ks = s.k_indices();
    let d = 1 + ks.len();
    let mut rows = vec![s.i];
    rows.extend(&ks);
    let mut cols = vec![s.j];
    cols.extend(&ks);
    let mut sub = vec![0.0; d * d];
    for (r, &ri) in rows.iter().enumerate() {
        for (c, &cj) in cols.iter().enumerate() {
            sub[r * d + c] = m[ri * n + cj];
        }
    }
    det_f64(&mut sub, d)
}

fn det_f64(m: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|r| (r, m[r * n + k].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if mag == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let d = m[k * n + k];
        det *= d;
        for r in k + 1..n {
            let f = m[r * n + k] / d;
            for j in k..n {
                m[r * n + j] -= f * m[k * n + j];
            }
        }
    }
    det
}

/// The exact vanishing pattern of almost-principal minors of a certified
/// positive definite matrix.
pub fn gaussoid_of(sigma: &CovMatrix) -> Result<GaussoidCandidate, Error> {
    let table = StatementTable::new(sigma.n());
    let mut bits = 0u128;
    for (idx, s) in table.stmts.iter().enumerate() {
        if apm(sigma, s)?.is_zero() {
            bits |= 1 << idx;
        }
    }
    Ok(GaussoidCandidate { n: sigma.n(), bits })
}

// ---------------------------------------------------------------------------
// Gaussoid axioms
// ---------------------------------------------------------------------------

/// A violated axiom instance, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub axiom: char,
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l_mask: u32,
}

/// Axioms (a)-(d) over all ordered triples `(i, j, k)` and all conditioning
/// extensions `L` disjoint from the triple:
///
/// * (a) `[i⊥j|L]` and `[i⊥k|jL]`  imply `[i⊥k|L]` and `[i⊥j|kL]`
/// * (b) `[i⊥j|kL]` and `[i⊥k|jL]` imply `[i⊥j|L]` and `[i⊥k|L]`
/// * (c) `[i⊥j|L]` and `[i⊥k|L]`   imply `[i⊥j|kL]` and `[i⊥k|jL]`
/// * (d) `[i⊥j|L]` and `[i⊥j|kL]`  imply `[i⊥k|L]` or `[j⊥k|L]`
///
/// Returns the first violated instance.
pub fn is_gaussoid(cand: &GaussoidCandidate) -> Result<(), AxiomViolation> {
    let n = cand.n;
    let table = StatementTable::new(n);
    let bits = cand.bits;
    let has = |i: usize, j: usize, m: u32| table.has(bits, i, j, m);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || i == k || j == k {
                    continue;
                }
                let others: Vec<usize> =
                    (0..n).filter(|&x| x != i && x != j && x != k).collect();
                for sub in 0u32..(1 << others.len()) {
                    let mut l = 0u32;
                    for (bit, &x) in others.iter().enumerate() {
                        if sub & (1 << bit) != 0 {
                            l |= 1 << x;
                        }
                    }
                    let lj = l | (1 << j);
                    let lk = l | (1 << k);
                    let viol = |ax: char| AxiomViolation { axiom: ax, i, j, k, l_mask: l };
                    if has(i, j, l) && has(i, k, lj) && !(has(i, k, l) && has(i, j, lk)) {
                        return Err(viol('a'));
                    }
                    if has(i, j, lk) && has(i, k, lj) && !(has(i, j, l) && has(i, k, l)) {
                        return Err(viol('b'));
                    }
                    if has(i, j, l) && has(i, k, l) && !(has(i, j, lk) && has(i, k, lj)) {
                        return Err(viol('c'));
                    }
                    if has(i, j, l) && has(i, j, lk) && !(has(i, k, l) || has(j, k, l)) {
                        return Err(viol('d'));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Second, independently structured axiom checker: premise-driven over pairs
/// of member statements rather than instance-driven over index triples.
/// Used to cross-validate [`is_gaussoid`].
pub fn is_gaussoid_pairwise(cand: &GaussoidCandidate) -> bool {
    let n = cand.n;
    let table = StatementTable::new(n);
    let bits = cand.bits;
    let members: Vec<&CIStatement> = table
        .stmts
        .iter()
        .enumerate()
        .filter(|(idx, _)| bits & (1 << idx) != 0)
        .map(|(_, s)| s)
        .collect();
    let has = |i: usize, j: usize, m: u32| table.has(bits, i, j, m);

    for &s1 in &members {
        for &s2 in &members {
            // (a): s1 = [x,y|L], s2 = [x,z|L+y]
            for (x, y) in [(s1.i, s1.j), (s1.j, s1.i)] {
                let l = s1.k_mask;
                for (p, z) in [(s2.i, s2.j), (s2.j, s2.i)] {
                    if p == x && z != y && s2.k_mask == l | (1 << y) {
                        if !(has(x, z, l) && has(x, y, l | (1 << z))) {
                            return false;
                        }
                    }
                    // (b): s1 = [x,y|L+z], s2 = [x,z|L+y]
                    if p == x
                        && z != y
                        && s1.k_mask & (1 << z) != 0
                        && s2.k_mask == (s1.k_mask & !(1 << z)) | (1 << y)
                    {
                        let l0 = s1.k_mask & !(1 << z);
                        if !(has(x, y, l0) && has(x, z, l0)) {
                            return false;
                        }
                    }
                    // (c): s1 = [x,y|L], s2 = [x,z|L]
                    if p == x && z != y && s2.k_mask == l && (1 << z) & l == 0 && (1 << y) & s2.k_mask == 0 {
                        if !(has(x, y, l | (1 << z)) && has(x, z, l | (1 << y))) {
                            return false;
                        }
                    }
                }
            }
            // (d): s1 = [i,j|L], s2 = [i,j|L+k]
            if s1.i == s2.i && s1.j == s2.j {
                let extra = s2.k_mask & !s1.k_mask;
                if extra.count_ones() == 1 && s2.k_mask == s1.k_mask | extra {
                    let k = extra.trailing_zeros() as usize;
                    if !(has(s1.i, k, s1.k_mask) || has(s1.j, k, s1.k_mask)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// All gaussoids on `n ∈ {3, 4}` indices, by filtering every subset bitset
/// through the axiom checker. Deterministic ascending bitset order.
pub fn enumerate_gaussoids(n: usize) -> Result<Vec<GaussoidCandidate>, Error> {
    if !(3..=4).contains(&n) {
        return Err(Error::Domain(format!("enumeration supported for n in {{3,4}}, got {n}")));
    }
    let len = all_statements(n).len();
    let total: u64 = 1 << len;
    let block = 1u64 << 16;
    let blocks: Vec<u64> = (0..total.div_ceil(block)).collect();
    let found: Vec<Vec<u128>> = blocks
        .par_iter()
        .map(|&bi| {
            let mut out = Vec::new();
            let start = bi * block;
            let end = (start + block).min(total);
            for bits in start..end {
                let cand = GaussoidCandidate { n, bits: bits as u128 };
                if is_gaussoid(&cand).is_ok() {
                    out.push(bits as u128);
                }
            }
            out
        })
        .collect();
    Ok(found
        .into_iter()
        .flatten()
        .map(|bits| GaussoidCandidate { n, bits })
        .collect())
}

// ---------------------------------------------------------------------------
// Representability search
// ---------------------------------------------------------------------------

/// Outcome of [`find_representation`]: a certified witness or an honest
/// search failure (never a non-representability proof).
#[derive(Debug, Clone)]
pub enum Witness {
    Found(Box<CovMatrix>),
    NotFound { attempts: usize },
}

impl Witness {
    pub fn found(&self) -> Option<&CovMatrix> {
        match self {
            Witness::Found(m) => Some(m),
            Witness::NotFound { .. } => None,
        }
    }
}

/// Search for a certified positive definite witness whose vanishing pattern
/// equals `target` exactly.
///
/// Numeric phase: multi-start gradient descent on
/// `sum_{s in S} apm^2 - mu * sum_{s not in S} min(apm^2, eps^2)` over
/// unit-diagonal Cholesky factors. Rationalisation: continued-fraction
/// rounding with denominator bounds 10^3, 10^6, 10^9. Repair: member minors
/// are zeroed exactly by solving for `sigma_ij` (the minor is linear in it).
/// Certification: exact re-verification sharing no code with the search.
pub fn find_representation(target: &GaussoidCandidate, budget: usize, seed: u64) -> Witness {
    let n = target.n;
    let table = StatementTable::new(n);

    // structured candidates first: identity and a fixed generic matrix
    for cand in [CovMatrix::identity(n), generic_pd(n)] {
        if certify(&cand, target, &table).is_ok() {
            return Witness::Found(Box::new(cand));
        }
    }

    for attempt in 0..budget {
        let mut rng = stream(seed, attempt as u64);
        let sigma = optimize_pattern(target, &table, &mut rng);
        for max_den in [1_000u64, 1_000_000, 1_000_000_000] {
            let mut m = Mat::zero(n, n);
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, rationalize(sigma[i * n + j], max_den));
                }
            }
            // exact symmetrisation (average upper/lower just in case)
            for i in 0..n {
                m.set(i, i, m.at(i, i).clone());
                for j in i + 1..n {
                    let v = m.at(i, j).clone();
                    m.set(j, i, v);
                }
            }
            if let Some(repaired) = repair(m, target, &table) {
                if let Ok(cov) = CovMatrix::new(repaired) {
                    if certify(&cov, target, &table).is_ok() {
                        return Witness::Found(Box::new(cov));
                    }
                }
            }
        }
    }
    Witness::NotFound { attempts: budget }
}

/// Fixed generic positive definite matrix: ones on the diagonal, distinct
/// small off-diagonal entries (diagonally dominant).
fn generic_pd(n: usize) -> CovMatrix {
    let mut m = Mat::identity(n);
    let mut c = 2i64;
    for i in 0..n {
        for j in i + 1..n {
            let v = Rat::new(1.into(), (4 * c).into());
            m.set(i, j, v.clone());
            m.set(j, i, v);
            c += 1;
        }
    }
    CovMatrix::new(m).expect("diagonally dominant")
}

/// Exact certification: positive definite, members vanish, non-members do
/// not. Independent of the numeric search path.
fn certify(
    cov: &CovMatrix,
    target: &GaussoidCandidate,
    table: &StatementTable,
) -> Result<(), Error> {
    for (idx, s) in table.stmts.iter().enumerate() {
        let v = apm(cov, s)?;
        let want_zero = target.bits & (1 << idx) != 0;
        if want_zero != v.is_zero() {
            return Err(Error::Domain(format!("statement {s} mismatch")));
        }
    }
    Ok(())
}

/// Numeric penalty minimisation over unit-diagonal correlation matrices
/// parameterised by normalised Cholesky rows. Returns the flattened matrix.
fn optimize_pattern(
    target: &GaussoidCandidate,
    table: &StatementTable,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let n = target.n;
    let nparams = n * (n - 1) / 2;
    let mu = 1.0;
    let eps = 1e-2;
    let members: Vec<&CIStatement> = table
        .stmts
        .iter()
        .enumerate()
        .filter(|(idx, _)| target.bits & (1 << idx) != 0)
        .map(|(_, s)| s)
        .collect();
    let non_members: Vec<&CIStatement> = table
        .stmts
        .iter()
        .enumerate()
        .filter(|(idx, _)| target.bits & (1 << idx) == 0)
        .map(|(_, s)| s)
        .collect();

    let objective = |theta: &[f64]| -> f64 {
        let m = cholesky_to_corr(theta, n);
        let mut f = 0.0;
        for s in &members {
            let v = apm_f64(&m, n, s);
            f += v * v;
        }
        for s in &non_members {
            let v = apm_f64(&m, n, s);
            f -= mu * (v * v).min(eps * eps);
        }
        f
    };

    let mut theta: Vec<f64> = (0..nparams).map(|_| rng.random_range(-0.8..0.8)).collect();
    let mut fval = objective(&theta);
    let mut step = 0.1;
    for _ in 0..400 {
        // central-difference gradient
        let mut grad = vec![0.0; nparams];
        for k in 0..nparams {
            let h = 1e-6;
            let mut tp = theta.clone();
            tp[k] += h;
            let fp = objective(&tp);
            tp[k] -= 2.0 * h;
            let fm = objective(&tp);
            grad[k] = (fp - fm) / (2.0 * h);
        }
        let gnorm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            break;
        }
        let mut improved = false;
        for _ in 0..30 {
            let cand: Vec<f64> =
                theta.iter().zip(&grad).map(|(t, g)| t - step * g / gnorm).collect();
            let fc = objective(&cand);
            if fc < fval - 1e-15 {
                theta = cand;
                fval = fc;
                step *= 1.6;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved || step < 1e-14 {
            break;
        }
    }
    cholesky_to_corr(&theta, n)
}

/// Unit-diagonal correlation matrix from free lower-triangle parameters:
/// row `i` of the Cholesky factor is `(theta..., 1)` normalised.
fn cholesky_to_corr(theta: &[f64], n: usize) -> Vec<f64> {
    let mut l = vec![0.0; n * n];
    let mut idx = 0;
    for i in 0..n {
        for j in 0..i {
            l[i * n + j] = theta[idx];
            idx += 1;
        }
        l[i * n + i] = 1.0;
        let norm: f64 = (0..=i).map(|j| l[i * n + j] * l[i * n + j]).sum::<f64>().sqrt();
        for j in 0..=i {
            l[i * n + j] /= norm;
        }
    }
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = (0..n).map(|k| l[i * n + k] * l[j * n + k]).sum();
        }
    }
    m
}

/// Exact repair: for each member statement in turn, solve for `sigma_ij`
/// so its minor vanishes exactly (the minor is linear in `sigma_ij` with
/// coefficient `det(Sigma_K)`). Iterates to a fixpoint.
fn repair(mut m: Mat<Rat>, target: &GaussoidCandidate, table: &StatementTable) -> Option<Mat<Rat>> {
    let members: Vec<&CIStatement> = table
        .stmts
        .iter()
        .enumerate()
        .filter(|(idx, _)| target.bits & (1 << idx) != 0)
        .map(|(_, s)| s)
        .collect();
    for _pass in 0..(2 * members.len() + 4) {
        let mut dirty = false;
        for s in &members {
            let v = apm_mat(&m, s).ok()?;
            if v.is_zero() {
                continue;
            }
            let cof = principal_minor(&m, s.k_mask).ok()?;
            if cof.is_zero() {
                return None;
            }
            // minor = sigma_ij * det(Sigma_K) + rest
            let rest = &v - m.at(s.i, s.j) * &cof;
            let new = -rest / &cof;
            m.set(s.i, s.j, new.clone());
            m.set(s.j, s.i, new);
            dirty = true;
        }
        if !dirty {
            return Some(m);
        }
    }
    None
}

/// Exact random positive definite matrix `L Lᵀ` from a random rational
/// lower-triangular factor with positive diagonal.
pub fn random_pd(n: usize, rng: &mut impl Rng) -> CovMatrix {
    loop {
        let mut l = Mat::zero(n, n);
        for i in 0..n {
            for j in 0..i {
                // nonzero numerators keep the vanishing pattern generically empty
                let num = *[-6i64, -5, -4, -3, -2, -1, 1, 2, 3, 4, 5, 6]
                    .get(rng.random_range(0..12))
                    .unwrap();
                l.set(i, j, Rat::new(num.into(), rng.random_range(1i64..=4).into()));
            }
            l.set(i, i, Rat::new(rng.random_range(1i64..=6).into(), 1.into()));
        }
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Rat::zero();
                for k in 0..n {
                    acc += l.at(i, k) * l.at(j, k);
                }
                m.set(i, j, acc);
            }
        }
        if let Ok(cov) = CovMatrix::new(m) {
            return cov;
        }
    }
}

// ---------------------------------------------------------------------------
// Entropy map and the submodular cone
// ---------------------------------------------------------------------------

/// `H_I = -log det(Sigma_I)` for every subset `I`, exact determinants with
/// a floating log; `H_{} = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyVector {
    pub n: usize,
    /// Indexed by subset bitmask.
    pub values: Vec<f64>,
}

pub fn entropy_vector(sigma: &CovMatrix) -> Result<EntropyVector, Error> {
    let n = sigma.n();
    let mut values = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let d = principal_minor(sigma.mat(), mask)?;
        if !d.is_positive() {
            return Err(Error::NotPositiveDefinite(format!("principal minor {mask:b}")));
        }
        values.push(-ln_rat(&d));
    }
    Ok(EntropyVector { n, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubmodClass {
    Violated,
    Tight,
    Slack,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmodEntry {
    pub i: usize,
    pub j: usize,
    pub k_mask: u32,
    /// `H_{ijK} + H_K - H_{iK} - H_{jK}`, non-negative iff submodular.
    pub margin: f64,
    pub class: SubmodClass,
}

/// Classify every submodularity inequality of an entropy-like vector.
/// Violations have margin below `-tol`, tight entries `|margin| <= tol`.
pub fn submodular_check(h: &EntropyVector) -> Vec<SubmodEntry> {
    let n = h.n;
    let mut out = Vec::new();
    for s in all_statements(n) {
        let (i, j, k) = (s.i, s.j, s.k_mask);
        let hik = h.values[(k | (1 << i)) as usize];
        let hjk = h.values[(k | (1 << j)) as usize];
        let hijk = h.values[(k | (1 << i) | (1 << j)) as usize];
        let hk = h.values[k as usize];
        let margin = hijk + hk - hik - hjk;
        let class = if margin < -SUBMOD_TOL {
            SubmodClass::Violated
        } else if margin <= SUBMOD_TOL {
            SubmodClass::Tight
        } else {
            SubmodClass::Slack
        };
        out.push(SubmodEntry { i, j, k_mask: k, margin, class });
    }
    out
}

/// The exact tightness pattern of the product inequality
/// `det(Sigma_iK) det(Sigma_jK) >= det(Sigma_ijK) det(Sigma_K)`
/// (an independent route to the vanishing pattern: it must equal
/// [`gaussoid_of`] on every positive definite matrix).
pub fn tight_faces(sigma: &CovMatrix) -> Result<GaussoidCandidate, Error> {
    let table = StatementTable::new(sigma.n());
    let m = sigma.mat();
    let mut bits = 0u128;
    for (idx, s) in table.stmts.iter().enumerate() {
        let ik = principal_minor(m, s.k_mask | (1 << s.i))?;
        let jk = principal_minor(m, s.k_mask | (1 << s.j))?;
        let ijk = principal_minor(m, s.k_mask | (1 << s.i) | (1 << s.j))?;
        let k = principal_minor(m, s.k_mask)?;
        if ik * jk == ijk * k {
            bits |= 1 << idx;
        }
    }
    Ok(GaussoidCandidate { n: sigma.n(), bits })
}

// ---------------------------------------------------------------------------
// The five-cycle experiment
// ---------------------------------------------------------------------------

/// Variable index of `sigma_ij` (`i <= j`, 0-based) among the
/// `n(n+1)/2` upper-triangle symbols in row-major order.
pub fn sigma_var(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    let mut idx = 0;
    for r in 0..i {
        idx += n - r;
    }
    idx + (j - i)
}

/// Display names `s11, s12, ..., snn` for the upper-triangle symbols.
pub fn sigma_names(n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            out.push(format!("s{}{}", i + 1, j + 1));
        }
    }
    out
}

/// Symbolic almost-principal minor as a polynomial in the upper-triangle
/// symbols `sigma_ij`.
pub fn apm_symbolic(n: usize, s: &CIStatement) -> Result<MPoly, Error> {
    let nvars = n * (n + 1) / 2;
    let var = |i: usize, j: usize| -> MPoly { MPoly::var(nvars, sigma_var(n, i, j)) };
    let ks = s.k_indices();
    let mut rows = vec![s.i];
    rows.extend(&ks);
    let mut cols = vec![s.j];
    cols.extend(&ks);
    let mat = Mat::from_rows(
        rows.iter()
            .map(|&ri| cols.iter().map(|&cj| var(ri, cj)).collect())
            .collect(),
    );
    mat.det_cofactor()
}

/// The five cyclic statements `[1⊥2|3], [2⊥3|4], [3⊥4|5], [4⊥5|1], [5⊥1|2]`
/// (0-based internally).
pub fn five_cycle_statements() -> Vec<CIStatement> {
    [(0, 1, 2), (1, 2, 3), (2, 3, 4), (3, 4, 0), (4, 0, 1)]
        .iter()
        .map(|&(i, j, k)| CIStatement::new(5, i, j, 1 << k).unwrap())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiveCycleReport {
    /// Rendered quadrics, canonical term order.
    pub quadrics: Vec<String>,
    /// Whether each symbolic expansion matched its expected two-term form.
    pub symbolic_ok: bool,
    /// Optimiser runs that converged (constraint residual < 1e-10).
    pub converged_runs: usize,
    pub non_converged_runs: usize,
    /// Max over converged runs of `max(|s12|,|s23|,|s34|,|s45|,|s15|)`.
    pub max_cycle_entry: f64,
    /// Samples where every 2x2 minor inequality held strictly (exact).
    pub inequality_ok: usize,
    /// Samples where the product identity would be forced to fail (exact).
    pub contradiction_ok: usize,
    pub n_samples: usize,
}

/// The three-part five-cycle experiment: symbolic expansion check, penalty
/// optimisation over the positive definite cone, and the exact
/// product-of-inequalities audit.
pub fn five_cycle_experiment(n_samples: usize, seed: u64) -> Result<FiveCycleReport, Error> {
    let n = 5;
    let stmts = five_cycle_statements();
    let names = sigma_names(n);
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();

    // (1) symbolic: each apm expands to sigma_ij sigma_kk - sigma_ik sigma_jk
    let mut quadrics = Vec::new();
    let mut symbolic_ok = true;
    for s in &stmts {
        let p = apm_symbolic(n, s)?;
        let k = s.k_indices()[0];
        let expected = {
            let var = |a: usize, b: usize| MPoly::var(n * (n + 1) / 2, sigma_var(n, a, b));
            var(s.i, s.j).mul(&var(k, k)).sub(&var(s.i, k).mul(&var(s.j, k)))
        };
        if p != expected {
            symbolic_ok = false;
        }
        quadrics.push(p.to_string_with(&name_refs));
    }

    // (2) numeric: least-squares on the five quadrics over PD_5
    let table = StatementTable::new(n);
    let target = GaussoidCandidate::from_statements(n, &stmts)?;
    let cycle_pairs = [(0usize, 1usize), (1, 2), (2, 3), (3, 4), (0, 4)];
    let mut converged = 0usize;
    let mut failed = 0usize;
    let mut max_cycle_entry: f64 = 0.0;
    let runs = 24.min(4 + n_samples / 50);
    for run in 0..runs {
        let mut rng = stream(seed, 10_000 + run as u64);
        let m = optimize_cycle(&target, &table, &mut rng);
        let residual: f64 = stmts.iter().map(|s| apm_f64(&m, n, s).abs()).fold(0.0, f64::max);
        if residual < 1e-10 {
            converged += 1;
            for &(i, j) in &cycle_pairs {
                max_cycle_entry = max_cycle_entry.max(m[i * n + j].abs());
            }
        } else {
            failed += 1;
        }
    }

    // (3) exact inequality audit on random PD matrices
    let mut rng = stream(seed, 0);
    let mut inequality_ok = 0usize;
    let mut contradiction_ok = 0usize;
    let minor_pairs = [(0usize, 2usize), (1, 3), (2, 4), (3, 0), (4, 1)];
    for _ in 0..n_samples {
        let cov = random_pd(n, &mut rng);
        let m = cov.mat();
        let mut all_strict = true;
        let mut lhs = Rat::one();
        let mut rhs = Rat::one();
        for &(i, j) in &minor_pairs {
            let prod = m.at(i, i) * m.at(j, j);
            let sq = m.at(i, j) * m.at(i, j);
            if prod <= sq {
                all_strict = false;
            }
            lhs *= prod;
            rhs *= sq;
        }
        if all_strict {
            inequality_ok += 1;
        }
        // product of the five inequalities: lhs > rhs, so the monomial
        // identity prod sigma_ii = prod sigma_(cycle chords) cannot hold
        if lhs > rhs {
            contradiction_ok += 1;
        }
    }

    Ok(FiveCycleReport {
        quadrics,
        symbolic_ok,
        converged_runs: converged,
        non_converged_runs: failed,
        max_cycle_entry,
        inequality_ok,
        contradiction_ok,
        n_samples,
    })
}

/// Least-squares minimisation of the five member minors over unit-diagonal
/// correlation matrices by Levenberg-Marquardt with a numeric Jacobian.
fn optimize_cycle(target: &GaussoidCandidate, table: &StatementTable, rng: &mut impl Rng) -> Vec<f64> {
    let n = target.n;
    let nparams = n * (n - 1) / 2;
    let members: Vec<&CIStatement> = table
        .stmts
        .iter()
        .enumerate()
        .filter(|(idx, _)| target.bits & (1 << idx) != 0)
        .map(|(_, s)| s)
        .collect();
    let nres = members.len();
    let residuals = |theta: &[f64]| -> Vec<f64> {
        let m = cholesky_to_corr(theta, n);
        members.iter().map(|s| apm_f64(&m, n, s)).collect()
    };
    let ssq = |r: &[f64]| -> f64 { r.iter().map(|x| x * x).sum() };

    let mut theta: Vec<f64> = (0..nparams).map(|_| rng.random_range(-0.4..0.4)).collect();
    let mut r = residuals(&theta);
    let mut f = ssq(&r);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        if f < 1e-26 {
            break;
        }
        // numeric Jacobian nres x nparams
        let mut jac = vec![0.0; nres * nparams];
        for k in 0..nparams {
            let h = 1e-7;
            let mut tp = theta.clone();
            tp[k] += h;
            let rp = residuals(&tp);
            tp[k] -= 2.0 * h;
            let rm = residuals(&tp);
            for row in 0..nres {
                jac[row * nparams + k] = (rp[row] - rm[row]) / (2.0 * h);
            }
        }
        // normal equations (JtJ + lambda I) d = -Jt r
        let mut a = vec![0.0; nparams * nparams];
        let mut b = vec![0.0; nparams];
        for x in 0..nparams {
            for y in 0..nparams {
                a[x * nparams + y] =
                    (0..nres).map(|row| jac[row * nparams + x] * jac[row * nparams + y]).sum();
            }
            b[x] = -(0..nres).map(|row| jac[row * nparams + x] * r[row]).sum::<f64>();
        }
        let mut accepted = false;
        for _ in 0..25 {
            let mut areg = a.clone();
            for x in 0..nparams {
                areg[x * nparams + x] += lambda;
            }
            if let Some(d) = solve_f64(&mut areg, &b, nparams) {
                let cand: Vec<f64> = theta.iter().zip(&d).map(|(t, dd)| t + dd).collect();
                let rc = residuals(&cand);
                let fc = ssq(&rc);
                if fc < f {
                    theta = cand;
                    r = rc;
                    f = fc;
                    lambda = (lambda * 0.3).max(1e-14);
                    accepted = true;
                    break;
                }
            }
            lambda *= 8.0;
        }
        if !accepted {
            break;
        }
    }
    cholesky_to_corr(&theta, n)
}

fn solve_f64(a: &mut [f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut x = b.to_vec();
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|r| (r, a[r * n + k].abs()))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        if mag < 1e-300 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        let d = a[k * n + k];
        for r in k + 1..n {
            let fac = a[r * n + k] / d;
            if fac == 0.0 {
                continue;
            }
            for j in k..n {
                a[r * n + j] -= fac * a[k * n + j];
            }
            x[r] -= fac * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= a[k * n + j] * x[j];
        }
        x[k] = s / a[k * n + k];
    }
    Some(x)
}
