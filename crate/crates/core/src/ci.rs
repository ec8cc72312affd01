//! Discrete conditional independence: CI statements as 2×2 minor
//! conditions on marginalised tables, exact CI signatures, and randomised
//! search for strictly positive rational tables realising a target
//! signature.
//!
//! A statement `[i ⊥ j | K]` holds for a table when, after marginalising
//! out every variable outside `{i,j} ∪ K`, each slice at a fixed value of
//! the `K`-variables has all 2×2 minors zero (exact rational arithmetic).

use crate::error::Error;
use crate::gauss::{all_statements, CIStatement, StatementTable};
use crate::rat::Rat;
use crate::rng::stream;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Dense `d_1 x ... x d_n` array of exact rationals, row-major (last index
/// fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableN {
    pub dims: Vec<usize>,
    #[serde(with = "crate::rat::serde_rat_vec")]
    pub entries: Vec<Rat>,
}

impl TableN {
    pub fn new(dims: Vec<usize>, entries: Vec<Rat>) -> Result<Self, Error> {
        let size: usize = dims.iter().product();
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Dimension("dims must be nonempty and positive".into()));
        }
        if entries.len() != size {
            return Err(Error::Dimension(format!(
                "expected {size} entries for dims {dims:?}, got {}",
                entries.len()
            )));
        }
        Ok(TableN { dims, entries })
    }

    pub fn constant(dims: Vec<usize>, value: Rat) -> Self {
        let size = dims.iter().product();
        TableN { dims, entries: vec![value; size] }
    }

    pub fn n_vars(&self) -> usize {
        self.dims.len()
    }

    pub fn strictly_positive(&self) -> bool {
        self.entries.iter().all(|x| x.is_positive())
    }

    fn strides(&self) -> Vec<usize> {
        let n = self.dims.len();
        let mut s = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }

    /// Outer product of positive vectors: full independence.
    pub fn outer_product(factors: &[Vec<Rat>]) -> Result<Self, Error> {
        if factors.is_empty() || factors.iter().any(|f| f.is_empty()) {
            return Err(Error::Dimension("factors must be nonempty".into()));
        }
        let dims: Vec<usize> = factors.iter().map(|f| f.len()).collect();
        let size: usize = dims.iter().product();
        let mut entries = Vec::with_capacity(size);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..size {
            let mut v = Rat::one();
            for (vi, &ix) in idx.iter().enumerate() {
                v *= &factors[vi][ix];
            }
            entries.push(v);
            // odometer
            for vi in (0..dims.len()).rev() {
                idx[vi] += 1;
                if idx[vi] < dims[vi] {
                    break;
                }
                idx[vi] = 0;
            }
        }
        TableN::new(dims, entries)
    }
}

/// Sum out every variable not in `keep` (given as a sorted list of variable
/// indices). Exact.
pub fn marginalize(t: &TableN, keep: &[usize]) -> Result<TableN, Error> {
    let n = t.n_vars();
    if keep.is_empty() {
        return Err(Error::Domain("cannot marginalise away every variable".into()));
    }
    for w in keep.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Domain("keep set must be strictly increasing".into()));
        }
    }
    if *keep.last().unwrap() >= n {
        return Err(Error::Domain("keep index out of range".into()));
    }
    let out_dims: Vec<usize> = keep.iter().map(|&v| t.dims[v]).collect();
    let out_size: usize = out_dims.iter().product();
    let mut out = vec![Rat::zero(); out_size];
    let strides = t.strides();
    // output strides
    let mut out_strides = vec![1usize; keep.len()];
    for i in (0..keep.len().saturating_sub(1)).rev() {
        out_strides[i] = out_strides[i + 1] * out_dims[i + 1];
    }
    let mut idx = vec![0usize; n];
    for flat in 0..t.entries.len() {
        // decode flat index (row-major)
        let mut rem = flat;
        for v in 0..n {
            idx[v] = rem / strides[v];
            rem %= strides[v];
        }
        let mut out_flat = 0usize;
        for (pos, &v) in keep.iter().enumerate() {
            out_flat += idx[v] * out_strides[pos];
        }
        out[out_flat] += &t.entries[flat];
    }
    TableN::new(out_dims, out)
}

/// Does `[i ⊥ j | K]` hold exactly? Variables outside `{i,j} ∪ K` are
/// marginalised out; for each assignment of the `K`-variables the
/// `d_i x d_j` slice must have rank at most one (all 2×2 minors zero).
pub fn ci_holds(t: &TableN, s: &CIStatement) -> Result<bool, Error> {
    let n = t.n_vars();
    if s.j >= n || s.k_mask >= (1 << n) {
        return Err(Error::Domain(format!("statement {s} invalid for {n} variables")));
    }
    let ks = s.k_indices();
    let mut keep: Vec<usize> = vec![s.i, s.j];
    keep.extend(&ks);
    keep.sort_unstable();
    let m = marginalize(t, &keep)?;
    // positions of i, j and K inside the marginal
    let pos = |v: usize| keep.iter().position(|&x| x == v).unwrap();
    let (pi, pj) = (pos(s.i), pos(s.j));
    let kpos: Vec<usize> = ks.iter().map(|&k| pos(k)).collect();
    let di = m.dims[pi];
    let dj = m.dims[pj];
    let strides = m.strides();

    let mut k_sizes: Vec<usize> = kpos.iter().map(|&p| m.dims[p]).collect();
    if k_sizes.is_empty() {
        k_sizes.push(1);
    }
    let k_total: usize = k_sizes.iter().product();
    let mut kidx = vec![0usize; kpos.len()];
    for _ in 0..k_total {
        // base offset for this K-assignment
        let mut base = 0usize;
        for (w, &p) in kpos.iter().enumerate() {
            base += kidx[w] * strides[p];
        }
        // all 2x2 minors of the slice
        for a in 0..di {
            for b in a + 1..di {
                for c in 0..dj {
                    for d in c + 1..dj {
                        let at = |x: usize, y: usize| {
                            &m.entries[base + x * strides[pi] + y * strides[pj]]
                        };
                        let det = at(a, c) * at(b, d) - at(a, d) * at(b, c);
                        if !det.is_zero() {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        for w in (0..kpos.len()).rev() {
            kidx[w] += 1;
            if kidx[w] < k_sizes[w] {
                break;
            }
            kidx[w] = 0;
        }
    }
    Ok(true)
}

/// The exact set of statements valid for a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CISignature {
    pub n: usize,
    pub dims: Vec<usize>,
    pub holds: u128,
}

impl CISignature {
    pub fn members(&self) -> Vec<CIStatement> {
        all_statements(self.n)
            .into_iter()
            .enumerate()
            .filter(|(idx, _)| self.holds & (1 << idx) != 0)
            .map(|(_, s)| s)
            .collect()
    }

    pub fn full(n: usize, dims: Vec<usize>) -> Self {
        let len = all_statements(n).len();
        CISignature { n, dims, holds: (1u128 << len) - 1 }
    }

    pub fn empty(n: usize, dims: Vec<usize>) -> Self {
        CISignature { n, dims, holds: 0 }
    }

    pub fn from_statements(n: usize, dims: Vec<usize>, stmts: &[CIStatement]) -> Result<Self, Error> {
        let table = StatementTable::new(n);
        let mut holds = 0u128;
        for s in stmts {
            let idx = table
                .index(s)
                .ok_or_else(|| Error::Domain(format!("statement {s} invalid for n={n}")))?;
            holds |= 1 << idx;
        }
        Ok(CISignature { n, dims, holds })
    }
}

/// Exact CI signature: every statement checked with rational arithmetic.
pub fn ci_signature(t: &TableN) -> Result<CISignature, Error> {
    let n = t.n_vars();
    let table = StatementTable::new(n);
    let mut holds = 0u128;
    for (idx, s) in table.stmts.iter().enumerate() {
        if ci_holds(t, s)? {
            holds |= 1 << idx;
        }
    }
    Ok(CISignature { n, dims: t.dims.clone(), holds })
}

/// Search outcome: a strictly positive rational witness table whose exact
/// signature equals the target, or an honest failure (never an emptiness
/// proof).
#[derive(Debug, Clone)]
pub enum CiWitness {
    Found(Box<TableN>),
    NotFound { attempts: usize },
}

impl CiWitness {
    pub fn found(&self) -> Option<&TableN> {
        match self {
            CiWitness::Found(t) => Some(t),
            CiWitness::NotFound { .. } => None,
        }
    }
}

/// Default cap on the number of cells for signature search.
pub const DEFAULT_CELL_CAP: usize = 64;

/// Ladder search for a strictly positive rational table with the exact
/// target signature.
///
/// Step 1 tries structured constructions (uniform and outer products for
/// the full signature, plain random tables for sparse targets). Step 2
/// projects random tables onto each member statement by exact
/// rank-one-ification of the relevant conditional slices (an IPF-style
/// sweep with rational snapshots), then verifies the complete signature —
/// members and non-members — exactly.
pub fn strict_model_search(target: &CISignature, budget: usize, seed: u64) -> Result<CiWitness, Error> {
    let dims = &target.dims;
    let cells: usize = dims.iter().product();
    if cells > DEFAULT_CELL_CAP {
        return Err(Error::Domain(format!(
            "dims {:?} exceed the {DEFAULT_CELL_CAP}-cell cap",
            dims
        )));
    }
    let n = target.n;
    if n != dims.len() {
        return Err(Error::Dimension("signature arity must match dims".into()));
    }

    // structured candidates first
    let mut structured: Vec<TableN> = vec![TableN::constant(
        dims.clone(),
        Rat::new(BigInt::one(), BigInt::from(cells as i64)),
    )];
    {
        let factors: Vec<Vec<Rat>> = dims
            .iter()
            .enumerate()
            .map(|(v, &d)| {
                (0..d)
                    .map(|x| Rat::new(BigInt::from(1 + x as i64 + v as i64), BigInt::from(7 + 2 * v as i64)))
                    .collect()
            })
            .collect();
        structured.push(TableN::outer_product(&factors)?);
    }
    for cand in &structured {
        if &ci_signature(cand)? == target {
            return Ok(CiWitness::Found(Box::new(cand.clone())));
        }
    }

    let members = target.members();
    for attempt in 0..budget {
        let mut rng = stream(seed, attempt as u64);
        let mut t = random_positive_table(dims, &mut rng);
        // exact projection sweeps over the member statements
        let sweeps = if members.is_empty() { 0 } else { 6 };
        for _ in 0..sweeps {
            for s in &members {
                project_onto_statement(&mut t, s)?;
            }
            if members.iter().map(|s| ci_holds(&t, s)).collect::<Result<Vec<_>, _>>()?.iter().all(|&b| b)
            {
                break;
            }
        }
        if !t.strictly_positive() {
            continue;
        }
        if &ci_signature(&t)? == target {
            return Ok(CiWitness::Found(Box::new(t)));
        }
    }
    Ok(CiWitness::NotFound { attempts: budget })
}

fn random_positive_table(dims: &[usize], rng: &mut impl Rng) -> TableN {
    let size: usize = dims.iter().product();
    let entries: Vec<Rat> = (0..size)
        .map(|_| Rat::new(BigInt::from(rng.random_range(1i64..=97)), BigInt::from(101)))
        .collect();
    TableN { dims: dims.to_vec(), entries }
}

/// Make `[i ⊥ j | K]` hold exactly by scaling: for each assignment of the
/// `K`-variables, replace the conditional `(i,j)`-margin with its rank-one
/// approximation `row * col / total` and scale the underlying cells
/// proportionally. Positivity is preserved.
fn project_onto_statement(t: &mut TableN, s: &CIStatement) -> Result<(), Error> {
    let n = t.n_vars();
    let ks = s.k_indices();
    let mut keep: Vec<usize> = vec![s.i, s.j];
    keep.extend(&ks);
    keep.sort_unstable();
    let marg = marginalize(t, &keep)?;
    let pos = |v: usize| keep.iter().position(|&x| x == v).unwrap();
    let (pi, pj) = (pos(s.i), pos(s.j));
    let kpos: Vec<usize> = ks.iter().map(|&k| pos(k)).collect();
    let mstrides = marg.strides();
    let di = marg.dims[pi];
    let dj = marg.dims[pj];

    // per K-assignment: current slice and its rank-one target
    let k_sizes: Vec<usize> = kpos.iter().map(|&p| marg.dims[p]).collect();
    let k_total: usize = k_sizes.iter().product::<usize>().max(1);
    let mut kidx = vec![0usize; kpos.len()];
    // scale factor per marginal cell, indexed by the marginal flat index
    let mut scale: Vec<Rat> = vec![Rat::one(); marg.entries.len()];
    for _ in 0..k_total {
        let mut base = 0usize;
        for (w, &p) in kpos.iter().enumerate() {
            base += kidx[w] * mstrides[p];
        }
        let at = |x: usize, y: usize| &marg.entries[base + x * mstrides[pi] + y * mstrides[pj]];
        let mut rows = vec![Rat::zero(); di];
        let mut cols = vec![Rat::zero(); dj];
        let mut total = Rat::zero();
        for x in 0..di {
            for y in 0..dj {
                let v = at(x, y);
                rows[x] += v;
                cols[y] += v;
                total += v;
            }
        }
        if total.is_zero() {
            return Err(Error::Domain("zero conditional margin".into()));
        }
        for x in 0..di {
            for y in 0..dj {
                let cur = at(x, y);
                if cur.is_zero() {
                    return Err(Error::Domain("zero cell in conditional margin".into()));
                }
                let want = &rows[x] * &cols[y] / &total;
                scale[base + x * mstrides[pi] + y * mstrides[pj]] = want / cur;
            }
        }
        for w in (0..kpos.len()).rev() {
            kidx[w] += 1;
            if kidx[w] < k_sizes[w] {
                break;
            }
            kidx[w] = 0;
        }
    }

    // apply scales to the full table
    let strides = t.strides();
    let mut out_strides = vec![1usize; keep.len()];
    for i in (0..keep.len().saturating_sub(1)).rev() {
        out_strides[i] = out_strides[i + 1] * marg.dims[i + 1];
    }
    let mut idx = vec![0usize; n];
    for flat in 0..t.entries.len() {
        let mut rem = flat;
        for v in 0..n {
            idx[v] = rem / strides[v];
            rem %= strides[v];
        }
        let mut mflat = 0usize;
        for (w, &v) in keep.iter().enumerate() {
            mflat += idx[v] * out_strides[w];
        }
        let v = &t.entries[flat] * &scale[mflat];
        t.entries[flat] = v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::Mat;
    use crate::rat::{frac, rat};

    fn uniform222() -> TableN {
        TableN::constant(vec![2, 2, 2], frac(1, 8))
    }

    #[test]
    fn marginalize_cases() {
        let t = uniform222();
        let full = marginalize(&t, &[0, 1, 2]).unwrap();
        assert_eq!(full, t);
        let m1 = marginalize(&t, &[0]).unwrap();
        assert_eq!(m1.entries, vec![frac(1, 2), frac(1, 2)]);
        assert!(marginalize(&t, &[]).is_err());
        assert!(marginalize(&t, &[3]).is_err());
        assert!(marginalize(&t, &[1, 0]).is_err());
    }

    #[test]
    fn marginalize_two_steps_equals_one() {
        let mut rng = stream(9, 0);
        let t = random_positive_table(&[2, 3, 2, 2], &mut rng);
        let one_step = marginalize(&t, &[0, 2]).unwrap();
        let via = marginalize(&marginalize(&t, &[0, 1, 2]).unwrap(), &[0, 2]).unwrap();
        assert_eq!(one_step, via);
    }

    #[test]
    fn ci_holds_uniform_and_diagonal() {
        let t = uniform222();
        for s in all_statements(3) {
            assert!(ci_holds(&t, &s).unwrap());
        }
        // 2x2 identity-like table: dependence
        let t = TableN::new(vec![2, 2], vec![rat(1), rat(0), rat(0), rat(1)]).unwrap();
        let s = CIStatement::parse(2, "1,2|").unwrap();
        assert!(!ci_holds(&t, &s).unwrap());
    }

    #[test]
    fn outer_product_has_full_signature() {
        let factors = vec![
            vec![frac(1, 2), frac(1, 3), frac(1, 6)],
            vec![frac(2, 5), frac(3, 5)],
            vec![frac(1, 4), frac(3, 4)],
        ];
        let t = TableN::outer_product(&factors).unwrap();
        let sig = ci_signature(&t).unwrap();
        assert_eq!(sig, CISignature::full(3, vec![3, 2, 2]));
    }

    #[test]
    fn generic_table_has_empty_signature() {
        let mut rng = stream(10, 0);
        for _ in 0..20 {
            let t = random_positive_table(&[2, 2, 2], &mut rng);
            let sig = ci_signature(&t).unwrap();
            assert_eq!(sig.holds, 0, "accidental CI in random table");
        }
    }

    #[test]
    fn two_variable_rank_criterion() {
        let mut rng = stream(11, 0);
        for _ in 0..20 {
            let t = random_positive_table(&[3, 3], &mut rng);
            let s = CIStatement::parse(2, "1,2|").unwrap();
            let holds = ci_holds(&t, &s).unwrap();
            let m = Mat::new(3, 3, t.entries.clone());
            assert_eq!(holds, m.rank_exact() <= 1);
        }
        // a rank-one 3x3 table
        let rank1 = TableN::outer_product(&[
            vec![rat(1), rat(2), rat(3)],
            vec![rat(2), rat(5), rat(7)],
        ])
        .unwrap();
        let s = CIStatement::parse(2, "1,2|").unwrap();
        assert!(ci_holds(&rank1, &s).unwrap());
    }

    #[test]
    fn state_permutation_invariance() {
        let mut rng = stream(12, 0);
        let t = random_positive_table(&[2, 2, 2], &mut rng);
        // swap the two states of variable 3
        let mut swapped = t.clone();
        for i in 0..2 {
            for j in 0..2 {
                let a = (i * 2 + j) * 2;
                swapped.entries.swap(a, a + 1);
            }
        }
        for s in all_statements(3) {
            assert_eq!(ci_holds(&t, &s).unwrap(), ci_holds(&swapped, &s).unwrap());
        }
    }

    #[test]
    fn variable_relabeling_invariance() {
        // swap variables 1 and 2 (axes 0 and 1) of a 2x3x2 table; a
        // statement relabelled the same way keeps its truth value
        let mut rng = stream(14, 0);
        let t = random_positive_table(&[2, 3, 2], &mut rng);
        let mut swapped = TableN::constant(vec![3, 2, 2], Rat::zero());
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..2 {
                    swapped.entries[(j * 2 + i) * 2 + k] = t.entries[(i * 3 + j) * 2 + k].clone();
                }
            }
        }
        let relabel = |v: usize| match v {
            0 => 1,
            1 => 0,
            other => other,
        };
        for s in all_statements(3) {
            let mut mask = 0u32;
            for k in s.k_indices() {
                mask |= 1 << relabel(k);
            }
            let s2 = CIStatement::new(3, relabel(s.i), relabel(s.j), mask).unwrap();
            assert_eq!(ci_holds(&t, &s).unwrap(), ci_holds(&swapped, &s2).unwrap(), "{s}");
        }
    }

    #[test]
    fn search_full_signature_finds_uniform() {
        let target = CISignature::full(3, vec![2, 2, 2]);
        let w = strict_model_search(&target, 10, 0).unwrap();
        let t = w.found().expect("uniform should certify at the first rung");
        assert_eq!(ci_signature(t).unwrap(), target);
        assert!(t.entries.iter().all(|x| *x == frac(1, 8)));
    }

    #[test]
    fn search_empty_signature_finds_random_table() {
        let target = CISignature::empty(3, vec![2, 2, 2]);
        let w = strict_model_search(&target, 50, 3).unwrap();
        let t = w.found().expect("generic tables have empty signatures");
        assert!(t.strictly_positive());
        assert_eq!(ci_signature(t).unwrap(), target);
    }

    #[test]
    fn search_single_marginal_statement() {
        let s = CIStatement::parse(3, "1,2|").unwrap();
        let target = CISignature::from_statements(3, vec![2, 2, 2], &[s]).unwrap();
        let w = strict_model_search(&target, 200, 5).unwrap();
        let t = w.found().expect("projection construction should succeed");
        assert!(t.strictly_positive());
        assert_eq!(ci_signature(t).unwrap(), target);
    }

    #[test]
    fn search_respects_cell_cap() {
        let target = CISignature::full(3, vec![5, 5, 5]);
        assert!(strict_model_search(&target, 1, 0).is_err());
    }

    #[test]
    fn projection_makes_statement_hold_exactly() {
        let mut rng = stream(13, 0);
        for s_str in ["1,2|", "1,3|2", "2,3|"] {
            let s = CIStatement::parse(3, s_str).unwrap();
            let mut t = random_positive_table(&[2, 2, 2], &mut rng);
            project_onto_statement(&mut t, &s).unwrap();
            assert!(ci_holds(&t, &s).unwrap(), "statement {s_str}");
            assert!(t.strictly_positive());
        }
    }
}
