//! Polynomial invariants of the 4×4×4 rank-≤4 model.
//!
//! Two families of known generators are realised exactly:
//!
//! * degree-5 *commutation quintics*: entries of `A·adj(B)·C − C·adj(B)·A`
//!   for the three 4×4 slices of a 3×4×4 subtable (180 terms over 30 of the
//!   64 unknowns each),
//! * the degree-9 *Strassen invariant*: the numerator of
//!   `det(A·B⁻¹·C − C·B⁻¹·A)` for the slices of a 3×3×3 subtable (9216
//!   terms; a single factor of `det(B)` divides out of the commutator
//!   determinant, so the denominator is `det(B)²` rather than `det(B)³`).
//!
//! Beyond exact evaluation on rational tables, the module measures the
//! dimension of the linear span of each family under the natural
//! `GL₄×GL₄×GL₄` action by evaluation rank over a prime field.

use crate::error::Error;
use crate::fp::{rank_mod_p, Fp, FpMat};
use crate::mat::{Mat, Ring};
use crate::mpoly::MPoly;
use crate::rat::Rat;
use crate::rng::stream;
use crate::tensor::Table3;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// `A·adj(B)·C − C·adj(B)·A` for equally sized square matrices.
pub fn adj_commutator<T: Ring>(a: &Mat<T>, b: &Mat<T>, c: &Mat<T>) -> Result<Mat<T>, Error> {
    if !a.is_square() || a.rows != b.rows || a.rows != c.rows || !b.is_square() || !c.is_square() {
        return Err(Error::Dimension("adj_commutator needs three equal square matrices".into()));
    }
    let adj_b = b.adjugate()?;
    let left = a.mul_mat(&adj_b).mul_mat(c);
    let right = c.mul_mat(&adj_b).mul_mat(a);
    Ok(left.sub_mat(&right))
}

// ---------------------------------------------------------------------------
// Enumeration coordinates
// ---------------------------------------------------------------------------

/// One quintic coordinate: a slicing axis, an ordered slice triple
/// `(a, b, c)` with `a < c` and `b` the middle slice, and an entry of the
/// 4×4 commutator. For 4×4×4 tables each axis yields 12 triples of 16
/// entries, 576 coordinates in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuinticCoord {
    pub axis: usize,
    pub triple: (usize, usize, usize),
    pub entry: (usize, usize),
}

/// One Strassen coordinate: a 3×3×3 subtable (one 3-subset per axis) and
/// the slicing axis. For 4×4×4 tables: 64 subtables × 3 orientations = 192.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrassenCoord {
    pub axis: usize,
    pub sel: [[usize; 3]; 3],
}

/// The 12 slice triples per axis on 4 indices: middle `b` distinct from the
/// unordered outer pair `a < c` (the commutator is antisymmetric in the
/// outer slices).
pub fn slice_triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 0..n {
        for c in a + 1..n {
            for b in 0..n {
                if b != a && b != c {
                    out.push((a, b, c));
                }
            }
        }
    }
    // order by (subset, middle) for a stable report layout
    out.sort_by_key(|&(a, b, c)| (a, c, b));
    out
}

pub fn quintic_coords() -> Vec<QuinticCoord> {
    let mut out = Vec::with_capacity(576);
    for axis in 1..=3 {
        for &triple in &slice_triples(4) {
            for r in 0..4 {
                for c in 0..4 {
                    out.push(QuinticCoord { axis, triple, entry: (r, c) });
                }
            }
        }
    }
    out
}

fn three_subsets(n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                out.push([a, b, c]);
            }
        }
    }
    out
}

pub fn strassen_coords() -> Vec<StrassenCoord> {
    let subsets = three_subsets(4);
    let mut out = Vec::with_capacity(192);
    for axis in 1..=3 {
        for &s1 in &subsets {
            for &s2 in &subsets {
                for &s3 in &subsets {
                    out.push(StrassenCoord { axis, sel: [s1, s2, s3] });
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Symbolic expansions
// ---------------------------------------------------------------------------

/// Variable index of `p[i][j][k]` in the 64-unknown ring.
pub fn table_var(i: usize, j: usize, k: usize) -> usize {
    16 * i + 4 * j + k
}

/// Display names `pAAA ... pTTT` for the 64 unknowns.
pub fn table_var_names() -> Vec<String> {
    const L: [char; 4] = ['A', 'C', 'G', 'T'];
    let mut out = Vec::with_capacity(64);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out.push(format!("p{}{}{}", L[i], L[j], L[k]));
            }
        }
    }
    out
}

fn symbolic_slice(slice_index: usize) -> Mat<MPoly> {
    let mut rows = Vec::with_capacity(4);
    for j in 0..4 {
        let mut row = Vec::with_capacity(4);
        for k in 0..4 {
            row.push(MPoly::var(64, table_var(slice_index, j, k)));
        }
        rows.push(row);
    }
    Mat::from_rows(rows)
}

/// The canonical symbolic quintic commutator: axis 1, slice triple
/// `(0, 1, 2)`, outer slices passed in descending index order. That operand
/// order is the frozen sign convention for the canonical expansion (the
/// opposite order negates every entry).
fn quintic_matrix() -> &'static Mat<MPoly> {
    static CACHE: OnceLock<Mat<MPoly>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let s0 = symbolic_slice(0);
        let s1 = symbolic_slice(1);
        let s2 = symbolic_slice(2);
        adj_commutator(&s2, &s1, &s0).expect("4x4 slices")
    })
}

/// Symbolic expansion of one entry of the canonical quintic commutator:
/// homogeneous of degree 5, 180 terms over 30 of the 64 unknowns.
pub fn quintic_expand(entry: (usize, usize)) -> MPoly {
    assert!(entry.0 < 4 && entry.1 < 4, "entry out of range");
    quintic_matrix().at(entry.0, entry.1).clone()
}

/// Variable index of slice `s` entry `(j, k)` in the 27-unknown ring used by
/// the Strassen expansion (slices of the canonical 3×3×3 subtable).
pub fn strassen_var(s: usize, j: usize, k: usize) -> usize {
    9 * s + 3 * j + k
}

fn strassen_symbolic_slice(s: usize) -> Mat<MPoly> {
    let mut rows = Vec::with_capacity(3);
    for j in 0..3 {
        let mut row = Vec::with_capacity(3);
        for k in 0..3 {
            row.push(MPoly::var(27, strassen_var(s, j, k)));
        }
        rows.push(row);
    }
    Mat::from_rows(rows)
}

/// The degree-9 Strassen numerator: `det(A·adj(B)·C − C·adj(B)·A) / det(B)`
/// on symbolic 3×3 slices, homogeneous with 9216 terms. The division is
/// exact; a failure indicates an expansion bug and panics.
pub fn strassen_expand() -> &'static MPoly {
    static CACHE: OnceLock<MPoly> = OnceLock::new();
    CACHE.get_or_init(|| {
        let a = strassen_symbolic_slice(0);
        let b = strassen_symbolic_slice(1);
        let c = strassen_symbolic_slice(2);
        let comm = adj_commutator(&a, &b, &c).expect("3x3 slices");
        let num = comm.det_cofactor().expect("3x3 determinant");
        let det_b = b.det_cofactor().expect("3x3 determinant");
        num.exact_div(&det_b).expect("commutator determinant divisible by det(B)")
    })
}

/// Signs relating the Strassen value under the six permutations of
/// `(A, B, C)` to the identity order, frozen from an evaluation experiment
/// on random rational triples: the value changes sign exactly with the
/// parity of the permutation.
pub const STRASSEN_PERM_SIGNS: [((usize, usize, usize), i8); 6] = [
    ((0, 1, 2), 1),
    ((0, 2, 1), -1),
    ((1, 0, 2), -1),
    ((1, 2, 0), 1),
    ((2, 0, 1), 1),
    ((2, 1, 0), -1),
];

/// Value of the Strassen numerator on rational 3×3 slices, by evaluating the
/// cached symbolic expansion (no denominator on this path). Equals
/// `det(adj_commutator(A,B,C)) / det(B)` whenever `det(B) != 0`.
pub fn strassen_value(a: &Mat<Rat>, b: &Mat<Rat>, c: &Mat<Rat>) -> Result<Rat, Error> {
    for m in [a, b, c] {
        if m.rows != 3 || m.cols != 3 {
            return Err(Error::Dimension("strassen_value needs 3x3 slices".into()));
        }
    }
    let mut point = Vec::with_capacity(27);
    for m in [a, b, c] {
        point.extend(m.data.iter().cloned());
    }
    Ok(eval_homogeneous(strassen_expand(), &point, 9))
}

/// Evaluate a homogeneous polynomial at rational arguments by clearing
/// denominators first, taking the checked `i128` fast path when the integer
/// point is small enough.
fn eval_homogeneous(p: &MPoly, point: &[Rat], degree: u32) -> Rat {
    let mut lcm = BigInt::one();
    for x in point {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = point.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let small: Option<Vec<i128>> = ints.iter().map(|x| x.to_i128()).collect();
    let scale = Rat::from_integer(lcm.pow(degree));
    if let Some(small) = small {
        if small.iter().all(|x| x.abs() <= 6_000) {
            if let Some(v) = p.eval_i128(&small) {
                return Rat::from_integer(BigInt::from(v)) / scale;
            }
        }
    }
    let rats: Vec<Rat> = ints.into_iter().map(Rat::from_integer).collect();
    p.eval_rat(&rats) / scale
}

// ---------------------------------------------------------------------------
// Exact vanishing report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuinticEval {
    #[serde(flatten)]
    pub coord: QuinticCoord,
    pub value: String, // "zero" | "nonzero"
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrassenEval {
    #[serde(flatten)]
    pub coord: StrassenCoord,
    pub value: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VanishingReport {
    pub dims: (usize, usize, usize),
    pub quintics: Vec<QuinticEval>,
    pub strassens: Vec<StrassenEval>,
    pub n_zero: usize,
    pub n_nonzero: usize,
}

impl VanishingReport {
    pub fn all_zero(&self) -> bool {
        self.n_nonzero == 0
    }
}

fn slice_of(t: &Table3, axis: usize, index: usize) -> Mat<Rat> {
    t.slice(axis, index).expect("validated coordinates")
}

/// Numeric value of one quintic coordinate. The operand order matches the
/// canonical symbolic expansion (outer slices in descending index order), so
/// symbolic evaluation and this path agree term for term.
pub fn quintic_value(t: &Table3, coord: &QuinticCoord) -> Result<Rat, Error> {
    let (a, b, c) = coord.triple;
    let sa = slice_of(t, coord.axis, a);
    let sb = slice_of(t, coord.axis, b);
    let sc = slice_of(t, coord.axis, c);
    let m = adj_commutator(&sc, &sb, &sa)?;
    Ok(m.at(coord.entry.0, coord.entry.1).clone())
}

/// Strassen value of one 3×3×3 subtable coordinate.
pub fn strassen_coord_value(t: &Table3, coord: &StrassenCoord) -> Result<Rat, Error> {
    let sub = t.subtable(&coord.sel[0], &coord.sel[1], &coord.sel[2])?;
    let a = slice_of(&sub, coord.axis, 0);
    let b = slice_of(&sub, coord.axis, 1);
    let c = slice_of(&sub, coord.axis, 2);
    strassen_value(&a, &b, &c)
}

/// Evaluate all 576 quintic and 192 Strassen coordinates exactly.
pub fn vanishing_report(t: &Table3) -> Result<VanishingReport, Error> {
    if t.dims != (4, 4, 4) {
        return Err(Error::Dimension(format!(
            "vanishing report needs dims (4,4,4), got {:?}",
            t.dims
        )));
    }
    // one commutator per (axis, triple) yields 16 entries at once
    let mut groups: Vec<(usize, (usize, usize, usize))> = Vec::new();
    for axis in 1..=3 {
        for &triple in &slice_triples(4) {
            groups.push((axis, triple));
        }
    }
    let quintics: Vec<QuinticEval> = groups
        .par_iter()
        .map(|&(axis, triple)| {
            let (a, b, c) = triple;
            let m = adj_commutator(
                &slice_of(t, axis, c),
                &slice_of(t, axis, b),
                &slice_of(t, axis, a),
            )
            .expect("4x4 slices");
            let mut out = Vec::with_capacity(16);
            for r in 0..4 {
                for cc in 0..4 {
                    out.push(QuinticEval {
                        coord: QuinticCoord { axis, triple, entry: (r, cc) },
                        value: zero_str(m.at(r, cc).is_zero()),
                    });
                }
            }
            out
        })
        .flatten()
        .collect();

    let strassens: Vec<StrassenEval> = strassen_coords()
        .par_iter()
        .map(|coord| {
            let v = strassen_coord_value(t, coord).expect("validated coordinates");
            StrassenEval { coord: *coord, value: zero_str(v.is_zero()) }
        })
        .collect();

    let n_zero = quintics.iter().filter(|e| e.value == "zero").count()
        + strassens.iter().filter(|e| e.value == "zero").count();
    let total = quintics.len() + strassens.len();
    Ok(VanishingReport { dims: t.dims, quintics, strassens, n_zero, n_nonzero: total - n_zero })
}

fn zero_str(z: bool) -> String {
    if z { "zero" } else { "nonzero" }.into()
}

// ---------------------------------------------------------------------------
// Span dimension by evaluation rank over F_p
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Quintic,
    Strassen,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "quintic" => Ok(Family::Quintic),
            "strassen" => Ok(Family::Strassen),
            other => Err(Error::Parse(format!("unknown family `{other}`"))),
        }
    }
}

/// Dimension of the linear span of the GL-translates of a family of base
/// invariants, measured as the rank over F_p of the matrix `M[f][t] = f(t)`
/// with `f` ranging over `n_polys` random translates and `t` over `n_points`
/// random tables in `F_p^64`.
///
/// A translate substitutes `p <- (g1 (x) g2 (x) g3) p` for random invertible
/// `g_i`, which on the evaluation side means applying the `g_i` to the three
/// axes of the table before evaluating the base invariant.
pub fn span_dimension(
    family: Family,
    n_polys: usize,
    n_points: usize,
    prime: u64,
    seed: u64,
) -> usize {
    let fp = Fp::new(prime);
    // points: random tables in F_p^64
    let mut point_rng = stream(seed, 1);
    let tables: Vec<u64> = (0..n_points * 64).map(|_| fp.rand_elem(&mut point_rng)).collect();

    let qcoords = quintic_coords();
    let scoords = strassen_coords();

    let mut data = vec![0u64; n_polys * n_points];
    data.par_chunks_mut(n_points).enumerate().for_each(|(i, row)| {
        let mut rng = stream(seed, 2 + i as u64);
        let g1 = random_gl4(&fp, &mut rng);
        let g2 = random_gl4(&fp, &mut rng);
        let g3 = random_gl4(&fp, &mut rng);
        match family {
            Family::Quintic => {
                let coord = qcoords[rng.random_range(0..qcoords.len())];
                for (j, cell) in row.iter_mut().enumerate() {
                    let t = transform_table(&fp, &tables[j * 64..(j + 1) * 64], &g1, &g2, &g3);
                    *cell = quintic_value_fp(&fp, &t, &coord);
                }
            }
            Family::Strassen => {
                let coord = scoords[rng.random_range(0..scoords.len())];
                for (j, cell) in row.iter_mut().enumerate() {
                    let t = transform_table(&fp, &tables[j * 64..(j + 1) * 64], &g1, &g2, &g3);
                    *cell = strassen_value_fp(&fp, &t, &coord);
                }
            }
        }
    });
    let m = FpMat { rows: n_polys, cols: n_points, data };
    rank_mod_p(&fp, m)
}

fn random_gl4(fp: &Fp, rng: &mut impl Rng) -> [u64; 16] {
    loop {
        let mut g = [0u64; 16];
        for x in g.iter_mut() {
            *x = fp.rand_elem(rng);
        }
        if fp_det(fp, &g, 4) != 0 {
            return g;
        }
    }
}

/// Apply `g1, g2, g3` to the three axes of a flat 4×4×4 table.
fn transform_table(fp: &Fp, t: &[u64], g1: &[u64; 16], g2: &[u64; 16], g3: &[u64; 16]) -> [u64; 64] {
    let mut u = [0u64; 64];
    // axis 1
    for a in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut acc = 0u64;
                for i in 0..4 {
                    acc = fp.mac(acc, g1[4 * a + i], t[16 * i + 4 * j + k]);
                }
                u[16 * a + 4 * j + k] = acc;
            }
        }
    }
    let mut v = [0u64; 64];
    // axis 2
    for i in 0..4 {
        for b in 0..4 {
            for k in 0..4 {
                let mut acc = 0u64;
                for j in 0..4 {
                    acc = fp.mac(acc, g2[4 * b + j], u[16 * i + 4 * j + k]);
                }
                v[16 * i + 4 * b + k] = acc;
            }
        }
    }
    let mut w = [0u64; 64];
    // axis 3
    for i in 0..4 {
        for j in 0..4 {
            for c in 0..4 {
                let mut acc = 0u64;
                for k in 0..4 {
                    acc = fp.mac(acc, g3[4 * c + k], v[16 * i + 4 * j + k]);
                }
                w[16 * i + 4 * j + c] = acc;
            }
        }
    }
    w
}

/// Slice of a flat 4×4×4 table over F_p, following the same axis convention
/// as [`Table3::slice`].
fn slice_fp(t: &[u64], axis: usize, index: usize) -> [u64; 16] {
    let mut m = [0u64; 16];
    match axis {
        1 => {
            for j in 0..4 {
                for k in 0..4 {
                    m[4 * j + k] = t[16 * index + 4 * j + k];
                }
            }
        }
        2 => {
            for i in 0..4 {
                for k in 0..4 {
                    m[4 * i + k] = t[16 * i + 4 * index + k];
                }
            }
        }
        3 => {
            for i in 0..4 {
                for j in 0..4 {
                    m[4 * i + j] = t[16 * i + 4 * j + index];
                }
            }
        }
        _ => unreachable!(),
    }
    m
}

fn fp_det(fp: &Fp, m: &[u64], n: usize) -> u64 {
    match n {
        1 => m[0],
        2 => fp.sub(fp.mul(m[0], m[3]), fp.mul(m[1], m[2])),
        _ => {
            let mut acc = 0u64;
            for c in 0..n {
                if m[c] == 0 {
                    continue;
                }
                let mut sub = Vec::with_capacity((n - 1) * (n - 1));
                for i in 1..n {
                    for j in 0..n {
                        if j != c {
                            sub.push(m[i * n + j]);
                        }
                    }
                }
                let term = fp.mul(m[c], fp_det(fp, &sub, n - 1));
                acc = if c % 2 == 0 { fp.add(acc, term) } else { fp.sub(acc, term) };
            }
            acc
        }
    }
}

fn fp_adj(fp: &Fp, m: &[u64], n: usize) -> Vec<u64> {
    let mut adj = vec![0u64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut sub = Vec::with_capacity((n - 1) * (n - 1));
            for r in 0..n {
                if r == i {
                    continue;
                }
                for c in 0..n {
                    if c == j {
                        continue;
                    }
                    sub.push(m[r * n + c]);
                }
            }
            let d = fp_det(fp, &sub, n - 1);
            adj[j * n + i] = if (i + j) % 2 == 0 { d } else { fp.neg(d) };
        }
    }
    adj
}

/// Entry of `C·adj(B)·A − A·adj(B)·C` over F_p (same operand convention as
/// the exact path).
fn quintic_value_fp(fp: &Fp, t: &[u64; 64], coord: &QuinticCoord) -> u64 {
    let (a, b, c) = coord.triple;
    let sa = slice_fp(t, coord.axis, a);
    let sb = slice_fp(t, coord.axis, b);
    let sc = slice_fp(t, coord.axis, c);
    let adj_b = fp_adj(fp, &sb, 4);
    let (r, col) = coord.entry;
    let mut first = 0u64;
    let mut second = 0u64;
    for j in 0..4 {
        for k in 0..4 {
            let m = fp.mul(adj_b[4 * j + k], sa[4 * k + col]);
            first = fp.mac(first, sc[4 * r + j], m);
            let m2 = fp.mul(adj_b[4 * j + k], sc[4 * k + col]);
            second = fp.mac(second, sa[4 * r + j], m2);
        }
    }
    fp.sub(first, second)
}

/// Strassen value over F_p: `det(adj_commutator(A,B,C)) * det(B)^{-1}`, with
/// the cached symbolic expansion as the (rare) fallback when `det(B) = 0`.
fn strassen_value_fp(fp: &Fp, t: &[u64; 64], coord: &StrassenCoord) -> u64 {
    // gather the 3x3x3 subtable slices along the axis
    let mut slices = [[0u64; 9]; 3];
    for (s, slice) in slices.iter_mut().enumerate() {
        for x in 0..3 {
            for y in 0..3 {
                let (i, j, k) = match coord.axis {
                    1 => (s, x, y),
                    2 => (x, s, y),
                    3 => (x, y, s),
                    _ => unreachable!(),
                };
                slice[3 * x + y] =
                    t[16 * coord.sel[0][i] + 4 * coord.sel[1][j] + coord.sel[2][k]];
            }
        }
    }
    let [a, b, c] = slices;
    let det_b = fp_det(fp, &b, 3);
    if det_b == 0 {
        let mut point = Vec::with_capacity(27);
        point.extend_from_slice(&a);
        point.extend_from_slice(&b);
        point.extend_from_slice(&c);
        return strassen_expand().eval_fp(fp, &point);
    }
    let adj_b = fp_adj(fp, &b, 3);
    let mut comm = [0u64; 9];
    for r in 0..3 {
        for col in 0..3 {
            let mut left = 0u64;
            let mut right = 0u64;
            for j in 0..3 {
                for k in 0..3 {
                    let m = fp.mul(adj_b[3 * j + k], c[3 * k + col]);
                    left = fp.mac(left, a[3 * r + j], m);
                    let m2 = fp.mul(adj_b[3 * j + k], a[3 * k + col]);
                    right = fp.mac(right, c[3 * r + j], m2);
                }
            }
            comm[3 * r + col] = fp.sub(left, right);
        }
    }
    fp.mul(fp_det(fp, &comm, 3), fp.inv(det_b))
}

/// Random rank-`r` table over F_p (for invariance spot checks).
pub fn random_low_rank_fp(fp: &Fp, rank: usize, rng: &mut impl Rng) -> [u64; 64] {
    let mut t = [0u64; 64];
    for _ in 0..rank {
        let u: Vec<u64> = (0..4).map(|_| fp.rand_elem(rng)).collect();
        let v: Vec<u64> = (0..4).map(|_| fp.rand_elem(rng)).collect();
        let w: Vec<u64> = (0..4).map(|_| fp.rand_elem(rng)).collect();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let prod = fp.mul(fp.mul(u[i], v[j]), w[k]);
                    t[16 * i + 4 * j + k] = fp.add(t[16 * i + 4 * j + k], prod);
                }
            }
        }
    }
    t
}
