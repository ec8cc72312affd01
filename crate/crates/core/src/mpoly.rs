//! Sparse multivariate polynomials over exact rationals.
//!
//! Terms live in a `BTreeMap` keyed by monomials under graded lexicographic
//! order (total degree first, then exponents with the first variable most
//! significant), so the leading term is the last map entry and serialized
//! expansions are byte-stable across runs. No zero coefficient is ever
//! stored.

use crate::error::Error;
use crate::fp::Fp;
use crate::mat::{Mat, Ring};
use crate::rat::{rat_from_str, rat_to_string, Rat};
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

/// Exponent vector with cached total degree. Ordering is graded lex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    deg: u32,
    exps: Box<[u8]>,
}

impl Monomial {
    pub fn new(exps: Vec<u8>) -> Self {
        let deg = exps.iter().map(|&e| e as u32).sum();
        Monomial { deg, exps: exps.into_boxed_slice() }
    }

    pub fn constant(nvars: usize) -> Self {
        Monomial { deg: 0, exps: vec![0; nvars].into_boxed_slice() }
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn exps(&self) -> &[u8] {
        &self.exps
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let exps: Vec<u8> = self.exps.iter().zip(other.exps.iter()).map(|(a, b)| a + b).collect();
        Monomial { deg: self.deg + other.deg, exps: exps.into_boxed_slice() }
    }

    /// Componentwise quotient, `None` if not divisible.
    fn div(&self, other: &Monomial) -> Option<Monomial> {
        if self.deg < other.deg {
            return None;
        }
        let mut exps = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(other.exps.iter()) {
            if a < b {
                return None;
            }
            exps.push(a - b);
        }
        Some(Monomial { deg: self.deg - other.deg, exps: exps.into_boxed_slice() })
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.deg.cmp(&other.deg).then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial over `Rat`.
#[derive(Debug, Clone, PartialEq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::constant(nvars), c);
        }
        MPoly { nvars, terms }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rat::one())
    }

    /// The monomial `x_idx`.
    pub fn var(nvars: usize, idx: usize) -> Self {
        assert!(idx < nvars);
        let mut exps = vec![0u8; nvars];
        exps[idx] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::new(exps), Rat::one());
        MPoly { nvars, terms }
    }

    pub fn from_terms(nvars: usize, it: impl IntoIterator<Item = (Vec<u8>, Rat)>) -> Self {
        let mut p = MPoly::zero(nvars);
        for (exps, c) in it {
            assert_eq!(exps.len(), nvars, "exponent vector length");
            p.add_term(Monomial::new(exps), c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterate terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    /// Leading term under graded lex, if any.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Coefficient of a monomial (zero if absent).
    pub fn coeff(&self, exps: &[u8]) -> Rat {
        self.terms.get(&Monomial::new(exps.to_vec())).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.deg).max().unwrap_or(0)
    }

    /// `Some(d)` when every term has total degree `d` (zero counts as
    /// homogeneous of any degree and reports `Some(0)`).
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else { return Some(0) };
        let d = first.deg;
        it.all(|m| m.deg == d).then_some(d)
    }

    /// Number of variables appearing with a positive exponent.
    pub fn support_size(&self) -> usize {
        let mut used = vec![false; self.nvars];
        for m in self.terms.keys() {
            for (v, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    used[v] = true;
                }
            }
        }
        used.iter().filter(|&&u| u).count()
    }

    pub fn degree_in(&self, var: usize) -> u8 {
        self.terms.keys().map(|m| m.exps[var]).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn assert_compatible(&self, other: &MPoly) {
        assert_eq!(self.nvars, other.nvars, "mixed variable counts");
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        self.assert_compatible(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.assert_compatible(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        self.assert_compatible(other);
        let mut acc: HashMap<Monomial, Rat> =
            HashMap::with_capacity(self.terms.len() * other.terms.len() / 2 + 1);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        *e.get_mut() += c;
                    }
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        MPoly { nvars: self.nvars, terms }
    }

    pub fn pow(&self, e: u32) -> MPoly {
        let mut out = MPoly::one(self.nvars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Exact division: returns `q` with `q * g = self`, or a divisibility
    /// error carrying the first remainder term that fails.
    pub fn exact_div(&self, g: &MPoly) -> Result<MPoly, Error> {
        self.assert_compatible(g);
        if g.is_zero() {
            return Err(Error::Domain("division by the zero polynomial".into()));
        }
        let (glm, glc) = g.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let mut rem = self.clone();
        let mut quo = MPoly::zero(self.nvars);
        while let Some((rlm, rlc)) = rem.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
            let Some(qm) = rlm.div(&glm) else {
                return Err(Error::Divisibility { term: format!("{:?}^{:?}", rlc, rlm.exps) });
            };
            let qc = rlc / &glc;
            // rem -= (qc * qm) * g
            for (m, c) in &g.terms {
                rem.add_term(qm.mul(m), -(&qc * c));
            }
            quo.add_term(qm, qc);
        }
        Ok(quo)
    }

    pub fn derivative(&self, var: usize) -> MPoly {
        assert!(var < self.nvars);
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exps[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps.to_vec();
            exps[var] = e - 1;
            out.add_term(Monomial::new(exps), c * Rat::from_integer(e.into()));
        }
        out
    }

    /// Substitute a constant for one variable.
    pub fn substitute_value(&self, var: usize, value: &Rat) -> MPoly {
        let mut powers: Vec<Rat> = vec![Rat::one()];
        let maxe = self.degree_in(var) as usize;
        for _ in 0..maxe {
            powers.push(powers.last().unwrap() * value);
        }
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exps[var] as usize;
            let mut exps = m.exps.to_vec();
            exps[var] = 0;
            out.add_term(Monomial::new(exps), c * &powers[e]);
        }
        out
    }

    /// Substitute every variable by a linear form: `x_i <- sum_j A[i][j] x_j`.
    pub fn substitute_linear(&self, a: &Mat<Rat>) -> MPoly {
        assert_eq!(a.rows, self.nvars);
        assert_eq!(a.cols, self.nvars);
        let forms: Vec<MPoly> = (0..self.nvars)
            .map(|i| {
                let mut f = MPoly::zero(self.nvars);
                for j in 0..self.nvars {
                    f = f.add(&MPoly::var(self.nvars, j).scale(a.at(i, j)));
                }
                f
            })
            .collect();
        // memoized powers per variable
        let mut pows: Vec<Vec<MPoly>> = (0..self.nvars).map(|_| Vec::new()).collect();
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut acc = MPoly::constant(self.nvars, c.clone());
            for (v, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while pows[v].len() < e as usize {
                    let next = match pows[v].last() {
                        None => forms[v].clone(),
                        Some(prev) => prev.mul(&forms[v]),
                    };
                    pows[v].push(next);
                }
                acc = acc.mul(&pows[v][e as usize - 1]);
            }
            out = out.add(&acc);
        }
        out
    }

    pub fn eval_rat(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.nvars);
        let mut pows: Vec<Vec<Rat>> = point.iter().map(|x| vec![Rat::one(), x.clone()]).collect();
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while pows[v].len() <= e as usize {
                    let nx = pows[v].last().unwrap() * &point[v];
                    pows[v].push(nx);
                }
                t *= &pows[v][e as usize];
            }
            acc += t;
        }
        acc
    }

    /// Fast integer evaluation; `None` on overflow or non-integer
    /// coefficients. Coefficients must fit `i128`.
    pub fn eval_i128(&self, point: &[i128]) -> Option<i128> {
        assert_eq!(point.len(), self.nvars);
        let mut acc: i128 = 0;
        for (m, c) in &self.terms {
            if !c.denom().is_one() {
                return None;
            }
            let mut t: i128 = c.numer().try_into().ok()?;
            for (v, &e) in m.exps.iter().enumerate() {
                for _ in 0..e {
                    t = t.checked_mul(point[v])?;
                }
            }
            acc = acc.checked_add(t)?;
        }
        Some(acc)
    }

    /// Evaluation over a prime field; rational coefficients map through
    /// modular inverse of the denominator.
    pub fn eval_fp(&self, fp: &Fp, point: &[u64]) -> u64 {
        assert_eq!(point.len(), self.nvars);
        let mut acc = 0u64;
        for (m, c) in &self.terms {
            let num = big_mod(c.numer(), fp);
            let den = big_mod(c.denom(), fp);
            let mut t = fp.mul(num, fp.inv(den));
            for (v, &e) in m.exps.iter().enumerate() {
                for _ in 0..e {
                    t = fp.mul(t, point[v]);
                }
            }
            acc = fp.add(acc, t);
        }
        acc
    }

    /// Complex floating evaluation (coefficients through `f64`).
    pub fn eval_complex(&self, point: &[num_complex::Complex64]) -> num_complex::Complex64 {
        use num_traits::ToPrimitive;
        assert_eq!(point.len(), self.nvars);
        let mut acc = num_complex::Complex64::ZERO;
        for (m, c) in &self.terms {
            let mut t = num_complex::Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (v, &e) in m.exps.iter().enumerate() {
                for _ in 0..e {
                    t *= point[v];
                }
            }
            acc += t;
        }
        acc
    }

    /// Sum of absolute coefficient values as `f64` (for residual scaling).
    pub fn coeff_norm_l1(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.terms.values().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).sum()
    }

    /// Dense coefficient list in `var`, ascending; entries are polynomials in
    /// the remaining variables (exponent zero on `var`).
    pub fn coeffs_in(&self, var: usize) -> Vec<MPoly> {
        let d = self.degree_in(var) as usize;
        let mut out = vec![MPoly::zero(self.nvars); d + 1];
        for (m, c) in &self.terms {
            let e = m.exps[var] as usize;
            let mut exps = m.exps.to_vec();
            exps[var] = 0;
            out[e].add_term(Monomial::new(exps), c.clone());
        }
        out
    }

    /// The variables actually appearing.
    pub fn used_vars(&self) -> Vec<usize> {
        let mut used = vec![false; self.nvars];
        for m in self.terms.keys() {
            for (v, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    used[v] = true;
                }
            }
        }
        used.iter().enumerate().filter_map(|(v, &u)| u.then_some(v)).collect()
    }

    /// Render with the given variable names, terms in descending graded-lex
    /// order (leading term first).
    pub fn to_string_with(&self, names: &[&str]) -> String {
        assert_eq!(names.len(), self.nvars);
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.deg == 0 {
                factors.push(rat_to_string(&abs));
            }
            for (v, &e) in m.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(names[v].to_string()),
                    _ => factors.push(format!("{}^{}", names[v], e)),
                }
            }
            let _ = write!(s, "{}", factors.join("*"));
        }
        s
    }
}

fn big_mod(x: &num_bigint::BigInt, fp: &Fp) -> u64 {
    use num_traits::ToPrimitive;
    let m = num_bigint::BigInt::from(fp.modulus());
    let r = ((x % &m) + &m) % &m;
    r.to_u64().unwrap()
}

impl Ring for MPoly {
    fn zero_like(&self) -> Self {
        MPoly::zero(self.nvars)
    }
    fn one_like(&self) -> Self {
        MPoly::one(self.nvars)
    }
    fn radd(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn rsub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn rmul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn is_zero_elem(&self) -> bool {
        MPoly::is_zero(self)
    }
}

// ---------------------------------------------------------------------------
// serde: a polynomial is a list of {"exp": [...], "coef": "num/den"} objects
// in descending graded-lex order (leading term first).
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u8>,
    coef: String,
}

impl Serialize for MPoly {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(
            self.terms
                .iter()
                .rev()
                .map(|(m, c)| TermJson { exp: m.exps.to_vec(), coef: rat_to_string(c) }),
        )
    }
}

impl<'de> Deserialize<'de> for MPoly {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let items = Vec::<TermJson>::deserialize(de)?;
        let nvars = items.first().map_or(0, |t| t.exp.len());
        let mut p = MPoly::zero(nvars);
        for t in items {
            if t.exp.len() != nvars {
                return Err(D::Error::custom("inconsistent exponent lengths"));
            }
            let c = rat_from_str(&t.coef).map_err(D::Error::custom)?;
            p.add_term(Monomial::new(t.exp), c);
        }
        Ok(p)
    }
}

// ---------------------------------------------------------------------------
// Univariate helpers over Q (dense, ascending) used by squarefree_part and
// the resultant interpolation.
// ---------------------------------------------------------------------------

fn dense_trim(v: &mut Vec<Rat>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

fn dense_deg(v: &[Rat]) -> Option<usize> {
    if v.is_empty() {
        None
    } else {
        Some(v.len() - 1)
    }
}

fn dense_monic(mut v: Vec<Rat>) -> Vec<Rat> {
    if let Some(lead) = v.last().cloned() {
        for c in &mut v {
            *c = &*c / &lead;
        }
    }
    v
}

fn dense_rem(mut a: Vec<Rat>, b: &[Rat]) -> Vec<Rat> {
    let db = dense_deg(b).expect("division by zero polynomial");
    let lead = b[db].clone();
    while dense_deg(&a).is_some_and(|da| da >= db) {
        let da = a.len() - 1;
        let f = &a[da] / &lead;
        for k in 0..=db {
            let v = &a[da - db + k] - &f * &b[k];
            a[da - db + k] = v;
        }
        a.pop(); // leading cancels exactly
        dense_trim(&mut a);
    }
    a
}

fn dense_gcd(mut a: Vec<Rat>, mut b: Vec<Rat>) -> Vec<Rat> {
    dense_trim(&mut a);
    dense_trim(&mut b);
    while !b.is_empty() {
        let r = dense_rem(a, &b);
        a = std::mem::take(&mut b);
        b = dense_monic(r);
    }
    dense_monic(a)
}

fn dense_div_exact(mut a: Vec<Rat>, b: &[Rat]) -> Vec<Rat> {
    let db = dense_deg(b).expect("division by zero polynomial");
    let lead = b[db].clone();
    let da = match dense_deg(&a) {
        None => return vec![],
        Some(d) => d,
    };
    let mut q = vec![Rat::zero(); da - db + 1];
    while let Some(d) = dense_deg(&a) {
        if d < db {
            debug_assert!(a.iter().all(|c| c.is_zero()), "inexact division");
            break;
        }
        let f = &a[d] / &lead;
        q[d - db] = f.clone();
        for k in 0..=db {
            let v = &a[d - db + k] - &f * &b[k];
            a[d - db + k] = v;
        }
        a.pop();
        dense_trim(&mut a);
    }
    q
}

/// Dense ascending coefficients of a polynomial using at most one variable.
/// Returns `(var_index_or_none, coeffs)`.
pub fn to_dense_univariate(p: &MPoly) -> Result<(Option<usize>, Vec<Rat>), Error> {
    let used = p.used_vars();
    if used.len() > 1 {
        return Err(Error::Domain(format!(
            "expected a univariate polynomial, found {} variables",
            used.len()
        )));
    }
    let var = used.first().copied();
    match var {
        None => {
            let c = p.coeff(&vec![0; p.nvars()]);
            Ok((None, if c.is_zero() { vec![] } else { vec![c] }))
        }
        Some(v) => {
            let mut out = vec![Rat::zero(); p.degree_in(v) as usize + 1];
            for (m, c) in p.terms() {
                out[m.exps()[v] as usize] = c.clone();
            }
            Ok((Some(v), out))
        }
    }
}

fn dense_to_mpoly(nvars: usize, var: usize, coeffs: &[Rat]) -> MPoly {
    let mut p = MPoly::zero(nvars);
    for (e, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            let mut exps = vec![0u8; nvars];
            exps[var] = e as u8;
            p.add_term(Monomial::new(exps), c.clone());
        }
    }
    p
}

/// Squarefree part `p / gcd(p, p')` of a univariate polynomial, returned
/// monic.
pub fn squarefree_part(p: &MPoly) -> Result<MPoly, Error> {
    if p.is_zero() {
        return Err(Error::Domain("squarefree part of the zero polynomial".into()));
    }
    let (var, coeffs) = to_dense_univariate(p)?;
    let Some(var) = var else {
        return Ok(MPoly::one(p.nvars()));
    };
    let deriv: Vec<Rat> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(e, c)| c * Rat::from_integer(e.into()))
        .collect();
    let mut d = deriv;
    dense_trim(&mut d);
    let g = if d.is_empty() { dense_monic(coeffs.clone()) } else { dense_gcd(coeffs.clone(), d) };
    let sf = dense_monic(dense_div_exact(coeffs, &g));
    Ok(dense_to_mpoly(p.nvars(), var, &sf))
}

// ---------------------------------------------------------------------------
// Resultants
// ---------------------------------------------------------------------------

/// Sylvester-style resultant of `f` and `g` with respect to variable `elim`.
///
/// When exactly one other variable survives, the resultant is computed by
/// evaluating at `deg(f)*deg(g) + 1` integer points of that variable and
/// interpolating exactly; otherwise (small inputs with several parameters)
/// the symbolic Sylvester determinant is expanded directly.
pub fn resultant(f: &MPoly, g: &MPoly, elim: usize) -> Result<MPoly, Error> {
    if f.is_zero() || g.is_zero() {
        return Err(Error::Domain("resultant of a zero polynomial".into()));
    }
    let df = f.degree_in(elim) as usize;
    let dg = g.degree_in(elim) as usize;
    if df == 0 || dg == 0 {
        return Err(Error::Domain("both inputs must involve the eliminated variable".into()));
    }
    let mut others: Vec<usize> = f.used_vars();
    others.extend(g.used_vars());
    others.retain(|&v| v != elim);
    others.sort_unstable();
    others.dedup();

    let fc = f.coeffs_in(elim);
    let gc = g.coeffs_in(elim);

    match others.len() {
        0 => {
            // constant resultant: evaluate the numeric Sylvester determinant
            let fe: Vec<Rat> = fc.iter().map(|p| p.coeff(&vec![0; f.nvars()])).collect();
            let ge: Vec<Rat> = gc.iter().map(|p| p.coeff(&vec![0; g.nvars()])).collect();
            let d = sylvester_det_rat(&fe, &ge)?;
            Ok(MPoly::constant(f.nvars(), d))
        }
        1 => {
            let y = others[0];
            let bound = (f.total_degree() * g.total_degree()) as usize;
            let mut xs = Vec::with_capacity(bound + 1);
            let mut ys = Vec::with_capacity(bound + 1);
            for t in 0..=bound as i64 {
                let x = Rat::from_integer(t.into());
                let fe: Vec<Rat> = fc.iter().map(|p| univar_eval(p, y, &x)).collect();
                let ge: Vec<Rat> = gc.iter().map(|p| univar_eval(p, y, &x)).collect();
                ys.push(sylvester_det_rat(&fe, &ge)?);
                xs.push(x);
            }
            let coeffs = lagrange_interpolate(&xs, &ys);
            Ok(dense_to_mpoly(f.nvars(), y, &coeffs))
        }
        _ => {
            // several surviving parameters: expand the symbolic determinant
            let n = df + dg;
            if n > 5 {
                return Err(Error::Domain(
                    "symbolic resultant limited to Sylvester size 5; use one surviving variable"
                        .into(),
                ));
            }
            let zero = MPoly::zero(f.nvars());
            let mut rows: Vec<Vec<MPoly>> = Vec::with_capacity(n);
            for s in 0..dg {
                let mut row = vec![zero.clone(); n];
                for (k, c) in fc.iter().rev().enumerate() {
                    row[s + k] = c.clone();
                }
                rows.push(row);
            }
            for s in 0..df {
                let mut row = vec![zero.clone(); n];
                for (k, c) in gc.iter().rev().enumerate() {
                    row[s + k] = c.clone();
                }
                rows.push(row);
            }
            let res = Mat::from_rows(rows).det_cofactor()?;
            Ok(res)
        }
    }
}

fn univar_eval(p: &MPoly, var: usize, x: &Rat) -> Rat {
    // p uses only `var`
    let mut acc = Rat::zero();
    for (m, c) in p.terms() {
        let e = m.exps()[var] as usize;
        let mut t = c.clone();
        for _ in 0..e {
            t *= x;
        }
        acc += t;
    }
    acc
}

/// Determinant of the Sylvester matrix of two dense coefficient lists
/// (ascending order, possibly with vanishing leading entries — the matrix is
/// built at the nominal degrees `len-1`).
fn sylvester_det_rat(f: &[Rat], g: &[Rat]) -> Result<Rat, Error> {
    let df = f.len() - 1;
    let dg = g.len() - 1;
    let n = df + dg;
    if n == 0 {
        return Ok(Rat::one());
    }
    let mut m = Mat::zero(n, n);
    for s in 0..dg {
        for (k, c) in f.iter().rev().enumerate() {
            m.set(s, s + k, c.clone());
        }
    }
    for s in 0..df {
        for (k, c) in g.iter().rev().enumerate() {
            m.set(dg + s, s + k, c.clone());
        }
    }
    m.det_exact()
}

/// Exact Lagrange interpolation through distinct rational nodes.
fn lagrange_interpolate(xs: &[Rat], ys: &[Rat]) -> Vec<Rat> {
    let n = xs.len();
    let mut acc = vec![Rat::zero(); n];
    for i in 0..n {
        if ys[i].is_zero() {
            continue;
        }
        // numerator polynomial prod_{j != i} (x - x_j)
        let mut num = vec![Rat::one()];
        let mut denom = Rat::one();
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut next = vec![Rat::zero(); num.len() + 1];
            for (k, c) in num.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &xs[j];
            }
            num = next;
            denom *= &xs[i] - &xs[j];
        }
        let w = &ys[i] / denom;
        for (k, c) in num.iter().enumerate() {
            acc[k] += c * &w;
        }
    }
    dense_trim(&mut acc);
    acc
}

// ---------------------------------------------------------------------------
// Parsing: integer/rational coefficients, `*` products, `^` powers.
// ---------------------------------------------------------------------------

/// Parse expressions like `p1^2 - 4*p0*p2` or `3/2*x*y - y^3`.
pub fn parse_mpoly(input: &str, names: &[&str]) -> Result<MPoly, Error> {
    let nvars = names.len();
    let mut out = MPoly::zero(nvars);
    let s: Vec<char> = input.chars().collect();
    let mut i = 0usize;
    let n = s.len();
    let skip_ws = |i: &mut usize| {
        while *i < n && s[*i].is_whitespace() {
            *i += 1;
        }
    };
    let mut first = true;
    loop {
        skip_ws(&mut i);
        if i == n {
            if first {
                return Err(Error::Parse("empty polynomial".into()));
            }
            break;
        }
        // sign
        let mut negative = false;
        if s[i] == '+' || s[i] == '-' {
            negative = s[i] == '-';
            i += 1;
        } else if !first {
            return Err(Error::Parse(format!("expected '+' or '-' at offset {i}")));
        }
        first = false;
        // factors separated by '*'
        let mut coef = Rat::one();
        let mut exps = vec![0u8; nvars];
        let mut expect_factor = true;
        while expect_factor {
            skip_ws(&mut i);
            if i == n {
                return Err(Error::Parse("dangling '*'".into()));
            }
            if s[i].is_ascii_digit() {
                let start = i;
                while i < n && (s[i].is_ascii_digit() || s[i] == '/') {
                    i += 1;
                }
                let tok: String = s[start..i].iter().collect();
                coef *= rat_from_str(&tok)?;
            } else if s[i].is_alphabetic() || s[i] == '_' {
                let start = i;
                while i < n && (s[i].is_alphanumeric() || s[i] == '_') {
                    i += 1;
                }
                let tok: String = s[start..i].iter().collect();
                let var = names
                    .iter()
                    .position(|&v| v == tok)
                    .ok_or_else(|| Error::Parse(format!("unknown variable `{tok}`")))?;
                let mut power = 1u32;
                skip_ws(&mut i);
                if i < n && s[i] == '^' {
                    i += 1;
                    skip_ws(&mut i);
                    let start = i;
                    while i < n && s[i].is_ascii_digit() {
                        i += 1;
                    }
                    if start == i {
                        return Err(Error::Parse("missing exponent after '^'".into()));
                    }
                    let tok: String = s[start..i].iter().collect();
                    power = tok.parse().map_err(|_| Error::Parse("bad exponent".into()))?;
                }
                if power > u8::MAX as u32 {
                    return Err(Error::Parse("exponent too large".into()));
                }
                exps[var] += power as u8;
            } else {
                return Err(Error::Parse(format!("unexpected character `{}` at {i}", s[i])));
            }
            skip_ws(&mut i);
            if i < n && s[i] == '*' {
                i += 1;
                expect_factor = true;
            } else {
                expect_factor = false;
            }
        }
        if negative {
            coef = -coef;
        }
        out.add_term(Monomial::new(exps), coef);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, rat};
    use proptest::prelude::*;

    fn xy() -> (MPoly, MPoly) {
        (MPoly::var(2, 0), MPoly::var(2, 1))
    }

    #[test]
    fn grlex_leading_term() {
        // x^2 > x*y ... no wait, same degree: x^2 has exps (2,0), x*y (1,1):
        // (2,0) > (1,1) lexicographically, so x^2 leads.
        let (x, y) = xy();
        let p = x.mul(&y).add(&x.pow(2)).add(&y.pow(3));
        // total degrees: 2, 2, 3 -> leading term is y^3
        let lead = p.terms().next_back().unwrap().0.clone();
        assert_eq!(lead.exps(), &[0, 3]);
        assert_eq!(p.to_string_with(&["x", "y"]), "y^3 + x^2 + x*y");
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let (x, y) = xy();
        let a = x.add(&y);
        let b = x.sub(&y);
        let prod = a.mul(&b);
        assert_eq!(prod, x.pow(2).sub(&y.pow(2)));
        assert_eq!(a.sub(&a).num_terms(), 0);
    }

    #[test]
    fn exact_div_examples() {
        let (x, y) = xy();
        // (x^2 - y^2) / (x - y) = x + y
        let f = x.pow(2).sub(&y.pow(2));
        let g = x.sub(&y);
        assert_eq!(f.exact_div(&g).unwrap(), x.add(&y));
        // x + 1 not divisible by y
        let f = x.add(&MPoly::one(2));
        assert!(matches!(f.exact_div(&y), Err(Error::Divisibility { .. })));
    }

    #[test]
    fn divisibility_error_reports_first_offender() {
        let (x, y) = xy();
        let f = x.pow(3).add(&y);
        match f.exact_div(&x.pow(2)) {
            Err(Error::Divisibility { term }) => assert!(!term.is_empty()),
            other => panic!("expected divisibility error, got {other:?}"),
        }
    }

    #[test]
    fn substitute_and_derivative() {
        let (x, y) = xy();
        let f = x.pow(2).mul(&y).add(&x.scale(&rat(3)));
        assert_eq!(f.derivative(0), x.mul(&y).scale(&rat(2)).add(&MPoly::constant(2, rat(3))));
        let g = f.substitute_value(0, &rat(2));
        assert_eq!(g, y.scale(&rat(4)).add(&MPoly::constant(2, rat(6))));
    }

    #[test]
    fn eval_paths_agree() {
        let (x, y) = xy();
        let f = x.pow(3).sub(&x.mul(&y).scale(&rat(7))).add(&MPoly::constant(2, rat(5)));
        let p = [rat(3), rat(-2)];
        let exact = f.eval_rat(&p);
        assert_eq!(exact, rat(27 + 42 + 5));
        assert_eq!(f.eval_i128(&[3, -2]), Some(27 + 42 + 5));
        let fp = Fp::default();
        let got = f.eval_fp(&fp, &[3, fp.reduce_i64(-2)]);
        assert_eq!(got, 74);
    }

    #[test]
    fn squarefree_examples() {
        let nvars = 1;
        let x = MPoly::var(nvars, 0);
        let lin1 = x.sub(&MPoly::one(nvars)); // x - 1
        let lin2 = x.add(&MPoly::constant(nvars, rat(2))); // x + 2
        let p = lin1.pow(2).mul(&lin2);
        let sf = squarefree_part(&p).unwrap();
        assert_eq!(sf, lin1.mul(&lin2)); // already monic
        let sf2 = squarefree_part(&lin1.mul(&lin2)).unwrap();
        assert_eq!(sf2, lin1.mul(&lin2));
        assert!(squarefree_part(&MPoly::zero(1)).is_err());
    }

    #[test]
    fn resultant_substitution_example() {
        // res_x(x^2 - y, x - 1) = 1 - y
        let (x, y) = xy();
        let f = x.pow(2).sub(&y);
        let g = x.sub(&MPoly::one(2));
        let r = resultant(&f, &g, 0).unwrap();
        assert_eq!(r, MPoly::one(2).sub(&y));
    }

    #[test]
    fn resultant_two_parameters() {
        // res_x(x - a, x - b) = a - b, three variables total
        let x = MPoly::var(3, 0);
        let a = MPoly::var(3, 1);
        let b = MPoly::var(3, 2);
        let r = resultant(&x.sub(&a), &x.sub(&b), 0).unwrap();
        assert_eq!(r, a.sub(&b));
    }

    #[test]
    fn resultant_rejects_bad_inputs() {
        let (x, y) = xy();
        assert!(resultant(&MPoly::zero(2), &x, 0).is_err());
        assert!(resultant(&y, &x, 0).is_err()); // y does not involve x
    }

    #[test]
    fn resultant_matches_symbolic_sylvester() {
        // random quadric/cubic pair in (x, y): eval/interpolate path vs the
        // symbolic Sylvester determinant over the polynomial ring.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..5 {
            let mut rand_poly = |deg: u8| {
                let mut p = MPoly::zero(2);
                for ex in 0..=deg {
                    for ey in 0..=(deg - ex) {
                        let c = rat(rng.random_range(-5..=5));
                        p = p.add(&MPoly::from_terms(2, [(vec![ex, ey], c)]));
                    }
                }
                p
            };
            let f = rand_poly(2);
            let g = rand_poly(3);
            if f.degree_in(0) == 0 || g.degree_in(0) == 0 {
                continue;
            }
            let via_interp = resultant(&f, &g, 0).unwrap();
            // symbolic Sylvester with MPoly entries
            let fc = f.coeffs_in(0);
            let gc = g.coeffs_in(0);
            let n = fc.len() - 1 + gc.len() - 1;
            let zero = MPoly::zero(2);
            let mut rows = Vec::new();
            for s in 0..gc.len() - 1 {
                let mut row = vec![zero.clone(); n];
                for (k, c) in fc.iter().rev().enumerate() {
                    row[s + k] = c.clone();
                }
                rows.push(row);
            }
            for s in 0..fc.len() - 1 {
                let mut row = vec![zero.clone(); n];
                for (k, c) in gc.iter().rev().enumerate() {
                    row[s + k] = c.clone();
                }
                rows.push(row);
            }
            let direct = Mat::from_rows(rows).det_cofactor().unwrap();
            assert_eq!(via_interp, direct, "trial {trial}");
            assert!(via_interp.total_degree() <= f.total_degree() * g.total_degree());
        }
    }

    #[test]
    fn parse_and_print() {
        let names = ["p0", "p1", "p2"];
        let f = parse_mpoly("p1^2 - 4*p0*p2", &names).unwrap();
        assert_eq!(f.num_terms(), 2);
        // canonical descending graded lex: p0*p2 beats p1^2 on the first variable
        assert_eq!(f.to_string_with(&names), "-4*p0*p2 + p1^2");
        let g = parse_mpoly("-p0 + 3/2*p1", &names).unwrap();
        assert_eq!(g.coeff(&[1, 0, 0]), rat(-1));
        assert_eq!(g.coeff(&[0, 1, 0]), frac(3, 2));
        assert!(parse_mpoly("p9", &names).is_err());
        assert!(parse_mpoly("", &names).is_err());
    }

    #[test]
    fn json_roundtrip_is_graded_lex_sorted() {
        let names = ["x", "y"];
        let f = parse_mpoly("x^2 + y^3 - 2*x*y", &names).unwrap();
        let js = serde_json::to_string(&f).unwrap();
        let back: MPoly = serde_json::from_str(&js).unwrap();
        assert_eq!(back, f);
        // leading term (y^3) first
        let v: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(v[0]["exp"], serde_json::json!([0, 3]));
    }

    proptest! {
        #[test]
        fn prop_exact_div_roundtrip(
            a in proptest::collection::vec((-4i64..=4, 0u8..3, 0u8..3), 1..6),
            b in proptest::collection::vec((-4i64..=4, 0u8..3, 0u8..3), 1..6),
        ) {
            let build = |ts: Vec<(i64, u8, u8)>| {
                MPoly::from_terms(2, ts.into_iter().map(|(c, e1, e2)| (vec![e1, e2], rat(c))))
            };
            let f = build(a);
            let g = build(b);
            prop_assume!(!f.is_zero() && !g.is_zero());
            let prod = f.mul(&g);
            let q = prod.exact_div(&g).unwrap();
            prop_assert_eq!(q, f);
        }

        #[test]
        fn prop_resultant_eval_consistency(y0 in -6i64..6) {
            // res_x(f, g)(y0) equals the univariate resultant of the
            // evaluated pair when leading coefficients survive.
            let names = ["x", "y"];
            let f = parse_mpoly("x^2 + y*x - 1", &names).unwrap();
            let g = parse_mpoly("2*x - y^2 + 3", &names).unwrap();
            let r = resultant(&f, &g, 0).unwrap();
            let y0r = rat(y0);
            let rv = r.substitute_value(1, &y0r).coeff(&[0, 0]);
            let fe: Vec<Rat> = f.substitute_value(1, &y0r).coeffs_in(0)
                .iter().map(|p| p.coeff(&[0, 0])).collect();
            let ge: Vec<Rat> = g.substitute_value(1, &y0r).coeffs_in(0)
                .iter().map(|p| p.coeff(&[0, 0])).collect();
            let direct = sylvester_det_rat(&fe, &ge).unwrap();
            prop_assert_eq!(rv, direct);
        }
    }
}
