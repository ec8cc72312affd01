//! Dense matrices over exact rationals, polynomials or complex floats.
//!
//! Exact determinants over [`Rat`] use fraction-free Bareiss elimination on a
//! denominator-cleared integer copy; symbolic determinants (entries of type
//! [`MPoly`](crate::mpoly::MPoly)) go through expansion by minors with shared
//! sub-minor memoization and are intended for sizes up to five.

use crate::error::Error;
use crate::rat::Rat;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::collections::HashMap;

/// Minimal commutative-ring surface needed by the generic kernels.
///
/// `zero_like`/`one_like` take a template so that types carrying context
/// (polynomials with a fixed variable count) can produce compatible
/// constants.
pub trait Ring: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn radd(&self, o: &Self) -> Self;
    fn rsub(&self, o: &Self) -> Self;
    fn rmul(&self, o: &Self) -> Self;
    fn is_zero_elem(&self) -> bool;
}

impl Ring for Rat {
    fn zero_like(&self) -> Self {
        Rat::zero()
    }
    fn one_like(&self) -> Self {
        Rat::one()
    }
    fn radd(&self, o: &Self) -> Self {
        self + o
    }
    fn rsub(&self, o: &Self) -> Self {
        self - o
    }
    fn rmul(&self, o: &Self) -> Self {
        self * o
    }
    fn is_zero_elem(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// Row-major rectangular matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T> Mat<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must match shape");
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Mat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl Mat<Rat> {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![Rat::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = Rat::one();
        }
        Mat { rows: n, cols: n, data }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }
}

impl<T: Ring> Mat<T> {
    /// Matrix product.
    pub fn mul_mat(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let template = self
            .data
            .first()
            .or_else(|| other.data.first())
            .expect("empty matrix product");
        let zero = template.zero_like();
        let mut data = vec![zero; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero_elem() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.rmul(other.at(k, j));
                    let cell = &mut data[i * other.cols + j];
                    *cell = cell.radd(&prod);
                }
            }
        }
        Mat { rows: self.rows, cols: other.cols, data }
    }

    pub fn sub_mat(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.rsub(b)).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    /// Determinant by expansion along the first remaining row, memoizing on
    /// the set of surviving columns. Exponential in `n`; meant for `n <= 5`.
    pub fn det_cofactor(&self) -> Result<T, Error> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Err(Error::Dimension("determinant of an empty matrix".into()));
        }
        let template = &self.data[0];
        let mut memo: HashMap<u32, T> = HashMap::new();
        Ok(self.det_minor((1u32 << n) - 1, &mut memo, template))
    }

    fn det_minor(&self, colmask: u32, memo: &mut HashMap<u32, T>, template: &T) -> T {
        if let Some(v) = memo.get(&colmask) {
            return v.clone();
        }
        let n = self.rows;
        let k = colmask.count_ones() as usize;
        let row = n - k; // rows 0..row already consumed
        let mut acc = template.zero_like();
        let mut sign_pos = true;
        for c in 0..n {
            if colmask & (1 << c) == 0 {
                continue;
            }
            let entry = self.at(row, c);
            if !entry.is_zero_elem() {
                let sub = if k == 1 {
                    template.one_like()
                } else {
                    self.det_minor(colmask & !(1 << c), memo, template)
                };
                let prod = entry.rmul(&sub);
                acc = if sign_pos { acc.radd(&prod) } else { acc.rsub(&prod) };
            }
            sign_pos = !sign_pos;
        }
        memo.insert(colmask, acc.clone());
        acc
    }

    /// Adjugate matrix: `M · adj(M) = det(M) · I`, defined for singular `M`
    /// as well. Cofactor construction, so symbolic entries are fine.
    pub fn adjugate(&self) -> Result<Mat<T>, Error> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "adjugate of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let template = &self.data[0];
        if n == 1 {
            return Ok(Mat { rows: 1, cols: 1, data: vec![template.one_like()] });
        }
        let mut data = vec![template.zero_like(); n * n];
        for i in 0..n {
            for j in 0..n {
                let minor = self.delete_row_col(i, j);
                let d = minor.det_cofactor()?;
                let signed = if (i + j) % 2 == 0 { d } else { template.zero_like().rsub(&d) };
                // adj(M)[j][i] = (-1)^{i+j} * minor_{ij}
                data[j * n + i] = signed;
            }
        }
        Ok(Mat { rows: n, cols: n, data })
    }

    fn delete_row_col(&self, row: usize, col: usize) -> Mat<T> {
        let n = self.rows;
        let mut data = Vec::with_capacity((n - 1) * (n - 1));
        for i in 0..n {
            if i == row {
                continue;
            }
            for j in 0..n {
                if j == col {
                    continue;
                }
                data.push(self.at(i, j).clone());
            }
        }
        Mat { rows: n - 1, cols: n - 1, data }
    }
}

impl Mat<Rat> {
    /// Exact determinant via fraction-free Bareiss elimination on the
    /// denominator-cleared integer matrix.
    pub fn det_exact(&self) -> Result<Rat, Error> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Err(Error::Dimension("determinant of an empty matrix".into()));
        }
        // clear denominators row by row
        let mut scale = Rat::one();
        let mut m: Vec<BigInt> = Vec::with_capacity(n * n);
        for i in 0..n {
            let mut l = BigInt::one();
            for j in 0..n {
                l = l.lcm(self.at(i, j).denom());
            }
            for j in 0..n {
                let e = self.at(i, j);
                m.push(e.numer() * (&l / e.denom()));
            }
            scale *= Rat::from_integer(l);
        }
        let d = bareiss_det(&mut m, n);
        Ok(Rat::from_integer(d) / scale)
    }

    pub fn transpose(&self) -> Mat<Rat> {
        let mut out = Mat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).clone());
            }
        }
        out
    }

    /// Basis of the right kernel `{x : M x = 0}` over the rationals.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        let (rows, cols) = (self.rows, self.cols);
        let mut m: Vec<Rat> = self.data.clone();
        let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
        let mut row = 0;
        for col in 0..cols {
            if row == rows {
                break;
            }
            let Some(piv) = (row..rows).find(|&r| !m[r * cols + col].is_zero()) else { continue };
            for j in 0..cols {
                m.swap(row * cols + j, piv * cols + j);
            }
            let inv = m[row * cols + col].recip();
            for j in col..cols {
                let v = &m[row * cols + j] * &inv;
                m[row * cols + j] = v;
            }
            for r in 0..rows {
                if r != row && !m[r * cols + col].is_zero() {
                    let f = m[r * cols + col].clone();
                    for j in col..cols {
                        let v = &m[r * cols + j] - &f * &m[row * cols + j];
                        m[r * cols + j] = v;
                    }
                }
            }
            pivot_of_col[col] = Some(row);
            row += 1;
        }
        let mut basis = Vec::new();
        for free in 0..cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut v = vec![Rat::zero(); cols];
            v[free] = Rat::one();
            for col in 0..cols {
                if let Some(pr) = pivot_of_col[col] {
                    v[col] = -m[pr * cols + free].clone();
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Rank by Gaussian elimination over the rationals.
    pub fn rank_exact(&self) -> usize {
        let mut m: Vec<Rat> = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        let mut row = 0;
        for col in 0..cols {
            if row == rows {
                break;
            }
            let piv = (row..rows).find(|&r| !m[r * cols + col].is_zero());
            let Some(piv) = piv else { continue };
            for j in 0..cols {
                m.swap(row * cols + j, piv * cols + j);
            }
            let inv = m[row * cols + col].recip();
            for j in col..cols {
                let v = &m[row * cols + j] * &inv;
                m[row * cols + j] = v;
            }
            for r in row + 1..rows {
                let f = m[r * cols + col].clone();
                if !f.is_zero() {
                    for j in col..cols {
                        let v = &m[r * cols + j] - &f * &m[row * cols + j];
                        m[r * cols + j] = v;
                    }
                }
            }
            row += 1;
            rank += 1;
        }
        rank
    }
}

/// Bareiss determinant of an integer matrix (consumed in place).
fn bareiss_det(m: &mut [BigInt], n: usize) -> BigInt {
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k * n + k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !m[r * n + k].is_zero()) else {
                return BigInt::zero();
            };
            for j in 0..n {
                m.swap(k * n + j, swap * n + j);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i * n + j] * &m[k * n + k] - &m[i * n + k] * &m[k * n + j];
                m[i * n + j] = &num / &prev; // exact by Bareiss
            }
            m[i * n + k] = BigInt::zero();
        }
        prev = m[k * n + k].clone();
    }
    let d = m[(n - 1) * n + (n - 1)].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Solve the complex square system `A x = b` by LU with partial pivoting.
/// Returns `None` when a pivot falls below `tiny`.
pub fn solve_complex(a: &Mat<Complex64>, b: &[Complex64], tiny: f64) -> Option<Vec<Complex64>> {
    assert!(a.is_square());
    let n = a.rows;
    assert_eq!(b.len(), n);
    let mut lu = a.data.clone();
    let mut x: Vec<Complex64> = b.to_vec();
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|r| (r, lu[r * n + k].norm_sqr()))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        if mag.sqrt() < tiny {
            return None;
        }
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        let pivot = lu[k * n + k];
        for r in k + 1..n {
            let f = lu[r * n + k] / pivot;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            lu[r * n + k] = f;
            for j in k + 1..n {
                let sub = f * lu[k * n + j];
                lu[r * n + j] -= sub;
            }
            let sub = f * x[k];
            x[r] -= sub;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= lu[k * n + j] * x[j];
        }
        x[k] = s / lu[k * n + k];
    }
    Some(x)
}
