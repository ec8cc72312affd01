//! Arithmetic and linear algebra over a prime field F_p.
//!
//! The default modulus is the Mersenne prime 2^61 − 1, large enough that
//! randomised rank estimates collide with negligible probability and small
//! enough that products fit double-word multiplication. A non-Mersenne
//! modulus is supported through the generic reduction path.

use rand::Rng;
use rayon::prelude::*;

/// Default prime modulus, 2^61 − 1.
pub const DEFAULT_PRIME: u64 = 2_305_843_009_213_693_951;

/// A prime field context. Elements are plain `u64` values in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fp {
    p: u64,
}

impl Default for Fp {
    fn default() -> Self {
        Fp::new(DEFAULT_PRIME)
    }
}

impl Fp {
    pub fn new(p: u64) -> Self {
        assert!(p > 2 && p < (1 << 62), "modulus out of range");
        Fp { p }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u64 {
        let r = x.rem_euclid(self.p as i64);
        r as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let wide = a as u128 * b as u128;
        if self.p == DEFAULT_PRIME {
            // Mersenne reduction for p = 2^61 - 1.
            let lo = (wide & ((1u128 << 61) - 1)) as u64;
            let hi = (wide >> 61) as u64;
            let mut s = lo.wrapping_add(hi);
            if s >= self.p {
                s -= self.p;
            }
            // hi < 2^67/2^61 could overflow one more carry for large inputs
            if s >= self.p {
                s -= self.p;
            }
            s
        } else {
            (wide % self.p as u128) as u64
        }
    }

    /// Fused multiply-add `acc + a*b mod p`.
    #[inline]
    pub fn mac(&self, acc: u64, a: u64, b: u64) -> u64 {
        self.add(acc, self.mul(a, b))
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat. Panics on zero.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    pub fn rand_elem<R: Rng>(&self, rng: &mut R) -> u64 {
        rng.random_range(0..self.p)
    }
}

/// Dense row-major matrix over F_p.
#[derive(Debug, Clone)]
pub struct FpMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl FpMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        FpMat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row);
        }
        FpMat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn random<R: Rng>(fp: &Fp, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| fp.rand_elem(rng)).collect();
        FpMat { rows, cols, data }
    }

    /// Random invertible square matrix (resamples until nonsingular).
    pub fn random_invertible<R: Rng>(fp: &Fp, n: usize, rng: &mut R) -> Self {
        loop {
            let m = Self::random(fp, n, n, rng);
            if rank_mod_p(fp, m.clone()) == n {
                return m;
            }
        }
    }
}

/// Rank by in-place Gaussian elimination over F_p. Consumes the matrix.
///
/// Row updates below the pivot run in parallel, which matters for the
/// evaluation matrices of several thousand rows used by the span-dimension
/// checks.
pub fn rank_mod_p(fp: &Fp, mut m: FpMat) -> usize {
    let (rows, cols) = (m.rows, m.cols);
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..cols {
        if row == rows {
            break;
        }
        // find pivot
        let mut piv = None;
        for r in row..rows {
            if m.at(r, col) != 0 {
                piv = Some(r);
                break;
            }
        }
        let Some(piv) = piv else { continue };
        m.data.swap_chunks(row, piv, cols);
        let inv = fp.inv(m.at(row, col));
        // normalise pivot row from `col` on
        {
            let start = row * cols;
            for x in &mut m.data[start + col..start + cols] {
                *x = fp.mul(*x, inv);
            }
        }
        let (head, tail) = m.data.split_at_mut((row + 1) * cols);
        let pivot_row = &head[row * cols..row * cols + cols];
        tail.par_chunks_mut(cols).for_each(|target| {
            let f = target[col];
            if f != 0 {
                let fneg = fp.neg(f);
                for (t, pv) in target[col..].iter_mut().zip(&pivot_row[col..]) {
                    *t = fp.mac(*t, fneg, *pv);
                }
            }
        });
        row += 1;
        rank += 1;
    }
    rank
}

trait SwapChunks {
    fn swap_chunks(&mut self, a: usize, b: usize, width: usize);
}

impl SwapChunks for Vec<u64> {
    fn swap_chunks(&mut self, a: usize, b: usize, width: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (first, second) = self.split_at_mut(hi * width);
        first[lo * width..lo * width + width].swap_with_slice(&mut second[..width]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn field_ops() {
        let fp = Fp::default();
        let p = fp.modulus();
        assert_eq!(fp.add(p - 1, 1), 0);
        assert_eq!(fp.sub(0, 1), p - 1);
        assert_eq!(fp.mul(p - 1, p - 1), 1); // (-1)^2
        let a = 123_456_789_u64;
        assert_eq!(fp.mul(a, fp.inv(a)), 1);
        assert_eq!(fp.pow(3, 0), 1);
    }

    #[test]
    fn mul_matches_generic_path() {
        let mersenne = Fp::default();
        let generic = Fp::new(1_000_000_007);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let a = mersenne.rand_elem(&mut rng);
            let b = mersenne.rand_elem(&mut rng);
            let want = (a as u128 * b as u128 % mersenne.modulus() as u128) as u64;
            assert_eq!(mersenne.mul(a, b), want);
            let a2 = a % generic.modulus();
            let b2 = b % generic.modulus();
            let want2 = (a2 as u128 * b2 as u128 % generic.modulus() as u128) as u64;
            assert_eq!(generic.mul(a2, b2), want2);
        }
    }

    #[test]
    fn rank_identity_and_outer_product() {
        let fp = Fp::default();
        let mut id = FpMat::zero(7, 7);
        for i in 0..7 {
            id.set(i, i, 1);
        }
        assert_eq!(rank_mod_p(&fp, id), 7);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u: Vec<u64> = (0..9).map(|_| fp.rand_elem(&mut rng)).collect();
        let v: Vec<u64> = (0..11).map(|_| fp.rand_elem(&mut rng)).collect();
        let mut outer = FpMat::zero(9, 11);
        for i in 0..9 {
            for j in 0..11 {
                outer.set(i, j, fp.mul(u[i], v[j]));
            }
        }
        assert_eq!(rank_mod_p(&fp, outer), 1);
    }

    #[test]
    fn rank_random_full() {
        let fp = Fp::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = FpMat::random(&fp, 200, 200, &mut rng);
        assert_eq!(rank_mod_p(&fp, m), 200);
    }

    #[test]
    fn rank_agrees_with_exact_rational_rank_on_lifts() {
        use crate::mat::Mat;
        use crate::rat::rat;
        let fp = Fp::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..10 {
            // random small-integer matrix, sometimes forced rank-deficient
            let n = 20;
            let mut rows: Vec<Vec<i64>> =
                (0..n).map(|_| (0..n).map(|_| rng.random_range(-50..=50)).collect()).collect();
            if trial % 2 == 0 {
                // overwrite some rows with combinations of earlier ones
                for r in n - 4..n {
                    let a = rng.random_range(0..n - 4);
                    let b = rng.random_range(0..n - 4);
                    rows[r] = (0..n).map(|c| rows[a][c] + 2 * rows[b][c]).collect();
                }
            }
            let exact = Mat::from_rows(
                rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect(),
            )
            .rank_exact();
            let m = FpMat::from_rows(
                rows.iter()
                    .map(|r| r.iter().map(|&x| fp.reduce_i64(x)).collect())
                    .collect(),
            );
            assert_eq!(rank_mod_p(&fp, m), exact, "trial {trial}");
        }
    }

    #[test]
    fn random_invertible_is_invertible() {
        let fp = Fp::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = FpMat::random_invertible(&fp, 4, &mut rng);
        assert_eq!(rank_mod_p(&fp, g), 4);
    }
}
