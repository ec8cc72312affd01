//! Three-way tables of exact rationals and their low-rank parametrisations.
//!
//! A rank-`r` table is synthesised from factor matrices `rho`, `sigma`,
//! `theta` (one row per hidden state) as
//! `p[i][j][k] = sum_l rho[l][i] * sigma[l][j] * theta[l][k]`.

use crate::error::Error;
use crate::mat::Mat;
use crate::rat::{rat, Rat};
use crate::rng::stream;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Dense `d1 x d2 x d3` array, row-major: `(i,j,k) -> i*d2*d3 + j*d3 + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3 {
    pub dims: (usize, usize, usize),
    #[serde(with = "crate::rat::serde_rat_vec")]
    pub entries: Vec<Rat>,
}

impl Table3 {
    pub fn new(dims: (usize, usize, usize), entries: Vec<Rat>) -> Result<Self, Error> {
        if entries.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::Dimension(format!(
                "expected {} entries for dims {:?}, got {}",
                dims.0 * dims.1 * dims.2,
                dims,
                entries.len()
            )));
        }
        Ok(Table3 { dims, entries })
    }

    pub fn zero(dims: (usize, usize, usize)) -> Self {
        Table3 { dims, entries: vec![Rat::zero(); dims.0 * dims.1 * dims.2] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> &Rat {
        &self.entries[(i * self.dims.1 + j) * self.dims.2 + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Rat) {
        self.entries[(i * self.dims.1 + j) * self.dims.2 + k] = v;
    }

    /// Two-way slice fixing one axis (axes are 1, 2, 3). For axis 1 the
    /// result has entry `(j, k) = p[index][j][k]`, and cyclically for the
    /// others: axis 2 gives `(i, k)`, axis 3 gives `(i, j)`.
    pub fn slice(&self, axis: usize, index: usize) -> Result<Mat<Rat>, Error> {
        let (d1, d2, d3) = self.dims;
        let check = |limit: usize| {
            if index >= limit {
                Err(Error::Dimension(format!("slice index {index} out of range for axis {axis}")))
            } else {
                Ok(())
            }
        };
        match axis {
            1 => {
                check(d1)?;
                let mut m = Mat::zero(d2, d3);
                for j in 0..d2 {
                    for k in 0..d3 {
                        m.set(j, k, self.at(index, j, k).clone());
                    }
                }
                Ok(m)
            }
            2 => {
                check(d2)?;
                let mut m = Mat::zero(d1, d3);
                for i in 0..d1 {
                    for k in 0..d3 {
                        m.set(i, k, self.at(i, index, k).clone());
                    }
                }
                Ok(m)
            }
            3 => {
                check(d3)?;
                let mut m = Mat::zero(d1, d2);
                for i in 0..d1 {
                    for j in 0..d2 {
                        m.set(i, j, self.at(i, j, index).clone());
                    }
                }
                Ok(m)
            }
            _ => Err(Error::Dimension(format!("axis must be 1, 2 or 3, got {axis}"))),
        }
    }

    /// Restriction to index subsets (each nonempty, strictly increasing and
    /// in range).
    pub fn subtable(&self, sel1: &[usize], sel2: &[usize], sel3: &[usize]) -> Result<Table3, Error> {
        let check = |sel: &[usize], limit: usize, axis: usize| -> Result<(), Error> {
            if sel.is_empty() {
                return Err(Error::Dimension(format!("empty selection on axis {axis}")));
            }
            for w in sel.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Dimension(format!(
                        "selection on axis {axis} must be strictly increasing"
                    )));
                }
            }
            if *sel.last().unwrap() >= limit {
                return Err(Error::Dimension(format!("selection on axis {axis} out of range")));
            }
            Ok(())
        };
        check(sel1, self.dims.0, 1)?;
        check(sel2, self.dims.1, 2)?;
        check(sel3, self.dims.2, 3)?;
        let mut out = Table3::zero((sel1.len(), sel2.len(), sel3.len()));
        for (a, &i) in sel1.iter().enumerate() {
            for (b, &j) in sel2.iter().enumerate() {
                for (c, &k) in sel3.iter().enumerate() {
                    out.set(a, b, c, self.at(i, j, k).clone());
                }
            }
        }
        Ok(out)
    }
}

/// Factor triple of a rank-`r` parametrisation; row `l` of each factor
/// belongs to hidden state `l`.
#[derive(Debug, Clone)]
pub struct ParamTriple {
    pub rank: usize,
    pub rho: Mat<Rat>,
    pub sigma: Mat<Rat>,
    pub theta: Mat<Rat>,
}

impl ParamTriple {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rho.cols, self.sigma.cols, self.theta.cols)
    }

    /// Restrict factors to column subsets; synthesising the result equals
    /// taking the corresponding subtable.
    pub fn restrict(&self, sel1: &[usize], sel2: &[usize], sel3: &[usize]) -> ParamTriple {
        let pick = |m: &Mat<Rat>, sel: &[usize]| {
            let mut out = Mat::zero(m.rows, sel.len());
            for r in 0..m.rows {
                for (c, &idx) in sel.iter().enumerate() {
                    out.set(r, c, m.at(r, idx).clone());
                }
            }
            out
        };
        ParamTriple {
            rank: self.rank,
            rho: pick(&self.rho, sel1),
            sigma: pick(&self.sigma, sel2),
            theta: pick(&self.theta, sel3),
        }
    }
}

/// Exact synthesis `p[i][j][k] = sum_l rho[l][i] sigma[l][j] theta[l][k]`.
pub fn synthesize(params: &ParamTriple) -> Result<Table3, Error> {
    let r = params.rank;
    if params.rho.rows != r || params.sigma.rows != r || params.theta.rows != r {
        return Err(Error::Dimension("factor row count must equal the rank".into()));
    }
    let (d1, d2, d3) = params.dims();
    let mut t = Table3::zero((d1, d2, d3));
    for l in 0..r {
        for i in 0..d1 {
            let a = params.rho.at(l, i);
            if a.is_zero() {
                continue;
            }
            for j in 0..d2 {
                let ab = a * params.sigma.at(l, j);
                if ab.is_zero() {
                    continue;
                }
                for k in 0..d3 {
                    let v = self_add(t.at(i, j, k), &ab * params.theta.at(l, k));
                    t.set(i, j, k, v);
                }
            }
        }
    }
    Ok(t)
}

fn self_add(a: &Rat, b: Rat) -> Rat {
    a + b
}

/// Random integer factors with entries in `[-height, height]`, rows
/// resampled while all-zero; deterministic per seed. Returns the table and
/// its witness factorisation.
pub fn random_low_rank(
    dims: (usize, usize, usize),
    rank: usize,
    height: i64,
    seed: u64,
) -> (Table3, ParamTriple) {
    assert!(rank >= 1, "rank must be at least 1");
    assert!(height >= 1, "height must be at least 1");
    let mut rng = stream(seed, 0);
    let mut factor = |cols: usize| -> Mat<Rat> {
        let mut m = Mat::zero(rank, cols);
        for r in 0..rank {
            loop {
                let row: Vec<i64> = (0..cols).map(|_| rng.random_range(-height..=height)).collect();
                if row.iter().any(|&x| x != 0) {
                    for (c, &x) in row.iter().enumerate() {
                        m.set(r, c, rat(x));
                    }
                    break;
                }
            }
        }
        m
    };
    let params = ParamTriple {
        rank,
        rho: factor(dims.0),
        sigma: factor(dims.1),
        theta: factor(dims.2),
    };
    let table = synthesize(&params).expect("consistent dims by construction");
    (table, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;

    fn ones(rows: usize, cols: usize) -> Mat<Rat> {
        Mat::new(rows, cols, vec![rat(1); rows * cols])
    }

    #[test]
    fn rank1_all_ones() {
        let p = ParamTriple { rank: 1, rho: ones(1, 2), sigma: ones(1, 2), theta: ones(1, 2) };
        let t = synthesize(&p).unwrap();
        assert!(t.entries.iter().all(|e| *e == rat(1)));
    }

    fn disjoint_rank2() -> (Table3, ParamTriple) {
        let id2 = Mat::from_rows(vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]]);
        let p = ParamTriple { rank: 2, rho: id2.clone(), sigma: id2.clone(), theta: id2 };
        let t = synthesize(&p).unwrap();
        (t, p)
    }

    #[test]
    fn two_disjoint_pure_states() {
        let (t, _) = disjoint_rank2();
        assert_eq!(*t.at(0, 0, 0), rat(1));
        assert_eq!(*t.at(1, 1, 1), rat(1));
        let total: Rat = t.entries.iter().sum();
        assert_eq!(total, rat(2)); // everything else zero
    }

    #[test]
    fn slice_of_disjoint_example() {
        let (t, _) = disjoint_rank2();
        let s = t.slice(1, 0).unwrap();
        assert_eq!(s, Mat::from_rows(vec![vec![rat(1), rat(0)], vec![rat(0), rat(0)]]));
    }

    #[test]
    fn slice_axis_conventions_match_direct_indexing() {
        let (t, _) = random_low_rank((4, 4, 4), 3, 5, 42);
        let s = t.slice(2, 3).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                assert_eq!(s.at(i, k), t.at(i, 3, k));
            }
        }
        assert!(t.slice(2, 4).is_err());
        assert!(t.slice(0, 0).is_err());
    }

    #[test]
    fn slices_restack_to_table() {
        let (t, _) = random_low_rank((3, 4, 2), 2, 4, 7);
        let mut rebuilt = Table3::zero(t.dims);
        for i in 0..t.dims.0 {
            let s = t.slice(1, i).unwrap();
            for j in 0..t.dims.1 {
                for k in 0..t.dims.2 {
                    rebuilt.set(i, j, k, s.at(j, k).clone());
                }
            }
        }
        assert_eq!(rebuilt, t);
    }

    #[test]
    fn subtable_full_range_is_identity() {
        let (t, _) = random_low_rank((3, 3, 3), 2, 3, 1);
        let s = t.subtable(&[0, 1, 2], &[0, 1, 2], &[0, 1, 2]).unwrap();
        assert_eq!(s, t);
        assert!(t.subtable(&[], &[0], &[0]).is_err());
        assert!(t.subtable(&[0, 0], &[0], &[0]).is_err());
        assert!(t.subtable(&[0, 3], &[0], &[0]).is_err());
    }

    #[test]
    fn subtable_commutes_with_synthesis() {
        let (t, p) = random_low_rank((4, 4, 4), 3, 6, 9);
        let sel = (&[0usize, 2, 3][..], &[1usize, 2][..], &[0usize, 1, 3][..]);
        let direct = t.subtable(sel.0, sel.1, sel.2).unwrap();
        let via_factors = synthesize(&p.restrict(sel.0, sel.1, sel.2)).unwrap();
        assert_eq!(direct, via_factors);
    }

    #[test]
    fn slices_of_rank_r_table_have_rank_at_most_r() {
        for rank in 1..=3 {
            let (t, _) = random_low_rank((4, 4, 4), rank, 5, 100 + rank as u64);
            for axis in 1..=3 {
                for idx in 0..4 {
                    let s = t.slice(axis, idx).unwrap();
                    assert!(s.rank_exact() <= rank, "axis {axis} idx {idx} rank {rank}");
                }
            }
        }
    }

    #[test]
    fn rank1_slices_have_zero_2x2_minors() {
        let (t, _) = random_low_rank((2, 2, 2), 1, 1, 3);
        for axis in 1..=3 {
            for idx in 0..2 {
                let s = t.slice(axis, idx).unwrap();
                let det = s.det_exact().unwrap();
                assert!(det.is_zero());
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let (a, _) = random_low_rank((4, 4, 4), 4, 10, 77);
        let (b, _) = random_low_rank((4, 4, 4), 4, 10, 77);
        assert_eq!(a, b);
        let (c, _) = random_low_rank((4, 4, 4), 4, 10, 78);
        assert_ne!(a, c);
    }

    #[test]
    fn synthesize_is_multilinear_in_each_factor_row() {
        let (_, p) = random_low_rank((3, 3, 3), 2, 4, 5);
        let t = synthesize(&p).unwrap();
        // scale rho row 0 by c: the l=0 summand scales by c
        let c = frac(3, 2);
        let mut scaled = p.clone();
        for col in 0..3 {
            let v = scaled.rho.at(0, col) * &c;
            scaled.rho.set(0, col, v);
        }
        let t_scaled = synthesize(&scaled).unwrap();
        // t_scaled = c * summand0 + summand1 = t + (c-1) * summand0
        let only0 = ParamTriple {
            rank: 1,
            rho: Mat::new(1, 3, (0..3).map(|c| p.rho.at(0, c).clone()).collect()),
            sigma: Mat::new(1, 3, (0..3).map(|c| p.sigma.at(0, c).clone()).collect()),
            theta: Mat::new(1, 3, (0..3).map(|c| p.theta.at(0, c).clone()).collect()),
        };
        let s0 = synthesize(&only0).unwrap();
        for idx in 0..t.entries.len() {
            let want = &t.entries[idx] + (&c - rat(1)) * &s0.entries[idx];
            assert_eq!(t_scaled.entries[idx], want);
        }
    }

    #[test]
    fn json_shape() {
        let (t, _) = random_low_rank((2, 2, 2), 1, 2, 11);
        let js = serde_json::to_value(&t).unwrap();
        assert!(js["dims"].is_array());
        assert_eq!(js["entries"].as_array().unwrap().len(), 8);
        let back: Table3 = serde_json::from_value(js).unwrap();
        assert_eq!(back, t);
    }
}
