use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::{Error, Result};

/// Accumulates element contributions into a sparse matrix and a set of
/// right-hand sides, all in reduced (free-DOF) numbering.
#[derive(Debug, Clone)]
pub struct SparseBuilder {
    n: usize,
    triplets: Vec<Triplet<usize, usize, f64>>,
    rhs: Vec<Vec<f64>>,
}

impl SparseBuilder {
    pub fn new(n: usize, n_rhs: usize) -> Self {
        Self { n, triplets: Vec::new(), rhs: vec![vec![0.0; n]; n_rhs] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            self.triplets.push(Triplet::new(i, j, v));
        }
    }

    /// Adds a dense element block `ke` (row-major, `rows.len() × cols.len()`);
    /// entries with a constrained row or column are dropped.
    pub fn add_block(&mut self, rows: &[Option<usize>], cols: &[Option<usize>], ke: &[f64]) {
        debug_assert_eq!(ke.len(), rows.len() * cols.len());
        for (a, ra) in rows.iter().enumerate() {
            let Some(i) = *ra else { continue };
            for (b, cb) in cols.iter().enumerate() {
                if let Some(j) = *cb {
                    self.add(i, j, ke[a * cols.len() + b]);
                }
            }
        }
    }

    #[inline]
    pub fn add_rhs(&mut self, k: usize, i: Option<usize>, v: f64) {
        if let Some(i) = i {
            self.rhs[k][i] += v;
        }
    }

    pub fn rhs_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.rhs[k]
    }

    pub fn finish(self) -> Result<SparseSystem> {
        let matrix = SparseColMat::try_new_from_triplets(self.n, self.n, &self.triplets)
            .map_err(|e| Error::Configuration(format!("sparse assembly failed: {e:?}")))?;
        Ok(SparseSystem { matrix, rhs: self.rhs })
    }
}

/// Assembled matrix (duplicates summed) and right-hand sides.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: SparseColMat<usize, f64>,
    pub rhs: Vec<Vec<f64>>,
}

impl SparseSystem {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let a = self.matrix.as_ref();
        let (cp, ri, v) = (a.symbolic().col_ptr(), a.symbolic().row_idx(), a.val());
        let mut y = vec![0.0; a.nrows()];
        for j in 0..a.ncols() {
            for p in cp[j]..cp[j + 1] {
                y[ri[p]] += v[p] * x[j];
            }
        }
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    /// Largest absolute column sum.
    pub fn norm_1(&self) -> f64 {
        let a = self.matrix.as_ref();
        let cp = a.symbolic().col_ptr();
        (0..a.ncols())
            .map(|j| a.val()[cp[j]..cp[j + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Relative residual `‖Ax - b‖ / max(‖b‖, ‖A‖‖x‖)` in the max norm.
    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.matvec(x);
        let r = ax.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = norm_inf(b).max(self.norm_1() * norm_inf(x));
        if scale == 0.0 {
            0.0
        } else {
            r / scale
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Matrix class of a system, selecting the factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Spd,
    General,
}

const RESIDUAL_TOL: f64 = 1e-10;
const CONDITION_LIMIT: f64 = 1e13;

/// Solves `A x = b` for every right-hand side with one sparse direct
/// factorization (Cholesky or LU with partial pivoting).
pub fn solve(system: &SparseSystem, symmetry: Symmetry) -> Result<Vec<Vec<f64>>> {
    let n = system.n();
    let k = system.rhs.len();
    if n == 0 {
        return Ok(vec![Vec::new(); k]);
    }
    // A probe right-hand side exposes singular systems even when all the
    // user right-hand sides vanish.
    let probe: Vec<f64> = (0..n).map(|i| 1.0 + libm::fmod(0.618_033_988_749_895 * i as f64, 1.0)).collect();
    let b = Mat::from_fn(n, k + 1, |i, j| if j < k { system.rhs[j][i] } else { probe[i] });
    let a = system.matrix.as_ref();
    let x = match symmetry {
        Symmetry::Spd => {
            let llt = a.sp_cholesky(Side::Lower).map_err(|e| Error::Solver {
                reason: format!("Cholesky factorization failed: {e:?}"),
                residual: f64::NAN,
            })?;
            llt.solve(&b)
        }
        Symmetry::General => {
            let lu = a.sp_lu().map_err(|e| Error::Solver {
                reason: format!("LU factorization failed: {e:?}"),
                residual: f64::NAN,
            })?;
            lu.solve(&b)
        }
    };
    let cols: Vec<Vec<f64>> = (0..=k).map(|j| (0..n).map(|i| x[(i, j)]).collect()).collect();
    let anorm = system.norm_1();
    for (j, xj) in cols.iter().enumerate() {
        let bj = if j < k { &system.rhs[j][..] } else { &probe[..] };
        let res = system.relative_residual(xj, bj);
        if !xj.iter().all(|v| v.is_finite()) {
            return Err(Error::Solver { reason: "non-finite solution (singular system)".into(), residual: res });
        }
        let growth = anorm * norm_inf(xj) / norm_inf(bj).max(f64::MIN_POSITIVE);
        if norm_inf(bj) > 0.0 && growth > CONDITION_LIMIT {
            return Err(Error::Solver {
                reason: format!("system is numerically singular (growth {growth:.3e})"),
                residual: res,
            });
        }
        if res > RESIDUAL_TOL {
            return Err(Error::Solver { reason: format!("residual above {RESIDUAL_TOL:e}"), residual: res });
        }
    }
    let mut cols = cols;
    cols.truncate(k);
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let mut b = SparseBuilder::new(3, 1);
        for i in 0..3 {
            b.add(i, i, 1.0);
            b.add_rhs(0, Some(i), i as f64 + 0.5);
        }
        let sys = b.finish().unwrap();
        for s in [Symmetry::Spd, Symmetry::General] {
            assert_eq!(solve(&sys, s).unwrap()[0], vec![0.5, 1.5, 2.5]);
        }
    }

    #[test]
    fn duplicates_are_summed() {
        let mut b = SparseBuilder::new(2, 1);
        b.add_block(&[Some(0), None, Some(1)], &[Some(0), None, Some(1)], &[1.0, 9.0, 0.0, 9.0, 9.0, 9.0, 0.0, 9.0, 2.0]);
        b.add(0, 0, 1.0);
        b.add_rhs(0, Some(0), 4.0);
        b.add_rhs(0, Some(1), 4.0);
        let x = solve(&b.finish().unwrap(), Symmetry::Spd).unwrap();
        assert!((x[0][0] - 2.0).abs() < 1e-15 && (x[0][1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_system_is_rejected() {
        let mut b = SparseBuilder::new(2, 1);
        for (i, j, v) in [(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)] {
            b.add(i, j, v);
        }
        let sys = b.finish().unwrap();
        assert!(matches!(solve(&sys, Symmetry::Spd), Err(Error::Solver { .. })));
        assert!(matches!(solve(&sys, Symmetry::General), Err(Error::Solver { .. })));
    }
}
