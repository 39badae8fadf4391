//! Sparse LU and Cholesky from faer behind the core factorization trait.

use anisoheat_core::blocksolve::SparseFactorization;
use anisoheat_core::sparse::CsrMatrix;
use anisoheat_core::{Error, Result};
use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat, Side};

fn to_faer(a: &CsrMatrix, what: &str) -> Result<SparseColMat<usize, f64>> {
    if a.nrows != a.ncols {
        return Err(Error::InvalidInput(format!("{what} needs a square matrix, got {}x{}", a.nrows, a.ncols)));
    }
    let mut triplets = Vec::with_capacity(a.nnz());
    for i in 0..a.nrows {
        let (cols, vals) = a.row(i);
        triplets.extend(cols.iter().zip(vals).map(|(&j, &v)| Triplet::new(i, j, v)));
    }
    SparseColMat::<usize, f64>::try_new_from_triplets(a.nrows, a.ncols, &triplets)
        .map_err(|e| Error::InvalidInput(format!("sparse matrix construction failed: {e:?}")))
}

fn solve_with(solver: &impl SolveCore<f64>, n: usize, b: &[f64], what: &str) -> Result<Vec<f64>> {
    if b.len() != n {
        return Err(Error::InvalidInput(format!("rhs has {} entries, expected {n}", b.len())));
    }
    let mut x = Mat::from_fn(n, 1, |i, _| b[i]);
    solver.solve_in_place_with_conj(Conj::No, x.as_mut());
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix(format!("{what} produced non-finite values")));
    }
    Ok(out)
}

/// Sparse LU with partial pivoting and a fill-reducing column ordering.
pub struct FaerLu {
    lu: Lu<usize, f64>,
    n: usize,
}

impl std::fmt::Debug for FaerLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FaerLu").field("n", &self.n).finish_non_exhaustive()
    }
}

impl SparseFactorization for FaerLu {
    fn factorize(a: &CsrMatrix) -> Result<Self> {
        let m = to_faer(a, "LU")?;
        let lu = m.sp_lu().map_err(|e| Error::SingularMatrix(format!("sparse LU failed: {e:?}")))?;
        Ok(FaerLu { lu, n: a.nrows })
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        solve_with(&self.lu, self.n, b, "sparse LU")
    }
}

/// Sparse supernodal Cholesky of a symmetric positive definite matrix.
/// Only the lower triangle is read.
pub struct FaerCholesky {
    llt: Llt<usize, f64>,
    n: usize,
}

impl std::fmt::Debug for FaerCholesky {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FaerCholesky").field("n", &self.n).finish_non_exhaustive()
    }
}

impl SparseFactorization for FaerCholesky {
    fn factorize(a: &CsrMatrix) -> Result<Self> {
        let m = to_faer(a, "Cholesky")?;
        let llt = m
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::SingularMatrix(format!("sparse Cholesky failed (matrix not SPD?): {e:?}")))?;
        Ok(FaerCholesky { llt, n: a.nrows })
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        solve_with(&self.llt, self.n, b, "sparse Cholesky")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use anisoheat_core::blocksolve::DenseFactorization;

    fn tridiagonal(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + i as f64 * 0.01));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.5));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn matches_dense_lu() {
        let a = tridiagonal(40);
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = FaerLu::factorize(&a).unwrap().solve(&b).unwrap();
        let y = DenseFactorization::factorize(&a).unwrap().solve(&b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let a = tridiagonal(5);
        let lu = FaerLu::factorize(&a).unwrap();
        assert!(lu.solve(&[1.0; 4]).is_err());
        let r = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0)]).unwrap();
        assert!(FaerLu::factorize(&r).is_err());
    }

    #[test]
    fn cholesky_matches_lu_on_spd_and_rejects_indefinite() {
        let mut t = Vec::new();
        for i in 0..30 {
            t.push((i, i, 4.0 + i as f64 * 0.01));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(30, 30, &t).unwrap();
        let b: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).cos()).collect();
        let x = FaerCholesky::factorize(&a).unwrap().solve(&b).unwrap();
        let y = FaerLu::factorize(&a).unwrap().solve(&b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
        let indefinite = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        assert!(FaerCholesky::factorize(&indefinite).is_err());
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let r = FaerLu::factorize(&a).and_then(|lu| lu.solve(&[1.0, 1.0, 1.0]));
        assert!(r.is_err());
    }
}
