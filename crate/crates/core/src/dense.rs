//! Small dense kernels on row-major blocks and a dense LU wrapper.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// `y += alpha · A x` for a row-major `n × n` block.
#[inline]
pub fn gemv_add(n: usize, a: &[f64], x: &[f64], alpha: f64, y: &mut [f64]) {
    for (i, yi) in y.iter_mut().enumerate().take(n) {
        let row = &a[i * n..(i + 1) * n];
        let mut s = 0.0;
        for (r, xv) in row.iter().zip(x) {
            s += r * xv;
        }
        *yi += alpha * s;
    }
}

/// `y += alpha · Aᵀ x` for a row-major `n × n` block.
#[inline]
pub fn gemv_t_add(n: usize, a: &[f64], x: &[f64], alpha: f64, y: &mut [f64]) {
    for i in 0..n {
        let s = alpha * x[i];
        let row = &a[i * n..(i + 1) * n];
        for (yj, r) in y.iter_mut().zip(row) {
            *yj += s * r;
        }
    }
}

/// `C += A B` for row-major `n × n` blocks.
#[inline]
pub fn gemm_add(n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    for i in 0..n {
        let crow = &mut c[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            for (cj, bj) in crow.iter_mut().zip(brow) {
                *cj += aik * bj;
            }
        }
    }
}

pub fn transpose_block(n: usize, a: &[f64], out: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
}

pub fn to_matrix(n: usize, a: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, a)
}

pub fn from_matrix(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Inverse of a row-major block, `None` when singular.
pub fn invert_block(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let lu = to_matrix(n, a).lu();
    let inv = lu.try_inverse()?;
    if inv.iter().all(|v| v.is_finite()) {
        Some(from_matrix(&inv))
    } else {
        None
    }
}

/// Dense LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl DenseLu {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::InvalidInput(format!("LU of a non-square {}x{} matrix", n, a.ncols())));
        }
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::SingularMatrix(format!("dense LU of order {n}")));
        }
        // Reject numerically singular factors, which nalgebra does not flag.
        let u = lu.u();
        let dmax = (0..n).map(|i| u[(i, i)].abs()).fold(0.0, f64::max);
        let dmin = (0..n).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if n > 0 && dmin <= 1e-15 * dmax {
            return Err(Error::SingularMatrix(format!(
                "dense LU of order {n}: pivot ratio {:.2e}",
                dmin / dmax
            )));
        }
        Ok(DenseLu { lu, n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = DVector::from_column_slice(b);
        let x = self.lu.solve(&rhs).expect("factorization checked at construction");
        x.as_slice().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_kernels_match_nalgebra() {
        let n = 4;
        let a: Vec<f64> = (0..16).map(|i| (i as f64 * i as f64 * 0.37).sin() + if i % 5 == 0 { 2.0 } else { 0.0 }).collect();
        let b: Vec<f64> = (0..16).map(|i| (i as f64 * 0.91).cos()).collect();
        let x: Vec<f64> = (0..4).map(|i| i as f64 - 1.5).collect();
        let (ma, mb) = (to_matrix(n, &a), to_matrix(n, &b));
        let mx = DVector::from_column_slice(&x);
        let mut y = alloc::vec![0.0; 4];
        gemv_add(n, &a, &x, 2.0, &mut y);
        let expect = &ma * &mx * 2.0;
        let mut yt = alloc::vec![0.0; 4];
        gemv_t_add(n, &a, &x, 1.0, &mut yt);
        let expect_t = ma.transpose() * &mx;
        for i in 0..4 {
            assert!((y[i] - expect[i]).abs() < 1e-14);
            assert!((yt[i] - expect_t[i]).abs() < 1e-14);
        }
        let mut c = alloc::vec![0.0; 16];
        gemm_add(n, &a, &b, &mut c);
        let mc = &ma * &mb;
        for i in 0..4 {
            for j in 0..4 {
                assert!((c[i * 4 + j] - mc[(i, j)]).abs() < 1e-14);
            }
        }
        let inv = invert_block(n, &a).unwrap();
        let prod = to_matrix(n, &inv) * &ma;
        assert!((prod - DMatrix::identity(4, 4)).norm() < 1e-10);
    }

    #[test]
    fn singular_inputs_are_rejected() {
        assert!(invert_block(2, &[1.0, 2.0, 2.0, 4.0]).is_none());
        assert!(DenseLu::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0])).is_err());
        let lu = DenseLu::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0])).unwrap();
        let x = lu.solve(&[3.0, 4.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }
}
