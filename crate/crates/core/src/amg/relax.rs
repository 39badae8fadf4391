//! Block relaxation sweeps.

use alloc::vec;
use alloc::vec::Vec;

use super::coarsen::CfPoint;
use crate::dense::gemv_add;
use crate::sparse::{BlockCsrMatrix, BlockDiagonal};

/// One Jacobi sweep over the points in `set`: the residual is frozen at the
/// start of the sweep, undamped.
pub fn block_jacobi_sweep(a: &BlockCsrMatrix, dinv: &BlockDiagonal, set: &[usize], x: &mut [f64], b: &[f64]) {
    let bs = a.bs;
    let mut upd = vec![0.0; set.len() * bs];
    let mut r = vec![0.0; bs];
    for (m, &j) in set.iter().enumerate() {
        r.copy_from_slice(&b[j * bs..(j + 1) * bs]);
        a.row_matvec_add(j, -1.0, x, &mut r);
        gemv_add(bs, dinv.block(j), &r, 1.0, &mut upd[m * bs..(m + 1) * bs]);
    }
    for (m, &j) in set.iter().enumerate() {
        for (xv, u) in x[j * bs..(j + 1) * bs].iter_mut().zip(&upd[m * bs..(m + 1) * bs]) {
            *xv += u;
        }
    }
}

/// F, F, C block Jacobi sweeps.
pub fn ffc_block_jacobi(a: &BlockCsrMatrix, dinv: &BlockDiagonal, split: &[CfPoint], x: &mut [f64], b: &[f64]) {
    let (f, c) = point_sets(split);
    block_jacobi_sweep(a, dinv, &f, x, b);
    block_jacobi_sweep(a, dinv, &f, x, b);
    block_jacobi_sweep(a, dinv, &c, x, b);
}

/// Indices of the F points and of the C points.
pub fn point_sets(split: &[CfPoint]) -> (Vec<usize>, Vec<usize>) {
    let f = (0..split.len()).filter(|&i| split[i] == CfPoint::F).collect();
    let c = (0..split.len()).filter(|&i| split[i] == CfPoint::C).collect();
    (f, c)
}

/// Block Gauss–Seidel sweep in increasing (`forward`) or decreasing order.
pub fn block_gauss_seidel(a: &BlockCsrMatrix, dinv: &BlockDiagonal, x: &mut [f64], b: &[f64], forward: bool) {
    let bs = a.bs;
    let mut r = vec![0.0; bs];
    let mut step = |i: usize, x: &mut [f64]| {
        r.copy_from_slice(&b[i * bs..(i + 1) * bs]);
        a.row_matvec_add(i, -1.0, x, &mut r);
        gemv_add(bs, dinv.block(i), &r, 1.0, &mut x[i * bs..(i + 1) * bs]);
    };
    if forward {
        for i in 0..a.nbrows {
            step(i, x);
        }
    } else {
        for i in (0..a.nbrows).rev() {
            step(i, x);
        }
    }
}
