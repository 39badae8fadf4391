//! Classical strength of connection on a condensed block graph.

use alloc::vec::Vec;

use crate::sparse::{BlockCsrMatrix, CondensedGraph, CsrMatrix};
use crate::{Error, Result};

/// Strong connections, row `i` listing the `j` that `i` strongly depends on,
/// with their weights. The diagonal is never stored.
pub type StrengthGraph = CsrMatrix;

/// Edge `(i, j)`, `j ≠ i`, is strong iff `w_ij ≥ θ max_{k≠i} w_ik` and
/// `w_ij > 0`.
pub fn strength(g: &CondensedGraph, theta: f64) -> Result<StrengthGraph> {
    if g.nrows != g.ncols {
        return Err(Error::InvalidInput("strength of connection needs a square graph".into()));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidInput(alloc::format!("strength tolerance {theta} outside (0, 1]")));
    }
    let mut row_ptr = Vec::with_capacity(g.nrows + 1);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for i in 0..g.nrows {
        let (cols, w) = g.row(i);
        let wmax = cols
            .iter()
            .zip(w)
            .filter(|(&j, _)| j != i)
            .fold(0.0f64, |m, (_, &v)| m.max(v));
        if wmax > 0.0 {
            for (&j, &v) in cols.iter().zip(w) {
                if j != i && v > 0.0 && v >= theta * wmax {
                    col_idx.push(j);
                    vals.push(v);
                }
            }
        }
        row_ptr.push(col_idx.len());
    }
    Ok(CsrMatrix {
        nrows: g.nrows,
        ncols: g.ncols,
        row_ptr,
        col_idx,
        vals,
    })
}

/// Condensed weights for the strength test: Frobenius norms of the blocks,
/// or `−a_ij` clipped at zero for scalar matrices when `signed`.
pub fn condense_for_strength(a: &BlockCsrMatrix, signed: bool) -> CondensedGraph {
    let mut g = a.condense();
    if signed && a.bs == 1 {
        for (w, v) in g.vals.iter_mut().zip(&a.vals) {
            *w = (-*v).max(0.0);
        }
    }
    g
}

/// Transpose pattern of a strength graph: row `i` lists the points that
/// strongly depend on `i`.
pub fn transpose_pattern(s: &StrengthGraph) -> (Vec<usize>, Vec<usize>) {
    let n = s.nrows;
    let mut ptr = alloc::vec![0usize; n + 1];
    for &j in &s.col_idx {
        ptr[j + 1] += 1;
    }
    for j in 0..n {
        ptr[j + 1] += ptr[j];
    }
    let mut next = ptr.clone();
    let mut idx = alloc::vec![0usize; s.col_idx.len()];
    for i in 0..n {
        for &j in s.row(i).0 {
            idx[next[j]] = i;
            next[j] += 1;
        }
    }
    (ptr, idx)
}
