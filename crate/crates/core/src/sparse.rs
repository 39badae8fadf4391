//! Block CSR matrices with dense square blocks, one block row per cell.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::dense::{gemm_add, gemv_add, gemv_t_add, invert_block, transpose_block};
use crate::{Error, Result};

/// Sparse matrix of `bs × bs` row-major blocks. Column indices are sorted and
/// unique within each block row.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCsrMatrix {
    pub nbrows: usize,
    pub nbcols: usize,
    pub bs: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

/// Scalar CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

/// Block graph with one nonnegative weight (Frobenius norm) per stored block.
pub type CondensedGraph = CsrMatrix;

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = entries.to_vec();
        if let Some(&(i, j, _)) = sorted.iter().find(|(i, j, _)| *i >= nrows || *j >= ncols) {
            return Err(Error::InvalidInput(format!(
                "entry ({i}, {j}) is outside a {nrows}x{ncols} matrix"
            )));
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            vals.push(v);
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.nrows {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.vals[r])
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

/// Inverted diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal {
    pub bs: usize,
    pub blocks: Vec<f64>,
}

impl BlockDiagonal {
    pub fn n_blocks(&self) -> usize {
        self.blocks.len() / (self.bs * self.bs).max(1)
    }

    pub fn block(&self, i: usize) -> &[f64] {
        let b2 = self.bs * self.bs;
        &self.blocks[i * b2..(i + 1) * b2]
    }

    /// `y = D x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let bs = self.bs;
        for i in 0..self.n_blocks() {
            let yi = &mut y[i * bs..(i + 1) * bs];
            yi.fill(0.0);
            gemv_add(bs, self.block(i), &x[i * bs..(i + 1) * bs], 1.0, yi);
        }
    }

    /// `y += alpha · D_ii x_i` on block `i` only.
    pub fn apply_block_add(&self, i: usize, x: &[f64], alpha: f64, y: &mut [f64]) {
        gemv_add(self.bs, self.block(i), x, alpha, y);
    }

    pub fn to_matrix(&self) -> BlockCsrMatrix {
        let n = self.n_blocks();
        BlockCsrMatrix {
            nbrows: n,
            nbcols: n,
            bs: self.bs,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: self.blocks.clone(),
        }
    }
}

impl BlockCsrMatrix {
    /// Zero matrix with the given sorted block pattern per row.
    pub fn from_pattern(nbcols: usize, bs: usize, rows: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]), "unsorted block pattern");
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let nblocks = col_idx.len();
        BlockCsrMatrix {
            nbrows: rows.len(),
            nbcols,
            bs,
            row_ptr,
            col_idx,
            vals: vec![0.0; nblocks * bs * bs],
        }
    }

    pub fn identity(n: usize, bs: usize) -> Self {
        let mut vals = vec![0.0; n * bs * bs];
        for b in 0..n {
            for i in 0..bs {
                vals[b * bs * bs + i * bs + i] = 1.0;
            }
        }
        BlockCsrMatrix {
            nbrows: n,
            nbcols: n,
            bs,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nbrows * self.bs
    }

    pub fn ncols(&self) -> usize {
        self.nbcols * self.bs
    }

    pub fn n_blocks(&self) -> usize {
        self.col_idx.len()
    }

    fn b2(&self) -> usize {
        self.bs * self.bs
    }

    pub fn block_at(&self, k: usize) -> &[f64] {
        let b2 = self.b2();
        &self.vals[k * b2..(k + 1) * b2]
    }

    pub fn block_at_mut(&mut self, k: usize) -> &mut [f64] {
        let b2 = self.b2();
        &mut self.vals[k * b2..(k + 1) * b2]
    }

    /// Storage index of block `(i, j)`.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi].binary_search(&j).ok().map(|p| lo + p)
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.find(i, j).map(|k| self.block_at(k))
    }

    /// Mutable access to block `(i, j)`; panics when outside the pattern.
    pub fn block_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let k = self
            .find(i, j)
            .unwrap_or_else(|| panic!("block ({i}, {j}) is not in the sparsity pattern"));
        self.block_at_mut(k)
    }

    pub fn row_blocks(&self, i: usize) -> core::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y[..self.nrows()].fill(0.0);
        self.matvec_add(1.0, x, y);
    }

    /// `y += alpha · A x`.
    pub fn matvec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        let bs = self.bs;
        for i in 0..self.nbrows {
            let yi = &mut y[i * bs..(i + 1) * bs];
            for k in self.row_blocks(i) {
                let j = self.col_idx[k];
                gemv_add(bs, self.block_at(k), &x[j * bs..(j + 1) * bs], alpha, yi);
            }
        }
    }

    /// `y += alpha · Aᵀ x` without forming the transpose.
    pub fn matvec_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        let bs = self.bs;
        for i in 0..self.nbrows {
            let xi = &x[i * bs..(i + 1) * bs];
            for k in self.row_blocks(i) {
                let j = self.col_idx[k];
                gemv_t_add(bs, self.block_at(k), xi, alpha, &mut y[j * bs..(j + 1) * bs]);
            }
        }
    }

    /// `(A x)_i` for block row `i` only.
    pub fn row_matvec_add(&self, i: usize, alpha: f64, x: &[f64], yi: &mut [f64]) {
        let bs = self.bs;
        for k in self.row_blocks(i) {
            let j = self.col_idx[k];
            gemv_add(bs, self.block_at(k), &x[j * bs..(j + 1) * bs], alpha, yi);
        }
    }

    pub fn transpose(&self) -> Self {
        let bs = self.bs;
        let b2 = self.b2();
        let mut counts = vec![0usize; self.nbcols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.nbcols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.n_blocks()];
        let mut vals = vec![0.0; self.vals.len()];
        for i in 0..self.nbrows {
            for k in self.row_blocks(i) {
                let j = self.col_idx[k];
                let dst = next[j];
                next[j] += 1;
                col_idx[dst] = i;
                transpose_block(bs, self.block_at(k), &mut vals[dst * b2..(dst + 1) * b2]);
            }
        }
        BlockCsrMatrix {
            nbrows: self.nbcols,
            nbcols: self.nbrows,
            bs,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in &mut self.vals {
            *v *= alpha;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    /// `Σ alpha_k A_k` over matrices of equal shape; the pattern is the union.
    pub fn linear_combination(terms: &[(f64, &BlockCsrMatrix)]) -> Self {
        let first = terms[0].1;
        let (nbrows, nbcols, bs) = (first.nbrows, first.nbcols, first.bs);
        for (_, m) in terms {
            assert!(m.nbrows == nbrows && m.nbcols == nbcols && m.bs == bs, "shape mismatch");
        }
        let rows: Vec<Vec<usize>> = (0..nbrows)
            .map(|i| {
                let mut r: Vec<usize> = terms
                    .iter()
                    .flat_map(|(_, m)| m.col_idx[m.row_blocks(i)].iter().copied())
                    .collect();
                r.sort_unstable();
                r.dedup();
                r
            })
            .collect();
        let mut out = BlockCsrMatrix::from_pattern(nbcols, bs, &rows);
        for (alpha, m) in terms {
            for i in 0..nbrows {
                for k in m.row_blocks(i) {
                    let dst = out.block_mut(i, m.col_idx[k]);
                    for (d, s) in dst.iter_mut().zip(m.block_at(k)) {
                        *d += alpha * s;
                    }
                }
            }
        }
        out
    }

    /// Drops blocks whose entries are all exactly zero.
    pub fn prune_zero_blocks(&mut self) {
        let b2 = self.b2();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for i in 0..self.nbrows {
            for k in self.row_blocks(i) {
                let blk = &self.vals[k * b2..(k + 1) * b2];
                if blk.iter().any(|&v| v != 0.0) {
                    col_idx.push(self.col_idx[k]);
                    vals.extend_from_slice(blk);
                }
            }
            row_ptr.push(col_idx.len());
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.vals = vals;
    }

    /// Copies of the diagonal blocks (zero where absent).
    pub fn diagonal_blocks(&self) -> BlockDiagonal {
        let b2 = self.b2();
        let n = self.nbrows.min(self.nbcols);
        let mut blocks = vec![0.0; n * b2];
        for i in 0..n {
            if let Some(b) = self.block(i, i) {
                blocks[i * b2..(i + 1) * b2].copy_from_slice(b);
            }
        }
        BlockDiagonal { bs: self.bs, blocks }
    }

    /// Inverses of the diagonal blocks by dense LU.
    pub fn block_diag_inverse(&self) -> Result<BlockDiagonal> {
        let b2 = self.b2();
        let d = self.diagonal_blocks();
        let mut blocks = vec![0.0; d.blocks.len()];
        for i in 0..d.n_blocks() {
            let inv = invert_block(self.bs, d.block(i)).ok_or(Error::SingularBlock { row: i })?;
            blocks[i * b2..(i + 1) * b2].copy_from_slice(&inv);
        }
        Ok(BlockDiagonal { bs: self.bs, blocks })
    }

    /// Frobenius norm of every stored block, same pattern.
    pub fn condense(&self) -> CondensedGraph {
        let vals = (0..self.n_blocks())
            .map(|k| self.block_at(k).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        CsrMatrix {
            nrows: self.nbrows,
            ncols: self.nbcols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            vals,
        }
    }

    /// Sparse product `A B` (Gustavson, block rows).
    pub fn spgemm(&self, other: &BlockCsrMatrix) -> Result<BlockCsrMatrix> {
        if self.nbcols != other.nbrows || self.bs != other.bs {
            return Err(Error::InvalidInput(format!(
                "block product shape mismatch: {}x{} (bs {}) times {}x{} (bs {})",
                self.nbrows, self.nbcols, self.bs, other.nbrows, other.nbcols, other.bs
            )));
        }
        let bs = self.bs;
        let b2 = self.b2();
        let mut marker = vec![usize::MAX; other.nbcols];
        let mut row_ptr = vec![0];
        let mut col_idx: Vec<usize> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut row_cols: Vec<usize> = Vec::new();
        let mut acc: Vec<f64> = Vec::new();
        for i in 0..self.nbrows {
            row_cols.clear();
            acc.clear();
            for ka in self.row_blocks(i) {
                let k = self.col_idx[ka];
                let a = self.block_at(ka);
                for kb in other.row_blocks(k) {
                    let j = other.col_idx[kb];
                    let slot = if marker[j] == usize::MAX {
                        marker[j] = row_cols.len();
                        row_cols.push(j);
                        acc.resize(acc.len() + b2, 0.0);
                        marker[j]
                    } else {
                        marker[j]
                    };
                    gemm_add(bs, a, other.block_at(kb), &mut acc[slot * b2..(slot + 1) * b2]);
                }
            }
            let mut order: Vec<usize> = (0..row_cols.len()).collect();
            order.sort_unstable_by_key(|&s| row_cols[s]);
            for s in order {
                col_idx.push(row_cols[s]);
                vals.extend_from_slice(&acc[s * b2..(s + 1) * b2]);
            }
            for &j in &row_cols {
                marker[j] = usize::MAX;
            }
            row_ptr.push(col_idx.len());
        }
        Ok(BlockCsrMatrix {
            nbrows: self.nbrows,
            nbcols: other.nbcols,
            bs,
            row_ptr,
            col_idx,
            vals,
        })
    }

    /// Scalar CSR view with explicit entries of every stored block.
    pub fn to_csr(&self) -> CsrMatrix {
        let bs = self.bs;
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::with_capacity(self.vals.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for i in 0..self.nbrows {
            for r in 0..bs {
                for k in self.row_blocks(i) {
                    let j = self.col_idx[k];
                    let blk = self.block_at(k);
                    for c in 0..bs {
                        col_idx.push(j * bs + c);
                        vals.push(blk[r * bs + c]);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        CsrMatrix {
            nrows: self.nrows(),
            ncols: self.ncols(),
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// Scalar matrix as a block matrix with `1 × 1` blocks.
    pub fn from_csr(a: &CsrMatrix) -> Self {
        let mut out = BlockCsrMatrix {
            nbrows: a.nrows,
            nbcols: a.ncols,
            bs: 1,
            row_ptr: a.row_ptr.clone(),
            col_idx: Vec::with_capacity(a.nnz()),
            vals: Vec::with_capacity(a.nnz()),
        };
        for i in 0..a.nrows {
            let (cols, vals) = a.row(i);
            let mut order: Vec<usize> = (0..cols.len()).collect();
            order.sort_unstable_by_key(|&k| cols[k]);
            for k in order {
                out.col_idx.push(cols[k]);
                out.vals.push(vals[k]);
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let bs = self.bs;
        let mut m = DMatrix::zeros(self.nrows(), self.ncols());
        for i in 0..self.nbrows {
            for k in self.row_blocks(i) {
                let j = self.col_idx[k];
                let blk = self.block_at(k);
                for r in 0..bs {
                    for c in 0..bs {
                        m[(i * bs + r, j * bs + c)] = blk[r * bs + c];
                    }
                }
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let bs = self.bs;
        let mut best: f64 = 0.0;
        for i in 0..self.nbrows {
            for r in 0..bs {
                let mut s = 0.0;
                for k in self.row_blocks(i) {
                    s += self.block_at(k)[r * bs..(r + 1) * bs].iter().map(|v| v.abs()).sum::<f64>();
                }
                best = best.max(s);
            }
        }
        best
    }
}

/// Assembles a 2×2 block operator `[[A, B], [C, D]]` into one scalar CSR matrix.
pub fn block_2x2_csr(blocks: [[&BlockCsrMatrix; 2]; 2]) -> CsrMatrix {
    let n0 = blocks[0][0].nrows();
    let n1 = blocks[1][0].nrows();
    let m0 = blocks[0][0].ncols();
    let parts: [[CsrMatrix; 2]; 2] = [
        [blocks[0][0].to_csr(), blocks[0][1].to_csr()],
        [blocks[1][0].to_csr(), blocks[1][1].to_csr()],
    ];
    let mut row_ptr = vec![0];
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    for (bi, nr) in [(0usize, n0), (1usize, n1)] {
        for r in 0..nr {
            for (bj, offset) in [(0usize, 0usize), (1usize, m0)] {
                let (c, v) = parts[bi][bj].row(r);
                col_idx.extend(c.iter().map(|&j| j + offset));
                vals.extend_from_slice(v);
            }
            row_ptr.push(col_idx.len());
        }
    }
    CsrMatrix {
        nrows: n0 + n1,
        ncols: m0 + blocks[0][1].ncols(),
        row_ptr,
        col_idx,
        vals,
    }
}

/// Dense 2×2 block operator, for small oracles.
pub fn block_2x2_dense(blocks: [[&BlockCsrMatrix; 2]; 2]) -> DMatrix<f64> {
    let csr = block_2x2_csr(blocks);
    let mut m = DMatrix::zeros(csr.nrows, csr.ncols);
    for i in 0..csr.nrows {
        let (c, v) = csr.row(i);
        for (j, x) in c.iter().zip(v) {
            m[(i, *j)] += x;
        }
    }
    m
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha · x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
