//! Interpolation and restriction operators.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::coarsen::{coarse_indices, CfPoint};
use super::strength::StrengthGraph;
use crate::dense::{gemm_add, invert_block};
use crate::sparse::BlockCsrMatrix;
use crate::{Error, Result};

fn check_sizes(a_rows: usize, split: &[CfPoint], s: &StrengthGraph) -> Result<()> {
    if split.len() != a_rows || s.nrows != a_rows {
        return Err(Error::InvalidInput(alloc::format!(
            "splitting of {} points and strength graph of {} rows do not match {} block rows",
            split.len(),
            s.nrows,
            a_rows
        )));
    }
    Ok(())
}

/// Block matrix whose row `i` holds one identity block at column `target[i]`.
fn injection_matrix(target: &[Option<usize>], ncols: usize, bs: usize) -> BlockCsrMatrix {
    let rows: Vec<Vec<usize>> = target.iter().map(|t| t.iter().copied().collect()).collect();
    let mut p = BlockCsrMatrix::from_pattern(ncols, bs, &rows);
    for (i, t) in target.iter().enumerate() {
        if let Some(c) = *t {
            let blk = p.block_mut(i, c);
            for r in 0..bs {
                blk[r * bs + r] = 1.0;
            }
        }
    }
    p
}

/// One-point interpolation: identity at C rows, and one identity block at
/// the strongest C neighbor (ties to the lowest index) of each F row. An F
/// point without strong C neighbors gets an empty row.
pub fn one_point_interp(split: &[CfPoint], s: &StrengthGraph, bs: usize) -> Result<BlockCsrMatrix> {
    check_sizes(split.len(), split, s)?;
    let (cidx, nc) = coarse_indices(split);
    let target: Vec<Option<usize>> = (0..split.len())
        .map(|i| match split[i] {
            CfPoint::C => cidx[i],
            CfPoint::F => {
                let (cols, w) = s.row(i);
                let mut best: Option<(usize, f64)> = None;
                for (&j, &wj) in cols.iter().zip(w) {
                    if split[j] == CfPoint::C && best.is_none_or(|(bj, bw)| wj > bw || (wj == bw && j < bj)) {
                        best = Some((j, wj));
                    }
                }
                best.and_then(|(j, _)| cidx[j])
            }
        })
        .collect();
    Ok(injection_matrix(&target, nc, bs))
}

/// Classical direct interpolation. Scalar matrices use the signed formula
/// with separate scaling of negative and positive couplings; block matrices
/// lump the non-interpolatory couplings into the diagonal,
/// `P_ij = −(A_ii + Σ_{k∉C_i} A_ik)⁻¹ A_ij`.
pub fn direct_interp(a: &BlockCsrMatrix, split: &[CfPoint], s: &StrengthGraph) -> Result<BlockCsrMatrix> {
    check_sizes(a.nbrows, split, s)?;
    let bs = a.bs;
    let b2 = bs * bs;
    let (cidx, nc) = coarse_indices(split);
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(a.nbrows);
    let mut vals: Vec<Vec<f64>> = Vec::with_capacity(a.nbrows);
    for i in 0..a.nbrows {
        if split[i] == CfPoint::C {
            let mut id = vec![0.0; b2];
            for r in 0..bs {
                id[r * bs + r] = 1.0;
            }
            rows.push(vec![cidx[i].unwrap()]);
            vals.push(id);
            continue;
        }
        let strong_c: Vec<usize> = s.row(i).0.iter().copied().filter(|&j| split[j] == CfPoint::C).collect();
        let mut cols = Vec::new();
        let mut blocks = Vec::new();
        if bs == 1 {
            let mut diag = 0.0;
            let (mut neg_all, mut pos_all, mut neg_c, mut pos_c) = (0.0, 0.0, 0.0, 0.0);
            for k in a.row_blocks(i) {
                let j = a.col_idx[k];
                let v = a.vals[k];
                if j == i {
                    diag = v;
                } else {
                    let in_c = strong_c.contains(&j);
                    if v < 0.0 {
                        neg_all += v;
                        if in_c {
                            neg_c += v;
                        }
                    } else {
                        pos_all += v;
                        if in_c {
                            pos_c += v;
                        }
                    }
                }
            }
            let alpha = if neg_c != 0.0 { neg_all / neg_c } else { 0.0 };
            let beta = if pos_c != 0.0 {
                pos_all / pos_c
            } else {
                diag += pos_all;
                0.0
            };
            if diag == 0.0 {
                return Err(Error::SingularBlock { row: i });
            }
            for k in a.row_blocks(i) {
                let j = a.col_idx[k];
                if strong_c.contains(&j) {
                    let v = a.vals[k];
                    let scale = if v < 0.0 { alpha } else { beta };
                    cols.push(cidx[j].unwrap());
                    blocks.push(vec![-scale * v / diag]);
                }
            }
        } else if !strong_c.is_empty() {
            let mut lumped = vec![0.0; b2];
            for k in a.row_blocks(i) {
                let j = a.col_idx[k];
                if !strong_c.contains(&j) {
                    for (l, v) in lumped.iter_mut().zip(a.block_at(k)) {
                        *l += v;
                    }
                }
            }
            let inv = match invert_block(bs, &lumped) {
                Some(inv) => inv,
                None => {
                    let d = a.block(i, i).ok_or(Error::SingularBlock { row: i })?;
                    invert_block(bs, d).ok_or(Error::SingularBlock { row: i })?
                }
            };
            for k in a.row_blocks(i) {
                let j = a.col_idx[k];
                if strong_c.contains(&j) {
                    let mut blk = vec![0.0; b2];
                    gemm_add(bs, &inv, a.block_at(k), &mut blk);
                    blk.iter_mut().for_each(|v| *v = -*v);
                    cols.push(cidx[j].unwrap());
                    blocks.push(blk);
                }
            }
        }
        // Coarse indices follow fine indices, so the order is already sorted.
        rows.push(cols);
        vals.push(blocks.concat());
    }
    let mut p = BlockCsrMatrix::from_pattern(nc, bs, &rows);
    p.vals = vals.concat();
    Ok(p)
}

/// Distance-one block approximate ideal restriction `R = [−W, I]`. For each
/// C point `c`, `N_c` are its strong F neighbors and `W_c` solves
/// `Σ_{j∈N_c} W_cj A_jk = A_ck` for `k ∈ N_c`. Returns `R` and the number of
/// rows that fell back to injection after a singular local solve.
pub fn lair_restriction(a: &BlockCsrMatrix, split: &[CfPoint], s_r: &StrengthGraph) -> Result<(BlockCsrMatrix, usize)> {
    check_sizes(a.nbrows, split, s_r)?;
    let bs = a.bs;
    let b2 = bs * bs;
    let (_, nc) = coarse_indices(split);
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(nc);
    let mut vals: Vec<f64> = Vec::new();
    let mut fallbacks = 0;
    for c in 0..a.nbrows {
        if split[c] != CfPoint::C {
            continue;
        }
        let nbrs: Vec<usize> = s_r.row(c).0.iter().copied().filter(|&j| split[j] == CfPoint::F).collect();
        let w = if nbrs.is_empty() { None } else { local_ideal_solve(a, c, &nbrs) };
        if w.is_none() && !nbrs.is_empty() {
            fallbacks += 1;
        }
        // Merge c into the sorted neighbor list.
        let mut cols: Vec<usize> = Vec::with_capacity(nbrs.len() + 1);
        let mut blocks: Vec<f64> = Vec::with_capacity((nbrs.len() + 1) * b2);
        let mut entries: Vec<(usize, Option<usize>)> = vec![(c, None)];
        if w.is_some() {
            entries.extend(nbrs.iter().enumerate().map(|(m, &j)| (j, Some(m))));
        }
        entries.sort_unstable_by_key(|e| e.0);
        for (j, m) in entries {
            cols.push(j);
            match m {
                None => {
                    let start = blocks.len();
                    blocks.resize(start + b2, 0.0);
                    for r in 0..bs {
                        blocks[start + r * bs + r] = 1.0;
                    }
                }
                Some(m) => {
                    let wm = w.as_ref().unwrap();
                    for r in 0..bs {
                        for q in 0..bs {
                            blocks.push(-wm[(r, m * bs + q)]);
                        }
                    }
                }
            }
        }
        rows.push(cols);
        vals.extend_from_slice(&blocks);
    }
    let mut r = BlockCsrMatrix::from_pattern(a.nbcols, bs, &rows);
    r.vals = vals;
    Ok((r, fallbacks))
}

/// Dense local solve `W A_{N,N} = A_{c,N}`, returning `W` as `bs × m·bs`.
fn local_ideal_solve(a: &BlockCsrMatrix, c: usize, nbrs: &[usize]) -> Option<DMatrix<f64>> {
    let bs = a.bs;
    let m = nbrs.len() * bs;
    let pos = |j: usize| nbrs.iter().position(|&n| n == j);
    // Transposed local matrix so that the unknowns are columns of Wᵀ.
    let mut at = DMatrix::<f64>::zeros(m, m);
    for (p, &j) in nbrs.iter().enumerate() {
        for k in a.row_blocks(j) {
            if let Some(q) = pos(a.col_idx[k]) {
                let blk = a.block_at(k);
                for r in 0..bs {
                    for cc in 0..bs {
                        at[(q * bs + cc, p * bs + r)] = blk[r * bs + cc];
                    }
                }
            }
        }
    }
    let mut rhs = DMatrix::<f64>::zeros(m, bs);
    for k in a.row_blocks(c) {
        if let Some(q) = pos(a.col_idx[k]) {
            let blk = a.block_at(k);
            for r in 0..bs {
                for cc in 0..bs {
                    rhs[(q * bs + cc, r)] = blk[r * bs + cc];
                }
            }
        }
    }
    let solve = |mat: DMatrix<f64>| -> Option<DMatrix<f64>> {
        let lu = mat.lu();
        let u = lu.u();
        let dmax = (0..m).map(|i| u[(i, i)].abs()).fold(0.0, f64::max);
        let dmin = (0..m).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if !(dmin > 1e-14 * dmax) {
            return None;
        }
        let x = lu.solve(&rhs)?;
        x.iter().all(|v| v.is_finite()).then_some(x)
    };
    let wt = solve(at.clone()).or_else(|| {
        let shift = 1e-12 * at.norm();
        let mut reg = at;
        for i in 0..m {
            reg[(i, i)] += shift;
        }
        solve(reg)
    })?;
    Some(wt.transpose())
}
