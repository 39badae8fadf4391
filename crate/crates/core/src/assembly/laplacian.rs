//! Symmetric interior-penalty Laplacian with unit conductivity.

use alloc::format;
use alloc::vec;

use super::{add_local, face_pattern};
use crate::sparse::BlockCsrMatrix;
use crate::space::{dot3, DgSpace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianBoundary {
    /// Includes `−∫ (n·∇φ) T − ∫ (n·∇T) φ` on ∂Ω; data goes to the RHS.
    Dirichlet,
    /// No boundary terms; constants are in the kernel.
    Neumann,
}

/// Matrix of `−IP(T; φ)/κ_⊥`:
/// `∫ ∇φ·∇T − ∫_Γ ⟦T⟧{∇φ}·n − ∫_Γ ⟦φ⟧{∇T}·n + ∫_Γ κ_p/h_e ⟦φ⟧⟦T⟧`
/// plus the boundary consistency terms for the Dirichlet variant.
/// Rows are test functions.
pub fn assemble_ip_laplacian(space: &DgSpace, kappa_p: f64, boundary: LaplacianBoundary) -> Result<BlockCsrMatrix> {
    if !(kappa_p > 0.0) {
        return Err(Error::InvalidInput(format!("penalty constant {kappa_p} must be positive")));
    }
    let nb = space.dofs_per_cell;
    let mut l = face_pattern(space);
    let mut local = vec![0.0; nb * nb];
    for cell in 0..space.n_cells() {
        let (_, w, tab) = space.cell_quadrature(cell);
        local.fill(0.0);
        for q in 0..w.len() {
            let gr = tab.grad_row(q);
            for i in 0..nb {
                for j in 0..nb {
                    local[i * nb + j] += w[q] * dot3(&gr[i], &gr[j]);
                }
            }
        }
        add_local(&mut l, cell, cell, &local);
    }
    for (idx, f) in space.mesh.facets.iter().enumerate() {
        let fq = space.facet_quadrature(idx);
        let n = &f.normal;
        match (f.minus, fq.minus.as_ref()) {
            (Some(m), Some(mt)) => {
                let pen = kappa_p / f.h_e;
                let sides = [(f.plus.cell, &fq.plus, 1.0), (m.cell, mt, -1.0)];
                for &(tc, tt, st) in &sides {
                    for &(uc, ut, su) in &sides {
                        local.fill(0.0);
                        for q in 0..fq.weights.len() {
                            let wq = fq.weights[q];
                            for i in 0..nb {
                                let phi_i = tt.value(q, i);
                                let dn_i = 0.5 * dot3(tt.grad(q, i), n);
                                for j in 0..nb {
                                    let phi_j = ut.value(q, j);
                                    let dn_j = 0.5 * dot3(ut.grad(q, j), n);
                                    local[i * nb + j] +=
                                        wq * (-su * phi_j * dn_i - st * phi_i * dn_j + pen * st * su * phi_i * phi_j);
                                }
                            }
                        }
                        add_local(&mut l, tc, uc, &local);
                    }
                }
            }
            _ => {
                if boundary == LaplacianBoundary::Neumann {
                    continue;
                }
                local.fill(0.0);
                for q in 0..fq.weights.len() {
                    let wq = fq.weights[q];
                    for i in 0..nb {
                        let phi_i = fq.plus.value(q, i);
                        let dn_i = dot3(fq.plus.grad(q, i), n);
                        for j in 0..nb {
                            let phi_j = fq.plus.value(q, j);
                            let dn_j = dot3(fq.plus.grad(q, j), n);
                            local[i * nb + j] -= wq * (dn_i * phi_j + dn_j * phi_i);
                        }
                    }
                }
                add_local(&mut l, f.plus.cell, f.plus.cell, &local);
            }
        }
    }
    Ok(l)
}
