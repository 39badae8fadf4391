//! Interior-penalty form of the purely anisotropic operator used by the
//! primal DG comparison scheme.

use alloc::vec;
use alloc::vec::Vec;

use super::{add_local, face_pattern};
use crate::sparse::BlockCsrMatrix;
use crate::space::{dot3, unit_field, DgSpace, MagneticField};
use crate::Result;

/// Matrix of `IP_b(T; φ)` (rows test functions), including `κ_Δ`:
///
/// `−⟨b·∇φ, κ_Δ b·∇T⟩ + ∫_Γ ⟦(b·n)T⟧{κ_Δ b·∇φ} + ∫_Γ ⟦(b·n)φ⟧{κ_Δ b·∇T}
///  − ∫_Γ κ_Δκ_p/h_e ⟦(b·n)φ⟧⟦(b·n)T⟧ − ∫_∂Ω 2κ_Δκ_p/h_e φT
///  + ∫_∂Ω κ_Δ(b·n)(b·∇φ)T + ∫_∂Ω κ_Δ(b·n)(b·∇T)φ`.
///
/// The form is symmetric and negative semidefinite; `T_BC` data enters
/// through [`primal_aniso_dirichlet_load`](super::primal_aniso_dirichlet_load).
pub fn assemble_primal_dg_aniso(
    space: &DgSpace,
    field: &dyn MagneticField,
    kappa_delta: f64,
    kappa_p: f64,
) -> Result<BlockCsrMatrix> {
    let nb = space.dofs_per_cell;
    let mut a = face_pattern(space);
    let mut local = vec![0.0; nb * nb];
    for cell in 0..space.n_cells() {
        let (pts, w, tab) = space.cell_quadrature(cell);
        local.fill(0.0);
        for q in 0..w.len() {
            let b = unit_field(field, cell, &pts[q])?;
            let bg: Vec<f64> = tab.grad_row(q).iter().map(|g| dot3(&b, g)).collect();
            for i in 0..nb {
                for j in 0..nb {
                    local[i * nb + j] -= w[q] * kappa_delta * bg[i] * bg[j];
                }
            }
        }
        add_local(&mut a, cell, cell, &local);
    }
    for (idx, f) in space.mesh.facets.iter().enumerate() {
        let fq = space.facet_quadrature(idx);
        let n = &f.normal;
        let nq = fq.weights.len();
        match (f.minus, fq.minus.as_ref()) {
            (Some(m), Some(mt)) => {
                let pen = kappa_p / f.h_e;
                // Per side: jump factor σ (b_s·n) φ and average factor ½ b_s·∇φ.
                let mut side_data = Vec::new();
                for (cell, tab, sigma) in [(f.plus.cell, &fq.plus, 1.0), (m.cell, mt, -1.0)] {
                    let mut jump = vec![0.0; nq * nb];
                    let mut avg = vec![0.0; nq * nb];
                    for q in 0..nq {
                        let b = unit_field(field, cell, &fq.points[q])?;
                        let bn = dot3(&b, n);
                        for i in 0..nb {
                            jump[q * nb + i] = sigma * bn * tab.value(q, i);
                            avg[q * nb + i] = 0.5 * dot3(&b, tab.grad(q, i));
                        }
                    }
                    side_data.push((cell, jump, avg));
                }
                for (tc, tj, ta) in &side_data {
                    for (uc, uj, ua) in &side_data {
                        local.fill(0.0);
                        for q in 0..nq {
                            let wq = fq.weights[q] * kappa_delta;
                            for i in 0..nb {
                                for j in 0..nb {
                                    let (ji, ai) = (tj[q * nb + i], ta[q * nb + i]);
                                    let (jj, aj) = (uj[q * nb + j], ua[q * nb + j]);
                                    local[i * nb + j] += wq * (jj * ai + ji * aj - pen * ji * jj);
                                }
                            }
                        }
                        add_local(&mut a, *tc, *uc, &local);
                    }
                }
            }
            _ => {
                let pen = 2.0 * kappa_p / f.h_e;
                local.fill(0.0);
                for q in 0..nq {
                    let b = unit_field(field, f.plus.cell, &fq.points[q])?;
                    let bn = dot3(&b, n);
                    let wq = fq.weights[q] * kappa_delta;
                    for i in 0..nb {
                        let (pi, gi) = (fq.plus.value(q, i), dot3(&b, fq.plus.grad(q, i)));
                        for j in 0..nb {
                            let (pj, gj) = (fq.plus.value(q, j), dot3(&b, fq.plus.grad(q, j)));
                            local[i * nb + j] += wq * (-pen * pi * pj + bn * gi * pj + bn * gj * pi);
                        }
                    }
                }
                add_local(&mut a, f.plus.cell, f.plus.cell, &local);
            }
        }
    }
    Ok(a)
}
