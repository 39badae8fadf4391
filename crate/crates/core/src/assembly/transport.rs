//! Upwind DG transport operators.
//!
//! Upwind select on an interior facet with `n = n⁺` (outward from +):
//! the trace comes from the + cell when `b⁺·n⁺ > 0` and from the − cell
//! otherwise. The facet jump is `⟦φ b·n⟧ = φ⁺(b⁺·n⁺) − φ⁻(b⁻·n⁺)`.

use alloc::vec;
use alloc::vec::Vec;

use super::{add_local, face_pattern};
use crate::sparse::BlockCsrMatrix;
use crate::space::{dot3, unit_field, DgSpace, MagneticField};
use crate::Result;

/// `G_b[i][j] = −L_b(θ = φ_i; φ = φ_j)/√κ_Δ`: rows follow the upwinded argument.
///
/// Volume `∫ φ_i b·∇φ_j`; interior facets `−∫ φ̃_i ⟦φ_j b·n⟧`; outflow
/// boundary `−∫ (b·n) φ_i φ_j`. Exact-zero blocks are pruned.
pub fn assemble_transport(space: &DgSpace, field: &dyn MagneticField) -> Result<BlockCsrMatrix> {
    let nb = space.dofs_per_cell;
    let mut g = face_pattern(space);
    let mut local = vec![0.0; nb * nb];
    for cell in 0..space.n_cells() {
        let (pts, w, tab) = space.cell_quadrature(cell);
        local.fill(0.0);
        for q in 0..w.len() {
            let b = unit_field(field, cell, &pts[q])?;
            let phi = tab.row(q);
            let bgrad: Vec<f64> = tab.grad_row(q).iter().map(|gr| dot3(&b, gr)).collect();
            for i in 0..nb {
                let s = w[q] * phi[i];
                for j in 0..nb {
                    local[i * nb + j] += s * bgrad[j];
                }
            }
        }
        add_local(&mut g, cell, cell, &local);
    }
    let mut up_plus = vec![0.0; nb * nb];
    for (idx, f) in space.mesh.facets.iter().enumerate() {
        let fq = space.facet_quadrature(idx);
        match (f.minus, fq.minus.as_ref()) {
            (Some(m), Some(mt)) => {
                // Blocks (u, +) and (u, −) for both possible upwind sides u.
                let mut pp = vec![0.0; nb * nb];
                let mut pm = vec![0.0; nb * nb];
                let mut mp = vec![0.0; nb * nb];
                let mut mm = vec![0.0; nb * nb];
                for q in 0..fq.weights.len() {
                    let x = &fq.points[q];
                    let bn_p = dot3(&unit_field(field, f.plus.cell, x)?, &f.normal);
                    let bn_m = dot3(&unit_field(field, m.cell, x)?, &f.normal);
                    let wq = fq.weights[q];
                    let (phi_p, phi_m) = (fq.plus.row(q), mt.row(q));
                    let (theta, to_plus, to_minus) = if bn_p > 0.0 {
                        (phi_p, &mut pp, &mut pm)
                    } else {
                        (phi_m, &mut mp, &mut mm)
                    };
                    for i in 0..nb {
                        let s = wq * theta[i];
                        for j in 0..nb {
                            to_plus[i * nb + j] -= s * phi_p[j] * bn_p;
                            to_minus[i * nb + j] += s * phi_m[j] * bn_m;
                        }
                    }
                }
                add_local(&mut g, f.plus.cell, f.plus.cell, &pp);
                add_local(&mut g, f.plus.cell, m.cell, &pm);
                add_local(&mut g, m.cell, f.plus.cell, &mp);
                add_local(&mut g, m.cell, m.cell, &mm);
            }
            _ => {
                up_plus.fill(0.0);
                for q in 0..fq.weights.len() {
                    let bn = dot3(&unit_field(field, f.plus.cell, &fq.points[q])?, &f.normal);
                    if bn <= 0.0 {
                        continue;
                    }
                    let phi = fq.plus.row(q);
                    for i in 0..nb {
                        let s = fq.weights[q] * bn * phi[i];
                        for j in 0..nb {
                            up_plus[i * nb + j] -= s * phi[j];
                        }
                    }
                }
                add_local(&mut g, f.plus.cell, f.plus.cell, &up_plus);
            }
        }
    }
    g.prune_zero_blocks();
    Ok(g)
}

/// The (T, ζ) block of the mixed system divided by `√κ_Δ`, assembled
/// directly from `−L_b(ζ; φ)` with rows indexed by the test function φ and
/// columns by the upwinded trial function ζ. Equals `G_bᵀ` up to rounding.
pub fn assemble_transport_trial_form(space: &DgSpace, field: &dyn MagneticField) -> Result<BlockCsrMatrix> {
    let nb = space.dofs_per_cell;
    let mut a = face_pattern(space);
    for cell in 0..space.n_cells() {
        let (pts, w, tab) = space.cell_quadrature(cell);
        let mut local = vec![0.0; nb * nb];
        for q in 0..w.len() {
            let b = unit_field(field, cell, &pts[q])?;
            for i in 0..nb {
                let test = w[q] * dot3(&b, tab.grad(q, i));
                for j in 0..nb {
                    local[i * nb + j] += test * tab.value(q, j);
                }
            }
        }
        add_local(&mut a, cell, cell, &local);
    }
    for (idx, f) in space.mesh.facets.iter().enumerate() {
        let fq = space.facet_quadrature(idx);
        let Some(m) = f.minus else {
            let mut local = vec![0.0; nb * nb];
            for q in 0..fq.weights.len() {
                let bn = dot3(&unit_field(field, f.plus.cell, &fq.points[q])?, &f.normal);
                if bn > 0.0 {
                    for i in 0..nb {
                        for j in 0..nb {
                            local[i * nb + j] -= fq.weights[q] * bn * fq.plus.value(q, i) * fq.plus.value(q, j);
                        }
                    }
                }
            }
            add_local(&mut a, f.plus.cell, f.plus.cell, &local);
            continue;
        };
        let mt = fq.minus.as_ref().expect("interior facet has two traces");
        for q in 0..fq.weights.len() {
            let x = &fq.points[q];
            let bn_p = dot3(&unit_field(field, f.plus.cell, x)?, &f.normal);
            let bn_m = dot3(&unit_field(field, m.cell, x)?, &f.normal);
            let (up_cell, up_tab) = if bn_p > 0.0 { (f.plus.cell, &fq.plus) } else { (m.cell, mt) };
            // Test on the + side sees −φ⁺ b⁺·n, on the − side +φ⁻ b⁻·n.
            for (test_cell, test_tab, coeff) in [(f.plus.cell, &fq.plus, -bn_p), (m.cell, mt, bn_m)] {
                let mut local = vec![0.0; nb * nb];
                for i in 0..nb {
                    let s = fq.weights[q] * coeff * test_tab.value(q, i);
                    for j in 0..nb {
                        local[i * nb + j] += s * up_tab.value(q, j);
                    }
                }
                add_local(&mut a, test_cell, up_cell, &local);
            }
        }
    }
    a.prune_zero_blocks();
    Ok(a)
}
