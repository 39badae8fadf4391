use alloc::vec;

use super::{add_local, diagonal_pattern};
use crate::sparse::BlockCsrMatrix;
use crate::space::{dot3, unit_field, DgSpace, MagneticField};
use crate::Result;

/// `M_ij = ⟨φ_i, φ_j⟩`, block diagonal.
pub fn assemble_mass(space: &DgSpace) -> BlockCsrMatrix {
    let nb = space.dofs_per_cell;
    let mut m = diagonal_pattern(space);
    let reference = space.reference_mass();
    for cell in 0..space.n_cells() {
        let g = space.mesh.cell_geometry(cell);
        let jac = g.det2 * g.dz;
        let blk = m.block_mut(cell, cell);
        for i in 0..nb {
            for j in 0..nb {
                blk[i * nb + j] = jac * reference[(i, j)];
            }
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryWeight {
    Unit,
    He,
    HeInv,
}

/// `∫_∂Ω w φ_i φ_j dS` with `w ∈ {1, h_e, 1/h_e}`.
pub fn assemble_boundary_mass(space: &DgSpace, weight: BoundaryWeight) -> BlockCsrMatrix {
    let nb = space.dofs_per_cell;
    let mut m = diagonal_pattern(space);
    let mut local = vec![0.0; nb * nb];
    for (idx, f) in space.mesh.boundary_facets() {
        let w = match weight {
            BoundaryWeight::Unit => 1.0,
            BoundaryWeight::He => f.h_e,
            BoundaryWeight::HeInv => 1.0 / f.h_e,
        };
        let fq = space.facet_quadrature(idx);
        local.fill(0.0);
        for (q, &wq) in fq.weights.iter().enumerate() {
            let phi = fq.plus.row(q);
            for i in 0..nb {
                let s = w * wq * phi[i];
                for j in 0..nb {
                    local[i * nb + j] += s * phi[j];
                }
            }
        }
        add_local(&mut m, f.plus.cell, f.plus.cell, &local);
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxSide {
    Inflow,
    Outflow,
}

/// `∫ (b·n) φ_i φ_j dS` over the inflow (b·n < 0) or outflow (b·n > 0) part
/// of the boundary, classified per quadrature point.
pub fn assemble_boundary_flux_mass(space: &DgSpace, field: &dyn MagneticField, side: FluxSide) -> Result<BlockCsrMatrix> {
    let nb = space.dofs_per_cell;
    let mut m = diagonal_pattern(space);
    let mut local = vec![0.0; nb * nb];
    for (idx, f) in space.mesh.boundary_facets() {
        let fq = space.facet_quadrature(idx);
        local.fill(0.0);
        for (q, &wq) in fq.weights.iter().enumerate() {
            let b = unit_field(field, f.plus.cell, &fq.points[q])?;
            let bn = dot3(&b, &f.normal);
            let keep = match side {
                FluxSide::Inflow => bn < 0.0,
                FluxSide::Outflow => bn > 0.0,
            };
            if !keep {
                continue;
            }
            let phi = fq.plus.row(q);
            for i in 0..nb {
                let s = wq * bn * phi[i];
                for j in 0..nb {
                    local[i * nb + j] += s * phi[j];
                }
            }
        }
        add_local(&mut m, f.plus.cell, f.plus.cell, &local);
    }
    Ok(m)
}
