//! Load vectors from volume and boundary data.

use crate::mesh::Point3;
use crate::space::{dot3, unit_field, DgSpace, FieldVector, MagneticField};
use crate::Result;

/// Data available at a boundary quadrature point.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub x: Point3,
    pub normal: [f64; 3],
    pub h_e: f64,
    /// Unit field direction, zero when no field was supplied.
    pub b: [f64; 3],
    pub bn: f64,
    pub cell: usize,
}

/// `∫ φ_i f dx`.
pub fn forcing_load(space: &DgSpace, f: &dyn Fn(&Point3) -> f64) -> FieldVector {
    let nb = space.dofs_per_cell;
    let mut out = FieldVector::zeros(space.ndofs());
    for cell in 0..space.n_cells() {
        let (pts, w, tab) = space.cell_quadrature(cell);
        let dst = &mut out[cell * nb..(cell + 1) * nb];
        for q in 0..w.len() {
            let s = w[q] * f(&pts[q]);
            for (d, v) in dst.iter_mut().zip(tab.row(q)) {
                *d += s * v;
            }
        }
    }
    out
}

/// Visits every boundary quadrature point with its weight and basis table row.
fn for_each_boundary_point(
    space: &DgSpace,
    field: Option<&dyn MagneticField>,
    mut visit: impl FnMut(&BoundaryPoint, f64, &[f64], &[[f64; 3]]),
) -> Result<()> {
    for (idx, f) in space.mesh.boundary_facets() {
        let fq = space.facet_quadrature(idx);
        for q in 0..fq.weights.len() {
            let x = fq.points[q];
            let b = match field {
                Some(field) => unit_field(field, f.plus.cell, &x)?,
                None => [0.0; 3],
            };
            let p = BoundaryPoint {
                x,
                normal: f.normal,
                h_e: f.h_e,
                b,
                bn: dot3(&b, &f.normal),
                cell: f.plus.cell,
            };
            visit(&p, fq.weights[q], fq.plus.row(q), fq.plus.grad_row(q));
        }
    }
    Ok(())
}

/// `∫_∂Ω g(p) φ_i dS` for a pointwise integrand built from [`BoundaryPoint`].
pub fn boundary_load(
    space: &DgSpace,
    field: Option<&dyn MagneticField>,
    g: &dyn Fn(&BoundaryPoint) -> f64,
) -> Result<FieldVector> {
    let nb = space.dofs_per_cell;
    let mut out = FieldVector::zeros(space.ndofs());
    for_each_boundary_point(space, field, |p, w, phi, _| {
        let s = w * g(p);
        if s != 0.0 {
            for (d, v) in out[p.cell * nb..(p.cell + 1) * nb].iter_mut().zip(phi) {
                *d += s * v;
            }
        }
    })?;
    Ok(out)
}

/// `∫_∂Ω (n·∇φ_i) g dS`, the Dirichlet consistency load of the IP Laplacian.
pub fn ip_dirichlet_load(space: &DgSpace, g: &dyn Fn(&Point3) -> f64) -> Result<FieldVector> {
    let nb = space.dofs_per_cell;
    let mut out = FieldVector::zeros(space.ndofs());
    for_each_boundary_point(space, None, |p, w, _, grads| {
        let s = w * g(&p.x);
        for (d, gr) in out[p.cell * nb..(p.cell + 1) * nb].iter_mut().zip(grads) {
            *d += s * dot3(gr, &p.normal);
        }
    })?;
    Ok(out)
}

/// Dirichlet load matching [`assemble_primal_dg_aniso`](super::assemble_primal_dg_aniso):
/// `∫_∂Ω 2κ_Δκ_p/h_e φ_i g − κ_Δ (b·n)(b·∇φ_i) g dS`.
pub fn primal_aniso_dirichlet_load(
    space: &DgSpace,
    field: &dyn MagneticField,
    kappa_delta: f64,
    kappa_p: f64,
    g: &dyn Fn(&Point3) -> f64,
) -> Result<FieldVector> {
    let nb = space.dofs_per_cell;
    let mut out = FieldVector::zeros(space.ndofs());
    for_each_boundary_point(space, Some(field), |p, w, phi, grads| {
        let s = w * kappa_delta * g(&p.x);
        let pen = 2.0 * kappa_p / p.h_e;
        for ((d, v), gr) in out[p.cell * nb..(p.cell + 1) * nb].iter_mut().zip(phi).zip(grads) {
            *d += s * (pen * v - p.bn * dot3(&p.b, gr));
        }
    })?;
    Ok(out)
}
