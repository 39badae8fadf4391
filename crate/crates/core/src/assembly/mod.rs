//! Assembly of the discrete operators and right-hand sides.
//!
//! Conventions: `G_b` is the matrix of `−L_b(θ; φ)/√κ_Δ` with rows indexed by
//! the upwinded argument θ, so the mixed system carries `√κ_Δ G_bᵀ` in the
//! (T, ζ) block and `−√κ_Δ G_b` in the (ζ, T) block. `L` is the negative of the
//! interior-penalty form with `κ_⊥` factored out.

mod laplacian;
mod mass;
mod primal;
mod rhs;
mod system;
mod transport;

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;

pub use laplacian::{assemble_ip_laplacian, LaplacianBoundary};
pub use mass::{assemble_boundary_flux_mass, assemble_boundary_mass, assemble_mass, BoundaryWeight, FluxSide};
pub use primal::assemble_primal_dg_aniso;
pub use rhs::{
    boundary_load, forcing_load, ip_dirichlet_load, primal_aniso_dirichlet_load, BoundaryPoint,
};
pub use system::{
    assemble_data_loads, assemble_mixed_system, assemble_primal_data_load, assemble_primal_matrix, assemble_rhs,
    assemble_system_matrices, stack, AssembledSystem, DataLoads, RhsInputs, SystemMatrices,
};
pub use transport::{assemble_transport, assemble_transport_trial_form};

use crate::mesh::Point3;
use crate::sparse::BlockCsrMatrix;
use crate::space::{DgSpace, MagneticField};
use crate::{Error, Result};

/// Time-dependent scalar data `(x, t) ↦ value`.
pub type ScalarFn = Box<dyn Fn(&Point3, f64) -> f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// Physical and numerical parameters plus boundary and source data.
pub struct ProblemConfig {
    pub kappa_par: f64,
    pub kappa_perp: f64,
    pub dt: f64,
    /// Interior penalty constant of the isotropic Laplacian.
    pub kappa_p: f64,
    /// Non-dimensional boundary penalty constant.
    pub kappa_bc: f64,
    /// Interior penalty constant of the primal anisotropic form.
    pub kappa_p_aniso: f64,
    pub bc_kind: BoundaryKind,
    pub forcing: Option<ScalarFn>,
    pub t_bc: Option<ScalarFn>,
    pub q_par_bc: Option<ScalarFn>,
    pub q_perp_bc: Option<ScalarFn>,
}

impl core::fmt::Debug for ProblemConfig {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ProblemConfig")
            .field("kappa_par", &self.kappa_par)
            .field("kappa_perp", &self.kappa_perp)
            .field("dt", &self.dt)
            .field("kappa_p", &self.kappa_p)
            .field("kappa_bc", &self.kappa_bc)
            .field("kappa_p_aniso", &self.kappa_p_aniso)
            .field("bc_kind", &self.bc_kind)
            .finish_non_exhaustive()
    }
}

impl ProblemConfig {
    /// Defaults: κ_p = 2, κ̃_BC = 20, anisotropic κ_p = 10, Dirichlet, no data.
    pub fn new(kappa_par: f64, kappa_perp: f64, dt: f64) -> Self {
        ProblemConfig {
            kappa_par,
            kappa_perp,
            dt,
            kappa_p: 2.0,
            kappa_bc: 20.0,
            kappa_p_aniso: 10.0,
            bc_kind: BoundaryKind::Dirichlet,
            forcing: None,
            t_bc: None,
            q_par_bc: None,
            q_perp_bc: None,
        }
    }

    pub fn kappa_delta(&self) -> f64 {
        self.kappa_par - self.kappa_perp
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_perp >= 0.0 && self.kappa_par >= self.kappa_perp) {
            return Err(Error::InvalidInput(format!(
                "conductivities must satisfy kappa_par >= kappa_perp >= 0 (got {} and {})",
                self.kappa_par, self.kappa_perp
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidInput(format!("time step {} must be positive", self.dt)));
        }
        if !(self.kappa_p > 0.0 && self.kappa_bc >= 0.0 && self.kappa_p_aniso > 0.0) {
            return Err(Error::InvalidInput("penalty constants must be positive".into()));
        }
        Ok(())
    }
}

/// All parameter-free operators of the discretization.
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    pub m: BlockCsrMatrix,
    pub m_bc_he: BlockCsrMatrix,
    pub m_bc_heinv: BlockCsrMatrix,
    /// IP Laplacian: with boundary consistency terms for Dirichlet problems,
    /// without boundary terms for Neumann problems.
    pub l: BlockCsrMatrix,
    pub bc_kind: BoundaryKind,
    pub g_b: BlockCsrMatrix,
    /// `∫_in (b·n) φ_i φ_j`, the inflow trace coupling.
    pub m_in: BlockCsrMatrix,
    /// `∫_out (b·n) φ_i φ_j`, the outflow trace coupling.
    pub m_out: BlockCsrMatrix,
    pub field: Arc<dyn MagneticField>,
}

impl core::fmt::Debug for dyn MagneticField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("MagneticField")
    }
}

impl AssembledOperators {
    pub fn assemble(
        space: &DgSpace,
        field: Arc<dyn MagneticField>,
        kappa_p: f64,
        bc_kind: BoundaryKind,
    ) -> Result<Self> {
        let b = field.as_ref();
        let lb = match bc_kind {
            BoundaryKind::Dirichlet => LaplacianBoundary::Dirichlet,
            BoundaryKind::Neumann => LaplacianBoundary::Neumann,
        };
        Ok(AssembledOperators {
            m: assemble_mass(space),
            m_bc_he: assemble_boundary_mass(space, BoundaryWeight::He),
            m_bc_heinv: assemble_boundary_mass(space, BoundaryWeight::HeInv),
            l: assemble_ip_laplacian(space, kappa_p, lb)?,
            bc_kind,
            g_b: assemble_transport(space, b)?,
            m_in: assemble_boundary_flux_mass(space, b, FluxSide::Inflow)?,
            m_out: assemble_boundary_flux_mass(space, b, FluxSide::Outflow)?,
            field,
        })
    }
}

/// Adds a dense local block into `(row, col)` of a block matrix.
fn add_local(m: &mut BlockCsrMatrix, row: usize, col: usize, local: &[f64]) {
    for (d, s) in m.block_mut(row, col).iter_mut().zip(local) {
        *d += s;
    }
}

/// Zero matrix with the cell/face-neighbour block pattern.
fn face_pattern(space: &DgSpace) -> BlockCsrMatrix {
    let adj = space.mesh.cell_adjacency();
    BlockCsrMatrix::from_pattern(space.n_cells(), space.dofs_per_cell, &adj)
}

/// Zero block-diagonal matrix.
fn diagonal_pattern(space: &DgSpace) -> BlockCsrMatrix {
    let rows: alloc::vec::Vec<alloc::vec::Vec<usize>> = (0..space.n_cells()).map(|c| alloc::vec![c]).collect();
    BlockCsrMatrix::from_pattern(space.n_cells(), space.dofs_per_cell, &rows)
}
