//! The 2×2 mixed block system, its right-hand sides, and the primal DG system.

use alloc::vec::Vec;

use super::{
    boundary_load, forcing_load, ip_dirichlet_load, primal_aniso_dirichlet_load, AssembledOperators, BoundaryKind,
    ProblemConfig,
};
use crate::sparse::{axpy, BlockCsrMatrix};
use crate::space::{DgSpace, FieldVector};
use crate::{Error, Result};

/// Blocks of the mixed system in standard ordering
/// `[[A_TT, A_Tζ], [A_ζT, A_ζζ]] (T, ζ)ᵀ = (F_T, F_ζ)ᵀ`.
#[derive(Debug, Clone)]
pub struct SystemMatrices {
    pub a_tt: BlockCsrMatrix,
    /// `√κ_Δ G_bᵀ`, formed as the exact transpose of `−A_ζT`.
    pub a_tz: BlockCsrMatrix,
    /// `−√κ_Δ G_b`.
    pub a_zt: BlockCsrMatrix,
    /// `M` (Dirichlet) or `M + κ̃_BC M_BC,h` (Neumann); block diagonal.
    pub a_zz: BlockCsrMatrix,
    pub sqrt_kappa_delta: f64,
}

impl SystemMatrices {
    pub fn ndofs(&self) -> usize {
        self.a_tt.nrows()
    }

    /// `y = A x` for `x = (T, ζ)` in standard ordering.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.ndofs();
        let (xt, xz) = x.split_at(n);
        let (yt, yz) = y.split_at_mut(n);
        self.a_tt.matvec(xt, yt);
        self.a_tz.matvec_add(1.0, xz, yt);
        self.a_zt.matvec(xt, yz);
        self.a_zz.matvec_add(1.0, xz, yz);
    }
}

/// A mixed system with its right-hand side.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrices: SystemMatrices,
    pub f_t: FieldVector,
    pub f_z: FieldVector,
}

/// Assembles the mixed block matrices for time step `dt_eff`; `None`
/// drops the mass and boundary-penalty terms (steady problem).
pub fn assemble_system_matrices(
    ops: &AssembledOperators,
    cfg: &ProblemConfig,
    dt_eff: Option<f64>,
) -> Result<SystemMatrices> {
    cfg.validate()?;
    let sk = cfg.kappa_delta().sqrt();
    let a_zt = ops.g_b.scaled(-sk);
    let a_tz = ops.g_b.transpose().scaled(sk);
    let (a_tt, a_zz) = match cfg.bc_kind {
        BoundaryKind::Dirichlet => {
            let a_tt = match dt_eff {
                Some(dt) => BlockCsrMatrix::linear_combination(&[
                    (1.0 / dt, &ops.m),
                    (cfg.kappa_bc / dt, &ops.m_bc_he),
                    (cfg.kappa_perp, &ops.l),
                ]),
                None => BlockCsrMatrix::linear_combination(&[(cfg.kappa_perp, &ops.l)]),
            };
            (a_tt, ops.m.clone())
        }
        BoundaryKind::Neumann => {
            let a_tt = match dt_eff {
                Some(dt) => BlockCsrMatrix::linear_combination(&[(1.0 / dt, &ops.m), (cfg.kappa_perp, &ops.l)]),
                None => BlockCsrMatrix::linear_combination(&[(cfg.kappa_perp, &ops.l)]),
            };
            let a_zz = BlockCsrMatrix::linear_combination(&[(1.0, &ops.m), (cfg.kappa_bc, &ops.m_bc_he)]);
            (a_tt, a_zz)
        }
    };
    Ok(SystemMatrices {
        a_tt,
        a_tz,
        a_zt,
        a_zz,
        sqrt_kappa_delta: sk,
    })
}

/// Time-level inputs of a right-hand side.
#[derive(Debug, Clone, Copy)]
pub struct RhsInputs<'a> {
    /// Previous temperature `Tⁿ`, multiplied by `M/dt_eff`; ignored when steady.
    pub t_prev: Option<&'a [f64]>,
    /// Lagged inflow flux `ζ_in` (Dirichlet).
    pub zeta_in: Option<&'a [f64]>,
    /// Lagged outflow temperature `T_in` (Neumann).
    pub t_in: Option<&'a [f64]>,
    /// Time at which the data are evaluated.
    pub time: f64,
    /// Effective step; `None` for the steady problem.
    pub dt_eff: Option<f64>,
}

/// Parts of the right-hand side that depend only on the data at one time.
#[derive(Debug, Clone)]
pub struct DataLoads {
    pub f_t: FieldVector,
    pub f_z: FieldVector,
    pub time: f64,
    pub dt_eff: Option<f64>,
}

/// Data-only loads: forcing, Dirichlet penalty/consistency and outflow
/// terms, or the Neumann flux terms.
pub fn assemble_data_loads(
    space: &DgSpace,
    ops: &AssembledOperators,
    cfg: &ProblemConfig,
    time: f64,
    dt_eff: Option<f64>,
) -> Result<DataLoads> {
    let n = space.ndofs();
    let sk = cfg.kappa_delta().sqrt();
    let mut f_t = match &cfg.forcing {
        Some(s) => forcing_load(space, &|x| s(x, time)),
        None => FieldVector::zeros(n),
    };
    let mut f_z = FieldVector::zeros(n);
    let field = ops.field.as_ref();
    match cfg.bc_kind {
        BoundaryKind::Dirichlet => {
            if let Some(g) = &cfg.t_bc {
                let pen = dt_eff.map_or(0.0, |dt| cfg.kappa_bc / dt);
                let kperp = cfg.kappa_perp;
                let bdry = boundary_load(space, None, &|p| pen * p.h_e * g(&p.x, time))?;
                axpy(1.0, &bdry, &mut f_t);
                if kperp != 0.0 {
                    let cons = ip_dirichlet_load(space, &|x| g(x, time))?;
                    axpy(-kperp, &cons, &mut f_t);
                }
                f_z = boundary_load(space, Some(field), &|p| if p.bn > 0.0 { sk * p.bn * g(&p.x, time) } else { 0.0 })?;
            }
        }
        BoundaryKind::Neumann => {
            let kpar = cfg.kappa_par;
            let kd = cfg.kappa_delta();
            let kperp = cfg.kappa_perp;
            let q_par = |x: &_| cfg.q_par_bc.as_ref().map_or(0.0, |q| q(x, time));
            let q_perp = |x: &_| cfg.q_perp_bc.as_ref().map_or(0.0, |q| q(x, time));
            let bdry = boundary_load(space, Some(field), &|p| {
                let qp = q_par(&p.x);
                let inflow = if p.bn < 0.0 { kd / kpar * qp } else { 0.0 };
                inflow + kperp / kpar * qp + q_perp(&p.x)
            })?;
            axpy(1.0, &bdry, &mut f_t);
            f_z = boundary_load(space, Some(field), &|p| cfg.kappa_bc * p.h_e * p.bn * sk * q_par(&p.x) / kpar)?;
        }
    }
    Ok(DataLoads { f_t, f_z, time, dt_eff })
}

/// Full right-hand side `(F_T, F_ζ)` from cached data loads and the
/// time-level vectors.
pub fn assemble_rhs(
    ops: &AssembledOperators,
    cfg: &ProblemConfig,
    loads: &DataLoads,
    inputs: &RhsInputs<'_>,
) -> Result<(FieldVector, FieldVector)> {
    if loads.dt_eff != inputs.dt_eff || loads.time != inputs.time {
        return Err(Error::InvalidInput("data loads were assembled for a different time level".into()));
    }
    let sk = cfg.kappa_delta().sqrt();
    let mut f_t = loads.f_t.clone();
    let mut f_z = loads.f_z.clone();
    if let (Some(dt), Some(t_prev)) = (inputs.dt_eff, inputs.t_prev) {
        ops.m.matvec_add(1.0 / dt, t_prev, &mut f_t);
    }
    match cfg.bc_kind {
        BoundaryKind::Dirichlet => {
            if let Some(z) = inputs.zeta_in {
                ops.m_in.matvec_add(sk, z, &mut f_t);
            }
        }
        BoundaryKind::Neumann => {
            if let Some(t_in) = inputs.t_in {
                ops.m_out.matvec_add(sk, t_in, &mut f_z);
            }
        }
    }
    Ok((f_t, f_z))
}

/// Assembles the complete mixed system at one time level.
pub fn assemble_mixed_system(
    space: &DgSpace,
    ops: &AssembledOperators,
    cfg: &ProblemConfig,
    inputs: &RhsInputs<'_>,
) -> Result<AssembledSystem> {
    let matrices = assemble_system_matrices(ops, cfg, inputs.dt_eff)?;
    let loads = assemble_data_loads(space, ops, cfg, inputs.time, inputs.dt_eff)?;
    let (f_t, f_z) = assemble_rhs(ops, cfg, &loads, inputs)?;
    Ok(AssembledSystem { matrices, f_t, f_z })
}

/// Single-field primal DG operator `(M + κ̃_BC M_BC,h)/dt + κ_⊥ L − IP_b`
/// (Dirichlet only).
pub fn assemble_primal_matrix(
    ops: &AssembledOperators,
    ip_b: &BlockCsrMatrix,
    cfg: &ProblemConfig,
    dt_eff: f64,
) -> Result<BlockCsrMatrix> {
    cfg.validate()?;
    if cfg.bc_kind != BoundaryKind::Dirichlet {
        return Err(Error::InvalidInput("the primal DG scheme supports Dirichlet conditions only".into()));
    }
    Ok(BlockCsrMatrix::linear_combination(&[
        (1.0 / dt_eff, &ops.m),
        (cfg.kappa_bc / dt_eff, &ops.m_bc_he),
        (cfg.kappa_perp, &ops.l),
        (-1.0, ip_b),
    ]))
}

/// Data part of the primal DG right-hand side at `time`.
pub fn assemble_primal_data_load(
    space: &DgSpace,
    ops: &AssembledOperators,
    cfg: &ProblemConfig,
    time: f64,
    dt_eff: f64,
) -> Result<FieldVector> {
    let n = space.ndofs();
    let mut f = match &cfg.forcing {
        Some(s) => forcing_load(space, &|x| s(x, time)),
        None => FieldVector::zeros(n),
    };
    if let Some(g) = &cfg.t_bc {
        let pen = cfg.kappa_bc / dt_eff;
        let bdry = boundary_load(space, None, &|p| pen * p.h_e * g(&p.x, time))?;
        axpy(1.0, &bdry, &mut f);
        if cfg.kappa_perp != 0.0 {
            let cons = ip_dirichlet_load(space, &|x| g(x, time))?;
            axpy(-cfg.kappa_perp, &cons, &mut f);
        }
        let kd = cfg.kappa_delta();
        if kd != 0.0 {
            let aniso = primal_aniso_dirichlet_load(space, ops.field.as_ref(), kd, cfg.kappa_p_aniso, &|x| g(x, time))?;
            axpy(1.0, &aniso, &mut f);
        }
    }
    Ok(f)
}

/// Concatenates `(T, ζ)` into one standard-ordered vector.
pub fn stack(t: &[f64], z: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(t.len() + z.len());
    v.extend_from_slice(t);
    v.extend_from_slice(z);
    v
}
