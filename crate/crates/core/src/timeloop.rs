//! Implicit midpoint time stepping.
//!
//! Each step solves for the midpoint values with the effective step `Δt/2`
//! in the mass scaling, then extrapolates `Tⁿ⁺¹ = 2Tⁿ⁺½ − Tⁿ`. The flux `ζ` is
//! algebraic: `ζⁿ⁺¹` is recovered from the ζ equation at `Tⁿ⁺¹` with the
//! data at `tⁿ⁺¹` (one block-diagonal mass solve), and the lagged inflow flux
//! `ζ_in` is set to `ζⁿ⁺¹`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::assembly::{
    assemble_data_loads, assemble_primal_data_load, assemble_primal_matrix, assemble_rhs, assemble_system_matrices,
    AssembledOperators, BoundaryKind, DataLoads, ProblemConfig, RhsInputs, SystemMatrices,
};
use crate::blocksolve::{LinearSolve, MixedSolver};
use crate::mesh::Point3;
use crate::sparse::{BlockCsrMatrix, BlockDiagonal};
use crate::space::{DgSpace, FieldVector};
use crate::{Error, Result};

/// State after `step` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeState {
    pub t: f64,
    pub step: usize,
    pub t_h: FieldVector,
    pub zeta: FieldVector,
    /// Lagged inflow flux used by the next step.
    pub zeta_in: FieldVector,
    pub records: Vec<StepRecord>,
}

impl TimeState {
    /// State at `t = 0` with the given fields.
    pub fn new(t_h: FieldVector, zeta: FieldVector) -> Self {
        TimeState {
            t: 0.0,
            step: 0,
            zeta_in: zeta.clone(),
            t_h,
            zeta,
            records: Vec::new(),
        }
    }
}

/// Statistics of one step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepRecord {
    /// Index of the step that produced this state (1-based).
    pub step: usize,
    pub time: f64,
    /// Relative L² error of `T` against the exact solution, when supplied.
    pub error: Option<f64>,
    pub outer_iterations: usize,
    /// Total inner iterations of the first (`−√κ_Δ G_b` or Schur) block.
    pub inner_first: usize,
    /// Total inner iterations of the second block.
    pub inner_second: usize,
    pub rel_residual: f64,
    /// Seconds, when a clock is supplied.
    pub wall_time: f64,
}

impl StepRecord {
    pub fn inner_total(&self) -> usize {
        self.inner_first + self.inner_second
    }
}

/// One implicit midpoint step of some scheme.
pub trait Stepper {
    fn space(&self) -> &DgSpace;
    fn dt(&self) -> f64;
    /// Advances `state` by one step and returns the step statistics.
    fn step(&mut self, state: &mut TimeState) -> Result<StepRecord>;
}

fn check_state(space: &DgSpace, state: &TimeState) -> Result<()> {
    let n = space.ndofs();
    if state.t_h.len() != n || state.zeta.len() != n || state.zeta_in.len() != n {
        return Err(Error::InvalidInput(format!("state vectors do not match the {n} degrees of freedom")));
    }
    Ok(())
}

fn step_failure(step: usize, e: Error) -> Error {
    match e {
        Error::NotConverged {
            context,
            iterations,
            rel_residual,
        } => Error::NotConverged {
            context: format!("time step {step}: {context}"),
            iterations,
            rel_residual,
        },
        other => other,
    }
}

/// Data loads at one time level, optionally cached when the data do not
/// depend on time.
#[derive(Debug)]
struct LoadCache {
    enabled: bool,
    loads: Option<DataLoads>,
}

impl LoadCache {
    fn get(
        &mut self,
        space: &DgSpace,
        ops: &AssembledOperators,
        cfg: &ProblemConfig,
        time: f64,
        dt_eff: f64,
    ) -> Result<DataLoads> {
        if self.enabled {
            if self.loads.is_none() {
                self.loads = Some(assemble_data_loads(space, ops, cfg, 0.0, Some(dt_eff))?);
            }
            let mut l = self.loads.clone().unwrap();
            l.time = time;
            return Ok(l);
        }
        assemble_data_loads(space, ops, cfg, time, Some(dt_eff))
    }
}

/// Builds a mixed-system solver for fixed matrices.
pub type SolverBuilder<'a> = dyn FnOnce(&SystemMatrices) -> Result<Box<dyn MixedSolver + 'a>> + 'a;

/// Implicit midpoint stepper for the mixed DG scheme (Dirichlet or Neumann).
pub struct MixedStepper<'a> {
    pub space: &'a DgSpace,
    pub ops: &'a AssembledOperators,
    pub cfg: &'a ProblemConfig,
    pub sys: SystemMatrices,
    solver: Box<dyn MixedSolver + 'a>,
    zz_inv: BlockDiagonal,
    cache: LoadCache,
}

impl core::fmt::Debug for MixedStepper<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("MixedStepper")
            .field("solver", &self.solver.name())
            .field("ndofs", &self.space.ndofs())
            .finish_non_exhaustive()
    }
}

impl<'a> MixedStepper<'a> {
    /// Assembles the midpoint system (effective step `Δt/2`) and builds its
    /// solver. `time_independent_data` caches the data loads.
    pub fn new(
        space: &'a DgSpace,
        ops: &'a AssembledOperators,
        cfg: &'a ProblemConfig,
        build: Box<SolverBuilder<'a>>,
        time_independent_data: bool,
    ) -> Result<Self> {
        if cfg.bc_kind != ops.bc_kind {
            return Err(Error::InvalidInput("operators were assembled for other boundary conditions".into()));
        }
        let sys = assemble_system_matrices(ops, cfg, Some(cfg.dt / 2.0))?;
        let zz_inv = sys.a_zz.block_diag_inverse()?;
        let solver = build(&sys)?;
        Ok(MixedStepper {
            space,
            ops,
            cfg,
            sys,
            solver,
            zz_inv,
            cache: LoadCache {
                enabled: time_independent_data,
                loads: None,
            },
        })
    }

    pub fn solver_name(&self) -> &'static str {
        self.solver.name()
    }

    /// `ζ = A_ζζ⁻¹(F_ζ(time) − A_ζT T)`, with `T_in = T` for Neumann problems.
    pub fn recover_zeta(&mut self, t_h: &[f64], time: f64) -> Result<FieldVector> {
        let h = self.cfg.dt / 2.0;
        let loads = self.cache.get(self.space, self.ops, self.cfg, time, h)?;
        let inputs = RhsInputs {
            t_prev: None,
            zeta_in: None,
            t_in: Some(t_h),
            time,
            dt_eff: Some(h),
        };
        let (_, mut f_z) = assemble_rhs(self.ops, self.cfg, &loads, &inputs)?;
        self.sys.a_zt.matvec_add(-1.0, t_h, &mut f_z);
        let mut zeta = FieldVector::zeros(f_z.len());
        self.zz_inv.apply(&f_z, &mut zeta);
        Ok(zeta)
    }

    /// Initial state from `T⁰` with `ζ⁰` recovered from the ζ equation.
    pub fn initial_state(&mut self, t0: FieldVector) -> Result<TimeState> {
        let zeta = self.recover_zeta(&t0, 0.0)?;
        Ok(TimeState::new(t0, zeta))
    }
}

impl Stepper for MixedStepper<'_> {
    fn space(&self) -> &DgSpace {
        self.space
    }

    fn dt(&self) -> f64 {
        self.cfg.dt
    }

    fn step(&mut self, state: &mut TimeState) -> Result<StepRecord> {
        check_state(self.space, state)?;
        let dt = self.cfg.dt;
        let h = dt / 2.0;
        let n_next = state.step + 1;
        let t_mid = state.t + h;
        let loads = self.cache.get(self.space, self.ops, self.cfg, t_mid, h)?;
        let neumann = self.cfg.bc_kind == BoundaryKind::Neumann;
        let inputs = RhsInputs {
            t_prev: Some(&state.t_h),
            zeta_in: (!neumann).then_some(&state.zeta_in[..]),
            t_in: neumann.then_some(&state.t_h[..]),
            time: t_mid,
            dt_eff: Some(h),
        };
        let (f_t, f_z) = assemble_rhs(self.ops, self.cfg, &loads, &inputs)?;
        let sol = self
            .solver
            .solve(&self.sys, &f_t, &f_z, Some((&state.t_h, &state.zeta)))
            .map_err(|e| step_failure(n_next, e))?;
        if !sol.stats.converged {
            let mut context = format!("time step {n_next}: {} strategy", self.solver.name());
            if let Some(d) = &sol.diagnostic {
                context.push_str(": ");
                context.push_str(d);
            }
            return Err(Error::NotConverged {
                context,
                iterations: sol.stats.iterations,
                rel_residual: sol.stats.rel_residual,
            });
        }
        let t_new: Vec<f64> = sol.t.iter().zip(state.t_h.iter()).map(|(m, o)| 2.0 * m - o).collect();
        let t_new = FieldVector::from_vec(t_new);
        let time = n_next as f64 * dt;
        let zeta = self.recover_zeta(&t_new, time)?;
        state.t_h = t_new;
        state.zeta_in = zeta.clone();
        state.zeta = zeta;
        state.step = n_next;
        state.t = time;
        Ok(StepRecord {
            step: n_next,
            time,
            error: None,
            outer_iterations: sol.stats.iterations,
            inner_first: sol.inner_first.iter().sum(),
            inner_second: sol.inner_second.iter().sum(),
            rel_residual: sol.stats.rel_residual,
            wall_time: 0.0,
        })
    }
}

/// Builds a scalar solver for the primal matrix.
pub type LinearSolveBuilder<'a> = dyn FnOnce(&BlockCsrMatrix) -> Result<Box<dyn LinearSolve + 'a>> + 'a;

/// Implicit midpoint stepper for the primal DG scheme
/// `(M + κ̃_BC M_BC,h)/(Δt/2) + κ_⊥ L − IP_b`.
pub struct PrimalStepper<'a> {
    pub space: &'a DgSpace,
    pub ops: &'a AssembledOperators,
    pub cfg: &'a ProblemConfig,
    pub matrix: BlockCsrMatrix,
    solver: Box<dyn LinearSolve + 'a>,
    cached: Option<FieldVector>,
    time_independent_data: bool,
}

impl core::fmt::Debug for PrimalStepper<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PrimalStepper")
            .field("ndofs", &self.space.ndofs())
            .finish_non_exhaustive()
    }
}

impl<'a> PrimalStepper<'a> {
    /// `ip_b` is the anisotropic interior-penalty matrix including `κ_Δ`.
    pub fn new(
        space: &'a DgSpace,
        ops: &'a AssembledOperators,
        cfg: &'a ProblemConfig,
        ip_b: &BlockCsrMatrix,
        build: Box<LinearSolveBuilder<'a>>,
        time_independent_data: bool,
    ) -> Result<Self> {
        let matrix = assemble_primal_matrix(ops, ip_b, cfg, cfg.dt / 2.0)?;
        let solver = build(&matrix)?;
        Ok(PrimalStepper {
            space,
            ops,
            cfg,
            matrix,
            solver,
            cached: None,
            time_independent_data,
        })
    }

    fn load(&mut self, time: f64) -> Result<FieldVector> {
        let h = self.cfg.dt / 2.0;
        if self.time_independent_data {
            if self.cached.is_none() {
                self.cached = Some(assemble_primal_data_load(self.space, self.ops, self.cfg, 0.0, h)?);
            }
            return Ok(self.cached.clone().unwrap());
        }
        assemble_primal_data_load(self.space, self.ops, self.cfg, time, h)
    }
}

impl Stepper for PrimalStepper<'_> {
    fn space(&self) -> &DgSpace {
        self.space
    }

    fn dt(&self) -> f64 {
        self.cfg.dt
    }

    fn step(&mut self, state: &mut TimeState) -> Result<StepRecord> {
        check_state(self.space, state)?;
        let dt = self.cfg.dt;
        let h = dt / 2.0;
        let n_next = state.step + 1;
        let mut rhs = self.load(state.t + h)?;
        self.ops.m.matvec_add(1.0 / h, &state.t_h, &mut rhs);
        let mut mid = state.t_h.values.clone();
        let stats = self.solver.solve(&rhs, &mut mid).map_err(|e| step_failure(n_next, e))?;
        if !stats.converged {
            return Err(Error::NotConverged {
                context: format!("time step {n_next}: primal DG solve"),
                iterations: stats.iterations,
                rel_residual: stats.rel_residual,
            });
        }
        for (m, o) in mid.iter_mut().zip(state.t_h.iter()) {
            *m = 2.0 * *m - o;
        }
        state.t_h = FieldVector::from_vec(mid);
        state.step = n_next;
        state.t = n_next as f64 * dt;
        Ok(StepRecord {
            step: n_next,
            time: state.t,
            error: None,
            outer_iterations: stats.iterations,
            inner_first: stats.total_inner_iterations(),
            inner_second: 0,
            rel_residual: stats.rel_residual,
            wall_time: 0.0,
        })
    }
}

/// Outcome of [`run_transient`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransientRun {
    pub records: Vec<StepRecord>,
    /// Set when the run stopped at the wall-time cap.
    pub stopped: Option<String>,
}

/// Limits of a transient run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunLimits {
    /// Largest average wall time per step in seconds.
    pub time_cap: Option<f64>,
}

/// Runs `n_steps` steps, measuring the relative L² error against
/// `exact(x, t)` after every step when supplied. `clock` returns seconds.
/// Solver non-convergence is returned as an error naming the step.
pub fn run_transient(
    stepper: &mut dyn Stepper,
    state: &mut TimeState,
    n_steps: usize,
    exact: Option<&dyn Fn(&Point3, f64) -> f64>,
    clock: &dyn Fn() -> f64,
    limits: RunLimits,
) -> Result<TransientRun> {
    let mut total_time = 0.0;
    for k in 0..n_steps {
        let start = clock();
        let mut rec = stepper.step(state)?;
        rec.wall_time = clock() - start;
        total_time += rec.wall_time;
        if let Some(exact) = exact {
            let t = state.t;
            rec.error = Some(stepper.space().l2_error(&state.t_h, &|x| exact(x, t))?);
        }
        state.records.push(rec);
        if let Some(cap) = limits.time_cap {
            let avg = total_time / (k + 1) as f64;
            if avg > cap {
                return Ok(TransientRun {
                    records: state.records.clone(),
                    stopped: Some(format!("average wall time {avg:.1} s per step exceeds the cap of {cap} s")),
                });
            }
        }
    }
    Ok(TransientRun {
        records: state.records.clone(),
        stopped: None,
    })
}

/// Mean error over the last two steps.
pub fn last_two_error_mean(records: &[StepRecord]) -> Option<f64> {
    if records.len() < 2 {
        return None;
    }
    let tail = &records[records.len() - 2..];
    Some((tail[0].error? + tail[1].error?) / 2.0)
}

/// Per-step averages over a window of steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepAverages {
    pub steps: usize,
    pub outer_iterations: f64,
    pub inner_first: f64,
    pub inner_second: f64,
    pub inner_total: f64,
    pub wall_time: f64,
}

/// Averages over the records with `first ≤ step ≤ last`; `None` when the
/// window is empty.
pub fn average_steps(records: &[StepRecord], first: usize, last: usize) -> Option<StepAverages> {
    let sel: Vec<&StepRecord> = records.iter().filter(|r| r.step >= first && r.step <= last).collect();
    if sel.is_empty() {
        return None;
    }
    let k = sel.len() as f64;
    let mean = |f: &dyn Fn(&StepRecord) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / k;
    Some(StepAverages {
        steps: sel.len(),
        outer_iterations: mean(&|r| r.outer_iterations as f64),
        inner_first: mean(&|r| r.inner_first as f64),
        inner_second: mean(&|r| r.inner_second as f64),
        inner_total: mean(&|r| r.inner_total() as f64),
        wall_time: mean(&|r| r.wall_time),
    })
}

/// Averages over steps 2–5, skipping the first step.
pub fn solver_study_averages(records: &[StepRecord]) -> Option<StepAverages> {
    average_steps(records, 2, 5)
}

#[cfg(test)]
mod tests;
