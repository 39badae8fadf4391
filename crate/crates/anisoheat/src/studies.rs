//! The experiments behind the subcommands. Each runner returns its tables;
//! the CLI writes them to CSV.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use anisoheat_core::amg::AmgParams;
use anisoheat_core::assembly::{
    assemble_data_loads, assemble_primal_dg_aniso, assemble_rhs, assemble_system_matrices, AssembledOperators,
    ProblemConfig, RhsInputs, SystemMatrices,
};
use anisoheat_core::blocksolve::{
    solve_steady_aniso, AirGmres, AirStrategy, DirectStrategy, Factored, LinearSolve, MixedSolver,
    SchurClassicalStrategy, SchurDirectStrategy,
};
use anisoheat_core::krylov::{KrylovParams, Tolerance};
use anisoheat_core::mesh::Point3;
use anisoheat_core::space::{DgSpace, FieldVector};
use anisoheat_core::spectra::{eigs_report, Component, EigRow, EigsCase, EigsGrid, LanczosParams};
use anisoheat_core::sparse::{norm2, BlockCsrMatrix, CsrMatrix};
use anisoheat_core::timeloop::{
    last_two_error_mean, run_transient, solver_study_averages, MixedStepper, PrimalStepper, RunLimits, SolverBuilder,
    StepRecord, TimeState, TransientRun,
};
use anisoheat_core::Error;
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, Scheme, Strategy};
use crate::io::{IoError, MatrixInfo};
use crate::lu::{FaerCholesky, FaerLu};

/// Failure of a run, mapped to the exit code by the CLI.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Solver(#[from] Error),
}

impl RunError {
    /// 2 for solver non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Solver(Error::NotConverged { .. }) => 2,
            _ => 1,
        }
    }
}

pub type RunResult<T> = Result<T, RunError>;

/// Mesh, space and operators at one refinement.
#[derive(Debug)]
pub struct Discretization {
    pub refinement: usize,
    pub layers: usize,
    pub space: DgSpace,
    pub ops: AssembledOperators,
}

pub fn discretize(cfg: &ExperimentConfig, refinement: usize) -> RunResult<Discretization> {
    let spec = cfg.mesh.spec(refinement);
    let mesh = spec.build()?;
    let space = DgSpace::new(Arc::new(mesh), cfg.mesh.order)?;
    let ops = AssembledOperators::assemble(&space, cfg.problem().field(), cfg.physics.kappa_p, cfg.physics.bc_kind.into())?;
    Ok(Discretization {
        refinement,
        layers: spec.layers,
        space,
        ops,
    })
}

/// Data of the configured problem with `κ_∥ = kappa_par`.
pub fn problem_config(cfg: &ExperimentConfig, kappa_par: f64) -> ProblemConfig {
    let p = &cfg.physics;
    let mut pc = cfg.problem().config(kappa_par, p.kappa_perp, p.dt);
    pc.kappa_bc = p.kappa_bc;
    pc.kappa_p = p.kappa_p;
    pc.kappa_p_aniso = p.kappa_p_aniso;
    pc.bc_kind = p.bc_kind.into();
    pc
}

/// Builds the mixed solver of `strategy`.
pub fn mixed_solver(cfg: &ExperimentConfig, strategy: Strategy, sys: &SystemMatrices) -> anisoheat_core::Result<Box<dyn MixedSolver>> {
    Ok(match strategy {
        // Eliminating ζ halves the unknowns and leaves an SPD complement.
        Strategy::Direct if sys.a_zz.n_blocks() == sys.a_zz.nbrows => {
            Box::new(SchurDirectStrategy::<FaerCholesky>::new(sys)?)
        }
        Strategy::Direct => Box::new(DirectStrategy::<FaerLu>::new(sys)?),
        Strategy::Air => Box::new(AirStrategy::new(sys, &cfg.strategy_params(Strategy::Air))?),
        Strategy::SchurClassical => Box::new(SchurClassicalStrategy::new(sys, &cfg.strategy_params(strategy))?),
    })
}

fn mixed_builder<'a>(cfg: &'a ExperimentConfig, strategy: Strategy) -> Box<SolverBuilder<'a>> {
    Box::new(move |sys: &SystemMatrices| mixed_solver(cfg, strategy, sys))
}

/// Cholesky for the symmetric interior-penalty matrix, LU if that fails.
fn symmetric_direct<'a>(a: &CsrMatrix) -> anisoheat_core::Result<Box<dyn LinearSolve + 'a>> {
    Ok(match Factored::<FaerCholesky>::new(a) {
        Ok(f) => Box::new(f),
        Err(_) => Box::new(Factored::<FaerLu>::new(a)?),
    })
}

/// Seconds since the clock was made.
pub fn wall_clock() -> impl Fn() -> f64 {
    let start = Instant::now();
    move || start.elapsed().as_secs_f64()
}

fn limits(cfg: &ExperimentConfig) -> RunLimits {
    RunLimits {
        time_cap: cfg.solver.time_cap_s,
    }
}

/// One time step of a transient run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRow {
    pub run: String,
    pub ratio: f64,
    pub refinement: usize,
    pub step: usize,
    pub time: f64,
    pub error: Option<f64>,
    pub outer_iterations: usize,
    pub inner_first: usize,
    pub inner_second: usize,
    pub rel_residual: f64,
    pub wall_time: f64,
}

fn step_rows(run: &str, ratio: f64, refinement: usize, records: &[StepRecord]) -> Vec<StepRow> {
    records
        .iter()
        .map(|r| StepRow {
            run: run.to_string(),
            ratio,
            refinement,
            step: r.step,
            time: r.time,
            error: r.error,
            outer_iterations: r.outer_iterations,
            inner_first: r.inner_first,
            inner_second: r.inner_second,
            rel_residual: r.rel_residual,
            wall_time: r.wall_time,
        })
        .collect()
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::MixedDg => "mixed-dg",
        Scheme::PrimalDg => "primal-dg",
    }
}

/// Runs one transient simulation of `scheme` from the projected `T0`.
pub fn run_scheme(
    cfg: &ExperimentConfig,
    d: &Discretization,
    scheme: Scheme,
    strategy: Strategy,
    kappa_par: f64,
    n_steps: usize,
    with_error: bool,
) -> RunResult<TransientRun> {
    let pc = problem_config(cfg, kappa_par);
    let problem = cfg.problem();
    let t0 = d.space.project(&|x| problem.t0(x));
    let exact = move |x: &Point3, _t: f64| problem.t0(x);
    let exact_ref: Option<&dyn Fn(&Point3, f64) -> f64> = if with_error { Some(&exact) } else { None };
    let clock = wall_clock();
    let run = match scheme {
        Scheme::MixedDg => {
            let mut st = MixedStepper::new(&d.space, &d.ops, &pc, mixed_builder(cfg, strategy), true)?;
            let mut state = st.initial_state(t0)?;
            run_transient(&mut st, &mut state, n_steps, exact_ref, &clock, limits(cfg))?
        }
        Scheme::PrimalDg => {
            let ip_b = assemble_primal_dg_aniso(&d.space, d.ops.field.as_ref(), pc.kappa_delta(), pc.kappa_p_aniso)?;
            let build = Box::new(|a: &BlockCsrMatrix| symmetric_direct(&a.to_csr()));
            let mut st = PrimalStepper::new(&d.space, &d.ops, &pc, &ip_b, build, true)?;
            let n = d.space.ndofs();
            let mut state = TimeState::new(t0, FieldVector::zeros(n));
            run_transient(&mut st, &mut state, n_steps, exact_ref, &clock, limits(cfg))?
        }
    };
    Ok(run)
}

/// Error of one convergence run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub scheme: &'static str,
    pub ratio: f64,
    pub refinement: usize,
    pub cells: usize,
    pub ndofs: usize,
    pub h: f64,
    pub steps: usize,
    /// Relative L² error averaged over the last two steps.
    pub error: f64,
    pub wall_time: f64,
}

/// Observed order between two refinements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderRow {
    pub scheme: &'static str,
    pub ratio: f64,
    pub coarse_refinement: usize,
    pub fine_refinement: usize,
    pub order: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ConvergenceOutput {
    pub errors: Vec<ConvergenceRow>,
    pub orders: Vec<OrderRow>,
    pub steps: Vec<StepRow>,
}

/// Observed orders `log₂(e_coarse/e_fine)/(fine − coarse)` between
/// consecutive refinements of each (scheme, ratio).
pub fn observed_orders(rows: &[ConvergenceRow]) -> Vec<OrderRow> {
    let mut groups: BTreeMap<(&'static str, u64), Vec<&ConvergenceRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.scheme, r.ratio.to_bits())).or_default().push(r);
    }
    let mut out = Vec::new();
    for ((scheme, ratio), mut g) in groups {
        g.sort_by_key(|r| r.refinement);
        for w in g.windows(2) {
            let levels = (w[1].refinement - w[0].refinement) as f64;
            out.push(OrderRow {
                scheme,
                ratio: f64::from_bits(ratio),
                coarse_refinement: w[0].refinement,
                fine_refinement: w[1].refinement,
                order: (w[0].error / w[1].error).log2() / levels,
            });
        }
    }
    out
}

/// Closed-field convergence study: refinements × ratios × schemes.
pub fn run_convergence(cfg: &ExperimentConfig, log: &mut dyn FnMut(&str)) -> RunResult<ConvergenceOutput> {
    let st = &cfg.study;
    let strategy = cfg.solver.strategy.unwrap_or(Strategy::Direct);
    let n_steps = cfg.physics.n_steps.unwrap_or(100);
    let mut out = ConvergenceOutput::default();
    for &r in st.refinements.as_deref().unwrap_or(&[0, 1]) {
        let d = discretize(cfg, r)?;
        let h = cfg.mesh.lx / (cfg.mesh.n << r) as f64;
        for &ratio in st.ratios.as_deref().unwrap_or(&[1e3]) {
            for &scheme in st.schemes.as_deref().unwrap_or(&[Scheme::MixedDg]) {
                let run = run_scheme(cfg, &d, scheme, strategy, ratio * cfg.physics.kappa_perp, n_steps, true)?;
                if let Some(why) = &run.stopped {
                    return Err(RunError::Solver(Error::NotConverged {
                        context: format!("{} at ratio {ratio:e}, refinement {r}: {why}", scheme_name(scheme)),
                        iterations: run.records.len(),
                        rel_residual: f64::NAN,
                    }));
                }
                let error = last_two_error_mean(&run.records).or(run.records.last().and_then(|x| x.error)).unwrap_or(f64::NAN);
                let wall: f64 = run.records.iter().map(|x| x.wall_time).sum();
                log(&format!(
                    "convergence {} ratio {ratio:e} refinement {r}: error {error:.3e} ({wall:.1} s)",
                    scheme_name(scheme)
                ));
                out.steps.extend(step_rows(scheme_name(scheme), ratio, r, &run.records));
                out.errors.push(ConvergenceRow {
                    scheme: scheme_name(scheme),
                    ratio,
                    refinement: r,
                    cells: d.space.n_cells(),
                    ndofs: d.space.ndofs(),
                    h,
                    steps: run.records.len(),
                    error,
                    wall_time: wall,
                });
            }
        }
    }
    out.orders = observed_orders(&out.errors);
    Ok(out)
}

/// Averages of one solver-study run over steps 2–5.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverStudyRow {
    pub strategy: &'static str,
    pub ratio: f64,
    pub refinement: usize,
    pub layers: usize,
    /// Unknowns of the mixed system (`T` and `ζ`).
    pub unknowns: usize,
    /// `ok` or `did-not-finish`.
    pub status: &'static str,
    pub steps_averaged: usize,
    pub outer_iterations: Option<f64>,
    pub inner_first: Option<f64>,
    pub inner_second: Option<f64>,
    pub inner_total: Option<f64>,
    pub wall_time: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, Default)]
pub struct SolverStudyOutput {
    pub rows: Vec<SolverStudyRow>,
    pub steps: Vec<StepRow>,
}

/// Open-field solver study: refinements × ratios × strategies. Runs that hit
/// the iteration or time caps are reported as `did-not-finish`.
pub fn run_solver_study(cfg: &ExperimentConfig, log: &mut dyn FnMut(&str)) -> RunResult<SolverStudyOutput> {
    let st = &cfg.study;
    let n_steps = cfg.physics.n_steps.unwrap_or(5);
    let mut out = SolverStudyOutput::default();
    for &r in st.refinements.as_deref().unwrap_or(&[0]) {
        let d = discretize(cfg, r)?;
        for &strategy in st.strategies.as_deref().unwrap_or(&[Strategy::Air]) {
            for &ratio in st.ratios.as_deref().unwrap_or(&[1e6]) {
                let run = run_scheme(cfg, &d, Scheme::MixedDg, strategy, ratio * cfg.physics.kappa_perp, n_steps, false);
                let (records, dnf) = match run {
                    Ok(run) => (run.records, run.stopped),
                    Err(RunError::Solver(e @ Error::NotConverged { .. })) => (Vec::new(), Some(e.to_string())),
                    Err(e) => return Err(e),
                };
                let avg = solver_study_averages(&records);
                let status = if dnf.is_some() { "did-not-finish" } else { "ok" };
                log(&format!(
                    "solver-study {} ratio {ratio:e} refinement {r}: {status}{}",
                    strategy.name(),
                    avg.map_or(String::new(), |a| format!(
                        ", outer {:.1}, inner {:.1}, {:.2} s/step",
                        a.outer_iterations, a.inner_total, a.wall_time
                    ))
                ));
                out.steps.extend(step_rows(strategy.name(), ratio, r, &records));
                let ok = dnf.is_none();
                out.rows.push(SolverStudyRow {
                    strategy: strategy.name(),
                    ratio,
                    refinement: r,
                    layers: d.layers,
                    unknowns: 2 * d.space.ndofs(),
                    status,
                    steps_averaged: avg.map_or(0, |a| a.steps),
                    outer_iterations: avg.filter(|_| ok).map(|a| a.outer_iterations),
                    inner_first: avg.filter(|_| ok).map(|a| a.inner_first),
                    inner_second: avg.filter(|_| ok).map(|a| a.inner_second),
                    inner_total: avg.filter(|_| ok).map(|a| a.inner_total),
                    wall_time: avg.filter(|_| ok).map(|a| a.wall_time),
                    note: dnf.unwrap_or_default(),
                });
            }
        }
    }
    Ok(out)
}

/// One eigenvalue of the study table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigsCsvRow {
    pub refinement: usize,
    pub planar: bool,
    pub ndofs: usize,
    pub dt: f64,
    pub ratio: f64,
    pub component: &'static str,
    pub boundary_mass: bool,
    pub lambda_max: f64,
    pub residual: f64,
    pub lanczos_iterations: usize,
    pub converged: bool,
    pub symmetry_defect: Option<f64>,
}

fn transport_solvers(cfg: &ExperimentConfig, g: &BlockCsrMatrix) -> RunResult<(Box<dyn LinearSolve>, Box<dyn LinearSolve>)> {
    let gt = g.transpose();
    match cfg.solver.strategy.unwrap_or(Strategy::Air) {
        Strategy::Direct => Ok((
            Box::new(Factored::<FaerLu>::new(&g.to_csr())?),
            Box::new(Factored::<FaerLu>::new(&gt.to_csr())?),
        )),
        _ => {
            let tol = cfg.study.eig_inner_tol.unwrap_or(1e-10);
            let kp = KrylovParams::new(Tolerance::Relative(tol), cfg.solver.max_inner);
            let amg = cfg.amg.apply(AmgParams::air());
            Ok((
                Box::new(AirGmres::new(g.clone(), &amg, kp, "G_b")?),
                Box::new(AirGmres::new(gt, &amg, kp, "G_b^T")?),
            ))
        }
    }
}

/// Largest eigenvalues of the Schur complement components over
/// refinements × Δt × ratios, with and without `M_BC,h` in the mass part.
pub fn run_eigs(cfg: &ExperimentConfig, log: &mut dyn FnMut(&str)) -> RunResult<Vec<EigsCsvRow>> {
    let st = &cfg.study;
    let grid = EigsGrid {
        dts: st.dts.clone().unwrap_or_else(|| vec![1e-3]),
        ratios: st.ratios.clone().unwrap_or_else(|| vec![1e3]),
        kappa_perp: cfg.physics.kappa_perp,
        kappa_bc: cfg.physics.kappa_bc,
        components: vec![Component::Mass, Component::Laplacian, Component::Full],
        without_boundary_mass: true,
    };
    let lanczos = LanczosParams {
        tol: st.lanczos_tol.unwrap_or(1e-6),
        max_iter: st.lanczos_max_iter.unwrap_or(300),
        seed: st.lanczos_seed.unwrap_or(7),
        symmetry_tol: Some(1e-6),
    };
    let mut out = Vec::new();
    for &r in st.refinements.as_deref().unwrap_or(&[0]) {
        let d = discretize(cfg, r)?;
        let (mut g, mut gt) = transport_solvers(cfg, &d.ops.g_b)?;
        let mut cases = [EigsCase {
            label: r.to_string(),
            ops: &d.ops,
            g: g.as_mut(),
            gt: gt.as_mut(),
        }];
        let rows: Vec<EigRow> = eigs_report(&mut cases, &grid, &lanczos)?;
        for row in rows {
            log(&format!(
                "eigs refinement {r} dt {:e} ratio {:e} {}{}: {:.4e}",
                row.dt,
                row.ratio,
                row.component.name(),
                if row.with_boundary_mass { "" } else { " (no M_BC)" },
                row.estimate.lambda
            ));
            out.push(EigsCsvRow {
                refinement: r,
                planar: cfg.mesh.planar,
                ndofs: d.space.ndofs(),
                dt: row.dt,
                ratio: row.ratio,
                component: row.component.name(),
                boundary_mass: row.with_boundary_mass,
                lambda_max: row.estimate.lambda,
                residual: row.estimate.residual,
                lanczos_iterations: row.estimate.iterations,
                converged: row.estimate.converged,
                symmetry_defect: row.estimate.symmetry_defect,
            });
        }
    }
    Ok(out)
}

/// Decoupled steady solve checked against the coupled AIR solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyRow {
    pub refinement: usize,
    pub ndofs: usize,
    pub kappa_par: f64,
    /// Transport solves of the decoupled solve (always 2).
    pub transport_solves: usize,
    pub inner_zeta: usize,
    pub inner_t: usize,
    pub rel_residual: f64,
    pub coupled_outer_iterations: usize,
    pub rel_diff_t: f64,
    pub rel_diff_zeta: f64,
}

#[derive(Debug, Clone)]
pub struct SteadyOutput {
    pub row: SteadyRow,
    pub t: FieldVector,
    pub zeta: FieldVector,
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    d / norm2(b).max(f64::MIN_POSITIVE)
}

/// Steady purely anisotropic problem (`κ_⊥ = 0`, no mass term): two
/// transport solves, verified against the coupled block solve. The inflow
/// flux `ζ_in` is zero.
pub fn run_steady_aniso(cfg: &ExperimentConfig, log: &mut dyn FnMut(&str)) -> RunResult<SteadyOutput> {
    let r = cfg.mesh.refinements;
    let d = discretize(cfg, r)?;
    let pc = problem_config(cfg, cfg.physics.kappa_par);
    let sys = assemble_system_matrices(&d.ops, &pc, None)?;
    let loads = assemble_data_loads(&d.space, &d.ops, &pc, 0.0, None)?;
    let (f_t, f_z) = assemble_rhs(
        &d.ops,
        &pc,
        &loads,
        &RhsInputs {
            t_prev: None,
            zeta_in: None,
            t_in: None,
            time: 0.0,
            dt_eff: None,
        },
    )?;
    let mut air = AirStrategy::new(&sys, &cfg.strategy_params(Strategy::Air))?;
    let steady = solve_steady_aniso(&sys, &f_t, &f_z, &mut air.zt, &mut air.tz)?;
    let coupled = air.solve(&sys, &f_t, &f_z, None)?;
    if !coupled.stats.converged {
        return Err(RunError::Solver(Error::NotConverged {
            context: "coupled steady solve".into(),
            iterations: coupled.stats.iterations,
            rel_residual: coupled.stats.rel_residual,
        }));
    }
    let row = SteadyRow {
        refinement: r,
        ndofs: d.space.ndofs(),
        kappa_par: pc.kappa_par,
        transport_solves: steady.stats.inner_iterations.len(),
        inner_zeta: steady.inner_second.iter().sum(),
        inner_t: steady.inner_first.iter().sum(),
        rel_residual: steady.stats.rel_residual,
        coupled_outer_iterations: coupled.stats.iterations,
        rel_diff_t: rel_diff(&steady.t, &coupled.t),
        rel_diff_zeta: rel_diff(&steady.zeta, &coupled.zeta),
    };
    log(&format!(
        "steady-aniso: residual {:.2e}, coupled outer {}, difference {:.2e}",
        row.rel_residual, row.coupled_outer_iterations, row.rel_diff_t
    ));
    Ok(SteadyOutput {
        row,
        t: FieldVector::from_vec(steady.t),
        zeta: FieldVector::from_vec(steady.zeta),
    })
}

/// Named matrices of the discretization and of one midpoint step.
pub fn export_matrices(cfg: &ExperimentConfig) -> RunResult<(Vec<(String, String, BlockCsrMatrix)>, FieldVector)> {
    let d = discretize(cfg, cfg.mesh.refinements)?;
    let pc = problem_config(cfg, cfg.physics.kappa_par);
    let sys = assemble_system_matrices(&d.ops, &pc, Some(pc.dt / 2.0))?;
    let o = &d.ops;
    let named = [
        ("mass", "M", &o.m),
        ("boundary_mass", "M_BC,h (h_e weighted boundary mass)", &o.m_bc_he),
        ("laplacian", "L (interior penalty)", &o.l),
        ("transport", "G_b (upwind transport)", &o.g_b),
        ("inflow_trace", "inflow (b.n) trace coupling", &o.m_in),
        ("outflow_trace", "outflow (b.n) trace coupling", &o.m_out),
        ("a_tt", "A_TT of one midpoint step", &sys.a_tt),
        ("a_tz", "A_Tzeta", &sys.a_tz),
        ("a_zt", "A_zetaT", &sys.a_zt),
        ("a_zz", "A_zetazeta", &sys.a_zz),
    ];
    let problem = cfg.problem();
    let t0 = d.space.project(&|x| problem.t0(x));
    Ok((
        named.into_iter().map(|(n, desc, a)| (n.to_string(), desc.to_string(), a.clone())).collect(),
        t0,
    ))
}

/// Sidecar entry for an exported matrix.
pub fn matrix_info(file: &str, description: &str, a: &BlockCsrMatrix) -> MatrixInfo {
    MatrixInfo {
        file: file.to_string(),
        rows: a.nrows(),
        cols: a.ncols(),
        block_size: a.bs,
        stored_blocks: a.n_blocks(),
        description: description.to_string(),
    }
}
