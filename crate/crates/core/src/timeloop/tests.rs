use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::assembly::{assemble_primal_dg_aniso, BoundaryKind, ProblemConfig};
use crate::blocksolve::{
    AirStrategy, DenseFactorization, DirectStrategy, Factored, LinearSolve, MixedSolver, StrategyParams,
};
use crate::problems::{MeshSpec, Problem};
use crate::sparse::norm2;

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    d / norm2(b).max(f64::MIN_POSITIVE)
}

fn space(planar: bool, order: usize) -> DgSpace {
    let mut spec = MeshSpec::standard(1);
    spec.planar = planar;
    DgSpace::new(Arc::new(spec.build().unwrap()), order).unwrap()
}

fn ops(sp: &DgSpace, problem: Problem, bc: BoundaryKind) -> AssembledOperators {
    AssembledOperators::assemble(sp, problem.field(), 2.0, bc).unwrap()
}

fn direct<'a>() -> Box<SolverBuilder<'a>> {
    Box::new(|sys: &SystemMatrices| {
        Ok(Box::new(DirectStrategy::<DenseFactorization>::new(sys)?) as Box<dyn MixedSolver>)
    })
}

fn air<'a>() -> Box<SolverBuilder<'a>> {
    Box::new(|sys: &SystemMatrices| {
        let mut p = StrategyParams::air();
        p.inner.tol = crate::krylov::Tolerance::Relative(1e-12);
        p.outer.tol = crate::krylov::Tolerance::Relative(1e-12);
        Ok(Box::new(AirStrategy::new(sys, &p)?) as Box<dyn MixedSolver>)
    })
}

fn dense_lu<'a>() -> Box<LinearSolveBuilder<'a>> {
    Box::new(|a: &BlockCsrMatrix| Ok(Box::new(Factored::<DenseFactorization>::new(&a.to_csr())?) as Box<dyn LinearSolve>))
}

fn no_clock() -> f64 {
    0.0
}

fn run(stepper: &mut dyn Stepper, state: &mut TimeState, n: usize) -> TransientRun {
    run_transient(stepper, state, n, None, &no_clock, RunLimits::default()).unwrap()
}

#[test]
fn zero_data_gives_zero_trajectory() {
    let sp = space(true, 1);
    let p = Problem::open_field(1.0).planar();
    let o = ops(&sp, p, BoundaryKind::Dirichlet);
    let cfg = ProblemConfig::new(1e3, 1.0, 1e-3);
    for build in [direct(), air()] {
        let mut st = MixedStepper::new(&sp, &o, &cfg, build, true).unwrap();
        let mut state = st.initial_state(FieldVector::zeros(sp.ndofs())).unwrap();
        let out = run(&mut st, &mut state, 3);
        assert_eq!(out.records.len(), 3);
        assert!(state.t_h.iter().chain(state.zeta.iter()).all(|&v| v == 0.0));
        assert_eq!(state.step, 3);
        assert!((state.t - 3e-3).abs() < 1e-18);
    }
}

#[test]
fn isotropic_limit_matches_primal_step() {
    let sp = space(true, 1);
    let p = Problem::open_field(1.0).planar();
    let o = ops(&sp, p, BoundaryKind::Dirichlet);
    let cfg = p.config(1.0, 1.0, 1e-3);
    let ip_b = assemble_primal_dg_aniso(&sp, p.field().as_ref(), 0.0, 10.0).unwrap();
    let t0 = sp.project(&|x| p.t0(x));
    let mut mixed = MixedStepper::new(&sp, &o, &cfg, direct(), true).unwrap();
    let mut primal = PrimalStepper::new(&sp, &o, &cfg, &ip_b, dense_lu(), true).unwrap();
    let mut sm = mixed.initial_state(t0.clone()).unwrap();
    let mut sp_state = TimeState::new(t0, FieldVector::zeros(sp.ndofs()));
    run(&mut mixed, &mut sm, 3);
    run(&mut primal, &mut sp_state, 3);
    assert!(rel_diff(&sm.t_h, &sp_state.t_h) < 1e-10);
    assert!(sm.zeta.iter().all(|&v| v == 0.0));
}

#[test]
fn air_steps_match_dense_steps() {
    let sp = space(true, 1);
    let p = Problem::open_field(1.0).planar();
    let o = ops(&sp, p, BoundaryKind::Dirichlet);
    for ratio in [1e3, 1e6] {
        let cfg = p.config(ratio, 1.0, 1e-3);
        let t0 = sp.project(&|x| p.t0(x));
        let mut a = MixedStepper::new(&sp, &o, &cfg, air(), true).unwrap();
        let mut d = MixedStepper::new(&sp, &o, &cfg, direct(), true).unwrap();
        let mut sa = a.initial_state(t0.clone()).unwrap();
        let mut sd = d.initial_state(t0).unwrap();
        let ra = run(&mut a, &mut sa, 1);
        run(&mut d, &mut sd, 1);
        assert!(rel_diff(&sa.t_h, &sd.t_h) <= 1e-6, "ratio {ratio}: {} {:?}", rel_diff(&sa.t_h, &sd.t_h), ra.records);
        assert!(rel_diff(&sa.zeta, &sd.zeta) <= 1e-6, "ratio {ratio}: {} {} {}", rel_diff(&sa.zeta, &sd.zeta), norm2(&sd.zeta), norm2(&sd.t_h));
        assert!(ra.records.iter().all(|r| r.outer_iterations > 0 && r.inner_total() > 0));
    }
}

fn m_norm(m: &BlockCsrMatrix, x: &[f64]) -> f64 {
    let mut y = vec![0.0; x.len()];
    m.matvec(x, &mut y);
    x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>().sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

/// Checks that the M-norm distance to the fixed point `t_star` and the
/// M-norm of the increments never grow: the midpoint rule contracts in the
/// M-norm when the eliminated operator is symmetric positive semidefinite.
fn assert_contracting(m: &BlockCsrMatrix, states: &[FieldVector], t_star: &[f64]) {
    let dist: Vec<f64> = states.iter().map(|s| m_norm(m, &diff(s, t_star))).collect();
    let incr: Vec<f64> = states.windows(2).map(|w| m_norm(m, &diff(&w[1], &w[0]))).collect();
    for k in 1..dist.len() {
        assert!(dist[k] <= dist[k - 1] * (1.0 + 1e-9), "distance grows at step {k}: {dist:?}");
    }
    for k in 1..incr.len() {
        assert!(incr[k] <= incr[k - 1] * (1.0 + 1e-9), "increment grows at step {k}: {incr:?}");
    }
    assert!(incr[0] <= 2.0 * dist[0] * (1.0 + 1e-9));
}

#[test]
fn counter_forced_steady_state_is_kept() {
    let sp = space(false, 1);
    let p = Problem::closed_field(1.0);
    let o = ops(&sp, p, BoundaryKind::Dirichlet);
    let cfg = p.config(1e3, 1.0, 1e-3);
    let h = cfg.dt / 2.0;
    let mut st = MixedStepper::new(&sp, &o, &cfg, direct(), true).unwrap();
    // Fixed point of the step: the midpoint system without the M/h terms.
    let mut fixed = st.sys.clone();
    fixed.a_tt = BlockCsrMatrix::linear_combination(&[(1.0, &st.sys.a_tt), (-1.0 / h, &o.m)]);
    let loads = assemble_data_loads(&sp, &o, &cfg, 0.0, Some(h)).unwrap();
    let inputs = RhsInputs {
        t_prev: None,
        zeta_in: None,
        t_in: None,
        time: 0.0,
        dt_eff: Some(h),
    };
    let (f_t, f_z) = assemble_rhs(&o, &cfg, &loads, &inputs).unwrap();
    let star = DirectStrategy::<DenseFactorization>::new(&fixed).unwrap().solve(&fixed, &f_t, &f_z, None).unwrap();
    let mut state = st.initial_state(sp.project(&|x| p.t0(x))).unwrap();
    let mut states = vec![state.t_h.clone()];
    for _ in 0..100 {
        st.step(&mut state).unwrap();
        states.push(state.t_h.clone());
    }
    assert_contracting(&o.m, &states, &star.t);
    // The fixed point is a discretization of T0.
    let e_star = sp.l2_error(&star.t, &|x| p.t0(x)).unwrap();
    let e_end = sp.l2_error(&state.t_h, &|x| p.t0(x)).unwrap();
    assert!(e_star < 0.25, "{e_star}");
    assert!(e_end < 0.25, "{e_end}");
}

#[test]
fn primal_steady_state_is_kept() {
    let sp = space(false, 1);
    let p = Problem::closed_field(1.0);
    let o = ops(&sp, p, BoundaryKind::Dirichlet);
    let cfg = p.config(1e3, 1.0, 1e-3);
    let h = cfg.dt / 2.0;
    let ip_b = assemble_primal_dg_aniso(&sp, p.field().as_ref(), cfg.kappa_delta(), cfg.kappa_p_aniso).unwrap();
    let mut st = PrimalStepper::new(&sp, &o, &cfg, &ip_b, dense_lu(), true).unwrap();
    let fixed = BlockCsrMatrix::linear_combination(&[(1.0, &st.matrix), (-1.0 / h, &o.m)]);
    let load = assemble_primal_data_load(&sp, &o, &cfg, 0.0, h).unwrap();
    let star = fixed.to_dense().lu().solve(&nalgebra::DVector::from_column_slice(&load)).unwrap();
    let mut state = TimeState::new(sp.project(&|x| p.t0(x)), FieldVector::zeros(sp.ndofs()));
    let mut states = vec![state.t_h.clone()];
    for _ in 0..100 {
        st.step(&mut state).unwrap();
        states.push(state.t_h.clone());
    }
    assert_contracting(&o.m, &states, star.as_slice());
}

#[test]
fn primal_step_matches_dense_formula() {
    let sp = space(true, 1);
    let p = Problem::open_field(1.0).planar();
    let o = ops(&sp, p, BoundaryKind::Dirichlet);
    let cfg = p.config(1e3, 1.0, 1e-3);
    let ip_b = assemble_primal_dg_aniso(&sp, p.field().as_ref(), cfg.kappa_delta(), cfg.kappa_p_aniso).unwrap();
    let t0 = sp.project(&|x| p.t0(x));
    let mut st = PrimalStepper::new(&sp, &o, &cfg, &ip_b, dense_lu(), false).unwrap();
    let mut state = TimeState::new(t0.clone(), FieldVector::zeros(sp.ndofs()));
    run(&mut st, &mut state, 1);
    let h = 5e-4;
    let a = o.m.to_dense() / h + o.m_bc_he.to_dense() * (cfg.kappa_bc / h) + o.l.to_dense() - ip_b.to_dense();
    let mut rhs = nalgebra::DVector::from_vec(assemble_primal_data_load(&sp, &o, &cfg, h, h).unwrap().values);
    rhs += o.m.to_dense() * nalgebra::DVector::from_column_slice(&t0) / h;
    let mid = a.lu().solve(&rhs).unwrap();
    let expect: Vec<f64> = mid.iter().zip(t0.iter()).map(|(m, o)| 2.0 * m - o).collect();
    assert!(rel_diff(&state.t_h, &expect) < 1e-10);
}

#[test]
fn pure_mass_step_is_identity() {
    let sp = space(true, 1);
    let p = Problem::open_field(1.0).planar();
    let o = ops(&sp, p, BoundaryKind::Dirichlet);
    let mut cfg = ProblemConfig::new(0.0, 0.0, 1e-3);
    cfg.kappa_bc = 0.0;
    let t0 = sp.project(&|x| p.t0(x));
    let mut st = MixedStepper::new(&sp, &o, &cfg, direct(), true).unwrap();
    let mut state = st.initial_state(t0.clone()).unwrap();
    run(&mut st, &mut state, 4);
    assert!(rel_diff(&state.t_h, &t0) < 1e-12);
    let ip_b = assemble_primal_dg_aniso(&sp, p.field().as_ref(), 0.0, 10.0).unwrap();
    let mut pr = PrimalStepper::new(&sp, &o, &cfg, &ip_b, dense_lu(), true).unwrap();
    let mut state = TimeState::new(t0.clone(), FieldVector::zeros(sp.ndofs()));
    run(&mut pr, &mut state, 4);
    assert!(rel_diff(&state.t_h, &t0) < 1e-12);
}

fn neumann_cfg(dt: f64) -> ProblemConfig {
    let mut cfg = ProblemConfig::new(100.0, 1.0, dt);
    cfg.bc_kind = BoundaryKind::Neumann;
    cfg
}

/// Smooth initial data: the projected `T0` damped by ten backward Euler
/// steps of length 0.005 (the midpoint value of a step of 0.01), which
/// removes the stiff components that the midpoint rule does not damp.
fn smooth_start(sp: &DgSpace, o: &AssembledOperators) -> FieldVector {
    let cfg = neumann_cfg(0.01);
    let mut st = MixedStepper::new(sp, o, &cfg, direct(), true).unwrap();
    let mut t = sp.project(&|x| Problem::closed_field(1.0).t0(x));
    for _ in 0..10 {
        let mut state = st.initial_state(t.clone()).unwrap();
        st.step(&mut state).unwrap();
        t = FieldVector::from_vec(state.t_h.iter().zip(t.iter()).map(|(a, b)| (a + b) / 2.0).collect());
    }
    t
}

/// `T` at `t_end` for the Neumann closed-field transient, which has no
/// lagged boundary data because `b·n = 0` on the walls.
fn neumann_transient(sp: &DgSpace, o: &AssembledOperators, t0: &FieldVector, dt: f64, t_end: f64) -> FieldVector {
    let cfg = neumann_cfg(dt);
    let mut st = MixedStepper::new(sp, o, &cfg, direct(), true).unwrap();
    let mut state = st.initial_state(t0.clone()).unwrap();
    let n = (t_end / dt).round() as usize;
    run(&mut st, &mut state, n);
    state.t_h
}

#[test]
fn midpoint_rule_is_second_order() {
    let sp = space(false, 1);
    let o = ops(&sp, Problem::closed_field(1.0), BoundaryKind::Neumann);
    let t0 = smooth_start(&sp, &o);
    let t_end = 0.016;
    let reference = neumann_transient(&sp, &o, &t0, t_end / 256.0, t_end);
    let errs: Vec<f64> = [4.0, 8.0, 16.0]
        .iter()
        .map(|k| rel_diff(&neumann_transient(&sp, &o, &t0, t_end / k, t_end), &reference))
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(ratio > 3.5 && ratio < 4.6, "errors {errs:?}");
    }
}

#[test]
fn neumann_uniform_state_is_preserved() {
    let sp = space(true, 1);
    let p = Problem::open_field(1.0).planar();
    let o = ops(&sp, p, BoundaryKind::Neumann);
    let mut cfg = ProblemConfig::new(1e3, 1.0, 1e-3);
    cfg.bc_kind = BoundaryKind::Neumann;
    let ones = FieldVector::from_vec(sp.project(&|_| 1.0).values);
    for build in [direct(), air()] {
        let mut st = MixedStepper::new(&sp, &o, &cfg, build, true).unwrap();
        let mut state = st.initial_state(ones.clone()).unwrap();
        assert!(norm2(&state.zeta) < 1e-10 * norm2(&ones));
        run(&mut st, &mut state, 10);
        assert!(rel_diff(&state.t_h, &ones) < 1e-10);
        assert!(norm2(&state.zeta) < 1e-10 * norm2(&ones));
    }
}

#[test]
fn mismatched_state_is_rejected() {
    let sp = space(true, 1);
    let p = Problem::open_field(1.0).planar();
    let o = ops(&sp, p, BoundaryKind::Dirichlet);
    let cfg = p.config(1e3, 1.0, 1e-3);
    let mut st = MixedStepper::new(&sp, &o, &cfg, direct(), true).unwrap();
    let mut bad = TimeState::new(FieldVector::zeros(3), FieldVector::zeros(3));
    assert!(matches!(st.step(&mut bad), Err(Error::InvalidInput(_))));
    let mut neu = ProblemConfig::new(1e3, 1.0, 1e-3);
    neu.bc_kind = BoundaryKind::Neumann;
    assert!(MixedStepper::new(&sp, &o, &neu, direct(), true).is_err());
}

#[test]
fn closed_field_air_failure_names_the_step() {
    let sp = space(false, 1);
    let p = Problem::closed_field(1.0);
    let o = ops(&sp, p, BoundaryKind::Dirichlet);
    let cfg = p.config(1e9, 1.0, 1e-3);
    let build: Box<SolverBuilder> = Box::new(|sys: &SystemMatrices| {
        let mut prm = StrategyParams::air();
        prm.outer.max_iter = 20;
        prm.inner.max_iter = 20;
        Ok(Box::new(AirStrategy::new(sys, &prm)?) as Box<dyn MixedSolver>)
    });
    let mut st = MixedStepper::new(&sp, &o, &cfg, build, true).unwrap();
    let mut state = st.initial_state(sp.project(&|x| p.t0(x))).unwrap();
    match st.step(&mut state) {
        Err(Error::NotConverged { context, .. }) => {
            assert!(context.starts_with("time step 1"), "{context}");
            assert!(context.contains("open (acyclic) field lines"), "{context}");
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

fn record(step: usize, outer: usize, a: usize, b: usize, wall: f64, err: f64) -> StepRecord {
    StepRecord {
        step,
        time: step as f64,
        error: Some(err),
        outer_iterations: outer,
        inner_first: a,
        inner_second: b,
        rel_residual: 0.0,
        wall_time: wall,
    }
}

#[test]
fn reducers_average_the_right_steps() {
    let recs: Vec<StepRecord> = (1..=6).map(|k| record(k, k * 10, k, 2 * k, k as f64 * 0.5, k as f64)).collect();
    let avg = solver_study_averages(&recs).unwrap();
    assert_eq!(avg.steps, 4);
    assert_eq!(avg.outer_iterations, (20.0 + 30.0 + 40.0 + 50.0) / 4.0);
    assert_eq!(avg.inner_first, 3.5);
    assert_eq!(avg.inner_second, 7.0);
    assert_eq!(avg.inner_total, 10.5);
    assert_eq!(avg.wall_time, 1.75);
    assert_eq!(last_two_error_mean(&recs), Some(5.5));
    assert_eq!(last_two_error_mean(&recs[..1]), None);
    assert!(average_steps(&recs, 10, 12).is_none());
}

#[test]
fn time_cap_stops_the_run() {
    let sp = space(true, 1);
    let p = Problem::open_field(1.0).planar();
    let o = ops(&sp, p, BoundaryKind::Dirichlet);
    let cfg = p.config(1e3, 1.0, 1e-3);
    let mut st = MixedStepper::new(&sp, &o, &cfg, direct(), true).unwrap();
    let mut state = st.initial_state(sp.project(&|x| p.t0(x))).unwrap();
    let ticks = core::cell::Cell::new(0.0);
    let clock = || {
        ticks.set(ticks.get() + 1.0);
        ticks.get()
    };
    let r = run_transient(&mut st, &mut state, 5, None, &clock, RunLimits { time_cap: Some(0.5) }).unwrap();
    assert_eq!(r.records.len(), 1);
    assert!(r.stopped.is_some());
}
