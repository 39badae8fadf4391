use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::assembly::BoundaryKind;
use crate::blocksolve::{DenseFactorization, Factored};
use crate::problems::{MeshSpec, Problem};
use crate::space::DgSpace;

fn planar_ops(order: usize) -> AssembledOperators {
    let mut spec = MeshSpec::standard(1);
    spec.planar = true;
    let sp = DgSpace::new(Arc::new(spec.build().unwrap()), order).unwrap();
    let p = Problem::open_field(1.0).planar();
    AssembledOperators::assemble(&sp, p.field(), 2.0, BoundaryKind::Dirichlet).unwrap()
}

fn dense(a: &BlockCsrMatrix) -> Factored<DenseFactorization> {
    Factored::new(&a.to_csr()).unwrap()
}

fn lambda(ops: &AssembledOperators, params: SpectrumParams, component: Component) -> EigenEstimate {
    let mut g = dense(&ops.g_b);
    let mut gt = dense(&ops.g_b.transpose());
    let mut op = SymmetrizedOperator::new(ops, mass_sqrt(&ops.m).unwrap(), params, component, &mut g, &mut gt).unwrap();
    let lp = LanczosParams {
        tol: 1e-10,
        ..LanczosParams::default()
    };
    largest_eigenvalue(&mut op, &lp).unwrap()
}

fn params(ratio: f64, dt: f64) -> SpectrumParams {
    SpectrumParams {
        kappa_delta: ratio - 1.0,
        kappa_perp: 1.0,
        dt,
        kappa_bc: 20.0,
    }
}

struct Diag(Vec<f64>);

impl SymmetricAction for Diag {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        for ((y, x), d) in y.iter_mut().zip(x).zip(&self.0) {
            *y = d * x;
        }
        Ok(())
    }
}

#[test]
fn lanczos_finds_the_top_of_a_known_spectrum() {
    let d: Vec<f64> = (1..=200).map(|k| 1.0 + 1.0 / k as f64).chain([5.0]).collect();
    let est = largest_eigenvalue(&mut Diag(d), &LanczosParams::default()).unwrap();
    assert!((est.lambda - 5.0).abs() < 1e-10, "{est:?}");
    assert!(est.converged && est.residual <= 1e-5);
}

#[test]
fn lanczos_rejects_nonsymmetric_actions() {
    struct Shear;
    impl SymmetricAction for Shear {
        fn dim(&self) -> usize {
            2
        }
        fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
            y[0] = x[0] + x[1];
            y[1] = x[1];
            Ok(())
        }
    }
    assert!(matches!(
        largest_eigenvalue(&mut Shear, &LanczosParams::default()),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn mass_root_squares_to_the_mass() {
    let ops = planar_ops(2);
    let r = mass_sqrt(&ops.m).unwrap();
    let x = random_unit_vector(ops.m.nrows(), 3);
    let mut y = vec![0.0; x.len()];
    let mut z = vec![0.0; x.len()];
    r.apply(&x, &mut y);
    r.apply(&y, &mut z);
    let mut mx = vec![0.0; x.len()];
    ops.m.matvec(&x, &mut mx);
    axpy(-1.0, &mx, &mut z);
    assert!(norm2(&z) <= 1e-13 * norm2(&mx));
    assert!(mass_sqrt(&ops.l).is_err());
}

#[test]
fn symmetrized_action_is_symmetric_and_matches_dense_formula() {
    let ops = planar_ops(1);
    let p = params(1e3, 1e-3);
    let mut g = dense(&ops.g_b);
    let mut gt = dense(&ops.g_b.transpose());
    let mh = mass_sqrt(&ops.m).unwrap();
    let mut op = SymmetrizedOperator::new(&ops, mh.clone(), p, Component::Full, &mut g, &mut gt).unwrap();
    assert!(symmetry_defect(&mut op, 3, 11).unwrap() < 1e-10);

    let sk = p.kappa_delta.sqrt();
    let gd = ops.g_b.to_dense() * sk;
    let k = (ops.m.to_dense() + ops.m_bc_he.to_dense() * p.kappa_bc) / p.dt + ops.l.to_dense() * p.kappa_perp;
    let h = mh.to_matrix().to_dense();
    let dense_op = &h * gd.transpose().lu().solve(&(&k * gd.lu().solve(&h).unwrap())).unwrap();
    let x = random_unit_vector(op.dim(), 5);
    let mut y = vec![0.0; x.len()];
    op.apply(&x, &mut y).unwrap();
    let yd = &dense_op * nalgebra::DVector::from_vec(x);
    let err: f64 = y.iter().zip(yd.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    assert!(err <= 1e-9 * yd.norm(), "{err:e}");
}

#[test]
fn scaling_laws_are_exact() {
    let ops = planar_ops(2);
    let base_m = lambda(&ops, params(1e3, 1e-3), Component::Mass).lambda * 1e-3 * (1e3 - 1.0);
    let base_l = lambda(&ops, params(1e3, 1e-3), Component::Laplacian).lambda * (1e3 - 1.0);
    for (ratio, dt) in [(1e6, 1e-3), (1e9, 1e-3), (1e3, 1e-2), (1e9, 1e-2)] {
        let kd = ratio - 1.0;
        let m = lambda(&ops, params(ratio, dt), Component::Mass).lambda * dt * kd;
        assert!((m / base_m - 1.0).abs() < 1e-8, "mass {ratio:e} {dt:e}: {m} vs {base_m}");
        let l = lambda(&ops, params(ratio, dt), Component::Laplacian).lambda * kd;
        assert!((l / base_l - 1.0).abs() < 1e-8, "laplacian {ratio:e} {dt:e}: {l} vs {base_l}");
    }
}

#[test]
fn components_are_positive_and_full_is_below_the_sum() {
    let ops = planar_ops(2);
    for (ratio, dt) in [(1e3, 1e-3), (1e3, 1e-2), (1e6, 1e-3)] {
        let p = params(ratio, dt);
        let m = lambda(&ops, p, Component::Mass);
        let l = lambda(&ops, p, Component::Laplacian);
        let f = lambda(&ops, p, Component::Full);
        assert!(m.lambda > 0.0 && l.lambda > 0.0 && f.lambda > 0.0);
        assert!(f.lambda <= (m.lambda + l.lambda) * (1.0 + 1e-10));
    }
}

#[test]
fn coarsest_planar_values_near_published_anchors() {
    let ops = planar_ops(2);
    let p = params(1e3, 1e-3);
    let m = lambda(&ops, p, Component::Mass).lambda;
    let l = lambda(&ops, p, Component::Laplacian).lambda;
    let m0 = lambda(&ops, SpectrumParams { kappa_bc: 0.0, ..p }, Component::Mass).lambda;
    assert!((m / 7.8 - 1.0).abs() <= 0.5, "mass component {m}");
    assert!((l / 0.56 - 1.0).abs() <= 0.5, "laplacian component {l}");
    assert!((m0 / 0.84 - 1.0).abs() <= 0.5, "mass component without boundary mass {m0}");
}

#[test]
fn report_covers_the_grid() {
    let ops = planar_ops(1);
    let mut g = dense(&ops.g_b);
    let mut gt = dense(&ops.g_b.transpose());
    let mut cases = [EigsCase {
        label: "r0".into(),
        ops: &ops,
        g: &mut g,
        gt: &mut gt,
    }];
    let grid = EigsGrid {
        dts: vec![1e-3, 1e-2],
        ratios: vec![1e3, 1e6],
        kappa_perp: 1.0,
        kappa_bc: 20.0,
        components: vec![Component::Mass, Component::Laplacian, Component::Full],
        without_boundary_mass: true,
    };
    let rows = eigs_report(&mut cases, &grid, &LanczosParams::default()).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 4);
    assert!(rows.iter().all(|r| r.estimate.lambda > 0.0 && r.estimate.converged));
    assert_eq!(rows.iter().filter(|r| !r.with_boundary_mass).count(), 4);
}
