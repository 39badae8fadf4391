//! Flexible and right-preconditioned GMRES and preconditioned CG.
//!
//! Arnoldi uses modified Gram–Schmidt with one reorthogonalization pass when
//! the new direction keeps a component above `1e-8` along the basis.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::sparse::{axpy, dot, norm2, BlockCsrMatrix};
use crate::Result;

/// A square linear operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for BlockCsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

/// Operator given by a closure.
pub struct FnOperator<F: Fn(&[f64], &mut [f64])> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(&[f64], &mut [f64])> core::fmt::Debug for FnOperator<F> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnOperator").field("n", &self.n).finish()
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

/// A preconditioner `z ≈ A⁻¹ r`. It may change between applications
/// (flexible GMRES) and may record statistics of inner solves.
pub trait Preconditioner {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) -> Result<()>;
}

/// `z = r`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
}

impl<P: Preconditioner + ?Sized> Preconditioner for &mut P {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) -> Result<()> {
        (**self).apply(r, z)
    }
}

/// Preconditioner given by a closure.
pub struct FnPreconditioner<F: FnMut(&[f64], &mut [f64]) -> Result<()>>(pub F);

impl<F: FnMut(&[f64], &mut [f64]) -> Result<()>> core::fmt::Debug for FnPreconditioner<F> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("FnPreconditioner")
    }
}

impl<F: FnMut(&[f64], &mut [f64]) -> Result<()>> Preconditioner for FnPreconditioner<F> {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) -> Result<()> {
        (self.0)(r, z)
    }
}

/// Stopping rule on the residual relative to `‖b‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// `‖r‖/‖b‖ ≤ rel`.
    Relative(f64),
    /// `‖r‖/‖b‖ ≤ min{rel, abs/‖b‖}`: both the relative and the absolute
    /// residual must meet their bounds.
    RelativeAndAbsolute { rel: f64, abs: f64 },
}

impl Tolerance {
    /// Inner-solve policy `min{1e-3, 1e-3/‖b‖}`.
    pub const INNER: Tolerance = Tolerance::RelativeAndAbsolute { rel: 1e-3, abs: 1e-3 };

    /// Effective relative tolerance for a right-hand side of norm `b_norm`.
    pub fn relative_for(&self, b_norm: f64) -> f64 {
        match *self {
            Tolerance::Relative(r) => r,
            Tolerance::RelativeAndAbsolute { rel, abs } => {
                if b_norm > 0.0 {
                    rel.min(abs / b_norm)
                } else {
                    rel
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovParams {
    pub tol: Tolerance,
    pub max_iter: usize,
    /// Restart length; `None` keeps the full Krylov basis.
    pub restart: Option<usize>,
}

impl KrylovParams {
    pub fn new(tol: Tolerance, max_iter: usize) -> Self {
        KrylovParams {
            tol,
            max_iter,
            restart: None,
        }
    }
}

/// Iteration statistics of one solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub converged: bool,
    /// Final `‖b − Ax‖/‖b‖`, recomputed from the returned iterate.
    pub rel_residual: f64,
    pub abs_residual: f64,
    /// Residual estimate per iteration, starting with the initial residual.
    pub residual_history: Vec<f64>,
    /// Iterations of each inner solve made by the preconditioner.
    pub inner_iterations: Vec<usize>,
    /// Seconds; filled in by callers that have a clock.
    pub wall_time: f64,
}

impl SolveStats {
    pub fn total_inner_iterations(&self) -> usize {
        self.inner_iterations.iter().sum()
    }
}

fn residual(op: &dyn LinearOperator, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; b.len()];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    r
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if a == 0.0 {
        (0.0, 1.0)
    } else {
        let r = Float::hypot(a, b);
        (a / r, b / r)
    }
}

/// Orthogonalizes `w` against `basis` (MGS plus conditional second pass) and
/// returns the projection coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut h: Vec<f64> = Vec::with_capacity(basis.len() + 1);
    for v in basis {
        let c = dot(v, w);
        axpy(-c, v, w);
        h.push(c);
    }
    let wn = norm2(w);
    if wn > 0.0 {
        let second: Vec<f64> = basis.iter().map(|v| dot(v, w)).collect();
        if second.iter().any(|c| c.abs() > 1e-8 * wn) {
            for (v, (&c, hj)) in basis.iter().zip(second.iter().zip(h.iter_mut())) {
                axpy(-c, v, w);
                *hj += c;
            }
        }
    }
    h
}

/// Right-preconditioned GMRES; `flexible` stores the preconditioned
/// directions (FGMRES), otherwise the preconditioner is applied once per
/// cycle to the combined correction and must be fixed.
fn gmres_impl(
    op: &dyn LinearOperator,
    precond: &mut dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    params: &KrylovParams,
    flexible: bool,
) -> Result<SolveStats> {
    let n = b.len();
    let b_norm = norm2(b);
    let mut stats = SolveStats::default();
    if b_norm == 0.0 {
        x.fill(0.0);
        stats.converged = true;
        stats.residual_history.push(0.0);
        return Ok(stats);
    }
    let tol = params.tol.relative_for(b_norm);
    let mut r = residual(op, b, x);
    let mut beta = norm2(&r);
    stats.residual_history.push(beta / b_norm);
    let mut done = beta / b_norm <= tol;
    let m_max = params.restart.unwrap_or(params.max_iter).max(1);
    while !done && stats.iterations < params.max_iter {
        let mut v: Vec<Vec<f64>> = Vec::new();
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h_cols: Vec<Vec<f64>> = Vec::new();
        let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
        let mut g = vec![beta];
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut w = vec![0.0; n];
        while v.len() <= m_max && stats.iterations < params.max_iter {
            let j = v.len() - 1;
            let mut zj = vec![0.0; n];
            precond.apply(&v[j], &mut zj)?;
            op.apply(&zj, &mut w);
            if flexible {
                z.push(zj);
            }
            let mut h = orthogonalize(&v, &mut w);
            let hn = norm2(&w);
            h.push(hn);
            for i in 0..j {
                let (a, bb) = (h[i], h[i + 1]);
                h[i] = cs[i] * a + sn[i] * bb;
                h[i + 1] = -sn[i] * a + cs[i] * bb;
            }
            let (c, s) = givens(h[j], h[j + 1]);
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s * gj);
            h_cols.push(h);
            stats.iterations += 1;
            let res = g[j + 1].abs() / b_norm;
            stats.residual_history.push(res);
            if res <= tol || hn == 0.0 {
                done = true;
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        // Back substitution for the least-squares coefficients.
        let k = h_cols.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for jj in i + 1..k {
                s -= h_cols[jj][i] * y[jj];
            }
            y[i] = s / h_cols[i][i];
        }
        if flexible {
            for (zi, yi) in z.iter().zip(&y) {
                axpy(*yi, zi, x);
            }
        } else {
            let mut u = vec![0.0; n];
            for (vi, yi) in v.iter().zip(&y) {
                axpy(*yi, vi, &mut u);
            }
            let mut pu = vec![0.0; n];
            precond.apply(&u, &mut pu)?;
            axpy(1.0, &pu, x);
        }
        r = residual(op, b, x);
        beta = norm2(&r);
        if beta == 0.0 {
            done = true;
        }
    }
    stats.abs_residual = beta;
    stats.rel_residual = beta / b_norm;
    stats.converged = done || stats.rel_residual <= tol;
    Ok(stats)
}

/// Flexible GMRES; `x` holds the initial guess on entry.
pub fn fgmres(
    op: &dyn LinearOperator,
    precond: &mut dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    params: &KrylovParams,
) -> Result<SolveStats> {
    gmres_impl(op, precond, b, x, params, true)
}

/// Right-preconditioned GMRES with a fixed preconditioner.
pub fn gmres_right(
    op: &dyn LinearOperator,
    precond: &mut dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    params: &KrylovParams,
) -> Result<SolveStats> {
    gmres_impl(op, precond, b, x, params, false)
}

/// Preconditioned conjugate gradients for SPD operators.
pub fn cg(
    op: &dyn LinearOperator,
    precond: &mut dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    params: &KrylovParams,
) -> Result<SolveStats> {
    let n = b.len();
    let b_norm = norm2(b);
    let mut stats = SolveStats::default();
    if b_norm == 0.0 {
        x.fill(0.0);
        stats.converged = true;
        stats.residual_history.push(0.0);
        return Ok(stats);
    }
    let tol = params.tol.relative_for(b_norm);
    let mut r = residual(op, b, x);
    let mut rn = norm2(&r);
    stats.residual_history.push(rn / b_norm);
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    precond.apply(&r, &mut z)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    while rn / b_norm > tol && stats.iterations < params.max_iter {
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(crate::Error::InvalidInput(alloc::format!(
                "CG breakdown: operator is not positive definite (pᵀAp = {pq:e})"
            )));
        }
        let alpha = rz / pq;
        axpy(alpha, &p, x);
        axpy(-alpha, &q, &mut r);
        rn = norm2(&r);
        stats.iterations += 1;
        stats.residual_history.push(rn / b_norm);
        if rn / b_norm <= tol {
            break;
        }
        precond.apply(&r, &mut z)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    let r = residual(op, b, x);
    stats.abs_residual = norm2(&r);
    stats.rel_residual = stats.abs_residual / b_norm;
    stats.converged = rn / b_norm <= tol;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseLu;
    use crate::sparse::BlockCsrMatrix;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn rand_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.next_u64() as f64 / u64::MAX as f64 - 0.5).collect()
    }

    /// Nonsymmetric tridiagonal-like test matrix (convection–diffusion).
    fn convdiff(n: usize, eps: f64) -> BlockCsrMatrix {
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| (i.saturating_sub(1)..(i + 2).min(n)).collect())
            .collect();
        let mut a = BlockCsrMatrix::from_pattern(n, 1, &rows);
        for i in 0..n {
            a.block_mut(i, i)[0] = 2.0 * eps + 1.0;
            if i > 0 {
                a.block_mut(i, i - 1)[0] = -eps - 1.0;
            }
            if i + 1 < n {
                a.block_mut(i, i + 1)[0] = -eps;
            }
        }
        a
    }

    fn spd(n: usize) -> BlockCsrMatrix {
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| (i.saturating_sub(1)..(i + 2).min(n)).collect())
            .collect();
        let mut a = BlockCsrMatrix::from_pattern(n, 1, &rows);
        for i in 0..n {
            a.block_mut(i, i)[0] = 2.0 + 0.01 * i as f64;
            if i > 0 {
                a.block_mut(i, i - 1)[0] = -1.0;
            }
            if i + 1 < n {
                a.block_mut(i, i + 1)[0] = -1.0;
            }
        }
        a
    }

    struct Lu(DenseLu);

    impl Preconditioner for Lu {
        fn apply(&mut self, r: &[f64], z: &mut [f64]) -> Result<()> {
            z.copy_from_slice(&self.0.solve(r));
            Ok(())
        }
    }

    fn jacobi(a: &BlockCsrMatrix) -> impl Preconditioner {
        let d = a.block_diag_inverse().unwrap();
        FnPreconditioner(move |r: &[f64], z: &mut [f64]| {
            d.apply(r, z);
            Ok(())
        })
    }

    #[test]
    fn identity_operator_converges_in_one_iteration() {
        let a = BlockCsrMatrix::identity(10, 2);
        let b: Vec<f64> = (0..20).map(|i| i as f64 - 3.0).collect();
        let mut x = vec![0.0; 20];
        let s = fgmres(&a, &mut Identity, &b, &mut x, &KrylovParams::new(Tolerance::Relative(1e-8), 50)).unwrap();
        assert_eq!(s.iterations, 1);
        assert!(s.converged);
        assert!(x.iter().zip(&b).all(|(p, q)| (p - q).abs() <= 1e-14 * q.abs().max(1.0)));
    }

    #[test]
    fn exact_preconditioner_needs_at_most_two_iterations() {
        let a = convdiff(60, 0.1);
        let mut p = Lu(DenseLu::new(a.to_dense()).unwrap());
        let b = rand_vec(60, &mut ChaCha8Rng::seed_from_u64(1));
        let mut x = vec![0.0; 60];
        let s = fgmres(&a, &mut p, &b, &mut x, &KrylovParams::new(Tolerance::Relative(1e-8), 50)).unwrap();
        assert!(s.iterations <= 2 && s.converged, "{s:?}");
    }

    #[test]
    fn inner_policy_tolerances() {
        assert_eq!(Tolerance::INNER.relative_for(1.0), 1e-3);
        assert!((Tolerance::INNER.relative_for(1e4) - 1e-7).abs() < 1e-20);
        let a = convdiff(10, 0.5);
        let mut x = vec![1.0; 10];
        let s = gmres_right(&a, &mut Identity, &[0.0; 10], &mut x, &KrylovParams::new(Tolerance::INNER, 10)).unwrap();
        assert_eq!(s.iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn inner_policy_meets_absolute_bound() {
        let a = convdiff(80, 0.3);
        let mut b = rand_vec(80, &mut ChaCha8Rng::seed_from_u64(2));
        b.iter_mut().for_each(|v| *v *= 1e4 / 5.0);
        let mut x = vec![0.0; 80];
        let s = gmres_right(&a, &mut Identity, &b, &mut x, &KrylovParams::new(Tolerance::INNER, 200)).unwrap();
        assert!(s.converged);
        assert!(s.abs_residual <= 1.0001e-3 && s.rel_residual <= 1e-3, "{s:?}");
    }

    #[test]
    fn residuals_are_monotone_and_restart_converges() {
        let a = convdiff(120, 0.05);
        let b = rand_vec(120, &mut ChaCha8Rng::seed_from_u64(3));
        for restart in [None, Some(15)] {
            let mut params = KrylovParams::new(Tolerance::Relative(1e-10), 2000);
            params.restart = restart;
            let mut x = vec![0.0; 120];
            let s = gmres_right(&a, &mut Identity, &b, &mut x, &params).unwrap();
            assert!(s.converged);
            for w in s.residual_history.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
            let mut r = vec![0.0; 120];
            a.matvec(&x, &mut r);
            let err: f64 = r.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            assert!(err <= 1.01e-10 * norm2(&b));
        }
    }

    #[test]
    fn flexible_matches_standard_with_fixed_preconditioner() {
        let a = convdiff(70, 0.2);
        let b = rand_vec(70, &mut ChaCha8Rng::seed_from_u64(4));
        for its in [3, 7, 12] {
            let params = KrylovParams::new(Tolerance::Relative(1e-30), its);
            let mut x1 = vec![0.0; 70];
            let mut x2 = vec![0.0; 70];
            fgmres(&a, &mut jacobi(&a), &b, &mut x1, &params).unwrap();
            gmres_right(&a, &mut jacobi(&a), &b, &mut x2, &params).unwrap();
            let d = x1.iter().zip(&x2).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(d <= 1e-12 * x1.iter().fold(0.0f64, |m, v| m.max(v.abs())), "{its}: {d}");
        }
    }

    #[test]
    fn cg_on_diagonal_with_exact_preconditioner() {
        let a = BlockCsrMatrix::identity(8, 1).scaled(3.0);
        let b = vec![1.0; 8];
        let mut x = vec![0.0; 8];
        let s = cg(&a, &mut jacobi(&a), &b, &mut x, &KrylovParams::new(Tolerance::Relative(1e-12), 10)).unwrap();
        assert_eq!(s.iterations, 1);
        assert!(x.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn cg_solves_spd_system_and_detects_indefiniteness() {
        let a = spd(100);
        let b = rand_vec(100, &mut ChaCha8Rng::seed_from_u64(5));
        let mut x = vec![0.0; 100];
        let s = cg(&a, &mut Identity, &b, &mut x, &KrylovParams::new(Tolerance::Relative(1e-10), 500)).unwrap();
        assert!(s.converged && s.rel_residual <= 1.01e-10);
        let neg = a.scaled(-1.0);
        let mut x = vec![0.0; 100];
        assert!(cg(&neg, &mut Identity, &b, &mut x, &KrylovParams::new(Tolerance::Relative(1e-10), 500)).is_err());
    }

    #[test]
    fn max_iterations_is_reported_not_fatal() {
        let a = convdiff(200, 0.01);
        let b = rand_vec(200, &mut ChaCha8Rng::seed_from_u64(6));
        let mut x = vec![0.0; 200];
        let s = fgmres(&a, &mut Identity, &b, &mut x, &KrylovParams::new(Tolerance::Relative(1e-14), 5)).unwrap();
        assert_eq!(s.iterations, 5);
        assert!(!s.converged);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn gmres_solves_random_well_conditioned_systems(seed in 0u64..1000, n in 2usize..25) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vals = rand_vec(n * n, &mut rng);
            let mut d = DMatrix::from_row_slice(n, n, &vals);
            for i in 0..n {
                d[(i, i)] += n as f64;
            }
            let rows: Vec<Vec<usize>> = (0..n).map(|_| (0..n).collect()).collect();
            let mut a = BlockCsrMatrix::from_pattern(n, 1, &rows);
            for i in 0..n {
                for j in 0..n {
                    a.block_mut(i, j)[0] = d[(i, j)];
                }
            }
            let b = rand_vec(n, &mut rng);
            let mut x = vec![0.0; n];
            let s = fgmres(&a, &mut Identity, &b, &mut x, &KrylovParams::new(Tolerance::Relative(1e-10), 4 * n)).unwrap();
            prop_assert!(s.converged);
            prop_assert!(s.iterations <= n);
            prop_assert!(s.rel_residual <= 1e-9);
        }
    }
}
