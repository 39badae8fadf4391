//! Largest eigenvalues of the transport-preconditioned Schur complement.
//!
//! With the swapped ordering the (2,2) Schur complement is
//! `S₂₂ = √κ_Δ G_bᵀ + S_M + S_L`, `S_M = (M + κ̃_BC M_BC,h)/Δt (√κ_Δ G_b)⁻¹ M`,
//! `S_L = κ_⊥ L (√κ_Δ G_b)⁻¹ M`. Preconditioning by the transport block gives
//! `I + X_M + X_L`, `X = (√κ_Δ G_bᵀ)⁻¹ S`, and each `X` is similar to the
//! symmetric operator `M^{1/2} X M^{-1/2}`. Its action only needs `M^{1/2}`:
//! `M^{1/2} (√κ_Δ G_bᵀ)⁻¹ K (√κ_Δ G_b)⁻¹ M^{1/2}` with `K` the mass or
//! Laplacian part. The largest eigenvalue is found by Lanczos with full
//! reorthogonalization.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::assembly::AssembledOperators;
use crate::blocksolve::{LinearSolve, Scaled};
use crate::dense::{from_matrix, to_matrix};
use crate::sparse::{axpy, dot, norm2, BlockCsrMatrix, BlockDiagonal};
use crate::{Error, Result};

/// A symmetric operator given by its action.
pub trait SymmetricAction {
    fn dim(&self) -> usize;
    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

/// Exact `M^{1/2}` of a block-diagonal SPD mass matrix, block by block.
pub fn mass_sqrt(m: &BlockCsrMatrix) -> Result<BlockDiagonal> {
    let bs = m.bs;
    let mut blocks = Vec::with_capacity(m.nbrows * bs * bs);
    for i in 0..m.nbrows {
        let row = m.row_blocks(i);
        if row.len() != 1 || m.col_idx[row.start] != i {
            return Err(Error::InvalidInput("mass matrix is not block diagonal".into()));
        }
        let a = to_matrix(bs, m.block_at(row.start));
        let eig = SymmetricEigen::new(a);
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::SingularBlock { row: i });
        }
        let sq = eig.eigenvalues.map(Float::sqrt);
        let r = &eig.eigenvectors * DMatrix::from_diagonal(&sq) * eig.eigenvectors.transpose();
        blocks.extend(from_matrix(&r));
    }
    Ok(BlockDiagonal { bs, blocks })
}

/// Which part of `(√κ_Δ G_bᵀ)⁻¹ S₂₂ − I` to symmetrize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// `X_M`, the mass (time step) part.
    Mass,
    /// `X_L`, the perpendicular diffusion part.
    Laplacian,
    /// `X_M + X_L`.
    Full,
}

impl Component {
    pub fn name(&self) -> &'static str {
        match self {
            Component::Mass => "mass",
            Component::Laplacian => "laplacian",
            Component::Full => "full",
        }
    }
}

/// Physical parameters of the symmetrized components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumParams {
    pub kappa_delta: f64,
    pub kappa_perp: f64,
    pub dt: f64,
    /// `κ̃_BC`; zero drops `M_BC,h` from the mass part.
    pub kappa_bc: f64,
}

/// `x ↦ M^{1/2} X M^{-1/2} x` for one component. `g` solves with `G_b` and
/// `gt` with `G_bᵀ`; the `√κ_Δ` factor is applied through [`Scaled`].
pub struct SymmetrizedOperator<'a> {
    ops: &'a AssembledOperators,
    m_half: BlockDiagonal,
    params: SpectrumParams,
    component: Component,
    g: Scaled<&'a mut dyn LinearSolve>,
    gt: Scaled<&'a mut dyn LinearSolve>,
    /// Inner iterations of every transport solve so far.
    pub inner_iterations: Vec<usize>,
}

impl core::fmt::Debug for SymmetrizedOperator<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SymmetrizedOperator")
            .field("params", &self.params)
            .field("component", &self.component)
            .finish_non_exhaustive()
    }
}

impl<'a> SymmetrizedOperator<'a> {
    pub fn new(
        ops: &'a AssembledOperators,
        m_half: BlockDiagonal,
        params: SpectrumParams,
        component: Component,
        g: &'a mut dyn LinearSolve,
        gt: &'a mut dyn LinearSolve,
    ) -> Result<Self> {
        let n = ops.m.nrows();
        if g.dim() != n || gt.dim() != n || m_half.n_blocks() * m_half.bs != n {
            return Err(Error::InvalidInput("transport solvers and mass root must match the space".into()));
        }
        if !(params.kappa_delta > 0.0 && params.dt > 0.0 && params.kappa_perp >= 0.0) {
            return Err(Error::InvalidInput(format!("invalid spectrum parameters {params:?}")));
        }
        let sk = Float::sqrt(params.kappa_delta);
        Ok(SymmetrizedOperator {
            ops,
            m_half,
            params,
            component,
            g: Scaled { inner: g, alpha: sk },
            gt: Scaled { inner: gt, alpha: sk },
            inner_iterations: Vec::new(),
        })
    }

    pub fn params(&self) -> SpectrumParams {
        self.params
    }

    pub fn component(&self) -> Component {
        self.component
    }
}

impl SymmetricAction for SymmetrizedOperator<'_> {
    fn dim(&self) -> usize {
        self.ops.m.nrows()
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.dim();
        let p = self.params;
        let mut w = vec![0.0; n];
        self.m_half.apply(x, &mut w);
        let mut u = vec![0.0; n];
        let st = self.g.solve(&w, &mut u)?;
        self.inner_iterations.push(st.iterations);
        let mut k = vec![0.0; n];
        if matches!(self.component, Component::Mass | Component::Full) {
            self.ops.m.matvec_add(1.0 / p.dt, &u, &mut k);
            if p.kappa_bc != 0.0 {
                self.ops.m_bc_he.matvec_add(p.kappa_bc / p.dt, &u, &mut k);
            }
        }
        if matches!(self.component, Component::Laplacian | Component::Full) && p.kappa_perp != 0.0 {
            self.ops.l.matvec_add(p.kappa_perp, &u, &mut k);
        }
        let mut v = vec![0.0; n];
        let st = self.gt.solve(&k, &mut v)?;
        self.inner_iterations.push(st.iterations);
        self.m_half.apply(&v, y);
        Ok(())
    }
}

/// Deterministic start vector with entries uniform in `[−1, 1)`.
pub fn random_unit_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

/// Largest value of `|⟨Ax, y⟩ − ⟨x, Ay⟩| / (‖x‖‖y‖ max(1, ‖Ax‖/‖x‖))` over
/// `pairs` random pairs.
pub fn symmetry_defect(op: &mut dyn SymmetricAction, pairs: usize, seed: u64) -> Result<f64> {
    let n = op.dim();
    let mut worst: f64 = 0.0;
    for k in 0..pairs {
        let x = random_unit_vector(n, seed.wrapping_add(2 * k as u64));
        let y = random_unit_vector(n, seed.wrapping_add(2 * k as u64 + 1));
        let mut ax = vec![0.0; n];
        let mut ay = vec![0.0; n];
        op.apply(&x, &mut ax)?;
        op.apply(&y, &mut ay)?;
        let scale = norm2(&ax).max(norm2(&ay)).max(1.0);
        worst = worst.max((dot(&ax, &y) - dot(&x, &ay)).abs() / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosParams {
    /// Stop when `‖Av − λv‖ ≤ tol·|λ|`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Largest accepted [`symmetry_defect`]; `None` skips the check.
    pub symmetry_tol: Option<f64>,
}

impl Default for LanczosParams {
    fn default() -> Self {
        LanczosParams {
            tol: 1e-6,
            max_iter: 300,
            seed: 7,
            symmetry_tol: Some(1e-6),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate {
    pub lambda: f64,
    /// `‖Av − λv‖` for the returned unit Ritz vector, recomputed.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub symmetry_defect: Option<f64>,
}

/// Largest eigenvalue of a symmetric operator by Lanczos with full
/// reorthogonalization.
pub fn largest_eigenvalue(op: &mut dyn SymmetricAction, params: &LanczosParams) -> Result<EigenEstimate> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidInput("empty operator".into()));
    }
    let defect = match params.symmetry_tol {
        Some(tol) => {
            let d = symmetry_defect(op, 2, params.seed.wrapping_add(1000))?;
            if d > tol {
                return Err(Error::InvalidInput(format!(
                    "operator is not symmetric to {tol:e} (defect {d:.3e}); tighten the inner solves"
                )));
            }
            Some(d)
        }
        None => None,
    };
    let mut basis: Vec<Vec<f64>> = vec![random_unit_vector(n, params.seed)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let max_iter = params.max_iter.min(n);
    let mut best = (0.0, Vec::new());
    for k in 0..max_iter {
        op.apply(&basis[k], &mut w)?;
        let a = dot(&basis[k], &w);
        alpha.push(a);
        axpy(-a, &basis[k], &mut w);
        if k > 0 {
            axpy(-beta[k - 1], &basis[k - 1], &mut w);
        }
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm2(&w);
        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imax, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .unwrap();
        let s: Vec<f64> = eig.eigenvectors.column(imax).iter().copied().collect();
        let est_residual = (b * s[m - 1]).abs();
        best = (theta, s);
        let invariant = b <= 1e-14 * theta.abs().max(f64::MIN_POSITIVE);
        if est_residual <= params.tol * theta.abs() || invariant || k + 1 == max_iter {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let (lambda, s) = best;
    let mut v = vec![0.0; n];
    for (c, q) in s.iter().zip(&basis) {
        axpy(*c, q, &mut v);
    }
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut av = vec![0.0; n];
    op.apply(&v, &mut av)?;
    axpy(-lambda, &v, &mut av);
    let residual = norm2(&av);
    Ok(EigenEstimate {
        lambda,
        residual,
        iterations: alpha.len(),
        converged: residual <= params.tol * lambda.abs() * 10.0,
        symmetry_defect: defect,
    })
}

/// One mesh of an eigenvalue study with transport solvers for `G_b` and
/// `G_bᵀ`.
pub struct EigsCase<'a> {
    pub label: String,
    pub ops: &'a AssembledOperators,
    pub g: &'a mut dyn LinearSolve,
    pub gt: &'a mut dyn LinearSolve,
}

impl core::fmt::Debug for EigsCase<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("EigsCase").field("label", &self.label).finish_non_exhaustive()
    }
}

/// One row of an eigenvalue table.
#[derive(Debug, Clone, PartialEq)]
pub struct EigRow {
    pub label: String,
    pub dt: f64,
    pub ratio: f64,
    pub component: Component,
    /// Whether `M_BC,h` is part of the mass component.
    pub with_boundary_mass: bool,
    pub estimate: EigenEstimate,
}

/// Grid of the eigenvalue study.
#[derive(Debug, Clone, PartialEq)]
pub struct EigsGrid {
    pub dts: Vec<f64>,
    pub ratios: Vec<f64>,
    pub kappa_perp: f64,
    pub kappa_bc: f64,
    pub components: Vec<Component>,
    /// Also compute the mass component without `M_BC,h`.
    pub without_boundary_mass: bool,
}

/// Largest eigenvalues for every case × Δt × ratio × component.
pub fn eigs_report(cases: &mut [EigsCase<'_>], grid: &EigsGrid, lanczos: &LanczosParams) -> Result<Vec<EigRow>> {
    let mut rows = Vec::new();
    for case in cases.iter_mut() {
        let m_half = mass_sqrt(&case.ops.m)?;
        for &dt in &grid.dts {
            for &ratio in &grid.ratios {
                let kappa_par = ratio * grid.kappa_perp;
                let mut variants: Vec<(Component, bool)> = grid.components.iter().map(|&c| (c, true)).collect();
                if grid.without_boundary_mass {
                    variants.push((Component::Mass, false));
                }
                for (component, with_bc) in variants {
                    let params = SpectrumParams {
                        kappa_delta: kappa_par - grid.kappa_perp,
                        kappa_perp: grid.kappa_perp,
                        dt,
                        kappa_bc: if with_bc { grid.kappa_bc } else { 0.0 },
                    };
                    let mut op =
                        SymmetrizedOperator::new(case.ops, m_half.clone(), params, component, &mut *case.g, &mut *case.gt)?;
                    let estimate = largest_eigenvalue(&mut op, lanczos)?;
                    rows.push(EigRow {
                        label: case.label.clone(),
                        dt,
                        ratio,
                        component,
                        with_boundary_mass: with_bc,
                        estimate,
                    });
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests;
