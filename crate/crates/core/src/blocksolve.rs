//! Solvers for the 2×2 mixed block system.
//!
//! The AIR strategy runs FGMRES on the swapped system
//! `[[−√κ_Δ G_b, M], [A_TT, √κ_Δ G_bᵀ]] (T, ζ) = (F_ζ, F_T)` with a block
//! triangular preconditioner whose diagonal transport blocks are solved by
//! AIR-preconditioned GMRES. The Schur strategy runs FGMRES in standard
//! ordering with the explicitly assembled complement
//! `S̃ = A_TT − A_Tζ A_ζζ⁻¹ A_ζT` solved by classical AMG-preconditioned CG.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::amg::{AmgHierarchy, AmgParams};
use crate::assembly::{AssembledOperators, SystemMatrices};
use crate::dense::DenseLu;
use crate::krylov::{cg, fgmres, gmres_right, FnOperator, FnPreconditioner, KrylovParams, SolveStats, Tolerance};
use crate::sparse::{axpy, block_2x2_csr, BlockCsrMatrix, BlockDiagonal, CsrMatrix};
use crate::{Error, Result};

/// A solver for one fixed linear system.
pub trait LinearSolve {
    fn dim(&self) -> usize;
    /// Solves `A x = b`; `x` holds the initial guess on entry.
    fn solve(&mut self, b: &[f64], x: &mut [f64]) -> Result<SolveStats>;
}

impl<T: LinearSolve + ?Sized> LinearSolve for &mut T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn solve(&mut self, b: &[f64], x: &mut [f64]) -> Result<SolveStats> {
        (**self).solve(b, x)
    }
}

/// A sparse direct factorization of a scalar matrix.
pub trait SparseFactorization: Sized {
    fn factorize(a: &CsrMatrix) -> Result<Self>;
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>>;
}

/// Dense LU as a [`SparseFactorization`] for small systems and tests.
#[derive(Debug, Clone)]
pub struct DenseFactorization(DenseLu);

impl SparseFactorization for DenseFactorization {
    fn factorize(a: &CsrMatrix) -> Result<Self> {
        let mut d = nalgebra::DMatrix::zeros(a.nrows, a.ncols);
        for i in 0..a.nrows {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] += v;
            }
        }
        Ok(DenseFactorization(DenseLu::new(d)?))
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        Ok(self.0.solve(b))
    }
}

/// A factored matrix used as a [`LinearSolve`].
#[derive(Debug, Clone)]
pub struct Factored<F> {
    pub factor: F,
    n: usize,
}

impl<F: SparseFactorization> Factored<F> {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        Ok(Factored {
            factor: F::factorize(a)?,
            n: a.nrows,
        })
    }
}

impl<F: SparseFactorization> LinearSolve for Factored<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve(&mut self, b: &[f64], x: &mut [f64]) -> Result<SolveStats> {
        x.copy_from_slice(&self.factor.solve(b)?);
        Ok(SolveStats {
            converged: true,
            ..SolveStats::default()
        })
    }
}

/// Diagnostic for a transport solve that did not converge.
fn transport_failure(block: &str, stats: &SolveStats) -> Error {
    Error::NotConverged {
        context: format!(
            "transport solve with {block} stagnated; the transport operator is singular when field lines \
             are closed, so the AIR strategy requires open (acyclic) field lines"
        ),
        iterations: stats.iterations,
        rel_residual: stats.rel_residual,
    }
}

/// AIR-preconditioned right GMRES for one transport block.
#[derive(Debug, Clone)]
pub struct AirGmres {
    pub hierarchy: AmgHierarchy,
    pub params: KrylovParams,
    /// Name of the block in diagnostics.
    pub label: String,
}

impl AirGmres {
    pub fn new(a: BlockCsrMatrix, amg: &AmgParams, params: KrylovParams, label: &str) -> Result<Self> {
        Ok(AirGmres {
            hierarchy: AmgHierarchy::build(a, amg)?,
            params,
            label: label.into(),
        })
    }

    pub fn matrix(&self) -> &BlockCsrMatrix {
        self.hierarchy.matrix()
    }
}

impl LinearSolve for AirGmres {
    fn dim(&self) -> usize {
        self.matrix().nrows()
    }

    /// Fails with an open-field-line diagnostic when GMRES does not converge.
    fn solve(&mut self, b: &[f64], x: &mut [f64]) -> Result<SolveStats> {
        let h = &self.hierarchy;
        let stats = gmres_right(h.matrix(), &mut &*h, b, x, &self.params)?;
        if !stats.converged {
            return Err(transport_failure(&self.label, &stats));
        }
        Ok(stats)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangularSide {
    Lower,
    Upper,
}

/// Outer and inner solver settings of one strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyParams {
    pub amg: AmgParams,
    /// Outer FGMRES, relative 1e-8 by default.
    pub outer: KrylovParams,
    /// Inner solves, `min{1e-3, 1e-3/‖b‖}` by default.
    pub inner: KrylovParams,
    pub side: TriangularSide,
}

impl StrategyParams {
    pub fn air() -> Self {
        StrategyParams {
            amg: AmgParams::air(),
            outer: KrylovParams::new(Tolerance::Relative(1e-8), 10_000),
            inner: KrylovParams::new(Tolerance::INNER, 1000),
            side: TriangularSide::Lower,
        }
    }

    pub fn schur_classical() -> Self {
        StrategyParams {
            amg: AmgParams::classical(),
            outer: KrylovParams::new(Tolerance::Relative(1e-8), 10_000),
            inner: KrylovParams::new(Tolerance::INNER, 2000),
            side: TriangularSide::Upper,
        }
    }
}

/// Solution of one block solve and its statistics. `stats.inner_iterations`
/// lists every inner solve; the per-block lists split them by block.
#[derive(Debug, Clone, Default)]
pub struct BlockSolution {
    pub t: Vec<f64>,
    pub zeta: Vec<f64>,
    pub stats: SolveStats,
    /// Inner iterations of the solves with `−√κ_Δ G_b` (AIR) or `S̃` (Schur).
    pub inner_first: Vec<usize>,
    /// Inner iterations of the solves with `√κ_Δ G_bᵀ` (AIR).
    pub inner_second: Vec<usize>,
    /// Explanation attached to a non-converged solve.
    pub diagnostic: Option<String>,
}

/// A strategy for the mixed system. Strategies are built for one set of
/// matrices and reused for every right-hand side with those matrices.
pub trait MixedSolver {
    fn name(&self) -> &'static str;
    fn solve(
        &mut self,
        sys: &SystemMatrices,
        f_t: &[f64],
        f_z: &[f64],
        guess: Option<(&[f64], &[f64])>,
    ) -> Result<BlockSolution>;
}

fn check_rhs(sys: &SystemMatrices, f_t: &[f64], f_z: &[f64]) -> Result<()> {
    let n = sys.ndofs();
    if f_t.len() != n || f_z.len() != n {
        return Err(Error::InvalidInput(format!(
            "right-hand side sizes {} and {} do not match {n} unknowns per field",
            f_t.len(),
            f_z.len()
        )));
    }
    Ok(())
}

fn initial_guess(n: usize, guess: Option<(&[f64], &[f64])>, first_t: bool) -> Vec<f64> {
    match guess {
        Some((t, z)) => {
            let mut x = Vec::with_capacity(2 * n);
            if first_t {
                x.extend_from_slice(t);
                x.extend_from_slice(z);
            } else {
                x.extend_from_slice(z);
                x.extend_from_slice(t);
            }
            x
        }
        None => vec![0.0; 2 * n],
    }
}

/// Block triangular AIR strategy.
#[derive(Debug, Clone)]
pub struct AirStrategy {
    /// Solver for `−√κ_Δ G_b`.
    pub zt: AirGmres,
    /// Solver for `√κ_Δ G_bᵀ`, with its own hierarchy.
    pub tz: AirGmres,
    pub params: StrategyParams,
}

impl AirStrategy {
    pub fn new(sys: &SystemMatrices, params: &StrategyParams) -> Result<Self> {
        if sys.sqrt_kappa_delta == 0.0 {
            return Err(Error::InvalidInput(
                "the AIR strategy needs kappa_par > kappa_perp (the transport blocks vanish)".into(),
            ));
        }
        Ok(AirStrategy {
            zt: AirGmres::new(sys.a_zt.clone(), &params.amg, params.inner, "-sqrt(kappa_delta) G_b")?,
            tz: AirGmres::new(sys.a_tz.clone(), &params.amg, params.inner, "sqrt(kappa_delta) G_b^T")?,
            params: *params,
        })
    }
}

impl MixedSolver for AirStrategy {
    fn name(&self) -> &'static str {
        "air"
    }

    fn solve(
        &mut self,
        sys: &SystemMatrices,
        f_t: &[f64],
        f_z: &[f64],
        guess: Option<(&[f64], &[f64])>,
    ) -> Result<BlockSolution> {
        check_rhs(sys, f_t, f_z)?;
        let n = sys.ndofs();
        // Swapped ordering: unknowns (T, ζ), equations (ζ-row, T-row).
        let op = FnOperator {
            n: 2 * n,
            f: |x: &[f64], y: &mut [f64]| {
                let (xt, xz) = x.split_at(n);
                let (y1, y2) = y.split_at_mut(n);
                sys.a_zt.matvec(xt, y1);
                sys.a_zz.matvec_add(1.0, xz, y1);
                sys.a_tt.matvec(xt, y2);
                sys.a_tz.matvec_add(1.0, xz, y2);
            },
        };
        let mut b = Vec::with_capacity(2 * n);
        b.extend_from_slice(f_z);
        b.extend_from_slice(f_t);
        let mut x = initial_guess(n, guess, true);
        let side = self.params.side;
        let (zt, tz) = (&mut self.zt, &mut self.tz);
        let mut inner_first = Vec::new();
        let mut inner_second = Vec::new();
        let mut tmp = vec![0.0; n];
        let mut precond = FnPreconditioner(|r: &[f64], z: &mut [f64]| {
            let (r1, r2) = r.split_at(n);
            let (zt_out, zz_out) = z.split_at_mut(n);
            zt_out.fill(0.0);
            zz_out.fill(0.0);
            match side {
                TriangularSide::Lower => {
                    inner_first.push(zt.solve(r1, zt_out)?.iterations);
                    tmp.copy_from_slice(r2);
                    sys.a_tt.matvec_add(-1.0, zt_out, &mut tmp);
                    inner_second.push(tz.solve(&tmp, zz_out)?.iterations);
                }
                TriangularSide::Upper => {
                    inner_second.push(tz.solve(r2, zz_out)?.iterations);
                    tmp.copy_from_slice(r1);
                    sys.a_zz.matvec_add(-1.0, zz_out, &mut tmp);
                    inner_first.push(zt.solve(&tmp, zt_out)?.iterations);
                }
            }
            Ok(())
        });
        let mut stats = fgmres(&op, &mut precond, &b, &mut x, &self.params.outer)?;
        drop(precond);
        stats.inner_iterations = interleave(&inner_first, &inner_second);
        let diagnostic = (!stats.converged).then(|| {
            String::from(
                "outer iteration did not converge; a (nearly) singular transport operator, as produced by \
                 closed field lines, stalls the AIR strategy, which requires open (acyclic) field lines",
            )
        });
        let zeta = x.split_off(n);
        Ok(BlockSolution {
            t: x,
            zeta,
            stats,
            inner_first,
            inner_second,
            diagnostic,
        })
    }
}

fn interleave(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    for i in 0..a.len().max(b.len()) {
        out.extend(a.get(i));
        out.extend(b.get(i));
    }
    out
}

/// `S̃ = A_TT − A_Tζ A_ζζ⁻¹ A_ζT` with the exact block-diagonal inverse of
/// `A_ζζ`.
pub fn assemble_schur_complement(sys: &SystemMatrices) -> Result<(BlockCsrMatrix, BlockDiagonal)> {
    let zz_inv = sys.a_zz.block_diag_inverse()?;
    if sys.a_zz.n_blocks() != sys.a_zz.nbrows {
        return Err(Error::InvalidInput("the Schur strategy needs a block-diagonal A_zz".into()));
    }
    let tail = zz_inv.to_matrix().spgemm(&sys.a_zt)?;
    let prod = sys.a_tz.spgemm(&tail)?;
    let mut s = BlockCsrMatrix::linear_combination(&[(1.0, &sys.a_tt), (-1.0, &prod)]);
    s.prune_zero_blocks();
    Ok((s, zz_inv))
}

/// Standard-order strategy with the classical-AMG Schur complement solve.
#[derive(Debug, Clone)]
pub struct SchurClassicalStrategy {
    pub hierarchy: AmgHierarchy,
    pub zz_inv: BlockDiagonal,
    pub params: StrategyParams,
}

impl SchurClassicalStrategy {
    pub fn new(sys: &SystemMatrices, params: &StrategyParams) -> Result<Self> {
        let (s, zz_inv) = assemble_schur_complement(sys)?;
        Ok(SchurClassicalStrategy {
            hierarchy: AmgHierarchy::build(s, &params.amg)?,
            zz_inv,
            params: *params,
        })
    }

    pub fn schur(&self) -> &BlockCsrMatrix {
        self.hierarchy.matrix()
    }
}

impl MixedSolver for SchurClassicalStrategy {
    fn name(&self) -> &'static str {
        "schur-classical"
    }

    fn solve(
        &mut self,
        sys: &SystemMatrices,
        f_t: &[f64],
        f_z: &[f64],
        guess: Option<(&[f64], &[f64])>,
    ) -> Result<BlockSolution> {
        check_rhs(sys, f_t, f_z)?;
        let n = sys.ndofs();
        let op = FnOperator {
            n: 2 * n,
            f: |x: &[f64], y: &mut [f64]| sys.apply(x, y),
        };
        let mut b = Vec::with_capacity(2 * n);
        b.extend_from_slice(f_t);
        b.extend_from_slice(f_z);
        let mut x = initial_guess(n, guess, true);
        let h = &self.hierarchy;
        let zz_inv = &self.zz_inv;
        let inner = self.params.inner;
        let side = self.params.side;
        let mut inner_first = Vec::new();
        let mut tmp = vec![0.0; n];
        let schur_solve = |rhs: &[f64], out: &mut [f64], log: &mut Vec<usize>| -> Result<()> {
            out.fill(0.0);
            let st = cg(h.matrix(), &mut &*h, rhs, out, &inner)?;
            log.push(st.iterations);
            if !st.converged {
                return Err(Error::NotConverged {
                    context: "classical AMG-CG solve with the Schur complement".into(),
                    iterations: st.iterations,
                    rel_residual: st.rel_residual,
                });
            }
            Ok(())
        };
        let mut precond = FnPreconditioner(|r: &[f64], z: &mut [f64]| {
            let (rt, rz) = r.split_at(n);
            let (zt, zz) = z.split_at_mut(n);
            match side {
                // [[S̃, A_Tζ], [0, A_ζζ]]⁻¹
                TriangularSide::Upper => {
                    zz_inv.apply(rz, zz);
                    tmp.copy_from_slice(rt);
                    sys.a_tz.matvec_add(-1.0, zz, &mut tmp);
                    schur_solve(&tmp, zt, &mut inner_first)?;
                }
                // [[S̃, 0], [A_ζT, A_ζζ]]⁻¹
                TriangularSide::Lower => {
                    schur_solve(rt, zt, &mut inner_first)?;
                    tmp.copy_from_slice(rz);
                    sys.a_zt.matvec_add(-1.0, zt, &mut tmp);
                    zz_inv.apply(&tmp, zz);
                }
            }
            Ok(())
        });
        let mut stats = fgmres(&op, &mut precond, &b, &mut x, &self.params.outer)?;
        drop(precond);
        stats.inner_iterations = inner_first.clone();
        let zeta = x.split_off(n);
        Ok(BlockSolution {
            t: x,
            zeta,
            stats,
            inner_first,
            inner_second: Vec::new(),
            diagnostic: None,
        })
    }
}

/// Sparse direct solve of the assembled 2×2 system.
#[derive(Debug, Clone)]
pub struct DirectStrategy<F> {
    pub factor: F,
    n: usize,
}

impl<F: SparseFactorization> DirectStrategy<F> {
    pub fn new(sys: &SystemMatrices) -> Result<Self> {
        let a = block_2x2_csr([[&sys.a_tt, &sys.a_tz], [&sys.a_zt, &sys.a_zz]]);
        Ok(DirectStrategy {
            factor: F::factorize(&a)?,
            n: sys.ndofs(),
        })
    }
}

impl<F: SparseFactorization> MixedSolver for DirectStrategy<F> {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn solve(
        &mut self,
        sys: &SystemMatrices,
        f_t: &[f64],
        f_z: &[f64],
        _guess: Option<(&[f64], &[f64])>,
    ) -> Result<BlockSolution> {
        check_rhs(sys, f_t, f_z)?;
        if sys.ndofs() != self.n {
            return Err(Error::InvalidInput("factorization was built for a different system".into()));
        }
        let mut b = Vec::with_capacity(2 * self.n);
        b.extend_from_slice(f_t);
        b.extend_from_slice(f_z);
        let mut x = self.factor.solve(&b)?;
        let mut r = b.clone();
        let mut ax = vec![0.0; b.len()];
        sys.apply(&x, &mut ax);
        axpy(-1.0, &ax, &mut r);
        let bn = crate::sparse::norm2(&b);
        let rn = crate::sparse::norm2(&r);
        let zeta = x.split_off(self.n);
        Ok(BlockSolution {
            t: x,
            zeta,
            stats: SolveStats {
                converged: true,
                abs_residual: rn,
                rel_residual: if bn > 0.0 { rn / bn } else { 0.0 },
                ..SolveStats::default()
            },
            ..BlockSolution::default()
        })
    }
}

/// Sparse direct solve through the Schur complement: `ζ` is eliminated with
/// the exact block-diagonal inverse of `A_ζζ`, the symmetric positive
/// definite `S̃` is factored once, and `ζ` is recovered from the second row.
/// Needs half the unknowns of [`DirectStrategy`] and admits a Cholesky
/// factorization.
#[derive(Debug, Clone)]
pub struct SchurDirectStrategy<F> {
    pub factor: F,
    pub zz_inv: BlockDiagonal,
    n: usize,
}

impl<F: SparseFactorization> SchurDirectStrategy<F> {
    pub fn new(sys: &SystemMatrices) -> Result<Self> {
        let (s, zz_inv) = assemble_schur_complement(sys)?;
        Ok(SchurDirectStrategy {
            factor: F::factorize(&s.to_csr())?,
            zz_inv,
            n: sys.ndofs(),
        })
    }
}

const SCHUR_REFINEMENT_STEPS: usize = 3;

impl<F: SparseFactorization> SchurDirectStrategy<F> {
    /// `x = A⁻¹ r` by block elimination, with `r` and `x` in `(T, ζ)` order.
    fn eliminate_and_solve(&self, sys: &SystemMatrices, r: &[f64], x: &mut [f64]) -> Result<()> {
        let n = self.n;
        let (r_t, r_z) = r.split_at(n);
        let (x_t, x_z) = x.split_at_mut(n);
        let mut w = vec![0.0; n];
        self.zz_inv.apply(r_z, &mut w);
        let mut g = r_t.to_vec();
        sys.a_tz.matvec_add(-1.0, &w, &mut g);
        x_t.copy_from_slice(&self.factor.solve(&g)?);
        w.copy_from_slice(r_z);
        sys.a_zt.matvec_add(-1.0, x_t, &mut w);
        self.zz_inv.apply(&w, x_z);
        Ok(())
    }
}

impl<F: SparseFactorization> MixedSolver for SchurDirectStrategy<F> {
    fn name(&self) -> &'static str {
        "direct-schur"
    }

    fn solve(
        &mut self,
        sys: &SystemMatrices,
        f_t: &[f64],
        f_z: &[f64],
        _guess: Option<(&[f64], &[f64])>,
    ) -> Result<BlockSolution> {
        check_rhs(sys, f_t, f_z)?;
        let n = self.n;
        if sys.ndofs() != n {
            return Err(Error::InvalidInput("factorization was built for a different system".into()));
        }
        let mut b = Vec::with_capacity(2 * n);
        b.extend_from_slice(f_t);
        b.extend_from_slice(f_z);
        let bn = crate::sparse::norm2(&b);
        let mut x = vec![0.0; 2 * n];
        let mut r = b.clone();
        let mut rn = bn;
        let mut dx = vec![0.0; 2 * n];
        let mut ax = vec![0.0; 2 * n];
        // Iterative refinement against the full system: S̃ loses a few digits
        // to cancellation at extreme anisotropy.
        for _ in 0..=SCHUR_REFINEMENT_STEPS {
            self.eliminate_and_solve(sys, &r, &mut dx)?;
            let mut trial = x.clone();
            axpy(1.0, &dx, &mut trial);
            sys.apply(&trial, &mut ax);
            let mut trial_r = b.clone();
            axpy(-1.0, &ax, &mut trial_r);
            let trial_rn = crate::sparse::norm2(&trial_r);
            if trial_rn >= rn {
                break;
            }
            (x, r, rn) = (trial, trial_r, trial_rn);
            if rn <= f64::EPSILON * bn {
                break;
            }
        }
        let zeta = x.split_off(n);
        let t = x;
        Ok(BlockSolution {
            t,
            zeta,
            stats: SolveStats {
                converged: true,
                abs_residual: rn,
                rel_residual: if bn > 0.0 { rn / bn } else { 0.0 },
                ..SolveStats::default()
            },
            ..BlockSolution::default()
        })
    }
}

/// Steady purely anisotropic system (`A_TT = 0`): two successive transport
/// solves, `√κ_Δ G_bᵀ ζ = F_T` then `−√κ_Δ G_b T = F_ζ − A_ζζ ζ`.
pub fn solve_steady_aniso(
    sys: &SystemMatrices,
    f_t: &[f64],
    f_z: &[f64],
    solve_zt: &mut dyn LinearSolve,
    solve_tz: &mut dyn LinearSolve,
) -> Result<BlockSolution> {
    check_rhs(sys, f_t, f_z)?;
    if sys.a_tt.max_abs() != 0.0 {
        return Err(Error::InvalidInput(
            "the decoupled solve needs A_TT = 0 (kappa_perp = 0, steady)".into(),
        ));
    }
    let n = sys.ndofs();
    let mut zeta = vec![0.0; n];
    let s2 = solve_tz.solve(f_t, &mut zeta)?;
    let mut rhs = f_z.to_vec();
    sys.a_zz.matvec_add(-1.0, &zeta, &mut rhs);
    let mut t = vec![0.0; n];
    let s1 = solve_zt.solve(&rhs, &mut t)?;
    let mut stats = SolveStats {
        converged: s1.converged && s2.converged,
        ..SolveStats::default()
    };
    stats.inner_iterations = vec![s2.iterations, s1.iterations];
    let mut r = stack2(f_t, f_z);
    let mut ax = vec![0.0; 2 * n];
    sys.apply(&stack2(&t, &zeta), &mut ax);
    axpy(-1.0, &ax, &mut r);
    stats.abs_residual = crate::sparse::norm2(&r);
    let bn = crate::sparse::norm2(f_t).hypot(crate::sparse::norm2(f_z));
    stats.rel_residual = if bn > 0.0 { stats.abs_residual / bn } else { 0.0 };
    Ok(BlockSolution {
        t,
        zeta,
        stats,
        inner_first: vec![s1.iterations],
        inner_second: vec![s2.iterations],
        diagnostic: None,
    })
}

fn stack2(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

/// Components of the (2,2) Schur complement action of the swapped system.
#[derive(Debug, Clone)]
pub struct SchurAction {
    /// `√κ_Δ G_bᵀ x + S_M x + S_L x`.
    pub full: Vec<f64>,
    /// `S_M x = (M + κ̃_BC M_BC,h)/Δt (√κ_Δ G_b)⁻¹ M x`.
    pub mass: Vec<f64>,
    /// `S_L x = κ_⊥ L (√κ_Δ G_b)⁻¹ M x`.
    pub laplacian: Vec<f64>,
}

/// Settings of [`apply_schur_action`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurParams {
    pub sqrt_kappa_delta: f64,
    pub kappa_perp: f64,
    /// Time step in the mass term; `None` drops it.
    pub dt: Option<f64>,
    /// Boundary penalty `κ̃_BC`; zero drops the boundary mass.
    pub kappa_bc: f64,
}

/// Matrix-free `S₂₂ x` with its mass and Laplacian parts. `transport`
/// solves with `√κ_Δ G_b`.
pub fn apply_schur_action(
    ops: &AssembledOperators,
    p: &SchurParams,
    transport: &mut dyn LinearSolve,
    x: &[f64],
) -> Result<SchurAction> {
    let n = ops.m.nrows();
    let mut mx = vec![0.0; n];
    ops.m.matvec(x, &mut mx);
    let mut y = vec![0.0; n];
    transport.solve(&mx, &mut y)?;
    let mut mass = vec![0.0; n];
    if let Some(dt) = p.dt {
        ops.m.matvec_add(1.0 / dt, &y, &mut mass);
        if p.kappa_bc != 0.0 {
            ops.m_bc_he.matvec_add(p.kappa_bc / dt, &y, &mut mass);
        }
    }
    let mut laplacian = vec![0.0; n];
    if p.kappa_perp != 0.0 {
        ops.l.matvec_add(p.kappa_perp, &y, &mut laplacian);
    }
    let mut full = vec![0.0; n];
    ops.g_b.matvec_transpose_add(p.sqrt_kappa_delta, x, &mut full);
    axpy(1.0, &mass, &mut full);
    axpy(1.0, &laplacian, &mut full);
    Ok(SchurAction { full, mass, laplacian })
}

/// Solver for `α B` given a solver for `B`.
#[derive(Debug)]
pub struct Scaled<S> {
    pub inner: S,
    pub alpha: f64,
}

impl<S: LinearSolve> LinearSolve for Scaled<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn solve(&mut self, b: &[f64], x: &mut [f64]) -> Result<SolveStats> {
        x.iter_mut().for_each(|v| *v *= self.alpha);
        let st = self.inner.solve(b, x)?;
        x.iter_mut().for_each(|v| *v /= self.alpha);
        Ok(st)
    }
}

/// Boxed solver, for strategies chosen at run time.
pub type BoxedMixedSolver<'a> = Box<dyn MixedSolver + 'a>;
