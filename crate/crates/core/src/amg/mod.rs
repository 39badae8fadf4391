//! Algebraic multigrid on block matrices: AIR (approximate ideal
//! restriction) for upwind transport blocks and classical Ruge–Stüben AMG
//! for symmetric positive definite operators.
//!
//! AIR levels use RS coarsening on the θ_C strength graph, one-point
//! interpolation, distance-one block AIR restriction on the θ_R strength
//! graph and FFC block Jacobi post-relaxation without pre-relaxation.
//! Classical levels use direct interpolation, `R = Pᵀ` and a symmetric block
//! Gauss–Seidel V(1,1) cycle.

mod coarsen;
mod interp;
mod relax;
mod strength;

use alloc::vec;
use alloc::vec::Vec;

pub use coarsen::{coarse_indices, rs_coarsen, CfPoint};
pub use interp::{direct_interp, lair_restriction, one_point_interp};
pub use relax::{block_gauss_seidel, block_jacobi_sweep, ffc_block_jacobi, point_sets};
pub use strength::{condense_for_strength, strength, transpose_pattern, StrengthGraph};

use crate::dense::DenseLu;
use crate::krylov::Preconditioner;
use crate::sparse::{BlockCsrMatrix, BlockDiagonal};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmgVariant {
    Air,
    Classical,
}

/// Strength-of-connection tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocParams {
    /// Coarsening tolerance θ_C.
    pub theta_c: f64,
    /// Restriction tolerance θ_R (AIR only).
    pub theta_r: f64,
}

impl Default for SocParams {
    fn default() -> Self {
        SocParams {
            theta_c: 0.01,
            theta_r: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmgParams {
    pub variant: AmgVariant,
    pub soc: SocParams,
    /// Largest coarsest level in block rows.
    pub max_coarse: usize,
    pub max_levels: usize,
    pub second_pass: bool,
    pub seed: u64,
}

impl AmgParams {
    /// AIR with θ_C = 0.01, θ_R = 0.25.
    pub fn air() -> Self {
        AmgParams {
            variant: AmgVariant::Air,
            soc: SocParams::default(),
            max_coarse: 64,
            max_levels: 30,
            second_pass: true,
            seed: 0,
        }
    }

    /// Classical RS AMG with θ = 0.25.
    pub fn classical() -> Self {
        AmgParams {
            variant: AmgVariant::Classical,
            soc: SocParams {
                theta_c: 0.25,
                theta_r: 0.25,
            },
            max_coarse: 64,
            max_levels: 30,
            second_pass: true,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("theta_c", self.soc.theta_c), ("theta_r", self.soc.theta_r)] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidInput(alloc::format!("{name} = {t} is outside (0, 1]")));
            }
        }
        if self.max_coarse == 0 || self.max_levels == 0 {
            return Err(Error::InvalidInput("max_coarse and max_levels must be positive".into()));
        }
        Ok(())
    }
}

/// One non-coarsest level.
#[derive(Debug, Clone)]
pub struct Level {
    pub a: BlockCsrMatrix,
    pub split: Vec<CfPoint>,
    pub p: BlockCsrMatrix,
    pub r: BlockCsrMatrix,
    pub dinv: BlockDiagonal,
    f_points: Vec<usize>,
    c_points: Vec<usize>,
}

/// Solver on the coarsest level: dense LU when small enough, otherwise
/// relaxation sweeps (only reached when coarsening stalls).
#[derive(Debug, Clone)]
enum CoarseSolver {
    Lu(DenseLu),
    Relax { dinv: BlockDiagonal, sweeps: usize },
}

/// Largest coarsest level, in scalar unknowns, factored by dense LU.
const MAX_DENSE_COARSE: usize = 6000;

#[derive(Debug, Clone)]
pub struct AmgHierarchy {
    pub levels: Vec<Level>,
    pub coarsest: BlockCsrMatrix,
    coarse_solver: CoarseSolver,
    pub params: AmgParams,
    /// AIR rows whose local solve failed and fell back to injection.
    pub restriction_fallbacks: usize,
}

/// Sizes of one level for the hierarchy summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelSummary {
    pub level: usize,
    pub block_rows: usize,
    pub block_size: usize,
    pub nnz_blocks: usize,
    pub coarse_points: usize,
}

impl AmgHierarchy {
    /// Builds the hierarchy for `a`, which must be square with invertible
    /// diagonal blocks on every level that is relaxed.
    pub fn build(a: BlockCsrMatrix, params: &AmgParams) -> Result<Self> {
        params.validate()?;
        if a.nbrows != a.nbcols {
            return Err(Error::InvalidInput("AMG needs a square matrix".into()));
        }
        let mut levels = Vec::new();
        let mut fallbacks = 0;
        let mut cur = a;
        while levels.len() + 1 < params.max_levels && cur.nbrows > params.max_coarse {
            let signed = params.variant == AmgVariant::Classical;
            let g = condense_for_strength(&cur, signed);
            let s = strength(&g, params.soc.theta_c)?;
            let seed = params.seed.wrapping_add(levels.len() as u64);
            let split = rs_coarsen(&s, params.second_pass, seed);
            let (_, nc) = coarse_indices(&split);
            if nc == 0 || nc >= cur.nbrows {
                break;
            }
            let (p, r) = match params.variant {
                AmgVariant::Air => {
                    let p = one_point_interp(&split, &s, cur.bs)?;
                    let s_r = strength(&g, params.soc.theta_r)?;
                    let (r, nfb) = lair_restriction(&cur, &split, &s_r)?;
                    fallbacks += nfb;
                    (p, r)
                }
                AmgVariant::Classical => {
                    let p = direct_interp(&cur, &split, &s)?;
                    let r = p.transpose();
                    (p, r)
                }
            };
            let coarse = galerkin_product(&r, &cur, &p)?;
            let dinv = cur.block_diag_inverse()?;
            let (f_points, c_points) = point_sets(&split);
            levels.push(Level {
                a: cur,
                split,
                p,
                r,
                dinv,
                f_points,
                c_points,
            });
            cur = coarse;
        }
        let coarse_solver = if cur.nrows() <= MAX_DENSE_COARSE {
            CoarseSolver::Lu(DenseLu::new(cur.to_dense())?)
        } else {
            CoarseSolver::Relax {
                dinv: cur.block_diag_inverse()?,
                sweeps: 10,
            }
        };
        Ok(AmgHierarchy {
            levels,
            coarsest: cur,
            coarse_solver,
            params: *params,
            restriction_fallbacks: fallbacks,
        })
    }

    /// Finest-level operator.
    pub fn matrix(&self) -> &BlockCsrMatrix {
        self.levels.first().map_or(&self.coarsest, |l| &l.a)
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn level_matrix(&self, l: usize) -> &BlockCsrMatrix {
        if l < self.levels.len() {
            &self.levels[l].a
        } else {
            &self.coarsest
        }
    }

    /// Sum of stored blocks over all levels divided by that of the finest.
    pub fn operator_complexity(&self) -> f64 {
        let total: usize = (0..self.n_levels()).map(|l| self.level_matrix(l).n_blocks()).sum();
        total as f64 / self.matrix().n_blocks().max(1) as f64
    }

    pub fn summary(&self) -> Vec<LevelSummary> {
        (0..self.n_levels())
            .map(|l| {
                let a = self.level_matrix(l);
                LevelSummary {
                    level: l,
                    block_rows: a.nbrows,
                    block_size: a.bs,
                    nnz_blocks: a.n_blocks(),
                    coarse_points: self.levels.get(l).map_or(0, |lv| lv.c_points.len()),
                }
            })
            .collect()
    }

    /// One V-cycle on `A x = b` starting from `x`.
    pub fn vcycle(&self, b: &[f64], x: &mut [f64]) {
        self.cycle(0, b, x);
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        if l == self.levels.len() {
            match &self.coarse_solver {
                CoarseSolver::Lu(lu) => {
                    let mut r = b.to_vec();
                    self.coarsest.matvec_add(-1.0, x, &mut r);
                    for (xi, d) in x.iter_mut().zip(lu.solve(&r)) {
                        *xi += d;
                    }
                }
                CoarseSolver::Relax { dinv, sweeps } => {
                    for _ in 0..*sweeps {
                        block_gauss_seidel(&self.coarsest, dinv, x, b, true);
                        block_gauss_seidel(&self.coarsest, dinv, x, b, false);
                    }
                }
            }
            return;
        }
        let lv = &self.levels[l];
        let classical = self.params.variant == AmgVariant::Classical;
        if classical {
            block_gauss_seidel(&lv.a, &lv.dinv, x, b, true);
        }
        let mut r = b.to_vec();
        lv.a.matvec_add(-1.0, x, &mut r);
        let mut bc = vec![0.0; lv.r.nrows()];
        lv.r.matvec(&r, &mut bc);
        let mut xc = vec![0.0; bc.len()];
        self.cycle(l + 1, &bc, &mut xc);
        lv.p.matvec_add(1.0, &xc, x);
        if classical {
            block_gauss_seidel(&lv.a, &lv.dinv, x, b, false);
        } else {
            relax::block_jacobi_sweep(&lv.a, &lv.dinv, &lv.f_points, x, b);
            relax::block_jacobi_sweep(&lv.a, &lv.dinv, &lv.f_points, x, b);
            relax::block_jacobi_sweep(&lv.a, &lv.dinv, &lv.c_points, x, b);
        }
    }
}

/// `R A P`, evaluated as `R (A P)`.
pub fn galerkin_product(r: &BlockCsrMatrix, a: &BlockCsrMatrix, p: &BlockCsrMatrix) -> Result<BlockCsrMatrix> {
    r.spgemm(&a.spgemm(p)?)
}

impl Preconditioner for AmgHierarchy {
    /// One V-cycle from a zero initial guess.
    fn apply(&mut self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.fill(0.0);
        self.vcycle(r, z);
        Ok(())
    }
}

impl Preconditioner for &AmgHierarchy {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.fill(0.0);
        self.vcycle(r, z);
        Ok(())
    }
}
