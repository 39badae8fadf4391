//! Benchmark problems: the closed-field-line steady test used for the
//! convergence study and the open-field-line test used for solver studies.

use alloc::boxed::Box;
use alloc::sync::Arc;
use core::f64::consts::PI;

use num_traits::Float;

use crate::assembly::ProblemConfig;
use crate::mesh::{build_base_mesh, extrude, extrude_planar, refine, PrismMesh};
use crate::space::MagneticField;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// `T0 = sin(πx/L)sin(πy/L)`, zero boundary data, field lines closed.
    ClosedField,
    /// `T0 = 1 + (1 − cos(2πy/L))sin(πx/L)/20 + x + y/10`, field lines open.
    OpenField,
}

/// Field aligned with the contours of `T0` in the base plane,
/// `B = (−∂_y T0, ∂_x T0, B_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem {
    pub kind: ProblemKind,
    pub lx: f64,
    pub bz: f64,
}

impl Problem {
    /// Closed field lines with `B_z = 5`.
    pub fn closed_field(lx: f64) -> Self {
        Problem {
            kind: ProblemKind::ClosedField,
            lx,
            bz: 5.0,
        }
    }

    /// Open field lines with `B_z = 15/2`.
    pub fn open_field(lx: f64) -> Self {
        Problem {
            kind: ProblemKind::OpenField,
            lx,
            bz: 7.5,
        }
    }

    /// Same problem with a planar field (`B_z = 0`) for 2D meshes.
    pub fn planar(self) -> Self {
        Problem { bz: 0.0, ..self }
    }

    pub fn t0(&self, x: &[f64; 3]) -> f64 {
        let (a, b) = (PI * x[0] / self.lx, PI * x[1] / self.lx);
        match self.kind {
            ProblemKind::ClosedField => Float::sin(a) * Float::sin(b),
            ProblemKind::OpenField => {
                1.0 + (1.0 - Float::cos(2.0 * b)) * Float::sin(a) / 20.0 + x[0] + x[1] / 10.0
            }
        }
    }

    pub fn grad_t0(&self, x: &[f64; 3]) -> [f64; 3] {
        let k = PI / self.lx;
        let (a, b) = (k * x[0], k * x[1]);
        match self.kind {
            ProblemKind::ClosedField => [
                k * Float::cos(a) * Float::sin(b),
                k * Float::sin(a) * Float::cos(b),
                0.0,
            ],
            ProblemKind::OpenField => [
                k * (1.0 - Float::cos(2.0 * b)) * Float::cos(a) / 20.0 + 1.0,
                2.0 * k * Float::sin(2.0 * b) * Float::sin(a) / 20.0 + 0.1,
                0.0,
            ],
        }
    }

    /// `−ΔT0`.
    pub fn neg_laplacian_t0(&self, x: &[f64; 3]) -> f64 {
        let k = PI / self.lx;
        let (a, b) = (k * x[0], k * x[1]);
        match self.kind {
            ProblemKind::ClosedField => 2.0 * k * k * Float::sin(a) * Float::sin(b),
            ProblemKind::OpenField => {
                let s = Float::sin(a);
                let c2 = Float::cos(2.0 * b);
                (k * k * (1.0 - c2) * s - 4.0 * k * k * c2 * s) / 20.0
            }
        }
    }

    pub fn b_field(&self, x: &[f64; 3]) -> [f64; 3] {
        let g = self.grad_t0(x);
        [-g[1], g[0], self.bz]
    }

    pub fn field(&self) -> Arc<dyn MagneticField> {
        let p = *self;
        Arc::new(move |x: &[f64; 3]| p.b_field(x))
    }

    /// `√κ_Δ b·∇T0`, the initial inflow flux before projection.
    pub fn zeta0(&self, x: &[f64; 3], kappa_delta: f64) -> f64 {
        let b = self.b_field(x);
        let g = self.grad_t0(x);
        let nb = Float::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
        Float::sqrt(kappa_delta) * (b[0] * g[0] + b[1] * g[1] + b[2] * g[2]) / nb
    }

    /// Dirichlet configuration: the closed-field problem carries the
    /// counter-forcing `S = −κ_⊥ΔT0` and zero boundary data; the open-field
    /// problem has `S = 0` and `T_BC = T0`.
    pub fn config(&self, kappa_par: f64, kappa_perp: f64, dt: f64) -> ProblemConfig {
        let mut cfg = ProblemConfig::new(kappa_par, kappa_perp, dt);
        let p = *self;
        match self.kind {
            ProblemKind::ClosedField => {
                cfg.forcing = Some(Box::new(move |x, _| kappa_perp * p.neg_laplacian_t0(x)));
                cfg.t_bc = Some(Box::new(|_, _| 0.0));
            }
            ProblemKind::OpenField => {
                cfg.t_bc = Some(Box::new(move |x, _| p.t0(x)));
            }
        }
        cfg
    }
}

/// Mesh parameters shared by the studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    pub n: usize,
    pub lx: f64,
    pub lz: f64,
    pub layers: usize,
    pub periodic_z: bool,
    pub perturb: f64,
    pub seed: u64,
    pub refinements: usize,
    /// Single-layer 2D mesh; `lz`, `layers` and `periodic_z` are ignored.
    pub planar: bool,
}

impl MeshSpec {
    /// `n = 7`, unit square, `L_z = 5`, 2 periodic layers, 6% perturbation.
    pub fn standard(seed: u64) -> Self {
        MeshSpec {
            n: 7,
            lx: 1.0,
            lz: 5.0,
            layers: 2,
            periodic_z: true,
            perturb: 0.06,
            seed,
            refinements: 0,
            planar: false,
        }
    }

    pub fn build(&self) -> Result<PrismMesh> {
        let mut base = build_base_mesh(self.n, self.lx, self.perturb, self.seed)?;
        for _ in 0..self.refinements {
            base = refine(&base);
        }
        if self.planar {
            Ok(extrude_planar(&base))
        } else {
            extrude(&base, self.layers, self.lz, self.periodic_z)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(p: &Problem, x: [f64; 3]) -> [f64; 3] {
        let h = 1e-6;
        let mut g = [0.0; 3];
        for k in 0..3 {
            let (mut a, mut b) = (x, x);
            a[k] += h;
            b[k] -= h;
            g[k] = (p.t0(&a) - p.t0(&b)) / (2.0 * h);
        }
        g
    }

    fn fd_neg_laplacian(p: &Problem, x: [f64; 3]) -> f64 {
        let h = 1e-4;
        let mut s = 0.0;
        for k in 0..2 {
            let (mut a, mut b) = (x, x);
            a[k] += h;
            b[k] -= h;
            s += (p.t0(&a) - 2.0 * p.t0(&x) + p.t0(&b)) / (h * h);
        }
        -s
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for p in [Problem::closed_field(1.0), Problem::open_field(1.3)] {
            for x in [[0.13, 0.71, 0.2], [0.5, 0.25, 1.0], [0.91, 0.07, 3.0]] {
                let g = p.grad_t0(&x);
                let fd = fd_grad(&p, x);
                for k in 0..3 {
                    assert!((g[k] - fd[k]).abs() < 1e-7, "{:?} {k}", p.kind);
                }
                assert!((p.neg_laplacian_t0(&x) - fd_neg_laplacian(&p, x)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn fields_follow_contours_of_t0() {
        for p in [Problem::closed_field(1.0), Problem::open_field(1.0)] {
            let x = [0.3, 0.6, 0.0];
            let b = p.b_field(&x);
            let g = p.grad_t0(&x);
            assert!((b[0] * g[0] + b[1] * g[1]).abs() < 1e-14);
            assert!(p.zeta0(&x, 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_field_is_tangential_on_side_walls() {
        let p = Problem::closed_field(1.0);
        for s in [0.1, 0.4, 0.8] {
            assert!(p.b_field(&[0.0, s, 0.0])[0].abs() < 1e-15);
            assert!(p.b_field(&[s, 1.0, 0.0])[1].abs() < 1e-15);
        }
    }

    #[test]
    fn open_field_crosses_side_walls() {
        let p = Problem::open_field(1.0);
        assert!(p.b_field(&[0.0, 0.5, 0.0])[0] < 0.0);
        assert!(p.b_field(&[0.5, 0.0, 0.0])[1] > 0.0);
    }

    #[test]
    fn forcing_counters_perpendicular_diffusion() {
        let p = Problem::closed_field(1.0);
        let cfg = p.config(1e3, 1.0, 1e-3);
        let x = [0.2, 0.3, 0.0];
        let s = cfg.forcing.as_ref().unwrap()(&x, 0.0);
        assert!((s - 2.0 * PI * PI * p.t0(&x)).abs() < 1e-12);
    }

    #[test]
    fn mesh_spec_sizes() {
        let mut spec = MeshSpec::standard(0);
        assert_eq!(spec.build().unwrap().n_cells(), 196);
        spec.refinements = 1;
        spec.layers = 4;
        assert_eq!(spec.build().unwrap().n_cells(), 1568);
        spec.planar = true;
        assert_eq!(spec.build().unwrap().n_cells(), 392);
    }
}
