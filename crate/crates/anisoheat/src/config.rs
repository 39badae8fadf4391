//! TOML experiment configuration.
//!
//! Every section and key is optional. Keys left out are filled with
//! subcommand-specific defaults by [`ExperimentConfig::resolve`]; the resolved
//! config is what the manifest records. Unknown keys are rejected.

use std::path::Path;

use anisoheat_core::amg::AmgParams;
use anisoheat_core::assembly::BoundaryKind;
use anisoheat_core::blocksolve::StrategyParams;
use anisoheat_core::krylov::{KrylovParams, Tolerance};
use anisoheat_core::problems::{MeshSpec, Problem};
use serde::{Deserialize, Serialize};

/// Configuration errors (exit code 1).
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Convergence,
    SolverStudy,
    Eigs,
    SteadyAniso,
    ExportMatrices,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Convergence => "convergence",
            Subcommand::SolverStudy => "solver-study",
            Subcommand::Eigs => "eigs",
            Subcommand::SteadyAniso => "steady-aniso",
            Subcommand::ExportMatrices => "export-matrices",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// Closed field lines with the counter-forcing, exact solution `T0`.
    Closed,
    /// Open field lines, `S = 0`, `T_BC = T0`.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    MixedDg,
    PrimalDg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Air,
    SchurClassical,
    /// Sparse direct solve: Cholesky of the Schur complement for the mixed
    /// scheme, Cholesky (LU as fallback) for the primal scheme, LU for the
    /// transport operators of the eigenvalue study.
    Direct,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Air => "air",
            Strategy::SchurClassical => "schur-classical",
            Strategy::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

impl From<BcKind> for BoundaryKind {
    fn from(b: BcKind) -> Self {
        match b {
            BcKind::Dirichlet => BoundaryKind::Dirichlet,
            BcKind::Neumann => BoundaryKind::Neumann,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    /// Base cells per side.
    pub n: usize,
    pub lx: f64,
    pub lz: f64,
    /// Extruded layers at refinement 0.
    pub layers: usize,
    pub periodic_z: bool,
    /// Vertex perturbation as a fraction of the base spacing.
    pub perturb: f64,
    pub seed: u64,
    /// Refinement used by single-mesh subcommands.
    pub refinements: usize,
    /// 2D mesh with a planar field.
    pub planar: bool,
    /// Double the layers with every refinement; on by default for the solver
    /// study only.
    pub refine_layers: Option<bool>,
    /// Polynomial degree.
    pub order: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        let s = MeshSpec::standard(1);
        MeshConfig {
            n: s.n,
            lx: s.lx,
            lz: s.lz,
            layers: s.layers,
            periodic_z: s.periodic_z,
            perturb: s.perturb,
            seed: s.seed,
            refinements: 0,
            planar: false,
            refine_layers: None,
            order: 2,
        }
    }
}

impl MeshConfig {
    /// Mesh at `refinement`.
    pub fn spec(&self, refinement: usize) -> MeshSpec {
        MeshSpec {
            n: self.n,
            lx: self.lx,
            lz: self.lz,
            layers: if self.refine_layers == Some(true) { self.layers << refinement } else { self.layers },
            periodic_z: self.periodic_z,
            perturb: self.perturb,
            seed: self.seed,
            refinements: refinement,
            planar: self.planar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub field: Option<FieldKind>,
    pub kappa_par: f64,
    pub kappa_perp: f64,
    pub dt: f64,
    pub n_steps: Option<usize>,
    pub bc_kind: BcKind,
    /// `κ̃_BC` of the boundary penalty.
    pub kappa_bc: f64,
    /// Interior penalty of `L`.
    pub kappa_p: f64,
    /// Interior penalty of the primal anisotropic form.
    pub kappa_p_aniso: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            field: None,
            kappa_par: 1e3,
            kappa_perp: 1.0,
            dt: 1e-3,
            n_steps: None,
            bc_kind: BcKind::Dirichlet,
            kappa_bc: 20.0,
            kappa_p: 2.0,
            kappa_p_aniso: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub strategy: Option<Strategy>,
    pub outer_tol: f64,
    pub max_outer: usize,
    /// Outer FGMRES restart length; 0 keeps the full basis.
    pub outer_restart: usize,
    /// Inner relative tolerance; the inner solves also require an absolute
    /// residual of `inner_abs_tol`. Defaults to 1e-3, or 1e-12 for
    /// steady-aniso, whose exactness check needs tight transport solves.
    pub inner_tol: Option<f64>,
    pub inner_abs_tol: f64,
    pub max_inner: usize,
    /// Stop a transient run once its average step time exceeds this many
    /// seconds.
    pub time_cap_s: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            strategy: None,
            outer_tol: 1e-8,
            max_outer: 10_000,
            outer_restart: 100,
            inner_tol: None,
            inner_abs_tol: 1e-3,
            max_inner: 2000,
            time_cap_s: Some(1500.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AmgConfig {
    /// Coarsening strength threshold; defaults to 0.01 (AIR) or 0.25
    /// (classical).
    pub theta_c: Option<f64>,
    /// Restriction strength threshold of AIR.
    pub theta_r: Option<f64>,
    pub max_coarse: Option<usize>,
    pub seed: u64,
}

impl AmgConfig {
    pub fn apply(&self, mut p: AmgParams) -> AmgParams {
        if let Some(t) = self.theta_c {
            p.soc.theta_c = t;
        }
        if let Some(t) = self.theta_r {
            p.soc.theta_r = t;
        }
        if let Some(m) = self.max_coarse {
            p.max_coarse = m;
        }
        p.seed = self.seed;
        p
    }
}

/// Sweeps of the study subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub refinements: Option<Vec<usize>>,
    pub ratios: Option<Vec<f64>>,
    pub schemes: Option<Vec<Scheme>>,
    pub strategies: Option<Vec<Strategy>>,
    /// Time steps of the eigenvalue study.
    pub dts: Option<Vec<f64>>,
    pub lanczos_tol: Option<f64>,
    pub lanczos_max_iter: Option<usize>,
    pub lanczos_seed: Option<u64>,
    /// Tolerance of the transport solves inside the eigenvalue operators.
    pub eig_inner_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mesh: MeshConfig,
    pub physics: PhysicsConfig,
    pub scheme: Option<Scheme>,
    pub solver: SolverConfig,
    pub amg: AmgConfig,
    pub study: StudyConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fills subcommand defaults and validates.
    pub fn resolve(mut self, cmd: Subcommand) -> Result<Self, ConfigError> {
        let (field, steps, ratios, refinements) = match cmd {
            Subcommand::Convergence => (FieldKind::Closed, 100, vec![1e3, 1e6, 1e9], vec![0, 1]),
            Subcommand::SolverStudy => (
                FieldKind::Open,
                5,
                vec![1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10],
                vec![0, 1],
            ),
            Subcommand::Eigs => (FieldKind::Open, 0, vec![1e3, 1e6, 1e9], vec![0, 1, 2]),
            Subcommand::SteadyAniso | Subcommand::ExportMatrices => (FieldKind::Open, 0, vec![], vec![]),
        };
        let p = &mut self.physics;
        p.field.get_or_insert(field);
        p.n_steps.get_or_insert(steps);
        let st = &mut self.study;
        if matches!(cmd, Subcommand::Convergence | Subcommand::SolverStudy | Subcommand::Eigs) {
            st.ratios.get_or_insert(ratios);
            st.refinements.get_or_insert(refinements);
        }
        match cmd {
            Subcommand::Convergence => {
                st.schemes.get_or_insert(vec![Scheme::MixedDg, Scheme::PrimalDg]);
                self.solver.strategy.get_or_insert(Strategy::Direct);
            }
            Subcommand::SolverStudy => {
                st.strategies.get_or_insert(vec![Strategy::Air, Strategy::SchurClassical]);
            }
            Subcommand::Eigs => {
                st.dts.get_or_insert(vec![1e-3, 1e-2]);
                st.lanczos_tol.get_or_insert(1e-6);
                st.lanczos_max_iter.get_or_insert(300);
                st.lanczos_seed.get_or_insert(7);
                st.eig_inner_tol.get_or_insert(1e-10);
                self.solver.strategy.get_or_insert(Strategy::Air);
            }
            Subcommand::SteadyAniso => {
                self.solver.strategy.get_or_insert(Strategy::Air);
            }
            Subcommand::ExportMatrices => {}
        }
        self.mesh.refine_layers.get_or_insert(cmd == Subcommand::SolverStudy);
        self.solver
            .inner_tol
            .get_or_insert(if cmd == Subcommand::SteadyAniso { 1e-12 } else { 1e-3 });
        self.scheme.get_or_insert(Scheme::MixedDg);
        self.validate(cmd)?;
        Ok(self)
    }

    fn validate(&self, cmd: Subcommand) -> Result<(), ConfigError> {
        let m = &self.mesh;
        if m.n == 0 || m.layers == 0 || !(m.lx > 0.0) || !(m.lz > 0.0) {
            return Err(invalid("mesh.n, mesh.layers, mesh.lx and mesh.lz must be positive"));
        }
        if !(0.0..0.5).contains(&m.perturb) {
            return Err(invalid("mesh.perturb must lie in [0, 0.5)"));
        }
        if !(1..=3).contains(&m.order) {
            return Err(invalid("mesh.order must be 1, 2 or 3"));
        }
        let p = &self.physics;
        if !(p.kappa_perp >= 0.0) || !(p.kappa_par >= p.kappa_perp) || !(p.kappa_par > 0.0) {
            return Err(invalid("physics needs kappa_par > 0 and 0 <= kappa_perp <= kappa_par"));
        }
        if !(p.dt > 0.0) || !(p.kappa_bc >= 0.0) || !(p.kappa_p > 0.0) || !(p.kappa_p_aniso > 0.0) {
            return Err(invalid("physics.dt, kappa_p and kappa_p_aniso must be positive, kappa_bc nonnegative"));
        }
        if p.bc_kind == BcKind::Neumann && cmd != Subcommand::ExportMatrices {
            return Err(invalid("physics.bc_kind = \"neumann\" is only supported by export-matrices"));
        }
        let s = &self.solver;
        if !(s.outer_tol > 0.0 && s.outer_tol < 1.0) || !s.inner_tol.is_none_or(|t| t > 0.0 && t < 1.0) || !(s.inner_abs_tol > 0.0) {
            return Err(invalid("solver tolerances must lie in (0, 1)"));
        }
        if s.max_outer == 0 || s.max_inner == 0 {
            return Err(invalid("solver.max_outer and solver.max_inner must be positive"));
        }
        if s.time_cap_s.is_some_and(|t| !(t > 0.0)) {
            return Err(invalid("solver.time_cap_s must be positive"));
        }
        for base in [AmgParams::air(), AmgParams::classical()] {
            self.amg.apply(base).validate().map_err(|e| invalid(format!("amg: {e}")))?;
        }
        let st = &self.study;
        if let Some(r) = &st.ratios {
            if r.is_empty() || r.iter().any(|&x| !(x >= 1.0)) {
                return Err(invalid("study.ratios must be nonempty and >= 1"));
            }
        }
        if st.refinements.as_ref().is_some_and(|r| r.is_empty() || r.iter().any(|&k| k > 4)) {
            return Err(invalid("study.refinements must be nonempty with entries <= 4"));
        }
        if st.dts.as_ref().is_some_and(|d| d.is_empty() || d.iter().any(|&x| !(x > 0.0))) {
            return Err(invalid("study.dts must be nonempty and positive"));
        }
        let field = p.field.unwrap_or(FieldKind::Open);
        match cmd {
            Subcommand::Convergence => {
                if p.n_steps == Some(0) {
                    return Err(invalid("physics.n_steps must be positive"));
                }
                if field != FieldKind::Closed {
                    return Err(invalid("convergence needs physics.field = \"closed\" (exact solution T0)"));
                }
            }
            Subcommand::SolverStudy => {
                if p.n_steps.is_some_and(|n| n < 2) {
                    return Err(invalid("solver-study averages steps 2-5 and needs physics.n_steps >= 2"));
                }
                if st.strategies.as_ref().is_some_and(|s| s.contains(&Strategy::Direct)) {
                    return Err(invalid("solver-study compares iterative strategies; remove \"direct\""));
                }
            }
            Subcommand::Eigs => {
                if p.kappa_perp == 0.0 {
                    return Err(invalid("eigs needs kappa_perp > 0 (ratios are kappa_par/kappa_perp)"));
                }
                if field != FieldKind::Open {
                    return Err(invalid("eigs needs open field lines (invertible transport operator)"));
                }
                if st.lanczos_tol.is_some_and(|t| !(t > 0.0 && t < 1.0)) || st.eig_inner_tol.is_some_and(|t| !(t > 0.0 && t < 1.0)) {
                    return Err(invalid("study.lanczos_tol and study.eig_inner_tol must lie in (0, 1)"));
                }
                if self.solver.strategy == Some(Strategy::SchurClassical) {
                    return Err(invalid("eigs solves with G_b by \"air\" or \"direct\""));
                }
            }
            Subcommand::SteadyAniso => {
                if p.kappa_perp != 0.0 {
                    return Err(invalid("steady-aniso needs physics.kappa_perp = 0"));
                }
                if field != FieldKind::Open {
                    return Err(invalid("steady-aniso needs open field lines"));
                }
                if self.solver.strategy != Some(Strategy::Air) {
                    return Err(invalid("steady-aniso runs the AIR transport solves; set solver.strategy = \"air\""));
                }
            }
            Subcommand::ExportMatrices => {}
        }
        Ok(())
    }

    pub fn problem(&self) -> Problem {
        let p = match self.physics.field.unwrap_or(FieldKind::Open) {
            FieldKind::Closed => Problem::closed_field(self.mesh.lx),
            FieldKind::Open => Problem::open_field(self.mesh.lx),
        };
        if self.mesh.planar {
            p.planar()
        } else {
            p
        }
    }

    /// Strategy parameters for the AIR or Schur arm.
    pub fn strategy_params(&self, strategy: Strategy) -> StrategyParams {
        let s = &self.solver;
        let mut p = match strategy {
            Strategy::SchurClassical => StrategyParams::schur_classical(),
            _ => StrategyParams::air(),
        };
        p.amg = self.amg.apply(p.amg);
        p.outer = KrylovParams {
            tol: Tolerance::Relative(s.outer_tol),
            max_iter: s.max_outer,
            restart: (s.outer_restart > 0).then_some(s.outer_restart),
        };
        p.inner = KrylovParams::new(
            Tolerance::RelativeAndAbsolute {
                rel: s.inner_tol.unwrap_or(1e-3),
                abs: s.inner_abs_tol,
            },
            s.max_inner,
        );
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_per_subcommand() {
        let c = ExperimentConfig::from_toml("").unwrap();
        let conv = c.clone().resolve(Subcommand::Convergence).unwrap();
        assert_eq!(conv.physics.field, Some(FieldKind::Closed));
        assert_eq!(conv.physics.n_steps, Some(100));
        assert_eq!(conv.study.ratios.as_deref(), Some(&[1e3, 1e6, 1e9][..]));
        let ss = c.clone().resolve(Subcommand::SolverStudy).unwrap();
        assert_eq!(ss.mesh.refine_layers, Some(true));
        assert_eq!(ss.physics.n_steps, Some(5));
        let e = c.resolve(Subcommand::Eigs).unwrap();
        assert_eq!(e.study.dts.as_deref(), Some(&[1e-3, 1e-2][..]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("[mesh]\nnn = 3\n").is_err());
        assert!(ExperimentConfig::from_toml("typo = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("[solver]\nstrategy = \"ilu\"\n").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = ExperimentConfig::from_toml("[mesh]\nplanar = true\n[study]\nratios = [1e3]\n")
            .unwrap()
            .resolve(Subcommand::Eigs)
            .unwrap();
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.clone().resolve(Subcommand::Eigs).unwrap(), c);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for (text, cmd) in [
            ("[physics]\nkappa_perp = 1.0\n", Subcommand::SteadyAniso),
            ("[physics]\nfield = \"open\"\n", Subcommand::Convergence),
            ("[physics]\ndt = -1.0\n", Subcommand::Convergence),
            ("[amg]\ntheta_c = 2.0\n", Subcommand::SolverStudy),
            ("[study]\nratios = []\n", Subcommand::Eigs),
            ("[mesh]\norder = 7\n", Subcommand::Eigs),
            ("[study]\nstrategies = [\"direct\"]\n", Subcommand::SolverStudy),
        ] {
            let r = ExperimentConfig::from_toml(text).unwrap().resolve(cmd);
            assert!(matches!(r, Err(ConfigError::Invalid(_))), "{text}");
        }
    }

    #[test]
    fn layers_double_with_refinement_when_requested() {
        let mut m = MeshConfig::default();
        assert_eq!(m.spec(2).layers, 2);
        m.refine_layers = Some(true);
        assert_eq!(m.spec(2).layers, 8);
    }
}
