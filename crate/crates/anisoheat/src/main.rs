//! `anisoheat <subcommand> --config <file> [--out <dir>]`
//!
//! Exit codes: 0 success, 1 config or IO error, 2 solver non-convergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anisoheat::config::{ExperimentConfig, Subcommand};
use anisoheat::io::{write_csv, write_field_csv, write_matrix_market, Manifest, OutputDir};
use anisoheat::studies::{
    export_matrices, matrix_info, run_convergence, run_eigs, run_solver_study, run_steady_aniso, RunError,
};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Convergence,
    SolverStudy,
    Eigs,
    SteadyAniso,
    ExportMatrices,
}

impl From<Cmd> for Subcommand {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Convergence => Subcommand::Convergence,
            Cmd::SolverStudy => Subcommand::SolverStudy,
            Cmd::Eigs => Subcommand::Eigs,
            Cmd::SteadyAniso => Subcommand::SteadyAniso,
            Cmd::ExportMatrices => Subcommand::ExportMatrices,
        }
    }
}

/// Mixed upwind DG for anisotropic heat flux: studies and matrix export.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Cmd,
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let cmd: Subcommand = cli.subcommand.into();
    let mut cfg = ExperimentConfig::load(&cli.config)?.resolve(cmd)?;
    if let Some(out) = &cli.out {
        cfg.output.dir = out.display().to_string();
    }
    let mut out = OutputDir::create(Path::new(&cfg.output.dir))?;
    let mut manifest = Manifest::new(cmd, &cfg);
    let manifest_path = out.root.join("manifest.toml");
    manifest.write(&manifest_path)?;
    let mut log = |s: &str| eprintln!("{s}");
    let result = dispatch(cmd, &cfg, &mut out, &mut log);
    manifest.status = match &result {
        Ok(()) => "ok".into(),
        Err(e) => format!("failed: {e}"),
    };
    manifest.outputs = out.files.clone();
    manifest.write(&manifest_path)?;
    result
}

fn dispatch(cmd: Subcommand, cfg: &ExperimentConfig, out: &mut OutputDir, log: &mut dyn FnMut(&str)) -> Result<(), RunError> {
    match cmd {
        Subcommand::Convergence => {
            let r = run_convergence(cfg, log)?;
            write_csv(&out.file("convergence_errors.csv"), &r.errors)?;
            write_csv(&out.file("convergence_orders.csv"), &r.orders)?;
            write_csv(&out.file("steps.csv"), &r.steps)?;
        }
        Subcommand::SolverStudy => {
            let r = run_solver_study(cfg, log)?;
            write_csv(&out.file("solver_study.csv"), &r.rows)?;
            write_csv(&out.file("steps.csv"), &r.steps)?;
        }
        Subcommand::Eigs => {
            let rows = run_eigs(cfg, log)?;
            write_csv(&out.file("eigs.csv"), &rows)?;
        }
        Subcommand::SteadyAniso => {
            let r = run_steady_aniso(cfg, log)?;
            write_csv(&out.file("steady.csv"), std::slice::from_ref(&r.row))?;
            write_field_csv(&out.file("steady_t.csv"), &r.t)?;
            write_field_csv(&out.file("steady_zeta.csv"), &r.zeta)?;
        }
        Subcommand::ExportMatrices => {
            let (mats, t0) = export_matrices(cfg)?;
            let mut infos = Vec::new();
            for (name, desc, a) in &mats {
                let file = format!("{name}.mtx");
                write_matrix_market(&out.file(&file), a)?;
                infos.push(matrix_info(&file, desc, a));
            }
            write_csv(&out.file("matrices.csv"), &infos)?;
            write_field_csv(&out.file("t0.csv"), &t0)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
