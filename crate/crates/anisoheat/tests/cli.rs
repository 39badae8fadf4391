//! End-to-end runs of the `anisoheat` binary: exit codes, manifest and
//! output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use anisoheat::config::{ExperimentConfig, Subcommand};
use anisoheat::io::{read_field_csv, read_matrix_market, Manifest};
use anisoheat::studies::export_matrices;

fn workdir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("anisoheat-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(sub: &str, dir: &Path, config: &str) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_anisoheat"))
        .args([sub, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn config_errors_exit_with_1() {
    let d = workdir("config-errors");
    for (name, text) in [
        ("unknown key", "[mesh]\nsize = 3\n"),
        ("unknown section", "[meshes]\nn = 3\n"),
        ("bad value", "[physics]\ndt = -1.0\n"),
        ("syntax", "[mesh\n"),
        ("closed field for steady", "[physics]\nfield = \"closed\"\nkappa_perp = 0.0\n"),
    ] {
        let sub = if name == "closed field for steady" { "steady-aniso" } else { "convergence" };
        let o = run(sub, &d, text);
        assert_eq!(code(&o), 1, "{name}: {}", stderr(&o));
        assert!(stderr(&o).contains("invalid config"), "{name}: {}", stderr(&o));
    }
    let o = Command::new(env!("CARGO_BIN_EXE_anisoheat"))
        .args(["eigs", "--config", "/nonexistent/anisoheat.toml"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn argument_errors_exit_with_1_and_help_with_0() {
    let bin = env!("CARGO_BIN_EXE_anisoheat");
    assert_eq!(code(&Command::new(bin).arg("bogus").output().unwrap()), 1);
    assert_eq!(code(&Command::new(bin).arg("eigs").output().unwrap()), 1);
    assert_eq!(code(&Command::new(bin).arg("--help").output().unwrap()), 0);
}

#[test]
fn air_on_closed_field_lines_exits_with_2_and_records_failure() {
    let d = workdir("closed-air");
    let o = run(
        "convergence",
        &d,
        "[physics]\nn_steps = 1\n[solver]\nstrategy = \"air\"\nmax_inner = 50\n\
         [study]\nrefinements = [0]\nratios = [1e3]\nschemes = [\"mixed-dg\"]\n",
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("closed"), "{}", stderr(&o));
    let m = Manifest::read(&d.join("out/manifest.toml")).unwrap();
    assert!(m.status.starts_with("failed"), "{}", m.status);
}

#[test]
fn export_round_trips_and_manifest_reproduces_the_run() {
    let d = workdir("export");
    let o = run("export-matrices", &d, "[mesh]\nn = 3\norder = 1\n");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = d.join("out");
    let m = Manifest::read(&out.join("manifest.toml")).unwrap();
    assert_eq!(m.status, "ok");
    assert_eq!(m.subcommand, Subcommand::ExportMatrices);
    assert_eq!(m.seeds["mesh"], 1);
    assert!(m.versions.contains_key("anisoheat-core"));
    for f in &m.outputs {
        assert!(out.join(f).is_file(), "{f}");
    }
    // The recorded config resolves to itself and reproduces the matrices.
    let again = ExperimentConfig::from_toml(&m.config.to_toml()).unwrap().resolve(Subcommand::ExportMatrices).unwrap();
    assert_eq!(again, m.config);
    let (mats, t0) = export_matrices(&m.config).unwrap();
    assert_eq!(mats.len(), 10);
    for (name, _, a) in &mats {
        let b = read_matrix_market(&out.join(format!("{name}.mtx"))).unwrap();
        assert_eq!(&b, a, "{name}");
    }
    assert_eq!(read_field_csv(&out.join("t0.csv")).unwrap(), t0);
    let (header, rows) = csv_rows(&out.join("matrices.csv"));
    assert_eq!(header, ["file", "rows", "cols", "block_size", "stored_blocks", "description"]);
    assert_eq!(rows.len(), 10);
}

#[test]
fn neumann_export_changes_only_the_boundary_blocks() {
    let d = workdir("neumann");
    let o = run("export-matrices", &d, "[mesh]\nn = 3\norder = 1\n[physics]\nbc_kind = \"neumann\"\n");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a_zz = read_matrix_market(&d.join("out/a_zz.mtx")).unwrap();
    let m = read_matrix_market(&d.join("out/mass.mtx")).unwrap();
    assert_ne!(a_zz, m);
    assert_eq!(a_zz.n_blocks(), a_zz.nbrows);
}

#[test]
fn small_studies_write_their_tables() {
    let d = workdir("convergence");
    let o = run(
        "convergence",
        &d,
        "[physics]\nn_steps = 2\n[study]\nrefinements = [0]\nratios = [1e3]\n",
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = csv_rows(&d.join("out/convergence_errors.csv"));
    assert_eq!(header, ["scheme", "ratio", "refinement", "cells", "ndofs", "h", "steps", "error", "wall_time"]);
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let e: f64 = r[7].parse().unwrap();
        assert!(e.is_finite() && e > 0.0 && e < 1.0);
    }
    let (header, rows) = csv_rows(&d.join("out/steps.csv"));
    assert_eq!(header[0], "run");
    assert_eq!(rows.len(), 4);

    let d = workdir("solver-study");
    let o = run(
        "solver-study",
        &d,
        "[physics]\nn_steps = 2\n[study]\nrefinements = [0]\nratios = [1e6]\nstrategies = [\"air\"]\n",
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = csv_rows(&d.join("out/solver_study.csv"));
    assert_eq!(header[..3], ["strategy", "ratio", "refinement"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][5], "ok");

    let d = workdir("eigs");
    let o = run(
        "eigs",
        &d,
        "[mesh]\nplanar = true\norder = 1\n[study]\nrefinements = [0]\nratios = [1e3]\ndts = [1e-3]\n",
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = csv_rows(&d.join("out/eigs.csv"));
    assert_eq!(header[6], "boundary_mass");
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[10] == "true"));

    let d = workdir("steady");
    let o = run("steady-aniso", &d, "[physics]\nkappa_perp = 0.0\n");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = csv_rows(&d.join("out/steady.csv"));
    let col = header.iter().position(|h| h == "coupled_outer_iterations").unwrap();
    assert!(rows[0][col].parse::<usize>().unwrap() <= 2);
    let t = read_field_csv(&d.join("out/steady_t.csv")).unwrap();
    assert!(t.values.iter().all(|v| v.is_finite()));
}
