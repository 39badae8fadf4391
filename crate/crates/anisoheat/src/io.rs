//! Matrix Market and CSV files, and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anisoheat_core::sparse::BlockCsrMatrix;
use anisoheat_core::space::FieldVector;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Subcommand};

/// IO and format errors.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn format_err(path: &Path, msg: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

/// Writes the scalar entries of every stored block in Matrix Market
/// coordinate format. The block size is recorded in a `% block_size` line.
pub fn write_matrix_market(path: &Path, a: &BlockCsrMatrix) -> Result<(), IoError> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    let bs = a.bs;
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "% block_size {bs}")?;
        writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.vals.len())?;
        for i in 0..a.nbrows {
            for k in a.row_blocks(i) {
                let j = a.col_idx[k];
                let blk = a.block_at(k);
                for r in 0..bs {
                    for c in 0..bs {
                        writeln!(w, "{} {} {:e}", i * bs + r + 1, j * bs + c + 1, blk[r * bs + c])?;
                    }
                }
            }
        }
        w.flush()
    };
    body().map_err(io_err(path))
}

/// Reads a file written by [`write_matrix_market`]. Files without a block
/// size line are read with `1 × 1` blocks.
pub fn read_matrix_market(path: &Path) -> Result<BlockCsrMatrix, IoError> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(f).lines();
    let header = lines
        .next()
        .ok_or_else(|| format_err(path, "empty file"))?
        .map_err(io_err(path))?;
    if !header.starts_with("%%MatrixMarket matrix coordinate real general") {
        return Err(format_err(path, "expected a real general coordinate Matrix Market file"));
    }
    let mut bs = 1usize;
    let mut dims = None;
    let mut entries = Vec::new();
    for line in lines {
        let line = line.map_err(io_err(path))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('%') {
            if let Some(v) = c.trim().strip_prefix("block_size") {
                bs = v.trim().parse().map_err(|_| format_err(path, "bad block_size"))?;
            }
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        if dims.is_none() {
            let p: Result<Vec<usize>, _> = parts.iter().map(|s| s.parse::<usize>()).collect();
            match p.as_deref() {
                Ok([r, c, nnz]) => {
                    dims = Some((*r, *c));
                    entries.reserve(*nnz);
                }
                _ => return Err(format_err(path, "bad size line")),
            }
            continue;
        }
        let (r, c) = dims.unwrap();
        let parsed = (parts.len() == 3)
            .then(|| Some((parts[0].parse::<usize>().ok()?, parts[1].parse::<usize>().ok()?, parts[2].parse::<f64>().ok()?)))
            .flatten();
        match parsed {
            Some((i, j, v)) if i >= 1 && j >= 1 && i <= r && j <= c => entries.push((i - 1, j - 1, v)),
            _ => return Err(format_err(path, format!("bad entry line {t:?}"))),
        }
    }
    let (r, c) = dims.ok_or_else(|| format_err(path, "missing size line"))?;
    if bs == 0 || r % bs != 0 || c % bs != 0 {
        return Err(format_err(path, format!("block size {bs} does not divide {r}x{c}")));
    }
    let (nbr, nbc) = (r / bs, c / bs);
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); nbr];
    for &(i, j, _) in &entries {
        rows[i / bs].push(j / bs);
    }
    for row in &mut rows {
        row.sort_unstable();
        row.dedup();
    }
    let mut a = BlockCsrMatrix::from_pattern(nbc, bs, &rows);
    for (i, j, v) in entries {
        a.block_mut(i / bs, j / bs)[(i % bs) * bs + j % bs] += v;
    }
    Ok(a)
}

/// Sidecar entry describing one exported matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixInfo {
    pub file: String,
    pub rows: usize,
    pub cols: usize,
    pub block_size: usize,
    pub stored_blocks: usize,
    pub description: String,
}

/// Writes `(dof, value)` rows.
pub fn write_field_csv(path: &Path, v: &FieldVector) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["dof", "value"])?;
    for (i, x) in v.values.iter().enumerate() {
        w.write_record([i.to_string(), format!("{x:e}")])?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a file written by [`write_field_csv`]; dofs must be `0..n` in order.
pub fn read_field_csv(path: &Path) -> Result<FieldVector, IoError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut values = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let dof: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| format_err(path, "bad dof"))?;
        let val: f64 = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| format_err(path, "bad value"))?;
        if dof != k {
            return Err(format_err(path, format!("dof {dof} out of order at row {k}")));
        }
        values.push(val);
    }
    Ok(FieldVector::from_vec(values))
}

/// Writes serializable rows with a header line.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))
}

/// Output directory of one run; remembers what was written for the manifest.
#[derive(Debug)]
pub struct OutputDir {
    pub root: PathBuf,
    pub files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, IoError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// Path of `name` inside the directory, recorded as an output.
    pub fn file(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.root.join(name)
    }
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subcommand: Subcommand,
    pub versions: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub status: String,
    pub outputs: Vec<String>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(subcommand: Subcommand, config: &ExperimentConfig) -> Self {
        let versions = BTreeMap::from([
            ("anisoheat".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("anisoheat-core".to_string(), anisoheat_core::VERSION.to_string()),
        ]);
        let mut seeds = BTreeMap::from([
            ("mesh".to_string(), config.mesh.seed),
            ("amg".to_string(), config.amg.seed),
        ]);
        if let Some(s) = config.study.lanczos_seed {
            seeds.insert("lanczos".to_string(), s);
        }
        Manifest {
            subcommand,
            versions,
            seeds,
            status: "running".into(),
            outputs: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let text = toml::to_string(self).map_err(|e| format_err(path, e.to_string()))?;
        fs::write(path, text).map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|e| format_err(path, e.to_string()))
    }
}
