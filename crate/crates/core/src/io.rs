//! On-disk formats.
//!
//! Matrices are stored either as headerless CSV (one row per line, values
//! written with 17 significant digits) or as a little-endian binary blob:
//!
//! ```text
//! offset  size      content
//! 0       4         b"MKMC"
//! 4       1         version, 0x01
//! 5       4         rows, u32
//! 9       4         cols, u32
//! 13      8·r·c     row-major f64 values
//! ```
//!
//! Readers detect the format from the magic bytes.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::engines::{RankCriterion, RankPolicy};
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

pub const MAGIC: &[u8; 4] = b"MKMC";
pub const VERSION: u8 = 0x01;
const HEADER_LEN: usize = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MatrixFormat::Csv => "csv",
            MatrixFormat::Binary => "bin",
        }
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn encode_binary(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(m.nrows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u32).to_le_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8], path: &Path) -> Result<DMatrix<f64>> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(parse_err(path, "missing MKMC header"));
    }
    if bytes[4] != VERSION {
        return Err(parse_err(path, format!("unsupported version {:#04x}", bytes[4])));
    }
    let rows = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let expected = HEADER_LEN + 8 * rows * cols;
    if bytes.len() != expected {
        return Err(parse_err(
            path,
            format!("{rows}x{cols} matrix needs {expected} bytes, file has {}", bytes.len()),
        ));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    Ok(DMatrix::from_row_iterator(rows, cols, values))
}

pub fn encode_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn decode_csv(text: &str, path: &Path) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(path, format!("line {}: {e}", n + 1)))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    path,
                    format!("line {} has {} values, expected {}", n + 1, row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.into_iter().flatten()))
}

pub fn read_matrix(path: &Path) -> Result<(DMatrix<f64>, MatrixFormat)> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.starts_with(MAGIC) {
        return Ok((decode_binary(&bytes, path)?, MatrixFormat::Binary));
    }
    let text = String::from_utf8(bytes).map_err(|_| parse_err(path, "not UTF-8 text or MKMC binary"))?;
    Ok((decode_csv(&text, path)?, MatrixFormat::Csv))
}

/// Reads a square kernel; non-square input is a dimension error.
pub fn read_kernel(path: &Path) -> Result<(SymmetricMatrix, MatrixFormat)> {
    let (m, format) = read_matrix(path)?;
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "{}: kernel must be square and non-empty, got {}x{}",
            path.display(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok((SymmetricMatrix::new(m)?, format))
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>, format: MatrixFormat) -> Result<()> {
    let bytes = match format {
        MatrixFormat::Csv => encode_csv(m).into_bytes(),
        MatrixFormat::Binary => encode_binary(m),
    };
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// `"rank"` in a run config: a fixed `q` or `{"criterion": "gk" | "kaiser"}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RankSpec {
    Fixed(usize),
    Criterion {
        criterion: RankCriterion,
    },
}

impl From<RankSpec> for RankPolicy {
    fn from(r: RankSpec) -> Self {
        match r {
            RankSpec::Fixed(q) => RankPolicy::Fixed(q),
            RankSpec::Criterion { criterion } => RankPolicy::Criterion(criterion),
        }
    }
}

/// JSON run configuration for `mkmc complete --config`.
///
/// Every key is optional here; present keys override command-line flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<crate::engines::Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<RankSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reg_epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<PathBuf>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Trace JSON written next to the completed matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub dof: usize,
    /// `null` for the full model.
    pub rank: Option<usize>,
    /// Per-iteration wall-clock time in milliseconds; diagnostic only.
    pub wall_clock_ms: Vec<f64>,
}
