//! System manifests and MatrixMarket files.
//!
//! A manifest is plain text, one `key = value` per line, `#` starts a
//! comment:
//!
//! ```text
//! dim = 2
//! M = [[1, 0], [0, 1]]     # inline dense rows
//! C = damping.mtx          # MatrixMarket file, relative to the manifest
//! K = stiffness.mtx
//! ```
//!
//! `dim` is optional; when present every matrix must match it.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::system::SecondOrderSystem;

pub fn load_system(manifest: impl AsRef<Path>) -> Result<SecondOrderSystem> {
    let path = manifest.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&text, base)
}

/// Parses manifest text, resolving file references against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<SecondOrderSystem> {
    let mut dim: Option<usize> = None;
    let mut slots: [Option<Matrix>; 3] = [None, None, None];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let slot = match key {
            "dim" => {
                let n = value
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {}: dim: {e}", lineno + 1)))?;
                dim = Some(n);
                continue;
            }
            "M" => 0,
            "C" => 1,
            "K" => 2,
            other => {
                return Err(Error::Parse(format!(
                    "line {}: unknown key `{other}`",
                    lineno + 1
                )))
            }
        };
        let matrix = if value.starts_with('[') {
            parse_inline(value)?
        } else {
            read_matrix_market(base.join(value))?
        };
        slots[slot] = Some(matrix);
    }
    let [m, c, k] = slots;
    let take = |slot: Option<Matrix>, name: &str| {
        slot.ok_or_else(|| Error::Parse(format!("manifest does not define {name}")))
    };
    let (m, c, k) = (take(m, "M")?, take(c, "C")?, take(k, "K")?);
    for (name, a) in [("M", &m), ("C", &c), ("K", &k)] {
        let expected = dim.unwrap_or(m.nrows());
        if a.nrows() != expected || a.ncols() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {expected}x{expected}",
                a.nrows(),
                a.ncols()
            )));
        }
    }
    SecondOrderSystem::from_matrices(m, c, k)
}

/// Dense row lists such as `[[1, 0.5], [0.5, 2]]`.
pub fn parse_inline(value: &str) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(value)
        .map_err(|e| Error::Parse(format!("inline matrix `{value}`: {e}")))?;
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse(format!(
            "inline matrix `{value}` is ragged or empty"
        )));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Reads the `matrix array|coordinate real general|symmetric` subset of the
/// MatrixMarket exchange format.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_matrix_market(text: &str) -> Result<Matrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty MatrixMarket file".into()))?
        .to_ascii_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Parse(format!("bad MatrixMarket header `{header}`")));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(Error::Parse(format!(
            "unsupported field type `{}`",
            fields[3]
        )));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Parse(format!("unsupported symmetry `{other}`"))),
    };
    let mut body = lines
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size_line = body
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))?;
    let sizes = parse_numbers::<usize>(size_line)?;
    let num = |s: &str| parse_numbers::<f64>(s);

    match fields[2] {
        "array" => {
            let [rows, cols] = sizes[..] else {
                return Err(Error::Parse(format!("bad array size line `{size_line}`")));
            };
            let mut values = Vec::new();
            for line in body {
                values.extend(num(line)?);
            }
            let mut out = Matrix::zeros(rows, cols);
            // column-major; symmetric storage holds the lower triangle only
            let mut it = values.into_iter();
            for j in 0..cols {
                let start = if symmetric { j } else { 0 };
                for i in start..rows {
                    let v = it
                        .next()
                        .ok_or_else(|| Error::Parse("too few array entries".into()))?;
                    out[(i, j)] = v;
                    if symmetric {
                        out[(j, i)] = v;
                    }
                }
            }
            if it.next().is_some() {
                return Err(Error::Parse("too many array entries".into()));
            }
            Ok(out)
        }
        "coordinate" => {
            let [rows, cols, nnz] = sizes[..] else {
                return Err(Error::Parse(format!(
                    "bad coordinate size line `{size_line}`"
                )));
            };
            let mut out = Matrix::zeros(rows, cols);
            let mut count = 0;
            for line in body {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(Error::Parse(format!("bad coordinate entry `{line}`")));
                }
                let parse_index = |s: &str, bound: usize| -> Result<usize> {
                    let i: usize = s
                        .parse()
                        .map_err(|e| Error::Parse(format!("index `{s}`: {e}")))?;
                    if i == 0 || i > bound {
                        return Err(Error::Parse(format!("index {i} out of range")));
                    }
                    Ok(i - 1)
                };
                let i = parse_index(parts[0], rows)?;
                let j = parse_index(parts[1], cols)?;
                let v: f64 = parts[2]
                    .parse()
                    .map_err(|e| Error::Parse(format!("value `{}`: {e}", parts[2])))?;
                out[(i, j)] += v;
                if symmetric && i != j {
                    out[(j, i)] += v;
                }
                count += 1;
            }
            if count != nnz {
                return Err(Error::Parse(format!(
                    "expected {nnz} entries, found {count}"
                )));
            }
            Ok(out)
        }
        other => Err(Error::Parse(format!("unsupported format `{other}`"))),
    }
}

fn parse_numbers<T: std::str::FromStr>(line: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    line.split_whitespace()
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
        })
        .collect()
}

/// Dense `array real general` output with 17 significant digits, which
/// round-trips every `f64` exactly.
pub fn format_matrix_market(a: &Matrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    out.push_str(&format!("{} {}\n", a.nrows(), a.ncols()));
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            out.push_str(&format!("{:.16e}\n", a[(i, j)]));
        }
    }
    out
}

/// Writes `<stem>.manifest` plus `<stem>_{M,C,K}.mtx` into `dir` and returns
/// the manifest path.
pub fn write_system(sys: &SecondOrderSystem, dir: impl AsRef<Path>, stem: &str) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = format!("dim = {}\n", sys.dim());
    for (name, a) in [("M", sys.m()), ("C", sys.c()), ("K", sys.k())] {
        let file = format!("{stem}_{name}.mtx");
        let path = dir.join(&file);
        fs::write(&path, format_matrix_market(a.as_matrix())).map_err(|e| Error::io(&path, e))?;
        manifest.push_str(&format!("{name} = {file}\n"));
    }
    let path = dir.join(format!("{stem}.manifest"));
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
