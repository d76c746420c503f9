//! Atomic file output: CSV tables and JSON documents.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// Formats a float deterministically: plain decimals for moderate magnitudes,
/// exponent notation otherwise.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
    tmp.write_all(bytes).map_err(io(path))?;
    tmp.as_file().sync_all().map_err(io(path))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

/// CSV with a header row; every row must match the header width.
pub fn write_table(header: &[&str], rows: &[Vec<f64>], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(CliError::usage(format!("refusing to write an empty series to {}", path.display())));
    }
    let mut out = header.join(",");
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(CliError::usage(format!("row {i} has {} columns, header has {}", row.len(), header.len())));
        }
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", format_f64(*v));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Plot data: two columns, or three for complex values, with a header naming them.
pub fn emit_plotdata(header: &[&str], series: &[Vec<f64>], path: &Path) -> Result<()> {
    if !(2..=3).contains(&header.len()) {
        return Err(CliError::usage(format!("plot data has 2 or 3 columns, got {}", header.len())));
    }
    write_table(header, series, path)
}

/// Pretty JSON with a trailing newline. Object keys keep struct order, and
/// maps are sorted.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable value");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Output directory of a run; records written files relative to it.
#[derive(Debug)]
pub struct OutDir {
    pub root: PathBuf,
    pub files: Vec<String>,
}

impl OutDir {
    pub fn new(root: PathBuf) -> Self {
        Self { root, files: Vec::new() }
    }

    fn claim(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.root.join(name)
    }

    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let path = self.claim(name);
        write_table(header, rows, &path)
    }

    pub fn plot(&mut self, name: &str, header: &[&str], series: &[Vec<f64>]) -> Result<()> {
        let path = self.claim(name);
        emit_plotdata(header, series, &path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.claim(name);
        write_json(value, &path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_bytes_are_fixed_by_the_data() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("curve.csv");
        emit_plotdata(&["a", "delta"], &[vec![0.0, 3.5], vec![1.0, 1e-7]], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,delta\n0,3.5\n1,1e-7\n");
        assert!(matches!(emit_plotdata(&["a", "delta"], &[], &p), Err(CliError::Usage(_))));
        assert!(emit_plotdata(&["x"], &[vec![1.0]], &p).is_err());
        assert!(write_table(&["a", "b"], &[vec![1.0]], &p).is_err());
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        std::fs::write(&file, "x").unwrap();
        let err = emit_plotdata(&["re", "im"], &[vec![1.0, 0.0]], &file.join("spectrum.csv")).unwrap_err();
        assert!(matches!(err, CliError::Io { .. }));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.0, -2.5, 1e-9, 6.02e23, 0.1 + 0.2, std::f64::consts::PI] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
