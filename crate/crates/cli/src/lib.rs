//! The `theta-maslov` command line: spectra, Maslov indices, verification
//! suites, band diagrams, eigencurves and rescaling reports.
//!
//! Every command computes its complete output in memory before anything is
//! written, so rejected input never leaves partial files behind.

pub mod commands;
pub mod config;
pub mod svg;

use std::fmt;
use std::path::{Path, PathBuf};

use theta_maslov::Error;

pub use config::RunConfig;

/// Bad input: malformed configuration, violated invariants, unusable
/// arguments. Always exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// Exit code for a failed command: 2 for bad input, rejected hypotheses and
/// levels on an eigenvalue, 1 for numerical failures.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<InputError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidInput(_) | Error::Hypothesis(_) | Error::CutoffOnEigenvalue { .. } | Error::Io(_)) => 2,
        Some(_) => 1,
        None => 2,
    }
}

/// Result of a command: text for stdout, files to write, and the exit code.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
    pub code: i32,
}

impl Output {
    /// Routes `data` to `out` if given, otherwise to stdout.
    pub fn data(out: Option<&Path>, data: String) -> Self {
        match out {
            Some(p) => Self { files: vec![(p.to_path_buf(), data)], ..Self::default() },
            None => Self { stdout: data, ..Self::default() },
        }
    }

    /// Writes every file through a temporary sibling and a rename.
    pub fn write_files(&self) -> anyhow::Result<()> {
        for (path, content) in &self.files {
            let mut tmp = path.clone().into_os_string();
            tmp.push(".partial");
            let tmp = PathBuf::from(tmp);
            std::fs::write(&tmp, content).map_err(|e| InputError(format!("cannot write {}: {e}", path.display())))?;
            std::fs::rename(&tmp, path).map_err(|e| InputError(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// Round-trip float formatting for CSV: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, std::f64::consts::TAU] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert!(s.contains('.'));
        }
    }

    #[test]
    fn errors_map_to_exit_codes() {
        assert_eq!(exit_code(&InputError("x".into()).into()), 2);
        assert_eq!(exit_code(&Error::Hypothesis("x".into()).into()), 2);
        assert_eq!(exit_code(&Error::RootCluster { lo: 0.0, hi: 1.0 }.into()), 1);
    }
}
