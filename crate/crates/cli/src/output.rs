//! CSV files with a provenance header.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const GIT_REV: &str = env!("QSTAFF_GIT_REV");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub command: &'static str,
    pub git_rev: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(command: &'static str, cfg: &ExperimentConfig) -> Self {
        Self {
            command,
            git_rev: GIT_REV,
            seed: cfg.simulation.seed,
            config_hash: cfg.hash(),
        }
    }

    fn header(&self) -> String {
        format!(
            "# qstaff {}\n# git_rev: {}\n# seed: {}\n# config_sha256: {}\n",
            self.command, self.git_rev, self.seed, self.config_hash
        )
    }
}

/// Shortest round-trip formatting, so files are byte-stable.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), num)
}

/// Writes `rows` under `header` to `dir/file`, creating `dir` if needed.
pub fn write_csv(
    dir: &Path,
    file: &str,
    prov: &Provenance,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<PathBuf, CliError> {
    let path = dir.join(file);
    let io = |source: std::io::Error| CliError::Io {
        path: path.clone(),
        source,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| io(e.into()))?;
    for r in rows {
        w.write_record(r).map_err(|e| io(e.into()))?;
    }
    let body = w.into_inner().map_err(|e| io(e.into_error()))?;
    let mut bytes = prov.header().into_bytes();
    bytes.extend_from_slice(&body);
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    fs::write(&path, bytes).map_err(io)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_then_rows() {
        let dir = tempfile::tempdir().unwrap();
        let prov = Provenance {
            command: "tables",
            git_rev: "abc",
            seed: 7,
            config_hash: "ff".into(),
        };
        let p = write_csv(
            dir.path(),
            "t.csv",
            &prov,
            &["a", "b"],
            &[vec![num(0.1), opt_num(None)]],
        )
        .unwrap();
        let text = fs::read_to_string(p).unwrap();
        assert_eq!(
            text,
            "# qstaff tables\n# git_rev: abc\n# seed: 7\n# config_sha256: ff\na,b\n0.1,NA\n"
        );
    }
}
