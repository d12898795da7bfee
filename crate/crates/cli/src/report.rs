//! Machine-readable run reports: deterministic JSON keyed by the config hash
//! and seed, one check row per verified property.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Serialize)]
pub struct ReportCheck {
    pub name: String,
    /// Short slug naming the verified property.
    pub anchor: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: String,
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub checks: Vec<ReportCheck>,
    pub warnings: Vec<String>,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn new(scenario: &str, config_bytes: &[u8], seed: u64) -> Report {
        let mut hasher = Sha256::new();
        hasher.update(config_bytes);
        let digest = hasher.finalize();
        let config_hash = digest.iter().map(|b| format!("{b:02x}")).collect::<String>();
        Report {
            scenario: scenario.to_string(),
            config_hash,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            checks: Vec::new(),
            warnings: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, anchor: &str, measured: f64, tolerance: f64) {
        self.checks.push(ReportCheck {
            name: name.to_string(),
            anchor: anchor.to_string(),
            measured,
            tolerance,
            pass: measured <= tolerance,
        });
    }

    pub fn push_flag(&mut self, name: &str, anchor: &str, measured: f64, pass: bool) {
        self.checks.push(ReportCheck {
            name: name.to_string(),
            anchor: anchor.to_string(),
            measured,
            tolerance: f64::NAN,
            pass,
        });
    }

    pub fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }

    pub fn write(&self, out_dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(out_dir)?;
        let path = out_dir.join("report.json");
        let mut body = serde_json::to_string_pretty(self).expect("serializable report");
        body.push('\n');
        std::fs::write(&path, body)?;
        Ok(path)
    }
}
