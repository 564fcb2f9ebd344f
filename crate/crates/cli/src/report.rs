//! Run reports: a JSON sidecar written next to every file output, carrying
//! the scenario fingerprint, the parameters, and the named results.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub scenario_fingerprint: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub outputs: Outputs,
}

#[derive(Debug, Default, Serialize)]
pub struct Outputs {
    pub files: Vec<String>,
    pub scalars: BTreeMap<String, serde_json::Value>,
}

impl RunReport {
    pub fn new(command: &'static str, fingerprint: String) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            scenario_fingerprint: fingerprint,
            parameters: BTreeMap::new(),
            outputs: Outputs::default(),
        }
    }

    pub fn parameter(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameter serialization"),
        );
    }

    pub fn scalar(&mut self, key: &str, value: impl Serialize) {
        self.outputs.scalars.insert(
            key.to_string(),
            serde_json::to_value(value).expect("scalar serialization"),
        );
    }

    pub fn file(&mut self, path: &Path) {
        self.outputs.files.push(path.display().to_string());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// Content hash of the canonical scenario document.
pub fn fingerprint(canonical_document: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_document.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(7 + 64);
    out.push_str("sha256:");
    for byte in digest {
        use std::fmt::Write;
        write!(out, "{byte:02x}").expect("hex formatting");
    }
    out
}

/// Sidecar path for a given output file.
pub fn report_path(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.report.json", out.display()))
}
