use serde::Serialize;
use sha2::{Digest, Sha256};

/// One checked property of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Assertion { name: name.to_string(), passed, detail }
    }
}

/// Written beside the data files of every run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub experiment: String,
    pub seed: u64,
    pub config_sha256: String,
    pub wall_time_seconds: f64,
    pub files: Vec<String>,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
    pub exit_code: i32,
    /// Set when the run stopped on an error instead of finishing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
