//! Provenance records embedded in every report.

use std::fs::{self, File};
use std::io::{self, Read};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data_error;

pub const TOOL: &str = "forge";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn new(role: &str, path: &Path, sha256: String) -> Self {
        Self {
            role: role.to_owned(),
            path: path.to_string_lossy().into_owned(),
            sha256,
        }
    }
}

/// `digest` covers everything except `seed`, so two runs that differ only
/// in seed differ only in that field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    pub digest: String,
}

#[derive(Serialize)]
struct Digested<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    config_digest: &'a str,
    inputs: &'a [InputDigest],
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Hex SHA-256 of the JSON encoding of `value`.
pub fn digest_of<T: Serialize>(value: &T) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(value).expect("serializable")))
}

impl Manifest {
    /// Hashes each input file.
    pub fn new(command: &str, config_digest: String, seed: u64, inputs: &[(&str, &Path)]) -> Result<Self> {
        let inputs = inputs
            .iter()
            .map(|(role, path)| {
                let sha256 = sha256_file(path).with_context(|| format!("hashing {}", path.display()))?;
                Ok(InputDigest::new(role, path, sha256))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_digests(command, config_digest, seed, inputs))
    }

    /// Uses digests taken while the inputs were read, so a pipe is only
    /// consumed once.
    pub fn from_digests(command: &str, config_digest: String, seed: u64, inputs: Vec<InputDigest>) -> Self {
        let mut m = Manifest {
            tool: TOOL.to_owned(),
            version: VERSION.to_owned(),
            command: command.to_owned(),
            config_digest,
            seed,
            inputs,
            digest: String::new(),
        };
        m.digest = m.compute_digest();
        m
    }

    pub fn compute_digest(&self) -> String {
        digest_of(&Digested {
            tool: &self.tool,
            version: &self.version,
            command: &self.command,
            config_digest: &self.config_digest,
            inputs: &self.inputs,
        })
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("manifest serializes")
    }

    /// Reads a manifest from a report directory, a report JSON with a
    /// `manifest` entry, or a bare manifest file.
    pub fn locate(path: &Path) -> Result<Self> {
        let file = if path.is_dir() { path.join("report.json") } else { path.to_owned() };
        let raw = fs::read_to_string(&file).map_err(|e| data_error(format!("cannot read {}: {e}", file.display())))?;
        let v: serde_json::Value =
            serde_json::from_str(&raw).map_err(|e| data_error(format!("{}: {e}", file.display())))?;
        let m = v.get("manifest").cloned().unwrap_or(v);
        serde_json::from_value(m).map_err(|e| data_error(format!("{}: no manifest: {e}", file.display())))
    }

    /// Problems found when re-hashing the recorded inputs; empty when the
    /// manifest still matches.
    pub fn verify(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.compute_digest() != self.digest {
            problems.push("manifest digest does not match its contents".to_owned());
        }
        for input in &self.inputs {
            match sha256_file(Path::new(&input.path)) {
                Ok(h) if h == input.sha256 => {}
                Ok(h) => problems.push(format!(
                    "{} ({}): sha256 {} differs from recorded {}",
                    input.role, input.path, h, input.sha256
                )),
                Err(e) => problems.push(format!("{} ({}): {e}", input.role, input.path)),
            }
        }
        problems
    }
}
