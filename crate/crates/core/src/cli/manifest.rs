//! Run manifests: config hash, code version and per-output checksums.

use super::output::JVal;
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config_sha256: String,
    pub code_version: String,
    /// (relative path, sha256) per artifact, in write order.
    pub outputs: Vec<(String, String)>,
    pub wall_ms: u128,
}

pub fn sha256_hex(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    hex::encode(hasher.finalize())
}

impl RunManifest {
    pub fn new(config_text: &str) -> Self {
        Self {
            config_sha256: sha256_hex(config_text.as_bytes()),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
            wall_ms: 0,
        }
    }

    pub fn record(&mut self, name: &str, contents: &str) {
        self.outputs
            .push((name.to_string(), sha256_hex(contents.as_bytes())));
    }

    pub fn render(&self) -> String {
        JVal::obj(vec![
            ("schema", JVal::Int(1)),
            ("config_sha256", JVal::Str(self.config_sha256.clone())),
            ("code_version", JVal::Str(self.code_version.clone())),
            (
                "outputs",
                JVal::Arr(
                    self.outputs
                        .iter()
                        .map(|(name, hash)| {
                            JVal::obj(vec![
                                ("path", JVal::Str(name.clone())),
                                ("sha256", JVal::Str(hash.clone())),
                            ])
                        })
                        .collect(),
                ),
            ),
            ("wall_ms", JVal::Int(self.wall_ms as i64)),
        ])
        .render()
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::write(dir.join("manifest.json"), self.render())
    }
}
