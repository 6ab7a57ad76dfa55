//! Metadata header written at the top of every output file.

use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Ordered `key: value` pairs; the first entry is always the tool version.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    entries: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(command: &str) -> Self {
        Self { entries: vec![("tool".into(), format!("dimmsb {VERSION}")), ("command".into(), command.into())] }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn with_seed(self, seed: u64) -> Self {
        self.with("seed", seed)
    }

    pub fn with_config_hash(self, config: &[u8]) -> Self {
        self.with("config_sha256", sha256_hex(config))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// One `<prefix> key: value` line per entry.
    pub fn render(&self, prefix: &str) -> String {
        self.entries.iter().map(|(k, v)| format!("{prefix} {k}: {v}\n")).collect()
    }

    /// Reads back `key: value` comment lines written by [`Provenance::render`].
    pub fn parse(text: &str, prefix: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.strip_prefix(prefix))
            .filter(|l| !l.starts_with('@'))
            .filter_map(|l| l.trim().split_once(": "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self { entries }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
