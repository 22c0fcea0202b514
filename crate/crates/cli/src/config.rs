use std::path::PathBuf;

use clap::{Args, ValueEnum};
use disclab_core::Limits;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::Command;
use crate::CODE_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every Monte Carlo and sampled computation.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (the flag wins over the environment).
    #[arg(long, global = true, env = "DISCLAB_THREADS")]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "disclab-out")]
    pub out: PathBuf,
    /// JSON-lines results cache.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Bit limit for every residue-ring enumeration.
    #[arg(long, global = true)]
    pub capacity: Option<u32>,
    /// What gets echoed on stdout; both files are always written.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
}

impl Default for Common {
    fn default() -> Self {
        Common {
            seed: 1,
            threads: None,
            out: PathBuf::from("disclab-out"),
            cache: None,
            capacity: None,
            format: Format::Csv,
        }
    }
}

impl Common {
    pub fn limits(&self) -> Limits {
        match self.capacity {
            Some(bits) => Limits::uniform(bits),
            None => Limits::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub command: Command,
    pub common: Common,
}

/// The part of a config that determines results: threads, output paths and
/// format are left out.
#[derive(Serialize)]
struct Canonical<'a> {
    version: &'a str,
    #[serde(flatten)]
    command: &'a Command,
    seed: u64,
    capacity: Option<u32>,
}

impl SweepConfig {
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&Canonical {
            version: CODE_VERSION,
            command: &self.command,
            seed: self.common.seed,
            capacity: self.common.capacity,
        })
        .expect("config serializes")
    }

    pub fn fingerprint(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
