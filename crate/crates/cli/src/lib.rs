//! Parameter sweeps over the disclab-core routines with a results cache
//! and CSV, JSON and gnuplot output.

pub mod cache;
pub mod commands;
pub mod config;
pub mod output;
pub mod sweep;

use serde::{Deserialize, Serialize};

pub use config::{Common, Format, SweepConfig};
pub use sweep::{run_sweep, PointRecord, PointStatus, SweepError, SweepReport};

/// Bumped whenever any result could change; stale cache entries are ignored.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+r1");

/// Rows and structured detail produced by one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub rows: Vec<Vec<String>>,
    pub detail: serde_json::Value,
    /// A checked property failed at this point.
    pub violation: bool,
}

impl Outcome {
    pub fn row(row: Vec<String>, detail: serde_json::Value, violation: bool) -> Outcome {
        Outcome {
            rows: vec![row],
            detail,
            violation,
        }
    }
}

/// `f64` as written to CSV.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub fn fmt_opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
