use std::path::PathBuf;
use std::time::Instant;

use disclab_core::Error;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cache::Cache;
use crate::commands::{Command, Ctx, Sweep};
use crate::config::{sha256_hex, SweepConfig};
use crate::output;
use crate::{Outcome, CODE_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// A checked property failed.
    Violation,
    /// Beyond an enumeration budget.
    Capacity,
    /// Rejected by a precondition while running.
    Invalid,
    /// Two evaluation routes disagreed.
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub point: serde_json::Value,
    pub params: Vec<String>,
    pub status: PointStatus,
    pub error: Option<String>,
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: String,
    pub command: String,
    pub fingerprint: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub param_columns: Vec<String>,
    pub result_columns: Vec<String>,
    pub points: Vec<PointRecord>,
    /// Some point ended without a result.
    pub partial: bool,
}

impl SweepReport {
    pub fn count(&self, status: PointStatus) -> usize {
        self.points.iter().filter(|p| p.status == status).count()
    }

    /// 3 on a property violation, 2 on a capacity error, 1 on a rejected
    /// point, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.count(PointStatus::Violation) + self.count(PointStatus::Inconsistent) > 0 {
            3
        } else if self.count(PointStatus::Capacity) > 0 {
            2
        } else if self.count(PointStatus::Invalid) > 0 {
            1
        } else {
            0
        }
    }
}

/// Run-dependent facts kept out of the reproducible outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTiming {
    pub fingerprint: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_seconds: f64,
    pub cached: usize,
    pub computed: usize,
    pub point_seconds: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub struct SweepOutput {
    pub report: SweepReport,
    pub timing: SweepTiming,
    pub files: Vec<PathBuf>,
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput, SweepError> {
    match &cfg.command {
        Command::Density(s) => run_typed(s, cfg),
        Command::Fourier(s) => run_typed(s, cfg),
        Command::SupportScan(s) => run_typed(s, cfg),
        Command::ValuationScan(s) => run_typed(s, cfg),
        Command::MagnitudeScan(s) => run_typed(s, cfg),
        Command::Relations(s) => run_typed(s, cfg),
        Command::ResultantStructure(s) => run_typed(s, cfg),
        Command::McDensity(s) => run_typed(s, cfg),
        Command::MeasureCheck(s) => run_typed(s, cfg),
        Command::EnumerateSmallDisc(s) => run_typed(s, cfg),
        Command::Davenport(s) => run_typed(s, cfg),
        Command::PowerfulDivisor(s) => run_typed(s, cfg),
        Command::Classify(s) => run_typed(s, cfg),
        Command::Census(s) => run_typed(s, cfg),
    }
}

fn point_key<S: Sweep>(point: &S::Point, cfg: &SweepConfig) -> String {
    let key = json!({
        "version": CODE_VERSION,
        "command": S::NAME,
        "point": point,
        "seed": cfg.common.seed,
        "capacity": cfg.common.capacity,
    });
    sha256_hex(key.to_string().as_bytes())
}

fn status_of(e: &Error) -> PointStatus {
    match e {
        Error::Capacity { .. } => PointStatus::Capacity,
        Error::Consistency(_) => PointStatus::Inconsistent,
        _ => PointStatus::Invalid,
    }
}

fn run_typed<S: Sweep>(sweep: &S, cfg: &SweepConfig) -> Result<SweepOutput, SweepError> {
    let start = Instant::now();
    let points = sweep.points().map_err(SweepError::Validation)?;
    if points.is_empty() {
        return Err(SweepError::Validation("the parameter grid is empty".into()));
    }
    let problems: Vec<String> = points
        .iter()
        .filter_map(|p| S::validate(p).err().map(|e| format!("{}: {e}", S::param_values(p).join(","))))
        .collect();
    if !problems.is_empty() {
        return Err(SweepError::Validation(problems.join("; ")));
    }
    let threads = cfg
        .common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(SweepError::Validation("thread count must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SweepError::Validation(e.to_string()))?;

    let mut cache = match &cfg.common.cache {
        Some(path) => Some(Cache::open(path)?),
        None => None,
    };
    let keys: Vec<String> = points.iter().map(|p| point_key::<S>(p, cfg)).collect();
    let mut results: Vec<Option<(Result<Outcome, Error>, f64)>> = keys
        .iter()
        .map(|k| cache.as_ref().and_then(|c| c.lookup(k)).map(|o| (Ok(o.clone()), 0.0)))
        .collect();
    let cached = results.iter().filter(|r| r.is_some()).count();
    let todo: Vec<usize> = (0..points.len()).filter(|&i| results[i].is_none()).collect();
    let ctx = Ctx {
        seed: cfg.common.seed,
        limits: cfg.common.limits(),
    };
    let computed: Vec<(usize, Result<Outcome, Error>, f64)> = pool.install(|| {
        todo.par_iter()
            .map(|&i| {
                let t = Instant::now();
                let r = S::run(&points[i], &ctx);
                (i, r, t.elapsed().as_secs_f64())
            })
            .collect()
    });
    for (i, r, secs) in computed {
        if let (Some(c), Ok(o)) = (cache.as_mut(), &r) {
            c.insert(keys[i].clone(), S::NAME, o.clone());
        }
        results[i] = Some((r, secs));
    }
    if let Some(c) = cache.as_mut() {
        c.flush()?;
    }

    let mut records = Vec::with_capacity(points.len());
    let mut point_seconds = Vec::with_capacity(points.len());
    for (p, r) in points.iter().zip(results) {
        let (r, secs) = r.expect("every point evaluated");
        point_seconds.push(secs);
        let (status, error, outcome) = match r {
            Ok(o) => {
                let st = if o.violation { PointStatus::Violation } else { PointStatus::Ok };
                (st, None, Some(o))
            }
            Err(e) => (status_of(&e), Some(e.to_string()), None),
        };
        records.push(PointRecord {
            point: serde_json::to_value(p).expect("point serializes"),
            params: S::param_values(p),
            status,
            error,
            outcome,
        });
    }
    let partial = records
        .iter()
        .any(|r| !matches!(r.status, PointStatus::Ok | PointStatus::Violation));
    let report = SweepReport {
        version: CODE_VERSION.to_string(),
        command: S::NAME.to_string(),
        fingerprint: cfg.fingerprint(),
        seed: cfg.common.seed,
        config: serde_json::from_str(&cfg.canonical_json()).expect("canonical config is JSON"),
        param_columns: sweep.param_columns().iter().map(|s| s.to_string()).collect(),
        result_columns: sweep.result_columns().iter().map(|s| s.to_string()).collect(),
        points: records,
        partial,
    };
    let timing = SweepTiming {
        fingerprint: report.fingerprint.clone(),
        seed: report.seed,
        threads,
        wall_seconds: start.elapsed().as_secs_f64(),
        cached,
        computed: points.len() - cached,
        point_seconds,
    };
    let files = output::write_all(&cfg.common.out, &report, &timing, &sweep.plot())?;
    Ok(SweepOutput { report, timing, files })
}
