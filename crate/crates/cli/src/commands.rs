//! One sweep definition per subcommand: the parameter grid, how a grid
//! point is validated and run, and the CSV layout.

use std::fmt::Debug;
use std::str::FromStr;

use clap::{Args, Subcommand, ValueEnum};
use disclab_core::localfourier::{
    density_exact, fourier_exact, fourier_fast, magnitude_scaling, support_scan, u1_vanishing_check,
    valuation_ap_check, CellTable, ResidueParams, ScanMode, SyntheticSupport,
};
use disclab_core::polycore::MonicIntPoly;
use disclab_core::realdensity::{
    davenport_check, enumerate_small_disc, fit_slope, mc_density_sweep, measure_change_check, BoxSpec, TestFn,
};
use disclab_core::sievekit::{
    classifier_agreement, classify_multiple, powerful_divisor, sieve_census, ClassifyMode, PowerfulQuery,
};
use disclab_core::symrel::{alpha_formula, alpha_structure, check_pair_relation, resultant_structure};
use disclab_core::{Error, Limits, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{fmt_f64, fmt_opt_f64, Outcome};

/// Inputs shared by every point of a sweep.
pub struct Ctx {
    pub seed: u64,
    pub limits: Limits,
}

pub struct PlotSpec {
    pub x: &'static str,
    pub ys: Vec<&'static str>,
    pub logx: bool,
    pub logy: bool,
}

pub trait Sweep: Serialize {
    const NAME: &'static str;
    type Point: Serialize + DeserializeOwned + Clone + Debug + Send + Sync;

    /// The grid in output order; an empty grid is rejected by the caller.
    fn points(&self) -> std::result::Result<Vec<Self::Point>, String>;
    fn param_columns(&self) -> Vec<&'static str>;
    fn param_values(p: &Self::Point) -> Vec<String>;
    fn result_columns(&self) -> Vec<&'static str>;
    /// Cheap precondition checks run on the whole grid before any work.
    fn validate(p: &Self::Point) -> Result<()>;
    fn run(p: &Self::Point, ctx: &Ctx) -> Result<Outcome>;
    fn plot(&self) -> PlotSpec;
}

fn nonempty<T>(name: &str, v: &[T]) -> std::result::Result<(), String> {
    if v.is_empty() {
        Err(format!("parameter --{name} has no values"))
    } else {
        Ok(())
    }
}

fn product3<A: Clone, B: Clone, C: Clone>(a: &[A], b: &[B], c: &[C]) -> Vec<(A, B, C)> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            for z in c {
                out.push((x.clone(), y.clone(), z.clone()));
            }
        }
    }
    out
}

fn parse_rational(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| Error::Precondition(format!("not a rational number: {s:?}")))
}

/// `a:b:c` with optional signs.
fn parse_tuple(s: &str) -> Result<Vec<i64>> {
    s.split(':')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Precondition(format!("bad entry {t:?} in {s:?}"))))
        .collect()
}

fn shrink_of(y: &str) -> Result<Option<BigRational>> {
    if y == "inf" {
        Ok(None)
    } else {
        parse_rational(y).map(Some)
    }
}

fn to_value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("report serializes")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Npk {
    pub n: usize,
    pub p: u64,
    pub k: u32,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct NpkGrid {
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [2usize])]
    pub n: Vec<usize>,
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [3u64])]
    pub p: Vec<u64>,
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [1u32])]
    pub k: Vec<u32>,
}

impl NpkGrid {
    fn points(&self) -> std::result::Result<Vec<Npk>, String> {
        nonempty("n", &self.n)?;
        nonempty("p", &self.p)?;
        nonempty("k", &self.k)?;
        Ok(product3(&self.n, &self.p, &self.k)
            .into_iter()
            .map(|(n, p, k)| Npk { n, p, k })
            .collect())
    }
}

fn npk_values(x: &Npk) -> Vec<String> {
    vec![x.n.to_string(), x.p.to_string(), x.k.to_string()]
}

fn rp(x: &Npk) -> Result<ResidueParams> {
    ResidueParams::new(x.n, x.p, x.k)
}

// density

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Density {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: NpkGrid,
    /// Also count by direct enumeration and compare.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityPoint {
    #[serde(flatten)]
    pub npk: Npk,
    pub oracle: bool,
}

impl Sweep for Density {
    const NAME: &'static str = "density";
    type Point = DensityPoint;

    fn points(&self) -> std::result::Result<Vec<DensityPoint>, String> {
        Ok(self
            .grid
            .points()?
            .into_iter()
            .map(|npk| DensityPoint {
                npk,
                oracle: self.oracle,
            })
            .collect())
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n", "p", "k"]
    }
    fn param_values(p: &DensityPoint) -> Vec<String> {
        npk_values(&p.npk)
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec!["count", "modulus_exp", "density", "method", "oracle_count"]
    }
    fn validate(p: &DensityPoint) -> Result<()> {
        rp(&p.npk).map(|_| ())
    }
    fn run(p: &DensityPoint, ctx: &Ctx) -> Result<Outcome> {
        let r = density_exact(rp(&p.npk)?, &ctx.limits, p.oracle)?;
        let violation = r.oracle_count.is_some_and(|c| c != r.count);
        Ok(Outcome::row(
            vec![
                r.count.to_string(),
                r.modulus_exp.to_string(),
                r.density().to_string(),
                r.method.clone(),
                r.oracle_count.map(|c| c.to_string()).unwrap_or_default(),
            ],
            to_value(&r),
            violation,
        ))
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "k",
            ys: vec!["count"],
            logx: false,
            logy: true,
        }
    }
}

// fourier

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Fourier {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: NpkGrid,
    /// Phases as colon-separated entries, e.g. `1:0:3`.
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = ["1:0".to_string()])]
    pub u: Vec<String>,
    /// Recompute by direct enumeration and require equal histograms.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierPoint {
    #[serde(flatten)]
    pub npk: Npk,
    pub u: String,
    pub check: bool,
}

impl Sweep for Fourier {
    const NAME: &'static str = "fourier";
    type Point = FourierPoint;

    fn points(&self) -> std::result::Result<Vec<FourierPoint>, String> {
        nonempty("u", &self.u)?;
        let mut out = Vec::new();
        for npk in self.grid.points()? {
            for u in &self.u {
                out.push(FourierPoint {
                    npk,
                    u: u.clone(),
                    check: self.check,
                });
            }
        }
        Ok(out)
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n", "p", "k", "u"]
    }
    fn param_values(p: &FourierPoint) -> Vec<String> {
        let mut v = npk_values(&p.npk);
        v.push(p.u.clone());
        v
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec!["support_count", "is_zero", "abs", "log2_abs", "error_bound", "routes"]
    }
    fn validate(p: &FourierPoint) -> Result<()> {
        let u = parse_tuple(&p.u)?;
        if u.len() != p.npk.n {
            return Err(Error::Precondition(format!("phase {} has {} entries, n = {}", p.u, u.len(), p.npk.n)));
        }
        rp(&p.npk)?.phase(&u).map(|_| ())
    }
    fn run(p: &FourierPoint, ctx: &Ctx) -> Result<Outcome> {
        let params = rp(&p.npk)?;
        let u = params.phase(&parse_tuple(&p.u)?)?;
        let fast = fourier_fast(params, &u, &ctx.limits, false)?;
        let routes = if p.check {
            let exact = fourier_exact(params, &u, &ctx.limits)?;
            if exact.histogram != fast.histogram {
                return Err(Error::Consistency(format!("cell and direct histograms differ at u = {:?}", u)));
            }
            "agree"
        } else {
            "unchecked"
        };
        let m = fast.magnitude();
        Ok(Outcome::row(
            vec![
                fast.support_count().to_string(),
                fast.is_zero().to_string(),
                fmt_f64(m.abs),
                fmt_opt_f64(m.log2_abs),
                fmt_f64(m.error_bound),
                routes.into(),
            ],
            json!({ "phase": u, "histogram": fast.histogram, "reduced": fast.reduced().iter().map(|x| x.to_string()).collect::<Vec<_>>() }),
            false,
        ))
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "k",
            ys: vec!["abs"],
            logx: false,
            logy: true,
        }
    }
}

// support-scan

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportMode {
    /// Every phase.
    Exhaustive,
    /// Phases `(u1, u2, 0, ..., 0)`.
    Restricted,
    /// `--samples` random phases.
    Sampled,
    /// Phases `(u1, 0, ..., 0)`, checking exact vanishing off multiples of
    /// `p^{2k}/gcd(p^{2k}, n)`.
    U1,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SupportScan {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: NpkGrid,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: SupportMode,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    /// Scan a planted synthetic support instead (must report violations).
    #[arg(long)]
    pub planted: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportPoint {
    #[serde(flatten)]
    pub npk: Npk,
    pub mode: SupportMode,
    pub samples: u64,
    pub planted: bool,
}

impl Sweep for SupportScan {
    const NAME: &'static str = "support-scan";
    type Point = SupportPoint;

    fn points(&self) -> std::result::Result<Vec<SupportPoint>, String> {
        Ok(self
            .grid
            .points()?
            .into_iter()
            .map(|npk| SupportPoint {
                npk,
                mode: self.mode,
                samples: self.samples,
                planted: self.planted,
            })
            .collect())
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n", "p", "k", "mode", "source"]
    }
    fn param_values(p: &SupportPoint) -> Vec<String> {
        let mut v = npk_values(&p.npk);
        v.push(format!("{:?}", p.mode).to_lowercase());
        v.push(if p.planted { "planted" } else { "cells" }.into());
        v
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec!["phases_scanned", "nonzero_phases", "violation_count"]
    }
    fn validate(p: &SupportPoint) -> Result<()> {
        rp(&p.npk)?;
        if p.mode == SupportMode::U1 && p.planted {
            return Err(Error::Precondition("the u1 mode has no planted variant".into()));
        }
        Ok(())
    }
    fn run(p: &SupportPoint, ctx: &Ctx) -> Result<Outcome> {
        let params = rp(&p.npk)?;
        if p.mode == SupportMode::U1 {
            let r = u1_vanishing_check(params, &ctx.limits)?;
            let nonzero = r.violations.len() + r.nonzero_allowed.len();
            return Ok(Outcome::row(
                vec![r.phases.to_string(), nonzero.to_string(), r.violations.len().to_string()],
                to_value(&r),
                !r.violations.is_empty(),
            ));
        }
        let mode = match p.mode {
            SupportMode::Exhaustive => ScanMode::Exhaustive,
            SupportMode::Restricted => ScanMode::Restricted,
            _ => ScanMode::Sampled {
                count: p.samples,
                seed: ctx.seed,
            },
        };
        let r = if p.planted {
            support_scan(&SyntheticSupport::planted(params), mode, &ctx.limits)?
        } else {
            let table = CellTable::shared(params, &ctx.limits)?;
            support_scan(table.as_ref(), mode, &ctx.limits)?
        };
        Ok(Outcome::row(
            vec![
                r.phases_scanned.to_string(),
                r.nonzero_phases.to_string(),
                r.violation_count.to_string(),
            ],
            to_value(&r),
            r.violation_count > 0,
        ))
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "k",
            ys: vec!["nonzero_phases", "violation_count"],
            logx: false,
            logy: false,
        }
    }
}

// valuation-scan

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ValuationScan {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: NpkGrid,
}

impl Sweep for ValuationScan {
    const NAME: &'static str = "valuation-scan";
    type Point = Npk;

    fn points(&self) -> std::result::Result<Vec<Npk>, String> {
        self.grid.points()
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n", "p", "k"]
    }
    fn param_values(p: &Npk) -> Vec<String> {
        npk_values(p)
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec!["method", "points_checked", "violation_count"]
    }
    fn validate(p: &Npk) -> Result<()> {
        rp(p).map(|_| ())
    }
    fn run(p: &Npk, ctx: &Ctx) -> Result<Outcome> {
        let r = valuation_ap_check(rp(p)?, &ctx.limits)?;
        Ok(Outcome::row(
            vec![r.method.clone(), r.points_checked.to_string(), r.violation_count.to_string()],
            to_value(&r),
            r.violation_count > 0,
        ))
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "k",
            ys: vec!["points_checked"],
            logx: false,
            logy: true,
        }
    }
}

// magnitude-scan

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MagnitudeScan {
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [6usize])]
    pub n: Vec<usize>,
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [2u64])]
    pub p: Vec<u64>,
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [1u32, 2, 3])]
    pub k: Vec<u32>,
    /// Restrict to these `v_p(u2)`; all by default.
    #[arg(long, value_delimiter = ',')]
    pub u2_val: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MagnitudePoint {
    #[serde(flatten)]
    pub npk: Npk,
    pub u2_val: Option<Vec<u32>>,
}

impl Sweep for MagnitudeScan {
    const NAME: &'static str = "magnitude-scan";
    type Point = MagnitudePoint;

    fn points(&self) -> std::result::Result<Vec<MagnitudePoint>, String> {
        let grid = NpkGrid {
            n: self.n.clone(),
            p: self.p.clone(),
            k: self.k.clone(),
        };
        Ok(grid
            .points()?
            .into_iter()
            .map(|npk| MagnitudePoint {
                npk,
                u2_val: self.u2_val.clone(),
            })
            .collect())
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n", "p", "k"]
    }
    fn param_values(p: &MagnitudePoint) -> Vec<String> {
        npk_values(&p.npk)
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec![
            "u2_val",
            "phases",
            "nonzero_phases",
            "max_abs",
            "max_abs_error",
            "log_p_max",
            "log_p_bound",
            "log_gap",
            "exploratory",
        ]
    }
    fn validate(p: &MagnitudePoint) -> Result<()> {
        let r = rp(&p.npk)?;
        if r.n < 2 {
            return Err(Error::Precondition("magnitude scans need n >= 2".into()));
        }
        Ok(())
    }
    fn run(p: &MagnitudePoint, ctx: &Ctx) -> Result<Outcome> {
        let recs = magnitude_scaling(p.npk.n, p.npk.p, &[p.npk.k], p.u2_val.as_deref(), &ctx.limits)?;
        let rows = recs
            .iter()
            .map(|r| {
                vec![
                    r.u2_val.to_string(),
                    r.phases.to_string(),
                    r.nonzero_phases.to_string(),
                    fmt_f64(r.max_abs),
                    fmt_f64(r.max_abs_error),
                    fmt_opt_f64(r.log_p_max),
                    fmt_f64(r.log_p_bound),
                    fmt_opt_f64(r.log_gap),
                    r.exploratory.to_string(),
                ]
            })
            .collect();
        Ok(Outcome {
            rows,
            detail: to_value(&recs),
            violation: false,
        })
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "u2_val",
            ys: vec!["log_p_max", "log_p_bound"],
            logx: false,
            logy: false,
        }
    }
}

// relations

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Relations {
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [3usize, 4, 5])]
    pub n: Vec<usize>,
    /// Random polynomials per degree.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Coefficient bound for the random polynomials.
    #[arg(long, default_value_t = 50)]
    pub bound: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationPoint {
    pub n: usize,
    pub trials: u64,
    pub bound: i64,
}

impl Sweep for Relations {
    const NAME: &'static str = "relations";
    type Point = RelationPoint;

    fn points(&self) -> std::result::Result<Vec<RelationPoint>, String> {
        nonempty("n", &self.n)?;
        Ok(self
            .n
            .iter()
            .map(|&n| RelationPoint {
                n,
                trials: self.trials,
                bound: self.bound,
            })
            .collect())
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n", "trials", "bound"]
    }
    fn param_values(p: &RelationPoint) -> Vec<String> {
        vec![p.n.to_string(), p.trials.to_string(), p.bound.to_string()]
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec![
            "pair_checks",
            "pair_failures",
            "translation_failures",
            "zero_disc_skipped",
            "symbolic_verified",
        ]
    }
    fn validate(p: &RelationPoint) -> Result<()> {
        if p.n < 3 || p.bound < 1 {
            return Err(Error::Precondition("relations need n >= 3 and bound >= 1".into()));
        }
        Ok(())
    }
    fn run(p: &RelationPoint, ctx: &Ctx) -> Result<Outcome> {
        let r = check_pair_relation(p.n, p.trials, p.bound, ctx.seed)?;
        Ok(Outcome::row(
            vec![
                r.pair_checks.to_string(),
                r.pair_divisibility_failures.len().to_string(),
                r.translation_failures.len().to_string(),
                r.zero_disc_skipped.to_string(),
                r.symbolic_verified.map(|b| b.to_string()).unwrap_or_default(),
            ],
            to_value(&r),
            !r.passed(),
        ))
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "n",
            ys: vec!["pair_checks"],
            logx: false,
            logy: false,
        }
    }
}

// resultant-structure

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ResultantStructure {
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [3usize, 4])]
    pub n: Vec<usize>,
}

impl Sweep for ResultantStructure {
    const NAME: &'static str = "resultant-structure";
    type Point = usize;

    fn points(&self) -> std::result::Result<Vec<usize>, String> {
        nonempty("n", &self.n)?;
        Ok(self.n.clone())
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n"]
    }
    fn param_values(p: &usize) -> Vec<String> {
        vec![p.to_string()]
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec![
            "alpha_n",
            "alpha_formula",
            "disc_cn1_degree",
            "g2_terms",
            "g2_cn_degree",
            "g2_leading",
            "passed",
        ]
    }
    fn validate(p: &usize) -> Result<()> {
        if !(3..=5).contains(p) {
            return Err(Error::Precondition(format!("resultant structure needs 3 <= n <= 5, got {p}")));
        }
        Ok(())
    }
    fn run(p: &usize, _ctx: &Ctx) -> Result<Outcome> {
        if *p == 5 {
            // g2 is out of reach here; the leading coefficient alone
            let a = alpha_structure(5)?;
            return Ok(Outcome::row(
                vec![
                    a.alpha_n.to_string(),
                    alpha_formula(5).to_string(),
                    a.disc_cn1_degree.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    a.passed().to_string(),
                ],
                to_value(&a),
                !a.passed(),
            ));
        }
        let r = resultant_structure(*p)?;
        let mut detail = to_value(&r);
        // the full g2 is large; keep its size only
        if let Some(obj) = detail.as_object_mut() {
            obj.remove("g2");
        }
        Ok(Outcome::row(
            vec![
                r.alpha_n.to_string(),
                r.alpha_formula.to_string(),
                r.disc_cn1_degree.to_string(),
                r.g2_terms.to_string(),
                r.g2_cn_degree.map(|d| d.to_string()).unwrap_or_default(),
                r.g2_leading_constant.as_ref().map(|c| c.to_string()).unwrap_or_default(),
                r.passed().to_string(),
            ],
            detail,
            !r.passed(),
        ))
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "n",
            ys: vec!["g2_terms"],
            logx: false,
            logy: true,
        }
    }
}

// mc-density

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct McDensity {
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [2usize, 3, 4])]
    pub n: Vec<usize>,
    /// Thresholds; defaults to `2^-4, ..., 2^-12`.
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McPoint {
    pub n: usize,
    pub deltas: Vec<f64>,
    pub samples: u64,
}

pub fn default_deltas() -> Vec<f64> {
    (4..=12).map(|e| 2f64.powi(-e)).collect()
}

impl Sweep for McDensity {
    const NAME: &'static str = "mc-density";
    type Point = McPoint;

    fn points(&self) -> std::result::Result<Vec<McPoint>, String> {
        nonempty("n", &self.n)?;
        let deltas = self.delta.clone().unwrap_or_else(default_deltas);
        nonempty("delta", &deltas)?;
        Ok(self
            .n
            .iter()
            .map(|&n| McPoint {
                n,
                deltas: deltas.clone(),
                samples: self.samples,
            })
            .collect())
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n", "samples"]
    }
    fn param_values(p: &McPoint) -> Vec<String> {
        vec![p.n.to_string(), p.samples.to_string()]
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec!["delta", "mean", "half_width", "slope", "expected_slope"]
    }
    fn validate(p: &McPoint) -> Result<()> {
        if p.n < 2 || p.samples == 0 {
            return Err(Error::Precondition("mc-density needs n >= 2 and samples > 0".into()));
        }
        if p.deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
            return Err(Error::Precondition("every delta must lie in (0, 1)".into()));
        }
        Ok(())
    }
    fn run(p: &McPoint, ctx: &Ctx) -> Result<Outcome> {
        let s = mc_density_sweep(p.n, &p.deltas, p.samples, ctx.seed)?;
        let fit = if p.deltas.len() >= 2 { fit_slope(&s).ok() } else { None };
        let rows = s
            .deltas
            .iter()
            .zip(&s.estimates)
            .map(|(&d, e)| {
                vec![
                    fmt_f64(d),
                    fmt_f64(e.mean),
                    fmt_f64(e.half_width),
                    fmt_opt_f64(fit.as_ref().map(|f| f.slope)),
                    fmt_opt_f64(fit.as_ref().map(|f| f.expected)),
                ]
            })
            .collect();
        Ok(Outcome {
            rows,
            detail: json!({ "sweep": to_value(&s), "fit": to_value(&fit) }),
            violation: false,
        })
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "delta",
            ys: vec!["mean"],
            logx: true,
            logy: true,
        }
    }
}

// measure-check

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MeasureCheck {
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [2usize])]
    pub n: Vec<usize>,
    /// Test functions: `zero`, `one`, `neg_disc`.
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = ["one".to_string(), "neg_disc".to_string()])]
    pub testfn: Vec<String>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurePoint {
    pub n: usize,
    pub testfn: String,
    pub samples: u64,
}

impl Sweep for MeasureCheck {
    const NAME: &'static str = "measure-check";
    type Point = MeasurePoint;

    fn points(&self) -> std::result::Result<Vec<MeasurePoint>, String> {
        nonempty("n", &self.n)?;
        nonempty("testfn", &self.testfn)?;
        let mut out = Vec::new();
        for &n in &self.n {
            for t in &self.testfn {
                out.push(MeasurePoint {
                    n,
                    testfn: t.clone(),
                    samples: self.samples,
                });
            }
        }
        Ok(out)
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n", "testfn", "samples"]
    }
    fn param_values(p: &MeasurePoint) -> Vec<String> {
        vec![p.n.to_string(), p.testfn.clone(), p.samples.to_string()]
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec!["lhs", "lhs_half_width", "rhs", "rhs_half_width", "agrees"]
    }
    fn validate(p: &MeasurePoint) -> Result<()> {
        TestFn::parse(&p.testfn)?;
        if p.n < 2 || p.samples == 0 {
            return Err(Error::Precondition("measure-check needs n >= 2 and samples > 0".into()));
        }
        Ok(())
    }
    fn run(p: &MeasurePoint, ctx: &Ctx) -> Result<Outcome> {
        let r = measure_change_check(p.n, &TestFn::parse(&p.testfn)?, p.samples, ctx.seed)?;
        Ok(Outcome::row(
            vec![
                fmt_f64(r.lhs.mean),
                fmt_f64(r.lhs.half_width),
                fmt_f64(r.rhs_total.mean),
                fmt_f64(r.rhs_total.half_width),
                r.agrees.to_string(),
            ],
            to_value(&r),
            false,
        ))
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "n",
            ys: vec!["lhs", "rhs"],
            logx: false,
            logy: false,
        }
    }
}

// enumerate-small-disc

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EnumerateSmallDisc {
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [2usize])]
    pub n: Vec<usize>,
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [2u64])]
    pub height: Vec<u64>,
    /// Shrink factors `Y` (rationals, or `inf` for `disc = 0`).
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = ["1".to_string()])]
    pub y: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxPoint {
    pub n: usize,
    pub height: u64,
    pub y: String,
}

fn box_points(n: &[usize], h: &[u64], y: &[String]) -> std::result::Result<Vec<BoxPoint>, String> {
    nonempty("n", n)?;
    nonempty("height", h)?;
    nonempty("y", y)?;
    Ok(product3(n, h, y)
        .into_iter()
        .map(|(n, height, y)| BoxPoint { n, height, y })
        .collect())
}

fn box_spec(p: &BoxPoint) -> Result<BoxSpec> {
    BoxSpec::new(p.n, p.height, shrink_of(&p.y)?)
}

impl Sweep for EnumerateSmallDisc {
    const NAME: &'static str = "enumerate-small-disc";
    type Point = BoxPoint;

    fn points(&self) -> std::result::Result<Vec<BoxPoint>, String> {
        box_points(&self.n, &self.height, &self.y)
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n", "height", "y"]
    }
    fn param_values(p: &BoxPoint) -> Vec<String> {
        vec![p.n.to_string(), p.height.to_string(), p.y.clone()]
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec!["count", "box_points"]
    }
    fn validate(p: &BoxPoint) -> Result<()> {
        box_spec(p).map(|_| ())
    }
    fn run(p: &BoxPoint, ctx: &Ctx) -> Result<Outcome> {
        let spec = box_spec(p)?;
        let count = enumerate_small_disc(&spec, ctx.limits.box_budget)?;
        Ok(Outcome::row(
            vec![count.to_string(), fmt_f64(spec.box_points())],
            json!({ "count": count }),
            false,
        ))
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "height",
            ys: vec!["count"],
            logx: true,
            logy: true,
        }
    }
}

// davenport

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Davenport {
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [2usize])]
    pub n: Vec<usize>,
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [4u64, 8, 16])]
    pub height: Vec<u64>,
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = ["4".to_string()])]
    pub y: Vec<String>,
    /// Monte Carlo samples for the volume.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DavenportPoint {
    #[serde(flatten)]
    pub region: BoxPoint,
    pub samples: u64,
}

impl Sweep for Davenport {
    const NAME: &'static str = "davenport";
    type Point = DavenportPoint;

    fn points(&self) -> std::result::Result<Vec<DavenportPoint>, String> {
        Ok(box_points(&self.n, &self.height, &self.y)?
            .into_iter()
            .map(|region| DavenportPoint {
                region,
                samples: self.samples,
            })
            .collect())
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n", "height", "y", "samples"]
    }
    fn param_values(p: &DavenportPoint) -> Vec<String> {
        let mut v = EnumerateSmallDisc::param_values(&p.region);
        v.push(p.samples.to_string());
        v
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec!["count", "volume", "volume_half_width", "proj_bound", "constant"]
    }
    fn validate(p: &DavenportPoint) -> Result<()> {
        let spec = box_spec(&p.region)?;
        if spec.shrink.is_none() || spec.n < 2 {
            return Err(Error::Precondition("davenport needs n >= 2 and a finite Y".into()));
        }
        Ok(())
    }
    fn run(p: &DavenportPoint, ctx: &Ctx) -> Result<Outcome> {
        let r = davenport_check(&box_spec(&p.region)?, p.samples, ctx.seed, ctx.limits.box_budget)?;
        Ok(Outcome::row(
            vec![
                r.count.to_string(),
                fmt_f64(r.volume.mean),
                fmt_f64(r.volume.half_width),
                fmt_f64(r.proj_bound),
                fmt_f64(r.constant),
            ],
            to_value(&r),
            false,
        ))
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "height",
            ys: vec!["constant"],
            logx: true,
            logy: false,
        }
    }
}

// powerful-divisor

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PowerfulDivisor {
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [81u64])]
    pub m: Vec<u64>,
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [2u32])]
    pub k: Vec<u32>,
    /// Explicit `x` values (rationals); otherwise an evenly spaced grid of
    /// the valid range.
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<String>>,
    #[arg(long, default_value_t = 16)]
    pub grid_points: usize,
    /// Replace `--m` by every `m <= UP_TO` meeting `m >= rad(m)^(2k-2)`.
    #[arg(long)]
    pub up_to: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerfulPoint {
    pub m: u64,
    pub k: u32,
    pub x: Option<Vec<String>>,
    pub grid_points: usize,
}

impl Sweep for PowerfulDivisor {
    const NAME: &'static str = "powerful-divisor";
    type Point = PowerfulPoint;

    fn points(&self) -> std::result::Result<Vec<PowerfulPoint>, String> {
        nonempty("k", &self.k)?;
        if let Some(x) = &self.x {
            nonempty("x", x)?;
        }
        if self.grid_points == 0 {
            return Err("--grid-points must be positive".into());
        }
        let mut out = Vec::new();
        let ms: Vec<u64> = match self.up_to {
            Some(top) => (2..=top).collect(),
            None => {
                nonempty("m", &self.m)?;
                self.m.clone()
            }
        };
        for &m in &ms {
            for &k in &self.k {
                if self.up_to.is_some() {
                    let c = BigInt::from(disclab_core::arith::radical(m));
                    if k < 2 || BigInt::from(m) < c.pow(2 * k - 2) {
                        continue;
                    }
                }
                out.push(PowerfulPoint {
                    m,
                    k,
                    x: self.x.clone(),
                    grid_points: self.grid_points,
                });
            }
        }
        Ok(out)
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["m", "k"]
    }
    fn param_values(p: &PowerfulPoint) -> Vec<String> {
        vec![p.m.to_string(), p.k.to_string()]
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec!["x", "d", "branch", "smallest_valid", "valid_count", "valid"]
    }
    fn validate(p: &PowerfulPoint) -> Result<()> {
        for x in powerful_xs(p)? {
            PowerfulQuery::new(p.m, p.k, x)?;
        }
        Ok(())
    }
    fn run(p: &PowerfulPoint, _ctx: &Ctx) -> Result<Outcome> {
        let mut rows = Vec::new();
        let mut detail = Vec::new();
        let mut violation = false;
        for x in powerful_xs(p)? {
            let q = PowerfulQuery::new(p.m, p.k, x.clone())?;
            let valid = q.valid_divisors();
            let r = powerful_divisor(&q)?;
            let ok = valid.binary_search(&r.d).is_ok();
            violation |= !ok;
            rows.push(vec![
                x.to_string(),
                r.d.to_string(),
                to_value(&r.branch).as_str().unwrap_or_default().to_string(),
                valid.first().map(|d| d.to_string()).unwrap_or_default(),
                valid.len().to_string(),
                ok.to_string(),
            ]);
            detail.push(json!({ "x": x.to_string(), "result": to_value(&r), "valid": valid }));
        }
        Ok(Outcome {
            rows,
            detail: serde_json::Value::Array(detail),
            violation,
        })
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "m",
            ys: vec!["d", "smallest_valid"],
            logx: true,
            logy: true,
        }
    }
}

fn powerful_xs(p: &PowerfulPoint) -> Result<Vec<BigRational>> {
    match &p.x {
        Some(xs) => xs.iter().map(|s| parse_rational(s)).collect(),
        None => {
            if p.m < 2 || p.k < 2 {
                return Err(Error::Precondition(format!("need m >= 2 and k >= 2, got m={}, k={}", p.m, p.k)));
            }
            Ok(PowerfulQuery::grid(p.m, p.k, p.grid_points))
        }
    }
}

// classify

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Classify {
    /// Polynomials as colon-separated `c_1:...:c_n`.
    #[arg(long, value_delimiter = ',')]
    pub poly: Option<Vec<String>>,
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [2u64, 3, 5])]
    pub p: Vec<u64>,
    /// Compare both classifier routes on every polynomial mod `p^2` of
    /// these degrees (used when no `--poly` is given).
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [2usize, 3, 4])]
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ClassifyPoint {
    Single { poly: String, p: u64 },
    Exhaustive { n: usize, p: u64 },
}

impl Sweep for Classify {
    const NAME: &'static str = "classify";
    type Point = ClassifyPoint;

    fn points(&self) -> std::result::Result<Vec<ClassifyPoint>, String> {
        nonempty("p", &self.p)?;
        let mut out = Vec::new();
        match &self.poly {
            Some(polys) => {
                nonempty("poly", polys)?;
                for f in polys {
                    for &p in &self.p {
                        out.push(ClassifyPoint::Single { poly: f.clone(), p });
                    }
                }
            }
            None => {
                nonempty("n", &self.n)?;
                for &p in &self.p {
                    for &n in &self.n {
                        out.push(ClassifyPoint::Exhaustive { n, p });
                    }
                }
            }
        }
        Ok(out)
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["mode", "poly", "n", "p"]
    }
    fn param_values(p: &ClassifyPoint) -> Vec<String> {
        match p {
            ClassifyPoint::Single { poly, p } => {
                let n = poly.split(':').count();
                vec!["single".into(), poly.clone(), n.to_string(), p.to_string()]
            }
            ClassifyPoint::Exhaustive { n, p } => vec!["exhaustive".into(), String::new(), n.to_string(), p.to_string()],
        }
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec!["verdict", "polys", "strong", "weak", "not_multiple", "mismatches"]
    }
    fn validate(p: &ClassifyPoint) -> Result<()> {
        let (n, prime) = match p {
            ClassifyPoint::Single { poly, p } => (parse_tuple(poly)?.len(), *p),
            ClassifyPoint::Exhaustive { n, p } => (*n, *p),
        };
        if n == 0 || !disclab_core::arith::is_prime(prime) {
            return Err(Error::Precondition(format!("need n >= 1 and a prime p, got n={n}, p={prime}")));
        }
        Ok(())
    }
    fn run(p: &ClassifyPoint, ctx: &Ctx) -> Result<Outcome> {
        match p {
            ClassifyPoint::Single { poly, p } => {
                let f = MonicIntPoly::from_i64(&parse_tuple(poly)?)?;
                let fast = classify_multiple(&f, *p, ClassifyMode::Gradient, &ctx.limits)?;
                let lifts = classify_multiple(&f, *p, ClassifyMode::Lifts, &ctx.limits)?;
                let agree = fast.verdict == lifts.verdict;
                let verdict = to_value(&fast.verdict).as_str().unwrap_or_default().to_string();
                Ok(Outcome::row(
                    vec![verdict, "1".into(), String::new(), String::new(), String::new(), (!agree as u8).to_string()],
                    json!({ "gradient": to_value(&fast), "lifts": to_value(&lifts) }),
                    !agree,
                ))
            }
            ClassifyPoint::Exhaustive { n, p } => {
                let r = classifier_agreement(*n, *p, &ctx.limits)?;
                Ok(Outcome::row(
                    vec![
                        String::new(),
                        r.polys.to_string(),
                        r.strong.to_string(),
                        r.weak.to_string(),
                        r.not_multiple.to_string(),
                        r.mismatches.len().to_string(),
                    ],
                    to_value(&r),
                    !r.mismatches.is_empty(),
                ))
            }
        }
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "n",
            ys: vec!["strong", "weak"],
            logx: false,
            logy: true,
        }
    }
}

// census

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Census {
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [3usize])]
    pub n: Vec<usize>,
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [4u64])]
    pub height: Vec<u64>,
    /// Lower bound `M` on the squarefree `m`.
    #[arg(long = "min-m", num_args = 0.., value_delimiter = ',', default_values_t = [2u64])]
    pub min_m: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensusPoint {
    pub n: usize,
    pub height: u64,
    pub min_m: u64,
}

impl Sweep for Census {
    const NAME: &'static str = "census";
    type Point = CensusPoint;

    fn points(&self) -> std::result::Result<Vec<CensusPoint>, String> {
        nonempty("n", &self.n)?;
        nonempty("height", &self.height)?;
        nonempty("min-m", &self.min_m)?;
        Ok(product3(&self.n, &self.height, &self.min_m)
            .into_iter()
            .map(|(n, height, min_m)| CensusPoint { n, height, min_m })
            .collect())
    }
    fn param_columns(&self) -> Vec<&'static str> {
        vec!["n", "H", "M"]
    }
    fn param_values(p: &CensusPoint) -> Vec<String> {
        vec![p.n.to_string(), p.height.to_string(), p.min_m.to_string()]
    }
    fn result_columns(&self) -> Vec<&'static str> {
        vec!["m", "strong_count", "weak_count", "mixed_count", "unclassified", "zero_disc"]
    }
    fn validate(p: &CensusPoint) -> Result<()> {
        BoxSpec::new(p.n, p.height, Some(BigRational::one()))?;
        if p.min_m < 2 {
            return Err(Error::Precondition("M must be at least 2".into()));
        }
        Ok(())
    }
    fn run(p: &CensusPoint, ctx: &Ctx) -> Result<Outcome> {
        let r = sieve_census(p.n, p.height, p.min_m, &ctx.limits)?;
        let tail = [r.unclassified.to_string(), r.zero_disc.to_string()];
        let mut rows: Vec<Vec<String>> = r
            .rows
            .iter()
            .map(|row| {
                let mut v = vec![
                    row.m.to_string(),
                    row.strong_count.to_string(),
                    row.weak_count.to_string(),
                    row.mixed_count.to_string(),
                ];
                v.extend(tail.iter().cloned());
                v
            })
            .collect();
        if rows.is_empty() {
            let mut v = vec![String::new(), "0".into(), "0".into(), "0".into()];
            v.extend(tail.iter().cloned());
            rows.push(v);
        }
        let mut detail = to_value(&r);
        if let Some(obj) = detail.as_object_mut() {
            obj.remove("rows");
        }
        Ok(Outcome {
            rows,
            detail,
            violation: !r.inclusion_holds,
        })
    }
    fn plot(&self) -> PlotSpec {
        PlotSpec {
            x: "m",
            ys: vec!["strong_count", "weak_count"],
            logx: true,
            logy: true,
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Exact density of `p^{2k} | disc` over `(Z/p^{2k})^n`.
    Density(Density),
    /// Exact transform of the density at given phases.
    Fourier(Fourier),
    /// Near-progression support check over phases.
    SupportScan(SupportScan),
    /// Near-progression shape of gradient valuations on the support.
    ValuationScan(ValuationScan),
    /// Largest transform over `(u1, u2, 0, ...)` by `v_p(u2)`.
    MagnitudeScan(MagnitudeScan),
    /// Translation identity and pair relations on random polynomials.
    Relations(Relations),
    /// Leading coefficients of the discriminant and its resultant.
    ResultantStructure(ResultantStructure),
    /// Monte Carlo density of `|disc| <= delta` on the unit box.
    McDensity(McDensity),
    /// Coefficient-side and root-side integrals at the real place.
    MeasureCheck(MeasureCheck),
    /// Integer polynomials of height `H` with `|disc| <= H^{n^2-n}/Y`.
    EnumerateSmallDisc(EnumerateSmallDisc),
    /// Lattice count against volume and projection bound.
    Davenport(Davenport),
    /// k-powerful divisors in `[x, Cx]`.
    PowerfulDivisor(PowerfulDivisor),
    /// Strong and weak multiples of `p^2`.
    Classify(Classify),
    /// Counts of strong and weak square divisors over a height box.
    Census(Census),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Density(_) => Density::NAME,
            Command::Fourier(_) => Fourier::NAME,
            Command::SupportScan(_) => SupportScan::NAME,
            Command::ValuationScan(_) => ValuationScan::NAME,
            Command::MagnitudeScan(_) => MagnitudeScan::NAME,
            Command::Relations(_) => Relations::NAME,
            Command::ResultantStructure(_) => ResultantStructure::NAME,
            Command::McDensity(_) => McDensity::NAME,
            Command::MeasureCheck(_) => MeasureCheck::NAME,
            Command::EnumerateSmallDisc(_) => EnumerateSmallDisc::NAME,
            Command::Davenport(_) => Davenport::NAME,
            Command::PowerfulDivisor(_) => PowerfulDivisor::NAME,
            Command::Classify(_) => Classify::NAME,
            Command::Census(_) => Census::NAME,
        }
    }
}
