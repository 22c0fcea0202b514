//! Densities, support and valuation scans, Parseval and magnitude sweeps.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{residue_valuation, truncated_valuation};
use crate::error::{Error, Result};
use crate::polycore::{grad_disc, MonicIntPoly};
use crate::sampling::{map_chunks, substream};
use crate::Limits;

use super::cells::{CellIndex, CellTable};
use super::direct::DirectSupport;
use super::{histogram_is_zero, is_near_ap, FourierSource, Magnitude, ResidueParams};

const SCAN_CHUNK: u64 = 1 << 12;
/// Violation lists are truncated to this many entries (counts are not).
pub const MAX_LISTED: usize = 1000;

fn vp_of(n: usize, p: u64) -> u32 {
    let mut v = 0;
    let mut m = n as u64;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    v
}

fn decode(mut idx: u64, radix: u64, out: &mut [u64]) {
    for x in out.iter_mut() {
        *x = idx % radix;
        idx /= radix;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    pub params: ResidueParams,
    pub count: u64,
    /// The density is `count / p^modulus_exp`.
    pub modulus_exp: u32,
    #[serde(with = "crate::serde_util::decimal")]
    pub density_num: BigInt,
    #[serde(with = "crate::serde_util::decimal")]
    pub density_den: BigInt,
    pub method: String,
    /// Support count by direct enumeration, when it was run.
    pub oracle_count: Option<u64>,
}

impl DensityReport {
    pub fn density(&self) -> BigRational {
        BigRational::new(self.density_num.clone(), self.density_den.clone())
    }
}

/// `#{c mod p^{2k} : p^{2k} | disc} / p^{2kn}`, through coset cells when
/// they fit the budget and by enumeration otherwise. With `oracle` the
/// enumeration is also run when affordable and must agree.
pub fn density_exact(rp: ResidueParams, limits: &Limits, oracle: bool) -> Result<DensityReport> {
    let direct_ok = rp.log2_space() <= limits.direct_bits as f64 + 1e-9;
    let (count, method) = if rp.log2_cells() <= limits.coset_bits as f64 + 1e-9 {
        (CellTable::shared(rp, limits)?.support_count() as u64, "coset")
    } else if direct_ok {
        (DirectSupport::build(rp, limits)?.count(), "direct")
    } else {
        return Err(Error::Capacity {
            what: "density: coset cells p^(kn)",
            needed_log2: rp.log2_cells(),
            limit_log2: limits.coset_bits,
        });
    };
    let oracle_count = if oracle && direct_ok {
        let c = if method == "direct" {
            count
        } else {
            DirectSupport::build(rp, limits)?.count()
        };
        if c != count {
            return Err(Error::Consistency(format!(
                "density count {count} by cells, {c} by enumeration"
            )));
        }
        Some(c)
    } else {
        None
    };
    let modulus_exp = 2 * rp.k * rp.n as u32;
    let d = BigRational::new(BigInt::from(count), BigInt::from(rp.p).pow(modulus_exp));
    Ok(DensityReport {
        params: rp,
        count,
        modulus_exp,
        density_num: d.numer().clone(),
        density_den: d.denom().clone(),
        method: method.into(),
        oracle_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScanMode {
    /// Every phase in `(Z/p^{2k})^n`.
    Exhaustive,
    /// Phases `(u_1, u_2, 0, ..., 0)`.
    Restricted,
    /// Uniform random phases.
    Sampled { count: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportScanReport {
    pub params: ResidueParams,
    pub mode: ScanMode,
    pub phases_scanned: u64,
    pub nonzero_phases: u64,
    pub violation_count: u64,
    /// Up to [`MAX_LISTED`] violating phases, in scan order.
    pub violations: Vec<Vec<u64>>,
}

#[derive(Default)]
struct ChunkTally {
    scanned: u64,
    nonzero: u64,
    violations: u64,
    listed: Vec<Vec<u64>>,
}

fn merge_tallies(parts: Vec<ChunkTally>) -> ChunkTally {
    let mut all = ChunkTally::default();
    for t in parts {
        all.scanned += t.scanned;
        all.nonzero += t.nonzero;
        all.violations += t.violations;
        let room = MAX_LISTED - all.listed.len();
        all.listed.extend(t.listed.into_iter().take(room));
    }
    all
}

/// Checks that every phase with nonzero transform has near-AP truncated
/// valuations.
pub fn support_scan<S: FourierSource>(source: &S, mode: ScanMode, limits: &Limits) -> Result<SupportScanReport> {
    let rp = source.params();
    let m = rp.modulus();
    let log2_m = (m as f64).log2();
    let vp_n = vp_of(rp.n, rp.p);
    let total = match mode {
        ScanMode::Exhaustive => {
            Limits::check("exhaustive phases p^(2kn)", rp.log2_space(), limits.exhaustive_bits)?;
            m.pow(rp.n as u32)
        }
        ScanMode::Restricted => {
            let free = rp.n.min(2) as f64;
            Limits::check("restricted phases p^(4k)", free * log2_m, limits.exhaustive_bits)?;
            m.pow(rp.n.min(2) as u32)
        }
        ScanMode::Sampled { count, .. } => count,
    };
    let parts = map_chunks(total, SCAN_CHUNK, |ci, start, len| {
        let mut tally = ChunkTally::default();
        let mut hist = vec![0u64; m as usize];
        let mut u = vec![0u64; rp.n];
        let mut rng = match mode {
            ScanMode::Sampled { seed, .. } => Some(substream(seed, ci)),
            _ => None,
        };
        let mut vals = vec![0u32; rp.n];
        for idx in start..start + len {
            match (&mode, rng.as_mut()) {
                (ScanMode::Exhaustive, _) => decode(idx, m, &mut u),
                (ScanMode::Restricted, _) => {
                    let free = rp.n.min(2);
                    decode(idx, m, &mut u[..free]);
                }
                (_, Some(r)) => u.iter_mut().for_each(|x| *x = r.random_range(0..m)),
                _ => unreachable!(),
            }
            tally.scanned += 1;
            source.histogram_into(&u, &mut hist);
            if histogram_is_zero(&hist, rp.p) {
                continue;
            }
            tally.nonzero += 1;
            for (v, &x) in vals.iter_mut().zip(&u) {
                *v = residue_valuation(x, rp.p, rp.k);
            }
            if !is_near_ap(&vals, rp.k, vp_n) {
                tally.violations += 1;
                if tally.listed.len() < MAX_LISTED {
                    tally.listed.push(u.clone());
                }
            }
        }
        tally
    });
    let all = merge_tallies(parts);
    Ok(SupportScanReport {
        params: rp,
        mode,
        phases_scanned: all.scanned,
        nonzero_phases: all.nonzero,
        violation_count: all.violations,
        violations: all.listed,
    })
}

/// An arbitrary support set, for exercising the scanners.
#[derive(Debug, Clone)]
pub struct SyntheticSupport {
    pub params: ResidueParams,
    pub points: Vec<Vec<u64>>,
}

impl SyntheticSupport {
    /// The single point `(1, 0, ..., 0)`: its transform never vanishes, so
    /// every phase with non-near-AP valuations is reported.
    pub fn planted(rp: ResidueParams) -> SyntheticSupport {
        let mut c = vec![0u64; rp.n];
        c[0] = 1;
        SyntheticSupport {
            params: rp,
            points: vec![c],
        }
    }
}

impl FourierSource for SyntheticSupport {
    fn params(&self) -> ResidueParams {
        self.params
    }

    fn histogram_into(&self, u: &[u64], hist: &mut [u64]) {
        hist.fill(0);
        let m = self.params.modulus() as u128;
        for c in &self.points {
            let j = c
                .iter()
                .zip(u)
                .fold(0u128, |acc, (&x, &y)| (acc + x as u128 * y as u128) % m);
            hist[j as usize] += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationViolation {
    pub point: Vec<u64>,
    pub truncated: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationScanReport {
    pub params: ResidueParams,
    /// `exhaustive` (every support point mod `p^{2k}`) or `cells` (one
    /// representative per solvable cell; truncated valuations are constant
    /// on cells).
    pub method: String,
    /// Support points covered.
    pub points_checked: u64,
    pub violation_count: u64,
    pub violations: Vec<ValuationViolation>,
}

fn truncated_gradient(c: &[u64], p: u64, k: u32) -> Vec<u32> {
    let f = MonicIntPoly::new(c.iter().map(|&x| BigInt::from(x)).collect()).expect("nonempty");
    grad_disc(&f)
        .partials
        .iter()
        .map(|d| truncated_valuation(d, p, k))
        .collect()
}

/// Checks that `min(v_p(D_i(c)), k)` is a near arithmetic progression at
/// every support point, using exact integer gradients.
pub fn valuation_ap_check(rp: ResidueParams, limits: &Limits) -> Result<ValuationScanReport> {
    let vp_n = vp_of(rp.n, rp.p);
    let mut violations = Vec::new();
    let mut violation_count = 0u64;
    let mut record = |point: &[u64], t: Vec<u32>| {
        if !is_near_ap(&t, rp.k, vp_n) {
            violation_count += 1;
            if violations.len() < MAX_LISTED {
                violations.push(ValuationViolation {
                    point: point.to_vec(),
                    truncated: t,
                });
            }
        }
    };
    if rp.log2_space() <= limits.exhaustive_bits as f64 + 1e-9 {
        let direct = DirectSupport::build(rp, &Limits { direct_bits: limits.exhaustive_bits, ..*limits })?;
        let pts: Vec<Vec<u64>> = direct.points().map(|c| c.iter().map(|&x| x as u64).collect()).collect();
        let results = map_chunks(pts.len() as u64, 256, |_, start, len| {
            (start..start + len)
                .map(|i| truncated_gradient(&pts[i as usize], rp.p, rp.k))
                .collect::<Vec<_>>()
        });
        for (c, t) in pts.iter().zip(results.into_iter().flatten()) {
            record(c, t);
        }
        return Ok(ValuationScanReport {
            params: rp,
            method: "exhaustive".into(),
            points_checked: pts.len() as u64,
            violation_count,
            violations,
        });
    }
    let table = CellTable::shared(rp, limits)?;
    let cells: Vec<_> = table.solvable().collect();
    let results = map_chunks(cells.len() as u64, 256, |_, start, len| {
        (start..start + len)
            .map(|i| truncated_gradient(&cells[i as usize].rep, rp.p, rp.k))
            .collect::<Vec<_>>()
    });
    let mut points = 0u64;
    for (cell, t) in cells.iter().zip(results.into_iter().flatten()) {
        let local: Vec<u32> = cell.grad.iter().map(|&d| residue_valuation(d, rp.p, rp.k)).collect();
        if local != t {
            return Err(Error::Consistency(format!(
                "cell {:?}: local gradient valuations {local:?}, integer {t:?}",
                cell.rep
            )));
        }
        points += cell.lift_count(&rp);
        record(&cell.rep, t);
    }
    Ok(ValuationScanReport {
        params: rp,
        method: "cells".into(),
        points_checked: points,
        violation_count,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub params: ResidueParams,
    /// `p^{2k} / gcd(p^{2k}, n)`.
    pub divisor: u64,
    pub phases: u64,
    /// Phases `u_1` not divisible by `divisor` (where vanishing is claimed).
    pub claimed_zero: u64,
    /// Claimed-zero phases whose transform is nonzero.
    pub violations: Vec<u64>,
    /// `u_1` values divisible by `divisor` with nonzero transform (allowed).
    pub nonzero_allowed: Vec<u64>,
}

/// Exact test of `psi^((u_1, 0, ..., 0)) = 0` for every `u_1` with
/// `p^{2k}/gcd(p^{2k}, n)` not dividing `u_1`.
pub fn u1_vanishing_check(rp: ResidueParams, limits: &Limits) -> Result<VanishingReport> {
    let index = CellIndex::build(rp, limits)?;
    let m = rp.modulus();
    let divisor = m / m.gcd(&(rp.n as u64));
    let mut report = VanishingReport {
        params: rp,
        divisor,
        phases: m,
        claimed_zero: 0,
        violations: Vec::new(),
        nonzero_allowed: Vec::new(),
    };
    let mut u = vec![0u64; rp.n];
    for u1 in 0..m {
        u[0] = u1;
        let zero = index.transform(&u).is_zero();
        if u1 % divisor != 0 {
            report.claimed_zero += 1;
            if !zero {
                report.violations.push(u1);
            }
        } else if !zero {
            report.nonzero_allowed.push(u1);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsevalReport {
    pub params: ResidueParams,
    pub phases: u64,
    pub support_count: u64,
    /// Constant term of `sum_u |H(u)|^2` reduced modulo the cyclotomic
    /// polynomial, where `H(u) = p^{2kn} psi^(u)`.
    #[serde(with = "crate::serde_util::decimal")]
    pub lhs_constant: BigInt,
    /// Whether every non-constant reduced coefficient vanished.
    pub lhs_is_rational: bool,
    /// `p^{2kn} * support_count`.
    #[serde(with = "crate::serde_util::decimal")]
    pub rhs: BigInt,
    /// `sum_u |psi^(u)|^2` as a fraction, when rational.
    pub lhs_value: Option<String>,
    pub density: String,
    pub holds: bool,
}

/// `sum_u |psi^(u)|^2 = psi^(0)` in exact cyclotomic arithmetic over every
/// phase.
pub fn parseval_check<S: FourierSource>(source: &S, limits: &Limits) -> Result<ParsevalReport> {
    let rp = source.params();
    Limits::check("Parseval phases p^(2kn)", rp.log2_space(), limits.exhaustive_bits)?;
    let m = rp.modulus();
    let total = m.pow(rp.n as u32);
    let parts = map_chunks(total, SCAN_CHUNK, |_, start, len| {
        let mut auto = vec![0u128; m as usize];
        let mut hist = vec![0u64; m as usize];
        let mut u = vec![0u64; rp.n];
        let mut nz: Vec<(usize, u64)> = Vec::new();
        for idx in start..start + len {
            decode(idx, m, &mut u);
            source.histogram_into(&u, &mut hist);
            nz.clear();
            nz.extend(hist.iter().enumerate().filter(|(_, &h)| h != 0).map(|(j, &h)| (j, h)));
            // |H|^2 = sum_{j,l} h_j h_l zeta^{j-l}
            for &(j, a) in &nz {
                for &(l, b) in &nz {
                    let d = (j + m as usize - l) % m as usize;
                    auto[d] += a as u128 * b as u128;
                }
            }
        }
        auto
    });
    let mut auto = vec![0u128; m as usize];
    for part in parts {
        for (a, b) in auto.iter_mut().zip(part) {
            *a += b;
        }
    }
    let reduced = reduce_wide(&auto, rp.p);
    let support = source.transform(&vec![0u64; rp.n]).support_count() as u64;
    let lhs_constant = BigInt::from(reduced[0]);
    let lhs_is_rational = reduced[1..].iter().all(|&x| x == 0);
    let scale = BigInt::from(m).pow(rp.n as u32);
    let rhs = &scale * BigInt::from(support);
    let density = BigRational::new(BigInt::from(support), scale.clone());
    let lhs_value = lhs_is_rational.then(|| BigRational::new(lhs_constant.clone(), &scale * &scale));
    Ok(ParsevalReport {
        params: rp,
        phases: total,
        support_count: support,
        holds: lhs_is_rational && lhs_constant == rhs && lhs_value.as_ref() == Some(&density),
        lhs_value: lhs_value.map(|v| v.to_string()),
        density: density.to_string(),
        lhs_constant,
        lhs_is_rational,
        rhs,
    })
}

fn reduce_wide(coeffs: &[u128], p: u64) -> Vec<i128> {
    let m = coeffs.len();
    let block = m / p as usize;
    let deg = m - block;
    let mut out: Vec<i128> = coeffs[..deg].iter().map(|&x| x as i128).collect();
    for (r, &h) in coeffs[deg..].iter().enumerate() {
        for i in 0..p as usize - 1 {
            out[i * block + r] -= h as i128;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub n: usize,
    pub p: u64,
    pub k: u32,
    pub u2_val: u32,
    /// `2 ell = 2k - v_p(u_2)`.
    pub ell_twice: u32,
    pub ell: f64,
    pub max_abs: f64,
    pub max_abs_error: f64,
    /// `log_p max_abs`; `None` when every scanned phase vanished.
    pub log_p_max: Option<f64>,
    /// `p^{-2nk/3} gcd(u_2, p^{2k})^{n/3}`.
    pub bound_rhs: f64,
    pub log_p_bound: f64,
    /// `log_p max_abs - log_p bound_rhs`.
    pub log_gap: Option<f64>,
    pub phases: u64,
    pub nonzero_phases: u64,
    pub witness: Option<Vec<u64>>,
    /// Outside `n >= 6, k >= 3`.
    pub exploratory: bool,
}

/// Maximum of `|psi^((u_1, u_2, 0, ..., 0))|` over all `u_1` and all `u_2`
/// of each requested valuation (default: every valuation below `2k`).
pub fn magnitude_scaling(
    n: usize,
    p: u64,
    ks: &[u32],
    u2_vals: Option<&[u32]>,
    limits: &Limits,
) -> Result<Vec<ScalingRecord>> {
    if n < 2 {
        return Err(Error::Precondition("magnitude scan needs n >= 2".into()));
    }
    let mut out = Vec::new();
    for &k in ks {
        let rp = ResidueParams::new(n, p, k)?;
        let index = CellIndex::build(rp, limits)?;
        let m = rp.modulus();
        let vals: Vec<u32> = match u2_vals {
            Some(v) => v.iter().copied().filter(|&v| v < 2 * k).collect(),
            None => (0..2 * k).collect(),
        };
        for v in vals {
            let pv = p.pow(v);
            let u2s: Vec<u64> = (1..m / pv).filter(|t| t % p != 0).map(|t| t * pv).collect();
            let phases = m * u2s.len() as u64;
            let results = map_chunks(phases, SCAN_CHUNK, |_, start, len| {
                let mut best: Option<(Magnitude, Vec<u64>)> = None;
                let mut nonzero = 0u64;
                let mut u = vec![0u64; n];
                for idx in start..start + len {
                    u[0] = idx % m;
                    u[1] = u2s[(idx / m) as usize];
                    if !index.responds(&u) {
                        continue;
                    }
                    let value = index.transform(&u);
                    if value.is_zero() {
                        continue;
                    }
                    nonzero += 1;
                    let mag = value.magnitude();
                    if best.as_ref().is_none_or(|(b, _)| mag.abs > b.abs) {
                        best = Some((mag, u.clone()));
                    }
                }
                (nonzero, best)
            });
            let mut nonzero = 0;
            let mut best: Option<(Magnitude, Vec<u64>)> = None;
            for (nz, b) in results {
                nonzero += nz;
                if let Some((mag, u)) = b {
                    if best.as_ref().is_none_or(|(cur, _)| mag.abs > cur.abs) {
                        best = Some((mag, u));
                    }
                }
            }
            let nf = n as f64;
            let log_p_bound = (-2.0 * nf * k as f64 + v as f64 * nf) / 3.0;
            let lp = (p as f64).ln();
            let (max_abs, max_abs_error, log_p_max, witness) = match best {
                Some((mag, u)) => (
                    mag.abs,
                    mag.error_bound,
                    mag.log2_abs.map(|l| l * 2f64.ln() / lp),
                    Some(u),
                ),
                None => (0.0, 0.0, None, None),
            };
            out.push(ScalingRecord {
                n,
                p,
                k,
                u2_val: v,
                ell_twice: 2 * k - v,
                ell: k as f64 - v as f64 / 2.0,
                max_abs,
                max_abs_error,
                log_p_max,
                bound_rhs: (log_p_bound * lp).exp(),
                log_p_bound,
                log_gap: log_p_max.map(|l| l - log_p_bound),
                phases,
                nonzero_phases: nonzero,
                witness,
                exploratory: n < 6 || k < 3,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFitPoint {
    pub p: u64,
    pub k: u32,
    pub density: f64,
    /// `density * p^{k + 2k/n}`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFit {
    pub n: usize,
    pub points: Vec<DensityFitPoint>,
    /// `(p, k)` pairs beyond the enumeration budget.
    pub skipped: Vec<(u64, u32)>,
    /// Smallest constant with `density <= C_n p^{-k-2k/n}` on the points.
    pub c_n: f64,
}

pub fn density_constant_fit(n: usize, ps: &[u64], ks: &[u32], limits: &Limits) -> Result<DensityFit> {
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &p in ps {
        for &k in ks {
            let rp = ResidueParams::new(n, p, k)?;
            match density_exact(rp, limits, false) {
                Ok(d) => {
                    let density = bigrational_to_f64(&d.density());
                    let exp = k as f64 + 2.0 * k as f64 / n as f64;
                    points.push(DensityFitPoint {
                        p,
                        k,
                        density,
                        ratio: density * (p as f64).powf(exp),
                    });
                }
                Err(Error::Capacity { .. }) => skipped.push((p, k)),
                Err(e) => return Err(e),
            }
        }
    }
    let c_n = points.iter().map(|q| q.ratio).fold(0.0, f64::max);
    Ok(DensityFit {
        n,
        points,
        skipped,
        c_n,
    })
}

fn bigrational_to_f64(x: &BigRational) -> f64 {
    let shift = x.denom().bits() as i64 - x.numer().bits() as i64 + 60;
    let scaled = if shift >= 0 {
        (x.numer() << shift as u64) / x.denom()
    } else {
        x.numer() / (x.denom() << (-shift) as u64)
    };
    let f: f64 = num_traits::ToPrimitive::to_f64(&scaled).unwrap_or(f64::NAN);
    f * 2f64.powi(-(shift as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(n: usize, p: u64, k: u32) -> ResidueParams {
        ResidueParams::new(n, p, k).unwrap()
    }

    #[test]
    fn planted_support_is_detected() {
        let s = SyntheticSupport::planted(rp(3, 2, 1));
        let r = support_scan(&s, ScanMode::Exhaustive, &Limits::default()).unwrap();
        assert!(r.violation_count > 0);
        assert!(r.violations.contains(&vec![0, 1, 0]));
    }

    #[test]
    fn rational_conversion() {
        let x = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!((bigrational_to_f64(&x) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn valuation_routes_agree_on_cells() {
        // forces the cell route and its cross-check against integer gradients
        let limits = Limits {
            exhaustive_bits: 4,
            ..Limits::default()
        };
        let r = valuation_ap_check(rp(3, 2, 2), &limits).unwrap();
        assert_eq!(r.method, "cells");
        let e = valuation_ap_check(rp(3, 2, 2), &Limits::default()).unwrap();
        assert_eq!(e.method, "exhaustive");
        assert_eq!(r.points_checked, e.points_checked);
    }
}
