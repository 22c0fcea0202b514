//! The indicator `psi` of `p^{2k} | disc` on `(Z/p^{2k})^n`, its density and
//! its Fourier transform
//!
//! `psi^(u) = p^{-2kn} sum_{c : p^{2k} | disc(f_c)} e(<c, u> / p^{2k})`.
//!
//! Transforms are kept exactly as histograms over `Z/p^{2k}` (the value is
//! `sum_j h_j zeta^j` with `zeta = e(1/p^{2k})`), so vanishing is decided by
//! reduction modulo the cyclotomic polynomial.

pub mod cells;
pub mod direct;
pub mod scans;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, residue_valuation};
use crate::error::{Error, Result};

pub use cells::{fourier_fast, CellIndex, CellTable, CosetCell};
pub use direct::{fourier_exact, DirectSupport};
pub use scans::{
    density_constant_fit, density_exact, magnitude_scaling, parseval_check, support_scan,
    u1_vanishing_check, valuation_ap_check, DensityFit, DensityReport, ParsevalReport,
    ScalingRecord, ScanMode, SupportScanReport, SyntheticSupport, ValuationScanReport,
    VanishingReport,
};

/// `(n, p, k)`; the ambient ring is `(Z/p^{2k})^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueParams {
    pub n: usize,
    pub p: u64,
    pub k: u32,
}

impl ResidueParams {
    pub fn new(n: usize, p: u64, k: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("degree must be at least 1".into()));
        }
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        if !is_prime(p) {
            return Err(Error::Precondition(format!("{p} is not prime")));
        }
        let fits = p
            .checked_pow(2 * k)
            .is_some_and(|m| m < (1u64 << 63));
        if !fits {
            return Err(Error::Capacity {
                what: "modulus p^(2k)",
                needed_log2: 2.0 * k as f64 * (p as f64).log2(),
                limit_log2: 63,
            });
        }
        Ok(ResidueParams { n, p, k })
    }

    /// `p^{2k}`.
    pub fn modulus(&self) -> u64 {
        self.p.pow(2 * self.k)
    }

    /// `p^k`, the modulus of the coset cells.
    pub fn cell_modulus(&self) -> u64 {
        self.p.pow(self.k)
    }

    /// `log2 p^{2kn}`, the size of the full coefficient space.
    pub fn log2_space(&self) -> f64 {
        2.0 * self.k as f64 * self.n as f64 * (self.p as f64).log2()
    }

    /// `log2 p^{kn}`, the number of coset cells.
    pub fn log2_cells(&self) -> f64 {
        self.k as f64 * self.n as f64 * (self.p as f64).log2()
    }

    /// Reduces a phase vector into `[0, p^{2k})`.
    pub fn phase(&self, raw: &[i64]) -> Result<Vec<u64>> {
        if raw.len() != self.n {
            return Err(Error::Precondition(format!(
                "phase has {} entries, expected {}",
                raw.len(),
                self.n
            )));
        }
        let m = self.modulus() as i128;
        Ok(raw.iter().map(|&x| (x as i128).rem_euclid(m) as u64).collect())
    }
}

/// Something that can produce exact transform histograms.
pub trait FourierSource: Sync {
    fn params(&self) -> ResidueParams;
    /// Writes `h_j` for phase `u` into `hist` (length `p^{2k}`, zeroed by the
    /// callee).
    fn histogram_into(&self, u: &[u64], hist: &mut [u64]);

    fn transform(&self, u: &[u64]) -> FourierValue {
        let rp = self.params();
        let mut hist = vec![0u64; rp.modulus() as usize];
        self.histogram_into(u, &mut hist);
        FourierValue {
            params: rp,
            phase: u.to_vec(),
            histogram: hist,
        }
    }
}

/// `psi^(u) = p^{-2kn} sum_j histogram[j] zeta^j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierValue {
    pub params: ResidueParams,
    pub phase: Vec<u64>,
    pub histogram: Vec<u64>,
}

impl FourierValue {
    /// Number of support points, i.e. `psi^(0) * p^{2kn}`.
    pub fn support_count(&self) -> u128 {
        self.histogram.iter().map(|&h| h as u128).sum()
    }

    /// Coefficients of `sum_j h_j x^j` reduced modulo `Phi_{p^{2k}}`.
    pub fn reduced(&self) -> Vec<i128> {
        cyclotomic_reduce(&self.histogram, self.params.p)
    }

    pub fn is_zero(&self) -> bool {
        histogram_is_zero(&self.histogram, self.params.p)
    }

    /// Histogram of `psi^(-u)`, the complex conjugate.
    pub fn conjugate(&self) -> FourierValue {
        let m = self.histogram.len();
        let mut h = vec![0u64; m];
        for (j, &x) in self.histogram.iter().enumerate() {
            h[(m - j) % m] += x;
        }
        FourierValue {
            params: self.params,
            phase: self
                .phase
                .iter()
                .map(|&x| (m as u64 - x) % m as u64)
                .collect(),
            histogram: h,
        }
    }

    /// Exact value when the phase is zero: the density as a fraction.
    pub fn as_density(&self) -> BigRational {
        let total = BigInt::from(self.params.modulus()).pow(self.params.n as u32);
        BigRational::new(BigInt::from(self.support_count()), total)
    }

    pub fn magnitude(&self) -> Magnitude {
        magnitude(&self.histogram, self.params.p, self.params.n)
    }
}

/// Reduction of `sum_j h_j x^j` (with `j < p^m`) modulo
/// `Phi_{p^m}(x) = sum_{i<p} x^{i p^{m-1}}`.
pub fn cyclotomic_reduce(hist: &[u64], p: u64) -> Vec<i128> {
    let m = hist.len();
    let block = m / p as usize;
    let deg = m - block;
    let mut out: Vec<i128> = hist[..deg].iter().map(|&h| h as i128).collect();
    for (r, &h) in hist[deg..].iter().enumerate() {
        if h == 0 {
            continue;
        }
        // x^{deg + r} = -sum_{i < p-1} x^{i*block + r}
        for i in 0..p as usize - 1 {
            out[i * block + r] -= h as i128;
        }
    }
    out
}

/// Exact zero test of `sum_j h_j zeta^j`.
///
/// Equivalent to the cyclotomic reduction vanishing, which in turn holds iff
/// the histogram is constant along every fiber `{r + i p^{m-1}}`.
pub fn histogram_is_zero(hist: &[u64], p: u64) -> bool {
    let block = hist.len() / p as usize;
    (0..block).all(|r| {
        let first = hist[r];
        (1..p as usize).all(|i| hist[i * block + r] == first)
    })
}

/// `|psi^(u)|` evaluated at 128-bit precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Magnitude {
    pub abs: f64,
    /// `log2 |psi^(u)|`, `None` for an exact zero.
    pub log2_abs: Option<f64>,
    /// Absolute error bound on `abs`: `(sum_j h_j) 2^{-60} / p^{2kn}`.
    pub error_bound: f64,
}

const PRECISION: usize = 128;

type TrigTable = Arc<Vec<(BigFloat, BigFloat)>>;

fn trig_table(m: usize) -> TrigTable {
    static TABLES: OnceLock<Mutex<HashMap<usize, TrigTable>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = tables.lock().unwrap().get(&m) {
        return t.clone();
    }
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().expect("constant cache");
    let two_pi = cc
        .pi(PRECISION + 32, rm)
        .mul(&BigFloat::from_u64(2, PRECISION), PRECISION + 32, rm);
    let step = two_pi.div(&BigFloat::from_u64(m as u64, PRECISION), PRECISION + 32, rm);
    let table: Vec<(BigFloat, BigFloat)> = (0..m)
        .map(|j| {
            let angle = step.mul(&BigFloat::from_u64(j as u64, PRECISION), PRECISION + 32, rm);
            (
                angle.cos(PRECISION, rm, &mut cc),
                angle.sin(PRECISION, rm, &mut cc),
            )
        })
        .collect();
    let table = Arc::new(table);
    tables.lock().unwrap().insert(m, table.clone());
    table
}

/// Nearest `f64` to a finite `BigFloat`.
pub fn bigfloat_to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((words, _, sign, exp, _)) => {
            if x.is_zero() {
                return 0.0;
            }
            // mantissa is 0.1xxx in binary, most significant word last
            let top = *words.last().unwrap() as f64 / 2f64.powi(64);
            let next = if words.len() > 1 {
                words[words.len() - 2] as f64 / 2f64.powi(128)
            } else {
                0.0
            };
            let v = (top + next) * 2f64.powi(exp);
            if sign == astro_float::Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}

pub fn magnitude(hist: &[u64], p: u64, n: usize) -> Magnitude {
    let m = hist.len();
    let total_log2 = n as f64 * (m as f64).log2();
    let count: u128 = hist.iter().map(|&h| h as u128).sum();
    let error_bound = count as f64 * 2f64.powf(-60.0 - total_log2);
    if histogram_is_zero(hist, p) {
        return Magnitude {
            abs: 0.0,
            log2_abs: None,
            error_bound,
        };
    }
    let table = trig_table(m);
    let rm = RoundingMode::ToEven;
    let mut re = BigFloat::from_u64(0, PRECISION);
    let mut im = BigFloat::from_u64(0, PRECISION);
    for (j, &h) in hist.iter().enumerate() {
        if h == 0 {
            continue;
        }
        let w = BigFloat::from_u64(h, PRECISION);
        re = re.add(&w.mul(&table[j].0, PRECISION, rm), PRECISION, rm);
        im = im.add(&w.mul(&table[j].1, PRECISION, rm), PRECISION, rm);
    }
    let sq = re
        .mul(&re, PRECISION, rm)
        .add(&im.mul(&im, PRECISION, rm), PRECISION, rm);
    let raw = bigfloat_to_f64(&sq.sqrt(PRECISION, rm));
    let abs = raw * 2f64.powf(-total_log2);
    Magnitude {
        abs,
        log2_abs: Some(raw.log2() - total_log2),
        error_bound,
    }
}

/// `min(v_p(x), cap)` for a residue.
pub fn truncated(x: u64, p: u64, cap: u32) -> u32 {
    residue_valuation(x, p, cap)
}

/// The two near-arithmetic-progression shapes for a sequence of truncated
/// valuations `t_1, ..., t_n` (each already `min(v, k)`):
/// * decreasing: `t_i = min(t_n + (n-i) a, k)` for some `a >= 0`;
/// * increasing: `t_i = min(t_1 + (i-1) b, k)` for some
///   `0 <= b <= min(v_p(n), k)`.
pub fn is_near_ap(t: &[u32], k: u32, vp_n: u32) -> bool {
    let n = t.len();
    let matches = |anchor: u32, step: u32, dist: &dyn Fn(usize) -> u32| {
        (0..n).all(|i| t[i] == (anchor as u64 + dist(i) as u64 * step as u64).min(k as u64) as u32)
    };
    let vn = t[n - 1];
    let decreasing = (0..=k).any(|a| matches(vn, a, &|i| (n - 1 - i) as u32));
    if decreasing {
        return true;
    }
    let v1 = t[0];
    (0..=vp_n.min(k)).any(|b| matches(v1, b, &|i| i as u32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(ResidueParams::new(2, 4, 1).is_err());
        assert!(ResidueParams::new(2, 2, 40).is_err());
        let rp = ResidueParams::new(6, 2, 3).unwrap();
        assert_eq!(rp.modulus(), 64);
        assert_eq!(rp.phase(&[-1, 0, 0, 0, 0, 65]).unwrap(), vec![63, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn cyclotomic_zero_tests_agree() {
        // 1 + zeta^3 + zeta^6 = 0 for zeta of order 9
        let mut h = vec![0u64; 9];
        h[0] = 1;
        h[3] = 1;
        h[6] = 1;
        assert!(histogram_is_zero(&h, 3));
        assert!(cyclotomic_reduce(&h, 3).iter().all(|&x| x == 0));
        h[1] = 2;
        assert!(!histogram_is_zero(&h, 3));
        assert!(cyclotomic_reduce(&h, 3).iter().any(|&x| x != 0));
    }

    #[test]
    fn magnitude_of_simple_sums() {
        // 1 + zeta_4 has modulus sqrt 2
        let h = vec![1, 1, 0, 0];
        let m = magnitude(&h, 2, 1);
        assert!((m.abs * 4.0 - 2f64.sqrt()).abs() < 1e-15);
        let z = magnitude(&[1, 0, 1, 0], 2, 1);
        assert_eq!(z.log2_abs, None);
    }

    #[test]
    fn near_ap_shapes() {
        assert!(is_near_ap(&[3, 2, 1, 0], 3, 0));
        assert!(is_near_ap(&[3, 3, 2, 0], 3, 0)); // a = 2 truncated
        assert!(!is_near_ap(&[0, 1, 2], 3, 0));
        assert!(is_near_ap(&[0, 1, 2], 3, 1));
        assert!(!is_near_ap(&[1, 0, 1], 2, 5));
        // length two with v1 >= v2 always fits
        for v1 in 0..4 {
            for v2 in 0..=v1 {
                assert!(is_near_ap(&[v1, v2], 3, 0));
            }
        }
    }
}
