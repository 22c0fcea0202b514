//! The real place: Monte Carlo densities of small discriminants in the unit
//! coefficient box, the roots-to-coefficients change of measure, and exact
//! lattice counts against volumes.

use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{discriminant, sym_disc, MonicIntPoly, SparsePoly};
use crate::sampling::{map_chunks, substream};

/// 95% normal quantile.
pub const Z95: f64 = 1.96;
/// Samples per chunk (and per substream).
pub const MC_CHUNK: u64 = 1 << 16;
/// Dyadic sample points are `m / 2^DYADIC_BITS`.
pub const DYADIC_BITS: u32 = 52;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    /// 95% half width from the sample variance.
    pub half_width: f64,
    pub samples: u64,
    pub seed: u64,
}

impl MCEstimate {
    fn from_moments(sum: f64, sum_sq: f64, samples: u64, seed: u64) -> MCEstimate {
        let nf = samples as f64;
        let mean = if samples == 0 { 0.0 } else { sum / nf };
        let var = if samples < 2 {
            0.0
        } else {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        };
        MCEstimate {
            mean,
            half_width: Z95 * (var / nf.max(1.0)).sqrt(),
            samples,
            seed,
        }
    }

    fn scaled(self, factor: f64) -> MCEstimate {
        MCEstimate {
            mean: self.mean * factor,
            half_width: self.half_width * factor.abs(),
            ..self
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.mean - x).abs() <= self.half_width
    }
}

/// `Omega_{H,Y} = {c : |c_i| <= H^i, |disc| <= H^{n^2-n} / Y}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    pub n: usize,
    pub height: u64,
    /// `None` stands for `Y = infinity` (only `disc = 0`).
    pub shrink: Option<BigRational>,
}

impl BoxSpec {
    pub fn new(n: usize, height: u64, shrink: Option<BigRational>) -> Result<BoxSpec> {
        if n == 0 || height == 0 {
            return Err(Error::Precondition("need n >= 1 and H >= 1".into()));
        }
        if let Some(y) = &shrink {
            if *y < BigRational::one() {
                return Err(Error::Precondition("shrink factor Y must be >= 1".into()));
            }
        }
        Ok(BoxSpec { n, height, shrink })
    }

    /// Threshold `delta = 1/Y` on the unit box.
    pub fn delta(&self) -> Option<BigRational> {
        self.shrink.as_ref().map(|y| y.recip())
    }

    /// `|disc| <= H^{n^2-n}/Y` as `|disc| * Y <= H^{n^2-n}`.
    pub fn admits(&self, disc: &BigInt) -> bool {
        match &self.shrink {
            None => disc.is_zero(),
            Some(y) => {
                let bound = BigInt::from(self.height).pow((self.n * self.n - self.n) as u32);
                BigRational::from_integer(disc.abs()) * y <= BigRational::from_integer(bound)
            }
        }
    }

    /// Number of integer points in the coefficient box, `prod (2H^i + 1)`.
    pub fn box_points(&self) -> f64 {
        (1..=self.n)
            .map(|i| 2.0 * (self.height as f64).powi(i as i32) + 1.0)
            .product()
    }
}

/// The real etale algebra `R^a x C^b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaleFactorR {
    pub real: usize,
    pub complex: usize,
}

impl EtaleFactorR {
    /// All `(a, b)` with `a + 2b = n`.
    pub fn signatures(n: usize) -> Vec<EtaleFactorR> {
        (0..=n / 2)
            .map(|b| EtaleFactorR {
                real: n - 2 * b,
                complex: b,
            })
            .collect()
    }

    /// `|disc(K_v)|`: 4 per complex factor (basis `1, i`).
    pub fn disc_abs(&self) -> f64 {
        4f64.powi(self.complex as i32)
    }

    /// `a! b! 2^b`.
    pub fn aut_order(&self) -> f64 {
        let fact = |m: usize| (1..=m).map(|x| x as f64).product::<f64>();
        fact(self.real) * fact(self.complex) * 2f64.powi(self.complex as i32)
    }
}

/// Fast discriminant of real coefficient vectors with a rigorous error
/// bound, backed by exact evaluation on dyadic points.
#[derive(Debug, Clone)]
pub struct DiscEvaluator {
    n: usize,
    terms: Vec<(f64, Vec<u32>)>,
    poly: Arc<SparsePoly>,
    total_degree: u32,
    slack: f64,
}

impl DiscEvaluator {
    pub fn new(n: usize) -> Result<DiscEvaluator> {
        if n < 2 {
            return Err(Error::Precondition("need degree >= 2".into()));
        }
        let poly = sym_disc(n)?;
        let mut terms = Vec::with_capacity(poly.len());
        for (e, c) in poly.terms() {
            let f: f64 = num_traits::ToPrimitive::to_f64(c).expect("finite");
            if BigInt::from(f as i64) != *c {
                return Err(Error::Precondition("discriminant coefficient not exact in f64".into()));
            }
            terms.push((f, e.to_vec()));
        }
        let total_degree = poly.total_degree().unwrap_or(0);
        // per term <= d+1 roundings, summation <= T-1; doubled for safety
        let slack = 2.0 * (total_degree as f64 + terms.len() as f64 + 2.0) * f64::EPSILON;
        Ok(DiscEvaluator {
            n,
            terms,
            poly,
            total_degree,
            slack,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// `(value, error bound)`.
    pub fn eval_f64(&self, c: &[f64]) -> (f64, f64) {
        let mut v = 0.0;
        let mut s = 0.0;
        for (coef, e) in &self.terms {
            let mut t = *coef;
            for (x, &k) in c.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            v += t;
            s += t.abs();
        }
        (v, self.slack * s + f64::MIN_POSITIVE)
    }

    /// `disc(m / 2^52) * 2^{52 d}` exactly, `d` the total degree.
    pub fn eval_dyadic(&self, m: &[i64]) -> BigInt {
        let d = self.total_degree;
        let point: Vec<BigInt> = m.iter().map(|&x| BigInt::from(x)).collect();
        let mut acc = BigInt::zero();
        for (e, c) in self.poly.terms() {
            let mut t = c.clone();
            let mut deg = 0;
            for (x, &k) in point.iter().zip(e.iter()) {
                t *= x.pow(k);
                deg += k;
            }
            acc += t << ((d - deg) * DYADIC_BITS) as usize;
        }
        acc
    }

    /// Exact `|disc(m / 2^52)| <= delta`.
    pub fn dyadic_within(&self, m: &[i64], delta: &BigRational) -> bool {
        let scaled = self.eval_dyadic(m).abs();
        let lhs = BigRational::from_integer(scaled);
        let rhs = delta * BigRational::from_integer(BigInt::one() << (self.total_degree * DYADIC_BITS) as usize);
        lhs <= rhs
    }
}

fn dyadic_sample<R: Rng>(rng: &mut R, m: &mut [i64], c: &mut [f64]) {
    let one = 1i64 << DYADIC_BITS;
    let scale = 1.0 / one as f64;
    for (mi, ci) in m.iter_mut().zip(c.iter_mut()) {
        *mi = rng.random_range(-one..=one);
        *ci = *mi as f64 * scale;
    }
}

/// Per-threshold estimates from one shared sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySweep {
    pub n: usize,
    pub deltas: Vec<f64>,
    pub estimates: Vec<MCEstimate>,
    /// Samples that needed the exact dyadic comparison (summed over deltas).
    pub exact_fallbacks: u64,
}

/// Fraction of `c` uniform in `[-1, 1]^n` (dyadic, 52 bits) with
/// `|disc(f_c)| <= delta`, for each delta, from one sample set.
pub fn mc_density_sweep(n: usize, deltas: &[f64], samples: u64, seed: u64) -> Result<DensitySweep> {
    if deltas.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::Precondition("delta must be positive".into()));
    }
    let eval = DiscEvaluator::new(n)?;
    let exact: Vec<BigRational> = deltas
        .iter()
        .map(|&d| BigRational::from_float(d).expect("finite"))
        .collect();
    let parts = map_chunks(samples, MC_CHUNK, |ci, _, len| {
        let mut rng = substream(seed, ci);
        let mut m = vec![0i64; n];
        let mut c = vec![0f64; n];
        let mut hits = vec![0u64; deltas.len()];
        let mut fallbacks = 0u64;
        for _ in 0..len {
            dyadic_sample(&mut rng, &mut m, &mut c);
            let (v, err) = eval.eval_f64(&c);
            let a = v.abs();
            for (j, &d) in deltas.iter().enumerate() {
                let inside = if a + err <= d {
                    true
                } else if a - err > d {
                    false
                } else {
                    fallbacks += 1;
                    eval.dyadic_within(&m, &exact[j])
                };
                hits[j] += inside as u64;
            }
        }
        (hits, fallbacks)
    });
    let mut hits = vec![0u64; deltas.len()];
    let mut exact_fallbacks = 0;
    for (h, f) in parts {
        for (a, b) in hits.iter_mut().zip(h) {
            *a += b;
        }
        exact_fallbacks += f;
    }
    let estimates = hits
        .iter()
        .map(|&h| MCEstimate::from_moments(h as f64, h as f64, samples, seed))
        .collect();
    Ok(DensitySweep {
        n,
        deltas: deltas.to_vec(),
        estimates,
        exact_fallbacks,
    })
}

pub fn mc_small_disc_density(n: usize, delta: f64, samples: u64, seed: u64) -> Result<MCEstimate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition("delta must lie in (0, 1)".into()));
    }
    Ok(mc_density_sweep(n, &[delta], samples, seed)?.estimates[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// `1/2 + 1/n`.
    pub expected: f64,
}

/// Least-squares slope of `log(density)` against `log(delta)`, over the
/// thresholds with at least one hit.
pub fn fit_slope(sweep: &DensitySweep) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = sweep
        .deltas
        .iter()
        .zip(&sweep.estimates)
        .filter(|(_, e)| e.mean > 0.0)
        .map(|(&d, e)| (d.ln(), e.mean.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Degenerate("need two thresholds with hits".into()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        expected: 0.5 + 1.0 / sweep.n as f64,
    })
}

/// Bounded test functions of `(coefficients, discriminant)`.
#[derive(Clone)]
pub enum TestFn {
    Zero,
    One,
    /// Indicator of `disc < 0`.
    NegativeDisc,
    /// An arbitrary function with a declared bound on `|f|`.
    Bounded {
        name: String,
        bound: f64,
        f: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
    },
}

impl std::fmt::Debug for TestFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

impl TestFn {
    pub fn name(&self) -> String {
        match self {
            TestFn::Zero => "zero".into(),
            TestFn::One => "one".into(),
            TestFn::NegativeDisc => "neg_disc".into(),
            TestFn::Bounded { name, .. } => name.clone(),
        }
    }

    pub fn parse(s: &str) -> Result<TestFn> {
        match s {
            "zero" | "0" => Ok(TestFn::Zero),
            "one" | "1" => Ok(TestFn::One),
            "neg_disc" | "negdisc" => Ok(TestFn::NegativeDisc),
            _ => Err(Error::Parse(format!("unknown test function {s:?}"))),
        }
    }

    fn bound(&self) -> f64 {
        match self {
            TestFn::Bounded { bound, .. } => *bound,
            _ => 1.0,
        }
    }

    fn eval(&self, c: &[f64], disc: f64) -> f64 {
        match self {
            TestFn::Zero => 0.0,
            TestFn::One => 1.0,
            TestFn::NegativeDisc => (disc < 0.0) as u8 as f64,
            TestFn::Bounded { f, .. } => f(c, disc),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureTerm {
    pub signature: EtaleFactorR,
    /// Contribution to the normalized right-hand side.
    pub estimate: MCEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureChangeReport {
    pub n: usize,
    pub testfn: String,
    /// Root box radius `B`.
    pub root_bound: f64,
    pub lhs: MCEstimate,
    pub rhs: Vec<SignatureTerm>,
    pub rhs_total: MCEstimate,
    /// `|lhs - rhs| <= sqrt(hw_lhs^2 + hw_rhs^2)`.
    pub agrees: bool,
}

/// Monic coefficients `(c_1..c_n)` of `prod (x - r_j) prod (x^2 - 2 Re z x + |z|^2)`.
fn coeffs_from_roots(reals: &[f64], complex: &[(f64, f64)]) -> Vec<f64> {
    let mut p = vec![1.0];
    let mut mul = |factor: &[f64]| {
        let mut out = vec![0.0; p.len() + factor.len() - 1];
        for (i, &a) in p.iter().enumerate() {
            for (j, &b) in factor.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        p = out;
    };
    for &r in reals {
        mul(&[1.0, -r]);
    }
    for &(x, y) in complex {
        mul(&[1.0, -2.0 * x, x * x + y * y]);
    }
    p[1..].to_vec()
}

/// `|disc|^{1/2} = prod_{i<j} |lambda_i - lambda_j|` over all roots.
fn sqrt_abs_disc(reals: &[f64], complex: &[(f64, f64)]) -> f64 {
    let mut roots: Vec<(f64, f64)> = reals.iter().map(|&r| (r, 0.0)).collect();
    for &(x, y) in complex {
        roots.push((x, y));
        roots.push((x, -y));
    }
    let mut prod = 1.0;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            prod *= (roots[i].0 - roots[j].0).hypot(roots[i].1 - roots[j].1);
        }
    }
    prod
}

/// Both sides of the change of variables from roots to coefficients, each
/// normalized by the box volume `2^n`:
/// `int_{[-1,1]^n} psi = sum_{(a,b)} |disc K|^{1/2} / |Aut K| *
///  int |disc f_alpha|^{1/2} psi(f_alpha) [f_alpha in box] d alpha`.
pub fn measure_change_check(n: usize, testfn: &TestFn, samples: u64, seed: u64) -> Result<MeasureChangeReport> {
    if n < 2 {
        return Err(Error::Precondition("measure change needs n >= 2".into()));
    }
    let bound = testfn.bound();
    if !bound.is_finite() || bound < 0.0 {
        return Err(Error::Precondition("test function needs a finite declared bound".into()));
    }
    let eval = DiscEvaluator::new(n)?;
    let check_bound = |x: f64| -> Result<f64> {
        if x.abs() > bound * (1.0 + 1e-12) || !x.is_finite() {
            Err(Error::Precondition(format!("test function value {x} exceeds its bound {bound}")))
        } else {
            Ok(x)
        }
    };
    let norm = 2f64.powi(n as i32);
    let lhs_parts = map_chunks(samples, MC_CHUNK, |ci, _, len| -> Result<(f64, f64)> {
        let mut rng = substream(seed, ci);
        let mut c = vec![0f64; n];
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..len {
            for x in c.iter_mut() {
                *x = rng.random_range(-1.0..=1.0);
            }
            let v = check_bound(testfn.eval(&c, eval.eval_f64(&c).0))?;
            s += v;
            s2 += v * v;
        }
        Ok((s, s2))
    });
    let (s, s2) = sum_moments(lhs_parts)?;
    let lhs = MCEstimate::from_moments(s, s2, samples, seed);

    let b = (n + 1) as f64;
    let mut rhs = Vec::new();
    for (si, sig) in EtaleFactorR::signatures(n).into_iter().enumerate() {
        let region = (2.0 * b).powi(sig.real as i32) * (PI * b * b).powi(sig.complex as i32);
        let factor = sig.disc_abs().sqrt() / sig.aut_order() * region / norm;
        // substreams of the right-hand side are offset per signature
        let offset = (si as u64 + 1) << 40;
        let parts = map_chunks(samples, MC_CHUNK, |ci, _, len| -> Result<(f64, f64)> {
            let mut rng = substream(seed, offset + ci);
            let mut reals = vec![0f64; sig.real];
            let mut complex = vec![(0f64, 0f64); sig.complex];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                for r in reals.iter_mut() {
                    *r = rng.random_range(-b..=b);
                }
                for z in complex.iter_mut() {
                    // uniform in the disk of radius B
                    let rad = b * rng.random::<f64>().sqrt();
                    let th = 2.0 * PI * rng.random::<f64>();
                    *z = (rad * th.cos(), rad * th.sin());
                }
                let c = coeffs_from_roots(&reals, &complex);
                let v = if c.iter().all(|x| x.abs() <= 1.0) {
                    let sd = sqrt_abs_disc(&reals, &complex);
                    let sign = if sig.complex % 2 == 1 { -1.0 } else { 1.0 };
                    sd * check_bound(testfn.eval(&c, sign * sd * sd))?
                } else {
                    0.0
                };
                s += v;
                s2 += v * v;
            }
            Ok((s, s2))
        });
        let (s, s2) = sum_moments(parts)?;
        rhs.push(SignatureTerm {
            signature: sig,
            estimate: MCEstimate::from_moments(s, s2, samples, seed).scaled(factor),
        });
    }
    let total_mean: f64 = rhs.iter().map(|t| t.estimate.mean).sum();
    let total_hw = rhs.iter().map(|t| t.estimate.half_width.powi(2)).sum::<f64>().sqrt();
    let rhs_total = MCEstimate {
        mean: total_mean,
        half_width: total_hw,
        samples: samples * rhs.len() as u64,
        seed,
    };
    let agrees = (lhs.mean - rhs_total.mean).abs() <= (lhs.half_width.powi(2) + total_hw.powi(2)).sqrt();
    Ok(MeasureChangeReport {
        n,
        testfn: testfn.name(),
        root_bound: b,
        lhs,
        rhs,
        rhs_total,
        agrees,
    })
}

fn sum_moments(parts: Vec<Result<(f64, f64)>>) -> Result<(f64, f64)> {
    let mut s = 0.0;
    let mut s2 = 0.0;
    for p in parts {
        let (a, b) = p?;
        s += a;
        s2 += b;
    }
    Ok((s, s2))
}

/// Integer discriminant through the symbolic polynomial in `i128`, falling
/// back to the exact determinant on overflow.
struct IntDisc {
    terms: Vec<(i128, Vec<u32>)>,
}

impl IntDisc {
    fn new(n: usize) -> Result<IntDisc> {
        let poly = sym_disc(n)?;
        let terms = poly
            .terms()
            .map(|(e, c)| (num_traits::ToPrimitive::to_i128(c).expect("small coefficient"), e.to_vec()))
            .collect();
        Ok(IntDisc { terms })
    }

    fn eval(&self, c: &[i64]) -> BigInt {
        let fast = || -> Option<i128> {
            let mut acc: i128 = 0;
            for (coef, e) in &self.terms {
                let mut t = *coef;
                for (&x, &k) in c.iter().zip(e) {
                    for _ in 0..k {
                        t = t.checked_mul(x as i128)?;
                    }
                }
                acc = acc.checked_add(t)?;
            }
            Some(acc)
        };
        match fast() {
            Some(v) => BigInt::from(v),
            None => discriminant(&MonicIntPoly::from_i64(c).expect("nonempty")),
        }
    }
}

/// Exact number of `c in Z^n` with `|c_i| <= H^i` and
/// `|disc| <= H^{n^2-n} / Y`.
pub fn enumerate_small_disc(spec: &BoxSpec, budget: u64) -> Result<u64> {
    let points = spec.box_points();
    if points > budget as f64 {
        return Err(Error::Capacity {
            what: "coefficient box",
            needed_log2: points.log2(),
            limit_log2: (budget as f64).log2().floor() as u32,
        });
    }
    let n = spec.n;
    let bounds: Vec<i64> = (1..=n).map(|i| (spec.height as i64).pow(i as u32)).collect();
    if n == 1 {
        // disc = 1
        return Ok(if spec.admits(&BigInt::one()) { 2 * bounds[0] as u64 + 1 } else { 0 });
    }
    let disc = IntDisc::new(n)?;
    // one stratum per value of c_1
    let strata = (2 * bounds[0] + 1) as u64;
    let counts = map_chunks(strata, 1, |i, _, _| {
        let mut c: Vec<i64> = bounds.iter().map(|&b| -b).collect();
        c[0] = i as i64 - bounds[0];
        let mut count = 0u64;
        loop {
            if spec.admits(&disc.eval(&c)) {
                count += 1;
            }
            let mut j = 1;
            loop {
                if j == n {
                    return count;
                }
                if c[j] < bounds[j] {
                    c[j] += 1;
                    break;
                }
                c[j] = -bounds[j];
                j += 1;
            }
        }
    });
    Ok(counts.into_iter().sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DavenportReport {
    pub n: usize,
    pub height: u64,
    pub shrink: String,
    pub count: u64,
    /// Monte Carlo volume of `Omega_{H,Y}`.
    pub volume: MCEstimate,
    /// `2^{n-1} H^{(n^2+n)/2 - 1}`: the largest coordinate projection of the
    /// coefficient box.
    pub proj_bound: f64,
    /// `|count - vol| / proj_bound`.
    pub constant: f64,
}

/// Lattice count of `Omega_{H,Y}` against its volume
/// `2^n H^{(n^2+n)/2} * density(1/Y)`.
pub fn davenport_check(spec: &BoxSpec, samples: u64, seed: u64, budget: u64) -> Result<DavenportReport> {
    let Some(delta) = spec.delta() else {
        return Err(Error::Precondition("the volume check needs finite Y".into()));
    };
    let count = enumerate_small_disc(spec, budget)?;
    let n = spec.n;
    let d: f64 = num_traits::ToPrimitive::to_f64(&delta).expect("finite");
    let density = mc_density_sweep(n, &[d], samples, seed)?.estimates[0];
    let h = spec.height as f64;
    let weight = ((n * n + n) / 2) as f64;
    let volume = density.scaled(2f64.powi(n as i32) * h.powf(weight));
    let proj_bound = 2f64.powi(n as i32 - 1) * h.powf(weight - 1.0);
    Ok(DavenportReport {
        n,
        height: spec.height,
        shrink: spec.shrink.as_ref().map_or("inf".into(), |y| y.to_string()),
        count,
        constant: (count as f64 - volume.mean).abs() / proj_bound,
        volume,
        proj_bound,
    })
}
