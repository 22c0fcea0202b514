//! Powerful divisors, strong and weak multiples of `p^2`, and small
//! censuses of square divisors of discriminants.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factor_u64, is_prime, primes_up_to, radical, Zmod};
use crate::error::{Error, Result};
use crate::polycore::disc::discriminant_mod;
use crate::polycore::{discriminant, grad_disc, MonicIntPoly};
use crate::realdensity::BoxSpec;
use crate::sampling::map_chunks;
use crate::Limits;

/// `d` is k-powerful when every prime dividing it does so at least `k`
/// times (1 counts).
pub fn is_k_powerful(d: u64, k: u32) -> bool {
    factor_u64(d).iter().all(|&(_, e)| e >= k)
}

fn divisors(m: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factor_u64(m) {
        let len = out.len();
        let mut pw = 1;
        for _ in 0..e {
            pw *= p;
            for i in 0..len {
                out.push(out[i] * pw);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Largest k-powerful divisor.
pub fn powerful_part(m: u64, k: u32) -> u64 {
    factor_u64(m)
        .into_iter()
        .filter(|&(_, e)| e >= k)
        .map(|(p, e)| p.pow(e))
        .product()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerfulQuery {
    pub m: u64,
    pub k: u32,
    /// `rad(m)`.
    pub c: u64,
    pub x: BigRational,
}

impl PowerfulQuery {
    pub fn new(m: u64, k: u32, x: BigRational) -> Result<PowerfulQuery> {
        if m < 2 || k < 2 {
            return Err(Error::Precondition(format!("need m >= 2 and k >= 2, got m={m}, k={k}")));
        }
        let c = radical(m);
        let ck1 = BigInt::from(c).pow(k - 1);
        if BigInt::from(m) < BigInt::from(c).pow(2 * k - 2) {
            return Err(Error::Precondition(format!(
                "m = {m} is below C^(2k-2) = {} (C = rad(m) = {c})",
                BigInt::from(c).pow(2 * k - 2)
            )));
        }
        let lo = BigRational::from_integer(ck1.clone());
        let hi = BigRational::new(BigInt::from(m), ck1);
        if x < lo || x > hi {
            return Err(Error::Precondition(format!("x = {x} outside [C^(k-1), m/C^(k-1)] = [{lo}, {hi}]")));
        }
        Ok(PowerfulQuery { m, k, c, x })
    }

    /// `x_j = lo + (hi - lo) j / (points - 1)`.
    pub fn grid(m: u64, k: u32, points: usize) -> Vec<BigRational> {
        let c = BigInt::from(radical(m));
        let ck1 = c.pow(k - 1);
        let lo = BigRational::from_integer(ck1.clone());
        let hi = BigRational::new(BigInt::from(m), ck1);
        let steps = BigInt::from(points.max(2) - 1);
        (0..points)
            .map(|j| &lo + (&hi - &lo) * BigRational::new(BigInt::from(j), steps.clone()))
            .collect()
    }

    fn in_range(&self, d: u64) -> bool {
        let d = BigRational::from_integer(BigInt::from(d));
        d >= self.x && d <= &self.x * BigRational::from_integer(BigInt::from(self.c))
    }

    /// Smallest k-powerful divisor in `[x, Cx]`, by scanning.
    pub fn smallest_valid(&self) -> Option<u64> {
        self.valid_divisors().first().copied()
    }

    /// Every k-powerful divisor in `[x, Cx]`, ascending.
    pub fn valid_divisors(&self) -> Vec<u64> {
        divisors(self.m)
            .into_iter()
            .filter(|&d| is_k_powerful(d, self.k) && self.in_range(d))
            .collect()
    }
}

/// How the divisor was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerfulBranch {
    /// `x <= C'^k`, take `C'^k`.
    RadicalPower,
    /// `m'/C'^k` itself lies in `[x/C'^k, x/C'^{k-1}]`.
    Cofactor,
    /// `a / p` for the least divisor `a` of `m'/C'^k` above `x/C'^{k-1}`.
    Peeled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerfulDivisor {
    pub d: u64,
    pub branch: PowerfulBranch,
    /// Largest k-powerful divisor `m'` and its radical `C'`.
    pub powerful_part: u64,
    pub powerful_radical: u64,
}

/// A k-powerful divisor of `m` in `[x, Cx]`: pass to the k-powerful part
/// `m'`, then take `C'^k` if `x <= C'^k` and otherwise `C'^k a` with `a` a
/// divisor of `m'/C'^k` in `[x/C'^k, x/C'^{k-1}]`. In the last step the
/// least divisor above the interval is divided by its largest prime, which
/// gives the smallest divisor this construction can produce.
pub fn powerful_divisor(q: &PowerfulQuery) -> Result<PowerfulDivisor> {
    let k = q.k;
    let mp = powerful_part(q.m, k);
    let cp = radical(mp);
    let ck = cp
        .checked_pow(k)
        .ok_or_else(|| Error::Precondition("C'^k overflows u64".into()))?;
    let rat = |v: u64| BigRational::from_integer(BigInt::from(v));
    let finish = |d: u64, branch| -> Result<PowerfulDivisor> {
        let out = PowerfulDivisor {
            d,
            branch,
            powerful_part: mp,
            powerful_radical: cp,
        };
        if q.m % d != 0 || !is_k_powerful(d, k) || !q.in_range(d) {
            return Err(Error::Consistency(format!("constructed divisor {d} fails its postconditions")));
        }
        Ok(out)
    };
    if q.x <= rat(ck) {
        return finish(ck, PowerfulBranch::RadicalPower);
    }
    let cofactor = mp / ck;
    let low = &q.x / rat(ck);
    let high = &q.x / rat(ck / cp);
    if rat(cofactor) >= low && rat(cofactor) <= high {
        return finish(ck * cofactor, PowerfulBranch::Cofactor);
    }
    let a = divisors(cofactor)
        .into_iter()
        .find(|&a| rat(a) > high)
        .ok_or_else(|| Error::Consistency("no divisor above the interval".into()))?;
    let p = factor_u64(a).last().map(|&(p, _)| p).unwrap_or(1);
    finish(ck * (a / p), PowerfulBranch::Peeled)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerfulFailure {
    pub m: u64,
    pub k: u32,
    pub x: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerfulSweepReport {
    pub max_m: u64,
    pub ks: Vec<u32>,
    pub grid_points: usize,
    /// `(m, k)` pairs meeting `m >= C^(2k-2)`.
    pub valid_pairs: u64,
    pub queries: u64,
    /// Queries where the returned divisor is the smallest valid one.
    pub smallest: u64,
    pub radical_power: u64,
    pub cofactor: u64,
    pub peeled: u64,
    pub failures: Vec<PowerfulFailure>,
}

/// [`powerful_divisor`] on every valid `(m, k)` with `2 <= m <= max_m` and
/// `x` on the `points`-grid, each result checked against a divisor scan.
pub fn powerful_sweep(max_m: u64, ks: &[u32], points: usize) -> Result<PowerfulSweepReport> {
    if max_m < 2 || ks.iter().any(|&k| k < 2) || points == 0 {
        return Err(Error::Precondition("need max_m >= 2, k >= 2 and a nonempty grid".into()));
    }
    const CHUNK: u64 = 1 << 10;
    let parts = map_chunks(max_m - 1, CHUNK, |_, start, len| {
        let mut r = PowerfulSweepReport {
            max_m,
            ks: ks.to_vec(),
            grid_points: points,
            valid_pairs: 0,
            queries: 0,
            smallest: 0,
            radical_power: 0,
            cofactor: 0,
            peeled: 0,
            failures: vec![],
        };
        for m in start + 2..start + 2 + len {
            let c = radical(m);
            for &k in ks {
                if BigInt::from(m) < BigInt::from(c).pow(2 * k - 2) {
                    continue;
                }
                r.valid_pairs += 1;
                for x in PowerfulQuery::grid(m, k, points) {
                    r.queries += 1;
                    let fail = |reason: String| PowerfulFailure {
                        m,
                        k,
                        x: x.to_string(),
                        reason,
                    };
                    let q = match PowerfulQuery::new(m, k, x.clone()) {
                        Ok(q) => q,
                        Err(e) => {
                            r.failures.push(fail(e.to_string()));
                            continue;
                        }
                    };
                    let valid = q.valid_divisors();
                    match powerful_divisor(&q) {
                        Ok(d) if valid.binary_search(&d.d).is_ok() => {
                            r.smallest += (valid[0] == d.d) as u64;
                            match d.branch {
                                PowerfulBranch::RadicalPower => r.radical_power += 1,
                                PowerfulBranch::Cofactor => r.cofactor += 1,
                                PowerfulBranch::Peeled => r.peeled += 1,
                            }
                        }
                        Ok(d) => r.failures.push(fail(format!("{} not in scan {:?}", d.d, valid))),
                        Err(e) => r.failures.push(fail(e.to_string())),
                    }
                }
            }
        }
        r
    });
    let mut out = PowerfulSweepReport {
        max_m,
        ks: ks.to_vec(),
        grid_points: points,
        valid_pairs: 0,
        queries: 0,
        smallest: 0,
        radical_power: 0,
        cofactor: 0,
        peeled: 0,
        failures: vec![],
    };
    for r in parts {
        out.valid_pairs += r.valid_pairs;
        out.queries += r.queries;
        out.smallest += r.smallest;
        out.radical_power += r.radical_power;
        out.cofactor += r.cofactor;
        out.peeled += r.peeled;
        out.failures.extend(r.failures);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NotMultiple,
    Weak,
    Strong,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultipleClass {
    pub f: MonicIntPoly,
    pub p: u64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifyMode {
    /// `p^2 | disc` and the gradient vanishing mod `p`.
    Gradient,
    /// Every lift `g = f (mod p)`, modulo `p^2`.
    Lifts,
}

/// Strong, weak or not a multiple of `p^2`.
pub fn classify_multiple(f: &MonicIntPoly, p: u64, mode: ClassifyMode, limits: &Limits) -> Result<MultipleClass> {
    if !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let p2 = BigInt::from(p) * BigInt::from(p);
    let disc = discriminant(f);
    let verdict = if !(&disc % &p2).is_zero() {
        Verdict::NotMultiple
    } else {
        match mode {
            ClassifyMode::Gradient => {
                if grad_disc(f).is_zero_mod(p) {
                    Verdict::Strong
                } else {
                    Verdict::Weak
                }
            }
            ClassifyMode::Lifts => {
                let n = f.degree();
                Limits::check("lifts p^n", n as f64 * (p as f64).log2(), limits.lift_bits)?;
                let m = p.checked_mul(p).ok_or_else(|| Error::Precondition("p^2 overflows".into()))?;
                let ring = Zmod::new(m);
                let base: Vec<u64> = f.coeffs().iter().map(|c| ring.from_bigint(c)).collect();
                if all_lifts_divisible(&base, p, &ring) {
                    Verdict::Strong
                } else {
                    Verdict::Weak
                }
            }
        }
    };
    Ok(MultipleClass {
        f: f.clone(),
        p,
        verdict,
    })
}

/// Whether `p^2 | disc(base + p b)` for every `b in [0, p)^n`.
fn all_lifts_divisible(base: &[u64], p: u64, ring: &Zmod) -> bool {
    let n = base.len();
    let mut b = vec![0u64; n];
    let mut g = base.to_vec();
    loop {
        for i in 0..n {
            g[i] = ring.add(base[i] % p, ring.mul(p, b[i]));
        }
        if discriminant_mod(&g, ring, p, 2) != 0 {
            return false;
        }
        let mut i = 0;
        loop {
            if i == n {
                return true;
            }
            b[i] += 1;
            if b[i] < p {
                break;
            }
            b[i] = 0;
            i += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierAgreement {
    pub n: usize,
    pub p: u64,
    /// Polynomials checked: every class mod `p^2`.
    pub polys: u64,
    pub strong: u64,
    pub weak: u64,
    pub not_multiple: u64,
    /// Polynomials (coefficients in `[0, p^2)`) where the two modes differ.
    pub mismatches: Vec<Vec<u64>>,
}

/// Both classifier modes over every coefficient vector in `[0, p^2)^n`.
/// The lift test is shared by all vectors in one class mod `p`.
pub fn classifier_agreement(n: usize, p: u64, limits: &Limits) -> Result<ClassifierAgreement> {
    if !is_prime(p) || n == 0 {
        return Err(Error::Precondition("need a prime p and n >= 1".into()));
    }
    Limits::check("classes p^(2n)", 2.0 * n as f64 * (p as f64).log2(), limits.lift_bits + 10)?;
    let m = p * p;
    let ring = Zmod::new(m);
    let classes = p.pow(n as u32);
    let parts = map_chunks(classes, 1, |idx, _, _| {
        let mut base = vec![0u64; n];
        let mut t = idx;
        for x in base.iter_mut() {
            *x = t % p;
            t /= p;
        }
        let strong_class = all_lifts_divisible(&base, p, &ring);
        let mut tally = [0u64; 3];
        let mut mismatches = Vec::new();
        let mut b = vec![0u64; n];
        loop {
            let c: Vec<u64> = base.iter().zip(&b).map(|(&x, &y)| x + p * y).collect();
            let f = MonicIntPoly::new(c.iter().map(|&x| BigInt::from(x)).collect()).expect("nonempty");
            let divisible = discriminant_mod(&c, &ring, p, 2) == 0;
            let by_lifts = match (divisible, strong_class) {
                (false, _) => Verdict::NotMultiple,
                (true, true) => Verdict::Strong,
                (true, false) => Verdict::Weak,
            };
            let by_gradient = match classify_multiple(&f, p, ClassifyMode::Gradient, limits) {
                Ok(c) => c.verdict,
                Err(_) => unreachable!("p is prime"),
            };
            tally[by_lifts as usize] += 1;
            if by_lifts != by_gradient {
                mismatches.push(c.clone());
            }
            let mut i = 0;
            loop {
                if i == n {
                    return (tally, mismatches);
                }
                b[i] += 1;
                if b[i] < p {
                    break;
                }
                b[i] = 0;
                i += 1;
            }
        }
    });
    let mut out = ClassifierAgreement {
        n,
        p,
        polys: m.pow(n as u32),
        strong: 0,
        weak: 0,
        not_multiple: 0,
        mismatches: Vec::new(),
    };
    for (t, mm) in parts {
        out.not_multiple += t[0];
        out.weak += t[1];
        out.strong += t[2];
        out.mismatches.extend(mm);
    }
    Ok(out)
}

/// Trial-division bound for square-part extraction.
pub const TRIAL_BOUND: u64 = 10_000;

/// Primes `p` with `p^2 | x`, for `x != 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquarePrimes {
    pub primes: Vec<u64>,
    /// Cofactor left after trial division when it could still hide a
    /// square of a large prime.
    pub unresolved: Option<BigInt>,
}

/// Trial division to [`TRIAL_BOUND`], then the remainder `r` (all prime
/// factors above the bound) is settled when possible: a perfect square of
/// a prime gives that prime; a non-square below `bound^3` has at most two
/// large prime factors, necessarily distinct, so it is squarefree.
pub fn square_primes(x: &BigInt, trial: &[u64]) -> SquarePrimes {
    let mut r = x.abs();
    let mut primes = Vec::new();
    for &p in trial {
        let pb = BigInt::from(p);
        if (&r % &pb).is_zero() {
            let mut e = 0;
            while (&r % &pb).is_zero() {
                r /= &pb;
                e += 1;
            }
            if e >= 2 {
                primes.push(p);
            }
        }
        if r.is_one() {
            break;
        }
    }
    let bound = BigInt::from(TRIAL_BOUND);
    if r <= &bound * &bound {
        // 1 or a prime
        return SquarePrimes {
            primes,
            unresolved: None,
        };
    }
    let s = r.sqrt();
    if &s * &s == r {
        if let Some(q) = s.to_u64().filter(|&q| is_prime(q)) {
            primes.push(q);
            return SquarePrimes {
                primes,
                unresolved: None,
            };
        }
        return SquarePrimes {
            primes,
            unresolved: Some(r),
        };
    }
    if r < &bound * &bound * &bound {
        return SquarePrimes {
            primes,
            unresolved: None,
        };
    }
    SquarePrimes {
        primes,
        unresolved: Some(r),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    /// Squarefree `m >= M`.
    #[serde(with = "crate::serde_util::decimal")]
    pub m: BigInt,
    /// `|W_m^(1)|`: every `p | m` strong.
    pub strong_count: u64,
    /// `|W_m^(2)|`: every `p | m` weak.
    pub weak_count: u64,
    /// Members of `W_m` with neither pattern.
    pub mixed_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub n: usize,
    pub height: u64,
    pub threshold: u64,
    pub polys: u64,
    /// `disc = 0`: in every `W_m`, kept out of the tallies.
    pub zero_disc: u64,
    /// Polynomials whose square part could not be settled by trial
    /// division; tallied with the primes that were found.
    pub unclassified: u64,
    pub rows: Vec<CensusRow>,
    /// Polynomials in some `W_m` with `m >= M` squarefree.
    pub union_all: u64,
    /// ... in some `W_m^(1)` with `m >= sqrt M`.
    pub union_strong: u64,
    /// ... in some `W_m^(2)` with `m >= sqrt M`.
    pub union_weak: u64,
    /// The first union lies inside the other two (checked per polynomial).
    pub inclusion_holds: bool,
}

/// Per-polynomial membership data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyCensus {
    pub zero: bool,
    pub unresolved: bool,
    pub strong: Vec<u64>,
    pub weak: Vec<u64>,
}

/// Square primes of `disc(f)` split into strong and weak by the gradient
/// criterion.
pub fn poly_census(f: &MonicIntPoly, trial: &[u64]) -> PolyCensus {
    let disc = discriminant(f);
    if disc.is_zero() {
        return PolyCensus {
            zero: true,
            unresolved: false,
            strong: vec![],
            weak: vec![],
        };
    }
    let sq = square_primes(&disc, trial);
    let mut strong = Vec::new();
    let mut weak = Vec::new();
    if !sq.primes.is_empty() {
        let g = grad_disc(f);
        for p in sq.primes {
            if g.is_zero_mod(p) {
                strong.push(p);
            } else {
                weak.push(p);
            }
        }
    }
    PolyCensus {
        zero: false,
        unresolved: sq.unresolved.is_some(),
        strong,
        weak,
    }
}

/// Products of nonempty subsets.
fn subset_products(primes: &[u64]) -> Vec<BigInt> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << primes.len()) {
        let mut m = BigInt::one();
        for (i, &p) in primes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                m *= p;
            }
        }
        out.push(m);
    }
    out
}

fn product(primes: &[u64]) -> BigInt {
    primes.iter().fold(BigInt::one(), |acc, &p| acc * p)
}

#[derive(Default)]
struct Tally {
    polys: u64,
    zero: u64,
    unclassified: u64,
    rows: BTreeMap<BigInt, [u64; 3]>,
    union_all: u64,
    union_strong: u64,
    union_weak: u64,
    inclusion_fail: u64,
}

impl Tally {
    fn add(&mut self, pc: &PolyCensus, threshold: &BigInt, root: &BigInt) {
        self.polys += 1;
        if pc.zero {
            self.zero += 1;
            return;
        }
        self.unclassified += pc.unresolved as u64;
        let all: Vec<u64> = {
            let mut v = pc.strong.clone();
            v.extend(&pc.weak);
            v.sort_unstable();
            v
        };
        for m in subset_products(&all) {
            if &m < threshold {
                continue;
            }
            let e = self.rows.entry(m.clone()).or_default();
            // m is strong (weak) iff all its primes are strong (weak)
            let ps: Vec<u64> = all.iter().copied().filter(|p| (&m % p).is_zero()).collect();
            if ps.iter().all(|p| pc.strong.contains(p)) {
                e[0] += 1;
            } else if ps.iter().all(|p| pc.weak.contains(p)) {
                e[1] += 1;
            } else {
                e[2] += 1;
            }
        }
        let in_all = product(&all) >= *threshold;
        let in_strong = !pc.strong.is_empty() && product(&pc.strong) >= *root;
        let in_weak = !pc.weak.is_empty() && product(&pc.weak) >= *root;
        self.union_all += in_all as u64;
        self.union_strong += in_strong as u64;
        self.union_weak += in_weak as u64;
        if in_all && !(in_strong || in_weak) {
            self.inclusion_fail += 1;
        }
    }

    fn merge(&mut self, o: Tally) {
        self.polys += o.polys;
        self.zero += o.zero;
        self.unclassified += o.unclassified;
        self.union_all += o.union_all;
        self.union_strong += o.union_strong;
        self.union_weak += o.union_weak;
        self.inclusion_fail += o.inclusion_fail;
        for (m, v) in o.rows {
            let e = self.rows.entry(m).or_default();
            for i in 0..3 {
                e[i] += v[i];
            }
        }
    }
}

/// Tallies of `W_m^(1)` and `W_m^(2)` for squarefree `m >= M` over the
/// height-`H` box.
pub fn sieve_census(n: usize, height: u64, threshold: u64, limits: &Limits) -> Result<CensusReport> {
    if threshold < 2 {
        return Err(Error::Precondition("M must be at least 2".into()));
    }
    let spec = BoxSpec::new(n, height, None)?;
    if spec.box_points() > limits.box_budget as f64 {
        return Err(Error::Capacity {
            what: "census box",
            needed_log2: spec.box_points().log2(),
            limit_log2: (limits.box_budget as f64).log2().floor() as u32,
        });
    }
    let trial = primes_up_to(TRIAL_BOUND);
    let bounds: Vec<i64> = (1..=n).map(|i| (height as i64).pow(i as u32)).collect();
    let m_big = BigInt::from(threshold);
    // smallest integer >= sqrt(M)
    let mut root = m_big.sqrt();
    if &root * &root < m_big {
        root += 1;
    }
    let strata = (2 * bounds[0] + 1) as u64;
    let parts = map_chunks(strata, 1, |i, _, _| {
        let mut tally = Tally::default();
        let mut c: Vec<i64> = bounds.iter().map(|&b| -b).collect();
        c[0] = i as i64 - bounds[0];
        loop {
            let f = MonicIntPoly::from_i64(&c).expect("nonempty");
            tally.add(&poly_census(&f, &trial), &m_big, &root);
            let mut j = 1;
            loop {
                if j >= n {
                    return tally;
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
    let mut all = Tally::default();
    for t in parts {
        all.merge(t);
    }
    Ok(CensusReport {
        n,
        height,
        threshold,
        polys: all.polys,
        zero_disc: all.zero,
        unclassified: all.unclassified,
        rows: all
            .rows
            .into_iter()
            .map(|(m, v)| CensusRow {
                m,
                strong_count: v[0],
                weak_count: v[1],
                mixed_count: v[2],
            })
            .collect(),
        union_all: all.union_all,
        union_strong: all.union_strong,
        union_weak: all.union_weak,
        inclusion_holds: all.inclusion_fail == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(m: u64, k: u32, x: i64) -> PowerfulQuery {
        PowerfulQuery::new(m, k, BigRational::from_integer(BigInt::from(x))).unwrap()
    }

    #[test]
    fn powerful_examples() {
        let r = powerful_divisor(&q(81, 2, 9)).unwrap();
        assert_eq!((r.d, r.branch), (9, PowerfulBranch::RadicalPower));
        let r = powerful_divisor(&q(64, 3, 8)).unwrap();
        assert_eq!(q(64, 3, 8).valid_divisors(), vec![8, 16]);
        assert_eq!(r.d, 8);
        assert_eq!(powerful_divisor(&q(16, 2, 4)).unwrap().d, 4);
    }

    #[test]
    fn small_sweep_is_clean() {
        let r = powerful_sweep(2000, &[2, 3], 16).unwrap();
        assert!(r.failures.is_empty(), "{:?}", &r.failures[..r.failures.len().min(3)]);
        assert!(r.queries > 0 && r.peeled > 0);
    }

    #[test]
    fn powerful_rejects_bad_queries() {
        // rad(12) = 6, 12 < 36
        assert!(PowerfulQuery::new(12, 2, BigRational::from_integer(BigInt::from(6))).is_err());
        assert!(PowerfulQuery::new(81, 2, BigRational::from_integer(BigInt::from(2))).is_err());
        assert!(PowerfulQuery::new(81, 2, BigRational::from_integer(BigInt::from(28))).is_err());
    }

    #[test]
    fn classifier_examples() {
        let limits = Limits::default();
        let f = MonicIntPoly::from_i64(&[1, 1]).unwrap();
        for mode in [ClassifyMode::Gradient, ClassifyMode::Lifts] {
            assert_eq!(classify_multiple(&f, 2, mode, &limits).unwrap().verdict, Verdict::NotMultiple);
        }
        let g = MonicIntPoly::from_i64(&[-6, 13, -12, 4]).unwrap();
        for mode in [ClassifyMode::Gradient, ClassifyMode::Lifts] {
            assert_eq!(classify_multiple(&g, 3, mode, &limits).unwrap().verdict, Verdict::Strong);
        }
    }

    #[test]
    fn quadratics_mod_three_never_strong() {
        let r = classifier_agreement(2, 3, &Limits::default()).unwrap();
        assert_eq!(r.strong, 0);
        assert!(r.mismatches.is_empty());
        assert_eq!(r.polys, 81);
    }

    #[test]
    fn square_prime_extraction() {
        let trial = primes_up_to(TRIAL_BOUND);
        let big = 10_007u64;
        let x = BigInt::from(12) * BigInt::from(big) * BigInt::from(big);
        let s = square_primes(&x, &trial);
        assert_eq!(s.primes, vec![2, big]);
        assert!(s.unresolved.is_none());
        let y = BigInt::from(10_007u64) * BigInt::from(10_009u64);
        assert_eq!(square_primes(&y, &trial).primes, Vec::<u64>::new());
    }

    #[test]
    fn empty_census_above_kernel() {
        let r = sieve_census(2, 2, 1_000_000, &Limits::default()).unwrap();
        assert!(r.rows.iter().all(|row| row.strong_count == 0 && row.weak_count == 0));
        assert_eq!(r.union_all, 0);
    }
}
