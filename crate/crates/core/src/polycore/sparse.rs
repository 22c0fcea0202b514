//! Sparse multivariate polynomials over `Z` with arbitrary-precision
//! coefficients.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors, so iteration order
//! is lexicographic with the first variable most significant. That order is
//! the canonical serialization order and the monomial order used by exact
//! division.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::Zmod;
use crate::error::{Error, Result};

pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq, Eq)]
pub struct SparsePoly {
    vars: Arc<[String]>,
    terms: BTreeMap<Exponents, BigInt>,
}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparsePoly({self})")
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > 0)
                .map(|(i, &d)| {
                    if d == 1 {
                        self.vars[i].clone()
                    } else {
                        format!("{}^{}", self.vars[i], d)
                    }
                })
                .collect();
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if idx == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{mag}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

fn add_exps(a: &[u32], b: &[u32]) -> Exponents {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl SparsePoly {
    pub fn zero(vars: Arc<[String]>) -> Self {
        SparsePoly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Arc<[String]>, c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let mut p = SparsePoly::zero(vars);
        if !c.is_zero() {
            let n = p.nvars();
            p.terms.insert(vec![0; n], c);
        }
        p
    }

    pub fn var(vars: Arc<[String]>, idx: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[idx] = 1;
        let mut p = SparsePoly::zero(vars);
        p.terms.insert(e, BigInt::one());
        p
    }

    /// Builds from arbitrary terms; zero coefficients are dropped and equal
    /// exponent vectors are merged.
    pub fn from_terms(
        vars: Arc<[String]>,
        terms: impl IntoIterator<Item = (Exponents, BigInt)>,
    ) -> Result<Self> {
        let mut p = SparsePoly::zero(vars);
        for (e, c) in terms {
            if e.len() != p.nvars() {
                return Err(Error::Parse(format!(
                    "exponent vector of length {} for {} variables",
                    e.len(),
                    p.nvars()
                )));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn variables(names: &[&str]) -> Arc<[String]> {
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Variables `c1, ..., cn`.
    pub fn coefficient_vars(n: usize) -> Arc<[String]> {
        (1..=n).map(|i| format!("c{i}")).collect()
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[u32]) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, e: Exponents, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn same_ring(&self, other: &SparsePoly) {
        debug_assert!(
            self.vars == other.vars,
            "mixing polynomials over different variable lists"
        );
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        self.same_ring(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        self.same_ring(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> SparsePoly {
        SparsePoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> SparsePoly {
        if k.is_zero() {
            return SparsePoly::zero(self.vars.clone());
        }
        SparsePoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        self.same_ring(other);
        if self.is_zero() || other.is_zero() {
            return SparsePoly::zero(self.vars.clone());
        }
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc: HashMap<Exponents, BigInt> =
            HashMap::with_capacity(small.len() * large.len() / 2 + 1);
        for (ea, ca) in &small.terms {
            for (eb, cb) in &large.terms {
                let e = add_exps(ea, eb);
                let prod = ca * cb;
                acc.entry(e)
                    .and_modify(|v| *v += &prod)
                    .or_insert(prod);
            }
        }
        SparsePoly {
            vars: self.vars.clone(),
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> SparsePoly {
        let mut acc = SparsePoly::constant(self.vars.clone(), 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplies by the monomial `var^shift`.
    pub fn shift(&self, idx: usize, shift: u32) -> SparsePoly {
        SparsePoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e[idx] += shift;
                    (e, c.clone())
                })
                .collect(),
        }
    }

    pub fn derivative(&self, idx: usize) -> SparsePoly {
        let mut out = SparsePoly::zero(self.vars.clone());
        for (e, c) in &self.terms {
            if e[idx] > 0 {
                let mut d = e.clone();
                d[idx] -= 1;
                out.add_term(d, c * BigInt::from(e[idx]));
            }
        }
        out
    }

    /// Degree in one variable; `None` for the zero polynomial.
    pub fn degree_in(&self, idx: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[idx]).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Weighted degree with integer weights per variable.
    pub fn weighted_degree(&self, weights: &[u32]) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().zip(weights).map(|(d, w)| d * w).sum())
            .max()
    }

    /// True when every term has the same weighted degree.
    pub fn is_weighted_homogeneous(&self, weights: &[u32]) -> bool {
        let mut degs = self
            .terms
            .keys()
            .map(|e| e.iter().zip(weights).map(|(d, w)| d * w).sum::<u32>());
        match degs.next() {
            None => true,
            Some(first) => degs.all(|d| d == first),
        }
    }

    pub fn is_free_of(&self, idx: usize) -> bool {
        self.terms.keys().all(|e| e[idx] == 0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&d| d == 0))
    }

    /// The constant value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<BigInt> {
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    /// Coefficient of `var^d`, a polynomial over the same variables that no
    /// longer involves `var`.
    pub fn coeff_in(&self, idx: usize, d: u32) -> SparsePoly {
        let mut out = SparsePoly::zero(self.vars.clone());
        for (e, c) in &self.terms {
            if e[idx] == d {
                let mut e2 = e.clone();
                e2[idx] = 0;
                out.terms.insert(e2, c.clone());
            }
        }
        out
    }

    /// Coefficients in `var`, ascending by degree.
    pub fn as_univariate(&self, idx: usize) -> Vec<SparsePoly> {
        let Some(deg) = self.degree_in(idx) else {
            return Vec::new();
        };
        let mut out = vec![SparsePoly::zero(self.vars.clone()); deg as usize + 1];
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[idx] = 0;
            out[e[idx] as usize].terms.insert(e2, c.clone());
        }
        out
    }

    /// Non-negative gcd of the coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn evaluate(&self, point: &[BigInt]) -> BigInt {
        assert_eq!(point.len(), self.nvars());
        let maxdeg: Vec<u32> = (0..self.nvars())
            .map(|i| self.degree_in(i).unwrap_or(0))
            .collect();
        let powers: Vec<Vec<BigInt>> = point
            .iter()
            .zip(&maxdeg)
            .map(|(x, &d)| {
                let mut v = Vec::with_capacity(d as usize + 1);
                v.push(BigInt::one());
                for i in 0..d as usize {
                    let next = &v[i] * x;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &d) in e.iter().enumerate() {
                if d > 0 {
                    t *= &powers[i][d as usize];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_mod(&self, point: &[u64], ring: &Zmod) -> u64 {
        let mut acc = 0u64;
        for (e, c) in &self.terms {
            let mut t = ring.from_bigint(c);
            for (i, &d) in e.iter().enumerate() {
                if d > 0 {
                    t = ring.mul(t, ring.pow(point[i], d as u64));
                }
            }
            acc = ring.add(acc, t);
        }
        acc
    }

    fn leading(&self) -> Option<(&Exponents, &BigInt)> {
        self.terms.last_key_value()
    }

    /// Exact quotient `self / divisor` over `Z`, or `None` if the divisor
    /// does not divide `self` in `Z[vars]`.
    pub fn div_exact(&self, divisor: &SparsePoly) -> Option<SparsePoly> {
        self.same_ring(divisor);
        let (lt_e, lt_c) = divisor.leading()?;
        let (lt_e, lt_c) = (lt_e.clone(), lt_c.clone());
        let mut rem = self.terms.clone();
        let mut quot = BTreeMap::new();
        while let Some((e, c)) = rem.last_key_value() {
            if e.iter().zip(&lt_e).any(|(a, b)| a < b) {
                return None;
            }
            let (qc, r) = c.div_rem(&lt_c);
            if !r.is_zero() {
                return None;
            }
            let diff: Exponents = e.iter().zip(&lt_e).map(|(a, b)| a - b).collect();
            for (de, dc) in &divisor.terms {
                let key = add_exps(de, &diff);
                let delta = &qc * dc;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(-delta);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        *o.get_mut() -= delta;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                }
            }
            quot.insert(diff, qc);
        }
        Some(SparsePoly {
            vars: self.vars.clone(),
            terms: quot,
        })
    }

    /// Pseudo-division in the variable `idx`:
    /// `lc(divisor)^power * self = quotient * divisor + remainder` with
    /// `deg_idx(remainder) < deg_idx(divisor)` and
    /// `power = max(deg self - deg divisor + 1, 0)`.
    pub fn pseudo_divide(&self, divisor: &SparsePoly, idx: usize) -> Result<PseudoDivision> {
        let d = divisor
            .degree_in(idx)
            .ok_or_else(|| Error::Degenerate("pseudo-division by zero".into()))?;
        let lc = divisor.coeff_in(idx, d);
        let deg_a = self.degree_in(idx).unwrap_or(0);
        let power = if self.is_zero() || deg_a < d {
            0
        } else {
            deg_a - d + 1
        };
        let mut rem = self.clone();
        let mut quot = SparsePoly::zero(self.vars.clone());
        let mut steps = 0;
        while let Some(s) = rem.degree_in(idx) {
            if s < d {
                break;
            }
            let t = rem.coeff_in(idx, s).shift(idx, s - d);
            quot = quot.mul(&lc).add(&t);
            rem = rem.mul(&lc).sub(&t.mul(divisor));
            steps += 1;
        }
        if steps < power {
            let fix = lc.pow(power - steps);
            quot = quot.mul(&fix);
            rem = rem.mul(&fix);
        }
        Ok(PseudoDivision {
            quotient: quot,
            remainder: rem,
            leading_coefficient: lc,
            power,
        })
    }

    /// Substitutes an integer for one variable; the variable list is kept.
    pub fn substitute(&self, idx: usize, value: &BigInt) -> SparsePoly {
        let mut out = SparsePoly::zero(self.vars.clone());
        let deg = self.degree_in(idx).unwrap_or(0);
        let mut pw = vec![BigInt::one()];
        for i in 0..deg as usize {
            let next = &pw[i] * value;
            pw.push(next);
        }
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[idx] = 0;
            out.add_term(e2, c * &pw[e[idx] as usize]);
        }
        out
    }

    /// Canonical text form: a header, the variable list, then one line per
    /// term in ascending exponent order, `e1 e2 ... en : coefficient`.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        s.push_str("sparsepoly 1\n");
        s.push_str("vars");
        for v in self.vars.iter() {
            s.push(' ');
            s.push_str(v);
        }
        s.push('\n');
        s.push_str(&format!("terms {}\n", self.terms.len()));
        for (e, c) in &self.terms {
            let es: Vec<String> = e.iter().map(|d| d.to_string()).collect();
            s.push_str(&es.join(" "));
            s.push_str(" : ");
            s.push_str(&c.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse_canonical(text: &str) -> Result<SparsePoly> {
        let bad = |m: &str| Error::Parse(m.to_string());
        let mut lines = text.lines();
        if lines.next() != Some("sparsepoly 1") {
            return Err(bad("missing header"));
        }
        let vars_line = lines.next().ok_or_else(|| bad("missing vars line"))?;
        let mut it = vars_line.split(' ');
        if it.next() != Some("vars") {
            return Err(bad("vars line"));
        }
        let vars: Arc<[String]> = it.filter(|s| !s.is_empty()).map(String::from).collect();
        let count_line = lines.next().ok_or_else(|| bad("missing terms line"))?;
        let count: usize = count_line
            .strip_prefix("terms ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("terms line"))?;
        let mut terms = BTreeMap::new();
        let mut prev: Option<Exponents> = None;
        for _ in 0..count {
            let line = lines.next().ok_or_else(|| bad("truncated term list"))?;
            let (lhs, rhs) = line.split_once(" : ").ok_or_else(|| bad("term separator"))?;
            let e: Exponents = lhs
                .split(' ')
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("exponent"))?;
            if e.len() != vars.len() {
                return Err(bad("exponent vector length"));
            }
            let c: BigInt = rhs.parse().map_err(|_| bad("coefficient"))?;
            if c.is_zero() {
                return Err(bad("zero coefficient stored"));
            }
            if prev.as_ref().is_some_and(|p| p >= &e) {
                return Err(bad("terms not strictly ascending"));
            }
            prev = Some(e.clone());
            terms.insert(e, c);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(bad("trailing data"));
        }
        Ok(SparsePoly { vars, terms })
    }
}

/// Result of [`SparsePoly::pseudo_divide`].
#[derive(Debug, Clone)]
pub struct PseudoDivision {
    pub quotient: SparsePoly,
    pub remainder: SparsePoly,
    pub leading_coefficient: SparsePoly,
    pub power: u32,
}

impl PseudoDivision {
    /// When the remainder vanishes, recovers the exact quotient over `Z`
    /// (dividing out `lc^power`) and confirms it by re-multiplication.
    pub fn exact_quotient(&self, dividend: &SparsePoly, divisor: &SparsePoly) -> Option<SparsePoly> {
        if !self.remainder.is_zero() {
            return None;
        }
        let q = if self.power == 0 {
            self.quotient.clone()
        } else {
            let factor = self.leading_coefficient.pow(self.power);
            self.quotient.div_exact(&factor)?
        };
        (q.mul(divisor) == *dividend).then_some(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> (SparsePoly, SparsePoly) {
        let v = SparsePoly::variables(&["x", "y"]);
        (SparsePoly::var(v.clone(), 0), SparsePoly::var(v, 1))
    }

    #[test]
    fn ring_operations() {
        let (x, y) = xy();
        let s = x.add(&y);
        let d = x.sub(&y);
        let prod = s.mul(&d);
        let expected = x.pow(2).sub(&y.pow(2));
        assert_eq!(prod, expected);
        assert_eq!(prod.sub(&expected).len(), 0);
        assert_eq!(s.pow(3).len(), 4);
        assert_eq!(x.derivative(0), SparsePoly::constant(x.vars().clone(), 1));
    }

    #[test]
    fn exact_division_and_failure() {
        let (x, y) = xy();
        let a = x.add(&y).pow(3).mul(&x.sub(&y.scale(&BigInt::from(2))));
        let b = x.add(&y);
        let q = a.div_exact(&b).unwrap();
        assert_eq!(q.mul(&b), a);
        assert!(a.div_exact(&x.add(&y.scale(&BigInt::from(3)))).is_none());
        // coefficient obstruction: 2x is not divisible by 4 over Z
        let two_x = x.scale(&BigInt::from(2));
        assert!(two_x.div_exact(&x.scale(&BigInt::from(4))).is_none());
    }

    #[test]
    fn pseudo_division_identity() {
        let (x, y) = xy();
        let a = x.pow(3).mul(&y).add(&x).add(&y.pow(2));
        let b = y.scale(&BigInt::from(2)).mul(&x.pow(2)).add(&SparsePoly::constant(x.vars().clone(), 1));
        let pd = a.pseudo_divide(&b, 0).unwrap();
        let lhs = a.mul(&pd.leading_coefficient.pow(pd.power));
        let rhs = pd.quotient.mul(&b).add(&pd.remainder);
        assert_eq!(lhs, rhs);
        assert!(pd.remainder.degree_in(0).unwrap_or(0) < 2);
    }

    #[test]
    fn canonical_text_round_trip() {
        let (x, y) = xy();
        let p = x.pow(2).scale(&BigInt::from(-27)).add(&y.mul(&x)).add(&SparsePoly::constant(x.vars().clone(), 5));
        let text = p.to_canonical_string();
        let back = SparsePoly::parse_canonical(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_canonical_string(), text);
        assert!(SparsePoly::parse_canonical("sparsepoly 1\nvars x\nterms 1\n1 : 0\n").is_err());
        assert!(SparsePoly::parse_canonical("junk").is_err());
    }

    #[test]
    fn evaluation_paths_agree() {
        let (x, y) = xy();
        let p = x.pow(3).sub(&y.scale(&BigInt::from(7)).mul(&x)).add(&y.pow(4));
        let pt = [BigInt::from(-5), BigInt::from(11)];
        let v = p.evaluate(&pt);
        assert_eq!(v, BigInt::from(-125 + 385 + 14641));
        let ring = Zmod::new(97);
        assert_eq!(p.eval_mod(&[ring.from_i64(-5), 11], &ring), ring.from_bigint(&v));
        assert_eq!(p.substitute(0, &pt[0]).substitute(1, &pt[1]).as_constant(), Some(v));
    }
}

impl serde::Serialize for SparsePoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_canonical_string())
    }
}

impl<'de> serde::Deserialize<'de> for SparsePoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = <String as serde::Deserialize>::deserialize(d)?;
        SparsePoly::parse_canonical(&text).map_err(serde::de::Error::custom)
    }
}
