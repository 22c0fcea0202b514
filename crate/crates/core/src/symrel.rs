//! Algebraic identities of the discriminant gradient and the resultant
//! structure behind the strong-multiple criterion.
//!
//! With `D_i = d disc / d c_i`:
//! * pair relation: `disc | D_r D_s - D_{r+k} D_{s-k}` for `k >= 1`,
//!   `1 <= r <= r+k <= n`, `1 <= s-k <= s <= n`;
//! * translation identity: `sum_i (n+1-i) c_{i-1} D_i = 0` with `c_0 = 1`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::binomial;
use crate::error::{Error, Result};
use crate::polycore::{grad_disc, resultant, sym_disc, DiscGradient, MonicIntPoly, SparsePoly};
use crate::sampling::{map_chunks, substream};

/// Shift triple `(r, s, k)` of the pair relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub r: usize,
    pub s: usize,
    pub k: usize,
}

/// Every admissible `(r, s, k)` for degree `n`.
pub fn admissible_triples(n: usize) -> Vec<Triple> {
    let mut out = Vec::new();
    for k in 1..n {
        for r in 1..=n - k {
            for s in k + 1..=n {
                out.push(Triple { r, s, k });
            }
        }
    }
    out
}

/// `D_r D_s - D_{r+k} D_{s-k}` (1-based indices).
pub fn pair_expression(g: &DiscGradient, t: Triple) -> BigInt {
    let d = |i: usize| &g.partials[i - 1];
    d(t.r) * d(t.s) - d(t.r + t.k) * d(t.s - t.k)
}

/// `sum_i (n+1-i) c_{i-1} D_i` with `c_0 = 1`.
pub fn translation_residual(f: &MonicIntPoly, g: &DiscGradient) -> BigInt {
    let n = f.degree();
    (1..=n)
        .map(|i| &g.partials[i - 1] * BigInt::from(n + 1 - i) * f.coeff(i - 1))
        .sum()
}

pub fn check_translation_identity(f: &MonicIntPoly) -> BigInt {
    translation_residual(f, &grad_disc(f))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFailure {
    pub f: MonicIntPoly,
    pub triple: Triple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub n: usize,
    pub trials: u64,
    pub coeff_bound: i64,
    pub seed: u64,
    pub zero_disc_skipped: u64,
    pub pair_checks: u64,
    pub pair_divisibility_failures: Vec<PairFailure>,
    pub translation_failures: Vec<MonicIntPoly>,
    /// `Some(true)` when polynomial divisibility was confirmed for every
    /// triple, `None` when not attempted (`n > 5`).
    pub symbolic_verified: Option<bool>,
    /// Content of the generic discriminant when it was computed (`n <= 6`).
    #[serde(with = "crate::serde_util::decimal_opt")]
    pub disc_content: Option<BigInt>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.pair_divisibility_failures.is_empty()
            && self.translation_failures.is_empty()
            && self.symbolic_verified != Some(false)
    }
}

pub fn random_poly<R: Rng>(rng: &mut R, n: usize, bound: i64) -> MonicIntPoly {
    let c: Vec<i64> = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
    MonicIntPoly::from_i64(&c).expect("n >= 1")
}

const TRIAL_CHUNK: u64 = 128;

/// Integer-level pair relation and translation identity at `trials` random
/// points with `|c_i| <= coeff_bound`; symbolic divisibility for `n <= 5`.
pub fn check_pair_relation(n: usize, trials: u64, coeff_bound: i64, seed: u64) -> Result<RelationReport> {
    if n < 3 {
        return Err(Error::Precondition(format!("pair relation needs n >= 3, got {n}")));
    }
    if coeff_bound < 0 {
        return Err(Error::Precondition("coefficient bound must be nonnegative".into()));
    }
    let triples = admissible_triples(n);
    let parts = map_chunks(trials, TRIAL_CHUNK, |chunk, _, len| {
        let mut rng = substream(seed, chunk);
        let mut skipped = 0u64;
        let mut checks = 0u64;
        let mut pair_fail = Vec::new();
        let mut trans_fail = Vec::new();
        for _ in 0..len {
            let f = random_poly(&mut rng, n, coeff_bound);
            let g = grad_disc(&f);
            if !translation_residual(&f, &g).is_zero() {
                trans_fail.push(f.clone());
            }
            if g.disc.is_zero() {
                skipped += 1;
                continue;
            }
            for &t in &triples {
                checks += 1;
                if !pair_expression(&g, t).mod_floor(&g.disc).is_zero() {
                    pair_fail.push(PairFailure { f: f.clone(), triple: t });
                }
            }
        }
        (skipped, checks, pair_fail, trans_fail)
    });
    let mut report = RelationReport {
        n,
        trials,
        coeff_bound,
        seed,
        zero_disc_skipped: 0,
        pair_checks: 0,
        pair_divisibility_failures: Vec::new(),
        translation_failures: Vec::new(),
        symbolic_verified: None,
        disc_content: None,
    };
    for (s, c, pf, tf) in parts {
        report.zero_disc_skipped += s;
        report.pair_checks += c;
        report.pair_divisibility_failures.extend(pf);
        report.translation_failures.extend(tf);
    }
    if n <= 6 {
        report.disc_content = Some(sym_disc(n)?.content());
    }
    if n <= 5 {
        report.symbolic_verified = Some(symbolic_pair_relation(n)?.iter().all(|(_, ok)| *ok));
    }
    Ok(report)
}

/// Polynomial divisibility of each pair expression by the generic
/// discriminant, by pseudo-division in `c_{n-1}` (where the discriminant's
/// leading coefficient is the constant `alpha_n`) and re-multiplication.
pub fn symbolic_pair_relation(n: usize) -> Result<Vec<(Triple, bool)>> {
    if !(3..=5).contains(&n) {
        return Err(Error::Capacity {
            what: "symbolic pair relation degree",
            needed_log2: (n as f64).log2(),
            limit_log2: 2,
        });
    }
    let disc = sym_disc(n)?;
    let grads: Vec<SparsePoly> = (0..n).map(|i| disc.derivative(i)).collect();
    let var = n - 2;
    admissible_triples(n)
        .into_iter()
        .map(|t| {
            let d = |i: usize| &grads[i - 1];
            let expr = d(t.r).mul(d(t.s)).sub(&d(t.r + t.k).mul(d(t.s - t.k)));
            let pd = expr.pseudo_divide(&disc, var)?;
            Ok((t, pd.exact_quotient(&expr, &disc).is_some()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultantReport {
    pub n: usize,
    /// Leading coefficient in `c_{n-1}` of `Res(f, f')`, the Sylvester
    /// determinant.
    #[serde(with = "crate::serde_util::decimal")]
    pub alpha_n: BigInt,
    /// Leading coefficient in `c_{n-1}` of the discriminant, which is
    /// `(-1)^{n(n-1)/2} alpha_n`.
    #[serde(with = "crate::serde_util::decimal")]
    pub disc_leading: BigInt,
    #[serde(with = "crate::serde_util::decimal")]
    pub alpha_formula: BigInt,
    #[serde(with = "crate::serde_util::decimal")]
    pub alpha_binomial_sum: BigInt,
    pub disc_cn1_degree: u32,
    /// `Res_{c_{n-1}}(disc, d disc / d c_n)`.
    pub g2: SparsePoly,
    pub g2_terms: usize,
    pub g2_free_of_cn1: bool,
    pub g2_cn_degree: Option<u32>,
    /// Leading coefficient of `g2` in `c_n` when it is constant.
    #[serde(with = "crate::serde_util::decimal_opt")]
    pub g2_leading_constant: Option<BigInt>,
}

impl ResultantReport {
    pub fn passed(&self) -> bool {
        let n = self.n as u32;
        !self.alpha_n.is_zero()
            && self.alpha_n == self.alpha_formula
            && self.alpha_n == self.alpha_binomial_sum
            && self.disc_leading == resultant_sign(self.n) * &self.alpha_n
            && self.disc_cn1_degree == n
            && self.g2_free_of_cn1
            && self.g2_cn_degree == Some(n * (n - 2))
            && self.g2_leading_constant.as_ref().is_some_and(|c| !c.is_zero())
    }
}

/// `(-1)^{n(n-1)/2}`, relating `disc` and `Res(f, f')`.
pub fn resultant_sign(n: usize) -> BigInt {
    if (n * (n - 1) / 2) % 2 == 1 {
        BigInt::from(-1)
    } else {
        BigInt::one()
    }
}

/// `(1 - n)^{n-1}`.
pub fn alpha_formula(n: usize) -> BigInt {
    num_traits::pow(BigInt::one() - BigInt::from(n), n - 1)
}

/// `sum_{0 <= j <= n-1} (-n)^j binom(n-1, j)`.
pub fn alpha_binomial_sum(n: usize) -> BigInt {
    (0..n)
        .map(|j| num_traits::pow(-BigInt::from(n), j) * binomial(n as u64 - 1, j as u64))
        .sum()
}

/// The `c_{n-1}`-leading coefficients of `Res(f, f')` and `disc`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub n: usize,
    #[serde(with = "crate::serde_util::decimal")]
    pub alpha_n: BigInt,
    #[serde(with = "crate::serde_util::decimal")]
    pub disc_leading: BigInt,
    pub disc_cn1_degree: u32,
}

impl AlphaReport {
    pub fn passed(&self) -> bool {
        !self.alpha_n.is_zero()
            && self.alpha_n == alpha_formula(self.n)
            && self.alpha_n == alpha_binomial_sum(self.n)
            && self.disc_leading == resultant_sign(self.n) * &self.alpha_n
            && self.disc_cn1_degree == self.n as u32
    }
}

fn check_structure_degree(n: usize) -> Result<()> {
    if !(3..=5).contains(&n) {
        return Err(Error::Capacity {
            what: "resultant structure degree",
            needed_log2: (n as f64).log2(),
            limit_log2: 2,
        });
    }
    Ok(())
}

pub fn alpha_structure(n: usize) -> Result<AlphaReport> {
    check_structure_degree(n)?;
    let disc = sym_disc(n)?;
    let cn1 = n - 2;
    let disc_cn1_degree = disc.degree_in(cn1).unwrap_or(0);
    let disc_leading = disc
        .coeff_in(cn1, disc_cn1_degree)
        .as_constant()
        .ok_or_else(|| Error::Consistency("leading coefficient in c_{n-1} is not constant".into()))?;
    // Res(f, f') itself, as a Sylvester determinant over Z[c, x]
    let res_vars: std::sync::Arc<[String]> = (1..=n)
        .map(|i| format!("c{i}"))
        .chain(std::iter::once("x".to_string()))
        .collect();
    let x = SparsePoly::var(res_vars.clone(), n);
    let mut f = x.pow(n as u32);
    for i in 1..=n {
        f = f.add(&SparsePoly::var(res_vars.clone(), i - 1).mul(&x.pow((n - i) as u32)));
    }
    let res = resultant(&f, &f.derivative(n), "x")?;
    let alpha_n = res
        .coeff_in(cn1, res.degree_in(cn1).unwrap_or(0))
        .as_constant()
        .ok_or_else(|| Error::Consistency("resultant leading coefficient is not constant".into()))?;
    Ok(AlphaReport {
        n,
        alpha_n,
        disc_leading,
        disc_cn1_degree,
    })
}

pub fn resultant_structure(n: usize) -> Result<ResultantReport> {
    check_structure_degree(n)?;
    let AlphaReport {
        alpha_n,
        disc_leading,
        disc_cn1_degree,
        ..
    } = alpha_structure(n)?;
    let disc = sym_disc(n)?;
    let cn1 = n - 2;
    let cn = n - 1;
    let g2 = resultant(&disc, &disc.derivative(cn), &format!("c{}", n - 1))?;
    let g2_cn_degree = g2.degree_in(cn);
    let g2_leading_constant = g2_cn_degree.and_then(|d| g2.coeff_in(cn, d).as_constant());
    Ok(ResultantReport {
        n,
        alpha_n,
        disc_leading,
        alpha_formula: alpha_formula(n),
        alpha_binomial_sum: alpha_binomial_sum(n),
        disc_cn1_degree,
        g2_terms: g2.len(),
        g2_free_of_cn1: g2.is_free_of(cn1),
        g2_cn_degree,
        g2_leading_constant,
        g2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triples_are_admissible() {
        let t = admissible_triples(3);
        assert!(t.contains(&Triple { r: 1, s: 3, k: 1 }));
        for Triple { r, s, k } in admissible_triples(6) {
            assert!(k >= 1 && r >= 1 && r + k <= 6 && s - k >= 1 && s <= 6);
        }
    }

    #[test]
    fn cubic_pair_relation_example() {
        let f = MonicIntPoly::from_i64(&[0, -1, 0]).unwrap();
        let g = grad_disc(&f);
        assert_eq!(g.disc, BigInt::from(4));
        let e = pair_expression(&g, Triple { r: 1, s: 3, k: 1 });
        assert!(e.mod_floor(&g.disc).is_zero());
    }

    #[test]
    fn translation_examples() {
        for c in [&[5i64, 7][..], &[1, 2, 3]] {
            let f = MonicIntPoly::from_i64(c).unwrap();
            assert!(check_translation_identity(&f).is_zero());
        }
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha_formula(3), BigInt::from(4));
        assert_eq!(alpha_formula(4), BigInt::from(-27));
        for n in 1..=12 {
            assert_eq!(alpha_formula(n), alpha_binomial_sum(n));
        }
    }

    #[test]
    fn quartic_symbolic_divisibility() {
        let res = symbolic_pair_relation(4).unwrap();
        let t = res.iter().find(|(t, _)| *t == Triple { r: 1, s: 4, k: 1 }).unwrap();
        assert!(t.1);
        assert!(res.iter().all(|(_, ok)| *ok));
    }

    #[test]
    fn cubic_resultant_structure() {
        let r = resultant_structure(3).unwrap();
        assert_eq!(r.alpha_n, BigInt::from(4));
        assert_eq!(r.disc_leading, BigInt::from(-4));
        assert_eq!(r.g2_cn_degree, Some(3));
        assert!(r.passed());
        assert!(resultant_structure(6).is_err());
    }
}
