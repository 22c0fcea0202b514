//! Monic integer polynomials and exact discriminant machinery.

pub mod disc;
pub mod matrix;
pub mod sparse;
pub mod symbolic;
pub mod univariate;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::valuation_bigint;
use crate::error::{precondition, Result};

pub use disc::{discriminant, discriminant_bareiss, grad_disc, LocalGradient};
pub use sparse::SparsePoly;
pub use symbolic::{resultant, sym_disc, sym_disc_cached, symbolic_gradient};
pub use univariate::has_repeated_root;

/// `x^n + c_1 x^{n-1} + ... + c_n`, stored by `(c_1, ..., c_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonicIntPoly {
    #[serde(with = "crate::serde_util::decimal_vec")]
    coeffs: Vec<BigInt>,
}

/// Height `|c_index|^(1/index)` kept as the exact pair achieving the max.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Height {
    pub index: usize,
    #[serde(with = "crate::serde_util::decimal")]
    pub abs_coeff: BigInt,
}

impl Height {
    /// Compares `|c|^(1/i)` against `H` without roots: `|c|` vs `H^i`.
    pub fn cmp_bound(&self, h: &BigRational) -> Ordering {
        let lhs = BigRational::from_integer(self.abs_coeff.clone());
        lhs.cmp(&num_traits::pow(h.clone(), self.index))
    }

    pub fn to_f64(&self) -> f64 {
        self.abs_coeff
            .to_f64()
            .unwrap_or(f64::INFINITY)
            .powf(1.0 / self.index as f64)
    }
}

impl MonicIntPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(precondition("a monic polynomial needs degree >= 1"));
        }
        Ok(MonicIntPoly { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// `c_i` for `0 <= i <= n`, with `c_0 = 1`.
    pub fn coeff(&self, i: usize) -> BigInt {
        if i == 0 {
            BigInt::from(1)
        } else {
            self.coeffs[i - 1].clone()
        }
    }

    /// Coefficients in descending degree order, leading 1 included.
    pub fn dense_descending(&self) -> Vec<BigInt> {
        let mut v = Vec::with_capacity(self.degree() + 1);
        v.push(BigInt::from(1));
        v.extend(self.coeffs.iter().cloned());
        v
    }

    pub fn to_i64_vec(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(|c| c.to_i64()).collect()
    }

    pub fn height(&self) -> Height {
        let mut best = Height {
            index: 1,
            abs_coeff: self.coeffs[0].abs(),
        };
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            let i = k + 1;
            let a = c.abs();
            // |a|^(1/i) > |b|^(1/j)  <=>  |a|^j > |b|^i
            if num_traits::pow(a.clone(), best.index) > num_traits::pow(best.abs_coeff.clone(), i) {
                best = Height {
                    index: i,
                    abs_coeff: a,
                };
            }
        }
        best
    }

    /// True iff `|c_i| <= H^i` for every `i`.
    pub fn has_height(&self, h: &BigRational) -> bool {
        self.coeffs.iter().enumerate().all(|(k, c)| {
            BigRational::from_integer(c.abs()) <= num_traits::pow(h.clone(), k + 1)
        })
    }

    pub fn discriminant(&self) -> BigInt {
        discriminant(self)
    }

    pub fn grad_disc(&self) -> DiscGradient {
        grad_disc(self)
    }

    /// `f(t x) / t^n`, i.e. `c_i -> c_i t^i`.
    pub fn scale_roots(&self, t: &BigInt) -> MonicIntPoly {
        let mut pw = BigInt::from(1);
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                pw *= t;
                c * &pw
            })
            .collect();
        MonicIntPoly { coeffs }
    }
}

impl fmt::Display for MonicIntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Discriminant and its partial derivatives in `c_1, ..., c_n` at one point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscGradient {
    #[serde(with = "crate::serde_util::decimal")]
    pub disc: BigInt,
    #[serde(with = "crate::serde_util::decimal_vec")]
    pub partials: Vec<BigInt>,
}

impl DiscGradient {
    /// `v_p(D_i)` with `None` standing for +inf.
    pub fn valuations(&self, p: u64) -> Vec<Option<u32>> {
        self.partials.iter().map(|d| valuation_bigint(d, p)).collect()
    }

    /// `min(v_p(D_i), cap)` with `v_p(0) = cap`.
    pub fn truncated_valuations(&self, p: u64, cap: u32) -> Vec<u32> {
        self.valuations(p)
            .into_iter()
            .map(|v| v.map_or(cap, |v| v.min(cap)))
            .collect()
    }

    pub fn is_zero_mod(&self, p: u64) -> bool {
        let pb = BigInt::from(p);
        self.partials.iter().all(|d| (d % &pb).is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn height_pairs() {
        let f = MonicIntPoly::from_i64(&[3, -10, 26]).unwrap();
        // 3, sqrt(10) ~ 3.16, 26^(1/3) ~ 2.96
        let h = f.height();
        assert_eq!((h.index, h.abs_coeff.clone()), (2, BigInt::from(10)));
        assert!(f.has_height(&BigRational::from_integer(BigInt::from(4))));
        assert!(!f.has_height(&BigRational::from_integer(BigInt::from(3))));
        assert_eq!(h.cmp_bound(&BigRational::from_integer(BigInt::from(4))), Ordering::Less);
    }

    #[test]
    fn rejects_degree_zero() {
        assert!(MonicIntPoly::new(vec![]).is_err());
    }
}
