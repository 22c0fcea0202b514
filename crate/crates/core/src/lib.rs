//! Exact discriminant statistics for monic integer polynomials.
//!
//! * [`polycore`]: discriminants, gradients, symbolic discriminants and
//!   resultants.
//! * [`symrel`]: algebraic identities satisfied by the discriminant
//!   gradient, and the resultant structure used by the strong-multiple
//!   criterion.
//! * [`localfourier`]: exact densities and Fourier transforms of
//!   `p^{2k} | disc` over residue rings.
//! * [`realdensity`]: Monte Carlo densities at the real place, the
//!   roots-to-coefficients measure change, and lattice counts.
//! * [`sievekit`]: powerful divisors, strong/weak multiples and censuses.

pub mod arith;
pub mod error;
pub mod localfourier;
pub mod polycore;
pub mod realdensity;
pub mod sampling;
pub mod serde_util;
pub mod sievekit;
pub mod symrel;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};

/// Enumeration budgets, as base-2 logarithms of point counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Exhaustive phase or support scans.
    pub exhaustive_bits: u32,
    /// Direct enumeration of `(Z/p^{2k})^n`.
    pub direct_bits: u32,
    /// Coset-cell enumeration of `(Z/p^k)^n`.
    pub coset_bits: u32,
    /// Lift enumeration in the strong/weak classifier.
    pub lift_bits: u32,
    /// Box enumeration for lattice counts and censuses (absolute count).
    pub box_budget: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            exhaustive_bits: 24,
            direct_bits: 26,
            coset_bits: 30,
            lift_bits: 20,
            box_budget: 1_000_000_000,
        }
    }
}

impl Limits {
    /// Same bit limit for every residue-ring enumeration.
    pub fn uniform(bits: u32) -> Self {
        Limits {
            exhaustive_bits: bits,
            direct_bits: bits,
            coset_bits: bits,
            lift_bits: bits,
            ..Limits::default()
        }
    }

    pub(crate) fn check(what: &'static str, needed_log2: f64, limit_log2: u32) -> Result<()> {
        if needed_log2 > limit_log2 as f64 + 1e-9 {
            Err(Error::Capacity {
                what,
                needed_log2,
                limit_log2,
            })
        } else {
            Ok(())
        }
    }
}
