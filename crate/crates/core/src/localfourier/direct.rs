//! Support of `psi` by enumerating all of `(Z/p^{2k})^n`. Independent of the
//! cell decomposition and used as its oracle.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::arith::Zmod;
use crate::error::{Error, Result};
use crate::polycore::disc::discriminant_mod_with;
use crate::sampling::map_chunks;
use crate::Limits;

use super::{FourierSource, FourierValue, ResidueParams};

#[derive(Debug, Clone)]
pub struct DirectSupport {
    pub params: ResidueParams,
    /// Support points, `n` coordinates each, flattened.
    points: Vec<u32>,
}

const CHUNK: u64 = 1 << 14;

impl DirectSupport {
    pub fn build(rp: ResidueParams, limits: &Limits) -> Result<DirectSupport> {
        Limits::check("direct enumeration p^(2kn)", rp.log2_space(), limits.direct_bits.min(62))?;
        let m = rp.modulus();
        if m > u32::MAX as u64 {
            return Err(Error::Capacity {
                what: "direct modulus p^(2k)",
                needed_log2: (m as f64).log2(),
                limit_log2: 32,
            });
        }
        let total = m.pow(rp.n as u32);
        let ring = Zmod::new(m);
        let chunks = map_chunks(total, CHUNK, |_, start, len| {
            let mut c = vec![0u64; rp.n];
            let mut idx = start;
            for x in c.iter_mut() {
                *x = idx % m;
                idx /= m;
            }
            let mut scratch = Vec::new();
            let mut found = Vec::new();
            for _ in 0..len {
                if discriminant_mod_with(&c, &ring, rp.p, 2 * rp.k, &mut scratch) == 0 {
                    found.extend(c.iter().map(|&x| x as u32));
                }
                for x in c.iter_mut() {
                    *x += 1;
                    if *x < m {
                        break;
                    }
                    *x = 0;
                }
            }
            found
        });
        Ok(DirectSupport {
            params: rp,
            points: chunks.into_iter().flatten().collect(),
        })
    }

    pub fn count(&self) -> u64 {
        (self.points.len() / self.params.n) as u64
    }

    pub fn points(&self) -> impl Iterator<Item = &[u32]> {
        self.points.chunks_exact(self.params.n)
    }

    pub fn density(&self) -> BigRational {
        let total = BigInt::from(self.params.modulus()).pow(self.params.n as u32);
        BigRational::new(BigInt::from(self.count()), total)
    }
}

impl FourierSource for DirectSupport {
    fn params(&self) -> ResidueParams {
        self.params
    }

    fn histogram_into(&self, u: &[u64], hist: &mut [u64]) {
        hist.fill(0);
        let m = self.params.modulus() as u128;
        let u: Vec<u128> = u.iter().map(|&x| x as u128 % m).collect();
        for c in self.points() {
            let j = c
                .iter()
                .zip(&u)
                .fold(0u128, |acc, (&x, &y)| (acc + x as u128 * y) % m);
            hist[j as usize] += 1;
        }
    }
}

/// Exact transform by direct enumeration.
pub fn fourier_exact(rp: ResidueParams, u: &[u64], limits: &Limits) -> Result<FourierValue> {
    if u.len() != rp.n {
        return Err(Error::Precondition(format!("phase length {} != {}", u.len(), rp.n)));
    }
    Ok(DirectSupport::build(rp, limits)?.transform(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::{discriminant, MonicIntPoly};

    #[test]
    fn quadratic_support_by_hand() {
        // c1^2 - 4 c2 = 0 mod 4 for c mod 4
        let rp = ResidueParams::new(2, 2, 1).unwrap();
        let d = DirectSupport::build(rp, &Limits::default()).unwrap();
        let mut expected = 0;
        for c1 in 0..4i64 {
            for c2 in 0..4i64 {
                let disc = discriminant(&MonicIntPoly::from_i64(&[c1, c2]).unwrap());
                if (disc % 4i64) == BigInt::from(0) {
                    expected += 1;
                }
            }
        }
        assert_eq!(d.count(), expected);
        assert_eq!(expected, 8);
    }

    #[test]
    fn capacity_is_enforced() {
        let rp = ResidueParams::new(6, 2, 3).unwrap();
        let err = DirectSupport::build(rp, &Limits::default()).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }
}
