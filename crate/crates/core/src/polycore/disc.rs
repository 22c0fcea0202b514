//! Integer discriminants and gradients at points.
//!
//! The exact discriminant is computed multi-modularly: the Sylvester
//! determinant is evaluated modulo enough 62-bit primes to exceed twice its
//! Hadamard bound and then lifted by CRT. Bareiss elimination over `BigInt`
//! remains available as an independent route.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::{bareiss_det, det_mod_prime_power, sylvester};
use super::{DiscGradient, MonicIntPoly};
use crate::arith::{crt_primes, CrtAccumulator, Zmod};
use crate::error::{Error, Result};

fn sign_flip(n: usize) -> bool {
    (n * (n - 1) / 2) % 2 == 1
}

/// Sylvester matrix of `f` and `f'` modulo `ring`, row-major, size `2n-1`.
fn fill_sylvester_mod(c: &[u64], ring: &Zmod, out: &mut Vec<u64>) {
    let n = c.len();
    let size = 2 * n - 1;
    out.clear();
    out.resize(size * size, 0);
    let one = 1 % ring.modulus();
    for r in 0..n - 1 {
        out[r * size + r] = one;
        for (j, &cj) in c.iter().enumerate() {
            out[r * size + r + 1 + j] = cj;
        }
    }
    for r in 0..n {
        let row = n - 1 + r;
        out[row * size + r] = ring.from_i64(n as i64);
        for j in 0..n - 1 {
            out[row * size + r + 1 + j] = ring.mul(ring.from_i64((n - 1 - j) as i64), c[j]);
        }
    }
}

/// Discriminant modulo `p^e` (`ring` must be `Z/p^e`) for coefficients
/// given as residues. For a prime modulus pass `e = 1`.
pub fn discriminant_mod(c: &[u64], ring: &Zmod, p: u64, e: u32) -> u64 {
    let mut scratch = Vec::new();
    discriminant_mod_with(c, ring, p, e, &mut scratch)
}

pub(crate) fn discriminant_mod_with(
    c: &[u64],
    ring: &Zmod,
    p: u64,
    e: u32,
    scratch: &mut Vec<u64>,
) -> u64 {
    let n = c.len();
    if n == 1 {
        return 1 % ring.modulus();
    }
    fill_sylvester_mod(c, ring, scratch);
    let det = det_mod_prime_power(scratch, 2 * n - 1, ring, p, e);
    if sign_flip(n) {
        ring.neg(det)
    } else {
        det
    }
}

/// Bit length bounding `|disc|` for all coefficient vectors with
/// `|c_i| <= bounds[i]` (Hadamard's inequality on the Sylvester rows).
fn hadamard_bits(bounds: &[BigInt]) -> u64 {
    let n = bounds.len();
    let mut row_a = BigInt::one();
    let mut row_b = BigInt::from(n * n);
    for (i, b) in bounds.iter().enumerate() {
        row_a += b * b;
        if i + 1 < n {
            let t = b * BigInt::from(n - 1 - i);
            row_b += &t * &t;
        }
    }
    let half = |x: &BigInt| x.bits().div_ceil(2);
    (n as u64 - 1) * half(&row_a) + n as u64 * half(&row_b)
}

fn primes_for_bits(bits: u64) -> &'static [u64] {
    // each CRT prime exceeds 2^61
    let r = (bits + 2).div_ceil(61) as usize;
    let primes = crt_primes();
    assert!(r <= primes.len(), "discriminant too large for the CRT prime table");
    &primes[..r]
}

/// `disc(f) = (-1)^{n(n-1)/2} Res(f, f')`; degree 1 gives 1.
pub fn discriminant(f: &MonicIntPoly) -> BigInt {
    let n = f.degree();
    if n == 1 {
        return BigInt::one();
    }
    let bounds: Vec<BigInt> = f.coeffs().iter().map(|c| c.abs()).collect();
    let mut acc = CrtAccumulator::default();
    let mut scratch = Vec::new();
    let mut cq = vec![0u64; n];
    for &q in primes_for_bits(hadamard_bits(&bounds)) {
        let ring = Zmod::new(q);
        for (dst, c) in cq.iter_mut().zip(f.coeffs()) {
            *dst = ring.from_bigint(c);
        }
        acc.push(discriminant_mod_with(&cq, &ring, q, 1, &mut scratch), q);
    }
    acc.symmetric()
}

/// Same value through fraction-free elimination over `BigInt`.
pub fn discriminant_bareiss(f: &MonicIntPoly) -> BigInt {
    let n = f.degree();
    if n == 1 {
        return BigInt::one();
    }
    let a = f.dense_descending();
    let b: Vec<BigInt> = (0..n)
        .map(|j| &a[j] * BigInt::from(n - j))
        .collect();
    let det = bareiss_det(sylvester(&a, &b));
    if sign_flip(n) {
        -det
    } else {
        det
    }
}

/// Derivative-at-zero weights for interpolation at the nodes `-n..=n`:
/// `P'(0) = (sum_j weights[j] * P(nodes[j])) / denom` for `deg P <= 2n`.
#[derive(Debug, Clone)]
pub struct InterpolationWeights {
    pub nodes: Vec<i64>,
    pub weights: Vec<BigInt>,
    pub denom: BigInt,
    abs_sum_bits: u64,
}

pub fn interpolation_weights(n: usize) -> &'static InterpolationWeights {
    static TABLE: OnceLock<Vec<InterpolationWeights>> = OnceLock::new();
    let table = TABLE.get_or_init(|| (0..=16).map(build_weights).collect());
    &table[n]
}

fn build_weights(n: usize) -> InterpolationWeights {
    let nodes: Vec<i64> = (-(n as i64)..=n as i64).collect();
    let rat = |x: i64| BigRational::from_integer(BigInt::from(x));
    let w: Vec<BigRational> = nodes
        .iter()
        .enumerate()
        .map(|(j, &tj)| {
            if tj == 0 {
                // sum of 1/(0 - t_m) over a symmetric node set
                return BigRational::zero();
            }
            let mut acc = BigRational::one() / rat(tj);
            for (l, &tl) in nodes.iter().enumerate() {
                if l != j && tl != 0 {
                    acc = acc * rat(-tl) / rat(tj - tl);
                }
            }
            acc
        })
        .collect();
    let denom = w
        .iter()
        .fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let weights: Vec<BigInt> = w
        .iter()
        .map(|x| (x * BigRational::from_integer(denom.clone())).to_integer())
        .collect();
    let abs_sum: BigInt = weights.iter().map(|x| x.abs()).sum();
    InterpolationWeights {
        nodes,
        weights,
        denom,
        abs_sum_bits: abs_sum.bits(),
    }
}

/// Exact gradient of the discriminant in `c_1, ..., c_n`.
///
/// `D_i` is the derivative at `t = 0` of `t -> disc(f + t x^{n-i})`, a
/// polynomial of degree at most `2n`, recovered from its values at `2n+1`
/// nodes. The interpolation is done modulo each CRT prime.
pub fn grad_disc(f: &MonicIntPoly) -> DiscGradient {
    let n = f.degree();
    if n == 1 {
        return DiscGradient {
            disc: BigInt::one(),
            partials: vec![BigInt::zero()],
        };
    }
    let w = interpolation_weights(n);
    let bounds: Vec<BigInt> = f
        .coeffs()
        .iter()
        .map(|c| c.abs() + BigInt::from(n))
        .collect();
    let bits = hadamard_bits(&bounds) + w.abs_sum_bits;
    let mut disc_acc = CrtAccumulator::default();
    let mut accs = vec![CrtAccumulator::default(); n];
    let mut scratch = Vec::new();
    let mut cq = vec![0u64; n];
    for &q in primes_for_bits(bits) {
        let ring = Zmod::new(q);
        for (dst, c) in cq.iter_mut().zip(f.coeffs()) {
            *dst = ring.from_bigint(c);
        }
        disc_acc.push(discriminant_mod_with(&cq, &ring, q, 1, &mut scratch), q);
        let wq: Vec<u64> = w.weights.iter().map(|x| ring.from_bigint(x)).collect();
        let dinv = ring.inv(ring.from_bigint(&w.denom)).expect("denominator is a unit");
        for i in 0..n {
            let base = cq[i];
            let mut s = 0u64;
            for (j, &t) in w.nodes.iter().enumerate() {
                if wq[j] == 0 {
                    continue;
                }
                cq[i] = ring.add(base, ring.from_i64(t));
                let d = discriminant_mod_with(&cq, &ring, q, 1, &mut scratch);
                s = ring.add(s, ring.mul(wq[j], d));
            }
            cq[i] = base;
            accs[i].push(ring.mul(s, dinv), q);
        }
    }
    DiscGradient {
        disc: disc_acc.symmetric(),
        partials: accs.iter().map(|a| a.symmetric()).collect(),
    }
}

/// Gradient of the discriminant modulo `p^k` at integer points, by the same
/// interpolation carried out modulo `p^{k+e}` where `p^e` exactly divides
/// the interpolation denominator.
#[derive(Debug, Clone)]
pub struct LocalGradient {
    n: usize,
    p: u64,
    k: u32,
    extra: u32,
    wide: Zmod,
    narrow: Zmod,
    weights: Vec<(i64, u64)>,
    extra_pow: u64,
    unit_inv: u64,
}

impl LocalGradient {
    pub fn new(n: usize, p: u64, k: u32) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::Precondition(format!("degree {n} outside 1..=16")));
        }
        let w = interpolation_weights(n);
        let pb = BigInt::from(p);
        let mut unit = w.denom.clone();
        let mut extra = 0u32;
        while (&unit % &pb).is_zero() {
            unit /= &pb;
            extra += 1;
        }
        let wide_mod = p
            .checked_pow(k + extra)
            .filter(|&m| m < (1u64 << 63))
            .ok_or(Error::Capacity {
                what: "gradient modulus p^(k+e)",
                needed_log2: (k + extra) as f64 * (p as f64).log2(),
                limit_log2: 63,
            })?;
        let wide = Zmod::new(wide_mod);
        let narrow = Zmod::new(p.pow(k));
        let weights = w
            .nodes
            .iter()
            .zip(&w.weights)
            .filter(|(_, x)| !x.is_zero())
            .map(|(&t, x)| (t, wide.from_bigint(x)))
            .collect();
        let unit_inv = narrow
            .inv(narrow.from_bigint(&unit))
            .expect("unit part is invertible");
        Ok(LocalGradient {
            n,
            p,
            k,
            extra,
            wide,
            narrow,
            weights,
            extra_pow: p.pow(extra),
            unit_inv,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.narrow.modulus()
    }

    /// `(D_1, ..., D_n) mod p^k` at the integer point `c` (entries are
    /// nonnegative integers, any lift of the class mod `p^k`).
    pub fn gradient(&self, c: &[u64], scratch: &mut Vec<u64>) -> Vec<u64> {
        assert_eq!(c.len(), self.n);
        let mut out = vec![0u64; self.n];
        if self.n == 1 {
            return out;
        }
        let m = self.wide.modulus();
        let mut cw: Vec<u64> = c.iter().map(|&x| x % m).collect();
        for i in 0..self.n {
            let base = cw[i];
            let mut s = 0u64;
            for &(t, wt) in &self.weights {
                cw[i] = self.wide.add(base, self.wide.from_i64(t));
                let d = discriminant_mod_with(&cw, &self.wide, self.p, self.k + self.extra, scratch);
                s = self.wide.add(s, self.wide.mul(wt, d));
            }
            cw[i] = base;
            debug_assert_eq!(s % self.extra_pow, 0);
            let reduced = (s / self.extra_pow) % self.narrow.modulus();
            out[i] = self.narrow.mul(reduced, self.unit_inv);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(c: &[i64]) -> MonicIntPoly {
        MonicIntPoly::from_i64(c).unwrap()
    }

    #[test]
    fn small_examples() {
        assert_eq!(discriminant(&poly(&[0, -1])), BigInt::from(4));
        assert_eq!(discriminant(&poly(&[-2, 1])), BigInt::zero());
        assert_eq!(discriminant(&poly(&[0, -1, 0])), BigInt::from(4));
        assert_eq!(discriminant(&poly(&[7])), BigInt::one());
        let g = grad_disc(&poly(&[3, 1]));
        assert_eq!(g.disc, BigInt::from(5));
        assert_eq!(g.partials, vec![BigInt::from(6), BigInt::from(-4)]);
        let g = grad_disc(&poly(&[0, -1, 0]));
        assert_eq!(g.partials, vec![BigInt::zero(), BigInt::from(-12), BigInt::zero()]);
    }

    #[test]
    fn weights_differentiate_polynomials() {
        for n in 1..=8 {
            let w = interpolation_weights(n);
            // P(t) = t + t^{2n}: derivative 1 at zero
            let s: BigInt = w
                .nodes
                .iter()
                .zip(&w.weights)
                .map(|(&t, x)| x * (BigInt::from(t) + BigInt::from(t).pow(2 * n as u32)))
                .sum();
            assert_eq!(s, w.denom.clone());
        }
    }

    #[test]
    fn large_coefficients() {
        let f = MonicIntPoly::new(vec![
            BigInt::from(10).pow(30),
            -BigInt::from(10).pow(25) + 7,
            BigInt::from(3),
            BigInt::from(10).pow(40),
        ])
        .unwrap();
        assert_eq!(discriminant(&f), discriminant_bareiss(&f));
    }

    proptest! {
        #[test]
        fn modular_route_matches_bareiss(c in proptest::collection::vec(-1000i64..1000, 1..9)) {
            let f = poly(&c);
            prop_assert_eq!(discriminant(&f), discriminant_bareiss(&f));
        }

        #[test]
        fn local_gradient_reduces_integer_gradient(
            c in proptest::collection::vec(0u64..200, 2..7),
            pk in prop_oneof![Just((2u64, 3u32)), Just((3, 2)), Just((5, 1)), Just((2, 1))],
        ) {
            let (p, k) = pk;
            let f = MonicIntPoly::new(c.iter().map(|&x| BigInt::from(x)).collect()).unwrap();
            let exact = grad_disc(&f);
            let lg = LocalGradient::new(c.len(), p, k).unwrap();
            let got = lg.gradient(&c, &mut Vec::new());
            let m = BigInt::from(p.pow(k));
            let want: Vec<u64> = exact.partials.iter().map(|d| {
                u64::try_from(d.mod_floor(&m)).unwrap()
            }).collect();
            prop_assert_eq!(got, want);
        }
    }
}
