//! Machine-word modular arithmetic, primality, valuations and CRT.
//!
//! Everything here is exact. Residue rings are `Z/mZ` with `m < 2^63`; the
//! multiplication switches to 128-bit intermediates only when the modulus
//! does not fit in 32 bits.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The ring `Z/mZ` for a modulus below `2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zmod {
    m: u64,
    narrow: bool,
}

impl Zmod {
    pub fn new(m: u64) -> Self {
        assert!(m >= 1 && m < (1u64 << 63), "modulus out of range: {m}");
        Zmod {
            m,
            narrow: m <= (1u64 << 32),
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.m
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.narrow {
            (a * b) % self.m
        } else {
            ((a as u128 * b as u128) % self.m as u128) as u64
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.m;
        base %= self.m;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse of a unit; `None` when `gcd(a, m) != 1`.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let (mut r0, mut r1) = (self.m as i128, (a % self.m) as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        if r0 != 1 {
            return None;
        }
        Some(s0.rem_euclid(self.m as i128) as u64)
    }

    #[inline]
    pub fn from_i64(&self, a: i64) -> u64 {
        (a as i128).rem_euclid(self.m as i128) as u64
    }

    pub fn from_bigint(&self, a: &BigInt) -> u64 {
        if let Some(v) = a.to_i64() {
            return self.from_i64(v);
        }
        let r = a.mod_floor(&BigInt::from(self.m));
        r.to_u64().expect("reduced residue fits u64")
    }
}

/// `p^e`, or `None` on overflow of `u64`.
pub fn checked_pow(p: u64, e: u32) -> Option<u64> {
    p.checked_pow(e)
}

/// p-adic valuation of a residue `x` in `Z/p^e`: `e` for zero (the
/// truncated value of +inf).
pub fn residue_valuation(x: u64, p: u64, e: u32) -> u32 {
    if x == 0 {
        return e;
    }
    let mut v = 0;
    let mut y = x;
    while y % p == 0 && v < e {
        y /= p;
        v += 1;
    }
    v
}

/// p-adic valuation of an integer; `None` stands for +inf (the zero integer).
pub fn valuation_bigint(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    if let Some(small) = x.to_i128() {
        let mut y = small.unsigned_abs();
        let mut v = 0;
        while y % p as u128 == 0 {
            y /= p as u128;
            v += 1;
        }
        return Some(v);
    }
    let pb = BigInt::from(p);
    let mut y = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = y.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        y = q;
        v += 1;
    }
}

/// Truncated valuation `min(v_p(x), cap)` with `v_p(0) = +inf`.
pub fn truncated_valuation(x: &BigInt, p: u64, cap: u32) -> u32 {
    valuation_bigint(x, p).map_or(cap, |v| v.min(cap))
}

fn mulmod_wide(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn powmod_wide(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod_wide(acc, base, n);
        }
        base = mulmod_wide(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin, valid for every `u64` (the first twelve prime
/// bases suffice below `3.3 * 10^24`).
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'bases: for a in BASES {
        let mut x = powmod_wide(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod_wide(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Prime factorisation by trial division, ascending primes.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn radical(n: u64) -> u64 {
    factor_u64(n).iter().map(|&(p, _)| p).product()
}

/// Primes up to `bound` (inclusive) by a plain sieve.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    let n = bound as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Descending list of the largest primes below `2^62`, used as CRT moduli.
pub fn crt_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::with_capacity(256);
        let mut c = (1u64 << 62) - 1;
        while out.len() < 256 {
            if is_prime(c) {
                out.push(c);
            }
            c -= 2;
        }
        out
    })
}

/// Incremental Chinese remaindering (Garner form) producing the symmetric
/// representative.
#[derive(Debug, Clone)]
pub struct CrtAccumulator {
    value: BigInt,
    modulus: BigInt,
}

impl Default for CrtAccumulator {
    fn default() -> Self {
        CrtAccumulator {
            value: BigInt::zero(),
            modulus: BigInt::one(),
        }
    }
}

impl CrtAccumulator {
    pub fn push(&mut self, residue: u64, q: u64) {
        let ring = Zmod::new(q);
        let cur = ring.from_bigint(&self.value);
        let mmod = ring.from_bigint(&self.modulus);
        let inv = ring.inv(mmod).expect("CRT moduli must be coprime");
        let t = ring.mul(ring.sub(residue % q, cur), inv);
        self.value += &self.modulus * BigInt::from(t);
        self.modulus *= BigInt::from(q);
    }

    pub fn modulus_bits(&self) -> u64 {
        self.modulus.bits()
    }

    /// Representative in `(-M/2, M/2]`.
    pub fn symmetric(&self) -> BigInt {
        let half = &self.modulus >> 1u32;
        if self.value > half {
            &self.value - &self.modulus
        } else {
            self.value.clone()
        }
    }
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes_agree_with_sieve() {
        let sieve = primes_up_to(10_000);
        let mr: Vec<u64> = (0..=10_000).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieve, mr);
    }

    #[test]
    fn known_large_primes() {
        assert!(is_prime((1u64 << 61) - 1));
        assert!(!is_prime((1u64 << 61) + 1));
        assert!(is_prime(18_446_744_073_709_551_557));
        // strong pseudoprime to bases 2..=37 products are excluded by determinism
        assert!(!is_prime(3_215_031_751));
        assert!(crt_primes().iter().all(|&q| q < (1 << 62) && is_prime(q)));
    }

    #[test]
    fn inverse_and_pow() {
        let r = Zmod::new(64);
        assert_eq!(r.inv(3).map(|i| r.mul(i, 3)), Some(1));
        assert_eq!(r.inv(6), None);
        let big = Zmod::new(crt_primes()[0]);
        let x = 123_456_789_012_345u64;
        assert_eq!(big.mul(big.inv(x).unwrap(), x), 1);
        assert_eq!(r.pow(3, 0), 1);
    }

    #[test]
    fn valuations() {
        assert_eq!(residue_valuation(0, 2, 6), 6);
        assert_eq!(residue_valuation(48, 2, 6), 4);
        assert_eq!(valuation_bigint(&BigInt::from(-72), 3), Some(2));
        assert_eq!(valuation_bigint(&BigInt::zero(), 3), None);
        assert_eq!(truncated_valuation(&BigInt::zero(), 5, 3), 3);
        let huge = BigInt::from(7).pow(80) * BigInt::from(11);
        assert_eq!(valuation_bigint(&huge, 7), Some(80));
    }

    #[test]
    fn crt_recovers_negative_values() {
        let target = -BigInt::from(10).pow(40) + BigInt::from(12345);
        let mut acc = CrtAccumulator::default();
        for &q in crt_primes().iter().take(3) {
            acc.push(Zmod::new(q).from_bigint(&target), q);
        }
        assert_eq!(acc.symmetric(), target);
    }

    #[test]
    fn factor_and_radical() {
        assert_eq!(factor_u64(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(radical(81), 3);
        assert_eq!(radical(1), 1);
        assert_eq!(binomial(5, 2), BigInt::from(10));
    }
}
