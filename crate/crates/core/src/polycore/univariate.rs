//! Univariate gcd over `Q` by primitive pseudo-remainder sequences, used to
//! detect repeated roots independently of any discriminant computation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::MonicIntPoly;

/// Dense polynomial, descending degree order, no leading zeros.
type Dense = Vec<BigInt>;

fn trim(mut a: Dense) -> Dense {
    let lead = a.iter().position(|c| !c.is_zero()).unwrap_or(a.len());
    a.drain(..lead);
    a
}

fn primitive(a: Dense) -> Dense {
    let g = a.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() || g == BigInt::from(1) {
        return a;
    }
    a.into_iter().map(|c| c / &g).collect()
}

/// Pseudo-remainder of `a` by `b` (both nonzero, descending).
fn prem(a: &[BigInt], b: &[BigInt]) -> Dense {
    let mut r: Dense = a.to_vec();
    let db = b.len() - 1;
    let lb = &b[0];
    while r.len() > db {
        if r[0].is_zero() {
            r.remove(0);
            continue;
        }
        let lr = r[0].clone();
        for x in r.iter_mut() {
            *x *= lb;
        }
        for (j, bj) in b.iter().enumerate() {
            r[j] -= &lr * bj;
        }
        r.remove(0);
    }
    trim(r)
}

/// Degree of `gcd(a, b)` over `Q`.
pub fn gcd_degree(a: &[BigInt], b: &[BigInt]) -> usize {
    let mut x = primitive(trim(a.to_vec()));
    let mut y = primitive(trim(b.to_vec()));
    if x.is_empty() {
        return y.len().saturating_sub(1);
    }
    if y.is_empty() {
        return x.len() - 1;
    }
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    loop {
        let r = prem(&x, &y);
        if r.is_empty() {
            return y.len() - 1;
        }
        x = y;
        y = primitive(r);
        if y.len() == 1 {
            return 0;
        }
    }
}

/// True iff `gcd(f, f')` has positive degree.
pub fn has_repeated_root(f: &MonicIntPoly) -> bool {
    let n = f.degree();
    let a = f.dense_descending();
    let b: Vec<BigInt> = (0..n).map(|j| &a[j] * BigInt::from(n - j)).collect();
    gcd_degree(&a, &b) > 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_squares() {
        let f = MonicIntPoly::from_i64(&[-6, 13, -12, 4]).unwrap();
        assert!(has_repeated_root(&f));
        assert!(!has_repeated_root(&MonicIntPoly::from_i64(&[0, -1, 0]).unwrap()));
        assert!(has_repeated_root(&MonicIntPoly::from_i64(&[0, 0]).unwrap()));
        assert!(!has_repeated_root(&MonicIntPoly::from_i64(&[5]).unwrap()));
    }
}
