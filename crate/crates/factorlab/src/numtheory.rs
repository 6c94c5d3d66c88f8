//! Modular arithmetic and the small group-theoretic toolkit behind the
//! orbit-graph construction: gcd, multiplicative orders, and a trial-division
//! semiprime validator used as the ground-truth oracle for vertex coloring.
//!
//! Everything here works on `u64` with products routed through `u128`, which
//! comfortably covers the desk-scale range (N below 2^31) the rest of the
//! crate is built for.

use crate::error::{Error, Result};

/// Greatest common divisor by the Euclidean algorithm.
pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

/// Least common multiple, with the product kept in `u128`.
pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    let g = gcd(a, b);
    ((a / g) as u128 * b as u128) as u64
}

/// `a * b mod m` without overflow.
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// True iff `alpha` is a unit of `Z/NZ`, i.e. `gcd(alpha, n) = 1`.
///
/// Callers are expected to pass `1 <= alpha < n`.
pub fn is_totative(alpha: u64, n: u64) -> bool {
    gcd(alpha, n) == 1
}

/// Deterministic primality by trial division up to `sqrt(n)`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    if n % 3 == 0 {
        return n == 3;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

/// Smallest `t >= 1` with `alpha^t ≡ 1 (mod m)`.
///
/// The loop is bounded by the group order, which is below `m`; desk-scale
/// moduli make anything cleverer unnecessary.
pub fn multiplicative_order(alpha: u64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::InvalidInput {
            reason: format!("modulus {m} must be at least 2"),
        });
    }
    let a = alpha % m;
    if gcd(a, m) != 1 {
        return Err(Error::InvalidTotative { alpha, modulus: m });
    }
    let mut acc = a;
    let mut t = 1u64;
    while acc != 1 {
        acc = mul_mod(acc, a, m);
        t += 1;
        if t > m {
            // unreachable for coprime input; guards against silent spin
            return Err(Error::InvalidTotative { alpha, modulus: m });
        }
    }
    Ok(t)
}

/// A validated factorization `N = p·q` of a semiprime with distinct primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorPair {
    p: u64,
    q: u64,
    n: u64,
}

impl FactorPair {
    /// Build a pair, enforcing `p·q = N`, `p != q`, both prime, `p < q`.
    pub fn new(p: u64, q: u64) -> Result<FactorPair> {
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        let n = p
            .checked_mul(q)
            .ok_or_else(|| Error::InvalidInput {
                reason: format!("{p} * {q} overflows u64"),
            })?;
        if p == q {
            return Err(Error::NotSemiprime {
                n,
                reason: format!("repeated prime factor {p}"),
            });
        }
        if !is_prime(p) || !is_prime(q) {
            return Err(Error::NotSemiprime {
                n,
                reason: format!("{p} and {q} must both be prime"),
            });
        }
        Ok(FactorPair { p, q, n })
    }

    /// Smaller prime factor.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Larger prime factor.
    pub fn q(&self) -> u64 {
        self.q
    }

    /// The semiprime `p·q`.
    pub fn n(&self) -> u64 {
        self.n
    }
}

/// Factor `n` by trial division, accepting only products of two distinct
/// primes.
///
/// This is the ground-truth oracle behind vertex coloring and input
/// validation; the walk and quantum pipelines themselves recover factors
/// through `gcd` alone.
pub fn factor_by_trial_division(n: u64) -> Result<FactorPair> {
    if n < 6 {
        return Err(Error::NotSemiprime {
            n,
            reason: "smallest semiprime with distinct factors is 6".into(),
        });
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let q = n / d;
            if q == d {
                return Err(Error::NotSemiprime {
                    n,
                    reason: format!("{n} = {d}^2 is a prime square"),
                });
            }
            if !is_prime(q) {
                return Err(Error::NotSemiprime {
                    n,
                    reason: format!("cofactor {q} of {d} is composite"),
                });
            }
            return FactorPair::new(d, q);
        }
        d += 1;
    }
    Err(Error::NotSemiprime {
        n,
        reason: format!("{n} is prime"),
    })
}
