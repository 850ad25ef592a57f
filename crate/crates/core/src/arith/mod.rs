//! Exact arithmetic: rationals, p-adic valuations, residue symbols, small
//! number-theoretic helpers, rational polynomials and Newton polygons.
//!
//! Nothing in this crate uses floating point.

mod newton;
mod poly;
mod symbol;

pub use newton::{newton_polygon, NewtonPolygon, Segment};
pub use poly::{cyclotomic_polynomial, RationalPoly};
pub use symbol::{jacobi_symbol, kronecker_symbol, legendre_by_enumeration};

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Exact rational number. `num_rational` keeps it in lowest terms with a
/// positive denominator after every operation.
pub type Rational = num_rational::BigRational;

/// A p-adic valuation value, `Infinite` only for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// p-adic valuation normalized by ν(p) = 1, by repeated division.
pub fn valuation_int(x: &BigInt, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let p = BigInt::from(p);
    let mut n = x.abs();
    let mut v = 0i64;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Valuation::Finite(v);
        }
        n = q;
        v += 1;
    }
}

/// ν(num) − ν(den).
pub fn valuation(x: &Rational, p: u64) -> Valuation {
    match valuation_int(x.numer(), p) {
        Valuation::Infinite => Valuation::Infinite,
        Valuation::Finite(a) => {
            let b = valuation_int(x.denom(), p).finite().unwrap_or(0);
            Valuation::Finite(a - b)
        }
    }
}

/// ν_p of a machine integer; `None` for zero.
pub fn valuation_i64(x: i64, p: u64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let p = p as i128;
    let mut n = (x as i128).abs();
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    Some(v)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        invalid(format!("{p} is not a prime"))
    }
}

/// Prime factorization by trial division, as (prime, exponent) pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
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

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(1, |acc, (q, e)| acc * (q - 1) * q.pow(e - 1))
}

/// Smallest k ≥ 1 with a^k ≡ 1 mod n. Requires gcd(a, n) = 1; n = 1 gives 1.
pub fn multiplicative_order(a: u64, n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    debug_assert_eq!(a.gcd(&n), 1);
    let a = a % n;
    let mut x = a;
    let mut k = 1;
    while x != 1 {
        x = ((x as u128 * a as u128) % n as u128) as u64;
        k += 1;
    }
    k
}

/// Squarefree part of a nonzero integer, keeping the sign.
pub fn squarefree_part(n: i64) -> i64 {
    assert!(n != 0, "squarefree part of zero");
    let sign = n.signum();
    let core: u64 = factorize(n.unsigned_abs())
        .into_iter()
        .filter(|&(_, e)| e % 2 == 1)
        .map(|(q, _)| q)
        .product();
    sign * core as i64
}

/// Discriminant of the quadratic field Q(√n), n not a perfect square.
pub fn fundamental_discriminant(n: i64) -> Result<i64> {
    if n == 0 {
        return invalid("Q(sqrt 0) is not a field");
    }
    let s = squarefree_part(n);
    if s == 1 {
        return invalid(format!("{n} is a perfect square; Q(sqrt {n}) = Q"));
    }
    Ok(if s.rem_euclid(4) == 1 { s } else { 4 * s })
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match fundamental_discriminant(d) {
        Ok(f) => f == d,
        Err(_) => false,
    }
}

/// Integer square root of a nonnegative perfect square.
pub fn exact_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

/// Parses "a", "-a" or "a/b" into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| crate::Error::InvalidInput(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| crate::Error::InvalidInput(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return invalid(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: "n" for integers, "n/d" otherwise.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
