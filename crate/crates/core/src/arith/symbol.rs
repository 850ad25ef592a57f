use crate::error::{invalid, Result};

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi_symbol(a: i64, n: i64) -> i8 {
    assert!(n > 0 && n % 2 == 1, "jacobi symbol needs odd positive modulus");
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol (a/m). For odd prime m this is the Legendre symbol.
pub fn kronecker_symbol(a: i64, m: i64) -> Result<i8> {
    if m == 0 {
        return invalid("kronecker symbol with modulus 0");
    }
    let mut result = 1i8;
    let mut m = m;
    if m < 0 {
        m = -m;
        if a < 0 {
            result = -result;
        }
    }
    let mut twos = 0;
    while m % 2 == 0 {
        m /= 2;
        twos += 1;
    }
    if twos > 0 {
        let two = match a.rem_euclid(8) {
            0 | 2 | 4 | 6 => 0,
            1 | 7 => 1,
            _ => -1,
        };
        if two == 0 {
            return Ok(0);
        }
        if twos % 2 == 1 {
            result *= two;
        }
    }
    Ok(result * jacobi_symbol(a, m))
}

/// Legendre symbol by listing the squares mod an odd prime.
pub fn legendre_by_enumeration(a: i64, p: u64) -> i8 {
    let p = p as i64;
    let r = a.rem_euclid(p);
    if r == 0 {
        0
    } else if (1..p).any(|x| (x * x) % p == r) {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;
    use proptest::prelude::*;

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker_symbol(-3, 5).unwrap(), -1);
        assert_eq!(kronecker_symbol(-4, 5).unwrap(), 1);
        assert_eq!(kronecker_symbol(-4, 3).unwrap(), -1);
        assert_eq!(kronecker_symbol(-3, 7).unwrap(), 1);
        for p in [3i64, 5, 7, 11, 13, 97] {
            assert_eq!(kronecker_symbol(1, p).unwrap(), 1);
        }
        assert!(kronecker_symbol(3, 0).is_err());
    }

    #[test]
    fn kronecker_at_two() {
        assert_eq!(kronecker_symbol(-7, 2).unwrap(), 1);
        assert_eq!(kronecker_symbol(-3, 2).unwrap(), -1);
        assert_eq!(kronecker_symbol(-4, 2).unwrap(), 0);
        assert_eq!(kronecker_symbol(-15, 2).unwrap(), 1);
    }

    #[test]
    fn matches_enumeration_for_odd_primes() {
        for p in (3u64..200).filter(|&p| is_prime(p)) {
            for a in -60i64..60 {
                assert_eq!(
                    kronecker_symbol(a, p as i64).unwrap(),
                    legendre_by_enumeration(a, p),
                    "a={a} p={p}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn multiplicative_in_numerator(a in 1i64..500, b in 1i64..500, idx in 0usize..8) {
            let p = [3i64, 5, 7, 11, 13, 17, 19, 23][idx];
            prop_assume!(a % p != 0 && b % p != 0);
            let lhs = kronecker_symbol(a * b, p).unwrap();
            let rhs = kronecker_symbol(a, p).unwrap() * kronecker_symbol(b, p).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
