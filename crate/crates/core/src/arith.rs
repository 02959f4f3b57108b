//! Elementary number theory on machine integers: Kronecker symbols,
//! valuations, factorization and primality.

use crate::error::{Error, Result};

/// Largest value `factorize` accepts. Below this bound Miller-Rabin with the
/// first seven prime bases is deterministic.
pub const FACTOR_LIMIT: u64 = 330_000_000_000_000;

const TRIAL_BOUND: u64 = 1_000_000;

/// A positive integer together with its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.value
    }

    /// `(prime, exponent)` pairs, sorted by prime.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Multiplies the factors back together.
    pub fn reassemble(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * p.pow(e))
    }
}

/// Kronecker symbol `(a | n)` for `n >= 1`.
pub fn kronecker(a: i64, n: u64) -> i8 {
    assert!(n >= 1, "kronecker symbol needs n >= 1");
    let mut n = n;
    let mut result: i8 = 1;

    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        n >>= twos;
        if twos % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    if n == 1 {
        return result;
    }

    // Jacobi symbol for odd n.
    let mut a = a.rem_euclid(n as i64) as u64;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            result = -result;
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Largest `k` with `p^k | n`.
pub fn valuation(n: i128, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    assert!(p >= 2);
    let p = p as i128;
    let mut n = n;
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

/// `p`-adic valuation of an unsigned integer; shorthand for the common case.
pub fn val(n: u64, p: u64) -> u32 {
    valuation(n as i128, p)
}

/// Strips every factor of `p` from `n`.
pub fn strip(n: u64, p: u64) -> u64 {
    let mut n = n;
    while n.is_multiple_of(p) {
        n /= p;
    }
    n
}

pub fn mod_pow(base: u64, exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = (base % modulus) as u128;
    let mut e = exp;
    let mut acc = 1u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

/// Deterministic primality test for `n < FACTOR_LIMIT`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    assert!(n < FACTOR_LIMIT, "is_prime: {n} beyond the deterministic range");
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Factors `n` by trial division to 10^6 followed by a primality test on the
/// cofactor.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::InvalidInput("cannot factor 0".into()));
    }
    if n >= FACTOR_LIMIT {
        return Err(Error::TooLarge(format!(
            "{n} exceeds the factoring limit {FACTOR_LIMIT}"
        )));
    }
    let mut factors = Vec::new();
    let mut m = n;
    let mut d = 2u64;
    while d <= TRIAL_BOUND && d * d <= m {
        if m.is_multiple_of(d) {
            let mut e = 0;
            while m.is_multiple_of(d) {
                m /= d;
                e += 1;
            }
            factors.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 && !is_prime(m) {
        // Both remaining factors exceed the trial bound; m < 3.3e14 keeps
        // sqrt(m) below 2e7.
        while d * d <= m {
            if m.is_multiple_of(d) {
                let mut e = 0;
                while m.is_multiple_of(d) {
                    m /= d;
                    e += 1;
                }
                factors.push((d, e));
            }
            d += 2;
        }
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(Factorization { value: n, factors })
}

/// Convenience: the distinct primes dividing `n` (`n >= 1`).
pub fn prime_divisors(n: u64) -> Result<Vec<u64>> {
    Ok(factorize(n)?.primes().collect())
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    num_integer::lcm(a, b)
}

/// Floor of the square root.
pub fn isqrt(n: u64) -> u64 {
    num_integer::Roots::sqrt(&n)
}

/// Whether `d` is a negative fundamental discriminant.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d >= 0 {
        return false;
    }
    let m = d.rem_euclid(4);
    if m == 1 {
        squarefree(d.unsigned_abs())
    } else if m == 0 {
        let q = d / 4;
        let r = q.rem_euclid(4);
        (r == 2 || r == 3) && squarefree(q.unsigned_abs())
    } else {
        false
    }
}

fn squarefree(n: u64) -> bool {
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d * d) {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kronecker_examples() {
        for p in [2u64, 3, 5, 7, 11, 13, 101] {
            assert_eq!(kronecker(1, p), 1);
            assert_eq!(kronecker(p as i64, p), 0);
        }
        assert_eq!(kronecker(-3, 11), -1);
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(-1, 1), 1);
    }

    #[test]
    fn kronecker_matches_square_table_mod_11() {
        // Squares mod 11 by exhaustion.
        let squares: Vec<i64> = (1..11).map(|x| x * x % 11).collect();
        for a in -30i64..30 {
            let r = a.rem_euclid(11);
            let expected = if r == 0 {
                0
            } else if squares.contains(&r) {
                1
            } else {
                -1
            };
            assert_eq!(kronecker(a, 11), expected, "a = {a}");
        }
    }

    #[test]
    fn kronecker_is_multiplicative_in_n() {
        for a in -40i64..40 {
            for m in 1u64..30 {
                for n in 1u64..30 {
                    assert_eq!(
                        kronecker(a, m * n),
                        kronecker(a, m) * kronecker(a, n),
                        "a={a} m={m} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(1, 5), 0);
        assert_eq!(valuation(12, 2), 2);
        assert_eq!(valuation(12, 3), 1);
        assert_eq!(valuation(-250, 5), 3);
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().factors().is_empty());
        assert_eq!(factorize(36).unwrap().factors(), &[(2, 2), (3, 2)]);
        assert_eq!(
            factorize(9999).unwrap().factors(),
            &[(3, 2), (11, 1), (101, 1)]
        );
        // two primes above the trial bound
        let n = 1_000_003u64 * 1_000_033;
        assert_eq!(
            factorize(n).unwrap().factors(),
            &[(1_000_003, 1), (1_000_033, 1)]
        );
    }

    #[test]
    fn factorize_rejects_large_input() {
        assert!(matches!(factorize(FACTOR_LIMIT), Err(Error::TooLarge(_))));
        assert!(matches!(factorize(u64::MAX), Err(Error::TooLarge(_))));
        assert!(factorize(0).is_err());
    }

    #[test]
    fn fundamental_discriminants() {
        for d in [-3, -4, -7, -8, -11, -15, -19, -20, -24, -23] {
            assert!(is_fundamental_discriminant(d), "{d}");
        }
        for d in [-1, -2, -12, -16, -27, -36, 5, -5] {
            assert!(!is_fundamental_discriminant(d), "{d}");
        }
    }

    proptest! {
        #[test]
        fn euler_criterion(a in -10_000i64..10_000, idx in 0usize..12) {
            let p = [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 101, 997][idx];
            let k = kronecker(a, p);
            let e = mod_pow(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
            let k_mod = (k as i64).rem_euclid(p as i64) as u64;
            prop_assert_eq!(k_mod, e);
        }

        #[test]
        fn factorization_reassembles(n in 1u64..5_000_000_000) {
            let f = factorize(n).unwrap();
            prop_assert_eq!(f.reassemble(), n);
            let fs = f.factors();
            for w in fs.windows(2) {
                prop_assert!(w[0].0 < w[1].0);
            }
            for &(p, e) in fs {
                prop_assert!(e >= 1);
                prop_assert!(is_prime(p));
            }
        }
    }
}
