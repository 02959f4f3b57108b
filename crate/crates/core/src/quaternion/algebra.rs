//! Definite quaternion algebras `(a, b)_Q` and their local invariants.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith;
use crate::error::{Error, Result};

/// A place of `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Finite(u64),
    Infinity,
}

/// The local Hilbert symbol `(a, b)_v`.
pub fn hilbert_symbol(a: i64, b: i64, v: Place) -> i8 {
    assert!(a != 0 && b != 0, "hilbert symbol of zero");
    match v {
        Place::Infinity => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Place::Finite(2) => {
            let (alpha, u) = split_power(a, 2);
            let (beta, w) = split_power(b, 2);
            let eps = |x: i64| ((x - 1) / 2).rem_euclid(2);
            let omega = |x: i64| ((x as i128 * x as i128 - 1) / 8).rem_euclid(2) as i64;
            let e = eps(u) * eps(w) + alpha as i64 * omega(w) + beta as i64 * omega(u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Finite(p) => {
            let (alpha, u) = split_power(a, p);
            let (beta, w) = split_power(b, p);
            let mut s: i8 = if alpha * beta % 2 == 1 && p % 4 == 3 { -1 } else { 1 };
            if beta % 2 == 1 {
                s *= arith::kronecker(u, p);
            }
            if alpha % 2 == 1 {
                s *= arith::kronecker(w, p);
            }
            s
        }
    }
}

fn split_power(x: i64, p: u64) -> (u32, i64) {
    let k = arith::valuation(x as i128, p);
    (k, x / (p as i64).pow(k))
}

/// `B = Q + Qi + Qj + Qk` with `i^2 = a`, `j^2 = b`, `k = ij = -ji`,
/// ramified exactly at `{ell, infinity}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuatAlgebra {
    a: i64,
    b: i64,
    ell: u64,
}

/// An element of `B` in the basis `1, i, j, k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quat(pub [BigRational; 4]);

impl Quat {
    pub fn zero() -> Self {
        Quat(std::array::from_fn(|_| BigRational::zero()))
    }

    pub fn one() -> Self {
        Quat::scalar(BigRational::one())
    }

    pub fn scalar(x: BigRational) -> Self {
        let mut q = Quat::zero();
        q.0[0] = x;
        q
    }

    pub fn from_ints(c: [i64; 4]) -> Self {
        Quat(c.map(|x| BigRational::from_integer(BigInt::from(x))))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn conj(&self) -> Self {
        let [x0, x1, x2, x3] = &self.0;
        Quat([x0.clone(), -x1, -x2, -x3])
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Quat(std::array::from_fn(|i| &self.0[i] * s))
    }

    /// `trd(x) = 2 x0`.
    pub fn trd(&self) -> BigRational {
        &self.0[0] * BigRational::from_integer(BigInt::from(2))
    }
}

impl Add for &Quat {
    type Output = Quat;
    fn add(self, o: &Quat) -> Quat {
        Quat(std::array::from_fn(|i| &self.0[i] + &o.0[i]))
    }
}

impl Sub for &Quat {
    type Output = Quat;
    fn sub(self, o: &Quat) -> Quat {
        Quat(std::array::from_fn(|i| &self.0[i] - &o.0[i]))
    }
}

impl Neg for &Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat(std::array::from_fn(|i| -&self.0[i]))
    }
}

impl fmt::Display for Quat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl QuatAlgebra {
    /// Verifies that `(a, b)` is definite and ramified exactly at `ell`.
    pub fn new(a: i64, b: i64, ell: u64) -> Result<Self> {
        if a >= 0 || b >= 0 {
            return Err(Error::InvalidInput(format!("({a}, {b}) is not definite")));
        }
        if !arith::is_prime(ell) {
            return Err(Error::InvalidInput(format!("{ell} is not prime")));
        }
        let ramified = ramified_primes(a, b)?;
        if ramified != [ell] {
            return Err(Error::InvalidInput(format!(
                "({a}, {b}) ramifies at {ramified:?}, not exactly at {ell}"
            )));
        }
        Ok(QuatAlgebra { a, b, ell })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn mul(&self, x: &Quat, y: &Quat) -> Quat {
        let a = BigRational::from_integer(BigInt::from(self.a));
        let b = BigRational::from_integer(BigInt::from(self.b));
        let ab = &a * &b;
        let [x0, x1, x2, x3] = &x.0;
        let [y0, y1, y2, y3] = &y.0;
        Quat([
            x0 * y0 + &a * x1 * y1 + &b * x2 * y2 - &ab * x3 * y3,
            x0 * y1 + x1 * y0 - &b * x2 * y3 + &b * x3 * y2,
            x0 * y2 + x2 * y0 + &a * x1 * y3 - &a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        ])
    }

    /// `nrd(x) = x0^2 - a x1^2 - b x2^2 + ab x3^2`.
    pub fn nrd(&self, x: &Quat) -> BigRational {
        let d = self.form_diagonal();
        let mut s = BigRational::zero();
        for (c, w) in x.0.iter().zip(&d) {
            s += c * c * w;
        }
        s
    }

    /// `trd(x conj(y))`, the bilinear form with `trd(x conj(x)) = 2 nrd(x)`.
    pub fn trace_pairing(&self, x: &Quat, y: &Quat) -> BigRational {
        let d = self.form_diagonal();
        let mut s = BigRational::zero();
        for i in 0..4 {
            s += &x.0[i] * &y.0[i] * &d[i];
        }
        s * BigRational::from_integer(BigInt::from(2))
    }

    /// `(1, -a, -b, ab)`: the reduced norm in the standard basis.
    pub fn form_diagonal(&self) -> [BigRational; 4] {
        [1, -self.a, -self.b, self.a * self.b]
            .map(|x| BigRational::from_integer(BigInt::from(x)))
    }

    pub fn inverse(&self, x: &Quat) -> Result<Quat> {
        let n = self.nrd(x);
        if n.is_zero() {
            return Err(Error::InvalidInput("zero has no inverse".into()));
        }
        Ok(x.conj().scale(&n.recip()))
    }

    pub fn is_ramified_at(&self, v: Place) -> bool {
        hilbert_symbol(self.a, self.b, v) == -1
    }
}

impl fmt::Display for QuatAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})_Q", self.a, self.b)
    }
}

/// Finite primes where `(a, b)` ramifies; only primes dividing `2ab` can.
pub fn ramified_primes(a: i64, b: i64) -> Result<Vec<u64>> {
    let mut candidates = arith::prime_divisors(a.unsigned_abs())?;
    candidates.extend(arith::prime_divisors(b.unsigned_abs())?);
    candidates.push(2);
    candidates.sort_unstable();
    candidates.dedup();
    Ok(candidates
        .into_iter()
        .filter(|&p| hilbert_symbol(a, b, Place::Finite(p)) == -1)
        .collect())
}

const ALGEBRA_SCAN: u64 = 1000;

/// The definite algebra ramified at `{ell, infinity}`: `(-1,-1)` for `ell = 2`,
/// else the first of `(-1,-ell)`, `(-2,-ell)`, `(-q,-ell)` for primes
/// `q = 3 mod 4` that passes the Hilbert-symbol check.
pub fn make_algebra(ell: u64) -> Result<QuatAlgebra> {
    if !arith::is_prime(ell) {
        return Err(Error::InvalidInput(format!("{ell} is not prime")));
    }
    if ell > i64::MAX as u64 / ALGEBRA_SCAN {
        return Err(Error::TooLarge(format!("ramified prime {ell}")));
    }
    let l = ell as i64;
    let mut candidates = vec![(-1, -1), (-1, -l), (-2, -l)];
    candidates.extend(
        (3..ALGEBRA_SCAN as i64)
            .filter(|&q| q % 4 == 3 && q != l && arith::is_prime(q as u64))
            .map(|q| (-q, -l)),
    );
    for (a, b) in candidates {
        if let Ok(alg) = QuatAlgebra::new(a, b, ell) {
            return Ok(alg);
        }
    }
    Err(Error::SearchExhausted(format!("no algebra (a, b) found for ell = {ell}")))
}
