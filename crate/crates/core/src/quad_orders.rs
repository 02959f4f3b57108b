//! Imaginary quadratic orders `O_c = Z + c O_K` and their class numbers,
//! computed by counting reduced primitive binary quadratic forms.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use crate::arith;
use crate::error::{Error, Result};
use crate::local_tree::LocalKind;

/// The order of conductor `c` in `Q(sqrt(dK))`, `dK < 0` fundamental.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadOrder {
    dk: i64,
    c: u64,
}

impl QuadOrder {
    pub fn new(dk: i64, c: u64) -> Result<Self> {
        if !arith::is_fundamental_discriminant(dk) {
            return Err(Error::InvalidInput(format!(
                "{dk} is not a negative fundamental discriminant"
            )));
        }
        if c == 0 {
            return Err(Error::InvalidInput("conductor must be positive".into()));
        }
        let c2 = (c as i128) * (c as i128);
        if c2 * (dk as i128) < i64::MIN as i128 {
            return Err(Error::TooLarge(format!("discriminant {c}^2 * {dk}")));
        }
        Ok(QuadOrder { dk, c })
    }

    pub fn dk(&self) -> i64 {
        self.dk
    }

    pub fn conductor(&self) -> u64 {
        self.c
    }

    /// `c^2 * dK`.
    pub fn discriminant(&self) -> i64 {
        (self.c * self.c) as i64 * self.dk
    }
}

impl fmt::Display for QuadOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O_{} in Q(sqrt({}))", self.c, self.dk)
    }
}

/// A positive definite form `a x^2 + b xy + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl ReducedForm {
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_reduced(&self) -> bool {
        let ReducedForm { a, b, c } = *self;
        a > 0 && b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    pub fn is_primitive(&self) -> bool {
        num_integer::gcd(num_integer::gcd(self.a, self.b), self.c) == 1
    }

    /// The reduced form properly equivalent to `self`.
    pub fn reduce(mut self) -> Self {
        assert!(self.a > 0 && self.discriminant() < 0);
        loop {
            // normalize b into (-a, a]
            let two_a = 2 * self.a;
            let mut k = (self.a - self.b).div_euclid(two_a);
            if self.b + k * two_a <= -self.a {
                k += 1;
            }
            if k != 0 {
                let b2 = self.b + k * two_a;
                self.c += k * (self.b + k * self.a);
                self.b = b2;
            }
            if self.a > self.c {
                self = ReducedForm { a: self.c, b: -self.b, c: self.a };
                continue;
            }
            if self.a == self.c && self.b < 0 {
                self.b = -self.b;
            }
            return self;
        }
    }
}

impl fmt::Display for ReducedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// All primitive reduced forms of discriminant `disc < 0`.
pub fn reduced_forms(disc: i64) -> Result<Vec<ReducedForm>> {
    if disc >= 0 || disc.rem_euclid(4) > 1 {
        return Err(Error::InvalidInput(format!(
            "{disc} is not a negative discriminant (must be < 0 and 0 or 1 mod 4)"
        )));
    }
    let n = disc.unsigned_abs();
    let a_max = arith::isqrt(n / 3) as i64;
    let mut out = Vec::new();
    for a in 1..=a_max {
        let start = if (-a + 1 - disc).rem_euclid(2) == 0 { -a + 1 } else { -a + 2 };
        for b in (start..=a).step_by(2) {
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let f = ReducedForm { a, b, c };
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
    }
    Ok(out)
}

/// `h(O_c) = |Pic(O_c)|`, the degree of the ring class field of conductor `c`.
/// Memoized by discriminant.
pub fn class_number(order: &QuadOrder) -> u64 {
    static MEMO: OnceLock<Mutex<HashMap<i64, u64>>> = OnceLock::new();
    let disc = order.discriminant();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(&h) = memo.lock().unwrap().get(&disc) {
        return h;
    }
    let h = count_reduced_forms(disc);
    memo.lock().unwrap().insert(disc, h);
    h
}

fn count_reduced_forms(disc: i64) -> u64 {
    reduced_forms(disc)
        .expect("c^2 dK is a valid discriminant")
        .len() as u64
}

/// `[K[c] : K[c_s]] = h(c) / h(c_s)` for `c_s | c`.
pub fn ring_class_degree(order: &QuadOrder, c_s: u64) -> Result<u64> {
    if c_s == 0 || !order.c.is_multiple_of(c_s) {
        return Err(Error::InvalidInput(format!(
            "{c_s} does not divide the conductor {}",
            order.c
        )));
    }
    let h = class_number(order);
    let h_s = class_number(&QuadOrder::new(order.dk, c_s)?);
    if !h.is_multiple_of(h_s) {
        return Err(Error::Invariant(format!(
            "h({}) = {h} not divisible by h({c_s}) = {h_s}",
            order.c
        )));
    }
    Ok(h / h_s)
}

/// Decomposition of `p` in `Q(sqrt(dK))`.
pub fn splitting_kind(dk: i64, p: u64) -> LocalKind {
    match arith::kronecker(dk, p) {
        1 => LocalKind::Split,
        -1 => LocalKind::Inert,
        _ => LocalKind::Ramified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn form(a: i64, b: i64, c: i64) -> ReducedForm {
        ReducedForm { a, b, c }
    }

    #[test]
    fn reduced_form_examples() {
        assert_eq!(reduced_forms(-3).unwrap(), vec![form(1, 1, 1)]);
        assert_eq!(reduced_forms(-4).unwrap(), vec![form(1, 0, 1)]);
        assert_eq!(reduced_forms(-36).unwrap(), vec![form(1, 0, 9), form(2, 2, 5)]);
        assert_eq!(reduced_forms(-100).unwrap(), vec![form(1, 0, 25), form(2, 2, 13)]);
        assert!(reduced_forms(-5).is_err());
        assert!(reduced_forms(4).is_err());
    }

    #[test]
    fn class_number_examples() {
        let h = |dk, c| class_number(&QuadOrder::new(dk, c).unwrap());
        assert_eq!(h(-3, 1), 1);
        assert_eq!(h(-4, 3), 2);
        assert_eq!(h(-4, 5), 2);
        assert_eq!(h(-3, 2), 1);
        // a few field class numbers
        assert_eq!(h(-23, 1), 3);
        assert_eq!(h(-47, 1), 5);
        assert_eq!(h(-84, 1), 4);
        assert_eq!(h(-163, 1), 1);
    }

    #[test]
    fn ring_class_degree_examples() {
        let o = QuadOrder::new(-4, 3).unwrap();
        assert_eq!(ring_class_degree(&o, 3).unwrap(), 1);
        assert_eq!(ring_class_degree(&o, 1).unwrap(), 2);
        assert_eq!(ring_class_degree(&QuadOrder::new(-3, 2).unwrap(), 1).unwrap(), 1);
        assert!(ring_class_degree(&o, 2).is_err());
    }

    #[test]
    fn splitting_examples() {
        assert_eq!(splitting_kind(-4, 3), LocalKind::Inert);
        assert_eq!(splitting_kind(-3, 3), LocalKind::Ramified);
        assert_eq!(splitting_kind(-7, 2), LocalKind::Split);
        assert_eq!(splitting_kind(-3, 2), LocalKind::Inert);
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(QuadOrder::new(-12, 1).is_err());
        assert!(QuadOrder::new(5, 1).is_err());
        assert!(QuadOrder::new(-3, 0).is_err());
    }

    /// `h(dK) * c / [O_K^x : O_c^x] * prod_{p | c} (1 - (dK/p)/p)`, evaluated
    /// with rationals; an analytic route independent of form counting.
    fn class_number_by_formula(dk: i64, c: u64) -> u64 {
        let h_field = class_number(&QuadOrder::new(dk, 1).unwrap()) as i128;
        let units = match (dk, c) {
            (_, 1) => 1,
            (-3, _) => 3,
            (-4, _) => 2,
            _ => 1,
        };
        let (mut num, mut den) = (h_field * c as i128, units as i128);
        for p in arith::prime_divisors(c).unwrap() {
            num *= p as i128 - arith::kronecker(dk, p) as i128;
            den *= p as i128;
        }
        assert_eq!(num % den, 0);
        (num / den) as u64
    }

    #[test]
    fn class_number_matches_conductor_formula() {
        for dk in [-3, -4, -7, -8, -11, -15, -19, -20, -23, -24] {
            for c in 1..=40u64 {
                let o = QuadOrder::new(dk, c).unwrap();
                assert_eq!(class_number(&o), class_number_by_formula(dk, c), "dK={dk} c={c}");
            }
        }
    }

    #[test]
    fn class_number_growth_table() {
        // h(c p) / h(c) = (p - (dK/p)) / [O_c^x : O_cp^x] for p not dividing c
        for dk in [-3i64, -4, -7, -8, -11] {
            for c in 1..=50u64 {
                for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
                    if c * p > 50 || c % p == 0 {
                        continue;
                    }
                    let h = class_number(&QuadOrder::new(dk, c).unwrap());
                    let hp = class_number(&QuadOrder::new(dk, c * p).unwrap());
                    let unit_index = match (dk, c) {
                        (-3, 1) => 3,
                        (-4, 1) => 2,
                        _ => 1,
                    };
                    let expected = (p as i64 - arith::kronecker(dk, p) as i64) as u64 / unit_index;
                    assert_eq!(hp, h * expected, "dK={dk} c={c} p={p}");
                    if unit_index == 1 {
                        assert!([p - 1, p, p + 1].contains(&(hp / h)));
                    }
                }
            }
        }
    }

    #[test]
    fn reduced_forms_are_canonical() {
        for disc in (3..400i64).map(|n| -n).filter(|d| d.rem_euclid(4) <= 1) {
            let forms = reduced_forms(disc).unwrap();
            let set: BTreeSet<_> = forms.iter().collect();
            assert_eq!(set.len(), forms.len());
            for f in &forms {
                assert_eq!(f.discriminant(), disc);
                assert_eq!(f.reduce(), *f);
                // an equivalent non-reduced form reduces back
                let shifted = ReducedForm { a: f.a, b: f.b + 2 * f.a, c: f.a + f.b + f.c };
                assert_eq!(shifted.reduce(), *f);
                let swapped = ReducedForm { a: f.c, b: -f.b, c: f.a };
                assert_eq!(swapped.reduce(), *f);
            }
        }
    }
}
