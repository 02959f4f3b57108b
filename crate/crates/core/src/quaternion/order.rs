//! Orders in a definite quaternion algebra: maximal orders by saturation,
//! Eichler orders as intersections of two maximal orders, and unit groups.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use super::algebra::{Quat, QuatAlgebra};
use super::enumerate::{content, vectors_of_value, DEFAULT_NODE_CAP};
use super::lattice::{determinant, Lattice4};
use crate::arith;
use crate::error::{Error, Result};

/// A `Z`-order: a lattice containing 1, closed under multiplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuatOrder {
    alg: QuatAlgebra,
    lattice: Lattice4,
    red_disc: u64,
}

impl QuatOrder {
    /// Checks the order axioms and computes the reduced discriminant.
    pub fn from_lattice(alg: &QuatAlgebra, lattice: Lattice4) -> Result<Self> {
        if !lattice.contains(&Quat::one()) {
            return Err(Error::InvalidInput("lattice does not contain 1".into()));
        }
        let basis = lattice.basis();
        for x in &basis {
            for y in &basis {
                if !lattice.contains(&alg.mul(x, y)) {
                    return Err(Error::InvalidInput("lattice is not closed under multiplication".into()));
                }
            }
        }
        if !is_integral(alg, &lattice) {
            return Err(Error::InvalidInput("lattice has non-integral elements".into()));
        }
        let red_disc = reduced_discriminant(alg, &lattice)?;
        Ok(QuatOrder { alg: alg.clone(), lattice, red_disc })
    }

    /// `Z<1, i, j, k>`.
    pub fn standard(alg: &QuatAlgebra) -> Result<Self> {
        let gens = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]].map(Quat::from_ints);
        QuatOrder::from_lattice(alg, Lattice4::from_generators(&gens)?)
    }

    pub fn algebra(&self) -> &QuatAlgebra {
        &self.alg
    }

    pub fn lattice(&self) -> &Lattice4 {
        &self.lattice
    }

    pub fn basis(&self) -> [Quat; 4] {
        self.lattice.basis()
    }

    pub fn red_disc(&self) -> u64 {
        self.red_disc
    }

    pub fn is_maximal(&self) -> bool {
        self.red_disc == self.alg.ell()
    }

    /// Level `N` with `redDisc = ell N`.
    pub fn level(&self) -> u64 {
        self.red_disc / self.alg.ell()
    }

    pub fn contains(&self, x: &Quat) -> bool {
        self.lattice.contains(x)
    }

    /// The reduced norm as a quadratic form in the order basis.
    pub fn norm_form(&self) -> Vec<Vec<BigRational>> {
        norm_form(&self.alg, &self.lattice)
    }

    /// `gamma R gamma^{-1}`.
    pub fn conjugate_by(&self, gamma: &Quat) -> Result<QuatOrder> {
        let inv = self.alg.inverse(gamma)?;
        let b: Vec<Quat> = self
            .basis()
            .iter()
            .map(|e| self.alg.mul(&self.alg.mul(gamma, e), &inv))
            .collect();
        QuatOrder::from_lattice(&self.alg, Lattice4::from_generators(&b)?)
    }

    pub fn intersection(&self, other: &QuatOrder) -> Result<QuatOrder> {
        QuatOrder::from_lattice(&self.alg, self.lattice.intersection(&self.alg, &other.lattice)?)
    }
}

impl fmt::Display for QuatOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "order of reduced discriminant {} in {}", self.red_disc, self.alg)
    }
}

/// `nrd` in the lattice basis: half the trace-pairing Gram matrix.
pub fn norm_form(alg: &QuatAlgebra, lattice: &Lattice4) -> Vec<Vec<BigRational>> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    lattice
        .gram(alg)
        .into_iter()
        .map(|row| row.into_iter().map(|x| x * &half).collect())
        .collect()
}

/// Integral trace pairing and integral norms on the basis; for a lattice
/// containing 1 this bounds the lattice inside its dual.
fn is_integral(alg: &QuatAlgebra, lattice: &Lattice4) -> bool {
    let gram = lattice.gram(alg);
    gram.iter().flatten().all(BigRational::is_integer)
        && lattice.basis().iter().all(|e| alg.nrd(e).is_integer())
}

/// `sqrt |det(trd(e_i conj(e_j)))|`.
fn reduced_discriminant(alg: &QuatAlgebra, lattice: &Lattice4) -> Result<u64> {
    let det = determinant(&lattice.gram(alg)).abs();
    if !det.is_integer() {
        return Err(Error::Invariant("discriminant is not an integer".into()));
    }
    let d = det.to_integer();
    let r = Roots::sqrt(&d);
    if &r * &r != d {
        return Err(Error::Invariant(format!("discriminant {d} is not a square")));
    }
    r.to_u64().ok_or_else(|| Error::TooLarge(format!("reduced discriminant {r}")))
}

/// The ring generated by `lattice`, or `None` once it stops being integral.
fn ring_closure(alg: &QuatAlgebra, lattice: Lattice4) -> Result<Option<Lattice4>> {
    let mut l = lattice;
    loop {
        if !is_integral(alg, &l) {
            return Ok(None);
        }
        let next = l.sum(&l.product(alg, &l)?)?;
        if next == l {
            return Ok(Some(l));
        }
        l = next;
    }
}

const SATURATION_ROUNDS: usize = 64;

/// A maximal order of `alg`, reached from `Z<1,i,j,k>` by adjoining integral
/// elements of `(1/p) O` for the primes `p` dividing `redDisc / ell`.
pub fn maximalize(alg: &QuatAlgebra) -> Result<QuatOrder> {
    let mut order = QuatOrder::standard(alg)?;
    for _ in 0..SATURATION_ROUNDS {
        if order.is_maximal() {
            return Ok(order);
        }
        if order.red_disc % alg.ell() != 0 {
            return Err(Error::Invariant(format!(
                "reduced discriminant {} not divisible by {}",
                order.red_disc,
                alg.ell()
            )));
        }
        let mut grown = None;
        'primes: for p in arith::prime_divisors(order.red_disc / alg.ell())? {
            for x in candidates_mod_p(&order, p) {
                if !alg.nrd(&x).is_integer() || !x.trd().is_integer() {
                    continue;
                }
                let l = Lattice4::from_generators(order.basis().iter().chain([&x]))?;
                if let Some(l) = ring_closure(alg, l)? {
                    grown = Some(QuatOrder::from_lattice(alg, l)?);
                    break 'primes;
                }
            }
        }
        order = grown.ok_or_else(|| {
            Error::SearchExhausted(format!("no enlargement of {order} found"))
        })?;
    }
    Err(Error::SearchExhausted(format!(
        "maximalization did not finish in {SATURATION_ROUNDS} rounds"
    )))
}

/// `(sum c_i e_i) / p` for `c in [0, p)^4` not all zero.
fn candidates_mod_p(order: &QuatOrder, p: u64) -> Vec<Quat> {
    let basis = order.basis();
    let inv_p = BigRational::new(BigInt::one(), BigInt::from(p));
    let mut out = Vec::new();
    for idx in 1..p.pow(4) {
        let mut t = idx;
        let mut x = Quat::zero();
        for e in &basis {
            let c = BigRational::from_integer(BigInt::from(t % p));
            t /= p;
            x = &x + &e.scale(&c);
        }
        out.push(x.scale(&inv_p));
    }
    out
}

/// `R = R' n R''` of level `N`, with the two maximal orders.
#[derive(Debug, Clone)]
pub struct EichlerOrder {
    pub order: QuatOrder,
    pub left: QuatOrder,
    pub right: QuatOrder,
    /// The `gamma` with `R'' = gamma R' gamma^{-1}`.
    pub gamma: Quat,
}

/// `maxOrd n gamma maxOrd gamma^{-1}` for the first primitive `gamma` of
/// reduced norm `N` whose intersection has reduced discriminant `ell N`.
pub fn eichler_order(max: &QuatOrder, n: u64) -> Result<EichlerOrder> {
    let ell = max.alg.ell();
    if !max.is_maximal() {
        return Err(Error::InvalidInput("eichler_order needs a maximal order".into()));
    }
    if n == 0 || arith::gcd(n, ell) != 1 {
        return Err(Error::InvalidInput(format!("level {n} must be positive and prime to {ell}")));
    }
    if n == 1 {
        return Ok(EichlerOrder {
            order: max.clone(),
            left: max.clone(),
            right: max.clone(),
            gamma: Quat::one(),
        });
    }
    let target = BigRational::from_integer(BigInt::from(n));
    let target_disc = ell
        .checked_mul(n)
        .ok_or_else(|| Error::TooLarge(format!("level {n}")))?;
    for v in vectors_of_value(&max.norm_form(), &target, DEFAULT_NODE_CAP)? {
        if !content(&v).is_one() {
            continue;
        }
        let gamma = max.lattice.element(&v);
        let right = max.conjugate_by(&gamma)?;
        let order = max.intersection(&right)?;
        if order.red_disc == target_disc {
            return Ok(EichlerOrder { order, left: max.clone(), right, gamma });
        }
    }
    Err(Error::SearchExhausted(format!("no element of norm {n} gives an Eichler order")))
}

/// Every `x` in the order with `nrd(x) = 1`.
pub fn unit_group(order: &QuatOrder) -> Result<Vec<Quat>> {
    let one = BigRational::one();
    Ok(vectors_of_value(&order.norm_form(), &one, DEFAULT_NODE_CAP)?
        .iter()
        .map(|v| order.lattice.element(v))
        .collect())
}

/// `|R^x|` without materializing the elements.
pub fn unit_count(order: &QuatOrder) -> Result<u64> {
    Ok(unit_group(order)?.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::super::algebra::make_algebra;
    use super::*;
    use std::collections::HashSet;

    fn half(c: [i64; 4]) -> Quat {
        Quat::from_ints(c).scale(&BigRational::new(1.into(), 2.into()))
    }

    #[test]
    fn standard_order_discriminant() {
        let alg = make_algebra(2).unwrap();
        assert_eq!(QuatOrder::standard(&alg).unwrap().red_disc(), 4);
        let alg = make_algebra(3).unwrap();
        assert_eq!(QuatOrder::standard(&alg).unwrap().red_disc(), 12);
    }

    #[test]
    fn hurwitz_order() {
        let alg = make_algebra(2).unwrap();
        let o = maximalize(&alg).unwrap();
        assert_eq!(o.red_disc(), 2);
        assert!(o.contains(&half([1, 1, 1, 1])));
        let units = unit_group(&o).unwrap();
        assert_eq!(units.len(), 24);
        assert!(units.contains(&Quat::one()) && units.contains(&-&Quat::one()));
        // closed under multiplication and inverses
        let set: HashSet<&Quat> = units.iter().collect();
        for u in &units {
            assert!(set.contains(&alg.inverse(u).unwrap()));
            for w in &units {
                assert!(set.contains(&alg.mul(u, w)));
            }
        }
    }

    #[test]
    fn maximal_orders() {
        for ell in [2, 3, 5, 7, 11, 13, 17] {
            let alg = make_algebra(ell).unwrap();
            let o = maximalize(&alg).unwrap();
            assert_eq!(o.red_disc(), ell, "ell = {ell}");
            assert!(o.is_maximal());
        }
    }

    #[test]
    fn unit_counts_of_maximal_orders() {
        // |R^x| for the order reached by saturation; classes with more units
        // exist for ell = 11 but the one-class algebras are determined
        for (ell, units) in [(2, 24), (3, 12), (5, 6), (7, 4), (13, 2)] {
            let o = maximalize(&make_algebra(ell).unwrap()).unwrap();
            assert_eq!(unit_count(&o).unwrap(), units, "ell = {ell}");
        }
    }

    #[test]
    fn eichler_orders() {
        for (ell, n) in [(2, 5), (3, 2), (2, 3), (5, 2), (7, 3), (13, 5)] {
            let max = maximalize(&make_algebra(ell).unwrap()).unwrap();
            let e = eichler_order(&max, n).unwrap();
            assert_eq!(e.order.red_disc(), ell * n);
            assert_eq!(e.order.level(), n);
            assert!(e.left.is_maximal() && e.right.is_maximal());
            assert!(e.left.lattice().contains_lattice(e.order.lattice()));
            assert!(e.right.lattice().contains_lattice(e.order.lattice()));
        }
        let max = maximalize(&make_algebra(3).unwrap()).unwrap();
        assert_eq!(eichler_order(&max, 1).unwrap().order, max);
        assert!(eichler_order(&max, 3).is_err());
    }

    #[test]
    fn rejects_non_orders() {
        let alg = make_algebra(2).unwrap();
        let l = Lattice4::from_generators(&[half([1, 1, 0, 0]), Quat::from_ints([0, 1, 0, 0]), Quat::from_ints([0, 0, 1, 0]), Quat::from_ints([0, 0, 0, 1])]).unwrap();
        assert!(QuatOrder::from_lattice(&alg, l).is_err());
    }
}
