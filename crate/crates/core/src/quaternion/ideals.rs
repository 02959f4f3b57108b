//! Right ideal classes of an Eichler order, enumerated by breadth-first search
//! over `p`-neighbors and certified complete by the Eichler mass formula.

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::algebra::{Quat, QuatAlgebra};
use super::enumerate::{has_vector_of_value, DEFAULT_NODE_CAP};
use super::lattice::Lattice4;
use super::order::{norm_form, unit_group, QuatOrder};
use crate::arith;
use crate::error::{Error, Result};

/// Ideals examined before the search gives up.
pub const BFS_CAP: usize = 512;

/// A representative right ideal `I` of one class, with its orders.
#[derive(Debug, Clone)]
pub struct RightIdealClass {
    pub ideal: Lattice4,
    pub reduced_norm: BigRational,
    pub right_order: QuatOrder,
    pub left_order: QuatOrder,
    /// `|O_L(I)^x|`.
    pub unit_order: u64,
}

/// `(ell - 1)/24 * N * prod_{p | N} (1 + 1/p)`, the value of
/// `sum_I 1/|O_L(I)^x|` over the right ideal classes of level `N`.
pub fn eichler_mass(ell: u64, n: u64) -> Result<BigRational> {
    let mut m = BigRational::new(BigInt::from(ell - 1) * BigInt::from(n), BigInt::from(24));
    for p in arith::prime_divisors(n)? {
        m *= BigRational::new(BigInt::from(p + 1), BigInt::from(p));
    }
    Ok(m)
}

/// `sum_I 1/|O_L(I)^x|`.
pub fn class_mass(classes: &[RightIdealClass]) -> BigRational {
    classes
        .iter()
        .map(|c| BigRational::new(BigInt::one(), BigInt::from(c.unit_order)))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `{x : x I in I}`, as the intersection of the `I e^{-1}`.
pub fn left_order(alg: &QuatAlgebra, ideal: &Lattice4) -> Result<QuatOrder> {
    let mut acc: Option<Lattice4> = None;
    for e in ideal.basis() {
        let l = ideal.right_mul(alg, &alg.inverse(&e)?)?;
        acc = Some(match acc {
            None => l,
            Some(a) => a.intersection(alg, &l)?,
        });
    }
    QuatOrder::from_lattice(alg, acc.expect("four basis elements"))
}

/// `{x : I x in I}`.
pub fn right_order(alg: &QuatAlgebra, ideal: &Lattice4) -> Result<QuatOrder> {
    let mut acc: Option<Lattice4> = None;
    for e in ideal.basis() {
        let l = ideal.left_mul(alg, &alg.inverse(&e)?)?;
        acc = Some(match acc {
            None => l,
            Some(a) => a.intersection(alg, &l)?,
        });
    }
    QuatOrder::from_lattice(alg, acc.expect("four basis elements"))
}

/// `nrd(I)`, from `[R : I] = nrd(I)^2` relative to the right order `R`.
pub fn ideal_norm(order: &QuatOrder, ideal: &Lattice4) -> Result<BigRational> {
    let ratio = ideal.covolume() / order.lattice().covolume();
    let (n, d) = (ratio.numer(), ratio.denom());
    let (rn, rd) = (Roots::sqrt(n), Roots::sqrt(d));
    if &(&rn * &rn) != n || &(&rd * &rd) != d {
        return Err(Error::Invariant(format!("index {ratio} is not a square")));
    }
    Ok(BigRational::new(rn, rd))
}

/// `I = a J` for some `a in B^x`: an element of norm `nrd(I) nrd(J)` in `J conj(I)`.
pub fn is_isomorphic(
    alg: &QuatAlgebra,
    i: (&Lattice4, &BigRational),
    j: (&Lattice4, &BigRational),
) -> Result<bool> {
    let colon = j.0.product(alg, &i.0.conj()?)?;
    let target = i.1 * j.1;
    has_vector_of_value(&norm_form(alg, &colon), &target, DEFAULT_NODE_CAP)
}

/// The `p + 1` ideals `J = p I + x R` of index `p^2` in `I`.
pub fn p_neighbors(order: &QuatOrder, ideal: &Lattice4, norm: &BigRational, p: u64) -> Result<Vec<Lattice4>> {
    let alg = order.algebra();
    let basis = ideal.basis();
    let pb = BigInt::from(p);
    let pi = ideal.scale(&BigRational::from_integer(pb.clone()))?;
    let target_index = BigInt::from(p * p);
    let mut out: Vec<Lattice4> = Vec::new();
    for idx in 1..p.pow(4) {
        let mut t = idx;
        let mut x = Quat::zero();
        for e in &basis {
            x = &x + &e.scale(&BigRational::from_integer(BigInt::from(t % p)));
            t /= p;
        }
        let q = alg.nrd(&x) / norm;
        if !(q.is_integer() && (q.to_integer() % &pb).is_zero()) {
            continue;
        }
        let xr = order.lattice().left_mul(alg, &x)?;
        let j = pi.sum(&xr)?;
        if ideal.index_of(&j)? == target_index && !out.contains(&j) {
            out.push(j);
        }
    }
    if out.len() as u64 != p + 1 {
        return Err(Error::Invariant(format!("found {} neighbors at {p}, expected {}", out.len(), p + 1)));
    }
    Ok(out)
}

/// Representatives of the right ideal classes of an Eichler order, in BFS
/// order from the unit class, stopping once the mass is met exactly.
pub fn right_ideal_classes(order: &QuatOrder) -> Result<Vec<RightIdealClass>> {
    let alg = order.algebra();
    let ell = alg.ell();
    let level = order.level();
    if !order.red_disc().is_multiple_of(ell) {
        return Err(Error::InvalidInput("order is not an Eichler order of this algebra".into()));
    }
    let target = eichler_mass(ell, level)?;
    let p = (2..)
        .find(|&q| arith::is_prime(q) && !(ell * level).is_multiple_of(q))
        .expect("primes are unbounded");

    let make = |ideal: Lattice4, reduced_norm: BigRational| -> Result<RightIdealClass> {
        let left = left_order(alg, &ideal)?;
        let unit_order = unit_group(&left)?.len() as u64;
        Ok(RightIdealClass {
            ideal,
            reduced_norm,
            right_order: order.clone(),
            left_order: left,
            unit_order,
        })
    };

    let mut classes = vec![make(order.lattice().clone(), BigRational::one())?];
    let mut mass = class_mass(&classes);
    let mut queue = 0;
    let mut examined = 0;
    while mass < target {
        if queue >= classes.len() {
            return Err(Error::SearchExhausted(format!(
                "neighbor graph exhausted at mass {mass}, expected {target}"
            )));
        }
        let (ideal, norm) = (classes[queue].ideal.clone(), classes[queue].reduced_norm.clone());
        queue += 1;
        let next_norm = &norm * BigRational::from_integer(BigInt::from(p));
        for j in p_neighbors(order, &ideal, &norm, p)? {
            examined += 1;
            if examined > BFS_CAP {
                return Err(Error::ResourceCap {
                    what: "ideal class search".into(),
                    needed: examined as u128,
                    cap: BFS_CAP as u128,
                });
            }
            let mut known = false;
            for c in &classes {
                if is_isomorphic(alg, (&c.ideal, &c.reduced_norm), (&j, &next_norm))? {
                    known = true;
                    break;
                }
            }
            if !known {
                classes.push(make(j, next_norm.clone())?);
                mass = class_mass(&classes);
                if mass >= target {
                    break;
                }
            }
        }
    }
    if mass != target {
        return Err(Error::Invariant(format!("class mass {mass} overshoots {target}")));
    }
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::super::algebra::make_algebra;
    use super::super::order::{eichler_order, maximalize};
    use super::*;

    fn classes(ell: u64, n: u64) -> Vec<RightIdealClass> {
        let max = maximalize(&make_algebra(ell).unwrap()).unwrap();
        let r = eichler_order(&max, n).unwrap().order;
        right_ideal_classes(&r).unwrap()
    }

    #[test]
    fn class_number_examples() {
        assert_eq!(classes(2, 1).len(), 1);
        assert_eq!(classes(3, 1).len(), 1);
        let c11 = classes(11, 1);
        assert_eq!(c11.len(), 2);
        let mut units: Vec<u64> = c11.iter().map(|c| c.unit_order).collect();
        units.sort_unstable();
        assert_eq!(units, [4, 6]);
    }

    #[test]
    fn mass_is_met_with_consistent_orders() {
        for (ell, n) in [(2, 3), (3, 2), (5, 1), (7, 1), (13, 1), (2, 5)] {
            let cs = classes(ell, n);
            assert_eq!(class_mass(&cs), eichler_mass(ell, n).unwrap(), "ell={ell} N={n}");
            for c in &cs {
                assert_eq!(c.left_order.red_disc(), ell * n);
                assert_eq!(right_order(c.right_order.algebra(), &c.ideal).unwrap(), c.right_order);
                assert_eq!(ideal_norm(&c.right_order, &c.ideal).unwrap(), c.reduced_norm);
                assert!(c.unit_order >= 2 && c.unit_order % 2 == 0);
            }
        }
    }

    #[test]
    fn isomorphism_is_an_equivalence_on_neighbors() {
        let max = maximalize(&make_algebra(11).unwrap()).unwrap();
        let alg = max.algebra();
        let one = BigRational::one();
        let nbrs = p_neighbors(&max, max.lattice(), &one, 3).unwrap();
        assert_eq!(nbrs.len(), 4);
        let three = BigRational::from_integer(3.into());
        for j in &nbrs {
            assert!(is_isomorphic(alg, (j, &three), (j, &three)).unwrap());
        }
        // a principal ideal is in the unit class
        let x = max.basis()[1].clone();
        let nx = alg.nrd(&x);
        let px = max.lattice().left_mul(alg, &x).unwrap();
        assert!(is_isomorphic(alg, (max.lattice(), &one), (&px, &nx)).unwrap());
    }

    #[test]
    fn mass_values() {
        assert_eq!(eichler_mass(2, 1).unwrap(), BigRational::new(1.into(), 24.into()));
        assert_eq!(eichler_mass(11, 1).unwrap(), BigRational::new(5.into(), 12.into()));
        assert_eq!(eichler_mass(3, 2).unwrap(), BigRational::new(1.into(), 4.into()));
    }
}
