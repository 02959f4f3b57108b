//! Optimal embeddings `O_c -> R` up to `R^x`-conjugacy, their complex
//! conjugates, and the residue-field sign at the ramified prime.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::algebra::{Quat, QuatAlgebra};
use super::enumerate::{vectors_of_value, DEFAULT_NODE_CAP};
use super::lattice::Lattice4;
use super::order::{unit_group, QuatOrder};
use crate::arith;
use crate::error::{Error, Result};
use crate::local_tree::LocalKind;
use crate::quad_orders::splitting_kind;

/// `(trd, nrd)` of the generator `omega` with `Z[omega] = O_c`:
/// `c (dK + sqrt dK)/2` if `dK = 1 mod 4`, else `c sqrt(dK/4)`.
pub fn generator_trace_norm(dk: i64, c: u64) -> Result<(BigInt, BigInt)> {
    if !arith::is_fundamental_discriminant(dk) {
        return Err(Error::InvalidInput(format!("{dk} is not a negative fundamental discriminant")));
    }
    if c == 0 {
        return Err(Error::InvalidInput("conductor must be positive".into()));
    }
    let (d, c) = (BigInt::from(dk), BigInt::from(c));
    if dk.rem_euclid(4) == 1 {
        Ok((&c * &d, &c * &c * &d * (&d - 1) / 4))
    } else {
        Ok((BigInt::zero(), -(&c * &c * &d) / 4))
    }
}

/// One `R^x`-conjugacy class of optimal embeddings, named by the image of
/// `omega`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingClass {
    pub representative: Quat,
    /// Coordinates of the representative in the order basis.
    pub coordinates: [BigInt; 4],
    pub trd: BigInt,
    pub nrd: BigInt,
    pub class_size: usize,
    /// Residue sign at `ell`; present when `ell` is inert in `K` and prime to `c`.
    pub sign_bit: Option<u8>,
    /// Index of the class of `trd - x`.
    pub conjugate_partner: usize,
}

/// The classes together with the raw element count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embeddings {
    pub classes: Vec<EmbeddingClass>,
    /// Optimal elements before taking classes.
    pub elements: usize,
    pub unit_order: usize,
}

impl Embeddings {
    /// Classes equal to their own conjugate.
    pub fn fixed_points(&self) -> usize {
        self.classes
            .iter()
            .enumerate()
            .filter(|(i, c)| c.conjugate_partner == *i)
            .count()
    }

    /// Orbits of the conjugation involution on classes.
    pub fn pairs(&self) -> usize {
        (self.classes.len() + self.fixed_points()) / 2
    }

    pub fn sign_counts(&self) -> Option<[usize; 2]> {
        let mut out = [0, 0];
        for c in &self.classes {
            out[c.sign_bit? as usize] += 1;
        }
        Some(out)
    }
}

/// `Z[x] = Q(x) n R`: no `(x - a)/p` lies in `R` for `p | c`, `0 <= a < p`.
pub fn is_optimal(order: &QuatOrder, x: &Quat, c: u64) -> Result<bool> {
    for p in arith::prime_divisors(c)? {
        let inv = BigRational::new(1.into(), BigInt::from(p));
        for a in 0..p {
            let shifted = x - &Quat::scalar(BigRational::from_integer(BigInt::from(a)));
            if order.contains(&shifted.scale(&inv)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Every optimal `x in R` with the trace and norm of `omega`.
pub fn optimal_elements(order: &QuatOrder, dk: i64, c: u64) -> Result<Vec<Quat>> {
    let (t, n) = generator_trace_norm(dk, c)?;
    // y = x - m has trace 0 or 1 and the smallest norm
    let m = num_integer::Integer::div_floor(&t, &BigInt::from(2));
    let t_y = &t - &m * 2;
    let n_y = &n - &m * &t + &m * &m;
    let shift = Quat::scalar(BigRational::from_integer(m));
    let t_y = BigRational::from_integer(t_y);
    let mut out = Vec::new();
    for v in vectors_of_value(&order.norm_form(), &BigRational::from_integer(n_y), DEFAULT_NODE_CAP)? {
        let y = order.lattice().element(&v);
        if y.trd() != t_y {
            continue;
        }
        let x = &y + &shift;
        if is_optimal(order, &x, c)? {
            out.push(x);
        }
    }
    Ok(out)
}

/// Optimal embeddings `O_c -> R` up to conjugation by `R^x`, with partners
/// and signs.
pub fn optimal_embeddings(order: &QuatOrder, dk: i64, c: u64) -> Result<Embeddings> {
    let alg = order.algebra();
    let (t, n) = generator_trace_norm(dk, c)?;
    let elements = optimal_elements(order, dk, c)?;
    let units = unit_group(order)?;
    let index: HashMap<&Quat, usize> = elements.iter().enumerate().map(|(i, x)| (x, i)).collect();

    let mut class_of = vec![usize::MAX; elements.len()];
    let mut reps: Vec<usize> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for start in 0..elements.len() {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(start);
        let mut size = 0;
        let mut stack = vec![start];
        class_of[start] = id;
        while let Some(i) = stack.pop() {
            size += 1;
            for u in &units {
                let y = alg.mul(&alg.mul(u, &elements[i]), &u.conj());
                let j = *index.get(&y).ok_or_else(|| {
                    Error::Invariant("unit conjugate left the embedding set".into())
                })?;
                if class_of[j] == usize::MAX {
                    class_of[j] = id;
                    stack.push(j);
                }
            }
        }
        sizes.push(size);
    }

    let residue = if splitting_kind(dk, alg.ell()) == LocalKind::Inert && !c.is_multiple_of(alg.ell()) {
        Some(ResidueField::new(order)?)
    } else {
        None
    };
    let t_rat = BigRational::from_integer(t.clone());
    let mut classes = Vec::with_capacity(reps.len());
    for (id, &r) in reps.iter().enumerate() {
        let x = &elements[r];
        let bar = &Quat::scalar(t_rat.clone()) - x;
        let partner = class_of[*index
            .get(&bar)
            .ok_or_else(|| Error::Invariant("conjugate embedding missing".into()))?];
        let sign_bit = residue.as_ref().map(|f| f.sign(x)).transpose()?;
        classes.push(EmbeddingClass {
            representative: x.clone(),
            coordinates: order
                .lattice()
                .coordinates(x)
                .ok_or_else(|| Error::Invariant("representative outside the order".into()))?,
            trd: t.clone(),
            nrd: n.clone(),
            class_size: sizes[id],
            sign_bit,
            conjugate_partner: partner,
        });
    }
    Ok(Embeddings { classes, elements: elements.len(), unit_order: units.len() })
}

/// `R / P = F_ell[u]/(g)` for the prime `P` of `R` above `ell`, with `g` the
/// lexicographically smallest monic irreducible quadratic `u^2 + g1 u + g0`
/// and `u` the image of the first `theta` in `[0, ell)^4` (order basis)
/// that is a root of `g`.
#[derive(Debug, Clone)]
pub struct ResidueField {
    alg: QuatAlgebra,
    ell: u64,
    prime: Lattice4,
    g: (u64, u64),
    theta: Quat,
}

fn mod_ell(x: &BigRational, ell: u64) -> Result<u64> {
    if !x.is_integer() {
        return Err(Error::Invariant(format!("{x} is not integral")));
    }
    let e = BigInt::from(ell);
    Ok(((x.to_integer() % &e + &e) % &e).to_u64().expect("residue below ell"))
}

fn residues(ell: u64, basis: &[Quat; 4]) -> impl Iterator<Item = Quat> + '_ {
    (0..ell.pow(4)).map(move |idx| {
        let mut t = idx;
        let mut x = Quat::zero();
        for e in basis {
            x = &x + &e.scale(&BigRational::from_integer(BigInt::from(t % ell)));
            t /= ell;
        }
        x
    })
}

impl ResidueField {
    pub fn new(order: &QuatOrder) -> Result<Self> {
        let alg = order.algebra();
        let ell = alg.ell();
        if order.level().is_multiple_of(ell) {
            return Err(Error::InvalidInput("order is not maximal at ell".into()));
        }
        let basis = order.basis();
        let ell_rat = BigRational::from_integer(BigInt::from(ell));
        let mut prime = order.lattice().scale(&ell_rat)?;
        let want = BigInt::from(ell * ell);
        for x in residues(ell, &basis) {
            if order.lattice().index_of(&prime)? == want {
                break;
            }
            if mod_ell(&alg.nrd(&x), ell)? == 0 && !prime.contains(&x) {
                prime = prime.sum(&Lattice4::from_generators(
                    order.lattice().scale(&ell_rat)?.basis().iter().chain([&x]),
                )?)?;
            }
        }
        if order.lattice().index_of(&prime)? != want {
            return Err(Error::Invariant("prime above ell has the wrong index".into()));
        }
        let irreducible = |g1: u64, g0: u64| (0..ell).all(|r| !(r * r + g1 * r + g0).is_multiple_of(ell));
        let g = (0..ell)
            .flat_map(|g1| (0..ell).map(move |g0| (g1, g0)))
            .find(|&(g1, g0)| irreducible(g1, g0))
            .expect("F_ell has an irreducible quadratic");
        let mut theta = None;
        for x in residues(ell, &basis) {
            let t = mod_ell(&x.trd(), ell)?;
            let n = mod_ell(&alg.nrd(&x), ell)?;
            if (t + g.0) % ell == 0 && n == g.1 {
                theta = Some(x);
                break;
            }
        }
        let theta = theta.ok_or_else(|| Error::Invariant("no root of g in R/P".into()))?;
        Ok(ResidueField { alg: alg.clone(), ell, prime, g, theta })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    /// `(g1, g0)` with `g = u^2 + g1 u + g0`.
    pub fn modulus(&self) -> (u64, u64) {
        self.g
    }

    /// `(alpha, beta)` with `x = alpha + beta u mod P`.
    pub fn reduce(&self, x: &Quat) -> Result<(u64, u64)> {
        for alpha in 0..self.ell {
            for beta in 0..self.ell {
                let guess = &Quat::scalar(BigRational::from_integer(BigInt::from(alpha)))
                    + &self.theta.scale(&BigRational::from_integer(BigInt::from(beta)));
                if self.prime.contains(&(x - &guess)) {
                    return Ok((alpha, beta));
                }
            }
        }
        Err(Error::InvalidInput("element is not in the order".into()))
    }

    fn mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let l = self.ell;
        let (g1, g0) = self.g;
        // u^2 = -g1 u - g0
        let uu = x.1 * y.1 % l;
        let a = (x.0 * y.0 + uu * (l - g0)) % l;
        let b = (x.0 * y.1 + x.1 * y.0 + uu * (l - g1)) % l;
        (a, b)
    }

    /// Roots of `X^2 - t X + n` in `F_{ell^2}`, in increasing order.
    pub fn roots(&self, t: u64, n: u64) -> Vec<(u64, u64)> {
        let l = self.ell;
        let mut out = Vec::new();
        for a in 0..l {
            for b in 0..l {
                let (sa, sb) = self.mul((a, b), (a, b));
                let va = (sa + (l - t) * a + n) % l;
                let vb = (sb + (l - t) * b) % l;
                if va == 0 && vb == 0 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// 0 if `x mod P` is the smaller root of its minimal polynomial, else 1.
    pub fn sign(&self, x: &Quat) -> Result<u8> {
        let t = mod_ell(&x.trd(), self.ell)?;
        let n = mod_ell(&self.nrd(x), self.ell)?;
        if (0..self.ell).any(|r| (r * r + (self.ell - t) * r + n).is_multiple_of(self.ell)) {
            return Err(Error::InvalidInput(
                "x does not generate the residue field (ell split, ramified or dividing c)".into(),
            ));
        }
        let roots = self.roots(t, n);
        let image = self.reduce(x)?;
        match roots.iter().position(|&r| r == image) {
            Some(i) => Ok(i as u8),
            None => Err(Error::Invariant("image is not a root of its minimal polynomial".into())),
        }
    }

    fn nrd(&self, x: &Quat) -> BigRational {
        self.alg.nrd(x)
    }
}

/// `residue_sign` at the ramified prime: 0 for the reference root, 1 for its
/// Frobenius conjugate.
pub fn residue_sign(order: &QuatOrder, x: &Quat) -> Result<u8> {
    ResidueField::new(order)?.sign(x)
}

#[cfg(test)]
mod tests {
    use super::super::algebra::make_algebra;
    use super::super::order::{eichler_order, maximalize};
    use super::*;

    fn max(ell: u64) -> QuatOrder {
        maximalize(&make_algebra(ell).unwrap()).unwrap()
    }

    #[test]
    fn generators() {
        let r = |t: i64, n: i64| (BigInt::from(t), BigInt::from(n));
        assert_eq!(generator_trace_norm(-3, 1).unwrap(), r(-3, 3));
        assert_eq!(generator_trace_norm(-4, 1).unwrap(), r(0, 1));
        assert_eq!(generator_trace_norm(-4, 5).unwrap(), r(0, 25));
        assert_eq!(generator_trace_norm(-7, 2).unwrap(), r(-14, 56));
        assert!(generator_trace_norm(-12, 1).is_err());
    }

    #[test]
    fn hurwitz_cube_roots() {
        let o = max(2);
        let e = optimal_embeddings(&o, -3, 1).unwrap();
        assert_eq!(e.elements, 8);
        assert_eq!(e.classes.len(), 2);
        assert_eq!(e.pairs(), 1);
        assert_eq!(e.fixed_points(), 0);
        assert_eq!(e.sign_counts(), Some([1, 1]));
        assert_eq!(e.classes[0].conjugate_partner, 1);
        assert_eq!(e.classes.iter().map(|c| c.class_size).sum::<usize>(), 8);
    }

    #[test]
    fn no_embedding_when_two_splits() {
        let e = optimal_embeddings(&max(2), -7, 1).unwrap();
        assert_eq!(e.elements, 0);
        assert!(e.classes.is_empty());
    }

    #[test]
    fn gaussian_order_in_ell_three() {
        let e = optimal_embeddings(&max(3), -4, 1).unwrap();
        assert_eq!((e.classes.len(), e.pairs()), (2, 1));
        assert_eq!(e.sign_counts(), Some([1, 1]));
    }

    #[test]
    fn optimality_filter() {
        // 2i lies in Z + 2R, so it is not optimal for c = 2 in dK = -4
        let o = max(3);
        let all = optimal_elements(&o, -4, 2).unwrap();
        let two_i = Quat::from_ints([0, 2, 0, 0]);
        assert!(!all.contains(&two_i));
        assert!(!is_optimal(&o, &two_i, 2).unwrap());
        for x in &all {
            assert!(is_optimal(&o, x, 2).unwrap());
        }
    }

    #[test]
    fn signs_flip_under_conjugation_and_survive_units() {
        for (ell, n, dk, c) in [(2, 1, -3, 1), (3, 1, -4, 5), (11, 1, -3, 1), (5, 1, -8, 1), (7, 1, -4, 3), (2, 3, -3, 1)] {
            let r = eichler_order(&max(ell), n).unwrap().order;
            let field = ResidueField::new(&r).unwrap();
            let elements = optimal_elements(&r, dk, c).unwrap();
            let units = unit_group(&r).unwrap();
            let alg = r.algebra();
            for x in &elements {
                let s = field.sign(x).unwrap();
                let bar = &Quat::scalar(x.trd()) - x;
                assert_eq!(field.sign(&bar).unwrap(), 1 - s);
                for u in &units {
                    let y = alg.mul(&alg.mul(u, x), &u.conj());
                    assert_eq!(field.sign(&y).unwrap(), s);
                }
            }
        }
    }

    #[test]
    fn sign_rejects_non_generators() {
        // 3 ramifies in Q(sqrt(-3)): the image lies in F_3
        let o = max(3);
        let x = optimal_elements(&o, -3, 1).unwrap();
        assert!(!x.is_empty());
        assert!(residue_sign(&o, &x[0]).is_err());
    }

    #[test]
    fn residue_field_arithmetic() {
        let o = max(7);
        let f = ResidueField::new(&o).unwrap();
        // every element of norm 1 mod P is a root of X^2 - tX + 1
        for (t, n) in [(0u64, 1u64), (1, 1), (3, 5)] {
            let roots = f.roots(t, n);
            assert!(roots.len() == 2 || roots.len() <= 1);
        }
        let basis = o.basis();
        for e in &basis {
            let (a, b) = f.reduce(e).unwrap();
            assert!(a < 7 && b < 7);
        }
    }
}
