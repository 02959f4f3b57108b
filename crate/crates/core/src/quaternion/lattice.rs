//! Full-rank `Z`-lattices in `B = Q^4`, kept as an integer Hermite normal
//! form over a common denominator so that equal lattices compare equal.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::algebra::{Quat, QuatAlgebra};
use crate::error::{Error, Result};

/// `rows / den`, with `rows` upper triangular, positive diagonal, entries
/// above each pivot reduced into `[0, pivot)`, and `gcd(rows, den) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lattice4 {
    rows: [[BigInt; 4]; 4],
    den: BigInt,
}

impl Lattice4 {
    /// The lattice spanned by `gens`, which must have rank 4.
    pub fn from_generators<'a>(gens: impl IntoIterator<Item = &'a Quat>) -> Result<Self> {
        let gens: Vec<&Quat> = gens.into_iter().collect();
        let mut den = BigInt::one();
        for g in &gens {
            for c in &g.0 {
                den = den.lcm(c.denom());
            }
        }
        let mut rows: Vec<[BigInt; 4]> = gens
            .iter()
            .map(|g| std::array::from_fn(|i| (&g.0[i] * &den).to_integer()))
            .collect();
        let hnf = hermite(&mut rows)?;
        Ok(Lattice4::normalized(hnf, den))
    }

    fn normalized(mut rows: [[BigInt; 4]; 4], mut den: BigInt) -> Self {
        let mut g = den.clone();
        for r in &rows {
            for x in r {
                g = g.gcd(x);
            }
        }
        if !g.is_one() {
            for r in rows.iter_mut() {
                for x in r.iter_mut() {
                    *x = &*x / &g;
                }
            }
            den /= &g;
        }
        Lattice4 { rows, den }
    }

    pub fn basis(&self) -> [Quat; 4] {
        std::array::from_fn(|r| {
            Quat(std::array::from_fn(|c| {
                BigRational::new(self.rows[r][c].clone(), self.den.clone())
            }))
        })
    }

    pub fn rows(&self) -> &[[BigInt; 4]; 4] {
        &self.rows
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    /// Integer coordinates of `x` in [`Lattice4::basis`], if `x` lies in the lattice.
    pub fn coordinates(&self, x: &Quat) -> Option<[BigInt; 4]> {
        let mut rest: Vec<BigRational> = x.0.iter().map(|c| c * &self.den).collect();
        let mut out: [BigInt; 4] = Default::default();
        for col in 0..4 {
            let q = &rest[col] / BigRational::from_integer(self.rows[col][col].clone());
            if !q.is_integer() {
                return None;
            }
            let q = q.to_integer();
            for (k, r) in rest.iter_mut().enumerate().skip(col) {
                *r -= BigRational::from_integer(&q * &self.rows[col][k]);
            }
            out[col] = q;
        }
        Some(out)
    }

    pub fn contains(&self, x: &Quat) -> bool {
        self.coordinates(x).is_some()
    }

    pub fn contains_lattice(&self, other: &Lattice4) -> bool {
        other.basis().iter().all(|e| self.contains(e))
    }

    /// `sum_i v_i e_i`.
    pub fn element(&self, v: &[BigInt]) -> Quat {
        let mut acc: [BigInt; 4] = Default::default();
        for (vi, row) in v.iter().zip(&self.rows) {
            for c in 0..4 {
                acc[c] += vi * &row[c];
            }
        }
        Quat(acc.map(|x| BigRational::new(x, self.den.clone())))
    }

    pub fn sum(&self, other: &Lattice4) -> Result<Lattice4> {
        let (a, b) = (self.basis(), other.basis());
        Lattice4::from_generators(a.iter().chain(b.iter()))
    }

    pub fn scale(&self, s: &BigRational) -> Result<Lattice4> {
        if s.is_zero() {
            return Err(Error::InvalidInput("scaling a lattice by zero".into()));
        }
        let b: Vec<Quat> = self.basis().iter().map(|e| e.scale(s)).collect();
        Lattice4::from_generators(&b)
    }

    /// `|det|` of the basis in the coordinates `1, i, j, k`.
    pub fn covolume(&self) -> BigRational {
        let mut d = BigInt::one();
        for i in 0..4 {
            d *= &self.rows[i][i];
        }
        BigRational::new(d, self.den.pow(4))
    }

    /// `[self : other]` for a sublattice `other`.
    pub fn index_of(&self, other: &Lattice4) -> Result<BigInt> {
        if !self.contains_lattice(other) {
            return Err(Error::Invariant("index of a non-sublattice".into()));
        }
        let r = other.covolume() / self.covolume();
        debug_assert!(r.is_integer());
        Ok(r.to_integer())
    }

    /// `{x y : x in self, y in other}` as a lattice.
    pub fn product(&self, alg: &QuatAlgebra, other: &Lattice4) -> Result<Lattice4> {
        let (a, b) = (self.basis(), other.basis());
        let gens: Vec<Quat> = a
            .iter()
            .flat_map(|x| b.iter().map(move |y| alg.mul(x, y)))
            .collect();
        Lattice4::from_generators(&gens)
    }

    pub fn left_mul(&self, alg: &QuatAlgebra, x: &Quat) -> Result<Lattice4> {
        let b: Vec<Quat> = self.basis().iter().map(|e| alg.mul(x, e)).collect();
        Lattice4::from_generators(&b)
    }

    pub fn right_mul(&self, alg: &QuatAlgebra, x: &Quat) -> Result<Lattice4> {
        let b: Vec<Quat> = self.basis().iter().map(|e| alg.mul(e, x)).collect();
        Lattice4::from_generators(&b)
    }

    pub fn conj(&self) -> Result<Lattice4> {
        let b: Vec<Quat> = self.basis().iter().map(Quat::conj).collect();
        Lattice4::from_generators(&b)
    }

    /// `G_ij = trd(e_i conj(e_j))`.
    pub fn gram(&self, alg: &QuatAlgebra) -> Vec<Vec<BigRational>> {
        let b = self.basis();
        (0..4)
            .map(|i| (0..4).map(|j| alg.trace_pairing(&b[i], &b[j])).collect())
            .collect()
    }

    /// The dual under the trace pairing.
    pub fn dual(&self, alg: &QuatAlgebra) -> Result<Lattice4> {
        let inv = invert(&self.gram(alg))?;
        let b = self.basis();
        let dual: Vec<Quat> = inv
            .iter()
            .map(|row| {
                let mut acc = Quat::zero();
                for (w, e) in row.iter().zip(&b) {
                    acc = &acc + &e.scale(w);
                }
                acc
            })
            .collect();
        Lattice4::from_generators(&dual)
    }

    /// Computed as the dual of the sum of the duals.
    pub fn intersection(&self, alg: &QuatAlgebra, other: &Lattice4) -> Result<Lattice4> {
        self.dual(alg)?.sum(&other.dual(alg)?)?.dual(alg)
    }
}

impl fmt::Display for Lattice4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let r: Vec<String> = r.iter().map(ToString::to_string).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        write!(f, "({}) / {}", rows.join(", "), self.den)
    }
}

/// Row-style Hermite normal form of an integer matrix of rank 4.
fn hermite(rows: &mut Vec<[BigInt; 4]>) -> Result<[[BigInt; 4]; 4]> {
    let m = rows.len();
    for col in 0..4 {
        let piv = col;
        let Some(first) = (piv..m).find(|&r| !rows[r][col].is_zero()) else {
            return Err(Error::InvalidInput("generators do not span a rank-4 lattice".into()));
        };
        rows.swap(piv, first);
        for r in piv + 1..m {
            if rows[r][col].is_zero() {
                continue;
            }
            let (a, b) = (rows[piv][col].clone(), rows[r][col].clone());
            let e = a.extended_gcd(&b);
            let (ag, bg) = (&a / &e.gcd, &b / &e.gcd);
            let p_row: [BigInt; 4] =
                std::array::from_fn(|k| &e.x * &rows[piv][k] + &e.y * &rows[r][k]);
            let r_row: [BigInt; 4] = std::array::from_fn(|k| &ag * &rows[r][k] - &bg * &rows[piv][k]);
            rows[piv] = p_row;
            rows[r] = r_row;
        }
        if rows[piv][col].is_negative() {
            for x in rows[piv].iter_mut() {
                *x = -&*x;
            }
        }
        let p = rows[piv][col].clone();
        for r in 0..piv {
            let q = rows[r][col].div_floor(&p);
            if !q.is_zero() {
                for k in col..4 {
                    let sub = &q * &rows[piv][k];
                    rows[r][k] -= sub;
                }
            }
        }
    }
    Ok(std::array::from_fn(|r| rows[r].clone()))
}

/// Inverse of a square rational matrix by Gauss-Jordan elimination.
pub(crate) fn invert(m: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Err(Error::Invariant("singular matrix".into()));
        };
        a.swap(col, p);
        inv.swap(col, p);
        let pivot = a[col][col].clone();
        for k in 0..n {
            a[col][k] = &a[col][k] / &pivot;
            inv[col][k] = &inv[col][k] / &pivot;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for k in 0..n {
                let (x, y) = (&f * &a[col][k], &f * &inv[col][k]);
                a[r][k] -= x;
                inv[r][k] -= y;
            }
        }
    }
    Ok(inv)
}

/// Determinant of a square rational matrix.
pub(crate) fn determinant(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            a.swap(col, p);
            det = -det;
        }
        det *= &a[col][col];
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            for k in col..n {
                let x = &f * &a[col][k];
                a[r][k] -= x;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::super::algebra::make_algebra;
    use super::*;

    fn q(c: [i64; 4]) -> Quat {
        Quat::from_ints(c)
    }

    fn half(c: [i64; 4]) -> Quat {
        q(c).scale(&BigRational::new(1.into(), 2.into()))
    }

    fn standard() -> Lattice4 {
        Lattice4::from_generators(&[q([1, 0, 0, 0]), q([0, 1, 0, 0]), q([0, 0, 1, 0]), q([0, 0, 0, 1])])
            .unwrap()
    }

    #[test]
    fn hnf_is_canonical() {
        let a = standard();
        let b = Lattice4::from_generators(&[
            q([1, 1, 0, 0]),
            q([0, 1, 1, 0]),
            q([0, 0, 1, 1]),
            q([0, 0, 0, 1]),
            q([3, -2, 5, 7]),
        ])
        .unwrap();
        assert_eq!(a, b);
        let h = Lattice4::from_generators(&[half([1, 1, 1, 1]), q([0, 1, 0, 0]), q([0, 0, 1, 0]), q([0, 0, 0, 1])])
            .unwrap();
        assert_eq!(h.den(), &BigInt::from(2));
        assert!(h.contains(&half([1, -1, 1, -1])));
        assert!(!h.contains(&half([1, 1, 0, 0])));
        assert_eq!(h.covolume(), BigRational::new(1.into(), 2.into()));
        assert_eq!(h.index_of(&a).unwrap(), BigInt::from(2));
        assert!(Lattice4::from_generators(&[q([1, 0, 0, 0]), q([0, 1, 0, 0])]).is_err());
    }

    #[test]
    fn coordinates_round_trip() {
        let l = Lattice4::from_generators(&[q([2, 1, 0, 0]), q([0, 3, 1, 0]), q([1, 0, 5, 2]), q([0, 0, 0, 7])])
            .unwrap();
        for v in [[1i64, 0, 0, 0], [3, -2, 1, 4], [0, 0, 0, -1]] {
            let v: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
            let x = l.element(&v);
            assert_eq!(l.coordinates(&x).unwrap().to_vec(), v);
        }
    }

    #[test]
    fn dual_and_intersection() {
        let alg = make_algebra(2).unwrap();
        let z = standard();
        // the trace form on Z<1,i,j,k> is diag(2,2,2,2)
        let d = z.dual(&alg).unwrap();
        assert_eq!(d, z.scale(&BigRational::new(1.into(), 2.into())).unwrap());
        assert_eq!(d.dual(&alg).unwrap(), z);

        let two = z.scale(&BigRational::from_integer(2.into())).unwrap();
        let a = Lattice4::from_generators(&[q([1, 0, 0, 0]), q([0, 2, 0, 0]), q([0, 0, 1, 0]), q([0, 0, 0, 2])])
            .unwrap();
        let b = Lattice4::from_generators(&[q([2, 0, 0, 0]), q([0, 1, 0, 0]), q([0, 0, 2, 0]), q([0, 0, 0, 1])])
            .unwrap();
        assert_eq!(a.intersection(&alg, &b).unwrap(), two);
        assert_eq!(a.sum(&b).unwrap(), z);
    }

    #[test]
    fn matrix_helpers() {
        let r = |x: i64| BigRational::from_integer(x.into());
        let m = vec![vec![r(2), r(1)], vec![r(7), r(4)]];
        assert_eq!(determinant(&m), r(1));
        let inv = invert(&m).unwrap();
        assert_eq!(inv, vec![vec![r(4), r(-1)], vec![r(-7), r(2)]]);
        assert!(invert(&[vec![r(1), r(2)], vec![r(2), r(4)]]).is_err());
    }
}
