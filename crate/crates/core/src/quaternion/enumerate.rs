//! Exact enumeration of short vectors of a positive definite rational
//! quadratic form `Q(v) = v^T G v`: LLL preconditioning, then Fincke-Pohst.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Node budget for a single enumeration.
pub const DEFAULT_NODE_CAP: u128 = 50_000_000;

type Matrix = Vec<Vec<BigRational>>;

fn transform_gram(gram: &Matrix, u: &[Vec<BigInt>]) -> Matrix {
    let n = gram.len();
    let mut out = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = BigRational::zero();
            for k in 0..n {
                if u[i][k].is_zero() {
                    continue;
                }
                for l in 0..n {
                    if u[j][l].is_zero() {
                        continue;
                    }
                    s += &gram[k][l] * BigRational::from_integer(&u[i][k] * &u[j][l]);
                }
            }
            out[i][j] = s;
        }
    }
    out
}

/// Gram-Schmidt data: `mu[i][j]` for `j < i` and squared lengths `b[i]`.
fn gram_schmidt(g: &Matrix) -> (Matrix, Vec<BigRational>) {
    let n = g.len();
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut b = vec![BigRational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[i][j].clone();
            for k in 0..j {
                s -= &mu[j][k] * &mu[i][k] * &b[k];
            }
            mu[i][j] = s / &b[j];
        }
        let mut s = g[i][i].clone();
        for k in 0..i {
            s -= &mu[i][k] * &mu[i][k] * &b[k];
        }
        b[i] = s;
    }
    (mu, b)
}

fn round(x: &BigRational) -> BigInt {
    (x + BigRational::new(1.into(), 2.into())).floor().to_integer()
}

/// LLL with `delta = 3/4` on a positive definite Gram matrix. Returns the
/// unimodular `U` (rows are the new basis in old coordinates) and `U G U^T`.
pub fn lll(gram: &Matrix) -> (Vec<Vec<BigInt>>, Matrix) {
    let n = gram.len();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let delta = BigRational::new(3.into(), 4.into());
    let mut g = gram.clone();
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&g);
            let r = round(&mu[k][j]);
            if !r.is_zero() {
                for c in 0..n {
                    let sub = &r * &u[j][c];
                    u[k][c] -= sub;
                }
                g = transform_gram(gram, &u);
            }
        }
        let (mu, b) = gram_schmidt(&g);
        let lhs = &b[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            u.swap(k, k - 1);
            g = transform_gram(gram, &u);
            k = (k - 1).max(1);
        }
    }
    (u, g)
}

/// `Q = sum_i q[i][i] (x_i + sum_{j>i} q[i][j] x_j)^2`.
fn cholesky(g: &Matrix) -> Result<Matrix> {
    let n = g.len();
    let mut q = g.clone();
    for i in 0..n {
        if !q[i][i].is_positive() {
            return Err(Error::InvalidInput("quadratic form is not positive definite".into()));
        }
        for j in i + 1..n {
            q[j][i] = q[i][j].clone();
            q[i][j] = &q[i][j] / &q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                let s = &q[k][i] * &q[i][l];
                q[k][l] -= s;
            }
        }
    }
    Ok(q)
}

/// Integers `x` with `qii (x + c)^2 <= t`, exactly.
fn coordinate_range(qii: &BigRational, c: &BigRational, t: &BigRational) -> Vec<BigInt> {
    if t.is_negative() {
        return Vec::new();
    }
    let m: BigInt = Roots::sqrt(&(t / qii).floor().to_integer());
    let lo: BigInt = (-c).floor().to_integer() - &m - 1;
    let hi = (-c).ceil().to_integer() + &m + 1;
    let mut out = Vec::new();
    let mut x = lo;
    while x <= hi {
        let d = BigRational::from_integer(x.clone()) + c;
        if qii * &d * &d <= *t {
            out.push(x.clone());
        }
        x += 1;
    }
    out
}

struct Search<'a> {
    q: &'a Matrix,
    bound: &'a BigRational,
    cap: u128,
    nodes: u128,
    x: Vec<BigInt>,
    out: Vec<(Vec<BigInt>, BigRational)>,
}

impl Search<'_> {
    fn descend(&mut self, i: usize, used: BigRational) -> Result<()> {
        let n = self.x.len();
        let mut c = BigRational::zero();
        for j in i + 1..n {
            c += &self.q[i][j] * BigRational::from_integer(self.x[j].clone());
        }
        let rest = self.bound - &used;
        for xi in coordinate_range(&self.q[i][i], &c, &rest) {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::ResourceCap {
                    what: "short-vector enumeration".into(),
                    needed: self.nodes,
                    cap: self.cap,
                });
            }
            let d = BigRational::from_integer(xi.clone()) + &c;
            let here = &used + &self.q[i][i] * &d * &d;
            self.x[i] = xi;
            if i == 0 {
                if self.x.iter().any(|v| !v.is_zero()) {
                    self.out.push((self.x.clone(), here));
                }
            } else {
                self.descend(i - 1, here)?;
            }
        }
        Ok(())
    }
}

/// Every nonzero `v` with `v^T G v <= bound`, paired with its value, in a
/// deterministic order. Both `v` and `-v` are returned.
pub fn short_vectors(
    gram: &Matrix,
    bound: &BigRational,
    cap: u128,
) -> Result<Vec<(Vec<BigInt>, BigRational)>> {
    let n = gram.len();
    if n == 0 || bound.is_negative() {
        return Ok(Vec::new());
    }
    cholesky(gram)?;
    let (u, reduced) = lll(gram);
    let q = cholesky(&reduced)?;
    let mut search = Search {
        q: &q,
        bound,
        cap,
        nodes: 0,
        x: vec![BigInt::zero(); n],
        out: Vec::new(),
    };
    search.descend(n - 1, BigRational::zero())?;
    let mut out: Vec<(Vec<BigInt>, BigRational)> = search
        .out
        .into_iter()
        .map(|(y, val)| {
            let v: Vec<BigInt> = (0..n)
                .map(|c| (0..n).fold(BigInt::zero(), |acc, r| acc + &y[r] * &u[r][c]))
                .collect();
            (v, val)
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Every `v` with `v^T G v` exactly `target`.
pub fn vectors_of_value(gram: &Matrix, target: &BigRational, cap: u128) -> Result<Vec<Vec<BigInt>>> {
    Ok(short_vectors(gram, target, cap)?
        .into_iter()
        .filter(|(_, v)| v == target)
        .map(|(x, _)| x)
        .collect())
}

/// Whether some nonzero `v` has `v^T G v == target`.
pub fn has_vector_of_value(gram: &Matrix, target: &BigRational, cap: u128) -> Result<bool> {
    Ok(!vectors_of_value(gram, target, cap)?.is_empty())
}

/// gcd of the entries; primitive vectors have content 1.
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
    }

    fn count_by_box(g: &[&[i64]], bound: i64, r: i64) -> usize {
        let n = g.len();
        let mut count = 0;
        let total = (2 * r + 1).pow(n as u32);
        for idx in 0..total {
            let mut t = idx;
            let v: Vec<i64> = (0..n)
                .map(|_| {
                    let d = t % (2 * r + 1);
                    t /= 2 * r + 1;
                    d - r
                })
                .collect();
            let s: i64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| g[i][j] * v[i] * v[j]).sum();
            if s <= bound && v.iter().any(|&x| x != 0) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn sum_of_four_squares() {
        // r_4(n) = 8 * sum of divisors not divisible by 4
        let g = m(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]);
        for (n, r4) in [(1, 8), (2, 24), (3, 32), (4, 24), (5, 48)] {
            assert_eq!(vectors_of_value(&g, &rat(n), DEFAULT_NODE_CAP).unwrap().len(), r4);
        }
    }

    #[test]
    fn skewed_basis_matches_box_search() {
        let rows: [&[i64]; 4] = [&[5, 7, 1, 0], &[7, 11, 2, 1], &[1, 2, 3, 1], &[0, 1, 1, 9]];
        let g = m(&rows);
        for bound in [1, 3, 6, 10] {
            let sv = short_vectors(&g, &rat(bound), DEFAULT_NODE_CAP).unwrap();
            assert_eq!(sv.len(), count_by_box(&rows, bound, 12), "bound {bound}");
            for (v, val) in &sv {
                let mut s = BigRational::zero();
                for i in 0..4 {
                    for j in 0..4 {
                        s += &g[i][j] * BigRational::from_integer(&v[i] * &v[j]);
                    }
                }
                assert_eq!(&s, val);
            }
        }
    }

    #[test]
    fn lll_is_unimodular_and_reduces() {
        let g = m(&[&[101, 99, 0], &[99, 98, 1], &[0, 1, 7]]);
        let (u, r) = lll(&g);
        let det = super::super::lattice::determinant(
            &u.iter()
                .map(|row| row.iter().map(|x| BigRational::from_integer(x.clone())).collect())
                .collect::<Vec<_>>(),
        );
        assert_eq!(det.abs(), rat(1));
        assert!(r[0][0] <= rat(7));
    }

    #[test]
    fn cap_is_enforced() {
        let g = m(&[&[1, 0], &[0, 1]]);
        assert!(matches!(
            short_vectors(&g, &rat(10_000), 100),
            Err(Error::ResourceCap { .. })
        ));
        assert!(cholesky(&m(&[&[1, 2], &[2, 1]])).is_err());
    }
}
