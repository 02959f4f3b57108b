//! Rank-2 lattices over `Z_p`, the Bruhat-Tits tree of `PGL_2(Q_p)`, local
//! conductor exponents, and the orbit counts `N(n', n'', delta)` computed two
//! ways: by walking the tree and by the closed form.
//!
//! A lattice of `p`-power index in `Z_p^2` is the completion of a unique
//! sublattice of `Z^2` of `p`-power index, so everything here is an integer
//! Hermite normal form `[[a, b], [0, d]]` (columns `(a, 0)` and `(b, d)`) with
//! `a`, `d` powers of `p` and `0 <= b < a`, times a homothety `p^scale`.

use std::fmt;

use crate::arith;
use crate::error::{Error, Result};

/// Default cap on the number of vertices a single sphere walk may visit.
pub const DEFAULT_SPHERE_CAP: u128 = 10_000_000;

/// Splitting type of a quadratic algebra over `Q_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalKind {
    Split,
    Inert,
    Ramified,
}

impl LocalKind {
    pub const ALL: [LocalKind; 3] = [LocalKind::Split, LocalKind::Inert, LocalKind::Ramified];

    pub fn name(self) -> &'static str {
        match self {
            LocalKind::Split => "split",
            LocalKind::Inert => "inert",
            LocalKind::Ramified => "ramified",
        }
    }
}

impl fmt::Display for LocalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LocalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "split" => Ok(LocalKind::Split),
            "inert" => Ok(LocalKind::Inert),
            "ramified" => Ok(LocalKind::Ramified),
            other => Err(Error::InvalidInput(format!("unknown kind '{other}'"))),
        }
    }
}

/// A quadratic algebra `K_v` over `Q_p`, presented by a generator `omega` of
/// its maximal order acting on the basis `(1, omega)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalQuadratic {
    p: u64,
    kind: LocalKind,
    trace: i128,
    norm: i128,
}

impl LocalQuadratic {
    /// Picks the defining polynomial `x^2 - trace*x + norm` for each kind:
    /// `x^2 - x` (split), `x^2 - x + c` with `1 - 4c` a non-residue (inert;
    /// `x^2 + x + 1` at 2), `x^2 - p` (ramified).
    pub fn new(p: u64, kind: LocalKind) -> Result<Self> {
        if !arith::is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        let (trace, norm) = match kind {
            LocalKind::Split => (1, 0),
            LocalKind::Ramified => (0, -(p as i128)),
            LocalKind::Inert if p == 2 => (-1, 1),
            LocalKind::Inert => {
                let c = (1..)
                    .find(|&c: &i64| arith::kronecker(1 - 4 * c, p) == -1)
                    .expect("a non-residue exists mod an odd prime");
                (1, c as i128)
            }
        };
        Ok(LocalQuadratic { p, kind, trace, norm })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn kind(&self) -> LocalKind {
        self.kind
    }

    /// Coefficients `(trace, norm)` of the characteristic polynomial of omega.
    pub fn char_poly(&self) -> (i128, i128) {
        (self.trace, self.norm)
    }

    /// Companion matrix, row-major: `[[0, -norm], [1, trace]]`.
    pub fn omega(&self) -> [[i128; 2]; 2] {
        [[0, -self.norm], [1, self.trace]]
    }

    pub fn poly_discriminant(&self) -> i128 {
        self.trace * self.trace - 4 * self.norm
    }
}

/// Shorthand matching the operation name used across the crate.
pub fn make_local_quadratic(p: u64, kind: LocalKind) -> Result<LocalQuadratic> {
    LocalQuadratic::new(p, kind)
}

/// A `Z_p`-lattice `p^scale * span{(a, 0), (b, d)}` with a primitive HNF.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lattice2 {
    p: u64,
    a: i128,
    b: i128,
    d: i128,
    scale: i64,
}

/// A vertex of the tree: a lattice up to homothety.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeVertex {
    p: u64,
    a: i128,
    b: i128,
    d: i128,
}

impl Lattice2 {
    /// The standard lattice `Z_p^2`.
    pub fn standard(p: u64) -> Self {
        Lattice2 { p, a: 1, b: 0, d: 1, scale: 0 }
    }

    /// Lattice spanned over `Z_p` by the given integer column vectors, scaled
    /// by `p^scale`.
    pub fn from_columns(p: u64, columns: &[[i128; 2]], scale: i64) -> Result<Self> {
        let (a, b, d) = zp_hnf(p, columns)?;
        Ok(Self::normalized(p, a, b, d, scale))
    }

    /// Lattice from an HNF `[[a, b], [0, d]]`; `a` and `d` must be powers of
    /// `p`.
    pub fn from_hnf(p: u64, a: i128, b: i128, d: i128, scale: i64) -> Result<Self> {
        if !is_p_power(a, p) || !is_p_power(d, p) {
            return Err(Error::InvalidInput(format!(
                "diagonal entries {a}, {d} must be powers of {p}"
            )));
        }
        Self::from_columns(p, &[[a, 0], [b, d]], scale)
    }

    fn normalized(p: u64, a: i128, b: i128, d: i128, scale: i64) -> Self {
        let pi = p as i128;
        let (mut a, mut b, mut d, mut scale) = (a, b.rem_euclid(a), d, scale);
        while a % pi == 0 && d % pi == 0 && b % pi == 0 {
            a /= pi;
            b /= pi;
            d /= pi;
            scale += 1;
        }
        Lattice2 { p, a, b, d, scale }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `[[a, b], [0, d]]`.
    pub fn hnf(&self) -> [[i128; 2]; 2] {
        [[self.a, self.b], [0, self.d]]
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    fn columns(&self) -> [[i128; 2]; 2] {
        [[self.a, 0], [self.b, self.d]]
    }

    pub fn vertex(&self) -> TreeVertex {
        TreeVertex { p: self.p, a: self.a, b: self.b, d: self.d }
    }

    /// Image under an integer matrix (row-major), acting on column vectors.
    pub fn transform(&self, m: &[[i128; 2]; 2]) -> Result<Self> {
        let cols: Vec<[i128; 2]> = self
            .columns()
            .iter()
            .map(|c| [m[0][0] * c[0] + m[0][1] * c[1], m[1][0] * c[0] + m[1][1] * c[1]])
            .collect();
        Self::from_columns(self.p, &cols, self.scale)
    }

    /// Whether `p^shift * other` is contained in `self`.
    fn contains_scaled(&self, other: &Lattice2, shift: i64) -> bool {
        let e = other.scale + shift - self.scale;
        other
            .columns()
            .iter()
            .all(|c| self.contains_primitive_vector(c, e))
    }

    /// Whether `p^e * v` lies in the primitive part `span{(a,0), (b,d)}`.
    fn contains_primitive_vector(&self, v: &[i128; 2], e: i64) -> bool {
        let pi = self.p as i128;
        let (mut x, mut y) = (v[0], v[1]);
        if e >= 0 {
            let f = pi.pow(e as u32);
            x *= f;
            y *= f;
        } else {
            let f = pi.pow((-e) as u32);
            if x % f != 0 || y % f != 0 {
                return false;
            }
            x /= f;
            y /= f;
        }
        if y % self.d != 0 {
            return false;
        }
        let t = y / self.d;
        (x - self.b * t) % self.a == 0
    }

    pub fn contains(&self, other: &Lattice2) -> bool {
        self.p == other.p && self.contains_scaled(other, 0)
    }
}

impl TreeVertex {
    /// The class of `Z_p^2`.
    pub fn root(p: u64) -> Self {
        Lattice2::standard(p).vertex()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Vertex of the lattice with HNF `[[a, b], [0, d]]`.
    pub fn from_hnf(p: u64, a: i128, b: i128, d: i128) -> Result<Self> {
        Ok(Lattice2::from_hnf(p, a, b, d, 0)?.vertex())
    }

    pub fn hnf(&self) -> [[i128; 2]; 2] {
        [[self.a, self.b], [0, self.d]]
    }

    /// The primitive representative lattice.
    pub fn lattice(&self) -> Lattice2 {
        Lattice2 { p: self.p, a: self.a, b: self.b, d: self.d, scale: 0 }
    }
}

impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [0, {}]]", self.a, self.b, self.d)
    }
}

fn is_p_power(x: i128, p: u64) -> bool {
    if x <= 0 {
        return false;
    }
    let mut x = x;
    while x % p as i128 == 0 {
        x /= p as i128;
    }
    x == 1
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, s, t) = ext_gcd(b, a % b);
        (g, t, s - (a / b) * t)
    }
}

/// Column HNF of the `Z_p`-span of integer columns. Returns `(a, b, d)` with
/// `a`, `d` powers of `p` and `0 <= b < a`.
fn zp_hnf(p: u64, columns: &[[i128; 2]]) -> Result<(i128, i128, i128)> {
    let pi = p as i128;
    // The Z_p-span has index p^k with k = v_p(det); adding p^k Z^2 leaves its
    // completion unchanged and makes the Z-index a power of p.
    let mut det_val = None;
    for (i, u) in columns.iter().enumerate() {
        for w in &columns[i + 1..] {
            let det = u[0] * w[1] - u[1] * w[0];
            if det != 0 {
                let k = arith::valuation(det, p);
                det_val = Some(det_val.map_or(k, |m: u32| m.min(k)));
            }
        }
    }
    let k = det_val.ok_or_else(|| Error::InvalidInput("columns do not span a lattice".into()))?;
    let pk = pi
        .checked_pow(k)
        .ok_or_else(|| Error::TooLarge(format!("{p}^{k} overflows")))?;
    let mut gens: Vec<[i128; 2]> = columns.to_vec();
    gens.push([pk, 0]);
    gens.push([0, pk]);

    let mut pivot: Option<[i128; 2]> = None;
    let mut a = 0i128;
    for g in gens {
        if g[1] == 0 {
            a = num_integer::gcd(a, g[0]);
            continue;
        }
        match pivot {
            None => pivot = Some(g),
            Some(v) => {
                let (gg, s, t) = ext_gcd(v[1], g[1]);
                let new_v = [s * v[0] + t * g[0], gg];
                let w0 = (g[1] / gg) * v[0] - (v[1] / gg) * g[0];
                a = num_integer::gcd(a, w0);
                pivot = Some(new_v);
            }
        }
    }
    let v = pivot.expect("p^k e2 is among the generators");
    let (mut bx, mut d) = (v[0], v[1]);
    if d < 0 {
        d = -d;
        bx = -bx;
    }
    a = a.abs();
    debug_assert!(is_p_power(a, p) && is_p_power(d, p));
    Ok((a, bx.rem_euclid(a), d))
}

/// Smallest `n >= 0` with `p^n * omega * L ⊆ L`, i.e. the exponent of the
/// conductor of the multiplier ring `Z_p + p^n O_K` of `L`.
pub fn conductor_exponent(lat: &Lattice2, field: &LocalQuadratic) -> u32 {
    assert_eq!(lat.p, field.p, "lattice and algebra live over different primes");
    // omega may be singular (split case), so test its image column by column.
    let m = field.omega();
    let image: Vec<[i128; 2]> = lat
        .columns()
        .iter()
        .map(|c| [m[0][0] * c[0] + m[0][1] * c[1], m[1][0] * c[0] + m[1][1] * c[1]])
        .collect();
    let bound = arith::valuation(lat.a, lat.p) + arith::valuation(lat.d, lat.p);
    (0..=bound)
        .find(|&n| {
            image
                .iter()
                .all(|c| lat.contains_primitive_vector(c, n as i64))
        })
        .expect("p^v(det) * omega * L lies in L")
}

/// Invariant factors `(i1, i2)`, `i1 <= i2`, of `lat2` relative to `lat1`: a
/// basis `e1, e2` of `lat1` with `lat2 = p^i1 e1 + p^i2 e2`.
pub fn relative_position(lat1: &Lattice2, lat2: &Lattice2) -> (i64, i64) {
    assert_eq!(lat1.p, lat2.p);
    let p = lat1.p;
    // adj(H1) * H2
    let x = [
        [lat1.d * lat2.a, lat1.d * lat2.b - lat1.b * lat2.d],
        [0, lat1.a * lat2.d],
    ];
    let min_val = x
        .iter()
        .flatten()
        .filter(|&&e| e != 0)
        .map(|&e| arith::valuation(e, p) as i64)
        .min()
        .expect("nonzero product");
    let v1 = (arith::valuation(lat1.a, p) + arith::valuation(lat1.d, p)) as i64;
    let v2 = (arith::valuation(lat2.a, p) + arith::valuation(lat2.d, p)) as i64;
    let shift = lat2.scale - lat1.scale;
    let i1 = min_val - v1 + shift;
    let i2 = v2 - v1 + 2 * shift - i1;
    (i1, i2)
}

/// Tree distance `|i1 - i2|`.
pub fn vertex_distance(v1: &TreeVertex, v2: &TreeVertex) -> u64 {
    let (i1, i2) = relative_position(&v1.lattice(), &v2.lattice());
    (i2 - i1) as u64
}

/// The `p + 1` vertices adjacent to `v`: classes of the index-`p`
/// sublattices of its primitive representative.
pub fn neighbors(v: &TreeVertex) -> Vec<TreeVertex> {
    let p = v.p as i128;
    let lat = v.lattice();
    let [c1, c2] = lat.columns();
    let mut out = Vec::with_capacity(v.p as usize + 1);
    // H * [[1, 0], [0, p]]
    out.push(
        Lattice2::from_columns(v.p, &[c1, [p * c2[0], p * c2[1]]], 0)
            .expect("full rank")
            .vertex(),
    );
    // H * [[p, j], [0, 1]]
    for j in 0..p {
        let col2 = [j * c1[0] + c2[0], j * c1[1] + c2[1]];
        out.push(
            Lattice2::from_columns(v.p, &[[p * c1[0], p * c1[1]], col2], 0)
                .expect("full rank")
                .vertex(),
        );
    }
    out
}

/// Number of vertices at distance exactly `delta`.
pub fn sphere_size(p: u64, delta: u32) -> u128 {
    if delta == 0 {
        1
    } else {
        (p as u128 + 1) * (p as u128).pow(delta - 1)
    }
}

fn check_cap(p: u64, delta: u32, cap: u128) -> Result<()> {
    let needed = (p as u128 + 1).saturating_mul((p as u128).checked_pow(delta.saturating_sub(1)).unwrap_or(u128::MAX));
    let needed = if delta == 0 { 1 } else { needed };
    if needed > cap {
        return Err(Error::ResourceCap {
            what: format!("sphere of radius {delta} at p = {p}"),
            needed,
            cap,
        });
    }
    Ok(())
}

/// Calls `visit` on every vertex at distance `delta` from `center`, walking
/// non-backtracking paths depth first.
pub fn walk_sphere<F: FnMut(&TreeVertex)>(
    center: &TreeVertex,
    delta: u32,
    cap: u128,
    mut visit: F,
) -> Result<()> {
    check_cap(center.p, delta, cap)?;
    fn go<F: FnMut(&TreeVertex)>(v: &TreeVertex, prev: Option<&TreeVertex>, left: u32, visit: &mut F) {
        if left == 0 {
            visit(v);
            return;
        }
        for w in neighbors(v) {
            if Some(&w) != prev {
                go(&w, Some(v), left - 1, visit);
            }
        }
    }
    go(center, None, delta, &mut visit);
    Ok(())
}

/// All vertices at distance exactly `delta` from `center`.
pub fn enumerate_sphere(center: &TreeVertex, delta: u32, cap: u128) -> Result<Vec<TreeVertex>> {
    let mut out = Vec::new();
    walk_sphere(center, delta, cap, |v| out.push(v.clone()))?;
    Ok(out)
}

/// Base vertex of conductor exponent `n`: the class of `Z_p + p^n O_K`,
/// i.e. `span{e1, p^n e2}` in the basis `(1, omega)`.
pub fn conductor_vertex(p: u64, n: u32) -> Result<TreeVertex> {
    let pn = (p as i128)
        .checked_pow(n)
        .ok_or_else(|| Error::TooLarge(format!("{p}^{n} overflows")))?;
    TreeVertex::from_hnf(p, 1, 0, pn)
}

/// `N(n', n'', delta)` by exhaustive enumeration: the number of
/// `K^x`-orbits of vertex pairs with conductor exponents `(n', n'')` at
/// distance `delta`.
///
/// The stabilizer of a vertex of exponent `m` is `Q_p^x (Z_p + p^m O_K)^x`,
/// which fixes every vertex of smaller exponent; so fixing the vertex with the
/// larger exponent turns orbits into plain vertices on its sphere.
pub fn brute_force_n(
    field: &LocalQuadratic,
    n_prime: u32,
    n_double: u32,
    delta: u32,
    cap: u128,
) -> Result<u128> {
    let (lo, hi) = (n_prime.min(n_double), n_prime.max(n_double));
    let total_exp = hi
        .checked_add(delta)
        .and_then(|e| e.checked_add(2))
        .ok_or_else(|| Error::TooLarge("exponent overflow".into()))?;
    if (field.p as i128).checked_pow(total_exp).is_none() {
        return Err(Error::TooLarge(format!(
            "{}^{total_exp} does not fit the lattice model",
            field.p
        )));
    }
    let base = conductor_vertex(field.p, hi)?;
    let mut count = 0u128;
    walk_sphere(&base, delta, cap, |v| {
        if conductor_exponent(&v.lattice(), field) == lo {
            count += 1;
        }
    })?;
    Ok(count)
}

fn pow_checked(q: u64, e: u32) -> Result<u128> {
    (q as u128)
        .checked_pow(e)
        .ok_or_else(|| Error::TooLarge(format!("{q}^{e} overflows u128")))
}

/// `N(n', n'', delta)` from the case analysis: zero unless `delta` is
/// `|n' - n''| + 2r` with `r < min`, or sits at or just beyond `n' + n''` in the
/// way the splitting type allows.
pub fn closed_form_n(q: u64, kind: LocalKind, n_prime: u32, n_double: u32, delta: u32) -> Result<u128> {
    if q < 2 {
        return Err(Error::InvalidInput(format!("residue field size {q} < 2")));
    }
    let lo = n_prime.min(n_double);
    let hi = n_prime.max(n_double);
    let diff = hi - lo;
    let qq = q as u128;

    if delta >= diff && (delta - diff).is_multiple_of(2) {
        let r = (delta - diff) / 2;
        if r < lo {
            return if r == 0 { Ok(1) } else { Ok((qq - 1) * pow_checked(q, r - 1)?) };
        }
    }

    let sum = n_prime as u64 + n_double as u64;
    let delta = delta as u64;
    match kind {
        LocalKind::Inert => {
            if delta == sum {
                pow_checked(q, lo)
            } else {
                Ok(0)
            }
        }
        LocalKind::Ramified => {
            if delta == sum || delta == sum + 1 {
                let s = delta - sum;
                if s == 1 || lo == 0 {
                    pow_checked(q, lo)
                } else {
                    Ok((qq - 1) * pow_checked(q, lo - 1)?)
                }
            } else {
                Ok(0)
            }
        }
        LocalKind::Split => {
            if delta < sum {
                return Ok(0);
            }
            let s = delta - sum;
            Ok(match (lo == 0, s == 0) {
                (true, true) => 1,
                (true, false) => 2,
                (false, true) => (qq - 2) * pow_checked(q, lo - 1)?,
                (false, false) => 2 * (qq - 1) * pow_checked(q, lo - 1)?,
            })
        }
    }
}

/// Size of the orbit of a vertex with exponent `n_double` under the
/// stabilizer of a vertex with exponent `n_prime`:
/// `[Q_p^x (Z_p + p^n' O_K)^x : Q_p^x (Z_p + p^max O_K)^x]`.
///
/// Weighting `closed_form_n` by this recovers plain vertex counts on spheres.
pub fn orbit_weight(q: u64, kind: LocalKind, n_prime: u32, n_double: u32) -> u128 {
    if n_double <= n_prime {
        return 1;
    }
    let qq = q as u128;
    let steps = n_double - n_prime;
    if n_prime == 0 {
        let first = match kind {
            LocalKind::Inert => qq + 1,
            LocalKind::Ramified => qq,
            LocalKind::Split => qq - 1,
        };
        first * qq.pow(steps - 1)
    } else {
        qq.pow(steps)
    }
}
