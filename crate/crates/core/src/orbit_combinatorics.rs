//! Galois-orbit counts of CM points with a prescribed fine conductor, for a
//! quaternion algebra `B` over `Q` and its companion `B_S` ramified at `S` as
//! well, together with the multiplicity `kappa` of the lifting map and the
//! identities relating the two sides.
//!
//! Ideals of `Z` are positive integers. Every count is assembled prime by prime
//! from [`closed_form_n`]; primes away from `c' c'' level` contribute 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::arith;
use crate::error::{Error, Result};
use crate::local_tree::{closed_form_n, LocalKind};
use crate::quad_orders::{class_number, ring_class_degree, splitting_kind, QuadOrder};

/// `(dK, Ram_f B, level, S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalContext {
    dk: i64,
    ram: BTreeSet<u64>,
    level: u64,
    s: BTreeSet<u64>,
}

/// A failed hypothesis on a [`GlobalContext`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `p` lies in both `Ram_f B` and `S`.
    H1 { p: u64 },
    /// `|S| + |Ram_f B| + 1` is odd.
    H2 { s: usize, ram: usize },
    /// `p in S` splits in `K`.
    H3 { p: u64 },
    /// `p in Ram_f B` splits in `K`, so `K` does not embed in `B`.
    NoEmbedding { p: u64 },
    /// `p in Ram_f B` divides the level.
    LevelNotCoprime { p: u64 },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::H1 { .. } => "H.1",
            Violation::H2 { .. } => "H.2",
            Violation::H3 { .. } => "H.3",
            Violation::NoEmbedding { .. } => "embedding",
            Violation::LevelNotCoprime { .. } => "level",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::H1 { p } => write!(f, "H.1 violated: {p} lies in both Ram_f B and S"),
            Violation::H2 { s, ram } => {
                write!(f, "H.2 violated: |S| + |Ram_f B| + 1 = {} is odd", s + ram + 1)
            }
            Violation::H3 { p } => write!(f, "H.3 violated: {p} in S is split in K"),
            Violation::NoEmbedding { p } => {
                write!(f, "embedding violated: {p} in Ram_f B is split in K")
            }
            Violation::LevelNotCoprime { p } => {
                write!(f, "level violated: {p} in Ram_f B divides the level")
            }
        }
    }
}

impl GlobalContext {
    /// Checks only well-formedness (fundamental `dK`, prime sets, positive
    /// level); the hypotheses are reported by [`validate_context`].
    pub fn new(
        dk: i64,
        ram: impl IntoIterator<Item = u64>,
        level: u64,
        s: impl IntoIterator<Item = u64>,
    ) -> Result<Self> {
        if !arith::is_fundamental_discriminant(dk) {
            return Err(Error::InvalidInput(format!(
                "{dk} is not a negative fundamental discriminant"
            )));
        }
        if level == 0 {
            return Err(Error::InvalidInput("level must be positive".into()));
        }
        arith::factorize(level)?;
        let ram: BTreeSet<u64> = ram.into_iter().collect();
        let s: BTreeSet<u64> = s.into_iter().collect();
        for &p in ram.iter().chain(&s) {
            if p >= arith::FACTOR_LIMIT {
                return Err(Error::TooLarge(format!("prime {p}")));
            }
            if !arith::is_prime(p) {
                return Err(Error::InvalidInput(format!("{p} is not prime")));
            }
        }
        Ok(GlobalContext { dk, ram, level, s })
    }

    pub fn dk(&self) -> i64 {
        self.dk
    }

    pub fn ram(&self) -> &BTreeSet<u64> {
        &self.ram
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn s(&self) -> &BTreeSet<u64> {
        &self.s
    }

    /// `S'`: the primes of `S` inert in `K`.
    pub fn s_prime(&self) -> Vec<u64> {
        self.s
            .iter()
            .copied()
            .filter(|&p| splitting_kind(self.dk, p) == LocalKind::Inert)
            .collect()
    }

    /// `n` with every prime of `S` removed.
    pub fn prime_to_s(&self, n: u64) -> u64 {
        self.s.iter().fold(n, |m, &p| arith::strip(m, p))
    }

    /// The context of `B_S`: `Ram_f B u S`, prime-to-`S` level, no `S`.
    pub fn definite_side(&self) -> GlobalContext {
        GlobalContext {
            dk: self.dk,
            ram: self.ram.union(&self.s).copied().collect(),
            level: self.prime_to_s(self.level),
            s: BTreeSet::new(),
        }
    }

    /// Errors unless the context satisfies every hypothesis.
    pub fn validated(self) -> Result<Self> {
        let v = validate_context(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::Hypotheses(v.iter().map(ToString::to_string).collect()))
        }
    }
}

/// Every violated hypothesis, in a fixed order; empty means valid.
pub fn validate_context(ctx: &GlobalContext) -> Vec<Violation> {
    let mut out = Vec::new();
    for &p in ctx.ram.intersection(&ctx.s) {
        out.push(Violation::H1 { p });
    }
    if (ctx.s.len() + ctx.ram.len() + 1) % 2 == 1 {
        out.push(Violation::H2 { s: ctx.s.len(), ram: ctx.ram.len() });
    }
    for &p in &ctx.s {
        if splitting_kind(ctx.dk, p) == LocalKind::Split {
            out.push(Violation::H3 { p });
        }
    }
    for &p in &ctx.ram {
        if splitting_kind(ctx.dk, p) == LocalKind::Split {
            out.push(Violation::NoEmbedding { p });
        }
        if ctx.level.is_multiple_of(p) {
            out.push(Violation::LevelNotCoprime { p });
        }
    }
    out
}

/// `(c', c'')`, the conductors of `K` in the two maximal orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FineConductor {
    pub cprime: u64,
    pub cdouble: u64,
}

impl FineConductor {
    pub fn new(cprime: u64, cdouble: u64) -> Result<Self> {
        if cprime == 0 || cdouble == 0 {
            return Err(Error::InvalidInput("conductors must be positive".into()));
        }
        Ok(FineConductor { cprime, cdouble })
    }

    /// The coarse conductor `c' n c'' = lcm(c', c'')`.
    pub fn coarse(&self) -> u64 {
        arith::lcm(self.cprime, self.cdouble)
    }

    pub fn prime_to_s(&self, ctx: &GlobalContext) -> FineConductor {
        FineConductor {
            cprime: ctx.prime_to_s(self.cprime),
            cdouble: ctx.prime_to_s(self.cdouble),
        }
    }

    fn check_prime_to(&self, primes: &BTreeSet<u64>) -> Result<()> {
        for &p in primes {
            if self.cprime.is_multiple_of(p) || self.cdouble.is_multiple_of(p) {
                return Err(Error::InvalidInput(format!(
                    "fine conductor ({}, {}) is not prime to {p}",
                    self.cprime, self.cdouble
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for FineConductor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.cprime, self.cdouble)
    }
}

/// `v_p(c') - v_p(c'') = v_p(level) mod 2` for every `p in S'`.
pub fn admissible(fc: &FineConductor, ctx: &GlobalContext) -> bool {
    ctx.s_prime().into_iter().all(|p| {
        let d = arith::val(fc.cprime, p) as i64 - arith::val(fc.cdouble, p) as i64;
        (d - arith::val(ctx.level, p) as i64).rem_euclid(2) == 0
    })
}

/// `N_p(v_p(c'), v_p(c''), v_p(level))` with `q = p`.
pub fn local_factor(ctx: &GlobalContext, p: u64, fc: &FineConductor) -> Result<u128> {
    if ctx.ram.contains(&p) {
        return Err(Error::InvalidInput(format!("{p} is ramified in B")));
    }
    closed_form_n(
        p,
        splitting_kind(ctx.dk, p),
        arith::val(fc.cprime, p),
        arith::val(fc.cdouble, p),
        arith::val(ctx.level, p),
    )
}

fn support(ctx: &GlobalContext, fc: &FineConductor) -> Result<BTreeSet<u64>> {
    let mut primes = BTreeSet::new();
    for n in [fc.cprime, fc.cdouble, ctx.level] {
        primes.extend(arith::prime_divisors(n)?);
    }
    Ok(primes)
}

fn checked_mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b)
        .ok_or_else(|| Error::TooLarge("orbit count overflows 128 bits".into()))
}

/// `2^{#{p in Ram_f B inert in K}} * prod_{p not in Ram_f B} N_p`.
fn orbit_count(ctx: &GlobalContext, fc: &FineConductor) -> Result<u128> {
    fc.check_prime_to(&ctx.ram)?;
    let inert = ctx
        .ram
        .iter()
        .filter(|&&p| splitting_kind(ctx.dk, p) == LocalKind::Inert)
        .count() as u32;
    let mut total = 1u128
        .checked_shl(inert)
        .ok_or_else(|| Error::TooLarge("too many ramified primes".into()))?;
    for p in support(ctx, fc)? {
        if !ctx.ram.contains(&p) {
            total = checked_mul(total, local_factor(ctx, p, fc)?)?;
        }
    }
    Ok(total)
}

/// `N_B(c', c'', level)`: Galois orbits of CM points on the `B` side.
pub fn orbit_count_b(ctx: &GlobalContext, fc: &FineConductor) -> Result<u128> {
    orbit_count(ctx, fc)
}

/// `N_{B_S}(c'_S, c''_S, level)`; `fc` must already be prime to `S`.
pub fn orbit_count_bs(ctx: &GlobalContext, fc: &FineConductor) -> Result<u128> {
    fc.check_prime_to(&ctx.s)?;
    orbit_count(&ctx.definite_side(), fc)
}

/// `kappa = [K[c] : K[c_S]] * prod_{p in S} N_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kappa {
    pub value: u128,
    pub ring_class_degree: u64,
    /// `(p, N_p)` for `p in S`.
    pub local_factors: Vec<(u64, u128)>,
    /// Some `S`-local factor vanishes: both fibers are empty.
    pub empty_fiber: bool,
}

pub fn kappa(ctx: &GlobalContext, fc: &FineConductor) -> Result<Kappa> {
    if !admissible(fc, ctx) {
        return Err(Error::Inadmissible { cprime: fc.cprime, cdouble: fc.cdouble });
    }
    fc.check_prime_to(&ctx.ram)?;
    let c = fc.coarse();
    let degree = ring_class_degree(&QuadOrder::new(ctx.dk, c)?, ctx.prime_to_s(c))?;
    let mut value = degree as u128;
    let mut local_factors = Vec::new();
    for &p in &ctx.s {
        let n = local_factor(ctx, p, fc)?;
        local_factors.push((p, n));
        value = checked_mul(value, n)?;
    }
    Ok(Kappa {
        value,
        ring_class_degree: degree,
        local_factors,
        empty_fiber: value == 0,
    })
}

/// `e_{S'}`: one bit per inert prime of `S`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector {
    pub bits: BTreeMap<u64, u8>,
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bits.iter().map(|(p, b)| format!("{p}:{b}")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `(v_p(c') - base(p)) mod 2` for `p in S'`; `base` defaults to 0.
pub fn sign_vector(
    fc: &FineConductor,
    ctx: &GlobalContext,
    base: &BTreeMap<u64, u32>,
) -> Result<SignVector> {
    signs(fc.cprime, fc, ctx, |p| base.get(&p).copied().unwrap_or(0))
}

/// The same vector read off `c''`: `(v_p(c'') - base''(p)) mod 2`, where
/// `base''` defaults to `v_p(level)`.
pub fn sign_vector_from_cdouble(
    fc: &FineConductor,
    ctx: &GlobalContext,
    base: &BTreeMap<u64, u32>,
) -> Result<SignVector> {
    signs(fc.cdouble, fc, ctx, |p| {
        base.get(&p).copied().unwrap_or_else(|| arith::val(ctx.level, p))
    })
}

fn signs(
    c: u64,
    fc: &FineConductor,
    ctx: &GlobalContext,
    base: impl Fn(u64) -> u32,
) -> Result<SignVector> {
    if !admissible(fc, ctx) {
        return Err(Error::Inadmissible { cprime: fc.cprime, cdouble: fc.cdouble });
    }
    let bits = ctx
        .s_prime()
        .into_iter()
        .map(|p| (p, (arith::val(c, p) as i64 - base(p) as i64).rem_euclid(2) as u8))
        .collect();
    Ok(SignVector { bits })
}

/// Both sides of the two counting identities, with the intermediate values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub n_b: u128,
    pub n_bs: u128,
    /// `2^{|S'|}`.
    pub sign_classes: u128,
    /// `prod_{p in S} N_p`.
    pub s_local: u128,
    pub kappa: Kappa,
    pub h_c: u64,
    pub h_cs: u64,
    /// `N_B * h(c)`.
    pub source: u128,
    /// `(N_{B_S} / 2^{|S'|}) * h(c_S)`.
    pub target: u128,
    /// `N_B = (N_{B_S} / 2^{|S'|}) * prod_S N_p`.
    pub identity_a: bool,
    /// `N_B * h(c) = kappa * target`.
    pub identity_b: bool,
    pub detail: String,
}

impl ConsistencyReport {
    pub fn holds(&self) -> bool {
        self.identity_a && self.identity_b
    }
}

pub fn theorem_consistency(ctx: &GlobalContext, fc: &FineConductor) -> Result<ConsistencyReport> {
    let kappa = kappa(ctx, fc)?;
    let fc_s = fc.prime_to_s(ctx);
    let n_b = orbit_count_b(ctx, fc)?;
    let n_bs = orbit_count_bs(ctx, &fc_s)?;
    let sign_classes = 1u128 << ctx.s_prime().len();
    let s_local = kappa
        .local_factors
        .iter()
        .try_fold(1u128, |acc, &(_, n)| checked_mul(acc, n))?;
    let h_c = class_number(&QuadOrder::new(ctx.dk, fc.coarse())?);
    let h_cs = class_number(&QuadOrder::new(ctx.dk, fc_s.coarse())?);
    let source = checked_mul(n_b, h_c as u128)?;

    let mut detail = Vec::new();
    let (target, identity_a, identity_b) = if n_bs % sign_classes != 0 {
        detail.push(format!("N_BS = {n_bs} is not divisible by 2^|S'| = {sign_classes}"));
        (0, false, false)
    } else {
        let per_sign = n_bs / sign_classes;
        let target = checked_mul(per_sign, h_cs as u128)?;
        let a = n_b == checked_mul(per_sign, s_local)?;
        if !a {
            detail.push(format!("(a) {n_b} != {per_sign} * {s_local}"));
        }
        let rhs = checked_mul(kappa.value, target)?;
        let b = source == rhs;
        if !b {
            detail.push(format!("(b) {n_b} * {h_c} != {} * {target}", kappa.value));
        }
        (target, a, b)
    };
    Ok(ConsistencyReport {
        n_b,
        n_bs,
        sign_classes,
        s_local,
        kappa,
        h_c,
        h_cs,
        source,
        target,
        identity_a,
        identity_b,
        detail: detail.join("; "),
    })
}
