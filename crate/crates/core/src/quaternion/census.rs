//! Optimal embeddings `O_c -> O_L(I)` summed over the right ideal classes of
//! an Eichler order, compared with the orbit count times `h(O_c)`.

use num_rational::BigRational;

use super::algebra::make_algebra;
use super::embeddings::{optimal_embeddings, Embeddings};
use super::ideals::right_ideal_classes;
use super::order::{eichler_order, maximalize};
use crate::arith;
use crate::error::{Error, Result};
use crate::local_tree::LocalKind;
use crate::orbit_combinatorics::{orbit_count_bs, FineConductor, GlobalContext};
use crate::quad_orders::{class_number, splitting_kind, QuadOrder};

/// Embedding data for one right ideal class `I`, taken in `O_L(I)`.
#[derive(Debug, Clone)]
pub struct CensusRow {
    pub ideal_norm: BigRational,
    pub unit_order: u64,
    pub embeddings: Embeddings,
}

impl CensusRow {
    pub fn classes(&self) -> usize {
        self.embeddings.classes.len()
    }
}

#[derive(Debug, Clone)]
pub struct Census {
    pub ell: u64,
    pub level: u64,
    pub dk: i64,
    pub c: u64,
    pub rows: Vec<CensusRow>,
    /// `orbit_count_BS((c, c)) * h(O_c)` for `B_S` ramified at `ell`.
    pub expected: u128,
    /// `dK in {-3, -4}`: extra units can fix a class under conjugation.
    pub extra_units: bool,
}

impl Census {
    pub fn total_classes(&self) -> usize {
        self.rows.iter().map(CensusRow::classes).sum()
    }

    pub fn total_pairs(&self) -> usize {
        self.rows.iter().map(|r| r.embeddings.pairs()).sum()
    }

    pub fn total_fixed_points(&self) -> usize {
        self.rows.iter().map(|r| r.embeddings.fixed_points()).sum()
    }

    pub fn total_elements(&self) -> usize {
        self.rows.iter().map(|r| r.embeddings.elements).sum()
    }

    /// Present when `ell` is inert in `K`.
    pub fn sign_totals(&self) -> Option<[usize; 2]> {
        let mut out = [0, 0];
        for r in &self.rows {
            let s = r.embeddings.sign_counts()?;
            out[0] += s[0];
            out[1] += s[1];
        }
        Some(out)
    }

    pub fn identity_holds(&self) -> bool {
        self.total_classes() as u128 == self.expected
    }

    /// Both sign classes carry half the total; vacuous when `ell` ramifies.
    pub fn signs_balanced(&self) -> bool {
        self.sign_totals().is_none_or(|[a, b]| a == b)
    }
}

pub fn embedding_census(ell: u64, level: u64, dk: i64, c: u64) -> Result<Census> {
    if !arith::is_prime(ell) {
        return Err(Error::InvalidInput(format!("{ell} is not prime")));
    }
    if level == 0 || c == 0 {
        return Err(Error::InvalidInput("level and conductor must be positive".into()));
    }
    if arith::gcd(c, ell * level) != 1 {
        return Err(Error::InvalidInput(format!("c = {c} is not prime to ell * N = {}", ell * level)));
    }
    if arith::gcd(ell, level) != 1 {
        return Err(Error::InvalidInput(format!("level {level} is divisible by {ell}")));
    }
    let quad = QuadOrder::new(dk, c)?;
    if splitting_kind(dk, ell) == LocalKind::Split {
        return Err(Error::InvalidInput(format!("{ell} splits in Q(sqrt {dk})")));
    }

    let ctx = GlobalContext::new(dk, [], level, [ell])?;
    let expected = orbit_count_bs(&ctx, &FineConductor::new(c, c)?)?
        .checked_mul(class_number(&quad) as u128)
        .ok_or_else(|| Error::TooLarge("census total overflows 128 bits".into()))?;

    let max = maximalize(&make_algebra(ell)?)?;
    let order = eichler_order(&max, level)?.order;
    let mut rows = Vec::new();
    for class in right_ideal_classes(&order)? {
        rows.push(CensusRow {
            ideal_norm: class.reduced_norm.clone(),
            unit_order: class.unit_order,
            embeddings: optimal_embeddings(&class.left_order, dk, c)?,
        });
    }
    Ok(Census { ell, level, dk, c, rows, expected, extra_units: dk == -3 || dk == -4 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_examples() {
        for (ell, n, dk, c, total) in [(2, 1, -3, 1, 2), (3, 1, -4, 1, 2), (11, 1, -3, 1, 2), (2, 5, -3, 1, 0)] {
            let cen = embedding_census(ell, n, dk, c).unwrap();
            assert_eq!(cen.total_classes(), total, "({ell},{n},{dk},{c})");
            assert!(cen.identity_holds());
            assert!(cen.signs_balanced());
        }
        let h = embedding_census(2, 1, -3, 1).unwrap();
        assert_eq!((h.total_pairs(), h.sign_totals()), (1, Some([1, 1])));
        assert_eq!(embedding_census(11, 1, -3, 1).unwrap().rows.len(), 2);
    }

    #[test]
    fn preconditions() {
        assert!(embedding_census(2, 1, -7, 1).is_err());
        assert!(embedding_census(3, 1, -4, 3).is_err());
        assert!(embedding_census(3, 3, -4, 1).is_err());
        assert!(embedding_census(4, 1, -3, 1).is_err());
    }

    #[test]
    fn ramified_ell_has_no_signs() {
        let cen = embedding_census(3, 1, -3, 1).unwrap();
        assert!(cen.sign_totals().is_none());
        assert!(cen.identity_holds());
    }
}
