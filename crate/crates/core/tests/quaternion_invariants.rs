use std::collections::HashSet;

use cmlift::arith;
use cmlift::local_tree::LocalKind;
use cmlift::quad_orders::splitting_kind;
use cmlift::quaternion::embeddings::optimal_elements;
use cmlift::quaternion::{
    eichler_order, embedding_census, make_algebra, maximalize, optimal_embeddings, right_ideal_classes,
    unit_group, Quat, QuatOrder,
};

fn eichler(ell: u64, n: u64) -> QuatOrder {
    let max = maximalize(&make_algebra(ell).unwrap()).unwrap();
    eichler_order(&max, n).unwrap().order
}

#[test]
fn unit_groups_are_groups() {
    for (ell, n) in [(2, 1), (3, 1), (5, 1), (11, 1), (2, 3), (3, 2), (7, 1)] {
        for class in right_ideal_classes(&eichler(ell, n)).unwrap() {
            let r = &class.left_order;
            let alg = r.algebra();
            let units: HashSet<Quat> = unit_group(r).unwrap().into_iter().collect();
            assert!(units.contains(&Quat::one()));
            for u in &units {
                assert!(units.contains(&alg.inverse(u).unwrap()));
                for v in &units {
                    assert!(units.contains(&alg.mul(u, v)), "ell={ell} N={n}");
                }
            }
        }
    }
}

#[test]
fn classes_are_unit_orbits() {
    for (ell, dk, c) in [(2, -3, 1), (3, -4, 5), (11, -4, 3), (13, -7, 1)] {
        for class in right_ideal_classes(&eichler(ell, 1)).unwrap() {
            let r = &class.left_order;
            let alg = r.algebra();
            let emb = optimal_embeddings(r, dk, c).unwrap();
            let elements = optimal_elements(r, dk, c).unwrap();
            assert_eq!(emb.classes.iter().map(|e| e.class_size).sum::<usize>(), elements.len());
            let units = unit_group(r).unwrap();
            let mut seen = HashSet::new();
            for e in &emb.classes {
                let orbit: HashSet<Quat> = units
                    .iter()
                    .map(|u| alg.mul(&alg.mul(u, &e.representative), &u.conj()))
                    .collect();
                assert_eq!(orbit.len(), e.class_size);
                assert!(orbit.iter().all(|x| seen.insert(x.clone())), "orbits overlap");
            }
        }
    }
}

#[test]
fn pairing_is_an_involution() {
    for (ell, dk, c) in [(2, -3, 1), (3, -4, 1), (5, -8, 1), (13, -7, 1), (11, -4, 3), (2, -3, 5)] {
        for class in right_ideal_classes(&eichler(ell, 1)).unwrap() {
            let emb = optimal_embeddings(&class.left_order, dk, c).unwrap();
            for (i, e) in emb.classes.iter().enumerate() {
                assert_eq!(emb.classes[e.conjugate_partner].conjugate_partner, i);
                if dk < -4 {
                    assert_ne!(e.conjugate_partner, i, "fixed point with dK = {dk}");
                }
            }
        }
    }
}

#[test]
fn census_identity_sweep() {
    let mut checked = 0;
    for ell in [2u64, 3, 5, 7] {
        for n in 1..=3u64 {
            for dk in [-3i64, -4, -7, -8, -11] {
                for c in 1..=3u64 {
                    if n % ell == 0
                        || arith::gcd(c, ell * n) != 1
                        || splitting_kind(dk, ell) == LocalKind::Split
                    {
                        continue;
                    }
                    let cen = embedding_census(ell, n, dk, c).unwrap();
                    assert!(cen.identity_holds(), "({ell},{n},{dk},{c}): {} vs {}", cen.total_classes(), cen.expected);
                    assert!(cen.signs_balanced());
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 20);
}
