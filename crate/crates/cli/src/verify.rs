//! Self-verification suites. Each suite is a list of independent tasks whose
//! checks are concatenated in task order, whatever the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use cmlift::arith;
use cmlift::local_tree::{
    brute_force_n, closed_form_n, orbit_weight, sphere_size, LocalKind, LocalQuadratic, DEFAULT_SPHERE_CAP,
};
use cmlift::orbit_combinatorics::{
    admissible, orbit_count_b, theorem_consistency, validate_context, FineConductor, GlobalContext,
};
use cmlift::quad_orders::splitting_kind;
use cmlift::quaternion::ideals::{class_mass, eichler_mass};
use cmlift::quaternion::{eichler_order, embedding_census, make_algebra, maximalize, right_ideal_classes};

use crate::report::Check;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Local,
    Orbits,
    Quaternion,
    All,
}

type Task = Box<dyn Fn() -> Vec<Check> + Send + Sync>;

const SWEEP_DISCRIMINANTS: [i64; 8] = [-3, -4, -7, -8, -11, -15, -19, -20];
const RANDOM_SAMPLES: usize = 400;
const MAX_RANDOM_COARSE: u64 = 240;

fn failing(name: String, expected: &str, actual: String) -> Check {
    Check { name, pass: false, expected: expected.into(), actual }
}

/// First counterexample in task order, or the number of cases checked.
fn tally(name: String, checked: u64, first_bad: Option<String>) -> Check {
    match first_bad {
        None => Check { name, pass: true, expected: "no counterexample".into(), actual: format!("{checked} cases") },
        Some(bad) => failing(name, "no counterexample", bad),
    }
}

fn local_tasks() -> Vec<Task> {
    let mut tasks: Vec<Task> = Vec::new();
    for p in [2u64, 3, 5] {
        for kind in LocalKind::ALL {
            let max_delta = if p == 5 { 6 } else { 8 };
            tasks.push(Box::new(move || {
                let field = match LocalQuadratic::new(p, kind) {
                    Ok(f) => f,
                    Err(e) => return vec![failing(format!("local/oracle/p={p}/{kind}"), "field", e.to_string())],
                };
                let mut checked = 0;
                let mut bad = None;
                let mut sym_bad = None;
                for a in 0..=3 {
                    for b in 0..=3 {
                        for d in 0..=max_delta {
                            checked += 1;
                            let bf = brute_force_n(&field, a, b, d, DEFAULT_SPHERE_CAP);
                            let cf = closed_form_n(p, kind, a, b, d);
                            let sw = closed_form_n(p, kind, b, a, d);
                            if bad.is_none() && !matches!((&bf, &cf), (Ok(x), Ok(y)) if x == y) {
                                bad = Some(format!("n'={a} n''={b} delta={d}: brute {bf:?}, closed {cf:?}"));
                            }
                            if sym_bad.is_none() && cf.as_ref().ok() != sw.as_ref().ok() {
                                sym_bad = Some(format!("n'={a} n''={b} delta={d}: {cf:?} vs {sw:?}"));
                            }
                        }
                    }
                }
                let mut weighted_bad = None;
                let mut rows = 0;
                for a in 0..=3u32 {
                    for d in 0..=max_delta {
                        rows += 1;
                        let total: u128 = (0..=a + d)
                            .map(|b| closed_form_n(p, kind, a, b, d).unwrap_or(0) * orbit_weight(p, kind, a, b))
                            .sum();
                        if weighted_bad.is_none() && total != sphere_size(p, d) {
                            weighted_bad = Some(format!("n'={a} delta={d}: {total} vs {}", sphere_size(p, d)));
                        }
                    }
                }
                vec![
                    tally(format!("local/oracle/p={p}/{kind}"), checked, bad),
                    tally(format!("local/symmetry/p={p}/{kind}"), checked, sym_bad),
                    tally(format!("local/weighted_sphere/p={p}/{kind}"), rows, weighted_bad),
                ]
            }));
        }
    }
    tasks
}

fn first_nonsplit_above(dk: i64, floor: u64, k: usize) -> Vec<u64> {
    (floor + 1..)
        .filter(|&p| arith::is_prime(p) && splitting_kind(dk, p) != LocalKind::Split)
        .take(k)
        .collect()
}

fn sweep_contexts(dk: i64) -> Vec<GlobalContext> {
    let subsets: [&[u64]; 7] = [&[], &[2], &[3], &[5], &[2, 3], &[2, 5], &[3, 5]];
    let mut out = Vec::new();
    for s in subsets {
        // H.2 parity with B_S definite: |S| + |Ram_f B| odd
        let rams: Vec<Vec<u64>> = if s.len() % 2 == 1 {
            vec![vec![]]
        } else {
            first_nonsplit_above(dk, 24, 2).into_iter().map(|p| vec![p]).collect()
        };
        for ram in rams {
            for level in 1..=12 {
                if let Ok(ctx) = GlobalContext::new(dk, ram.clone(), level, s.iter().copied()) {
                    if validate_context(&ctx).is_empty() {
                        out.push(ctx);
                    }
                }
            }
        }
    }
    out
}

fn heegner_prime(ctx: &GlobalContext, fc: &FineConductor) -> Option<u64> {
    arith::prime_divisors(ctx.level()).ok()?.into_iter().find(|&p| {
        splitting_kind(ctx.dk(), p) == LocalKind::Inert && !fc.cprime.is_multiple_of(p) && !fc.cdouble.is_multiple_of(p)
    })
}

fn consistency_case(ctx: &GlobalContext, fc: &FineConductor) -> Option<String> {
    match theorem_consistency(ctx, fc) {
        Ok(r) if r.holds() => None,
        Ok(r) => Some(format!("{ctx:?} {fc}: {}", r.detail)),
        Err(e) => Some(format!("{ctx:?} {fc}: {e}")),
    }
}

fn orbit_tasks(seed: u64) -> Vec<Task> {
    let mut tasks: Vec<Task> = Vec::new();
    for dk in SWEEP_DISCRIMINANTS {
        tasks.push(Box::new(move || {
            let (mut checked, mut heegner) = (0u64, 0u64);
            let (mut bad, mut heegner_bad) = (None, None);
            for ctx in sweep_contexts(dk) {
                for a in 1..=24 {
                    for b in 1..=24 {
                        let fc = FineConductor::new(a, b).expect("positive");
                        if !admissible(&fc, &ctx) {
                            continue;
                        }
                        checked += 1;
                        if bad.is_none() {
                            bad = consistency_case(&ctx, &fc);
                        }
                        if let Some(p) = heegner_prime(&ctx, &fc) {
                            heegner += 1;
                            match orbit_count_b(&ctx, &fc) {
                                Ok(0) => {}
                                other => {
                                    heegner_bad.get_or_insert(format!("{ctx:?} {fc}, inert {p}: {other:?}"));
                                }
                            }
                        }
                    }
                }
            }
            vec![
                tally(format!("orbits/consistency/dK={dk}"), checked, bad),
                tally(format!("orbits/heegner/dK={dk}"), heegner, heegner_bad),
            ]
        }));
    }
    tasks.push(Box::new(move || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let candidates = [2u64, 3, 5, 7, 11, 13];
        let mut checked = 0u64;
        let mut bad = None;
        let mut attempts = 0;
        while (checked as usize) < RANDOM_SAMPLES && attempts < 100 * RANDOM_SAMPLES {
            attempts += 1;
            let dk = SWEEP_DISCRIMINANTS[rng.gen_range(0..SWEEP_DISCRIMINANTS.len())];
            let s: Vec<u64> = candidates.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
            let ram = if s.len() % 2 == 1 { vec![] } else { first_nonsplit_above(dk, 60, 1) };
            let level = rng.gen_range(1..=60);
            let fc = FineConductor::new(rng.gen_range(1..=60), rng.gen_range(1..=60)).expect("positive");
            // class numbers are counted by reduced forms, linear in |disc|
            if fc.coarse() > MAX_RANDOM_COARSE {
                continue;
            }
            let Ok(ctx) = GlobalContext::new(dk, ram, level, s) else { continue };
            if !validate_context(&ctx).is_empty() || !admissible(&fc, &ctx) {
                continue;
            }
            checked += 1;
            if bad.is_none() {
                bad = consistency_case(&ctx, &fc);
            }
        }
        vec![tally(format!("orbits/random/seed={seed}"), checked, bad)]
    }));
    tasks
}

const CENSUS: [(u64, u64, i64, u64, u128); 5] =
    [(2, 1, -3, 1, 2), (3, 1, -4, 1, 2), (3, 1, -4, 5, 4), (11, 1, -3, 1, 2), (2, 5, -3, 1, 0)];

fn quaternion_tasks() -> Vec<Task> {
    let mut tasks: Vec<Task> = Vec::new();
    for ell in [2u64, 3, 5, 7, 11, 13] {
        tasks.push(Box::new(move || {
            let name = |what: &str| format!("quaternion/{what}/ell={ell}");
            let max = match make_algebra(ell).and_then(|a| maximalize(&a)) {
                Ok(m) => m,
                Err(e) => return vec![failing(name("maximal"), "order", e.to_string())],
            };
            let mut out = vec![Check::new(name("maximal_disc"), ell, max.red_disc())];
            for n in [1u64, 2, 3, 5] {
                if n % ell == 0 {
                    continue;
                }
                let name = |what: &str| format!("quaternion/{what}/ell={ell}/N={n}");
                let result = eichler_order(&max, n).and_then(|e| {
                    let classes = right_ideal_classes(&e.order)?;
                    Ok((e.order.red_disc(), class_mass(&classes), eichler_mass(ell, n)?))
                });
                match result {
                    Ok((disc, mass, want)) => {
                        out.push(Check::new(name("eichler_disc"), ell * n, disc));
                        out.push(Check::new(name("mass"), want, mass));
                    }
                    Err(e) => out.push(failing(name("eichler"), "classes", e.to_string())),
                }
            }
            out
        }));
    }
    for (ell, n, dk, c, total) in CENSUS {
        tasks.push(Box::new(move || {
            let name = |what: &str| format!("quaternion/{what}/ell={ell}/N={n}/dK={dk}/c={c}");
            match embedding_census(ell, n, dk, c) {
                Ok(cen) => {
                    let mut out = vec![
                        Check::new(name("census_total"), total, cen.total_classes()),
                        Check::new(name("census_identity"), cen.expected, cen.total_classes()),
                    ];
                    if let Some([a, b]) = cen.sign_totals() {
                        out.push(Check::new(name("sign_halves"), a, b));
                    }
                    out
                }
                Err(e) => vec![failing(name("census"), "census", e.to_string())],
            }
        }));
    }
    tasks
}

/// Checks for `suite`, in a fixed order, computed on `jobs` workers.
pub fn run(suite: Suite, seed: u64, jobs: usize) -> Result<Vec<Check>, String> {
    let mut tasks: Vec<Task> = Vec::new();
    if matches!(suite, Suite::Local | Suite::All) {
        tasks.extend(local_tasks());
    }
    if matches!(suite, Suite::Orbits | Suite::All) {
        tasks.extend(orbit_tasks(seed));
    }
    if matches!(suite, Suite::Quaternion | Suite::All) {
        tasks.extend(quaternion_tasks());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| e.to_string())?;
    let checks: Vec<Vec<Check>> = pool.install(|| tasks.par_iter().map(|t| t()).collect());
    Ok(checks.into_iter().flatten().collect())
}
