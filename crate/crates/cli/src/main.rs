//! `cmlift`: local counts, orbit multiplicities, embedding censuses and the
//! self-verification harness, reported as JSON (or CSV for censuses).
//!
//! Exit codes: 0 success, 1 check failure, 2 input or hypothesis error,
//! 3 resource cap.

mod report;
mod verify;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cmlift::local_tree::{brute_force_n, closed_form_n, LocalKind, LocalQuadratic, DEFAULT_SPHERE_CAP};
use cmlift::orbit_combinatorics::{
    admissible, theorem_consistency, validate_context, FineConductor, GlobalContext,
};
use cmlift::quaternion::{embedding_census, Census};
use cmlift::{arith, Error};

use report::{big, int, primes, rat, Check, Report};
use verify::Suite;

#[derive(Parser)]
#[command(name = "cmlift", version, about = "Exact counts of CM points on quaternionic lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Local count N(n', n'', delta) on the Bruhat-Tits tree.
    LocalCount(LocalCountArgs),
    /// The multiplicity kappa and both orbit counts.
    Kappa(KappaArgs),
    /// Census of optimal embeddings over the right ideal classes of an Eichler order.
    Embeddings(EmbeddingsArgs),
    /// Run the invariant suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct LocalCountArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    kind: LocalKind,
    #[arg(long)]
    nprime: u32,
    #[arg(long)]
    ndouble: u32,
    #[arg(long)]
    delta: u32,
    /// Also enumerate the sphere and compare.
    #[arg(long)]
    brute: bool,
    /// Vertex budget for --brute.
    #[arg(long, default_value_t = DEFAULT_SPHERE_CAP)]
    cap: u128,
}

#[derive(Args)]
struct KappaArgs {
    #[arg(long, allow_hyphen_values = true)]
    dk: i64,
    #[arg(long)]
    cprime: u64,
    #[arg(long)]
    cdouble: u64,
    #[arg(long, default_value_t = 1)]
    level: u64,
    /// Finite ramification of B, comma separated.
    #[arg(long, value_delimiter = ',')]
    ram: Vec<u64>,
    /// The set S, comma separated.
    #[arg(long, value_delimiter = ',')]
    s: Vec<u64>,
}

#[derive(Args)]
struct EmbeddingsArgs {
    #[arg(long)]
    ell: u64,
    #[arg(long, default_value_t = 1)]
    level: u64,
    #[arg(long, allow_hyphen_values = true)]
    dk: i64,
    #[arg(long, default_value_t = 1)]
    c: u64,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

/// A failure that stops the command before a report exists.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ResourceCap { .. } | Error::SearchExhausted(_) => 3,
            Error::Invariant(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn local_count(a: &LocalCountArgs) -> Result<Report, Failure> {
    if !arith::is_prime(a.p) {
        return Err(input_error(format!("{} is not prime", a.p)));
    }
    let mut r = Report::new("local-count");
    r.input("p", json!(a.p))
        .input("kind", json!(a.kind.name()))
        .input("nprime", json!(a.nprime))
        .input("ndouble", json!(a.ndouble))
        .input("delta", json!(a.delta))
        .input("brute", json!(a.brute));
    let closed = closed_form_n(a.p, a.kind, a.nprime, a.ndouble, a.delta)?;
    r.output("closed_form", int(closed));
    if a.brute {
        let field = LocalQuadratic::new(a.p, a.kind)?;
        let brute = brute_force_n(&field, a.nprime, a.ndouble, a.delta, a.cap)?;
        r.output("brute_force", int(brute));
        r.checks.push(Check::new("closed_form_equals_brute_force", brute, closed));
    }
    Ok(r)
}

fn kappa(a: &KappaArgs) -> Result<Report, Failure> {
    let ctx = GlobalContext::new(a.dk, a.ram.iter().copied(), a.level, a.s.iter().copied())?;
    let violations = validate_context(&ctx);
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(input_error(msgs.join("; ")));
    }
    let fc = FineConductor::new(a.cprime, a.cdouble)?;
    if !admissible(&fc, &ctx) {
        return Err(input_error(format!("fine conductor {fc} is not admissible for S' = {:?}", ctx.s_prime())));
    }
    let report = theorem_consistency(&ctx, &fc)?;
    let mut r = Report::new("kappa");
    r.input("dk", json!(a.dk))
        .input("cprime", json!(a.cprime))
        .input("cdouble", json!(a.cdouble))
        .input("level", json!(a.level))
        .input("ram", primes(&ctx.ram().iter().copied().collect::<Vec<_>>()))
        .input("s", primes(&ctx.s().iter().copied().collect::<Vec<_>>()));
    let local: Vec<Value> = report
        .kappa
        .local_factors
        .iter()
        .map(|&(p, n)| json!({"p": p, "n": int(n)}))
        .collect();
    r.output("kappa", int(report.kappa.value))
        .output("ring_class_degree", json!(report.kappa.ring_class_degree))
        .output("s_local_factors", json!(local))
        .output("empty_fiber", json!(report.kappa.empty_fiber))
        .output("orbit_count_b", int(report.n_b))
        .output("orbit_count_bs", int(report.n_bs))
        .output("sign_classes", int(report.sign_classes))
        .output("class_number_c", json!(report.h_c))
        .output("class_number_cs", json!(report.h_cs))
        .output("fiber_source", int(report.source))
        .output("fiber_target", int(report.target))
        .output("s_prime", primes(&ctx.s_prime()));
    let per_sign = report.n_bs.checked_div(report.sign_classes).unwrap_or(0);
    r.checks.push(Check::new("sign_classes_divide_orbit_count_bs", 0, report.n_bs % report.sign_classes));
    r.checks.push(Check::new(
        "orbit_count_b_equals_per_sign_times_s_local",
        report.n_b,
        per_sign * report.s_local,
    ));
    r.checks.push(Check::new(
        "source_equals_kappa_times_target",
        report.source,
        report.kappa.value.checked_mul(report.target).map_or("overflow".into(), |v| v.to_string()),
    ));
    Ok(r)
}

fn census_report(a: &EmbeddingsArgs, cen: &Census) -> Report {
    let mut r = Report::new("embeddings");
    r.input("ell", json!(a.ell)).input("level", json!(a.level)).input("dk", json!(a.dk)).input("c", json!(a.c));
    let rows: Vec<Value> = cen
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let e = &row.embeddings;
            let classes: Vec<Value> = e
                .classes
                .iter()
                .map(|k| {
                    json!({
                        "coordinates": k.coordinates.iter().map(big).collect::<Vec<_>>(),
                        "representative": k.representative.0.iter().map(rat).collect::<Vec<_>>(),
                        "class_size": k.class_size,
                        "conjugate_partner": k.conjugate_partner,
                        "sign": k.sign_bit,
                    })
                })
                .collect();
            json!({
                "ideal_class": i,
                "ideal_norm": rat(&row.ideal_norm),
                "unit_order": row.unit_order,
                "embedding_classes": e.classes.len(),
                "pairs": e.pairs(),
                "fixed_points": e.fixed_points(),
                "elements": e.elements,
                "sign_counts": e.sign_counts(),
                "classes": classes,
            })
        })
        .collect();
    r.output("ideal_classes", json!(rows))
        .output("total_classes", json!(cen.total_classes()))
        .output("total_pairs", json!(cen.total_pairs()))
        .output("total_fixed_points", json!(cen.total_fixed_points()))
        .output("total_elements", json!(cen.total_elements()))
        .output("sign_totals", json!(cen.sign_totals()))
        .output("expected", int(cen.expected))
        .output("extra_units", json!(cen.extra_units));
    r.checks.push(Check::new("census_identity", cen.expected, cen.total_classes()));
    if let Some([s0, s1]) = cen.sign_totals() {
        r.checks.push(Check::new("sign_halves", s0, s1));
    }
    r
}

fn census_csv(cen: &Census) -> Result<String, Failure> {
    let io = |e: csv::Error| Failure { code: 1, message: e.to_string() };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "ideal_class", "ideal_norm", "unit_order", "embedding_classes", "pairs", "fixed_points", "elements",
        "sign_0", "sign_1",
    ])
    .map_err(io)?;
    let signs = |s: Option<[usize; 2]>| match s {
        Some([a, b]) => [a.to_string(), b.to_string()],
        None => [String::new(), String::new()],
    };
    for (i, row) in cen.rows.iter().enumerate() {
        let e = &row.embeddings;
        let [s0, s1] = signs(e.sign_counts());
        w.write_record([
            i.to_string(),
            format!("{}/{}", row.ideal_norm.numer(), row.ideal_norm.denom()),
            row.unit_order.to_string(),
            e.classes.len().to_string(),
            e.pairs().to_string(),
            e.fixed_points().to_string(),
            e.elements.to_string(),
            s0,
            s1,
        ])
        .map_err(io)?;
    }
    let [s0, s1] = signs(cen.sign_totals());
    w.write_record([
        "total".to_string(),
        String::new(),
        String::new(),
        cen.total_classes().to_string(),
        cen.total_pairs().to_string(),
        cen.total_fixed_points().to_string(),
        cen.total_elements().to_string(),
        s0,
        s1,
    ])
    .map_err(io)?;
    let bytes = w.into_inner().map_err(|e| Failure { code: 1, message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn verify(a: &VerifyArgs) -> Result<Report, Failure> {
    let mut r = Report::new("verify");
    let suite = match a.suite {
        Suite::Local => "local",
        Suite::Orbits => "orbits",
        Suite::Quaternion => "quaternion",
        Suite::All => "all",
    };
    r.input("suite", json!(suite)).input("seed", json!(a.seed));
    r.checks = verify::run(a.suite, a.seed, a.jobs).map_err(|m| Failure { code: 1, message: m })?;
    let failed = r.checks.iter().filter(|c| !c.pass).count();
    if let Some(first) = r.checks.iter().find(|c| !c.pass) {
        eprintln!("counterexample in {}: {}", first.name, first.actual);
    }
    let run = r.checks.len();
    r.output("checks_run", json!(run)).output("checks_failed", json!(failed));
    Ok(r)
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn finish(r: Report) -> ExitCode {
    emit(&format!("{}\n", r.render()));
    if r.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::LocalCount(a) => local_count(a).map(finish),
        Command::Kappa(a) => kappa(a).map(finish),
        Command::Verify(a) => verify(a).map(finish),
        Command::Embeddings(a) => embedding_census(a.ell, a.level, a.dk, a.c)
            .map_err(Failure::from)
            .and_then(|cen| {
                let r = census_report(a, &cen);
                if a.csv {
                    emit(&census_csv(&cen)?);
                    Ok(if r.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
                } else {
                    Ok(finish(r))
                }
            }),
    };
    result.unwrap_or_else(|f| {
        eprintln!("error: {}", f.message);
        ExitCode::from(f.code)
    })
}
