//! `tracelab`: batch front end for the experiments and the verification suite.
//!
//! Every command writes a machine-readable artifact (JSON or CSV) to stdout or
//! `--out`, and one human-readable summary line to stderr. Exit status is 0 on
//! pass, 1 when a checked identity is falsified, 2 on usage errors.

mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use tracelab::adelic::{self, AdelicError, FactoredTestFunction, RationalAdele, TruncationSet};
use tracelab::ffl::{self, DirichletCharacterFF, FfError, FqPolynomial};
use tracelab::orbital::{self, OrbitalError};
use tracelab::records::rational;
use tracelab::rootdata::RootSystem;
use tracelab::{steinberg, suite, PAdicApprox};

#[derive(Parser, Debug)]
#[command(
    name = "tracelab",
    version,
    about = "Exact and high-precision checks of the elliptic-regular stable trace formula",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact format (CSV only for tabular commands).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Jacobian/discriminant identity for A1 or A2.
    Hc1Check {
        #[arg(long = "type", default_value = "A2")]
        cartan: String,
        #[command(flatten)]
        output: Output,
    },
    /// Stabilized local density θ_p(b; s) by fiber counting.
    Theta {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long = "N")]
        n: u32,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Base integral θ̂_p(0; s) over a grid of s.
    ThetaHatZero {
        #[arg(long)]
        p: u64,
        #[arg(long = "N", default_value_t = 4)]
        n: u32,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        s: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// θ_p(b; 1) against the closed form for every b mod p with unit discriminant.
    TransversalLemma {
        #[arg(long)]
        p: u64,
        #[arg(long = "N", default_value_t = 4)]
        n: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Per-torus-class masses and derivative coefficients.
    TorusBreakdown {
        /// Explicit primes (comma-separated); otherwise all odd primes ≤ pmax.
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 97)]
        pmax: u64,
        #[arg(long = "N", default_value_t = 2)]
        n: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Exact interpolation of the breakdown in 1/p and the hand identities.
    BreakdownFit {
        #[arg(long, default_value_t = 97)]
        pmax: u64,
        #[arg(long = "N", default_value_t = 2)]
        n: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Partial products of θ̂_p(0; s) against Π(1 − p⁻²).
    DominantProduct {
        #[arg(long, default_value_t = 100)]
        pmax: u64,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        s: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Truncated Poisson summation for exp(−πtx²)·Π 1_{p^k Z_p}.
    Poisson {
        /// Truncation set, e.g. `inf,2`.
        #[arg(long, default_value = "inf")]
        sp: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Level `p:k` for the factor 1_{p^k Z_p}; repeatable.
        #[arg(long = "level")]
        levels: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Decomposition a = a′ + b with a′ integral outside S′.
    GetzDecompose {
        #[arg(long, default_value = "inf")]
        sp: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        real: f64,
        /// Finite component `p:x` or `p:x@prec`, x rational; repeatable.
        #[arg(long = "component")]
        components: Vec<String>,
        /// Instead, decompose this many random adeles and report the tally.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = suite::SUITE_SEED)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Euler coefficients against divisor sums on the affine line.
    FflSerie {
        #[arg(long, default_value_t = 3)]
        q: u64,
        /// Moduli such as `t^2+1`; default: all monic moduli up to max-degree.
        #[arg(long)]
        modulus: Vec<String>,
        #[arg(long, default_value_t = 2)]
        max_degree: u32,
        #[arg(long, default_value_t = 6)]
        dmax: u32,
        #[command(flatten)]
        output: Output,
    },
    /// L-polynomial roots and the symmetric-power vanishing check.
    FflSympow {
        #[arg(long, default_value_t = 3)]
        q: u64,
        #[arg(long)]
        modulus: String,
        #[arg(long, default_value_t = 1)]
        character: usize,
        #[arg(long, default_value_t = 6)]
        dmax: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Run the acceptance suite.
    VerifyAll {
        /// Restrict to these criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[command(flatten)]
        output: Output,
    },
}

enum Failure {
    Usage(String),
    Falsified(String),
}

impl From<OrbitalError> for Failure {
    fn from(e: OrbitalError) -> Self {
        match e {
            OrbitalError::StabilizationFailed { .. } | OrbitalError::ModelDegree { .. } => {
                Failure::Falsified(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<FfError> for Failure {
    fn from(e: FfError) -> Self {
        match e {
            FfError::NonVanishing { .. } => Failure::Falsified(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<AdelicError> for Failure {
    fn from(e: AdelicError) -> Self {
        Failure::Usage(e.to_string())
    }
}

struct Report {
    artifact: String,
    summary: String,
    passed: bool,
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("records serialize");
    s.push('\n');
    s
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 records")
}

fn json_only(output: &Output) -> Result<(), Failure> {
    match output.format {
        Some(Format::Csv) => Err(Failure::Usage("this command only writes JSON".to_string())),
        _ => Ok(()),
    }
}

fn run(cmd: &Command) -> Result<Report, Failure> {
    match cmd {
        Command::Hc1Check { cartan, output } => {
            json_only(output)?;
            let rs = RootSystem::from_label(cartan).map_err(|e| Failure::Usage(e.to_string()))?;
            let rep = steinberg::verify_hc1(&rs);
            let summary = if rep.holds {
                format!("OK residual={}", rep.residual)
            } else {
                format!("FAIL residual={}", rep.residual)
            };
            Ok(Report { artifact: to_json(&json!({"type": cartan.to_uppercase(), "report": rep})), summary, passed: rep.holds })
        }
        Command::Theta { p, b, n, s, output } => {
            json_only(output)?;
            let th = orbital::theta_at(*p, *n, *b, *s)?;
            let summary = format!("theta_{p}({b}; {s}) = {} [{}]", th.value, th.torus_class);
            Ok(Report { artifact: to_json(&th), summary, passed: true })
        }
        Command::ThetaHatZero { p, n, s, output } => {
            json_only(output)?;
            let rows = s.iter().map(|&s| orbital::theta_hat_zero(*p, *n, s)).collect::<Result<Vec<_>, _>>()?;
            let want = BigRational::new(1.into(), 1.into()) - BigRational::new(1.into(), (p * p).into());
            let passed = rows.iter().all(|r| r.mass_at_one == want);
            let summary = format!(
                "theta_hat_{p}(0; 1) = {}; max |theta_hat - 1| over s = {:.6e}",
                rational(&rows[0].mass_at_one),
                rows.iter().map(|r| r.max_abs_deviation()).fold(0.0, f64::max)
            );
            Ok(Report { artifact: to_json(&rows), summary, passed })
        }
        Command::TransversalLemma { p, n, output } => {
            json_only(output)?;
            let rep = orbital::verify_transversal_lemma(*p, *n)?;
            let summary = format!(
                "{} p={p} N={n}: {} classes, failures {:?}",
                if rep.passed { "OK" } else { "FAIL" },
                rep.rows.len(),
                rep.failures()
            );
            Ok(Report { artifact: to_json(&rep), summary, passed: rep.passed })
        }
        Command::TorusBreakdown { primes, pmax, n, output } => {
            let primes = if primes.is_empty() { tracelab::primes::odd_primes_up_to(*pmax) } else { primes.clone() };
            let rows = primes.iter().map(|&p| orbital::torus_breakdown(p, *n)).collect::<Result<Vec<_>, _>>()?;
            let passed = rows.iter().all(|r| {
                let p = BigRational::from_integer(r.p.into());
                r.total_mass() == BigRational::new(1.into(), 1.into()) - (&p * &p).recip()
            });
            let artifact = match output.format {
                Some(Format::Json) => to_json(&rows),
                _ => to_csv(&orbital::BreakdownRow::CSV_HEADER, rows.iter().map(|r| r.csv_record())),
            };
            let summary = format!("{} rows at N={n}; masses sum to 1 - p^-2: {passed}", rows.len());
            Ok(Report { artifact, summary, passed })
        }
        Command::BreakdownFit { pmax, n, output } => {
            json_only(output)?;
            let rows = tracelab::primes::odd_primes_up_to(*pmax)
                .into_iter()
                .map(|p| orbital::torus_breakdown(p, *n))
                .collect::<Result<Vec<_>, _>>()?;
            let fit = orbital::fit_breakdown_coefficients(&rows)?;
            let bound = orbital::derivative_balance_bound(&rows);
            let summary = format!(
                "a1+b1={} a2+b2+c2={} a3={} b3={} max|K_s+K_u|*p={}",
                rational(&(&fit.a1 + &fit.b1)),
                rational(&(&fit.a2 + &fit.b2 + &fit.c2)),
                rational(&fit.a3),
                rational(&fit.b3),
                rational(&bound)
            );
            let passed = fit.identities_hold && fit.classes_agree;
            Ok(Report {
                artifact: to_json(&json!({"fit": fit, "balance_bound": rational(&bound)})),
                summary,
                passed,
            })
        }
        Command::DominantProduct { pmax, s, output } => {
            json_only(output)?;
            let rows = s.iter().map(|&s| orbital::dominant_product(*pmax, s)).collect::<Result<Vec<_>, _>>()?;
            let passed = rows.iter().all(|r| r.exact_gap.as_ref().is_none_or(|g| *g == BigRational::from_integer(0.into())));
            let summary = rows
                .iter()
                .map(|r| format!("s={}: gap={:.6e}", r.s, r.gap))
                .collect::<Vec<_>>()
                .join(", ");
            Ok(Report { artifact: to_json(&rows), summary: format!("pmax={pmax} {summary}"), passed })
        }
        Command::Poisson { sp, t, levels, output } => {
            json_only(output)?;
            let sp = TruncationSet::parse(sp)?;
            let mut f = FactoredTestFunction::gaussian(*t);
            for l in levels {
                let (p, k) = l.split_once(':').ok_or_else(|| Failure::Usage(format!("level {l:?} is not p:k")))?;
                let p: u64 = p.trim().parse().map_err(|_| Failure::Usage(format!("bad prime in {l:?}")))?;
                let k: i32 = k.trim().parse().map_err(|_| Failure::Usage(format!("bad exponent in {l:?}")))?;
                f = f.with_level(p, k);
            }
            let rec = adelic::poisson_truncated(&f, &sp)?;
            let summary = format!("{} lhs={:.15} rhs={:.15} gap={:.3e} tail_bound={:.3e}", sp, rec.lhs, rec.rhs, rec.gap, rec.tail_bound);
            Ok(Report { artifact: to_json(&rec), summary, passed: rec.within_bound() })
        }
        Command::GetzDecompose { sp, real, components, random, seed, output } => {
            json_only(output)?;
            let sp = TruncationSet::parse(sp)?;
            if let Some(count) = random {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut verified = 0usize;
                for _ in 0..*count {
                    let (a, spr) = suite::random_adele(&mut rng);
                    let d = adelic::getz_decompose(&a, &spr)?;
                    verified += usize::from(d.verify(&a, &spr)?);
                }
                let passed = verified == *count;
                return Ok(Report {
                    artifact: to_json(&json!({"random": count, "seed": seed, "verified": verified})),
                    summary: format!("{verified}/{count} random decompositions verified"),
                    passed,
                });
            }
            let a = parse_adele(*real, components)?;
            let d = adelic::getz_decompose(&a, &sp)?;
            let verified = d.verify(&a, &sp)?;
            let artifact = to_json(&json!({
                "Sp": sp,
                "a": adele_json(&a),
                "b": rational(&d.b),
                "a_prime": adele_json(&d.a_prime),
                "corrected": d.corrected,
                "verified": verified,
            }));
            Ok(Report { artifact, summary: format!("b = {} verified={verified}", rational(&d.b)), passed: verified })
        }
        Command::FflSerie { q, modulus, max_degree, dmax, output } => {
            let moduli = if modulus.is_empty() {
                ffl::moduli_up_to(*q, *max_degree)
            } else {
                modulus.iter().map(|m| FqPolynomial::parse(*q, m)).collect::<Result<Vec<_>, _>>()?
            };
            let rows = ffl::serie_table(*q, &moduli, *dmax)?;
            let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
            let passed = worst <= suite::FF_TOLERANCE;
            let artifact = match output.format {
                Some(Format::Json) => to_json(&rows),
                _ => to_csv(&ffl::SerieRow::CSV_HEADER, rows.iter().map(|r| r.csv_record())),
            };
            Ok(Report { artifact, summary: format!("q={q}: {} rows, max residual {worst:.3e}", rows.len()), passed })
        }
        Command::FflSympow { q, modulus, character, dmax, output } => {
            json_only(output)?;
            let f = FqPolynomial::parse(*q, modulus)?;
            let chi = DirichletCharacterFF::by_index(&f, *character)?;
            let l = ffl::l_polynomial(&chi)?;
            let rep = ffl::symmetric_power_check(&chi, *dmax)?;
            let summary = format!(
                "{chi}: L-degree {} (expected {}), max Weil defect {:.2e}, sym-power check {}",
                l.degree,
                l.expected_degree,
                l.max_weil_defect,
                if rep.passed { "OK" } else { "FAIL" }
            );
            let passed = rep.passed && l.max_weil_defect <= suite::FF_TOLERANCE;
            Ok(Report { artifact: to_json(&json!({"l_polynomial": l, "symmetric_power": rep})), summary, passed })
        }
        Command::VerifyAll { only, output } => {
            json_only(output)?;
            let ids: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only.clone() };
            let mut criteria = Vec::new();
            for id in ids {
                let c = suite::criterion(id).ok_or_else(|| Failure::Usage(format!("no criterion {id}")))?;
                eprintln!("{}", c.line());
                criteria.push(c);
            }
            let passed = criteria.iter().all(|c| c.passed);
            let n_pass = criteria.iter().filter(|c| c.passed).count();
            let summary = format!("{n_pass}/{} criteria passed", criteria.len());
            Ok(Report { artifact: to_json(&suite::SuiteReport { criteria, passed }), summary, passed })
        }
    }
}

fn parse_adele(real: f64, components: &[String]) -> Result<RationalAdele, Failure> {
    let mut finite = std::collections::BTreeMap::new();
    for c in components {
        let bad = || Failure::Usage(format!("component {c:?} is not p:x or p:x@prec"));
        let (p, rest) = c.split_once(':').ok_or_else(bad)?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let (x, prec) = match rest.split_once('@') {
            Some((x, pr)) => (x, Some(pr.trim().parse::<i64>().map_err(|_| bad())?)),
            None => (rest, None),
        };
        let x: BigRational = x.trim().parse().map_err(|_| bad())?;
        let prec = match prec {
            Some(pr) => pr,
            None => (valuation(&x, p) + 4).max(1),
        };
        let comp = PAdicApprox::from_rational(p, &x, prec).map_err(|e| Failure::Usage(e.to_string()))?;
        finite.insert(p, comp);
    }
    Ok(RationalAdele::new(real, finite)?)
}

fn valuation(x: &BigRational, p: u64) -> i64 {
    if x.numer().is_zero() {
        return 0;
    }
    let pb = BigInt::from(p);
    let count = |mut n: BigInt| {
        let mut k = 0i64;
        while (&n % &pb).is_zero() {
            n /= &pb;
            k += 1;
        }
        k
    };
    count(x.numer().clone()) - count(x.denom().clone())
}

fn adele_json(a: &RationalAdele) -> serde_json::Value {
    let finite: serde_json::Map<String, serde_json::Value> =
        a.finite().iter().map(|(p, x)| (p.to_string(), json!(x.to_string()))).collect();
    json!({"real": a.real(), "finite": finite})
}

fn output_of(cmd: &Command) -> &Output {
    match cmd {
        Command::Hc1Check { output, .. }
        | Command::Theta { output, .. }
        | Command::ThetaHatZero { output, .. }
        | Command::TransversalLemma { output, .. }
        | Command::TorusBreakdown { output, .. }
        | Command::BreakdownFit { output, .. }
        | Command::DominantProduct { output, .. }
        | Command::Poisson { output, .. }
        | Command::GetzDecompose { output, .. }
        | Command::FflSerie { output, .. }
        | Command::FflSympow { output, .. }
        | Command::VerifyAll { output, .. } => output,
    }
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(rep) => {
            if let Some(path) = &output_of(&cli.command).out {
                if let Err(e) = fs::write(path, &rep.artifact) {
                    eprintln!("usage error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{}", rep.artifact);
            }
            eprintln!("{}", rep.summary);
            ExitCode::from(if rep.passed { 0 } else { 1 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Falsified(msg)) => {
            eprintln!("FALSIFIED: {msg}");
            ExitCode::from(1)
        }
    }
}
