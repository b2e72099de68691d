use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use reglat::classify::{
    a_sets, classify_quaternaries, forced_new_check, search_rank5, DeltaTriple, TSet,
};
use reglat::fixtures::{quaternary_families, quinary_families, ternary_candidates, BATCHES, T_VALUES, U_VALUES};
use reglat::global::{psi_with_sieve, regular_verdict_cached, GenusOracle, Psi, RegularityVerdict};
use reglat::padic::LocalRepSet;
use reglat::sieve::SieveCache;
use reglat::transforms::{
    big_lambda, is_redundant, lambda_transform, minimalize, watson_case_for, RedundancyMode,
};
use reglat::verify::{run_suite, DEFAULT_BOUND};
use reglat::{DiagonalLattice, Error};

#[derive(Parser)]
#[command(name = "reglat", version, about = "Regularity checks for diagonal integral quadratic forms")]
struct Cli {
    /// Search bound B for global representations.
    #[arg(long, global = true, default_value_t = DEFAULT_BOUND)]
    bound: u64,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for persisted sieves.
    #[arg(long, global = true, env = "REGLAT_CACHE")]
    cache_dir: Option<PathBuf>,
    /// Worker threads (default: logical CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Local,
    Empirical,
}

#[derive(Subcommand)]
enum Command {
    /// Square classes represented over Z_p.
    LocalSet {
        #[arg(long)]
        lattice: DiagonalLattice,
        #[arg(long)]
        prime: u64,
    },
    /// Least integer up to the bound represented locally but not globally.
    Regular {
        #[arg(long)]
        lattice: DiagonalLattice,
    },
    /// Least member of a set not represented by the lattice.
    ///
    /// Sets: `all`, `genus:<a,b,..>`, `S:d2,d3,d5`, `T:d2,d3,d5,b1,b2`.
    Psi {
        #[arg(long)]
        lattice: DiagonalLattice,
        #[arg(long)]
        set: String,
    },
    /// Watson transformation at a prime.
    Lambda {
        #[arg(long)]
        lattice: DiagonalLattice,
        #[arg(long)]
        prime: u64,
    },
    /// Whether appending <n> leaves the represented set unchanged.
    Redundant {
        #[arg(long)]
        lattice: DiagonalLattice,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value = "local")]
        mode: Mode,
    },
    /// Drop coefficients that do not change the represented set up to the bound.
    Minimalize {
        #[arg(long)]
        lattice: DiagonalLattice,
    },
    /// Reference table N (1-6) as JSON.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
        which: u8,
    },
    /// Classify <b1,b2,b3,a4> for b3 <= a4 <= a4-max, one JSON record per line.
    Classify {
        #[arg(long)]
        ternary: DiagonalLattice,
        #[arg(long)]
        a4_max: u64,
    },
    /// Classify quinary extensions of a quaternary prefix, one JSON record per line.
    Rank5 {
        #[arg(long)]
        prefix: DiagonalLattice,
        #[arg(long)]
        a5_max: u64,
    },
    /// Primes q <= p split by the residue symbol (q/p).
    Asets {
        #[arg(long)]
        prime: u64,
    },
    /// Forced-basis argument for newness.
    Newcheck {
        #[arg(long)]
        lattice: DiagonalLattice,
        #[arg(long, value_delimiter = ',', required = true)]
        probes: Vec<u64>,
    },
    /// Run the reproduction suite.
    VerifyPaper {
        /// Run only these checks (repeatable).
        #[arg(long)]
        only: Vec<String>,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

enum Outcome {
    Ok,
    Negative,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::StabilityNotReached { .. }
        | Error::PrecisionUnstable { .. }
        | Error::PsiUnbounded(_)
        | Error::Cache(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(3);
    }
    match run(&cli, jobs) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn print(cli: &Cli, value: &Value, text: impl FnOnce() -> String) {
    if cli.json {
        println!("{value}");
    } else {
        println!("{}", text());
    }
}

fn parse_psi_set(spec: &str) -> Result<Box<dyn Fn(u64) -> bool + Sync>, Error> {
    let bad = || Error::Parse(format!("psi set {spec:?}"));
    if spec == "all" {
        return Ok(Box::new(|n| n > 0));
    }
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    let nums = || -> Result<Vec<u64>, Error> {
        rest.split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect()
    };
    match kind {
        "genus" => {
            let genus = GenusOracle::new(&rest.parse()?)?;
            Ok(Box::new(move |n| n > 0 && genus.represents(n)))
        }
        "S" => match nums()?.as_slice() {
            &[d2, d3, d5] => {
                let d = DeltaTriple::new(d2, d3, d5)?;
                Ok(Box::new(move |n| d.in_s(n)))
            }
            _ => Err(bad()),
        },
        "T" => match nums()?.as_slice() {
            &[d2, d3, d5, b1, b2] => {
                let t = TSet::new(DeltaTriple::new(d2, d3, d5)?, b1, b2)?;
                Ok(Box::new(move |n| t.contains(n)))
            }
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

fn verdict_text(l: &DiagonalLattice, v: &RegularityVerdict) -> String {
    match v {
        RegularityVerdict::ConfirmedUpTo { bound } => format!("{l}: confirmed up to {bound}"),
        RegularityVerdict::RefutedAt { n, .. } => {
            format!("{l}: refuted, {n} is represented locally but not globally")
        }
    }
}

fn table(which: u8) -> Value {
    match which {
        1 => json!(ternary_candidates()),
        2 => json!(T_VALUES
            .iter()
            .map(|(c, t)| json!({"lattice": c, "t": t}))
            .collect::<Vec<_>>()),
        3 => json!(U_VALUES
            .iter()
            .map(|(c, u)| json!({"lattice": c, "u": u}))
            .collect::<Vec<_>>()),
        4 => json!(quaternary_families()
            .iter()
            .map(|f| json!({
                "ternary": f.ternary,
                "irregular_section": f.irregular_section,
                "a4": f.terms.iter().map(|t| t.text.clone()).collect::<Vec<_>>(),
            }))
            .collect::<Vec<_>>()),
        5 => json!(BATCHES
            .iter()
            .map(|(name, idx)| json!({"batch": name, "indices": idx, "count": idx.len()}))
            .collect::<Vec<_>>()),
        _ => json!(quinary_families()
            .iter()
            .map(|f| json!({
                "ternary": f.ternary,
                "a4": f.a4.text,
                "a5": format!("s*{}", f.a5_unit.text),
                "s": f.multipliers,
            }))
            .collect::<Vec<_>>()),
    }
}

fn run(cli: &Cli, jobs: usize) -> Result<Outcome, Error> {
    let cache = match &cli.cache_dir {
        Some(dir) => SieveCache::with_dir(dir)?,
        None => SieveCache::new(),
    };
    let bound = cli.bound;
    match &cli.command {
        Command::LocalSet { lattice, prime } => {
            let set = LocalRepSet::compute(lattice, *prime)?;
            let j = set.to_json();
            print(cli, &json!(j), || {
                let mut out = format!("{lattice} over Z_{prime}, stable from exponent {}", j.threshold);
                for e in 0..set.threshold() + 2 {
                    out.push_str(&format!("\n  e={e}: units {:?}", set.units_at(e)));
                }
                out
            });
            Ok(Outcome::Ok)
        }
        Command::Regular { lattice } => {
            let v = regular_verdict_cached(lattice, bound, &cache)?;
            print(cli, &json!(v), || verdict_text(lattice, &v));
            Ok(if v.is_confirmed() {
                Outcome::Ok
            } else {
                Outcome::Negative
            })
        }
        Command::Psi { lattice, set } => {
            let f = parse_psi_set(set)?;
            let sieve = cache.get(lattice, bound)?;
            let p = psi_with_sieve(f, &sieve);
            print(cli, &json!(p), || match p {
                Psi::Value(v) => v.to_string(),
                Psi::ExceedsBound(b) => format!("> {b}"),
            });
            Ok(Outcome::Ok)
        }
        Command::Lambda { lattice, prime } => match watson_case_for(lattice, *prime)? {
            None => {
                print(cli, &json!({"case": null}), || {
                    format!("no transformation case applies to {lattice} at {prime}")
                });
                Ok(Outcome::Negative)
            }
            Some(case) => {
                let sub = big_lambda(lattice, case)?;
                let t = lambda_transform(lattice, case)?;
                print(
                    cli,
                    &json!({"case": case.tag.name(), "modulus": case.modulus, "sublattice": sub, "lambda": t}),
                    || format!("{}: Λ_{} = {sub}, λ = {t}", case.tag, case.modulus),
                );
                Ok(Outcome::Ok)
            }
        },
        Command::Redundant { lattice, n, mode } => {
            let mode = match mode {
                Mode::Local => RedundancyMode::Local,
                Mode::Empirical => RedundancyMode::Empirical,
            };
            let r = is_redundant(lattice, *n, bound, mode)?;
            print(cli, &json!({"redundant": r}), || {
                format!("{n} {} redundant to {lattice}", if r { "is" } else { "is not" })
            });
            Ok(if r { Outcome::Ok } else { Outcome::Negative })
        }
        Command::Minimalize { lattice } => {
            let m = minimalize(lattice, bound)?;
            print(cli, &json!(m), || m.to_string());
            Ok(Outcome::Ok)
        }
        Command::Table { which } => {
            println!("{}", table(*which));
            Ok(Outcome::Ok)
        }
        Command::Classify { ternary, a4_max } => {
            for rec in classify_quaternaries(ternary, *a4_max, bound, &cache)? {
                println!("{}", json!(rec));
            }
            Ok(Outcome::Ok)
        }
        Command::Rank5 { prefix, a5_max } => {
            for rec in search_rank5(prefix, *a5_max, bound, &cache)? {
                println!("{}", json!(rec));
            }
            Ok(Outcome::Ok)
        }
        Command::Asets { prime } => {
            let s = a_sets(*prime)?;
            print(cli, &json!(s), || {
                format!(
                    "A+ = {:?}\nA- = {:?}\nA'+ = {:?}\nA'- = {:?}",
                    s.plus, s.minus, s.plus_odd, s.minus_odd
                )
            });
            Ok(Outcome::Ok)
        }
        Command::Newcheck { lattice, probes } => {
            let ok = forced_new_check(lattice, probes)?;
            print(cli, &json!({"forced": ok}), || {
                format!("{lattice}: basis {}forced by {probes:?}", if ok { "" } else { "not " })
            });
            Ok(if ok { Outcome::Ok } else { Outcome::Negative })
        }
        Command::VerifyPaper { only, report } => {
            let r = run_suite(only, jobs, bound, &cache)?;
            let value = json!(r);
            if let Some(path) = report {
                let text = serde_json::to_string_pretty(&value).expect("report serializes");
                std::fs::write(path, text)
                    .map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
            }
            print(cli, &value, || {
                let mut out = String::new();
                for c in &r.checks {
                    out.push_str(&format!(
                        "{:>2} {:<24} {} ({:.2} s)\n",
                        c.id,
                        c.name,
                        if c.repro.is_none() { "PASS" } else { "FAIL" },
                        c.runtime_secs
                    ));
                    if let Some(cmd) = &c.repro {
                        out.push_str(&format!(
                            "   expected: {}\n   actual:   {}\n   repro:    {cmd}\n",
                            c.expected, c.actual
                        ));
                    }
                }
                out.push_str(&format!("{} passed, {} failed", r.passed, r.failed));
                out
            });
            Ok(if r.all_passed() {
                Outcome::Ok
            } else {
                Outcome::Negative
            })
        }
    }
}
