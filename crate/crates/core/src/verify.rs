//! Reproduction checks for the published numerical claims, run as a suite.
//!
//! Every check pins its own bound and tolerance; the suite bound is used only
//! by checks whose claim is stated for an unspecified bound.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{primes_up_to, split_valuation};
use crate::classify::{a_sets, build_table1, forced_new_check, s_values, search_rank5, DeltaTriple};
use crate::error::{Error, Result};
use crate::fixtures::{quaternary_families, ternary_candidates, Mark, T_VALUES, U_VALUES};
use crate::global::{t_value, u_value, vectors_with_norm, verdict_from, GenusOracle, Psi};
use crate::lattice::DiagonalLattice;
use crate::padic::LocalRepSet;
use crate::sieve::{CacheStats, RepSieve, SieveCache};
use crate::transforms::{
    is_redundant, lambda_transform, watson_case_for, RedundancyMode, WatsonCase,
};

pub const DEFAULT_BOUND: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub status: Status,
    pub expected: String,
    pub actual: String,
    pub runtime_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repro: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub version: &'static str,
    pub bound: u64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckResult>,
    pub cache: CacheStats,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

struct Outcome {
    pass: bool,
    expected: String,
    actual: String,
}

impl Outcome {
    fn compare<T: std::fmt::Debug + PartialEq>(expected: T, actual: T) -> Self {
        Self {
            pass: expected == actual,
            expected: format!("{expected:?}"),
            actual: format!("{actual:?}"),
        }
    }
}

struct Ctx<'a> {
    cache: &'a SieveCache,
    bound: u64,
}

type CheckFn = fn(&Ctx) -> Result<Outcome>;

const CHECKS: [(&str, CheckFn); 15] = [
    ("t-values", check_t_values),
    ("u-values", check_u_values),
    ("ternary-candidates", check_ternary_candidates),
    ("s-sequence", check_s_sequence),
    ("redundancy-example", check_redundancy_example),
    ("quaternary-soundness", check_quaternary_soundness),
    ("quaternary-completeness", check_quaternary_completeness),
    ("h-refutations", check_h_refutations),
    ("complement-236", check_complement_236),
    ("genus-236", check_genus_236),
    ("quinary-slice", check_quinary_slice),
    ("forced-basis", check_forced_basis),
    ("prime-sets", check_prime_sets),
    ("local-global-property", check_local_global_property),
    ("watson-property", check_watson_property),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Runs the selected checks (all when `only` is empty) on a pool of `jobs`
/// workers; results keep suite order.
pub fn run_suite(
    only: &[String],
    jobs: usize,
    bound: u64,
    cache: &SieveCache,
) -> Result<VerificationReport> {
    for name in only {
        if !CHECKS.iter().any(|c| c.0 == name) {
            return Err(Error::Parse(format!(
                "unknown check '{name}', expected one of: {}",
                check_names().join(", ")
            )));
        }
    }
    let selected: Vec<(usize, &(&str, CheckFn))> = CHECKS
        .iter()
        .enumerate()
        .filter(|(_, c)| only.is_empty() || only.iter().any(|o| o == c.0))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Parse(format!("thread pool: {e}")))?;
    let ctx = Ctx { cache, bound };
    let checks: Vec<CheckResult> = pool.install(|| {
        selected
            .par_iter()
            .map(|&(i, &(name, f))| run_one(i + 1, name, f, &ctx, bound))
            .collect()
    });
    let passed = checks.iter().filter(|c| c.status == Status::Pass).count();
    Ok(VerificationReport {
        version: env!("CARGO_PKG_VERSION"),
        bound,
        passed,
        failed: checks.len() - passed,
        checks,
        cache: cache.stats(),
    })
}

fn run_one(id: usize, name: &'static str, f: CheckFn, ctx: &Ctx, bound: u64) -> CheckResult {
    let start = Instant::now();
    let outcome = f(ctx).unwrap_or_else(|e| Outcome {
        pass: false,
        expected: "no error".into(),
        actual: format!("error: {e}"),
    });
    let status = if outcome.pass {
        Status::Pass
    } else {
        Status::Fail
    };
    CheckResult {
        id,
        name,
        status,
        expected: outcome.expected,
        actual: outcome.actual,
        runtime_secs: start.elapsed().as_secs_f64(),
        repro: (status == Status::Fail)
            .then(|| format!("reglat --bound {bound} verify-paper --only {name}")),
    }
}

fn lat(c: &[u64]) -> Result<DiagonalLattice> {
    DiagonalLattice::new(c.iter().copied())
}

fn verdict(l: &DiagonalLattice, bound: u64, cache: &SieveCache) -> Result<crate::global::RegularityVerdict> {
    let genus = GenusOracle::new(l)?;
    let sieve = cache.get_uncached(l, bound)?;
    verdict_from(&genus, &sieve)
}

fn timed<T>(limit_secs: f64, f: impl FnOnce() -> Result<T>) -> Result<(T, f64, bool)> {
    let start = Instant::now();
    let v = f()?;
    let secs = start.elapsed().as_secs_f64();
    Ok((v, secs, secs < limit_secs))
}

fn check_t_values(_: &Ctx) -> Result<Outcome> {
    let (got, secs, fast) = timed(10.0, || {
        T_VALUES
            .iter()
            .map(|(c, _)| Ok(t_value(&lat(c)?, 10_000)?.value()))
            .collect::<Result<Vec<_>>>()
    })?;
    let want: Vec<Option<u64>> = T_VALUES.iter().map(|t| Some(t.1)).collect();
    Ok(Outcome {
        pass: got == want && fast,
        expected: format!("{want:?} in < 10 s"),
        actual: format!("{got:?} in {secs:.2} s"),
    })
}

fn check_u_values(_: &Ctx) -> Result<Outcome> {
    let (got, secs, fast) = timed(5.0, || {
        U_VALUES
            .iter()
            .map(|(c, _)| Ok(u_value(&lat(c)?, 10_000)?.value()))
            .collect::<Result<Vec<_>>>()
    })?;
    let want: Vec<Option<u64>> = U_VALUES.iter().map(|t| Some(t.1)).collect();
    Ok(Outcome {
        pass: got == want && fast,
        expected: format!("{want:?} in < 5 s"),
        actual: format!("{got:?} in {secs:.2} s"),
    })
}

fn check_ternary_candidates(ctx: &Ctx) -> Result<Outcome> {
    let rows = ternary_candidates();
    let got: Vec<[u64; 3]> = build_table1(ctx.cache)?.iter().map(|c| c.coeffs).collect();
    let want: Vec<[u64; 3]> = rows.iter().map(|r| r.coeffs).collect();
    // marks recomputed: irregular rows, and rows whose local set at 7 is proper
    let marks = rows
        .par_iter()
        .map(|r| {
            let j = lat(&r.coeffs)?;
            let irregular = t_value(&j, 10_000)?.value().is_some();
            let short_at_7 = j.bad_primes().contains(&7) && u_value(&j, 10_000)?.value().is_some();
            Ok(match (irregular, short_at_7) {
                (true, _) => Mark::Dagger,
                (false, true) => Mark::DoubleDagger,
                _ => Mark::None,
            })
        })
        .collect::<Result<Vec<Mark>>>()?;
    let marked = |m: &[Mark], k: Mark| -> Vec<usize> {
        m.iter()
            .enumerate()
            .filter(|(_, x)| **x == k)
            .map(|(i, _)| i + 1)
            .collect()
    };
    let want_marks: Vec<Mark> = rows.iter().map(|r| r.mark).collect();
    let pass = got == want && marks == want_marks;
    Ok(Outcome {
        pass,
        expected: format!(
            "103 rows equal to the fixture; irregular at {:?}; proper at 7 at {:?}",
            marked(&want_marks, Mark::Dagger),
            marked(&want_marks, Mark::DoubleDagger)
        ),
        actual: format!(
            "{} rows, equal: {}; irregular at {:?}; proper at 7 at {:?}",
            got.len(),
            got == want,
            marked(&marks, Mark::Dagger),
            marked(&marks, Mark::DoubleDagger)
        ),
    })
}

fn check_s_sequence(_: &Ctx) -> Result<Outcome> {
    Ok(Outcome::compare(
        vec![1, 49, 121, 169, 241, 289],
        s_values(DeltaTriple::new(1, 1, 1)?, 6),
    ))
}

/// Printed description of `Q(L_p)` for `<1,48,144,2^4 3^(2r)>`.
fn example_local_member(p: u64, r: u32, n: u64) -> bool {
    let (e, u) = split_valuation(p, n);
    match p {
        2 => (e == 0 && u % 8 == 1) || (e == 2 && (u % 8 == 1 || u % 8 == 5)) || e >= 4,
        3 => {
            let nonresidue = u % 3 == 2;
            let excluded = nonresidue && (e == 0 || (e % 2 == 1 && e < 2 * r));
            !excluded
        }
        _ => true,
    }
}

fn check_redundancy_example(ctx: &Ctx) -> Result<Outcome> {
    let mut bad = Vec::new();
    for r in [1u32, 2] {
        let step = 16 * 9u64.pow(r);
        let l = lat(&[1, 48, 144, step])?;
        for p in [2, 3] {
            let set = LocalRepSet::compute(&l, p)?;
            if let Some(n) = (1..=20_000).find(|&n| set.contains(n) != example_local_member(p, r, n)) {
                bad.push(format!("r={r} p={p} differs at {n}"));
            }
        }
        let sieve = RepSieve::build(&l, ctx.bound)?;
        for n in 1..=2000u64 {
            let want = n % step == 0;
            let local = is_redundant(&l, n, ctx.bound, RedundancyMode::Local)?;
            // same as RedundancyMode::Empirical, with the sieve built once
            let empirical = sieve.extension_is_redundant(n);
            if local != want || empirical != want {
                bad.push(format!("r={r} n={n}: local {local}, empirical {empirical}"));
                break;
            }
        }
    }
    Ok(Outcome {
        pass: bad.is_empty(),
        expected: "local sets match the printed unions; n redundant iff 2^4 3^(2r) | n".into(),
        actual: if bad.is_empty() {
            "all agree".into()
        } else {
            bad.join("; ")
        },
    })
}

fn check_quaternary_soundness(ctx: &Ctx) -> Result<Outcome> {
    let lattices: Vec<DiagonalLattice> = quaternary_families()
        .iter()
        .flat_map(|f| f.instantiate(&[1, 2]))
        .collect();
    let refuted: Vec<String> = lattices
        .par_iter()
        .map(|l| Ok((l, verdict(l, 200_000, ctx.cache)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, v)| !v.is_confirmed())
        .map(|(l, v)| format!("{l} at {:?}", v.refuted_at()))
        .collect();
    Ok(Outcome {
        pass: refuted.is_empty(),
        expected: format!("{} lattices confirmed up to 200000", lattices.len()),
        actual: if refuted.is_empty() {
            format!("{} confirmed", lattices.len())
        } else {
            format!("refuted: {}", refuted.join(", "))
        },
    })
}

fn check_quaternary_completeness(ctx: &Ctx) -> Result<Outcome> {
    const A4_MAX: u64 = 100;
    const BOUND: u64 = 200_000;
    let mut got = BTreeSet::new();
    let mut not_minimal = Vec::new();
    for row in ternary_candidates() {
        if row.coeffs[2] > A4_MAX {
            continue;
        }
        let j = lat(&row.coeffs)?;
        for rec in crate::classify::classify_quaternaries(&j, A4_MAX, BOUND, ctx.cache)? {
            if rec.verdict.is_confirmed() {
                if !rec.minimal {
                    not_minimal.push(rec.lattice.to_string());
                }
                got.insert(rec.lattice.coeffs().to_vec());
            }
        }
    }
    let mut want = BTreeSet::new();
    for f in quaternary_families() {
        for a4 in f.a4_values(A4_MAX) {
            let mut v = f.ternary.to_vec();
            v.push(a4);
            want.insert(v);
        }
    }
    let extra: Vec<_> = got.difference(&want).collect();
    let missing: Vec<_> = want.difference(&got).collect();
    Ok(Outcome {
        pass: extra.is_empty() && missing.is_empty() && not_minimal.is_empty(),
        expected: format!("{} confirmed, all minimal", want.len()),
        actual: format!(
            "{} confirmed; extra {extra:?}; missing {missing:?}; not minimal {not_minimal:?}",
            got.len()
        ),
    })
}

fn check_h_refutations(ctx: &Ctx) -> Result<Outcome> {
    let mut got = Vec::new();
    for r in 1..=3u32 {
        let l = lat(&[2, 3, 9, 2u64.pow(r + 1) * 9])?;
        let v = verdict(&l, ctx.bound, ctx.cache)?;
        got.push(v.refuted_at().filter(|_| v.verify_witness(&l)));
    }
    let limits = [26, 26, 104];
    let pass = got
        .iter()
        .zip(limits)
        .all(|(n, lim)| matches!(n, Some(n) if *n <= lim));
    Ok(Outcome {
        pass,
        expected: "refuted with checked witnesses at n <= 26, 26, 104".into(),
        actual: format!("{got:?}"),
    })
}

fn check_complement_236(ctx: &Ctx) -> Result<Outcome> {
    let b = ctx.bound;
    let sieve = RepSieve::build(&lat(&[2, 3, 6])?, b)?;
    let got: Vec<u64> = sieve.missing().filter(|&n| n > 0).collect();
    let mut want = BTreeSet::new();
    want.extend((0..).map(|v| 3 * v + 1).take_while(|&n| n <= b));
    let mut four = 1u64;
    while 7 * four <= b {
        want.extend((0..).map(|u| four * (8 * u + 7)).take_while(|&n| n <= b));
        four *= 4;
    }
    let want: Vec<u64> = want.into_iter().collect();
    Ok(Outcome {
        pass: got == want,
        expected: format!("{} non-represented integers in [1, {b}]", want.len()),
        actual: format!(
            "{} non-represented, first difference {:?}",
            got.len(),
            got.iter().zip(&want).find(|(a, b)| a != b)
        ),
    })
}

fn check_genus_236(ctx: &Ctx) -> Result<Outcome> {
    let l = lat(&[2, 3, 6])?;
    let genus = GenusOracle::new(&l)?;
    let sieve = RepSieve::build(&l, ctx.bound)?;
    let first = (0..=ctx.bound).find(|&n| genus.represents(n) != sieve.contains(n));
    Ok(Outcome::compare(None, first))
}

fn check_quinary_slice(ctx: &Ctx) -> Result<Outcome> {
    let mut got = Vec::new();
    for (prefix, max) in [([1u64, 2, 5, 5], 15u64), ([1, 5, 10, 25], 75)] {
        let recs = search_rank5(&lat(&prefix)?, max, ctx.bound, ctx.cache)?;
        got.push(
            recs.iter()
                .filter(|r| r.verdict.is_confirmed() && r.minimal)
                .map(|r| r.lattice.coeffs()[4])
                .collect::<Vec<_>>(),
        );
    }
    let a = RepSieve::build(&lat(&[1, 2, 5, 10])?, ctx.bound)?;
    let b = RepSieve::build(&lat(&[1, 2, 5, 5, 5])?, ctx.bound)?;
    let want = vec![vec![5, 11, 12, 13, 14, 15], vec![25, 55, 60, 65, 70, 75]];
    let same = a.same_set(&b);
    Ok(Outcome {
        pass: got == want && same,
        expected: format!("minimal at {want:?}; <1,2,5,10> and <1,2,5,5,5> agree"),
        actual: format!("minimal at {got:?}; agree: {same}"),
    })
}

fn check_forced_basis(_: &Ctx) -> Result<Outcome> {
    let l = lat(&[1, 2, 5, 5, 11])?;
    let counts: Vec<usize> = [1, 2, 5, 10]
        .iter()
        .map(|&n| vectors_with_norm(&l, n).len())
        .collect();
    let forced = forced_new_check(&l, &[1, 2, 5, 10, 15])?;
    Ok(Outcome::compare((true, vec![2, 2, 4, 4]), (forced, counts)))
}

fn check_prime_sets(_: &Ctx) -> Result<Outcome> {
    let odd: Vec<u64> = primes_up_to(83).into_iter().filter(|&p| p > 2).collect();
    let mut small_minus = Vec::new();
    let mut empty_plus = Vec::new();
    for &p in &odd {
        let s = a_sets(p)?;
        if s.minus_odd.len() <= 1 {
            small_minus.push(p);
        }
        if s.plus_odd.is_empty() {
            empty_plus.push(p);
        }
    }
    Ok(Outcome::compare(
        (vec![3, 5, 11], vec![3, 5, 7], vec![7]),
        (small_minus, empty_plus, a_sets(11)?.minus_odd),
    ))
}

/// Fixed-seed sample of primitive diagonal lattices, ranks 3..=5, entries <= 30.
pub fn random_sample(seed: u64, count: usize) -> Vec<DiagonalLattice> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let rank = rng.random_range(3..=5);
        let mut c: Vec<u64> = (0..rank).map(|_| rng.random_range(1..=30)).collect();
        c.sort_unstable();
        let l = DiagonalLattice::new(c).expect("positive entries");
        if l.is_primitive() {
            out.push(l);
        }
    }
    out
}

fn check_local_global_property(_: &Ctx) -> Result<Outcome> {
    let primes = primes_up_to(50);
    let violations: Vec<String> = random_sample(0x5eed, 50)
        .par_iter()
        .map(|l| {
            let sieve = RepSieve::build(l, 300)?;
            let sets = primes
                .iter()
                .map(|&p| LocalRepSet::compute(l, p))
                .collect::<Result<Vec<_>>>()?;
            Ok((1..=300)
                .filter(|&n| sieve.contains(n))
                .flat_map(|n| {
                    sets.iter()
                        .filter(move |s| !s.contains(n))
                        .map(move |s| format!("{l} n={n} p={}", s.p()))
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(Outcome {
        pass: violations.is_empty(),
        expected: "0 violations over 50 lattices".into(),
        actual: format!("{} violations {:?}", violations.len(), violations.iter().take(5).collect::<Vec<_>>()),
    })
}

/// First ten fixture lattices (index 1) admitting a transformation, with the
/// smallest prime that admits one.
pub fn watson_sample() -> Result<Vec<(DiagonalLattice, WatsonCase)>> {
    let mut out = Vec::new();
    for f in quaternary_families() {
        for l in f.instantiate(&[1]) {
            if out.len() == 10 {
                return Ok(out);
            }
            for p in l.bad_primes() {
                if let Some(case) = watson_case_for(&l, p)? {
                    out.push((l.clone(), case));
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn check_watson_property(ctx: &Ctx) -> Result<Outcome> {
    let sample = watson_sample()?;
    let mut bad = Vec::new();
    for (l, case) in &sample {
        let t = lambda_transform(l, *case)?;
        let ok = t.is_primitive()
            && t.rank() == l.rank()
            && verdict(&t, ctx.bound, ctx.cache)?.is_confirmed();
        if !ok {
            bad.push(format!("{l} -> {t} ({})", case.tag));
        }
    }
    let base = lat(&[1, 1, 1, 4])?;
    let four = match watson_case_for(&base, 2)? {
        Some(c) if c.modulus == 4 => Some(lambda_transform(&base, c)?.to_string()),
        _ => None,
    };
    Ok(Outcome {
        pass: sample.len() == 10 && bad.is_empty() && four.as_deref() == Some("<1,1,1,1>"),
        expected: "10 transforms primitive, rank-preserving, confirmed; <1,1,1,4> -> <1,1,1,1>".into(),
        actual: format!(
            "{} sampled, failures {bad:?}; <1,1,1,4> -> {}",
            sample.len(),
            four.unwrap_or_else(|| "no modulus-4 case".into())
        ),
    })
}

/// `t` or `u` value as a display string.
pub fn psi_text(p: Psi) -> String {
    match p {
        Psi::Value(v) => v.to_string(),
        Psi::ExceedsBound(b) => format!("> {b}"),
    }
}
