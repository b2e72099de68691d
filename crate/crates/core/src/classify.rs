//! Enumeration of ternary section candidates and the quaternary/quinary
//! searches built on top of them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, legendre, primes_up_to};
use crate::error::{Error, Result};
use crate::fixtures::{quaternary_families, quinary_families};
use crate::global::{psi_up_to, vectors_with_norm, verdict_from, GenusOracle, RegularityVerdict};
use crate::lattice::DiagonalLattice;
use crate::padic::LocalRepSet;
use crate::sieve::{RepSieve, SieveCache};
use crate::transforms::is_minimal_with;

/// Cap on every `ψ` computed while enumerating candidates.
pub const PSI_SAFEGUARD: u64 = 1_000_000;

/// A member of `{1,3,5,7} × {1,2} × {1,2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeltaTriple {
    d2: u64,
    d3: u64,
    d5: u64,
}

impl DeltaTriple {
    pub fn new(d2: u64, d3: u64, d5: u64) -> Result<Self> {
        if ![1, 3, 5, 7].contains(&d2) || ![1, 2].contains(&d3) || ![1, 2].contains(&d5) {
            return Err(Error::Parse(format!("invalid delta triple ({d2},{d3},{d5})")));
        }
        Ok(Self { d2, d3, d5 })
    }

    /// All 16 triples in lexicographic order.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(16);
        for d2 in [1, 3, 5, 7] {
            for d3 in [1, 2] {
                for d5 in [1, 2] {
                    out.push(Self { d2, d3, d5 });
                }
            }
        }
        out
    }

    pub fn d2(self) -> u64 {
        self.d2
    }

    pub fn d3(self) -> u64 {
        self.d3
    }

    pub fn d5(self) -> u64 {
        self.d5
    }

    /// `δ_q` for `q ∈ {2, 3, 5}`.
    pub fn at(self, q: u64) -> u64 {
        match q {
            2 => self.d2,
            3 => self.d3,
            5 => self.d5,
            _ => panic!("delta is only defined at 2, 3, 5"),
        }
    }

    /// Membership in `S(δ)`.
    pub fn in_s(self, n: u64) -> bool {
        let r5 = n % 5;
        n % 8 == self.d2 && n % 3 == self.d3 && (r5 == self.d5 || r5 == 5 - self.d5)
    }
}

impl fmt::Display for DeltaTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.d2, self.d3, self.d5)
    }
}

/// First `count` members of `S(δ)`.
pub fn s_values(delta: DeltaTriple, count: usize) -> Vec<u64> {
    (1..).filter(|&n| delta.in_s(n)).take(count).collect()
}

pub fn build_u1(delta: DeltaTriple) -> Vec<u64> {
    (1..=s_values(delta, 1)[0]).collect()
}

pub fn build_u2(delta: DeltaTriple, cache: &SieveCache) -> Result<Vec<(u64, u64)>> {
    let mut out = Vec::new();
    for b1 in build_u1(delta) {
        let k = DiagonalLattice::new([b1])?;
        let top = psi_up_to(|n| delta.in_s(n), &k, PSI_SAFEGUARD, cache)?;
        out.extend((b1..=top).map(|b2| (b1, b2)));
    }
    Ok(out)
}

/// Whether `δ_q` avoids the square classes of both `b1` and `b2` at `q`.
fn t_guard(delta: DeltaTriple, b1: u64, b2: u64, q: u64) -> bool {
    let d = delta.at(q);
    [b1, b2].iter().all(|&b| {
        if q == 2 {
            b % 2 == 0 || b % 8 != d
        } else {
            b % q == 0 || legendre(d as i64, q) != legendre(b as i64, q)
        }
    })
}

/// The lattice whose `q`-adic representations define `T(δ, b1, b2, q)`.
fn t_lattice(delta: DeltaTriple, b1: u64, b2: u64, q: u64) -> Result<DiagonalLattice> {
    if t_guard(delta, b1, b2, q) {
        DiagonalLattice::new([b1, b2, delta.at(q)])
    } else {
        DiagonalLattice::new([b1, b2])
    }
}

/// `T(δ, b1, b2)` as local sets at 2, 3 and 5.
#[derive(Debug, Clone)]
pub struct TSet {
    sets: Vec<LocalRepSet>,
}

impl TSet {
    pub fn new(delta: DeltaTriple, b1: u64, b2: u64) -> Result<Self> {
        let sets = [2, 3, 5]
            .iter()
            .map(|&q| LocalRepSet::compute(&t_lattice(delta, b1, b2, q)?, q))
            .collect::<Result<_>>()?;
        Ok(Self { sets })
    }

    pub fn contains(&self, n: u64) -> bool {
        n > 0 && self.sets.iter().all(|s| s.contains(n))
    }
}

pub fn t_membership(delta: DeltaTriple, b1: u64, b2: u64, q: u64, n: u64) -> Result<bool> {
    if ![2, 3, 5].contains(&q) {
        return Err(Error::NotPrime(q));
    }
    Ok(n > 0 && LocalRepSet::compute(&t_lattice(delta, b1, b2, q)?, q)?.contains(n))
}

/// A coefficient triple together with every `δ` that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TernaryCandidate {
    pub coeffs: [u64; 3],
    pub sources: Vec<DeltaTriple>,
}

impl TernaryCandidate {
    pub fn lattice(&self) -> DiagonalLattice {
        DiagonalLattice::new(self.coeffs).expect("positive coefficients")
    }
}

pub fn build_u3(delta: DeltaTriple, cache: &SieveCache) -> Result<Vec<[u64; 3]>> {
    let pairs = build_u2(delta, cache)?;
    let per_pair = pairs
        .par_iter()
        .map(|&(b1, b2)| -> Result<Vec<[u64; 3]>> {
            let t = TSet::new(delta, b1, b2)?;
            let k = DiagonalLattice::new([b1, b2])?;
            let top = psi_up_to(|n| t.contains(n), &k, PSI_SAFEGUARD, cache)?;
            Ok((b2..=top).map(|b3| [b1, b2, b3]).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_pair.into_iter().flatten().collect())
}

/// Union of `U3(δ)` over all 16 triples, before qualification.
pub fn build_u3_union(cache: &SieveCache) -> Result<BTreeMap<[u64; 3], Vec<DeltaTriple>>> {
    let mut map: BTreeMap<[u64; 3], Vec<DeltaTriple>> = BTreeMap::new();
    for delta in DeltaTriple::all() {
        for t in build_u3(delta, cache)? {
            map.entry(t).or_default().push(delta);
        }
    }
    Ok(map)
}

/// Whether `<b1,b2,b3>` can be the leading section of a regular lattice of
/// higher rank: it is primitive, every `n < b3` represented by its genus is
/// represented by it, and for each prime `p > 5` of the discriminant no
/// `n < b3` is rejected at `p` while accepted at every other prime.
///
/// Any such `n` would force a fourth coefficient `<= n < b3`.
pub fn qualifies_as_section(ternary: &DiagonalLattice) -> Result<bool> {
    if !ternary.is_primitive() {
        return Ok(false);
    }
    let b3 = *ternary.coeffs().last().ok_or(Error::EmptyLattice)?;
    let genus = GenusOracle::new(ternary)?;
    let sieve = RepSieve::build(ternary, b3)?;
    if sieve.missing().any(|n| n > 0 && n < b3 && genus.represents(n)) {
        return Ok(false);
    }
    let sets = genus.local_sets();
    for (i, at_p) in sets.iter().enumerate() {
        if at_p.p() <= 5 {
            continue;
        }
        let escapes = (1..b3).any(|n| {
            !at_p.contains(n)
                && sets
                    .iter()
                    .enumerate()
                    .all(|(j, s)| j == i || s.contains(n))
        });
        if escapes {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Qualified members of the `U3` union, sorted lexicographically.
pub fn build_table1(cache: &SieveCache) -> Result<Vec<TernaryCandidate>> {
    let union: Vec<([u64; 3], Vec<DeltaTriple>)> = build_u3_union(cache)?.into_iter().collect();
    let keep = union
        .par_iter()
        .map(|(c, _)| qualifies_as_section(&DiagonalLattice::new(*c)?))
        .collect::<Result<Vec<bool>>>()?;
    Ok(union
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|((coeffs, sources), _)| TernaryCandidate { coeffs, sources })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub lattice: DiagonalLattice,
    pub verdict: RegularityVerdict,
    /// Only evaluated for confirmed lattices; `false` otherwise.
    pub minimal: bool,
    pub notes: Vec<String>,
}

fn family_note(lattice: &DiagonalLattice) -> Option<String> {
    let c = lattice.coeffs();
    match c.len() {
        4 => quaternary_families().into_iter().find_map(|f| {
            if f.ternary != c[..3] {
                return None;
            }
            let head = format!("quaternary family <{},{},{}>", c[0], c[1], c[2]);
            f.match_a4(c[3]).map(|(term, idx)| match idx {
                Some(i) => format!("{head}: a4 = {term}, index {i}"),
                None => format!("{head}: a4 = {term}"),
            })
        }),
        5 => quinary_families().into_iter().find_map(|f| {
            (1..8).find_map(|t| {
                f.instantiate(t)
                    .iter()
                    .zip(&f.multipliers)
                    .find(|(l, _)| l == &lattice)
                    .map(|(_, s)| {
                        format!(
                            "quinary family <{},{},{},{},s*{}>: index {t}, s = {s}",
                            f.ternary[0], f.ternary[1], f.ternary[2], f.a4, f.a5_unit
                        )
                    })
            })
        }),
        _ => None,
    }
}

/// Verdict at `bound`, minimality for confirmed lattices, and any family match.
pub fn classify_lattice(
    lattice: &DiagonalLattice,
    bound: u64,
    cache: &SieveCache,
) -> Result<ClassificationRecord> {
    let genus = GenusOracle::new(lattice)?;
    let sieve = cache.get_uncached(lattice, bound)?;
    let verdict = verdict_from(&genus, &sieve)?;
    let minimal = verdict.is_confirmed() && is_minimal_with(lattice, bound, cache)?;
    Ok(ClassificationRecord {
        lattice: lattice.clone(),
        verdict,
        minimal,
        notes: family_note(lattice).into_iter().collect(),
    })
}

fn classify_extensions(
    prefix: &DiagonalLattice,
    max: u64,
    bound: u64,
    cache: &SieveCache,
) -> Result<Vec<ClassificationRecord>> {
    let last = *prefix.coeffs().last().ok_or(Error::EmptyLattice)?;
    // warm the shared prefix before fanning out
    cache.get(prefix, bound)?;
    (last..=max)
        .into_par_iter()
        .filter_map(|a| {
            let l = match prefix.insert(a) {
                Ok(l) => l,
                Err(e) => return Some(Err(e)),
            };
            l.is_primitive().then(|| classify_lattice(&l, bound, cache))
        })
        .collect()
}

/// Records for `<b1,b2,b3,a4>`, `b3 <= a4 <= a4_max`, primitive only.
pub fn classify_quaternaries(
    ternary: &DiagonalLattice,
    a4_max: u64,
    bound: u64,
    cache: &SieveCache,
) -> Result<Vec<ClassificationRecord>> {
    if ternary.rank() != 3 {
        return Err(Error::RankTooSmall {
            rank: ternary.rank(),
            needed: 3,
        });
    }
    classify_extensions(ternary, a4_max, bound, cache)
}

/// Records for `prefix ⊥ <a5>`, `a4 <= a5 <= a5_max`, primitive only.
pub fn search_rank5(
    prefix: &DiagonalLattice,
    a5_max: u64,
    bound: u64,
    cache: &SieveCache,
) -> Result<Vec<ClassificationRecord>> {
    if prefix.rank() != 4 {
        return Err(Error::RankTooSmall {
            rank: prefix.rank(),
            needed: 4,
        });
    }
    classify_extensions(prefix, a5_max, bound, cache)
}

/// Primes `q <= p` split by the residue symbol `(q/p)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ASets {
    pub plus: Vec<u64>,
    pub minus: Vec<u64>,
    /// `plus` without 2.
    pub plus_odd: Vec<u64>,
    /// `minus` without 2.
    pub minus_odd: Vec<u64>,
}

pub fn a_sets(p: u64) -> Result<ASets> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let (mut plus, mut minus) = (Vec::new(), Vec::new());
    for q in primes_up_to(p) {
        match legendre(q as i64, p) {
            1 => plus.push(q),
            -1 => minus.push(q),
            _ => {}
        }
    }
    let odd = |v: &[u64]| v.iter().copied().filter(|&q| q != 2).collect();
    Ok(ASets {
        plus_odd: odd(&plus),
        minus_odd: odd(&minus),
        plus,
        minus,
    })
}

/// Whether the probes force every basis vector of `lattice` in turn: after
/// each probe, every vector of that norm must have exactly one coordinate
/// outside the forced set, equal to `±1`, and all such coordinates must sit on
/// equal coefficients (so one of them may be chosen).
pub fn forced_new_check(lattice: &DiagonalLattice, probes: &[u64]) -> Result<bool> {
    let coeffs = lattice.coeffs();
    let mut forced = BTreeSet::new();
    for &n in probes {
        let vectors = vectors_with_norm(lattice, n);
        if vectors.is_empty() {
            return Err(Error::ProbeNotRepresented(n));
        }
        let mut fresh = BTreeSet::new();
        let ok = vectors.iter().all(|v| {
            let outside: Vec<usize> = (0..v.len())
                .filter(|i| v[*i] != 0 && !forced.contains(i))
                .collect();
            match outside.as_slice() {
                [i] if v[*i].abs() == 1 => {
                    fresh.insert(*i);
                    true
                }
                _ => false,
            }
        });
        if !ok {
            continue;
        }
        let mut it = fresh.iter().map(|&i| coeffs[i]);
        let first = it.next();
        if first.is_some() && it.all(|c| Some(c) == first) {
            forced.insert(*fresh.iter().next().expect("non-empty"));
        }
    }
    Ok(forced.len() == coeffs.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(c: &[u64]) -> DiagonalLattice {
        DiagonalLattice::new(c.iter().copied()).unwrap()
    }

    #[test]
    fn s_sequence() {
        let d = DeltaTriple::new(1, 1, 1).unwrap();
        assert_eq!(s_values(d, 6), vec![1, 49, 121, 169, 241, 289]);
        for d in DeltaTriple::all() {
            assert!(s_values(d, 5).iter().all(|n| n % 8 == d.d2()));
        }
        assert_eq!(DeltaTriple::all().len(), 16);
        assert!(DeltaTriple::new(2, 1, 1).is_err());
    }

    #[test]
    fn u2_for_trivial_delta() {
        let d = DeltaTriple::new(1, 1, 1).unwrap();
        assert_eq!(build_u1(d), vec![1]);
        let u2 = build_u2(d, &SieveCache::new()).unwrap();
        assert_eq!(u2.first(), Some(&(1, 1)));
        assert_eq!(u2.last(), Some(&(1, 241)));
        assert_eq!(u2.len(), 241);
    }

    #[test]
    fn t_guard_logic() {
        let d = DeltaTriple::new(1, 1, 1).unwrap();
        for q in [2, 3, 5] {
            assert!(!t_guard(d, 1, 1, q));
        }
        let d = DeltaTriple::new(3, 2, 2).unwrap();
        assert!(t_guard(d, 1, 2, 2));
        assert!(t_guard(d, 1, 3, 3));
        assert!(!t_guard(d, 1, 2, 3));
        assert!(t_guard(d, 1, 1, 5));
    }

    #[test]
    fn s_inside_t() {
        // sums b1 x^2 + b2 y^2 + δ_q z^2 with z = 1 always sit in T when
        // the guard adds δ_q, and S is contained in T for these samples
        let cache = SieveCache::new();
        for d in DeltaTriple::all() {
            for &(b1, b2) in build_u2(d, &cache).unwrap().iter().take(6) {
                let t = TSet::new(d, b1, b2).unwrap();
                for n in s_values(d, 20) {
                    assert!(t.contains(n), "{d} {b1} {b2} {n}");
                }
            }
        }
    }

    #[test]
    fn section_qualification() {
        assert!(qualifies_as_section(&lat(&[1, 1, 1])).unwrap());
        assert!(qualifies_as_section(&lat(&[1, 4, 20])).unwrap());
        assert!(qualifies_as_section(&lat(&[3, 3, 7])).unwrap());
        // 3 is locally represented but needs a coefficient <= 3
        assert!(!qualifies_as_section(&lat(&[1, 1, 7])).unwrap());
        // u = 7 at the prime 7
        assert!(!qualifies_as_section(&lat(&[1, 1, 21])).unwrap());
        assert!(!qualifies_as_section(&lat(&[3, 7, 7])).unwrap());
        assert!(!qualifies_as_section(&lat(&[2, 2, 2])).unwrap());
    }

    #[test]
    fn prime_sets() {
        assert_eq!(a_sets(11).unwrap().minus_odd, vec![7]);
        let small_minus: Vec<u64> = primes_up_to(83)
            .into_iter()
            .filter(|&p| p > 2 && a_sets(p).unwrap().minus_odd.len() <= 1)
            .collect();
        assert_eq!(small_minus, vec![3, 5, 11]);
        let empty_plus: Vec<u64> = primes_up_to(83)
            .into_iter()
            .filter(|&p| p > 2 && a_sets(p).unwrap().plus_odd.is_empty())
            .collect();
        assert_eq!(empty_plus, vec![3, 5, 7]);
        assert!(a_sets(2).is_err());
        assert!(a_sets(9).is_err());
    }

    #[test]
    fn forced_basis() {
        assert!(forced_new_check(&lat(&[1, 2, 5, 5, 11]), &[1, 2, 5, 10, 15]).unwrap());
        assert!(!forced_new_check(&lat(&[1, 1]), &[1]).unwrap());
        assert!(forced_new_check(&lat(&[1]), &[1]).unwrap());
        assert!(matches!(
            forced_new_check(&lat(&[2]), &[1]),
            Err(Error::ProbeNotRepresented(1))
        ));
    }

    #[test]
    fn first_quaternary_row() {
        let cache = SieveCache::new();
        let recs = classify_quaternaries(&lat(&[1, 1, 1]), 10, 10_000, &cache).unwrap();
        let confirmed: Vec<u64> = recs
            .iter()
            .filter(|r| r.verdict.is_confirmed())
            .map(|r| r.lattice.coeffs()[3])
            .collect();
        assert_eq!(confirmed, vec![1, 2, 3, 4, 5, 6, 7, 8]);
        assert!(recs.iter().all(|r| r.verdict.verify_witness(&r.lattice)));
        assert!(recs[0].notes[0].contains("2^(r-1)"));
    }
}
