//! Global representation, genus-level representation and regularity verdicts.

use serde::{Deserialize, Serialize};

use crate::arith::{isqrt, is_square};
use crate::error::{Error, Result};
use crate::lattice::{CoefficientVector, DiagonalLattice};
use crate::padic::{local_certificate, LocalCertificate, LocalRepSet};
use crate::sieve::{RepSieve, SieveCache};

/// Whether `n = Σ a_i x_i^2` has an integer solution, by bounded search.
pub fn represents(lattice: &DiagonalLattice, n: u64) -> bool {
    fn go(coeffs: &[u64], n: u64) -> bool {
        match coeffs {
            [] => n == 0,
            [a] => n % a == 0 && is_square(n / a),
            [rest @ .., a] => {
                let top = isqrt(n / a);
                (0..=top).rev().any(|x| go(rest, n - a * x * x))
            }
        }
    }
    go(lattice.coeffs(), n)
}

/// All integer tuples `c` with `Σ a_i c_i^2 = n`, in lexicographic order.
pub fn vectors_with_norm(lattice: &DiagonalLattice, n: u64) -> Vec<Vec<i64>> {
    fn go(coeffs: &[u64], n: u64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let Some((&a, rest)) = coeffs.split_first() else {
            if n == 0 {
                out.push(prefix.clone());
            }
            return;
        };
        let top = isqrt(n / a) as i64;
        for c in -top..=top {
            let used = a * (c * c) as u64;
            prefix.push(c);
            go(rest, n - used, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(lattice.coeffs(), n, &mut Vec::new(), &mut out);
    out
}

/// `Q(gen(L))` for a primitive lattice of rank at least 3: membership is
/// decided at the primes dividing `2 dL`; every other completion is
/// unimodular of rank `>= 3` at an odd prime and represents all of `Z_p`.
#[derive(Debug, Clone)]
pub struct GenusOracle {
    lattice: DiagonalLattice,
    sets: Vec<LocalRepSet>,
}

impl GenusOracle {
    pub fn new(lattice: &DiagonalLattice) -> Result<Self> {
        if lattice.rank() < 3 {
            return Err(Error::RankTooSmall {
                rank: lattice.rank(),
                needed: 3,
            });
        }
        if !lattice.is_primitive() {
            return Err(Error::NotPrimitive(lattice.to_string()));
        }
        let sets = lattice
            .bad_primes()
            .into_iter()
            .map(|p| LocalRepSet::compute(lattice, p))
            .collect::<Result<_>>()?;
        Ok(Self {
            lattice: lattice.clone(),
            sets,
        })
    }

    pub fn lattice(&self) -> &DiagonalLattice {
        &self.lattice
    }

    pub fn local_sets(&self) -> &[LocalRepSet] {
        &self.sets
    }

    #[inline]
    pub fn represents(&self, n: u64) -> bool {
        self.sets.iter().all(|s| s.contains(n))
    }

    /// One certificate per bad prime, or `None` if some prime rejects `n`.
    pub fn certificates(&self, n: u64) -> Result<Option<Vec<LocalCertificate>>> {
        let mut out = Vec::with_capacity(self.sets.len());
        for s in &self.sets {
            match local_certificate(&self.lattice, s.p(), n)? {
                Some(c) => out.push(c),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }
}

pub fn genus_represents(lattice: &DiagonalLattice, n: u64) -> Result<bool> {
    Ok(GenusOracle::new(lattice)?.represents(n))
}

/// Bounded regularity evidence. A refutation is an exact disproof; a
/// confirmation only covers `[1, bound]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RegularityVerdict {
    ConfirmedUpTo {
        bound: u64,
    },
    RefutedAt {
        n: u64,
        bound: u64,
        certificates: Vec<LocalCertificate>,
    },
}

impl RegularityVerdict {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, Self::ConfirmedUpTo { .. })
    }

    pub fn refuted_at(&self) -> Option<u64> {
        match self {
            Self::RefutedAt { n, .. } => Some(*n),
            Self::ConfirmedUpTo { .. } => None,
        }
    }

    pub fn bound(&self) -> u64 {
        match self {
            Self::ConfirmedUpTo { bound } | Self::RefutedAt { bound, .. } => *bound,
        }
    }

    /// Re-checks a refutation from scratch: every certificate verifies, the
    /// certificates cover the bad primes, and `n` has no global representation.
    /// Confirmations carry no witness and return `true`.
    pub fn verify_witness(&self, lattice: &DiagonalLattice) -> bool {
        let Self::RefutedAt { n, certificates, .. } = self else {
            return true;
        };
        let primes: Vec<u64> = certificates.iter().map(|c| c.p).collect();
        primes == lattice.bad_primes()
            && certificates.iter().all(|c| c.verify(lattice, *n))
            && !represents(lattice, *n)
    }
}

/// Least `n <= bound` locally but not globally represented, if any.
pub fn regular_verdict(lattice: &DiagonalLattice, bound: u64) -> Result<RegularityVerdict> {
    let genus = GenusOracle::new(lattice)?;
    let sieve = RepSieve::build(lattice, bound)?;
    verdict_from(&genus, &sieve)
}

pub fn regular_verdict_cached(
    lattice: &DiagonalLattice,
    bound: u64,
    cache: &SieveCache,
) -> Result<RegularityVerdict> {
    let genus = GenusOracle::new(lattice)?;
    let sieve = cache.get_uncached(lattice, bound)?;
    verdict_from(&genus, &sieve)
}

/// Verdict from a prepared genus oracle and sieve of the same lattice.
pub fn verdict_from(genus: &GenusOracle, sieve: &RepSieve) -> Result<RegularityVerdict> {
    debug_assert_eq!(genus.lattice(), sieve.lattice());
    let bound = sieve.bound();
    match sieve.missing().find(|&n| genus.represents(n)) {
        None => Ok(RegularityVerdict::ConfirmedUpTo { bound }),
        Some(n) => {
            let certificates = genus
                .certificates(n)?
                .expect("genus membership implies local certificates");
            Ok(RegularityVerdict::RefutedAt {
                n,
                bound,
                certificates,
            })
        }
    }
}

/// `ψ(S, K)` restricted to `[1, bound]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum Psi {
    Value(u64),
    ExceedsBound(u64),
}

impl Psi {
    pub fn value(self) -> Option<u64> {
        match self {
            Self::Value(v) => Some(v),
            Self::ExceedsBound(_) => None,
        }
    }
}

/// Least `n` in `1..=B` with `set(n)` and `n` outside the sieve.
pub fn psi_with_sieve(set: impl Fn(u64) -> bool, sieve: &RepSieve) -> Psi {
    sieve
        .missing()
        .find(|&n| n > 0 && set(n))
        .map_or(Psi::ExceedsBound(sieve.bound()), Psi::Value)
}

pub fn psi(set: impl Fn(u64) -> bool, k: &DiagonalLattice, bound: u64) -> Result<Psi> {
    Ok(psi_with_sieve(set, &RepSieve::build(k, bound)?))
}

/// `ψ` searched with doubling bounds up to `limit`; exceeding it is an error.
pub fn psi_up_to(
    set: impl Fn(u64) -> bool,
    k: &DiagonalLattice,
    limit: u64,
    cache: &SieveCache,
) -> Result<u64> {
    let mut bound = 1024u64.min(limit);
    loop {
        let sieve = cache.get(k, bound)?;
        if let Psi::Value(v) = psi_with_sieve(&set, &sieve) {
            return Ok(v);
        }
        if bound >= limit {
            return Err(Error::PsiUnbounded(limit));
        }
        bound = (bound * 2).min(limit);
    }
}

/// `t(J) = ψ(Q(gen(J)), J)`.
pub fn t_value(lattice: &DiagonalLattice, bound: u64) -> Result<Psi> {
    let genus = GenusOracle::new(lattice)?;
    psi(|n| genus.represents(n), lattice, bound)
}

/// Least `n <= bound` rejected by `J_7` and accepted at every other prime.
pub fn u_value(lattice: &DiagonalLattice, bound: u64) -> Result<Psi> {
    if lattice.rank() < 3 {
        return Err(Error::RankTooSmall {
            rank: lattice.rank(),
            needed: 3,
        });
    }
    if !lattice.is_primitive() {
        return Err(Error::NotPrimitive(lattice.to_string()));
    }
    let at7 = LocalRepSet::compute(lattice, 7)?;
    let others = lattice
        .bad_primes()
        .into_iter()
        .filter(|&q| q != 7)
        .map(|q| LocalRepSet::compute(lattice, q))
        .collect::<Result<Vec<_>>>()?;
    Ok((1..=bound)
        .find(|&n| !at7.contains(n) && others.iter().all(|s| s.contains(n)))
        .map_or(Psi::ExceedsBound(bound), Psi::Value))
}

/// `a ⪯ b`: `a` is a subsequence of `b` with the same represented set up to `bound`.
pub fn precedes(a: &CoefficientVector, b: &CoefficientVector, bound: u64) -> Result<bool> {
    if !a.is_subsequence_of(b) {
        return Ok(false);
    }
    let sa = RepSieve::build(a.lattice(), bound)?;
    let sb = RepSieve::build(b.lattice(), bound)?;
    Ok(sa.same_set(&sb))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(c: &[u64]) -> DiagonalLattice {
        DiagonalLattice::new(c.iter().copied()).unwrap()
    }

    #[test]
    fn direct_representation() {
        assert!(!represents(&lat(&[1, 1, 1]), 7));
        assert!(!represents(&lat(&[2, 3, 9, 36]), 26));
        assert!(represents(&lat(&[1, 2, 3, 5]), 4));
        assert!(represents(&lat(&[7]), 0));
        let s = RepSieve::build(&lat(&[3, 5, 11]), 3000).unwrap();
        for n in 0..=3000 {
            assert_eq!(represents(&lat(&[3, 5, 11]), n), s.contains(n));
        }
    }

    #[test]
    fn vector_listings() {
        let l = lat(&[1, 2, 5, 5, 11]);
        assert_eq!(
            vectors_with_norm(&l, 1),
            vec![vec![-1, 0, 0, 0, 0], vec![1, 0, 0, 0, 0]]
        );
        let ten = vectors_with_norm(&l, 10);
        assert_eq!(ten.len(), 4);
        assert!(ten.iter().all(|v| v[2].abs() == 1 && v[3].abs() == 1));
        assert!(vectors_with_norm(&lat(&[1]), 2).is_empty());
        let mut sorted = ten.clone();
        sorted.sort();
        assert_eq!(sorted, ten);
    }

    #[test]
    fn genus_checks() {
        assert!(!genus_represents(&lat(&[1, 1, 1]), 7).unwrap());
        assert!(genus_represents(&lat(&[1, 4, 20]), 77).unwrap());
        assert!(genus_represents(&lat(&[2, 3, 6]), 12).unwrap());
        assert!(matches!(
            genus_represents(&lat(&[1, 1]), 1),
            Err(Error::RankTooSmall { .. })
        ));
        assert!(matches!(
            genus_represents(&lat(&[2, 4, 6]), 2),
            Err(Error::NotPrimitive(_))
        ));
    }

    #[test]
    fn verdicts() {
        let h = lat(&[2, 3, 9, 36]);
        let v = regular_verdict(&h, 10_000).unwrap();
        assert!(v.refuted_at().unwrap() <= 26);
        assert!(v.verify_witness(&h));
        assert!(regular_verdict(&lat(&[1, 1, 1, 7]), 20_000).unwrap().is_confirmed());
        assert_eq!(regular_verdict(&lat(&[1, 4, 20]), 10_000).unwrap().refuted_at(), Some(77));
    }

    #[test]
    fn psi_values() {
        // S(1,1,1): n ≡ 1 mod 8, n ≡ 1 mod 3, n ≡ ±1 mod 5
        let s = |n: u64| n % 8 == 1 && n % 3 == 1 && (n % 5 == 1 || n % 5 == 4);
        assert_eq!(psi(s, &lat(&[1]), 1000).unwrap(), Psi::Value(241));
        assert_eq!(psi(|_| false, &lat(&[1]), 1000).unwrap(), Psi::ExceedsBound(1000));
        let cache = SieveCache::new();
        assert_eq!(psi_up_to(s, &lat(&[1]), 1_000_000, &cache).unwrap(), 241);
        assert_eq!(
            psi_up_to(|n| n == 1, &lat(&[1]), 5000, &cache),
            Err(Error::PsiUnbounded(5000))
        );
    }

    #[test]
    fn t_and_u() {
        assert_eq!(t_value(&lat(&[1, 12, 24]), 10_000).unwrap(), Psi::Value(69));
        assert_eq!(t_value(&lat(&[5, 6, 9]), 10_000).unwrap(), Psi::Value(17));
        assert_eq!(u_value(&lat(&[3, 3, 7]), 10_000).unwrap(), Psi::Value(21));
        assert_eq!(u_value(&lat(&[1, 1, 21]), 10_000).unwrap(), Psi::Value(7));
        assert_eq!(u_value(&lat(&[3, 7, 7]), 10_000).unwrap(), Psi::Value(1));
    }

    #[test]
    fn preorder() {
        let a = CoefficientVector::new([1u64, 48, 144, 144]).unwrap();
        let b = CoefficientVector::new([1u64, 48, 144, 144, 288]).unwrap();
        assert!(precedes(&a, &b, 20_000).unwrap());
        let c = CoefficientVector::new([1u64, 1, 1]).unwrap();
        let d = CoefficientVector::new([1u64, 1, 1, 8]).unwrap();
        assert!(!precedes(&c, &d, 1000).unwrap());
        assert!(precedes(&a, &a, 1000).unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn refutations_recheck(coeffs in prop::collection::vec(1u64..30, 3..5)) {
                let l = DiagonalLattice::new(coeffs).unwrap();
                prop_assume!(l.is_primitive());
                let v = regular_verdict(&l, 2000).unwrap();
                prop_assert!(v.verify_witness(&l));
                if let Some(n) = v.refuted_at() {
                    prop_assert!(genus_represents(&l, n).unwrap());
                    prop_assert!(!represents(&l, n));
                }
            }
        }
    }
}
