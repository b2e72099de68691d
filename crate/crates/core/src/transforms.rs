//! Watson transformations in the diagonal-preserving cases, redundancy of
//! insertions, and minimality.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, legendre, split_valuation};
use crate::error::{Error, Result};
use crate::lattice::DiagonalLattice;
use crate::padic::{redundant_in, LocalRepSet};
use crate::sieve::{RepSieve, SieveCache};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WatsonTag {
    /// `p = 2`, `e_2 >= 1`.
    P2CaseI,
    /// `p = 2`, `e_2 = 0`, `e_3 >= 2`, `a_1 ≡ a_2 (mod 4)`.
    P4CaseII,
    /// `p = 2`, `e_2 = e_3 = 0`, `e_4 >= 2`, `a_1 ≡ a_2 ≡ a_3 (mod 4)`.
    P4CaseIII,
    /// odd `p`, `e_2 >= 1`.
    PoddCaseIV,
    /// odd `p`, `e_2 = 0`, `e_3 >= 1`, `(-a_1 a_2 / p) = -1`.
    PoddCaseV,
}

impl WatsonTag {
    pub const ALL: [WatsonTag; 5] = [
        Self::P2CaseI,
        Self::P4CaseII,
        Self::P4CaseIII,
        Self::PoddCaseIV,
        Self::PoddCaseV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::P2CaseI => "P2_case_i",
            Self::P4CaseII => "P4_case_ii",
            Self::P4CaseIII => "P4_case_iii",
            Self::PoddCaseIV => "Podd_case_iv",
            Self::PoddCaseV => "Podd_case_v",
        }
    }
}

impl fmt::Display for WatsonTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatsonCase {
    pub tag: WatsonTag,
    pub p: u64,
    /// `m` in `Λ_m`: 2, 4 or `p`.
    pub modulus: u64,
}

/// `(e_i, a_i)` ordered by valuation.
fn p_split(lattice: &DiagonalLattice, p: u64) -> Vec<(u32, u64)> {
    let mut v: Vec<(u32, u64)> = lattice
        .coeffs()
        .iter()
        .map(|&a| split_valuation(p, a))
        .collect();
    v.sort_by_key(|e| e.0);
    v
}

fn tag_applies(tag: WatsonTag, s: &[(u32, u64)], p: u64) -> bool {
    let e = |i: usize| s[i - 1].0;
    let a = |i: usize| s[i - 1].1;
    match tag {
        WatsonTag::P2CaseI => p == 2 && e(2) >= 1,
        WatsonTag::P4CaseII => p == 2 && e(2) == 0 && e(3) >= 2 && a(1) % 4 == a(2) % 4,
        WatsonTag::P4CaseIII => {
            p == 2
                && e(2) == 0
                && e(3) == 0
                && e(4) >= 2
                && a(1) % 4 == a(2) % 4
                && a(2) % 4 == a(3) % 4
        }
        WatsonTag::PoddCaseIV => p != 2 && e(2) >= 1,
        WatsonTag::PoddCaseV => {
            p != 2
                && e(2) == 0
                && e(3) >= 1
                && legendre(-((a(1) % p) as i64) * ((a(2) % p) as i64), p) == -1
        }
    }
}

fn check_input(lattice: &DiagonalLattice, p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if lattice.rank() < 4 {
        return Err(Error::RankTooSmall {
            rank: lattice.rank(),
            needed: 4,
        });
    }
    if !lattice.is_primitive() {
        return Err(Error::NotPrimitive(lattice.to_string()));
    }
    Ok(())
}

/// First applicable case in the order (i)..(v), `None` if no case applies.
pub fn watson_case_for(lattice: &DiagonalLattice, p: u64) -> Result<Option<WatsonCase>> {
    check_input(lattice, p)?;
    let s = p_split(lattice, p);
    Ok(WatsonTag::ALL
        .into_iter()
        .find(|&t| tag_applies(t, &s, p))
        .map(|tag| WatsonCase {
            tag,
            p,
            modulus: match tag {
                WatsonTag::P2CaseI => 2,
                WatsonTag::P4CaseII | WatsonTag::P4CaseIII => 4,
                _ => p,
            },
        }))
}

/// `Λ_m(L)` as a diagonal lattice: in every case `Λ_m` is cut out by
/// requiring the coordinates on `p`-unit coefficients to be divisible by
/// `p` (by 2 when `p = 2`), which multiplies those coefficients by `p^2`.
pub fn big_lambda(lattice: &DiagonalLattice, case: WatsonCase) -> Result<DiagonalLattice> {
    check_input(lattice, case.p)?;
    let s = p_split(lattice, case.p);
    if !tag_applies(case.tag, &s, case.p) {
        return Err(Error::CaseMismatch {
            case: case.tag.to_string(),
            lattice: lattice.to_string(),
        });
    }
    let factor = case.p * case.p;
    DiagonalLattice::new(
        lattice
            .coeffs()
            .iter()
            .map(|&a| if a % case.p == 0 { a } else { a * factor }),
    )
}

/// `λ_m(L)`: `Λ_m(L)` divided by its content.
pub fn lambda_transform(lattice: &DiagonalLattice, case: WatsonCase) -> Result<DiagonalLattice> {
    Ok(big_lambda(lattice, case)?.primitive_part())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RedundancyMode {
    /// Local criteria at every prime dividing `2 d(L ⊥ <n>)`.
    Local,
    /// Sieve comparison up to the bound.
    Empirical,
}

/// Whether `Q(L ⊥ <n>) = Q(L)`.
pub fn is_redundant(
    lattice: &DiagonalLattice,
    n: u64,
    bound: u64,
    mode: RedundancyMode,
) -> Result<bool> {
    if n == 0 {
        return Err(Error::NonPositiveCoefficient(0));
    }
    match mode {
        RedundancyMode::Local => {
            for p in lattice.insert(n)?.bad_primes() {
                let set = LocalRepSet::compute(lattice, p)?;
                if !redundant_in(&set, n) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        RedundancyMode::Empirical => {
            Ok(RepSieve::build(lattice, bound)?.extension_is_redundant(n))
        }
    }
}

/// Local redundancy against precomputed local sets for the primes of `L`;
/// primes dividing only `n` are computed on demand.
pub fn is_locally_redundant_with(
    lattice: &DiagonalLattice,
    sets: &[LocalRepSet],
    n: u64,
) -> Result<bool> {
    for p in lattice.insert(n)?.bad_primes() {
        let ok = match sets.iter().find(|s| s.p() == p) {
            Some(s) => redundant_in(s, n),
            None => redundant_in(&LocalRepSet::compute(lattice, p)?, n),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

fn removal_keeps_set(
    lattice: &DiagonalLattice,
    index: usize,
    bound: u64,
    cache: &SieveCache,
) -> Result<bool> {
    let a = lattice.coeffs()[index - 1];
    let rest = lattice.remove_index(index)?;
    Ok(cache.get_uncached(&rest, bound)?.extension_is_redundant(a))
}

/// No single coefficient can be dropped without shrinking `Q(L) ∩ [0, B]`.
pub fn is_minimal(lattice: &DiagonalLattice, bound: u64) -> Result<bool> {
    is_minimal_with(lattice, bound, &SieveCache::new())
}

pub fn is_minimal_with(lattice: &DiagonalLattice, bound: u64, cache: &SieveCache) -> Result<bool> {
    if lattice.rank() == 1 {
        return Ok(true);
    }
    let coeffs = lattice.coeffs();
    for i in 1..=lattice.rank() {
        if i > 1 && coeffs[i - 1] == coeffs[i - 2] {
            continue;
        }
        if removal_keeps_set(lattice, i, bound, cache)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Drops redundant coefficients, largest index first, until minimal.
pub fn minimalize(lattice: &DiagonalLattice, bound: u64) -> Result<DiagonalLattice> {
    let cache = SieveCache::new();
    let mut cur = lattice.clone();
    'outer: loop {
        if cur.rank() == 1 {
            return Ok(cur);
        }
        for i in (1..=cur.rank()).rev() {
            if removal_keeps_set(&cur, i, bound, &cache)? {
                cur = cur.remove_index(i)?;
                continue 'outer;
            }
        }
        return Ok(cur);
    }
}
