//! Diagonal lattices `<a_1, ..., a_k>` with coefficients kept in ascending order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, prime_factors};
use crate::error::{Error, Result};

/// Default ceiling for a single coefficient.
pub const MAX_COEFFICIENT: u64 = 1 << 62;

/// A positive definite diagonal lattice. Coefficients are always sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct DiagonalLattice {
    coeffs: Vec<u64>,
}

impl DiagonalLattice {
    pub fn new<I>(coeffs: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<i128>,
    {
        Self::with_max(coeffs, MAX_COEFFICIENT)
    }

    /// Like [`DiagonalLattice::new`] with an explicit coefficient ceiling.
    pub fn with_max<I>(coeffs: I, max: u64) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<i128>,
    {
        let mut out = Vec::new();
        for c in coeffs {
            let c: i128 = c.into();
            if c <= 0 {
                return Err(Error::NonPositiveCoefficient(c));
            }
            if c > max as i128 {
                return Err(Error::CoefficientTooLarge {
                    value: u64::try_from(c).unwrap_or(u64::MAX),
                    max,
                });
            }
            out.push(c as u64);
        }
        if out.is_empty() {
            return Err(Error::EmptyLattice);
        }
        out.sort_unstable();
        Ok(Self { coeffs: out })
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    /// gcd of the coefficients.
    pub fn content(&self) -> u64 {
        self.coeffs.iter().fold(0, |g, &c| gcd(g, c))
    }

    /// Product of the coefficients.
    ///
    /// # Panics
    /// If the product overflows `u128`; see [`Self::checked_discriminant`].
    pub fn discriminant(&self) -> u128 {
        self.checked_discriminant()
            .expect("discriminant overflows u128")
    }

    pub fn checked_discriminant(&self) -> Option<u128> {
        self.coeffs
            .iter()
            .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128))
    }

    /// Drops the `index`-th coefficient (1-based, as in `<a_1, ..., a_k>`).
    pub fn remove_index(&self, index: usize) -> Result<Self> {
        if self.rank() < 2 {
            return Err(Error::RankTooSmall {
                rank: self.rank(),
                needed: 2,
            });
        }
        if index == 0 || index > self.rank() {
            return Err(Error::IndexOutOfRange {
                index,
                rank: self.rank(),
            });
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.remove(index - 1);
        Ok(Self { coeffs })
    }

    /// `L ⊥ <n>`.
    pub fn insert(&self, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::NonPositiveCoefficient(0));
        }
        let mut coeffs = self.coeffs.clone();
        let pos = coeffs.partition_point(|&c| c <= n);
        coeffs.insert(pos, n);
        Ok(Self { coeffs })
    }

    /// 1-based position an inserted `n` would occupy (after equal coefficients).
    pub fn insert_position(&self, n: u64) -> usize {
        self.coeffs.partition_point(|&c| c <= n) + 1
    }

    /// Primes dividing `2 * discriminant`, ascending. Always contains 2.
    pub fn bad_primes(&self) -> Vec<u64> {
        let mut ps = vec![2u64];
        for &c in &self.coeffs {
            ps.extend(prime_factors(c));
        }
        ps.sort_unstable();
        ps.dedup();
        ps
    }

    /// The sublattice on the first `k` coefficients.
    pub fn section(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.rank() {
            return Err(Error::IndexOutOfRange {
                index: k,
                rank: self.rank(),
            });
        }
        Ok(Self {
            coeffs: self.coeffs[..k].to_vec(),
        })
    }

    /// Divides every coefficient by the content.
    pub fn primitive_part(&self) -> Self {
        let g = self.content();
        Self {
            coeffs: self.coeffs.iter().map(|c| c / g).collect(),
        }
    }

    /// Comma-separated form, e.g. `1,48,144,144`.
    pub fn to_text(&self) -> String {
        self.coeffs
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for DiagonalLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.to_text())
    }
}

impl FromStr for DiagonalLattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('<').trim_end_matches('>');
        if s.trim().is_empty() {
            return Err(Error::EmptyLattice);
        }
        let mut coeffs = Vec::new();
        for part in s.split(',') {
            let v: i128 = part
                .trim()
                .parse()
                .map_err(|_| Error::Parse(s.to_string()))?;
            coeffs.push(v);
        }
        Self::new(coeffs)
    }
}

impl TryFrom<Vec<u64>> for DiagonalLattice {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DiagonalLattice> for Vec<u64> {
    fn from(l: DiagonalLattice) -> Self {
        l.coeffs
    }
}

/// An element of the poset of ascending coefficient vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoefficientVector(DiagonalLattice);

impl CoefficientVector {
    pub fn new<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<i128>,
    {
        DiagonalLattice::new(entries).map(Self)
    }

    pub fn entries(&self) -> &[u64] {
        self.0.coeffs()
    }

    pub fn lattice(&self) -> &DiagonalLattice {
        &self.0
    }

    /// Whether `self` occurs as a subsequence of `other`. For ascending
    /// sequences this is multiset inclusion.
    pub fn is_subsequence_of(&self, other: &Self) -> bool {
        let mut it = other.entries().iter();
        self.entries()
            .iter()
            .all(|a| it.by_ref().any(|b| b == a))
    }
}

impl From<DiagonalLattice> for CoefficientVector {
    fn from(l: DiagonalLattice) -> Self {
        Self(l)
    }
}
