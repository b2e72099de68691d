//! Reference data: ternary candidates, irregularity statistics, regular
//! quaternary families, search batches and minimal quinary families.
//!
//! Family entries use a small expression language: a product of factors,
//! each an integer or `base^exp`, where `exp` is an integer or a
//! parenthesised linear form in one index (`r` or `s`), e.g. `2^(2r-1)*3`.
//! Indices range over the positive integers.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::DiagonalLattice;

/// One factor `base^(mult * index + offset)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedPower {
    pub base: u64,
    pub mult: u32,
    pub offset: i32,
    pub index: char,
}

/// `constant * Π base^(mult * index + offset)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyTerm {
    pub text: String,
    pub constant: u64,
    pub powers: Vec<IndexedPower>,
}

impl FamilyTerm {
    /// Value at index `t` (shared by every indexed factor), `None` on overflow
    /// or a negative exponent.
    pub fn eval(&self, t: u32) -> Option<u64> {
        let mut v = self.constant;
        for p in &self.powers {
            let e = i64::from(p.mult) * i64::from(t) + i64::from(p.offset);
            let e = u32::try_from(e).ok()?;
            v = v.checked_mul(p.base.checked_pow(e)?)?;
        }
        Some(v)
    }

    pub fn is_constant(&self) -> bool {
        self.powers.is_empty()
    }

    /// All values `<= max` over `t >= 1`, ascending.
    pub fn values_up_to(&self, max: u64) -> Vec<u64> {
        if self.is_constant() {
            return if self.constant <= max {
                vec![self.constant]
            } else {
                vec![]
            };
        }
        let mut out = Vec::new();
        for t in 1..64 {
            match self.eval(t) {
                Some(v) if v <= max => out.push(v),
                _ => break,
            }
        }
        out
    }
}

impl fmt::Display for FamilyTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn parse_exponent(s: &str) -> Result<(u32, i32, Option<char>)> {
    let bad = || Error::Parse(s.to_string());
    let inner = match s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        Some(inner) => inner,
        None if s == "r" || s == "s" => s,
        None => return Ok((0, s.parse().map_err(|_| bad())?, None)),
    };
    let idx = inner.find(['r', 's']).ok_or_else(bad)?;
    let index = inner[idx..].chars().next().ok_or_else(bad)?;
    let mult = match &inner[..idx] {
        "" => 1,
        m => m.parse().map_err(|_| bad())?,
    };
    let rest = &inner[idx + 1..];
    let offset = match rest {
        "" => 0,
        _ => {
            let (sign, num) = rest.split_at(1);
            let n: i32 = num.parse().map_err(|_| bad())?;
            match sign {
                "+" => n,
                "-" => -n,
                _ => return Err(bad()),
            }
        }
    };
    Ok((mult, offset, Some(index)))
}

impl FromStr for FamilyTerm {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Parse(text.to_string());
        let mut constant = 1u64;
        let mut powers = Vec::new();
        for factor in text.split('*') {
            let factor = factor.trim();
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (b, Some(e)),
                None => (factor, None),
            };
            let base: u64 = base.parse().map_err(|_| bad())?;
            match exp.map(parse_exponent).transpose()? {
                None => constant = constant.checked_mul(base).ok_or_else(bad)?,
                Some((_, offset, None)) => {
                    let e = u32::try_from(offset).map_err(|_| bad())?;
                    constant = base
                        .checked_pow(e)
                        .and_then(|v| constant.checked_mul(v))
                        .ok_or_else(bad)?;
                }
                Some((mult, offset, Some(index))) => powers.push(IndexedPower {
                    base,
                    mult,
                    offset,
                    index,
                }),
            }
        }
        Ok(Self {
            text: text.to_string(),
            constant,
            powers,
        })
    }
}

/// A ternary section with the admissible fourth coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuaternaryFamily {
    pub ternary: [u64; 3],
    /// Section itself is irregular.
    pub irregular_section: bool,
    pub terms: Vec<FamilyTerm>,
}

impl QuaternaryFamily {
    /// Admissible `a4 <= max`, ascending, without duplicates.
    pub fn a4_values(&self, max: u64) -> Vec<u64> {
        let set: BTreeSet<u64> = self
            .terms
            .iter()
            .flat_map(|t| t.values_up_to(max))
            .collect();
        set.into_iter().collect()
    }

    /// The lattices `<a1,a2,a3,a4>` with `a4` from `terms` at index values
    /// in `indices`, plus every constant term.
    pub fn instantiate(&self, indices: &[u32]) -> Vec<DiagonalLattice> {
        let mut set = BTreeSet::new();
        for t in &self.terms {
            if t.is_constant() {
                set.insert(t.constant);
            } else {
                set.extend(indices.iter().filter_map(|&i| t.eval(i)));
            }
        }
        set.into_iter()
            .map(|a4| {
                let [a, b, c] = self.ternary;
                DiagonalLattice::new([a, b, c, a4]).expect("positive coefficients")
            })
            .collect()
    }

    /// First term producing `a4`, with its index value (`None` for constants).
    pub fn match_a4(&self, a4: u64) -> Option<(&FamilyTerm, Option<u32>)> {
        self.terms.iter().find_map(|t| {
            if t.is_constant() {
                return (t.constant == a4).then_some((t, None));
            }
            (1..64)
                .map_while(|i| t.eval(i).filter(|&v| v <= a4).map(|v| (i, v)))
                .find(|&(_, v)| v == a4)
                .map(|(i, _)| (t, Some(i)))
        })
    }
}

/// `<a1,a2,a3, a4(t), a5(t)>` for `t >= 1` and each multiplier `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuinaryFamily {
    pub ternary: [u64; 3],
    pub a4: FamilyTerm,
    /// `a5 = s * a5_unit(t)`
    pub a5_unit: FamilyTerm,
    pub multipliers: Vec<u64>,
}

impl QuinaryFamily {
    pub fn instantiate(&self, t: u32) -> Vec<DiagonalLattice> {
        let [a, b, c] = self.ternary;
        let (Some(a4), Some(unit)) = (self.a4.eval(t), self.a5_unit.eval(t)) else {
            return Vec::new();
        };
        self.multipliers
            .iter()
            .map(|&s| DiagonalLattice::new([a, b, c, a4, s * unit]).expect("positive"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mark {
    None,
    /// Irregular ternary.
    Dagger,
    /// Regular ternary not representing all of `Z_7` that still qualifies.
    DoubleDagger,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TernaryRow {
    /// 1-based position in the reference list.
    pub index: usize,
    pub coeffs: [u64; 3],
    pub mark: Mark,
}

const TERNARIES: [[u64; 3]; 103] = [
    [1, 1, 1], [1, 1, 2], [1, 1, 3], [1, 1, 4], [1, 1, 5], [1, 1, 6], [1, 1, 8], [1, 1, 9],
    [1, 1, 12], [1, 1, 16], [1, 1, 24], [1, 2, 2], [1, 2, 3], [1, 2, 4], [1, 2, 5], [1, 2, 6],
    [1, 2, 8], [1, 2, 10], [1, 2, 16], [1, 2, 32], [1, 3, 3], [1, 3, 4], [1, 3, 6], [1, 3, 9],
    [1, 3, 10], [1, 3, 12], [1, 3, 18], [1, 3, 30], [1, 3, 36], [1, 4, 4], [1, 4, 6], [1, 4, 8],
    [1, 4, 12], [1, 4, 16], [1, 4, 20], [1, 4, 24], [1, 4, 36], [1, 5, 5], [1, 5, 8], [1, 5, 10],
    [1, 5, 25], [1, 5, 40], [1, 6, 6], [1, 6, 9], [1, 6, 16], [1, 6, 18], [1, 6, 24], [1, 8, 8],
    [1, 8, 16], [1, 8, 24], [1, 8, 32], [1, 8, 40], [1, 8, 64], [1, 9, 9], [1, 9, 12], [1, 9, 24],
    [1, 10, 30], [1, 12, 12], [1, 12, 24], [1, 12, 36], [1, 16, 16], [1, 16, 24], [1, 16, 32],
    [1, 16, 48], [1, 16, 144], [1, 24, 24], [1, 24, 72], [1, 40, 120], [1, 48, 144], [2, 2, 3],
    [2, 3, 3], [2, 3, 6], [2, 3, 8], [2, 3, 9], [2, 3, 12], [2, 3, 18], [2, 3, 48], [2, 5, 6],
    [2, 5, 10], [2, 5, 15], [2, 6, 9], [2, 6, 15], [3, 3, 4], [3, 3, 7], [3, 3, 8], [3, 4, 4],
    [3, 4, 8], [3, 4, 12], [3, 4, 36], [3, 8, 8], [3, 8, 12], [3, 8, 24], [3, 8, 48], [3, 8, 72],
    [3, 10, 30], [3, 16, 48], [3, 40, 120], [5, 6, 9], [5, 6, 15], [5, 8, 24], [5, 8, 40],
    [8, 9, 24], [8, 15, 24],
];

const DAGGER: [usize; 6] = [35, 59, 63, 65, 87, 98];
const DOUBLE_DAGGER: usize = 84;

/// The 103 ternary section candidates, in reference order.
pub fn ternary_candidates() -> Vec<TernaryRow> {
    TERNARIES
        .iter()
        .enumerate()
        .map(|(i, &coeffs)| {
            let index = i + 1;
            let mark = if DAGGER.contains(&index) {
                Mark::Dagger
            } else if index == DOUBLE_DAGGER {
                Mark::DoubleDagger
            } else {
                Mark::None
            };
            TernaryRow {
                index,
                coeffs,
                mark,
            }
        })
        .collect()
}

/// `t(J)`: least locally but not globally represented integer, for the
/// irregular candidates.
pub const T_VALUES: [([u64; 3], u64); 6] = [
    ([1, 4, 20], 77),
    ([1, 12, 24], 69),
    ([1, 16, 32], 161),
    ([1, 16, 144], 473),
    ([3, 4, 8], 23),
    ([5, 6, 9], 17),
];

/// `u(J)`: least integer rejected at 7 and accepted at every other prime,
/// for the regular ternaries with `Q(J_7) != Z_7`.
pub const U_VALUES: [([u64; 3], u64); 6] = [
    ([1, 1, 21], 7),
    ([1, 9, 21], 7),
    ([1, 21, 21], 3),
    ([3, 3, 7], 21),
    ([3, 7, 7], 1),
    ([3, 7, 63], 1),
];

const QUATERNARY_ROWS: &[([u64; 3], bool, &[&str])] = &[
    ([1, 1, 1], false, &["2^(r-1)", "2^(2r-1)*3", "3", "5", "7"]),
    ([1, 1, 2], false, &["2^r", "2^(2r-2)*3", "5", "6", "7", "9", "10", "11", "13", "14"]),
    ([1, 1, 3], false, &["3^r", "2*3^r", "2^2*3^(2r-2)", "3^(2r-2)*5"]),
    ([1, 1, 4], false, &["2^(r+1)", "2^(2r+1)*3", "12", "20", "28"]),
    ([1, 1, 5], false, &["2^(2r+1)"]),
    ([1, 1, 6], false, &["3^(r+1)", "2*3^(2r)"]),
    ([1, 1, 8], false, &["2^(r+2)", "2^(2r+2)*3", "24", "40", "56"]),
    ([1, 1, 12], false, &["2^2*3^(2r)"]),
    ([1, 1, 16], false, &["2^(r+3)", "2^(2r+3)*3", "48", "80", "112"]),
    ([1, 1, 24], false, &["2^3*3^(2r)"]),
    ([1, 2, 2], false, &["2^r", "2^(2r-1)*3", "3", "5", "7"]),
    ([1, 2, 3], false, &["2^(r+1)", "3", "5", "6", "7", "9", "10"]),
    ([1, 2, 4], false, &["2^(r+1)", "2^(2r)*3", "5", "6", "7", "9", "10", "11", "13", "14"]),
    (
        [1, 2, 5],
        false,
        &[
            "5^(2r)", "2*5^r", "2^2*5^(2r)", "2^3*5^(2r-2)", "3*5^(2r)", "3^2*5^(2r-2)",
            "5^(2r-2)*7", "2*3*5^(2r-2)",
        ],
    ),
    ([1, 2, 6], false, &["2^(r+2)"]),
    ([1, 2, 8], false, &["2^(r+2)", "2^(2r+1)*3"]),
    ([1, 2, 16], false, &["2^(r+3)", "2^(2r+2)*3"]),
    ([1, 2, 32], false, &["2^(r+4)", "2^(2r+3)*3"]),
    ([1, 3, 3], false, &["3^r", "2*3^r", "2^2*3^(2r-1)", "3^(2r-1)*5"]),
    ([1, 3, 4], false, &["2^2*3^(r-1)", "2^3*3^(2r-2)"]),
    ([1, 3, 6], false, &["2^r*3", "9", "15", "18", "21", "27", "30"]),
    ([1, 3, 9], false, &["3^(r+1)", "2*3^(r+1)", "2^2*3^(2r)", "3^(2r)*5"]),
    ([1, 3, 12], false, &["2^2*3^r", "2^3*3^(2r-1)"]),
    ([1, 3, 36], false, &["2^2*3^(r+1)", "2^3*3^(2r)"]),
    ([1, 4, 4], false, &["2^(r+1)", "2^(2r+1)*3", "12", "20", "28"]),
    (
        [1, 4, 8],
        false,
        &["2^(r+2)", "2^(2r)*3", "20", "24", "28", "36", "40", "44", "52", "56"],
    ),
    ([1, 4, 12], false, &["2^2*3^r", "2^3*3^r", "2^4*3^(2r-2)", "2^2*3^(2r-2)*5"]),
    ([1, 4, 16], false, &["2^(r+3)", "2^(2r+3)*3", "48", "80", "112"]),
    ([1, 4, 20], true, &["32"]),
    ([1, 4, 24], false, &["2^2*3^(r+1)", "2^3*3^(2r)"]),
    ([1, 5, 5], false, &["2^(2r-1)*5", "5", "15"]),
    ([1, 5, 8], false, &["2^3*5^(r-1)", "2^4*5^(2r-2)", "2^5*5^(2r-2)", "2^3*3*5^(2r-2)"]),
    (
        [1, 5, 10],
        false,
        &[
            "5^(2r+1)", "2*5^r", "2^2*5^(2r-1)", "2^3*5^(2r-1)", "3*5^(2r-1)", "3^2*5^(2r-1)",
            "5^(2r-1)*7", "2*3*5^(2r-1)",
        ],
    ),
    ([1, 5, 40], false, &["2^3*5^r", "2^4*5^(2r-1)", "2^5*5^(2r-1)", "2^3*3*5^(2r-1)"]),
    ([1, 6, 9], false, &["3^(r+1)", "2*3^(2r)"]),
    ([1, 8, 8], false, &["2^(r+2)", "2^(2r+1)*3"]),
    ([1, 8, 16], false, &["2^(r+3)", "2^(2r+2)*3", "24", "40", "56"]),
    ([1, 8, 24], false, &["2^(r+4)"]),
    ([1, 8, 32], false, &["2^(r+4)", "2^(2r+3)*3"]),
    ([1, 8, 64], false, &["2^(r+5)", "2^(2r+4)*3"]),
    ([1, 9, 12], false, &["2^2*3^(2r)"]),
    ([1, 9, 24], false, &["2^3*3^(2r)"]),
    ([1, 12, 12], false, &["2^2*3^r", "2^3*3^(2r-1)"]),
    ([1, 12, 24], true, &["24", "36", "48", "60"]),
    ([1, 12, 36], false, &["2^2*3^(r+1)", "2^3*3^(r+1)", "2^4*3^(2s)", "2^2*3^(2s)*5"]),
    ([1, 16, 16], false, &["2^(r+3)", "2^(2r+3)*3", "48", "80", "112"]),
    (
        [1, 16, 32],
        true,
        &["32", "48", "64", "80", "96", "112", "128", "144", "160"],
    ),
    ([1, 16, 48], false, &["2^4*3^(2r)", "2^5*3^(2r)"]),
    ([1, 48, 144], false, &["2^4*3^(2r)", "2^5*3^(2r)"]),
    ([2, 3, 3], false, &["3^r", "2*3^(2r-1)"]),
    ([2, 3, 6], false, &["2^r*3", "9", "15"]),
    ([2, 3, 9], false, &["9", "18"]),
    ([3, 3, 4], false, &["2^2*3^(2r-1)"]),
    ([3, 3, 8], false, &["2^3*3^(2r-1)"]),
    ([3, 4, 4], false, &["2^2*3^(r-1)", "2^3*3^(2r-2)"]),
    ([3, 4, 8], true, &["8", "12", "16", "20"]),
    ([3, 4, 12], false, &["2^2*3^r", "2^3*3^r", "2^4*3^(2r-1)", "2^2*3^(2r-1)*5"]),
    ([3, 4, 36], false, &["2^2*3^(r+1)", "2^3*3^(2r)"]),
    ([3, 8, 12], false, &["2^2*3^r", "2^3*3^(2r-1)"]),
    ([3, 8, 24], false, &["2^(r+2)*3"]),
    ([3, 16, 48], false, &["2^4*3^(2r-1)", "2^5*3^(2r-1)"]),
];

/// Every regular diagonal quaternary lattice, grouped by ternary section.
pub fn quaternary_families() -> Vec<QuaternaryFamily> {
    QUATERNARY_ROWS
        .iter()
        .map(|(ternary, irregular_section, terms)| QuaternaryFamily {
            ternary: *ternary,
            irregular_section: *irregular_section,
            terms: terms
                .iter()
                .map(|t| t.parse().expect("fixture term parses"))
                .collect(),
        })
        .collect()
}

/// The two families of minimal regular quinary lattices.
pub fn quinary_families() -> Vec<QuinaryFamily> {
    let m = vec![5, 11, 12, 13, 14, 15];
    vec![
        QuinaryFamily {
            ternary: [1, 2, 5],
            a4: "5^(2r-1)".parse().expect("term"),
            a5_unit: "5^(2r-2)".parse().expect("term"),
            multipliers: m.clone(),
        },
        QuinaryFamily {
            ternary: [1, 5, 10],
            a4: "5^(2r)".parse().expect("term"),
            a5_unit: "5^(2r-1)".parse().expect("term"),
            multipliers: m,
        },
    ]
}

/// Partition of the candidate indices by how the search treats them.
pub const BATCHES: [(&str, &[usize]); 6] = [
    (
        "1",
        &[
            1, 2, 3, 4, 5, 6, 7, 10, 12, 13, 14, 16, 17, 19, 20, 21, 24, 30, 32, 34, 44, 48, 49,
            50, 51, 53, 61, 71,
        ],
    ),
    (
        "2",
        &[
            9, 11, 22, 23, 26, 29, 33, 36, 38, 39, 42, 55, 56, 58, 60, 64, 69, 72, 74, 83, 85, 86,
            88, 89, 91, 92, 96,
        ],
    ),
    ("3", &[35, 59, 63, 87]),
    ("4", &[15, 40]),
    (
        "2'",
        &[
            8, 18, 25, 27, 28, 31, 37, 41, 43, 45, 46, 47, 52, 54, 57, 62, 66, 67, 68, 70, 73, 75,
            76, 77, 78, 79, 80, 81, 82, 90, 93, 94, 95, 97, 99, 100, 101, 102, 103,
        ],
    ),
    ("3'", &[65, 84, 98]),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_parsing() {
        let t: FamilyTerm = "2^(2r-1)*3".parse().unwrap();
        assert_eq!(t.constant, 3);
        assert_eq!(t.eval(1), Some(6));
        assert_eq!(t.eval(2), Some(24));
        let t: FamilyTerm = "2^2*3^(2s)*5".parse().unwrap();
        assert_eq!(t.constant, 20);
        assert_eq!(t.eval(1), Some(180));
        assert_eq!(t.powers[0].index, 's');
        let t: FamilyTerm = "2^(r-1)".parse().unwrap();
        assert_eq!(t.values_up_to(10), vec![1, 2, 4, 8]);
        let t: FamilyTerm = "7".parse().unwrap();
        assert!(t.is_constant());
        assert_eq!(t.values_up_to(7), vec![7]);
        assert!("2^(q)".parse::<FamilyTerm>().is_err());
        assert!("x".parse::<FamilyTerm>().is_err());
    }

    #[test]
    fn first_family_expansion() {
        let f = &quaternary_families()[0];
        assert_eq!(f.a4_values(10), vec![1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(f.match_a4(24).map(|(t, i)| (t.text.as_str(), i)), Some(("2^(2r-1)*3", Some(2))));
        assert_eq!(f.match_a4(7).map(|(_, i)| i), Some(None));
        assert!(f.match_a4(9).is_none());
    }

    #[test]
    fn candidate_list_shape() {
        let rows = ternary_candidates();
        assert_eq!(rows.len(), 103);
        assert_eq!(rows[0].coeffs, [1, 1, 1]);
        assert_eq!(rows[102].coeffs, [8, 15, 24]);
        assert_eq!(rows[83].coeffs, [3, 3, 7]);
        assert_eq!(rows[83].mark, Mark::DoubleDagger);
        let irregular: Vec<[u64; 3]> = rows
            .iter()
            .filter(|r| r.mark == Mark::Dagger)
            .map(|r| r.coeffs)
            .collect();
        let t: Vec<[u64; 3]> = T_VALUES.iter().map(|x| x.0).collect();
        assert_eq!(irregular, t);
        let mut sorted = TERNARIES.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, TERNARIES.to_vec());
    }

    #[test]
    fn batches_partition_candidates() {
        let sizes: Vec<usize> = BATCHES.iter().map(|b| b.1.len()).collect();
        assert_eq!(sizes, vec![28, 27, 4, 2, 39, 3]);
        let mut all: Vec<usize> = BATCHES.iter().flat_map(|b| b.1.iter().copied()).collect();
        all.sort_unstable();
        assert_eq!(all, (1..=103).collect::<Vec<_>>());
    }

    #[test]
    fn families_sit_on_candidates() {
        let cands: Vec<[u64; 3]> = TERNARIES.to_vec();
        for f in quaternary_families() {
            assert!(cands.contains(&f.ternary), "{:?}", f.ternary);
            for a4 in f.a4_values(100_000) {
                assert!(a4 >= f.ternary[2], "{:?} {a4}", f.ternary);
            }
        }
    }

    #[test]
    fn quinary_instances() {
        let fams = quinary_families();
        let first: Vec<Vec<u64>> = fams[0].instantiate(1).iter().map(|l| l.coeffs().to_vec()).collect();
        assert_eq!(first[0], vec![1, 2, 5, 5, 5]);
        assert_eq!(first[1], vec![1, 2, 5, 5, 11]);
        let second = fams[1].instantiate(1);
        assert_eq!(second[5].coeffs(), &[1, 5, 10, 25, 75]);
    }
}
