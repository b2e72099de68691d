//! Exact p-adic computations for diagonal lattices.
//!
//! Local representation is decided by valuation descent. Write
//! `L_p = U ⊥ pM` where `U` holds the coefficients that are p-adic units.
//! A representation of `n` either uses a unit coordinate in `U`, in which case
//! a solution modulo `p^δ` (`δ = 1` for odd `p`, `δ = 3` for `p = 2`) lifts by
//! Hensel's lemma in that coordinate, or every `U` coordinate is divisible by
//! `p` and `n / p` is represented by `M ⊥ pU`. Each descent step lowers
//! `ord_p(n)` by one, so the procedure terminates.
//!
//! Only the valuation and the unit part modulo `p^δ` of each coefficient
//! matter, so the engine works on those pairs and never overflows.

use serde::{Deserialize, Serialize};

use crate::arith::{
    is_prime, least_nonresidue, legendre, mul_mod_u128, split_valuation, split_valuation_signed,
};
use crate::error::{Error, Result};
use crate::lattice::DiagonalLattice;

/// Hensel precision exponent: `1 + 2 ord_p(2)`.
fn hensel_exp(p: u64) -> u32 {
    if p == 2 {
        3
    } else {
        1
    }
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// `p^e * (Z_p^×)^2 * u`, with `u` a canonical unit representative:
/// `{1, Δ_p}` for odd `p` (Δ_p the least nonresidue), `{1, 3, 5, 7}` for `p = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicSquareClass {
    pub p: u64,
    pub e: u32,
    pub u: u64,
}

impl PadicSquareClass {
    /// Smallest positive integer in the class.
    pub fn representative(&self) -> Option<u64> {
        self.p
            .checked_pow(self.e)
            .and_then(|pe| pe.checked_mul(self.u))
    }
}

/// Canonical unit representatives for `p`.
pub fn unit_classes(p: u64) -> Vec<u64> {
    if p == 2 {
        vec![1, 3, 5, 7]
    } else {
        vec![1, least_nonresidue(p)]
    }
}

/// Canonical unit representative of the (signed) p-adic unit `u`.
fn canonical_unit(p: u64, u: i64) -> u64 {
    if p == 2 {
        u.rem_euclid(8) as u64
    } else if legendre(u, p) == 1 {
        1
    } else {
        least_nonresidue(p)
    }
}

pub fn square_class_of(p: u64, n: i64) -> Result<PadicSquareClass> {
    check_prime(p)?;
    if n == 0 {
        return Err(Error::ZeroInput);
    }
    let (e, u) = split_valuation_signed(p, n);
    Ok(PadicSquareClass {
        p,
        e,
        u: canonical_unit(p, u),
    })
}

/// A diagonal `Z_p`-form reduced to what local representation depends on.
#[derive(Debug, Clone)]
struct LocalForm {
    p: u64,
    /// `p^δ`
    modulus: u64,
    /// `(ord_p(a_i), unit part of a_i mod p^δ)`
    entries: Vec<(u32, u64)>,
}

impl LocalForm {
    fn new(p: u64, coeffs: &[u64]) -> Self {
        let modulus = p.pow(hensel_exp(p));
        let entries = coeffs
            .iter()
            .map(|&a| {
                let (v, w) = split_valuation(p, a);
                (v, w % modulus)
            })
            .collect();
        Self {
            p,
            modulus,
            entries,
        }
    }

    fn from_entries(p: u64, entries: Vec<(u32, u64)>) -> Self {
        let modulus = p.pow(hensel_exp(p));
        Self {
            p,
            modulus,
            entries,
        }
    }

    fn value_mod(&self, v: u32, w: u64) -> u64 {
        if v >= hensel_exp(self.p) {
            0
        } else {
            (self.p.pow(v) * w) % self.modulus
        }
    }

    /// Finds `y mod p^δ` with `Σ c_i y_i^2 ≡ target` and some `y_i` a unit
    /// sitting on a unit coefficient. Returns the residues and the pivot.
    fn unit_solution(&self, entries: &[(u32, u64)], target: u64) -> Option<(Vec<u64>, usize)> {
        let m = self.modulus as usize;
        let p = self.p;
        let states = 2 * m;
        // parent[j][state] = (previous state, chosen residue)
        let mut parents: Vec<Vec<Option<(u32, u32)>>> = Vec::with_capacity(entries.len());
        let mut reach = vec![false; states];
        reach[0] = true;
        for &(v, w) in entries {
            let c = self.value_mod(v, w);
            let mut opts: Vec<(usize, bool, u32)> = Vec::new();
            for x in 0..self.modulus {
                let contrib = ((c as u128 * (x * x % self.modulus) as u128) % m as u128) as usize;
                let pivot = v == 0 && x % p != 0;
                if !opts.iter().any(|&(cc, pp, _)| cc == contrib && pp == pivot) {
                    opts.push((contrib, pivot, x as u32));
                }
            }
            let mut next = vec![false; states];
            let mut par = vec![None; states];
            for s in 0..states {
                if !reach[s] {
                    continue;
                }
                let (r, f) = (s >> 1, s & 1 == 1);
                for &(contrib, pivot, x) in &opts {
                    let ns = (((r + contrib) % m) << 1) | usize::from(f || pivot);
                    if !next[ns] {
                        next[ns] = true;
                        par[ns] = Some((s as u32, x));
                    }
                }
            }
            parents.push(par);
            reach = next;
        }
        let goal = ((target as usize) << 1) | 1;
        if !reach[goal] {
            return None;
        }
        let mut residues = vec![0u64; entries.len()];
        let mut state = goal;
        for j in (0..entries.len()).rev() {
            let (prev, x) = parents[j][state].expect("reachable state has a parent");
            residues[j] = x as u64;
            state = prev as usize;
        }
        let pivot = (0..entries.len())
            .find(|&j| entries[j].0 == 0 && residues[j] % p != 0)
            .expect("accepting state has a pivot");
        Some((residues, pivot))
    }

    /// Descent on the class `p^e * u`. Returns the descent depth, the scale
    /// exponent of every coordinate, the residues and the pivot on success.
    fn descend(&self, e: u32, u: u64) -> Option<Descent> {
        let delta = hensel_exp(self.p);
        let mut entries = self.entries.clone();
        let mut scale = vec![0u32; entries.len()];
        let mut level = 0u32;
        let u = u % self.modulus;
        loop {
            let rem = e - level;
            let target = if rem >= delta {
                0
            } else {
                (self.p.pow(rem) * u) % self.modulus
            };
            if let Some((residues, pivot)) = self.unit_solution(&entries, target) {
                return Some(Descent {
                    depth: level,
                    scale,
                    residues,
                    pivot,
                });
            }
            if rem == 0 {
                return None;
            }
            for (j, ent) in entries.iter_mut().enumerate() {
                if ent.0 == 0 {
                    ent.0 = 1;
                    scale[j] += 1;
                } else {
                    ent.0 -= 1;
                }
            }
            level += 1;
        }
    }

    fn represents_class(&self, e: u32, u: u64) -> bool {
        self.descend(e, u).is_some()
    }
}

struct Descent {
    depth: u32,
    scale: Vec<u32>,
    residues: Vec<u64>,
    pivot: usize,
}

/// Whether `n` is represented by `L ⊗ Z_p`. Zero is always represented.
pub fn locally_represents(lattice: &DiagonalLattice, p: u64, n: u64) -> Result<bool> {
    check_prime(p)?;
    if n == 0 {
        return Ok(true);
    }
    let (e, u) = split_valuation(p, n);
    Ok(LocalForm::new(p, lattice.coeffs()).represents_class(e, u))
}

/// Whether every element of the class `p^e u (Z_p^×)^2` is represented.
pub fn locally_represents_class(lattice: &DiagonalLattice, class: PadicSquareClass) -> bool {
    LocalForm::new(class.p, lattice.coeffs()).represents_class(class.e, class.u)
}

/// Re-checkable evidence that `n` is represented over `Z_p`.
///
/// `coords` satisfies `Σ a_i x_i^2 ≡ n (mod modulus)` with `modulus = p^(depth+δ)`,
/// and `a_pivot x_pivot^2` has valuation exactly `depth`; Hensel's lemma in the
/// pivot coordinate then produces an exact p-adic solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCertificate {
    pub p: u64,
    pub depth: u32,
    pub modulus: u128,
    pub pivot: usize,
    pub coords: Vec<u128>,
}

impl LocalCertificate {
    /// Independent re-check against the original coefficients.
    pub fn verify(&self, lattice: &DiagonalLattice, n: u64) -> bool {
        let coeffs = lattice.coeffs();
        if coeffs.len() != self.coords.len() || self.pivot >= coeffs.len() {
            return false;
        }
        let delta = hensel_exp(self.p);
        let expected = (self.p as u128).checked_pow(self.depth + delta);
        if expected != Some(self.modulus) {
            return false;
        }
        let m = self.modulus;
        let mut sum = 0u128;
        for (&a, &x) in coeffs.iter().zip(&self.coords) {
            let sq = mul_mod_u128(x, x, m);
            sum = (sum + mul_mod_u128(a as u128, sq, m)) % m;
        }
        if sum != n as u128 % m {
            return false;
        }
        let a = coeffs[self.pivot];
        let x = self.coords[self.pivot];
        if x == 0 {
            return false;
        }
        // ord_p(a x^2) must equal the depth; x is only known mod p^(depth+δ),
        // which is enough because ord_p(x) < depth + δ is required anyway.
        let (va, _) = split_valuation(self.p, a);
        let mut vx = 0u32;
        let mut xx = x;
        while xx % self.p as u128 == 0 {
            xx /= self.p as u128;
            vx += 1;
        }
        va + 2 * vx == self.depth
    }
}

/// Local representation with a certificate, `None` if `n` is not represented.
pub fn local_certificate(
    lattice: &DiagonalLattice,
    p: u64,
    n: u64,
) -> Result<Option<LocalCertificate>> {
    check_prime(p)?;
    if n == 0 {
        return Ok(None);
    }
    let (e, u) = split_valuation(p, n);
    let form = LocalForm::new(p, lattice.coeffs());
    let Some(d) = form.descend(e, u) else {
        return Ok(None);
    };
    let modulus = (p as u128)
        .checked_pow(d.depth + hensel_exp(p))
        .ok_or(Error::Cache("certificate modulus overflow".into()))?;
    let coords = d
        .residues
        .iter()
        .zip(&d.scale)
        .map(|(&y, &s)| {
            let ps = (p as u128).pow(s) % modulus;
            mul_mod_u128(y as u128, ps, modulus)
        })
        .collect();
    Ok(Some(LocalCertificate {
        p,
        depth: d.depth,
        modulus,
        pivot: d.pivot,
        coords,
    }))
}

/// `Q(L_p)` as a union of square classes with a period-2 tail.
///
/// For `e < threshold + 2` membership is tabulated; larger exponents reduce
/// by 2 into `[threshold, threshold + 2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRepSet {
    p: u64,
    threshold: u32,
    units: Vec<u64>,
    /// `table[e][i]` for unit representative `units[i]`.
    table: Vec<Vec<bool>>,
    /// Quadratic residue table mod `p` (odd `p` only).
    qr: Vec<bool>,
}

/// Serialized shape: `{ "p": 2, "E": 5, "classes": [{"e":0,"u":1,"member":true}, ...] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRepSetJson {
    pub p: u64,
    #[serde(rename = "E")]
    pub threshold: u32,
    pub classes: Vec<ClassMembership>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMembership {
    pub e: u32,
    pub u: u64,
    pub member: bool,
}

/// Headroom above the initial threshold before giving up.
const STABILITY_CAP: u32 = 48;

impl LocalRepSet {
    pub fn compute(lattice: &DiagonalLattice, p: u64) -> Result<Self> {
        check_prime(p)?;
        let form = LocalForm::new(p, lattice.coeffs());
        let units = unit_classes(p);
        let max_ord = form.entries.iter().map(|e| e.0).max().unwrap_or(0);
        let start = max_ord + 2 * u32::from(p == 2) + 1;
        let cap = start + STABILITY_CAP;
        let mut memo: Vec<Vec<bool>> = Vec::new();
        let member = |e: u32, i: usize, memo: &mut Vec<Vec<bool>>| -> bool {
            while memo.len() <= e as usize {
                let ee = memo.len() as u32;
                memo.push(units.iter().map(|&u| form.represents_class(ee, u)).collect());
            }
            memo[e as usize][i]
        };
        let mut threshold = start;
        loop {
            let stable = (threshold..=threshold + 4).all(|e| {
                (0..units.len()).all(|i| member(e, i, &mut memo) == member(e + 2, i, &mut memo))
            });
            if stable {
                break;
            }
            threshold += 1;
            if threshold > cap {
                return Err(Error::StabilityNotReached { p, cap });
            }
        }
        let table = (0..threshold + 2)
            .map(|e| (0..units.len()).map(|i| member(e, i, &mut memo)).collect())
            .collect();
        let qr = if p == 2 {
            Vec::new()
        } else {
            let mut qr = vec![false; p as usize];
            for x in 1..p {
                qr[(x * x % p) as usize] = true;
            }
            qr
        };
        Ok(Self {
            p,
            threshold,
            units,
            table,
            qr,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn units(&self) -> &[u64] {
        &self.units
    }

    fn reduce_exponent(&self, e: u32) -> usize {
        let top = self.threshold + 2;
        if e < top {
            e as usize
        } else {
            (self.threshold + (e - self.threshold) % 2) as usize
        }
    }

    fn unit_index(&self, u: u64) -> Option<usize> {
        self.units.iter().position(|&x| x == u)
    }

    /// Membership of the class `p^e * u`; `u` must be a canonical representative.
    pub fn member(&self, e: u32, u: u64) -> bool {
        let i = self
            .unit_index(u)
            .expect("unit must be a canonical class representative");
        self.table[self.reduce_exponent(e)][i]
    }

    /// Whether `n` lies in `Q(L_p)`.
    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        if n == 0 {
            return true;
        }
        let (e, w) = split_valuation(self.p, n);
        let i = if self.p == 2 {
            ((w & 7) >> 1) as usize
        } else if self.qr[(w % self.p) as usize] {
            0
        } else {
            1
        };
        self.table[self.reduce_exponent(e)][i]
    }

    /// Members among unit classes at exponent `e`.
    pub fn units_at(&self, e: u32) -> Vec<u64> {
        self.units
            .iter()
            .copied()
            .filter(|&u| self.member(e, u))
            .collect()
    }

    /// Whether every class of exponent `>= e0` is a member, i.e. `p^e0 Z_p ⊆ Q(L_p)`.
    pub fn contains_ideal(&self, e0: u32) -> bool {
        let hi = e0.max(self.threshold) + 2;
        (e0..hi).all(|e| self.units.iter().all(|&u| self.member(e, u)))
    }

    pub fn to_json(&self) -> LocalRepSetJson {
        let mut classes = Vec::new();
        for (e, row) in self.table.iter().enumerate() {
            for (&u, &member) in self.units.iter().zip(row) {
                classes.push(ClassMembership {
                    e: e as u32,
                    u,
                    member,
                });
            }
        }
        LocalRepSetJson {
            p: self.p,
            threshold: self.threshold,
            classes,
        }
    }
}

/// `Q(L ⊥ <γ>) = Q(L)` over `Z_p`, via the unit-class criteria for `p = 2`
/// and `γ Z_p ⊆ Q(L_p)` for odd `p`.
pub fn locally_redundant(lattice: &DiagonalLattice, p: u64, gamma: u64) -> Result<bool> {
    let set = LocalRepSet::compute(lattice, p)?;
    Ok(redundant_in(&set, gamma))
}

/// [`locally_redundant`] against a precomputed set.
pub fn redundant_in(set: &LocalRepSet, gamma: u64) -> bool {
    assert!(gamma > 0, "gamma must be positive");
    let g = split_valuation(set.p(), gamma).0;
    if !set.contains_ideal(g) {
        return false;
    }
    if set.p() != 2 {
        return true;
    }
    let full = [1u64, 3, 5, 7];
    if g >= 2 {
        let s = set.units_at(g - 2);
        let ok = s.is_empty() || s == [1, 5] || s == [3, 7] || s == full;
        if !ok {
            return false;
        }
    }
    if g >= 1 {
        let s = set.units_at(g - 1);
        if !(s.is_empty() || s == full) {
            return false;
        }
    }
    true
}

/// Whether the binary lattice `<b1, b2>` embeds in `L_p`, i.e. there are
/// `x, y ∈ L_p` with `Q(x) = b1`, `Q(y) = b2`, `B(x, y) = 0`.
///
/// At least one of `b1`, `b2` must be a p-adic unit. A vector of unit norm
/// splits `L_p`, so the question reduces to representing the other entry by
/// the orthogonal complement. For odd `p` the complement is determined by
/// Witt cancellation. For `p = 2` a congruence search over pairs `(x, y)`
/// runs at the minimal exact precision and again one step higher; any
/// disagreement is reported as [`Error::PrecisionUnstable`].
pub fn represents_binary_locally(
    lattice: &DiagonalLattice,
    p: u64,
    b1: i64,
    b2: i64,
) -> Result<bool> {
    check_prime(p)?;
    if b1 == 0 || b2 == 0 {
        return Err(Error::ZeroInput);
    }
    let (v1, _) = split_valuation_signed(p, b1);
    let (v2, _) = split_valuation_signed(p, b2);
    let (b1, b2) = match (v1, v2) {
        (0, _) => (b1, b2),
        (_, 0) => (b2, b1),
        _ => return Err(Error::NonUnitBinary { p, b1, b2 }),
    };
    if p == 2 {
        let t = split_valuation_signed(2, b2).0;
        let low = t + 3;
        let a = binary_search_2adic(lattice.coeffs(), b1, b2, low);
        let b = binary_search_2adic(lattice.coeffs(), b1, b2, low + 1);
        if a != b {
            return Err(Error::PrecisionUnstable {
                p,
                low,
                high: low + 1,
            });
        }
        Ok(a)
    } else {
        Ok(binary_odd(lattice.coeffs(), p, b1, b2))
    }
}

/// Odd `p`, `b1` a unit: split off `<b1>` from the unimodular component.
fn binary_odd(coeffs: &[u64], p: u64, b1: i64, b2: i64) -> bool {
    let form = LocalForm::new(p, coeffs);
    let units: Vec<u64> = form
        .entries
        .iter()
        .filter(|e| e.0 == 0)
        .map(|e| e.1 % p)
        .collect();
    let b1_res = b1.rem_euclid(p as i64) as u64;
    let mut complement: Vec<(u32, u64)> = Vec::new();
    match units.len() {
        0 => return false,
        1 => {
            if legendre(units[0] as i64, p) != legendre(b1, p) {
                return false;
            }
        }
        d => {
            let det = units.iter().fold(1u64, |acc, &w| acc * w % p);
            complement.extend(std::iter::repeat_n((0u32, 1u64), d - 2));
            complement.push((0, det * b1_res % p));
        }
    }
    complement.extend(form.entries.iter().filter(|e| e.0 > 0).copied());
    if complement.is_empty() {
        return false;
    }
    let (e2, u2) = split_valuation_signed(p, b2);
    let u2 = u2.rem_euclid(p as i64) as u64;
    LocalForm::from_entries(p, complement).represents_class(e2, u2)
}

/// `p = 2`, `b1` a unit. Searches `x, y mod 2^(prec-1)` with `Q(x)` in the
/// class of `b1` and the projection `y - (B(x,y)/Q(x)) x` of norm in the class
/// of `b2`; both classes are decided modulo `2^prec`.
fn binary_search_2adic(coeffs: &[u64], b1: i64, b2: i64, prec: u32) -> bool {
    let m: u64 = 1 << prec;
    let half: u64 = 1 << (prec - 1);
    let k = coeffs.len();
    let a: Vec<u64> = coeffs.iter().map(|&c| c % m).collect();
    let b1m = b1.rem_euclid(8) as u64;
    let (t2, w2) = split_valuation_signed(2, b2);
    let w2m = w2.rem_euclid(8) as u64;
    // residues mod 2^(prec-1) up to sign
    let reps: Vec<u64> = (0..=half / 2).collect();
    let mut x = vec![0u64; k];
    let total = reps.len().pow(k as u32);
    for idx in 0..total {
        let mut r = idx;
        for xi in x.iter_mut() {
            *xi = reps[r % reps.len()];
            r /= reps.len();
        }
        let qx = a
            .iter()
            .zip(&x)
            .fold(0u64, |s, (&c, &xi)| (s + c * (xi * xi % m)) % m);
        if qx % 8 != b1m {
            continue;
        }
        let inv = inverse_mod_pow2(qx, m);
        // DP over y: state (Q(y) mod m, B(x,y) mod half)
        let mut reach = vec![false; (m * half) as usize];
        reach[0] = true;
        for j in 0..k {
            let mut next = vec![false; reach.len()];
            let cx = a[j] * x[j] % half;
            for s in 0..reach.len() {
                if !reach[s] {
                    continue;
                }
                let (q, bb) = (s as u64 / half, s as u64 % half);
                for y in 0..half {
                    let nq = (q + a[j] * (y * y % m)) % m;
                    let nb = (bb + cx * y) % half;
                    next[(nq * half + nb) as usize] = true;
                }
            }
            reach = next;
        }
        for s in 0..reach.len() {
            if !reach[s] {
                continue;
            }
            let (q, bb) = (s as u64 / half, s as u64 % half);
            let proj = (q + m - (bb * bb % m) * inv % m) % m;
            if proj == 0 {
                continue;
            }
            let v = proj.trailing_zeros();
            if v == t2 && (proj >> v) % 8 == w2m {
                return true;
            }
        }
    }
    false
}

fn inverse_mod_pow2(a: u64, m: u64) -> u64 {
    debug_assert!(a % 2 == 1);
    // Newton iteration doubles correct bits each round.
    let mut inv = 1u64;
    for _ in 0..7 {
        inv = inv.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(inv)));
    }
    inv % m
}

/// Stability at `p` for lattices of rank at least 4.
///
/// `p = 2`: `<1,3>` or `<1,7>` embeds in `L_2`. Odd `p`: `<1,-1>` embeds in
/// `L_p`, or `L_p ≅ <1, -Δ, p, -pΔ>` (two rank-2 Jordan blocks at scales 1 and
/// `p`, each of determinant class `-Δ`).
pub fn is_p_stable(lattice: &DiagonalLattice, p: u64) -> Result<bool> {
    check_prime(p)?;
    if lattice.rank() < 4 {
        return Err(Error::RankTooSmall {
            rank: lattice.rank(),
            needed: 4,
        });
    }
    if p == 2 {
        return Ok(represents_binary_locally(lattice, 2, 1, 3)?
            || represents_binary_locally(lattice, 2, 1, 7)?);
    }
    if represents_binary_locally(lattice, p, 1, -1)? {
        return Ok(true);
    }
    Ok(is_anisotropic_quaternary_shape(lattice, p))
}

fn is_anisotropic_quaternary_shape(lattice: &DiagonalLattice, p: u64) -> bool {
    if lattice.rank() != 4 {
        return false;
    }
    let form = LocalForm::new(p, lattice.coeffs());
    let mut vals: Vec<u32> = form.entries.iter().map(|e| e.0).collect();
    vals.sort_unstable();
    if vals != [0, 0, 1, 1] {
        return false;
    }
    let target = legendre(-(least_nonresidue(p) as i64), p);
    [0u32, 1].iter().all(|&scale| {
        let det = form
            .entries
            .iter()
            .filter(|e| e.0 == scale)
            .fold(1u64, |acc, e| acc * (e.1 % p) % p);
        legendre(det as i64, p) == target
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(c: &[u64]) -> DiagonalLattice {
        DiagonalLattice::new(c.iter().copied()).unwrap()
    }

    /// Brute force over residues mod p^k for a Hensel-safe precision.
    fn oracle_mod(coeffs: &[u64], n: u64, m: u64) -> bool {
        fn go(coeffs: &[u64], acc: u64, target: u64, m: u64) -> bool {
            match coeffs.split_first() {
                None => acc % m == target % m,
                Some((&c, rest)) => (0..m).any(|x| go(rest, (acc + c * x * x) % m, target, m)),
            }
        }
        go(coeffs, 0, n, m)
    }

    #[test]
    fn square_classes() {
        assert_eq!(square_class_of(2, 20).unwrap(), PadicSquareClass { p: 2, e: 2, u: 5 });
        assert_eq!(square_class_of(3, 9).unwrap(), PadicSquareClass { p: 3, e: 2, u: 1 });
        // 2 is a nonresidue mod 5 and Δ_5 = 2
        assert_eq!(square_class_of(5, 10).unwrap(), PadicSquareClass { p: 5, e: 1, u: 2 });
        assert_eq!(square_class_of(7, -1).unwrap().u, 3);
        assert_eq!(square_class_of(2, -1).unwrap().u, 7);
        assert_eq!(square_class_of(2, 0), Err(Error::ZeroInput));
        assert_eq!(square_class_of(4, 3), Err(Error::NotPrime(4)));
    }

    #[test]
    fn sums_of_three_squares_miss_seven_at_two() {
        // exhaust residues mod 8
        assert!(!oracle_mod(&[1, 1, 1], 7, 8));
        assert!(!locally_represents(&lat(&[1, 1, 1]), 2, 7).unwrap());
        assert!(!locally_represents(&lat(&[1, 1, 1]), 2, 28).unwrap());
        assert!(locally_represents(&lat(&[1, 1, 1]), 2, 14).unwrap());
        assert!(locally_represents(&lat(&[1, 1, 1, 7]), 2, 7).unwrap());
    }

    #[test]
    fn h1_represents_26_locally() {
        let h = lat(&[2, 3, 9, 36]);
        for p in h.bad_primes() {
            assert!(locally_represents(&h, p, 26).unwrap(), "p={p}");
        }
    }

    #[test]
    fn zero_and_nonprime() {
        assert!(locally_represents(&lat(&[3]), 2, 0).unwrap());
        assert_eq!(locally_represents(&lat(&[3]), 9, 1), Err(Error::NotPrime(9)));
    }

    #[test]
    fn unit_classes_exposed() {
        assert_eq!(unit_classes(2), vec![1, 3, 5, 7]);
        assert_eq!(unit_classes(3), vec![1, 2]);
        assert_eq!(unit_classes(7), vec![1, 3]);
    }

    #[test]
    fn example_lattice_at_two() {
        let set = LocalRepSet::compute(&lat(&[1, 48, 144, 144]), 2).unwrap();
        assert_eq!(set.units_at(0), vec![1]);
        assert_eq!(set.units_at(1), Vec::<u64>::new());
        assert_eq!(set.units_at(2), vec![1, 5]);
        assert_eq!(set.units_at(3), Vec::<u64>::new());
        for e in 4..30 {
            assert_eq!(set.units_at(e), vec![1, 3, 5, 7], "e={e}");
        }
        assert!(set.contains_ideal(4));
        assert!(!set.contains_ideal(3));
    }

    #[test]
    fn example_lattice_at_five_is_everything() {
        let set = LocalRepSet::compute(&lat(&[1, 48, 144, 144]), 5).unwrap();
        assert!(set.contains_ideal(0));
    }

    #[test]
    fn squares_at_three() {
        let set = LocalRepSet::compute(&lat(&[1]), 3).unwrap();
        for e in 0..20 {
            let expect = if e % 2 == 0 { vec![1] } else { vec![] };
            assert_eq!(set.units_at(e), expect, "e={e}");
        }
    }

    #[test]
    fn json_shape() {
        let set = LocalRepSet::compute(&lat(&[1]), 3).unwrap();
        let v = serde_json::to_value(set.to_json()).unwrap();
        assert_eq!(v["p"], 3);
        assert!(v["E"].is_u64());
        assert_eq!(v["classes"][0], serde_json::json!({"e": 0, "u": 1, "member": true}));
        assert_eq!(v["classes"][1], serde_json::json!({"e": 0, "u": 2, "member": false}));
    }

    #[test]
    fn contains_matches_class_lookup() {
        let l = lat(&[1, 2, 5, 5, 11]);
        for p in [2u64, 3, 5, 11] {
            let set = LocalRepSet::compute(&l, p).unwrap();
            for n in 1..3000u64 {
                assert_eq!(set.contains(n), locally_represents(&l, p, n).unwrap(), "p={p} n={n}");
            }
        }
    }

    #[test]
    fn descent_agrees_with_residue_oracle() {
        // For n coprime to p the answer is decided mod p^δ; brute force that.
        let cases: [&[u64]; 4] = [&[1, 1, 1], &[1, 3, 7], &[2, 5], &[3, 3, 7]];
        for c in cases {
            let l = lat(c);
            for p in [2u64, 3, 5, 7] {
                let m = p.pow(hensel_exp(p));
                for n in 1..200u64 {
                    if n % p == 0 || c.iter().any(|a| a % p == 0) {
                        continue;
                    }
                    assert_eq!(
                        locally_represents(&l, p, n).unwrap(),
                        oracle_mod(c, n, m),
                        "{c:?} p={p} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn certificates_verify() {
        let l = lat(&[2, 3, 9, 36]);
        for p in [2u64, 3] {
            for n in [26u64, 13 * 8, 5, 1152] {
                if let Some(c) = local_certificate(&l, p, n).unwrap() {
                    assert!(c.verify(&l, n), "p={p} n={n} {c:?}");
                }
            }
        }
        let c = local_certificate(&lat(&[1, 1, 1]), 2, 28).unwrap();
        assert!(c.is_none());
        let c = local_certificate(&lat(&[1, 1, 1]), 2, 12).unwrap().unwrap();
        assert!(c.verify(&lat(&[1, 1, 1]), 12));
        assert!(!c.verify(&lat(&[1, 1, 1]), 13));
    }

    #[test]
    fn redundancy_example_lattice() {
        let l = lat(&[1, 48, 144, 144]);
        assert!(locally_redundant(&l, 2, 144).unwrap());
        assert!(!locally_redundant(&l, 2, 8).unwrap());
        assert!(locally_redundant(&l, 2, 48).unwrap());
        assert!(locally_redundant(&l, 3, 144).unwrap());
        assert!(!locally_redundant(&l, 3, 48).unwrap());
        assert!(!locally_redundant(&lat(&[1]), 3, 1).unwrap());
    }

    #[test]
    fn binary_embeddings() {
        let four = lat(&[1, 1, 1, 1]);
        assert!(represents_binary_locally(&four, 2, 1, 3).unwrap());
        for p in [3u64, 5, 7, 11, 13] {
            assert!(represents_binary_locally(&four, p, 1, -1).unwrap(), "p={p}");
        }
        // <1> has no room for a second orthogonal vector
        assert!(!represents_binary_locally(&lat(&[1]), 3, 1, 1).unwrap());
        assert!(!represents_binary_locally(&lat(&[1]), 2, 1, 1).unwrap());
        assert!(matches!(
            represents_binary_locally(&four, 3, 3, 6),
            Err(Error::NonUnitBinary { .. })
        ));
    }

    #[test]
    fn stability() {
        assert!(is_p_stable(&lat(&[1, 1, 1, 1]), 2).unwrap());
        assert!(is_p_stable(&lat(&[1, 1, 1, 1]), 7).unwrap());
        assert!(is_p_stable(&lat(&[1, 2, 5, 5, 11]), 11).unwrap());
        assert!(is_p_stable(&lat(&[1, 2, 5, 5, 11]), 7).unwrap());
        assert!(matches!(
            is_p_stable(&lat(&[1, 1, 1]), 2),
            Err(Error::RankTooSmall { .. })
        ));
        // <1, Δ, p, pΔ> with -1 a square: p = 5, Δ = 2, -Δ ≡ 3 is a nonresidue too
        // <1,2,5,10>: blocks have det class 2 ≡ -Δ? -2 ≡ 3 mod 5, (3/5) = -1 = (2/5)
        let l = lat(&[1, 2, 5, 10]);
        assert!(is_anisotropic_quaternary_shape(&l, 5));
    }
    mod props {
        use super::*;
        use proptest::prelude::*;

        /// `n ∈ Q(L_p)` iff some `x` and index `i` have `ord(a_i x_i^2) = d`
        /// and `Q(x) ≡ n mod p^(d+δ)`; enumerate `x mod p^(ord(n)+δ)`.
        fn enumerate(coeffs: &[u64], p: u64, n: u64) -> bool {
            let (e, _) = split_valuation(p, n);
            let delta = hensel_exp(p);
            let m = p.pow(e + delta);
            let k = coeffs.len();
            let total = m.pow(k as u32);
            (0..total).any(|mut idx| {
                let x: Vec<u64> = (0..k)
                    .map(|_| {
                        let v = idx % m;
                        idx /= m;
                        v
                    })
                    .collect();
                let q = coeffs
                    .iter()
                    .zip(&x)
                    .fold(0u64, |s, (&a, &xi)| (s + a % m * (xi * xi % m)) % m);
                coeffs.iter().zip(&x).any(|(&a, &xi)| {
                    if xi == 0 {
                        return false;
                    }
                    let d = split_valuation(p, a).0 + 2 * split_valuation(p, xi).0;
                    d <= e && (q + m - n % m) % p.pow(d + delta) == 0
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]
            #[test]
            fn descent_matches_enumeration(
                coeffs in prop::collection::vec(1u64..60, 1..4),
                p in prop::sample::select(vec![2u64, 3, 5]),
                unit in 1u64..40,
                e in 0u32..3,
            ) {
                prop_assume!(unit % p != 0);
                prop_assume!(p == 2 || e < 2);
                let n = unit * p.pow(e);
                let l = DiagonalLattice::new(coeffs.clone()).unwrap();
                let fast = locally_represents(&l, p, n).unwrap();
                prop_assert_eq!(fast, enumerate(&coeffs, p, n));
                if let Some(c) = local_certificate(&l, p, n).unwrap() {
                    prop_assert!(fast && c.verify(&l, n));
                } else {
                    prop_assert!(!fast);
                }
            }
        }
    }
}
