//! Exact bitmaps of `Q(L) ∩ [0, B]` and a shared cache for them.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::DiagonalLattice;

/// Largest bound accepted by default: 2^31 bits, i.e. 256 MiB per sieve.
pub const DEFAULT_MAX_BOUND: u64 = 1 << 31;

const MAGIC: &str = "REGLAT-SIEVE v1";

/// `bits[n] = 1` iff `n = Σ a_i x_i^2` for some integers `x_i`, for `0 <= n <= B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepSieve {
    lattice: DiagonalLattice,
    bound: u64,
    words: Vec<u64>,
}

fn word_count(bound: u64) -> usize {
    (bound / 64 + 1) as usize
}

impl RepSieve {
    pub fn build(lattice: &DiagonalLattice, bound: u64) -> Result<Self> {
        Self::build_with_max(lattice, bound, DEFAULT_MAX_BOUND)
    }

    pub fn build_with_max(lattice: &DiagonalLattice, bound: u64, max: u64) -> Result<Self> {
        check_bound(bound, max)?;
        let coeffs = lattice.coeffs();
        let mut words = vec![0u64; word_count(bound)];
        let a = coeffs[0];
        let mut x = 0u64;
        while let Some(v) = a.checked_mul(x * x).filter(|&v| v <= bound) {
            words[(v / 64) as usize] |= 1 << (v % 64);
            x += 1;
        }
        let mut sieve = Self {
            lattice: DiagonalLattice::new([a]).expect("positive coefficient"),
            bound,
            words,
        };
        for &a in &coeffs[1..] {
            sieve = sieve.extend(a);
        }
        Ok(sieve)
    }

    /// The sieve of `L ⊥ <a>` from the sieve of `L`.
    pub fn extend(&self, a: u64) -> Self {
        assert!(a > 0, "coefficient must be positive");
        let mut words = self.words.clone();
        let mut x = 1u64;
        while let Some(shift) = a.checked_mul(x * x).filter(|&v| v <= self.bound) {
            or_shifted(&mut words, &self.words, shift);
            x += 1;
        }
        mask_tail(&mut words, self.bound);
        Self {
            lattice: self.lattice.insert(a).expect("positive coefficient"),
            bound: self.bound,
            words,
        }
    }

    pub fn lattice(&self) -> &DiagonalLattice {
        &self.lattice
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Membership; `None` above the bound.
    #[inline]
    pub fn get(&self, n: u64) -> Option<bool> {
        (n <= self.bound).then(|| self.words[(n / 64) as usize] >> (n % 64) & 1 == 1)
    }

    /// Membership for `n <= bound`.
    ///
    /// # Panics
    /// If `n` exceeds the bound.
    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        self.get(n).expect("query above sieve bound")
    }

    /// Integers in `[0, B]` not represented, ascending.
    pub fn missing(&self) -> impl Iterator<Item = u64> + '_ {
        let bound = self.bound;
        self.words.iter().enumerate().flat_map(move |(i, &w)| {
            let mut inv = !w;
            std::iter::from_fn(move || {
                if inv == 0 {
                    return None;
                }
                let t = inv.trailing_zeros() as u64;
                inv &= inv - 1;
                Some(i as u64 * 64 + t)
            })
            .take_while(move |&n| n <= bound)
        })
    }

    pub fn count_represented(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Same bound and the same represented set.
    pub fn same_set(&self, other: &Self) -> bool {
        self.bound == other.bound && self.words == other.words
    }

    /// Least `n <= B` where the two sieves differ.
    pub fn first_difference(&self, other: &Self) -> Option<u64> {
        let bound = self.bound.min(other.bound);
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .find(|(_, (a, b))| a != b)
            .map(|(i, (a, b))| i as u64 * 64 + (a ^ b).trailing_zeros() as u64)
            .filter(|&n| n <= bound)
    }

    /// Whether adjoining `<a>` leaves the represented set in `[0, B]` unchanged.
    /// Cheaper than [`Self::extend`] when the answer is negative.
    pub fn extension_is_redundant(&self, a: u64) -> bool {
        self.missing().all(|m| {
            let mut x = 1u64;
            while let Some(v) = a.checked_mul(x * x).filter(|&v| v <= m) {
                if self.contains(m - v) {
                    return false;
                }
                x += 1;
            }
            true
        })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "{MAGIC}\n{}\n{}\n", self.lattice.to_text(), self.bound)?;
        let nbytes = (self.bound / 8 + 1) as usize;
        let mut bytes = Vec::with_capacity(self.words.len() * 8);
        for word in &self.words {
            bytes.extend_from_slice(&word.to_le_bytes());
        }
        w.write_all(&bytes[..nbytes])
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut line = String::new();
        let mut next_line = |r: &mut BufReader<R>| -> Result<String> {
            line.clear();
            r.read_line(&mut line)
                .map_err(|e| Error::Cache(e.to_string()))?;
            Ok(line.trim_end_matches('\n').to_string())
        };
        if next_line(&mut r)? != MAGIC {
            return Err(Error::Cache("bad header".into()));
        }
        let lattice: DiagonalLattice = next_line(&mut r)?.parse()?;
        let bound: u64 = next_line(&mut r)?
            .parse()
            .map_err(|_| Error::Cache("bad bound".into()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| Error::Cache(e.to_string()))?;
        if bytes.len() != (bound / 8 + 1) as usize {
            return Err(Error::Cache("truncated bitmap".into()));
        }
        bytes.resize(word_count(bound) * 8, 0);
        let mut words: Vec<u64> = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        mask_tail(&mut words, bound);
        Ok(Self {
            lattice,
            bound,
            words,
        })
    }
}

fn check_bound(bound: u64, max: u64) -> Result<()> {
    if bound > max {
        return Err(Error::BoundTooLarge { bound, max });
    }
    Ok(())
}

/// `dst |= src << shift` over a bitmap.
fn or_shifted(dst: &mut [u64], src: &[u64], shift: u64) {
    let ws = (shift / 64) as usize;
    let bs = (shift % 64) as u32;
    let n = dst.len();
    if ws >= n {
        return;
    }
    if bs == 0 {
        for (d, s) in dst[ws..].iter_mut().zip(src) {
            *d |= *s;
        }
    } else {
        dst[ws] |= src[0] << bs;
        for i in ws + 1..n {
            let j = i - ws;
            dst[i] |= (src[j] << bs) | (src[j - 1] >> (64 - bs));
        }
    }
}

fn mask_tail(words: &mut [u64], bound: u64) {
    let used = bound % 64 + 1;
    if used < 64 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << used) - 1;
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub memory_hits: u64,
    pub disk_hits: u64,
    pub builds: u64,
}

/// Concurrent read-mostly cache of sieves keyed by `(coefficients, B)`, with
/// an optional directory of sieve files.
#[derive(Debug, Default)]
pub struct SieveCache {
    map: RwLock<HashMap<(DiagonalLattice, u64), Arc<RepSieve>>>,
    dir: Option<PathBuf>,
    max_bound: Option<u64>,
    memory_hits: AtomicU64,
    disk_hits: AtomicU64,
    builds: AtomicU64,
}

impl SieveCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: Some(dir),
            ..Self::default()
        })
    }

    pub fn set_max_bound(&mut self, max: u64) {
        self.max_bound = Some(max);
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn max_bound(&self) -> u64 {
        self.max_bound.unwrap_or(DEFAULT_MAX_BOUND)
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            memory_hits: self.memory_hits.load(Ordering::Relaxed),
            disk_hits: self.disk_hits.load(Ordering::Relaxed),
            builds: self.builds.load(Ordering::Relaxed),
        }
    }

    fn file_for(&self, lattice: &DiagonalLattice, bound: u64) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| {
            d.join(format!(
                "{}_{bound}.sieve",
                lattice.to_text().replace(',', "-")
            ))
        })
    }

    fn lookup(&self, lattice: &DiagonalLattice, bound: u64) -> Option<Arc<RepSieve>> {
        let key = (lattice.clone(), bound);
        if let Some(s) = self.map.read().expect("cache lock").get(&key) {
            self.memory_hits.fetch_add(1, Ordering::Relaxed);
            return Some(Arc::clone(s));
        }
        let path = self.file_for(lattice, bound)?;
        let file = fs::File::open(path).ok()?;
        let sieve = RepSieve::read_from(file).ok()?;
        if sieve.lattice() != lattice || sieve.bound() != bound {
            return None;
        }
        self.disk_hits.fetch_add(1, Ordering::Relaxed);
        let sieve = Arc::new(sieve);
        self.map
            .write()
            .expect("cache lock")
            .insert(key, Arc::clone(&sieve));
        Some(sieve)
    }

    fn store(&self, sieve: Arc<RepSieve>) -> Result<()> {
        if let Some(path) = self.file_for(sieve.lattice(), sieve.bound()) {
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            let write = || -> std::io::Result<()> {
                let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
                sieve.write_to(&mut f)?;
                f.flush()?;
                drop(f);
                fs::rename(&tmp, &path)
            };
            write().map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
        }
        self.map
            .write()
            .expect("cache lock")
            .insert((sieve.lattice().clone(), sieve.bound()), sieve);
        Ok(())
    }

    /// Cached sieve, building (and caching every prefix) on a miss.
    pub fn get(&self, lattice: &DiagonalLattice, bound: u64) -> Result<Arc<RepSieve>> {
        check_bound(bound, self.max_bound())?;
        if let Some(s) = self.lookup(lattice, bound) {
            return Ok(s);
        }
        let sieve = self.build_from_prefix(lattice, bound, true)?;
        let sieve = Arc::new(sieve);
        self.store(Arc::clone(&sieve))?;
        Ok(sieve)
    }

    /// Sieve for `lattice` built from the cached sieve of all but its largest
    /// coefficient; the result itself is not cached.
    pub fn get_uncached(&self, lattice: &DiagonalLattice, bound: u64) -> Result<RepSieve> {
        check_bound(bound, self.max_bound())?;
        if let Some(s) = self.lookup(lattice, bound) {
            return Ok((*s).clone());
        }
        self.build_from_prefix(lattice, bound, true)
    }

    fn build_from_prefix(
        &self,
        lattice: &DiagonalLattice,
        bound: u64,
        cache_prefix: bool,
    ) -> Result<RepSieve> {
        self.builds.fetch_add(1, Ordering::Relaxed);
        if lattice.rank() == 1 {
            return RepSieve::build_with_max(lattice, bound, self.max_bound());
        }
        let last = *lattice.coeffs().last().expect("non-empty");
        let prefix = lattice.remove_index(lattice.rank())?;
        let base = if cache_prefix {
            self.get(&prefix, bound)?
        } else {
            Arc::new(RepSieve::build_with_max(&prefix, bound, self.max_bound())?)
        };
        Ok(base.extend(last))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(c: &[u64]) -> DiagonalLattice {
        DiagonalLattice::new(c.iter().copied()).unwrap()
    }

    fn naive(coeffs: &[u64], n: u64) -> bool {
        match coeffs.split_first() {
            None => n == 0,
            Some((&a, rest)) => {
                let mut x = 0u64;
                while a * x * x <= n {
                    if naive(rest, n - a * x * x) {
                        return true;
                    }
                    x += 1;
                }
                false
            }
        }
    }

    #[test]
    fn squares() {
        let s = RepSieve::build(&lat(&[1]), 10).unwrap();
        let members: Vec<u64> = (0..=10).filter(|&n| s.contains(n)).collect();
        assert_eq!(members, vec![0, 1, 4, 9]);
        assert_eq!(s.get(11), None);
    }

    #[test]
    fn two_three_six_complement() {
        let s = RepSieve::build(&lat(&[2, 3, 6]), 50).unwrap();
        let missing: Vec<u64> = s.missing().filter(|&n| n > 0).collect();
        let expect = vec![
            1, 4, 7, 10, 13, 15, 16, 19, 22, 23, 25, 28, 31, 34, 37, 39, 40, 43, 46, 47, 49,
        ];
        assert_eq!(missing, expect);
    }

    #[test]
    fn bound_budget() {
        assert!(matches!(
            RepSieve::build_with_max(&lat(&[1]), 1000, 999),
            Err(Error::BoundTooLarge { bound: 1000, max: 999 })
        ));
    }

    #[test]
    fn redundant_extension_check() {
        let s = RepSieve::build(&lat(&[1, 1, 1, 1]), 2000).unwrap();
        assert!(s.extension_is_redundant(4));
        let s = RepSieve::build(&lat(&[1]), 100).unwrap();
        assert!(!s.extension_is_redundant(1));
        let s = RepSieve::build(&lat(&[1, 48, 144, 144]), 20000).unwrap();
        assert!(s.extension_is_redundant(288));
        assert!(!s.extension_is_redundant(48));
    }

    #[test]
    fn file_roundtrip() {
        for bound in [0u64, 7, 63, 64, 65, 1000] {
            let s = RepSieve::build(&lat(&[1, 2, 5]), bound).unwrap();
            let mut buf = Vec::new();
            s.write_to(&mut buf).unwrap();
            let header = format!("REGLAT-SIEVE v1\n1,2,5\n{bound}\n");
            assert!(buf.starts_with(header.as_bytes()));
            assert_eq!(buf.len(), header.len() + (bound / 8 + 1) as usize);
            let back = RepSieve::read_from(&buf[..]).unwrap();
            assert_eq!(back, s);
        }
        assert!(RepSieve::read_from(&b"nope\n"[..]).is_err());
    }

    #[test]
    fn cache_reuses_and_persists() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SieveCache::with_dir(dir.path()).unwrap();
        let l = lat(&[1, 2, 5, 5]);
        let a = cache.get(&l, 5000).unwrap();
        let b = cache.get(&l, 5000).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert!(cache.stats().memory_hits >= 1);
        let fresh = SieveCache::with_dir(dir.path()).unwrap();
        let c = fresh.get(&l, 5000).unwrap();
        assert_eq!(*c, *a);
        assert_eq!(fresh.stats().disk_hits, 1);
        assert_eq!(fresh.stats().builds, 0);
        let d = cache.get_uncached(&lat(&[1, 2, 5, 5, 11]), 5000).unwrap();
        assert_eq!(d, RepSieve::build(&lat(&[1, 2, 5, 5, 11]), 5000).unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn matches_naive_search(coeffs in prop::collection::vec(1u64..40, 1..5)) {
                let l = DiagonalLattice::new(coeffs.clone()).unwrap();
                let s = RepSieve::build(&l, 500).unwrap();
                for n in 0..=500 {
                    prop_assert_eq!(s.contains(n), naive(l.coeffs(), n), "n={}", n);
                }
                prop_assert!(l.coeffs().iter().all(|&a| a > 500 || s.contains(a)));
            }

            #[test]
            fn insertion_is_monotone(coeffs in prop::collection::vec(1u64..40, 1..4), m in 1u64..60) {
                let l = DiagonalLattice::new(coeffs).unwrap();
                let s = RepSieve::build(&l, 400).unwrap();
                let t = s.extend(m);
                for n in 0..=400 {
                    prop_assert!(!s.contains(n) || t.contains(n));
                }
            }
        }
    }
}
