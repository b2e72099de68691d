//! C ABI for `reglat`.
//!
//! Lattices are opaque handles created by [`reglat_lattice_new`] and released
//! with [`reglat_lattice_free`]. Every fallible call returns a
//! [`ReglatStatus`] and writes its result through an out-pointer; strings
//! returned to the caller are released with [`reglat_string_free`].

use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use reglat::global::{genus_represents, regular_verdict, represents, t_value, Psi};
use reglat::padic::{locally_represents, LocalRepSet};
use reglat::transforms::{lambda_transform, watson_case_for};
use reglat::{DiagonalLattice, Error};

/// Opaque lattice handle.
pub struct ReglatLattice(DiagonalLattice);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReglatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPrime = 3,
    NotPrimitive = 4,
    RankTooSmall = 5,
    BoundTooLarge = 6,
    NoCase = 7,
    Unstable = 8,
    Overflow = 9,
    Panic = 10,
}

impl From<&Error> for ReglatStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NotPrime(_) => Self::NotPrime,
            Error::NotPrimitive(_) => Self::NotPrimitive,
            Error::RankTooSmall { .. } => Self::RankTooSmall,
            Error::BoundTooLarge { .. } => Self::BoundTooLarge,
            Error::CaseMismatch { .. } => Self::NoCase,
            Error::StabilityNotReached { .. }
            | Error::PrecisionUnstable { .. }
            | Error::PsiUnbounded(_) => Self::Unstable,
            _ => Self::InvalidArgument,
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), ReglatStatus>) -> ReglatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ReglatStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => ReglatStatus::Panic,
    }
}

fn lift<T>(r: reglat::Result<T>) -> Result<T, ReglatStatus> {
    r.map_err(|e| ReglatStatus::from(&e))
}

unsafe fn lattice_ref<'a>(l: *const ReglatLattice) -> Result<&'a DiagonalLattice, ReglatStatus> {
    l.as_ref().map(|h| &h.0).ok_or(ReglatStatus::NullPointer)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), ReglatStatus> {
    if out.is_null() {
        return Err(ReglatStatus::NullPointer);
    }
    out.write(v);
    Ok(())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn reglat_status_message(status: ReglatStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        ReglatStatus::Ok => b"ok\0",
        ReglatStatus::NullPointer => b"null pointer argument\0",
        ReglatStatus::InvalidArgument => b"invalid argument\0",
        ReglatStatus::NotPrime => b"argument is not a prime\0",
        ReglatStatus::NotPrimitive => b"lattice is not primitive\0",
        ReglatStatus::RankTooSmall => b"lattice rank too small\0",
        ReglatStatus::BoundTooLarge => b"bound exceeds the sieve budget\0",
        ReglatStatus::NoCase => b"no transformation case applies\0",
        ReglatStatus::Unstable => b"local computation did not stabilize\0",
        ReglatStatus::Overflow => b"result does not fit in 64 bits\0",
        ReglatStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Creates a lattice from `len` positive coefficients (any order).
///
/// # Safety
/// `coeffs` must point to `len` readable `u64` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn reglat_lattice_new(
    coeffs: *const u64,
    len: usize,
    out: *mut *mut ReglatLattice,
) -> ReglatStatus {
    guard(|| {
        if coeffs.is_null() || out.is_null() {
            return Err(ReglatStatus::NullPointer);
        }
        let slice = std::slice::from_raw_parts(coeffs, len);
        let l = lift(DiagonalLattice::new(slice.iter().copied()))?;
        write(out, Box::into_raw(Box::new(ReglatLattice(l))))
    })
}

/// # Safety
/// `l` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn reglat_lattice_free(l: *mut ReglatLattice) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Rank of the lattice, 0 for a null handle.
///
/// # Safety
/// `l` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn reglat_lattice_rank(l: *const ReglatLattice) -> usize {
    lattice_ref(l).map_or(0, |l| l.rank())
}

/// Copies up to `cap` sorted coefficients into `buf`; `*written` receives the rank.
///
/// # Safety
/// `buf` must have room for `cap` values; `l` and `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn reglat_lattice_coeffs(
    l: *const ReglatLattice,
    buf: *mut u64,
    cap: usize,
    written: *mut usize,
) -> ReglatStatus {
    guard(|| {
        let l = lattice_ref(l)?;
        if buf.is_null() && cap > 0 {
            return Err(ReglatStatus::NullPointer);
        }
        let c = l.coeffs();
        let n = c.len().min(cap);
        if n > 0 {
            ptr::copy_nonoverlapping(c.as_ptr(), buf, n);
        }
        write(written, c.len())
    })
}

/// Product of the coefficients.
///
/// # Safety
/// `l` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn reglat_lattice_discriminant(
    l: *const ReglatLattice,
    out: *mut u64,
) -> ReglatStatus {
    guard(|| {
        let d = lattice_ref(l)?
            .checked_discriminant()
            .and_then(|d| u64::try_from(d).ok())
            .ok_or(ReglatStatus::Overflow)?;
        write(out, d)
    })
}

/// # Safety
/// `l` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn reglat_locally_represents(
    l: *const ReglatLattice,
    p: u64,
    n: u64,
    out: *mut bool,
) -> ReglatStatus {
    guard(|| {
        let r = lift(locally_represents(lattice_ref(l)?, p, n))?;
        write(out, r)
    })
}

/// # Safety
/// `l` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn reglat_genus_represents(
    l: *const ReglatLattice,
    n: u64,
    out: *mut bool,
) -> ReglatStatus {
    guard(|| {
        let r = lift(genus_represents(lattice_ref(l)?, n))?;
        write(out, r)
    })
}

/// # Safety
/// `l` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn reglat_represents(
    l: *const ReglatLattice,
    n: u64,
    out: *mut bool,
) -> ReglatStatus {
    guard(|| write(out, represents(lattice_ref(l)?, n)))
}

/// Searches `[1, bound]` for an integer represented locally but not globally.
/// `*refuted_at` is that integer, or 0 when none exists.
///
/// # Safety
/// `l` must be a live handle and `refuted_at` writable.
#[no_mangle]
pub unsafe extern "C" fn reglat_regular_verdict(
    l: *const ReglatLattice,
    bound: u64,
    refuted_at: *mut u64,
) -> ReglatStatus {
    guard(|| {
        let v = lift(regular_verdict(lattice_ref(l)?, bound))?;
        write(refuted_at, v.refuted_at().unwrap_or(0))
    })
}

/// Least integer in `[1, bound]` represented by the genus but not the
/// lattice, or 0 when none exists.
///
/// # Safety
/// `l` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn reglat_t_value(
    l: *const ReglatLattice,
    bound: u64,
    out: *mut u64,
) -> ReglatStatus {
    guard(|| {
        let v = match lift(t_value(lattice_ref(l)?, bound))? {
            Psi::Value(v) => v,
            Psi::ExceedsBound(_) => 0,
        };
        write(out, v)
    })
}

/// Watson transformation at `p` using the first applicable case.
///
/// # Safety
/// `l` must be a live handle and `out` writable; the new handle is owned by
/// the caller.
#[no_mangle]
pub unsafe extern "C" fn reglat_lambda(
    l: *const ReglatLattice,
    p: u64,
    out: *mut *mut ReglatLattice,
) -> ReglatStatus {
    guard(|| {
        let l = lattice_ref(l)?;
        let case = lift(watson_case_for(l, p))?.ok_or(ReglatStatus::NoCase)?;
        let t = lift(lambda_transform(l, case))?;
        write(out, Box::into_raw(Box::new(ReglatLattice(t))))
    })
}

/// Local representation table at `p` as a JSON string.
///
/// # Safety
/// `l` must be a live handle and `out` writable; free the string with
/// [`reglat_string_free`].
#[no_mangle]
pub unsafe extern "C" fn reglat_local_rep_set_json(
    l: *const ReglatLattice,
    p: u64,
    out: *mut *mut c_char,
) -> ReglatStatus {
    guard(|| {
        let set = lift(LocalRepSet::compute(lattice_ref(l)?, p))?;
        let text = serde_json::to_string(&set.to_json()).map_err(|_| ReglatStatus::Panic)?;
        let c = CString::new(text).map_err(|_| ReglatStatus::Panic)?;
        write(out, c.into_raw())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn reglat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
