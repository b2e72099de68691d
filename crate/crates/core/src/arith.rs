//! Small integer helpers: primality, valuations, Legendre symbols.

/// Deterministic primality test by trial division. Inputs here are primes
/// dividing lattice coefficients or user-supplied primes, both small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

/// Primes up to and including `limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&q| is_prime(q)).collect()
}

/// Distinct prime factors of `n`, ascending. `n = 0` and `n = 1` have none.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `(ord_p(n), n / p^ord_p(n))` for nonzero `n`.
pub fn split_valuation(p: u64, mut n: u64) -> (u32, u64) {
    debug_assert!(n != 0 && p >= 2);
    if p == 2 {
        let e = n.trailing_zeros();
        return (e, n >> e);
    }
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    (e, n)
}

/// `ord_p(n)` for nonzero `n`.
pub fn ord(p: u64, n: u64) -> u32 {
    split_valuation(p, n).0
}

/// Signed variant of [`split_valuation`]; the unit part keeps the sign.
pub fn split_valuation_signed(p: u64, n: i64) -> (u32, i64) {
    debug_assert!(n != 0);
    let (e, u) = split_valuation(p, n.unsigned_abs());
    let u = u as i64;
    (e, if n < 0 { -u } else { u })
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut acc: u128 = 1;
    let mut b = (base % m) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Legendre symbol `(a/p)` for an odd prime `p`; returns -1, 0 or 1.
pub fn legendre(a: i64, p: u64) -> i8 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Smallest positive quadratic nonresidue modulo the odd prime `p`.
pub fn least_nonresidue(p: u64) -> u64 {
    debug_assert!(p > 2);
    (2..p)
        .find(|&a| legendre(a as i64, p) == -1)
        .expect("every odd prime has a nonresidue")
}

/// `a * b mod m` without overflow for any `m < 2^127`.
pub fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    let (mut a, mut b) = (a % m, b % m);
    if let Some(v) = a.checked_mul(b) {
        return v % m;
    }
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a + a) % m;
        b >>= 1;
    }
    acc
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.saturating_mul(x) > n {
        x -= 1;
    }
    while (x + 1).saturating_mul(x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}
