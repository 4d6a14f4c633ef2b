//! Exact integer plumbing: primality, factorization, Kronecker symbols and
//! the discriminant bookkeeping every other module leans on.
//!
//! The Kronecker symbol follows the usual extension of the Jacobi symbol:
//! `(a/2)` is 0 for even `a` and `±1` according to `a mod 8` (`+1` for
//! `±1 mod 8`, `-1` for `±3 mod 8`), and `(a/-1)` is the sign of `a`.
//! For a fundamental discriminant `d` and a prime `q`, `(d/q)` is then
//! `1`, `-1` or `0` exactly when `q` splits, is inert, or ramifies in
//! `Q(sqrt d)`, including `q = 2`.

use crate::error::{domain, Result};

/// Largest bound for which Miller-Rabin with the first thirteen prime bases
/// (2 through 41) is known to be deterministic.
pub const MILLER_RABIN_BOUND: u128 = 3_317_044_064_679_887_385_961_981;

const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    value: u128,
    factors: Vec<(u128, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u128 {
        self.value
    }

    /// `(prime, exponent)` pairs, primes strictly increasing.
    pub fn factors(&self) -> &[(u128, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    if m <= 1 << 32 && a < m && b < m {
        return a * b % m;
    }
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// `a * b mod m` for `m` below 2^82, without a 256-bit intermediate.
fn mul_mod_wide(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return mul_mod(a as u64, b as u64, m as u64) as u128;
    }
    debug_assert!(m < 1u128 << 82);
    let a = a % m;
    let b = b % m;
    // Horner over 40-bit limbs of b: every partial product stays below 2^123.
    const LIMB: u32 = 40;
    let mask = (1u128 << LIMB) - 1;
    let mut acc = 0u128;
    for shift in (0..3).rev() {
        let limb = (b >> (shift * LIMB)) & mask;
        acc = ((acc << LIMB) % m + a * limb % m) % m;
    }
    acc
}

fn pow_mod_wide(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1u128 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_wide(acc, base, m);
        }
        base = mul_mod_wide(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test, valid for every `n < MILLER_RABIN_BOUND`.
pub fn is_prime(n: u128) -> bool {
    assert!(
        n < MILLER_RABIN_BOUND,
        "is_prime: {n} exceeds the deterministic Miller-Rabin range"
    );
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        let p = p as u128;
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'bases: for &a in &MR_BASES {
        let mut x = pow_mod_wide(a as u128, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_wide(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub fn is_prime_u64(n: u64) -> bool {
    is_prime(n as u128)
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Brent's variant of Pollard's rho; `n` odd composite. Deterministic: the
/// polynomial constant runs through 1, 2, 3, ...
fn pollard_brent(n: u128) -> u128 {
    for c in 1u128.. {
        let f = |x: u128| (mul_mod_wide(x, x, n) + c) % n;
        let (mut y, mut r, mut q) = (2u128, 1u64, 1u128);
        let (mut g, mut x, mut ys) = (1u128, 0u128, 0u128);
        const BLOCK: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BLOCK.min(r - k) {
                    y = f(y);
                    q = mul_mod_wide(q, x.abs_diff(y), n);
                }
                g = gcd_u128(q, n);
                k += BLOCK;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u128(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

fn collect_factors(n: u128, out: &mut Vec<u128>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    collect_factors(d, out);
    collect_factors(n / d, out);
}

/// Complete prime factorization: trial division by small primes, then
/// Pollard-Brent on the cofactor.
pub fn factorize(n: u128) -> Result<Factorization> {
    if n == 0 {
        return domain("factorize: n must be positive");
    }
    if n >= MILLER_RABIN_BOUND {
        return domain(format!("factorize: {n} is beyond the supported range"));
    }
    let mut rest = n;
    let mut primes: Vec<u128> = Vec::new();
    for p in std::iter::once(2u128).chain((3u128..1000).step_by(2)) {
        if p * p > rest {
            break;
        }
        while rest % p == 0 {
            primes.push(p);
            rest /= p;
        }
    }
    if rest > 1 {
        if rest < 1_000_000 {
            // Trial division above already removed every prime below 1000.
            primes.push(rest);
        } else {
            collect_factors(rest, &mut primes);
        }
    }
    primes.sort_unstable();
    let mut factors: Vec<(u128, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Ok(Factorization { value: n, factors })
}

/// Factorization of a machine-sized value as `(prime, exponent)` pairs.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    factorize(n as u128)
        .expect("u64 inputs are always in range")
        .factors
        .into_iter()
        .map(|(p, e)| (p as u64, e))
        .collect()
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i64, n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut sign = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        (a, n) = (n % a, a);
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Kronecker symbol `(a/n)`.
pub fn kronecker(a: i64, n: i64) -> Result<i8> {
    if n == 0 {
        return domain("kronecker: n must be nonzero");
    }
    let mut sign = 1i8;
    if n < 0 && a < 0 {
        sign = -1;
    }
    let mut n = n.unsigned_abs();
    let tz = n.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return Ok(0);
        }
        if tz % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
        n >>= tz;
    }
    Ok(sign * jacobi(a, n))
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

pub fn is_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

/// Splits `n = core * root^2` with `core` squarefree; the sign stays on `core`.
pub fn square_split(n: i64) -> (i64, u64) {
    assert!(n != 0, "square_split: zero has no squarefree part");
    let mut core: i64 = n.signum();
    let mut root: u64 = 1;
    for (p, e) in factor_u64(n.unsigned_abs()) {
        if e % 2 == 1 {
            core *= p as i64;
        }
        root *= p.pow(e / 2);
    }
    (core, root)
}

pub fn is_discriminant(d: i64) -> bool {
    d != 0 && matches!(d.rem_euclid(4), 0 | 1)
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    matches!(fundamental_discriminant(d), Ok((_, 1)))
}

/// Writes a discriminant as `d = f^2 * d_K` with `d_K` fundamental.
pub fn fundamental_discriminant(d: i64) -> Result<(i64, u64)> {
    if !is_discriminant(d) {
        return domain(format!(
            "{d} is not a discriminant (must be nonzero, 0 or 1 mod 4)"
        ));
    }
    let (core, root) = square_split(d);
    if core.rem_euclid(4) == 1 {
        Ok((core, root))
    } else {
        // core = 2 or 3 mod 4, so 4 | d forces 2 | root.
        Ok((4 * core, root / 2))
    }
}

/// All primes `p <= n`, by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest-prime-factor table on `0..=limit`.
#[derive(Debug, Clone)]
pub struct SpfTable {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl SpfTable {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                let ip = i * p as usize;
                if p > spf[i] || ip > limit {
                    break;
                }
                spf[ip] = p;
            }
        }
        SpfTable { spf, primes }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    #[inline]
    pub fn spf(&self, n: usize) -> u32 {
        self.spf[n]
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }
}

/// Square root of `a` modulo an odd prime `p` (Tonelli-Shanks).
/// `a` must be a nonzero quadratic residue.
pub fn sqrt_mod_prime(a: u64, p: u64) -> u64 {
    let a = a % p;
    debug_assert!(a != 0 && jacobi(a as i64, p) == 1);
    if p % 4 == 3 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while jacobi(z as i64, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}
