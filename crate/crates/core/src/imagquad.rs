//! Imaginary quadratic orders: class numbers, class groups under Gauss
//! composition, unit counts and principal-ideal generators.
//!
//! Class numbers of fundamental discriminants are computed by counting
//! reduced forms `(a, b, c)`. For `4a^2 <= |d|` every residue `b` in
//! `(-a, a]` with `b^2 = d mod 4a` yields a reduced form, so those rows are
//! counted by a multiplicative formula in the Kronecker character; only the
//! thin band `|d|/4 < a^2 <= |d|/3` needs explicit square roots of `d`.
//! The naive enumeration is kept alongside as [`reduced_forms`].

use std::collections::HashMap;
use std::sync::OnceLock;

use dashmap::DashMap;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{
    factor_u64, fundamental_discriminant, is_discriminant, isqrt, jacobi, sqrt_mod_prime, SpfTable,
};
use crate::classfield::{staircase_relations, FiniteAbelianGroup};
use crate::error::{domain, Error, Result};

/// How a rational prime decomposes in a quadratic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimeBehavior {
    Split,
    Inert,
    Ramified,
}

/// Behaviour of the prime `q` in `Q(sqrt d)` for a discriminant `d` that is
/// not a square. Works directly on `d`, without computing its fundamental
/// part: powers of `q^2` are stripped locally.
pub fn prime_behavior(d: i64, q: u64) -> PrimeBehavior {
    debug_assert!(is_discriminant(d));
    let mut x = d;
    if q == 2 {
        while x % 4 == 0 && matches!((x / 4).rem_euclid(4), 0 | 1) {
            x /= 4;
        }
        if x % 2 == 0 {
            return PrimeBehavior::Ramified;
        }
        return if x.rem_euclid(8) == 1 {
            PrimeBehavior::Split
        } else {
            PrimeBehavior::Inert
        };
    }
    let q = q as i64;
    let q2 = q * q;
    while x % q2 == 0 {
        x /= q2;
    }
    if x % q == 0 {
        return PrimeBehavior::Ramified;
    }
    match jacobi(x, q as u64) {
        1 => PrimeBehavior::Split,
        _ => PrimeBehavior::Inert,
    }
}

/// An order in a quadratic field, by fundamental discriminant and conductor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadOrder {
    d_k: i64,
    conductor: u64,
}

impl QuadOrder {
    pub fn new(d_k: i64, conductor: u64) -> Result<Self> {
        if d_k == 1 || !matches!(fundamental_discriminant(d_k), Ok((_, 1))) {
            return domain(format!("{d_k} is not a fundamental discriminant"));
        }
        if conductor == 0 {
            return domain("conductor must be positive");
        }
        let order = QuadOrder { d_k, conductor };
        order.checked_disc()?;
        Ok(order)
    }

    /// For callers that obtained `d_k` from [`fundamental_discriminant`].
    pub(crate) fn new_unchecked(d_k: i64, conductor: u64) -> Self {
        QuadOrder { d_k, conductor }
    }

    pub fn from_disc(disc: i64) -> Result<Self> {
        let (d_k, f) = fundamental_discriminant(disc)?;
        Self::new(d_k, f)
    }

    pub fn maximal(d_k: i64) -> Result<Self> {
        Self::new(d_k, 1)
    }

    pub fn d_k(&self) -> i64 {
        self.d_k
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    fn checked_disc(&self) -> Result<i64> {
        (self.conductor as i64)
            .checked_mul(self.conductor as i64)
            .and_then(|f2| f2.checked_mul(self.d_k))
            .ok_or(Error::Overflow("order discriminant"))
    }

    pub fn disc(&self) -> i64 {
        self.checked_disc().expect("validated at construction")
    }

    pub fn is_imaginary(&self) -> bool {
        self.d_k < 0
    }
}

/// A binary quadratic form `a x^2 + b xy + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadraticForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadraticForm { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// The principal form of discriminant `d`.
    pub fn principal(d: i64) -> Self {
        let b = d.rem_euclid(2);
        QuadraticForm::new(1, b, (b * b - d) / 4)
    }

    pub fn inverse(&self) -> Self {
        QuadraticForm::new(self.a, -self.b, self.c).reduced()
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && !(b < 0 && (b.abs() == a || a == c))
    }

    /// Reduction of a positive definite form.
    pub fn reduced(&self) -> Self {
        let d = self.disc() as i128;
        let (mut a, mut b) = (self.a as i128, self.b as i128);
        let mut c = self.c as i128;
        loop {
            if !(-a < b && b <= a) {
                // bring b into (-a, a]
                let two_a = 2 * a;
                let mut r = b.rem_euclid(two_a);
                if r > a {
                    r -= two_a;
                }
                b = r;
                c = (b * b - d) / (4 * a);
            }
            if a > c {
                (a, c) = (c, a);
                b = -b;
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            break;
        }
        QuadraticForm::new(a as i64, b as i64, c as i64)
    }

    /// Gauss composition without the final reduction; for forms whose
    /// first coefficients are coprime the result has `a = a1 * a2`.
    pub fn compose_unreduced(&self, other: &Self) -> Self {
        let d = self.disc() as i128;
        debug_assert_eq!(self.disc(), other.disc());
        let (mut f1, mut f2) = (*self, *other);
        if f1.a > f2.a {
            std::mem::swap(&mut f1, &mut f2);
        }
        let (a1, b1) = (f1.a as i128, f1.b as i128);
        let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (y1, dd) = if a2 % a1 == 0 {
            (0, a1)
        } else {
            let e = a2.extended_gcd(&a1);
            (e.x, e.gcd)
        };
        let (x2, y2, d1) = if s % dd == 0 {
            (0, -1, dd)
        } else {
            let e = s.extended_gcd(&dd);
            (e.x, -e.y, e.gcd)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let c3 = (b3 * b3 - d) / (4 * a3);
        QuadraticForm::new(
            i64::try_from(a3).expect("composition overflow"),
            i64::try_from(b3).expect("composition overflow"),
            i64::try_from(c3).expect("composition overflow"),
        )
    }

    pub fn compose(&self, other: &Self) -> Self {
        self.compose_unreduced(other).reduced()
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = QuadraticForm::principal(self.disc());
        let mut base = self.reduced();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }
}

fn check_negative_disc(disc: i64) -> Result<()> {
    if disc >= 0 || !is_discriminant(disc) {
        return domain(format!("{disc} is not a negative discriminant"));
    }
    Ok(())
}

/// All primitive reduced forms of a negative discriminant, by direct
/// enumeration over `a <= sqrt(|d|/3)` and `-a < b <= a`.
pub fn reduced_forms(disc: i64) -> Result<Vec<QuadraticForm>> {
    check_negative_disc(disc)?;
    let n = disc.unsigned_abs();
    let a_max = isqrt(n / 3) as i64;
    let mut out = Vec::new();
    for a in 1..=a_max {
        for b in (-a + 1)..=a {
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            let f = QuadraticForm::new(a, b, c);
            if f.is_primitive() {
                out.push(f);
            }
        }
    }
    Ok(out)
}

/// Number of classes of primitive forms, by direct enumeration.
pub fn count_reduced_forms(disc: i64) -> Result<u64> {
    Ok(reduced_forms(disc)?.len() as u64)
}

const SPF_LIMIT: usize = 1 << 17;

fn spf_table() -> &'static SpfTable {
    static TABLE: OnceLock<SpfTable> = OnceLock::new();
    TABLE.get_or_init(|| SpfTable::new(SPF_LIMIT))
}

fn fundamental_cache() -> &'static DashMap<i64, u64> {
    static CACHE: OnceLock<DashMap<i64, u64>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

fn inv_mod(a: i64, m: i64) -> i64 {
    let e = a.rem_euclid(m).extended_gcd(&m);
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m)
}

/// Residues of `x` modulo `2^(e+1)` with `x^2 = d mod 2^(e+2)`.
fn two_part_roots(d: i64, e: u32) -> Vec<i64> {
    let m = 1i64 << (e + 1);
    if d % 2 != 0 {
        if e == 0 {
            return vec![1];
        }
        if d.rem_euclid(8) != 1 {
            return Vec::new();
        }
        // lift a square root of d from mod 8 up to mod 2^(e+2)
        let mut x: i64 = 1;
        for k in 3..(e + 2) {
            let modulus = 1i128 << (k + 1);
            if ((x as i128) * (x as i128) - d as i128).rem_euclid(modulus) != 0 {
                x += 1 << (k - 1);
            }
        }
        let x = x.rem_euclid(m);
        let y = (-x).rem_euclid(m);
        if x == y {
            vec![x]
        } else {
            vec![x, y]
        }
    } else {
        match e {
            0 => vec![0],
            1 => vec![2 * ((d / 4).rem_euclid(2))],
            _ => Vec::new(),
        }
    }
}

/// Roots of `x^2 = d` modulo `p^e`, `p` an odd prime.
fn odd_prime_power_roots(d: i64, p: u64, e: u32, root_mod_p: Option<u64>) -> Vec<i64> {
    let pe = (p as i64).pow(e);
    match root_mod_p {
        None => {
            // p | d, p^2 does not divide d
            if e == 1 {
                vec![0]
            } else {
                Vec::new()
            }
        }
        Some(r) => {
            let mut x = r as i64;
            let mut modulus = p as i64;
            for _ in 1..e {
                modulus *= p as i64;
                let fx = ((x as i128 * x as i128 - d as i128).rem_euclid(modulus as i128)) as i64;
                let inv = inv_mod(2 * x, modulus);
                x = (x as i128 - fx as i128 * inv as i128).rem_euclid(modulus as i128) as i64;
            }
            let y = (-x).rem_euclid(pe);
            vec![x, y]
        }
    }
}

fn crt_combine(residues: &[i64], m1: i64, others: &[i64], m2: i64) -> Vec<i64> {
    let inv = inv_mod(m1, m2);
    let m = m1 * m2;
    let mut out = Vec::with_capacity(residues.len() * others.len());
    for &r1 in residues {
        for &r2 in others {
            let t = ((r2 - r1) as i128 * inv as i128).rem_euclid(m2 as i128) as i64;
            out.push((r1 + m1 * t).rem_euclid(m));
        }
    }
    out
}

fn class_number_fundamental(d: i64) -> u64 {
    if let Some(h) = fundamental_cache().get(&d) {
        return *h;
    }
    let h = count_fundamental_classes(d);
    fundamental_cache().insert(d, h);
    h
}

fn count_fundamental_classes(d: i64) -> u64 {
    let n = d.unsigned_abs();
    let a_max = isqrt(n / 3) as usize;
    let a_low = (isqrt(n) / 2) as usize;
    let local_table;
    let table = if a_max <= SPF_LIMIT {
        spf_table()
    } else {
        local_table = SpfTable::new(a_max);
        &local_table
    };

    let kron = |p: u64| -> i8 {
        if p == 2 {
            match d.rem_euclid(8) {
                1 => 1,
                5 => -1,
                _ => 0,
            }
        } else {
            jacobi(d, p)
        }
    };
    let mut chi = vec![0i8; a_max + 1];
    for &p in table.primes() {
        let p = p as usize;
        if p > a_max {
            break;
        }
        chi[p] = kron(p as u64);
    }

    // Rows with 4a^2 <= |d|: every root b in (-a, a] gives a reduced form.
    let mut total: u64 = 0;
    if a_low >= 1 {
        let mut r = vec![0u8; a_low + 1];
        r[1] = 1;
        total += 1;
        for a in 2..=a_low {
            let p = table.spf(a) as usize;
            let rest = a / p;
            r[a] = if rest % p == 0 {
                if chi[p] == 0 {
                    0
                } else {
                    r[rest]
                }
            } else {
                r[rest] * (1 + chi[p]) as u8
            };
            total += r[a] as u64;
        }
    }

    // Boundary band: enumerate the roots and test c >= a explicitly.
    let mut sqrt_cache: HashMap<u64, u64> = HashMap::new();
    'rows: for a in (a_low + 1)..=a_max {
        let mut rest = a;
        let mut odd_parts: Vec<(u64, u32)> = Vec::new();
        let mut two_exp = 0u32;
        while rest > 1 {
            let p = table.spf(rest) as usize;
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            if chi[p] == -1 || (chi[p] == 0 && e >= 2) {
                continue 'rows;
            }
            if p == 2 {
                two_exp = e;
            } else {
                odd_parts.push((p as u64, e));
            }
        }
        let mut roots = two_part_roots(d, two_exp);
        let mut modulus = 1i64 << (two_exp + 1);
        for (p, e) in odd_parts {
            let base = if chi[p as usize] == 0 {
                None
            } else {
                let r = *sqrt_cache
                    .entry(p)
                    .or_insert_with(|| sqrt_mod_prime(d.rem_euclid(p as i64) as u64, p));
                Some(r)
            };
            let pr = odd_prime_power_roots(d, p, e, base);
            let pe = (p as i64).pow(e);
            roots = crt_combine(&roots, modulus, &pr, pe);
            modulus *= pe;
        }
        let a = a as i64;
        debug_assert_eq!(modulus, 2 * a);
        for b0 in roots {
            let b = if b0 > a { b0 - 2 * a } else { b0 };
            let num = b as i128 * b as i128 - d as i128;
            let c = num / (4 * a as i128);
            debug_assert_eq!(num % (4 * a as i128), 0);
            if c > a as i128 || (c == a as i128 && b >= 0) {
                total += 1;
            }
        }
    }
    total
}

/// Class number of the order of (negative) discriminant `disc`.
pub fn class_number(disc: i64) -> Result<u64> {
    check_negative_disc(disc)?;
    let order = QuadOrder::from_disc(disc)?;
    order_class_number(&order)
}

/// `[O_K^* : R^*]` for an imaginary order.
fn unit_index(order: &QuadOrder) -> u64 {
    match (order.d_k, order.conductor > 1) {
        (-3, true) => 3,
        (-4, true) => 2,
        _ => 1,
    }
}

/// Kronecker character of a fundamental discriminant at a prime.
pub fn field_character(d_k: i64, p: u64) -> i8 {
    match prime_behavior(d_k, p) {
        PrimeBehavior::Split => 1,
        PrimeBehavior::Inert => -1,
        PrimeBehavior::Ramified => 0,
    }
}

/// `h(R)` through the conductor formula
/// `h(R) = h(d_K) f prod_{p | f} (1 - (d_K/p)/p) / [O_K^* : R^*]`.
pub fn order_class_number(order: &QuadOrder) -> Result<u64> {
    if !order.is_imaginary() {
        return Err(Error::Unsupported(
            "class numbers of real quadratic orders".into(),
        ));
    }
    let h_k = class_number_fundamental(order.d_k);
    let mut num = h_k;
    for (p, e) in factor_u64(order.conductor) {
        let chi = field_character(order.d_k, p) as i64;
        num *= p.pow(e - 1) * (p as i64 - chi) as u64;
    }
    let idx = unit_index(order);
    if num % idx != 0 {
        return Err(Error::Consistency(format!(
            "class number of disc {} not integral",
            order.disc()
        )));
    }
    Ok(num / idx)
}

/// Number of roots of unity in an imaginary order.
pub fn unit_count(order: &QuadOrder) -> Result<u64> {
    if !order.is_imaginary() {
        return Err(Error::Unsupported(
            "unit count of a real quadratic order".into(),
        ));
    }
    Ok(match order.disc() {
        -3 => 6,
        -4 => 4,
        _ => 2,
    })
}

/// The form class group of a negative fundamental discriminant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormClassGroup {
    pub disc: i64,
    pub reduced_forms: Vec<QuadraticForm>,
    pub structure: FiniteAbelianGroup,
}

impl FormClassGroup {
    pub fn order(&self) -> u64 {
        self.reduced_forms.len() as u64
    }
}

pub fn class_group(disc: i64) -> Result<FormClassGroup> {
    check_negative_disc(disc)?;
    let (_, f) = fundamental_discriminant(disc)?;
    if f != 1 {
        return domain(format!(
            "{disc} is not fundamental; only maximal-order class groups are supported"
        ));
    }
    let forms = reduced_forms(disc)?;
    let (chosen, relations) = staircase_relations(
        forms.iter().copied(),
        QuadraticForm::principal(disc),
        |x, y| x.compose(y),
        forms.len() as u64,
    );
    let structure = FiniteAbelianGroup::from_relations(&relations, chosen.len())?;
    debug_assert_eq!(structure.order(), forms.len() as u128);
    Ok(FormClassGroup {
        disc,
        reduced_forms: forms,
        structure,
    })
}

/// An ideal of the maximal order of `Q(sqrt d_K)`, in Hermite normal form:
/// the Z-module spanned by `a` and `b + c * omega`, where `omega` is
/// `(1 + sqrt d_K)/2` or `sqrt(d_K/4)`, with `c | a`, `c | b`, `0 <= b < a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadIdeal {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

fn omega_trace_norm(d_k: i64) -> (i64, i64) {
    if d_k.rem_euclid(4) == 1 {
        (1, (1 - d_k) / 4)
    } else {
        (0, -d_k / 4)
    }
}

/// Norm of `x + y * omega`.
pub fn element_norm(d_k: i64, x: i64, y: i64) -> i128 {
    let (t, n) = omega_trace_norm(d_k);
    let (x, y) = (x as i128, y as i128);
    x * x + (t as i128) * x * y + (n as i128) * y * y
}

impl QuadIdeal {
    /// Validates the basis as an ideal of the maximal order.
    pub fn new(d_k: i64, a: i64, b: i64, c: i64) -> Result<Self> {
        if a <= 0 || c <= 0 || a % c != 0 || b % c != 0 {
            return domain(format!("malformed ideal basis [{a}, {b} + {c} w]"));
        }
        let b = b.rem_euclid(a);
        let (ap, bp) = (a / c, b / c);
        let (t, n) = omega_trace_norm(d_k);
        let nb = bp as i128 * bp as i128 + t as i128 * bp as i128 + n as i128;
        if nb.rem_euclid(ap as i128) != 0 {
            return domain(format!("[{a}, {b} + {c} w] is not an ideal of disc {d_k}"));
        }
        Ok(QuadIdeal { a, b, c })
    }

    pub fn norm(&self) -> i64 {
        self.a * self.c
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        if y % self.c != 0 {
            return false;
        }
        let k = y / self.c;
        (x as i128 - k as i128 * self.b as i128).rem_euclid(self.a as i128) == 0
    }

    /// The ideal `a Z + ((-B + sqrt d)/2) Z` attached to a primitive form.
    pub fn from_form(d_k: i64, form: &QuadraticForm) -> Result<Self> {
        if form.disc() != d_k {
            return domain("form discriminant differs from the field discriminant");
        }
        let b = if d_k.rem_euclid(4) == 1 {
            -(form.b + 1) / 2
        } else {
            -form.b / 2
        };
        QuadIdeal::new(d_k, form.a, b, 1)
    }

    /// The form attached to a primitive ideal (`c = 1`).
    pub fn to_form(&self, d_k: i64) -> QuadraticForm {
        debug_assert_eq!(self.c, 1);
        let (t, _) = omega_trace_norm(d_k);
        let bb = -(2 * self.b + t);
        QuadraticForm::new(self.a, bb, (bb * bb - d_k) / (4 * self.a))
    }

    /// `P^e` for the prime `P = [p, root + omega]` above a split prime `p`.
    pub fn split_prime_power(d_k: i64, p: i64, root: i64, e: u32) -> Result<Self> {
        let (t, n) = omega_trace_norm(d_k);
        let g = |x: i128, m: i128| (x * x + t as i128 * x + n as i128).rem_euclid(m);
        if g(root as i128, p as i128) != 0 {
            return domain(format!(
                "{root} is not a root of the minimal polynomial mod {p}"
            ));
        }
        let mut x = root.rem_euclid(p);
        let mut m = p;
        for _ in 1..e {
            m = m
                .checked_mul(p)
                .ok_or(Error::Overflow("prime power ideal"))?;
            let fx = g(x as i128, m as i128) as i64;
            let inv = inv_mod(2 * x + t, m);
            x = (x as i128 - fx as i128 * inv as i128).rem_euclid(m as i128) as i64;
        }
        QuadIdeal::new(d_k, m, x, 1)
    }

    /// Product of two primitive ideals of coprime norm.
    pub fn mul_coprime(&self, other: &Self, d_k: i64) -> Result<Self> {
        if self.c != 1 || other.c != 1 || self.a.gcd(&other.a) != 1 {
            return domain("mul_coprime needs primitive ideals of coprime norm");
        }
        let b = crt_combine(&[self.b], self.a, &[other.b], other.a)[0];
        let a = self
            .a
            .checked_mul(other.a)
            .ok_or(Error::Overflow("ideal product"))?;
        QuadIdeal::new(d_k, a, b, 1)
    }
}

/// A generator `x + y * omega` of `ideal`, or `None` if it is not principal.
/// Walks the finite ellipse `N(x + y omega) = N(ideal)` in the order
/// `y = 0, 1, -1, 2, -2, ...` and returns the first member of the ideal.
pub fn principal_generator(ideal: &QuadIdeal, d_k: i64) -> Result<Option<(i64, i64)>> {
    if d_k >= 0 {
        return domain("principal_generator needs an imaginary quadratic field");
    }
    let ideal = QuadIdeal::new(d_k, ideal.a, ideal.b, ideal.c)?;
    let norm = ideal.norm() as i128;
    let (t, _) = omega_trace_norm(d_k);
    let abs_d = d_k.unsigned_abs() as i128;
    let y_max = isqrt((4 * norm / abs_d) as u64) as i64;
    for step in 0..=(2 * y_max) {
        let y = if step % 2 == 0 {
            -(step / 2)
        } else {
            step / 2 + 1
        };
        if y.abs() > y_max {
            continue;
        }
        // 4N(x + y w) = (2x + t y)^2 + |d| y^2
        let rhs = 4 * norm - abs_d * (y as i128) * (y as i128);
        if rhs < 0 {
            continue;
        }
        let s = isqrt(rhs as u64) as i128;
        if s * s != rhs {
            continue;
        }
        for u in [s, -s] {
            let twice_x = u - t as i128 * y as i128;
            if twice_x % 2 != 0 {
                continue;
            }
            let x = (twice_x / 2) as i64;
            if ideal.contains(x, y) {
                debug_assert_eq!(element_norm(d_k, x, y), norm);
                return Ok(Some((x, y)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_behavior_small_fields() {
        use PrimeBehavior::*;
        assert_eq!(prime_behavior(-4, 2), Ramified);
        assert_eq!(prime_behavior(-4, 3), Inert);
        assert_eq!(prime_behavior(-4, 5), Split);
        assert_eq!(prime_behavior(-3, 2), Inert);
        assert_eq!(prime_behavior(-23, 2), Split);
        assert_eq!(prime_behavior(-16, 2), Ramified);
        assert_eq!(prime_behavior(-12, 2), Inert);
        assert_eq!(prime_behavior(-63, 3), Inert); // -63 = 9 * -7, (-7/3) = -1
        assert_eq!(prime_behavior(-99, 3), Split); // -99 = 9 * -11, (-11/3) = 1
        assert_eq!(prime_behavior(-2140, 107), Ramified);
        assert_eq!(prime_behavior(-2140, 23), Inert);
    }

    #[test]
    fn class_number_examples() {
        assert_eq!(class_number(-23).unwrap(), 3);
        assert_eq!(class_number(-3).unwrap(), 1);
        assert_eq!(class_number(-4).unwrap(), 1);
        assert!(class_number(-5).is_err());
        assert!(class_number(5).is_err());
    }

    #[test]
    fn fast_count_matches_enumeration_on_large_discriminants() {
        for d in [
            -1_000_003i64 * 4 + 1,
            -999_983,
            -4 * 250_003,
            -8 * 123_457,
            -3_999_971,
        ] {
            if !crate::arith::is_fundamental_discriminant(d) {
                continue;
            }
            assert_eq!(
                count_fundamental_classes(d),
                count_reduced_forms(d).unwrap(),
                "d = {d}"
            );
        }
    }

    #[test]
    fn order_class_number_examples() {
        assert_eq!(
            order_class_number(&QuadOrder::new(-23, 1).unwrap()).unwrap(),
            3
        );
        assert_eq!(
            order_class_number(&QuadOrder::new(-3, 2).unwrap()).unwrap(),
            1
        );
        assert_eq!(count_reduced_forms(-12).unwrap(), 1);
        assert_eq!(
            order_class_number(&QuadOrder::new(-4, 1).unwrap()).unwrap(),
            1
        );
        assert!(order_class_number(&QuadOrder::new(5, 1).unwrap()).is_err());
        assert!(QuadOrder::new(-12, 1).is_err());
    }

    #[test]
    fn unit_count_examples() {
        assert_eq!(unit_count(&QuadOrder::from_disc(-3).unwrap()).unwrap(), 6);
        assert_eq!(unit_count(&QuadOrder::from_disc(-4).unwrap()).unwrap(), 4);
        assert_eq!(unit_count(&QuadOrder::from_disc(-23).unwrap()).unwrap(), 2);
        assert_eq!(unit_count(&QuadOrder::from_disc(-12).unwrap()).unwrap(), 2);
        assert!(unit_count(&QuadOrder::from_disc(8).unwrap()).is_err());
    }

    #[test]
    fn class_group_examples() {
        assert_eq!(
            class_group(-23).unwrap().structure.invariant_factors(),
            &[3]
        );
        assert!(class_group(-4)
            .unwrap()
            .structure
            .invariant_factors()
            .is_empty());
        assert_eq!(
            class_group(-84).unwrap().structure.invariant_factors(),
            &[2, 2]
        );
        assert!(class_group(-12).is_err());
    }

    #[test]
    fn reduction_is_idempotent_and_reduced() {
        let f = QuadraticForm::new(2, -1, 3).pow(3);
        assert_eq!(f, QuadraticForm::principal(-23));
        let g = QuadraticForm::new(17, 31, 15).reduced();
        assert!(g.is_reduced());
        assert_eq!(g.disc(), 31 * 31 - 4 * 17 * 15);
    }

    #[test]
    fn principal_generator_examples() {
        let seven = QuadIdeal::new(-23, 7, 0, 7).unwrap();
        assert_eq!(seven.norm(), 49);
        assert_eq!(principal_generator(&seven, -23).unwrap(), Some((7, 0)));

        let p2 = QuadIdeal::new(-23, 2, 0, 1).unwrap();
        assert_eq!(principal_generator(&p2, -23).unwrap(), None);

        let p2_cubed = QuadIdeal::split_prime_power(-23, 2, 0, 3).unwrap();
        assert_eq!(p2_cubed.norm(), 8);
        let (x, y) = principal_generator(&p2_cubed, -23).unwrap().unwrap();
        assert_eq!(element_norm(-23, x, y), 8);
        assert!(p2_cubed.contains(x, y));
        // oracle: exhaustive search over |x|, |y| <= 3
        let mut sols = Vec::new();
        for x in -3..=3i64 {
            for y in -3..=3i64 {
                if x * x + x * y + 6 * y * y == 8 {
                    sols.push((x, y));
                }
            }
        }
        assert!(sols.contains(&(x, y)));
        // norm 2 is not represented at all
        assert!((-3..=3i64).all(|x| (-3..=3i64).all(|y| x * x + x * y + 6 * y * y != 2)));

        // 5 is inert in Q(sqrt -23), so [5, w] is not an ideal
        assert!(QuadIdeal::new(-23, 5, 0, 1).is_err());
        assert!(QuadIdeal::new(-23, 3, 0, 1).is_ok());
    }

    #[test]
    fn ideal_form_correspondence_roundtrip() {
        for f in reduced_forms(-2140 + 1).unwrap_or_default() {
            let _ = f;
        }
        for d in [-23i64, -84, -231, -4 * 26] {
            for f in reduced_forms(d).unwrap() {
                let i = QuadIdeal::from_form(d, &f).unwrap();
                assert_eq!(i.to_form(d).reduced(), f);
                assert_eq!(i.norm(), f.a);
            }
        }
    }
}
