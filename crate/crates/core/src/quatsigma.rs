//! Quaternion discriminants and the class-number sums `Sigma_n(D)` that
//! drive the Hecke trace formula, plus the genus and fixed-point data of
//! the Atkin-Lehner quotients.
//!
//! `Sigma_n(D)` sums `2^{s(K)} h(R) / w(R)` over integers `t` with
//! `t^2 < 4n` and over imaginary quadratic orders `R` containing a root of
//! `x^2 + t x + n`, subject to: the conductor of `R` is prime to `D`, and
//! no prime of `D` splits in the fraction field `K` of `R`. Here `s(K)` is
//! the number of primes of `D` inert in `K`.

use std::fmt;
use std::sync::OnceLock;

use dashmap::DashMap;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{factor_u64, factorize, fundamental_discriminant, is_square, isqrt, kronecker};
use crate::error::{domain, Error, Result};
use crate::imagquad::{order_class_number, prime_behavior, unit_count, PrimeBehavior, QuadOrder};

/// The reduced discriminant of a rational quaternion algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuaternionDisc {
    primes: Vec<u64>,
    value: u64,
}

impl QuaternionDisc {
    pub fn new(value: u64) -> Result<Self> {
        if value == 0 {
            return domain("quaternion discriminant must be positive");
        }
        let f = factorize(value as u128)?;
        if !f.is_squarefree() {
            return domain(format!("{value} is not squarefree"));
        }
        Ok(QuaternionDisc {
            primes: f.primes().map(|p| p as u64).collect(),
            value,
        })
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn is_indefinite(&self) -> bool {
        self.primes.len() % 2 == 0
    }

    /// `prod_{q | D} (q - 1)`.
    pub fn phi(&self) -> u64 {
        self.primes.iter().map(|q| q - 1).product()
    }

    pub fn divides(&self, m: u64) -> bool {
        m > 0 && self.value % m == 0
    }

    fn require_indefinite(&self) -> Result<()> {
        if self.value == 1 {
            return domain("D = 1 is the split algebra; the curve is not compact");
        }
        if !self.is_indefinite() {
            return domain(format!("D = {} is definite", self.value));
        }
        Ok(())
    }

    fn require_divisor(&self, m: u64) -> Result<()> {
        if m <= 1 || !self.divides(m) {
            return domain(format!(
                "m = {m} is not a divisor > 1 of D = {}",
                self.value
            ));
        }
        Ok(())
    }
}

impl fmt::Display for QuaternionDisc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Number of primes of `D` inert in `Q(sqrt d)`, or `None` if one splits.
fn inert_count(d: i64, disc: &QuaternionDisc) -> Option<u32> {
    let mut s = 0;
    for &q in &disc.primes {
        match prime_behavior(d, q) {
            PrimeBehavior::Split => return None,
            PrimeBehavior::Inert => s += 1,
            PrimeBehavior::Ramified => {}
        }
    }
    Some(s)
}

/// Eichler's criterion: `R` embeds optimally into a maximal order of the
/// algebra of discriminant `D`.
pub fn eichler_embeds(order: &QuadOrder, disc: &QuaternionDisc) -> bool {
    if order.conductor().gcd(&disc.value) != 1 {
        return false;
    }
    if !order.is_imaginary() && !disc.is_indefinite() {
        return false;
    }
    inert_count(order.d_k(), disc).is_some()
}

fn fundamental_cache() -> &'static DashMap<i64, (i64, u64)> {
    static CACHE: OnceLock<DashMap<i64, (i64, u64)>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

fn fundamental_parts(d: i64) -> Result<(i64, u64)> {
    if let Some(v) = fundamental_cache().get(&d) {
        return Ok(*v);
    }
    let v = fundamental_discriminant(d)?;
    fundamental_cache().insert(d, v);
    Ok(v)
}

fn sigma_cache() -> &'static DashMap<(i64, u64), i128> {
    static CACHE: OnceLock<DashMap<(i64, u64), i128>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

fn max_t(n: i64) -> i64 {
    isqrt((4 * n - 1) as u64) as i64
}

/// Whether `Sigma_n(D)` is nonzero. Needs no class numbers: it suffices
/// that some `t` gives a field in which no prime of `D` splits, since the
/// maximal order then contributes positively.
pub fn sigma_nonzero(n: i64, disc: &QuaternionDisc) -> bool {
    if n <= 0 {
        return false;
    }
    (0..=max_t(n)).any(|t| inert_count(t * t - 4 * n, disc).is_some())
}

/// One summand of `Sigma_n(D)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaTerm {
    pub t: i64,
    pub order: QuadOrder,
    pub s_k: u32,
    pub contribution: Ratio<i128>,
}

/// `12 h(R) / w(R)`, always an integer.
fn twelve_h_over_w(order: &QuadOrder) -> Result<i128> {
    let h = order_class_number(order)? as i128;
    let w = unit_count(order)? as i128;
    Ok(12 * h / w)
}

/// Contributions of the orders attached to a single `t`, as a multiple of 1/12.
fn twelve_sigma_at(
    t: i64,
    n: i64,
    disc: &QuaternionDisc,
    mut sink: impl FnMut(SigmaTerm),
) -> Result<i128> {
    let d = t * t - 4 * n;
    let Some(s) = inert_count(d, disc) else {
        return Ok(0);
    };
    let (d_k, g) = fundamental_parts(d)?;
    let mut acc: i128 = 0;
    for f in divisors(g) {
        if f.gcd(&disc.value) != 1 {
            continue;
        }
        let order = QuadOrder::new_unchecked(d_k, f);
        let twelve = twelve_h_over_w(&order)? << s;
        acc += twelve;
        sink(SigmaTerm {
            t,
            order,
            s_k: s,
            contribution: Ratio::new(twelve, 12),
        });
    }
    Ok(acc)
}

fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factor_u64(n) {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// Every term of `Sigma_n(D)`, for `t` from `-t_max` to `t_max`.
pub fn sigma_terms(n: i64, disc: &QuaternionDisc) -> Result<Vec<SigmaTerm>> {
    let mut terms = Vec::new();
    if n <= 0 {
        return Ok(terms);
    }
    let tm = max_t(n);
    for t in -tm..=tm {
        twelve_sigma_at(t, n, disc, |term| terms.push(term))?;
    }
    Ok(terms)
}

/// `12 * Sigma_n(D)`, exact.
pub fn twelve_sigma(n: i64, disc: &QuaternionDisc) -> Result<i128> {
    if n <= 0 {
        return Ok(0);
    }
    let key = (n, disc.value);
    if let Some(v) = sigma_cache().get(&key) {
        return Ok(*v);
    }
    let mut total: i128 = 0;
    for t in 0..=max_t(n) {
        let part = twelve_sigma_at(t, n, disc, |_| {})?;
        total += if t == 0 { part } else { 2 * part };
    }
    sigma_cache().insert(key, total);
    Ok(total)
}

/// `Sigma_n(D)` as an exact rational; zero when `n <= 0`.
pub fn sigma_value(n: i64, disc: &QuaternionDisc) -> Result<Ratio<i128>> {
    Ok(Ratio::new(twelve_sigma(n, disc)?, 12))
}

/// `prod_{p^r || n, p not dividing D} (1 + p + ... + p^r)`.
fn divisor_sum_away_from(n: u64, disc: &QuaternionDisc) -> i128 {
    factor_u64(n)
        .into_iter()
        .filter(|(p, _)| disc.value % p != 0)
        .map(|(p, r)| (0..=r).map(|k| (p as i128).pow(k)).sum::<i128>())
        .product()
}

/// Trace of the Hecke operator `T_n` on weight-two forms for `D`:
/// `sigma*(n) - Sigma_n(D) + [n square] phi(D)/12`.
pub fn trace_hecke(n: i64, disc: &QuaternionDisc) -> Result<i64> {
    if n < 1 {
        return domain("trace_hecke needs n >= 1");
    }
    let mut twelve = 12 * divisor_sum_away_from(n as u64, disc) - twelve_sigma(n, disc)?;
    if is_square(n as u64) {
        twelve += disc.phi() as i128;
    }
    if twelve % 12 != 0 {
        return Err(Error::Consistency(format!(
            "tr T_{n} for D = {disc} is {twelve}/12, not an integer"
        )));
    }
    i64::try_from(twelve / 12).map_err(|_| Error::Overflow("Hecke trace"))
}

/// Genus of the Shimura curve `X_D`, from the mass formula
/// `1 + phi(D)/12 - e_2/4 - e_3/3`.
pub fn genus_curve(disc: &QuaternionDisc) -> Result<u64> {
    disc.require_indefinite()?;
    let e2: i128 = disc
        .primes
        .iter()
        .map(|&p| 1 - kronecker(-4, p as i64).expect("p > 0") as i128)
        .product();
    let e3: i128 = disc
        .primes
        .iter()
        .map(|&p| 1 - kronecker(-3, p as i64).expect("p > 0") as i128)
        .product();
    let twelve_g = 12 + disc.phi() as i128 - 3 * e2 - 4 * e3;
    if twelve_g % 12 != 0 || twelve_g < 0 {
        return Err(Error::Consistency(format!(
            "genus of X_{disc} came out as {twelve_g}/12"
        )));
    }
    Ok((twelve_g / 12) as u64)
}

/// Whether `w_m` acts on `X_D` without fixed points. Fixed points are CM
/// points by orders of `Q(sqrt -m)`, and for `m = 2` also by `Z[i]`; they
/// are absent exactly when each such field is split at some prime of `D`.
pub fn fixed_point_free(disc: &QuaternionDisc, m: u64) -> Result<bool> {
    disc.require_divisor(m)?;
    let splits_somewhere = |d: i64| {
        disc.primes
            .iter()
            .any(|&p| prime_behavior(d, p) == PrimeBehavior::Split)
    };
    let (d_k, _) = fundamental_parts(-(m as i64) * 4)?;
    let mut free = splits_somewhere(d_k);
    if m == 2 {
        free &= splits_somewhere(-4);
    }
    Ok(free)
}

/// Genus of `X_D / w_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuotientGenus {
    Exact {
        genus: u64,
    },
    /// `w_m` has fixed points; only `g' <= (g + 1)/2` is known here.
    RequiresFixedPointCount {
        upper_bound: u64,
    },
}

impl QuotientGenus {
    pub fn exact(&self) -> Option<u64> {
        match self {
            QuotientGenus::Exact { genus } => Some(*genus),
            QuotientGenus::RequiresFixedPointCount { .. } => None,
        }
    }

    /// The exact genus when known, otherwise the upper bound.
    pub fn bound(&self) -> u64 {
        match self {
            QuotientGenus::Exact { genus } => *genus,
            QuotientGenus::RequiresFixedPointCount { upper_bound } => *upper_bound,
        }
    }
}

pub fn genus_quotient(disc: &QuaternionDisc, m: u64) -> Result<QuotientGenus> {
    disc.require_indefinite()?;
    disc.require_divisor(m)?;
    let g = genus_curve(disc)?;
    let half = (g + 1) / 2;
    if fixed_point_free(disc, m)? {
        if g % 2 == 0 {
            return Err(Error::Consistency(format!(
                "unramified double cover of genus {g}: g must be odd"
            )));
        }
        Ok(QuotientGenus::Exact { genus: half })
    } else {
        Ok(QuotientGenus::RequiresFixedPointCount { upper_bound: half })
    }
}

/// `|CM(R)| = 2^{s(K)} h(R)` on `X_D`.
pub fn cm_count(order: &QuadOrder, disc: &QuaternionDisc) -> Result<u64> {
    if !order.is_imaginary() {
        return domain("CM points need an imaginary quadratic order");
    }
    if !eichler_embeds(order, disc) {
        return domain(format!(
            "the order of discriminant {} does not embed into the algebra of discriminant {disc}",
            order.disc()
        ));
    }
    let s = inert_count(order.d_k(), disc).expect("embedding checked");
    Ok(order_class_number(order)? << s)
}

/// Sum of the `SigmaTerm` contributions; agrees with [`sigma_value`].
pub fn sum_terms(terms: &[SigmaTerm]) -> Ratio<i128> {
    terms
        .iter()
        .fold(Ratio::zero(), |acc, t| acc + t.contribution)
}
