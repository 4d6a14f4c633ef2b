//! Local solubility of `X_D^(m)` and of the twists of `X_D` at every place
//! of `Q`.
//!
//! Splitting conditions are phrased through the decomposition of a prime
//! in a quadratic field: "`q` splits in `Q(sqrt x)`" is the Kronecker symbol
//! of the field discriminant being `+1`. For odd `q` this is the Legendre
//! symbol `(x/q)`; at `q = 2` it depends on `x mod 8` and on whether `2`
//! ramifies.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{fundamental_discriminant, is_prime_u64, primes_up_to};
use crate::error::{domain, Error, Result};
use crate::imagquad::{class_number, prime_behavior, PrimeBehavior};
use crate::quatsigma::{genus_curve, genus_quotient, sigma_nonzero, QuaternionDisc};

/// A place of `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Real,
    Prime(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => f.write_str("real"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Place::Real => s.serialize_str("real"),
            Place::Prime(p) => s.serialize_u64(*p),
        }
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Prime(u64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Prime(p) => Ok(Place::Prime(p)),
            Raw::Name(s) if s == "real" => Ok(Place::Real),
            Raw::Name(s) => Err(serde::de::Error::custom(format!("unknown place {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalStatus {
    Nonempty,
    Empty,
    Undetermined,
}

/// The outcome at one place, with the rule that decided it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalVerdict {
    pub place: Place,
    pub status: LocalStatus,
    pub rule: String,
}

impl LocalVerdict {
    fn new(place: Place, nonempty: bool, rule: &str) -> Self {
        LocalVerdict {
            place,
            status: if nonempty {
                LocalStatus::Nonempty
            } else {
                LocalStatus::Empty
            },
            rule: rule.to_string(),
        }
    }

    fn undetermined(place: Place, rule: &str) -> Self {
        LocalVerdict {
            place,
            status: LocalStatus::Undetermined,
            rule: rule.to_string(),
        }
    }

    pub fn is_nonempty(&self) -> bool {
        self.status == LocalStatus::Nonempty
    }
}

pub mod rules {
    pub const REAL_EMBEDDING: &str = "real-place-embedding";
    pub const GOOD_SIGMA_PAIR: &str = "good-prime-sigma-pair";
    pub const GOOD_SIGMA_PAIR_GENUS_BOUND: &str = "good-prime-sigma-pair-genus-bound";
    pub const FULL_INVOLUTION: &str = "full-involution";
    pub const COFACTOR_TWO: &str = "cofactor-two";
    pub const COFACTOR_ODD_SPLIT: &str = "cofactor-odd-split";
    pub const COFACTOR_ODD_ONE_MOD_FOUR: &str = "cofactor-odd-one-mod-four";
    pub const COFACTOR_NO_RULE: &str = "cofactor-no-rule";
    pub const M_PRIME: &str = "involution-prime-place";
    pub const M_COMPOSITE: &str = "involution-composite-place";
    pub const TWIST_GOOD_SPLIT: &str = "twist-good-split";
    pub const TWIST_GOOD_INERT: &str = "twist-good-inert";
    pub const TWIST_BAD_M: &str = "twist-bad-m-congruences";
    pub const TWIST_ODD_CLASS_NUMBER: &str = "twist-cm-odd-class-number";
    pub const TWIST_EVEN_CLASS_NUMBER: &str = "twist-cm-class-number-even";
    pub const TWIST_POSITIVE_REAL: &str = "twist-positive-real";
    pub const TWIST_RAMIFIED_OUTSIDE: &str = "twist-ramified-outside";
}

/// Whether `q` splits in `Q(sqrt x)`, `x` not a square.
pub fn splits_in(x: i64, q: u64) -> bool {
    let (d, _) = fundamental_discriminant(4 * x).expect("4x is a discriminant");
    prime_behavior(d, q) == PrimeBehavior::Split
}

/// Whether `q` is inert in `Q(sqrt x)`, `x` not a square.
pub fn inert_in(x: i64, q: u64) -> bool {
    let (d, _) = fundamental_discriminant(4 * x).expect("4x is a discriminant");
    prime_behavior(d, q) == PrimeBehavior::Inert
}

fn setup(disc: &QuaternionDisc, m: u64) -> Result<()> {
    if disc.value() == 1 || !disc.is_indefinite() {
        return domain(format!("D = {disc} is not an indefinite discriminant"));
    }
    if m <= 1 || !disc.divides(m) {
        return domain(format!("m = {m} is not a divisor > 1 of D = {disc}"));
    }
    Ok(())
}

fn real_place(disc: &QuaternionDisc, m: u64) -> LocalVerdict {
    let ok = disc.primes().iter().all(|&q| !splits_in(m as i64, q));
    LocalVerdict::new(Place::Real, ok, rules::REAL_EMBEDDING)
}

fn good_place(disc: &QuaternionDisc, m: u64, p: u64) -> LocalVerdict {
    let ok = sigma_nonzero(p as i64, disc) || sigma_nonzero((m * p) as i64, disc);
    LocalVerdict::new(Place::Prime(p), ok, rules::GOOD_SIGMA_PAIR)
}

/// A prime `p | D` with `p` not dividing `m`.
fn cofactor_place(disc: &QuaternionDisc, m: u64, p: u64) -> LocalVerdict {
    let d = disc.value();
    let others: Vec<u64> = disc.primes().iter().copied().filter(|&q| q != p).collect();
    let place = Place::Prime(p);
    if p == 2 {
        let all_three = others.iter().all(|q| q % 4 == 3);
        let all_five_seven = m == d / 2 && others.iter().all(|q| matches!(q % 8, 5 | 7));
        return LocalVerdict::new(place, all_three || all_five_seven, rules::COFACTOR_TWO);
    }
    let half_shape = d % (2 * p) == 0 && m == d / (2 * p);
    let shape = m == d / p || half_shape;
    let split =
        shape && splits_in(-(m as i64), p) && others.iter().all(|&q| !splits_in(-(p as i64), q));
    if split {
        return LocalVerdict::new(place, true, rules::COFACTOR_ODD_SPLIT);
    }
    let one_mod_four = shape
        && p % 4 == 1
        && others.iter().all(|q| q % 4 != 1)
        && (!half_shape || !splits_in(-((d / 2) as i64), 2));
    if one_mod_four {
        return LocalVerdict::new(place, true, rules::COFACTOR_ODD_ONE_MOD_FOUR);
    }
    LocalVerdict::new(place, false, rules::COFACTOR_NO_RULE)
}

/// A prime `p | m`.
fn involution_place(disc: &QuaternionDisc, m: u64, p: u64) -> Result<LocalVerdict> {
    let d = disc.value();
    let place = Place::Prime(p);
    if m == d {
        return Ok(LocalVerdict::new(place, true, rules::FULL_INVOLUTION));
    }
    let ell = d / m;
    if !is_prime_u64(ell) {
        return Err(Error::Unsupported(format!(
            "local points at {p} | m when D/m = {ell} is composite"
        )));
    }
    if m == p {
        let ok = (m == 2 && ell % 4 == 3)
            || (ell == 2 && m % 4 == 1)
            || !splits_in(-(m as i64), ell)
            || ell == 2
            || ell % 4 == 3
            || ell == 3
            || ell % 3 == 2;
        return Ok(LocalVerdict::new(place, ok, rules::M_PRIME));
    }
    let all_three = disc
        .primes()
        .iter()
        .filter(|&&q| q != 2)
        .all(|q| q % 4 == 3);
    let ok = (ell != 2 && p == 2 && all_three) || !splits_in(-((m / p) as i64), ell);
    Ok(LocalVerdict::new(place, ok, rules::M_COMPOSITE))
}

/// Local solubility of `X_D^(m)` at one place.
pub fn quotient_local(disc: &QuaternionDisc, m: u64, place: Place) -> Result<LocalVerdict> {
    setup(disc, m)?;
    match place {
        Place::Real => Ok(real_place(disc, m)),
        Place::Prime(p) => {
            if !is_prime_u64(p) {
                return domain(format!("{p} is not prime"));
            }
            if disc.value() % p != 0 {
                Ok(good_place(disc, m, p))
            } else if m % p != 0 {
                Ok(cofactor_place(disc, m, p))
            } else {
                involution_place(disc, m, p)
            }
        }
    }
}

/// Verdicts at the real place and at every prime of `D`, in place order.
pub fn quotient_bad_places(disc: &QuaternionDisc, m: u64) -> Result<Vec<LocalVerdict>> {
    let mut out = vec![quotient_local(disc, m, Place::Real)?];
    for &p in disc.primes() {
        out.push(quotient_local(disc, m, Place::Prime(p))?);
    }
    Ok(out)
}

/// Summary of a scan of good primes below a Weil cutoff.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaScan {
    /// Primes `p < bound` not dividing `D` were checked.
    pub bound: u64,
    pub primes_checked: usize,
    /// Primes at which the local test failed, ascending.
    pub failures: Vec<u64>,
}

fn scan_good_primes(
    disc: &QuaternionDisc,
    bound: u64,
    test: impl Fn(u64) -> bool + Sync,
) -> SigmaScan {
    let primes: Vec<u64> = primes_up_to(bound.saturating_sub(1))
        .into_iter()
        .filter(|p| disc.value() % p != 0)
        .collect();
    let mut failures: Vec<u64> = primes.par_iter().copied().filter(|&p| !test(p)).collect();
    failures.sort_unstable();
    SigmaScan {
        bound,
        primes_checked: primes.len(),
        failures,
    }
}

/// Which shape of `m` the adelic criterion falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum AdelicCase {
    /// `m = D`.
    FullInvolution,
    /// `m = D / l` with `l` an odd prime.
    OddPrimeCofactor { ell: u64 },
    /// `m = D / 2`.
    CofactorTwo,
    /// `D / m` has at least two prime factors.
    Inadmissible,
}

/// Serde adapter for an optional decision: `true`, `false`, or the string
/// `"undetermined"` for `None`.
pub mod tristate {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<bool>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(b) => s.serialize_bool(*b),
            None => s.serialize_str("undetermined"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<bool>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Flag(bool),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Flag(b) => Ok(Some(b)),
            Raw::Word(w) if w == "undetermined" => Ok(None),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "unexpected decision {w:?}"
            ))),
        }
    }
}

/// How the scan of good primes below the Weil cutoff came out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanOutcome {
    /// A bad place already failed, so the scan was not run.
    Skipped,
    Passed,
    Failed,
    /// Failures occurred, but the genus is only an upper bound, so the
    /// cutoff they fall under is not known to be the true one.
    Undetermined,
}

/// The literal conditions of the adelic criterion for the admissible cases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdelicConditions {
    pub real_place: bool,
    pub cofactor_place: bool,
    pub involution_places: bool,
    pub good_primes: ScanOutcome,
}

impl AdelicConditions {
    fn bad_places(&self) -> bool {
        self.real_place && self.cofactor_place && self.involution_places
    }

    pub fn decision(&self) -> Option<bool> {
        if !self.bad_places() {
            return Some(false);
        }
        match self.good_primes {
            ScanOutcome::Passed => Some(true),
            ScanOutcome::Failed | ScanOutcome::Skipped => Some(false),
            ScanOutcome::Undetermined => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdelicReport {
    #[serde(rename = "D")]
    pub d: u64,
    pub m: u64,
    #[serde(with = "tristate")]
    pub adelic: Option<bool>,
    pub case: AdelicCase,
    pub genus_bound: u64,
    pub genus_exact: bool,
    pub conditions: Option<AdelicConditions>,
    pub scan: Option<SigmaScan>,
    /// Real place, then the primes of `D`, then failing good primes.
    pub evidence: Vec<LocalVerdict>,
}

fn literal_conditions(disc: &QuaternionDisc, m: u64, ell: u64) -> AdelicConditions {
    let d = disc.value();
    let m_primes: Vec<u64> = disc
        .primes()
        .iter()
        .copied()
        .filter(|p| m % p == 0)
        .collect();
    let s_at_least_two = disc.primes().len() >= 4;
    if ell != 2 {
        let real_place = inert_in(m as i64, ell);
        let a =
            splits_in(-(m as i64), ell) && m_primes.iter().all(|&p| !splits_in(-(ell as i64), p));
        let b = ell % 4 == 1 && m_primes.iter().all(|p| p % 4 != 1);
        let involution_places = !s_at_least_two
            || (m_primes
                .iter()
                .filter(|&&p| p != 2)
                .all(|&p| inert_in(-((m / p) as i64), ell))
                && (d % 2 != 0
                    || inert_in(-((m / 2) as i64), ell)
                    || disc
                        .primes()
                        .iter()
                        .filter(|&&q| q != 2)
                        .all(|q| q % 4 == 3)));
        AdelicConditions {
            real_place,
            cofactor_place: a || b,
            involution_places,
            good_primes: ScanOutcome::Skipped,
        }
    } else {
        AdelicConditions {
            real_place: m % 8 != 1,
            cofactor_place: m_primes.iter().all(|p| p % 4 == 3)
                || m_primes.iter().all(|p| matches!(p % 8, 5 | 7)),
            involution_places: !s_at_least_two || m_primes.iter().all(|&p| (m / p) % 8 != 7),
            good_primes: ScanOutcome::Skipped,
        }
    }
}

/// Whether `X_D^(m)` has points over every completion of `Q`; `None` when
/// a good prime below the cutoff fails but the quotient genus is only
/// bounded from above.
pub fn adelic_quotient(disc: &QuaternionDisc, m: u64) -> Result<AdelicReport> {
    setup(disc, m)?;
    let d = disc.value();
    let genus = genus_quotient(disc, m)?;
    let (genus_bound, genus_exact) = (genus.bound(), genus.exact().is_some());
    let cofactor = d / m;
    let case = if m == d {
        AdelicCase::FullInvolution
    } else if is_prime_u64(cofactor) {
        if cofactor == 2 {
            AdelicCase::CofactorTwo
        } else {
            AdelicCase::OddPrimeCofactor { ell: cofactor }
        }
    } else {
        AdelicCase::Inadmissible
    };
    let report = |adelic, conditions, scan, mut evidence: Vec<LocalVerdict>| {
        evidence.sort_by_key(|v| v.place);
        AdelicReport {
            d,
            m,
            adelic,
            case,
            genus_bound,
            genus_exact,
            conditions,
            scan,
            evidence,
        }
    };

    if case == AdelicCase::Inadmissible {
        let mut evidence = vec![real_place(disc, m)];
        for &p in disc.primes().iter().filter(|&&p| m % p != 0) {
            evidence.push(cofactor_place(disc, m, p));
        }
        if evidence[1..].iter().all(|v| v.is_nonempty()) {
            return Err(Error::Consistency(format!(
                "D/m = {cofactor} is composite yet every prime of it has local points"
            )));
        }
        return Ok(report(Some(false), None, None, evidence));
    }

    let mut evidence = quotient_bad_places(disc, m)?;
    let bad_ok = evidence.iter().all(LocalVerdict::is_nonempty);
    let (outcome, scan) = if bad_ok {
        let bound = 4 * genus_bound * genus_bound;
        let scan = scan_good_primes(disc, bound, |p| {
            sigma_nonzero(p as i64, disc) || sigma_nonzero((m * p) as i64, disc)
        });
        let outcome = match (scan.failures.is_empty(), genus_exact) {
            (true, _) => ScanOutcome::Passed,
            (false, true) => ScanOutcome::Failed,
            (false, false) => ScanOutcome::Undetermined,
        };
        evidence.extend(scan.failures.iter().map(|&p| {
            let place = Place::Prime(p);
            if genus_exact {
                LocalVerdict::new(place, false, rules::GOOD_SIGMA_PAIR)
            } else {
                LocalVerdict::undetermined(place, rules::GOOD_SIGMA_PAIR_GENUS_BOUND)
            }
        }));
        (outcome, Some(scan))
    } else {
        (ScanOutcome::Skipped, None)
    };
    let per_place = match outcome {
        ScanOutcome::Passed => Some(true),
        ScanOutcome::Undetermined => None,
        _ => Some(false),
    };

    if case == AdelicCase::FullInvolution {
        if per_place != Some(true) {
            return Err(Error::Consistency(format!(
                "X_{d}^({d}) fails a local test, contradicting everywhere-local solubility"
            )));
        }
        return Ok(report(Some(true), None, scan, evidence));
    }

    let ell = if let AdelicCase::OddPrimeCofactor { ell } = case {
        ell
    } else {
        2
    };
    let mut conditions = literal_conditions(disc, m, ell);
    if conditions.bad_places() != bad_ok {
        return Err(Error::Consistency(format!(
            "adelic conditions at the bad places ({}) disagree with the per-place verdicts ({bad_ok}) for D = {d}, m = {m}",
            conditions.bad_places()
        )));
    }
    conditions.good_primes = outcome;
    let adelic = conditions.decision();
    if adelic != per_place {
        return Err(Error::Consistency(format!(
            "adelic criterion ({adelic:?}) disagrees with the per-place verdicts ({per_place:?}) for D = {d}, m = {m}"
        )));
    }
    Ok(report(adelic, Some(conditions), scan, evidence))
}

fn check_twist_param(d: i64) -> Result<()> {
    if d == 0 || d == 1 {
        return domain("the twist parameter must be a squarefree integer other than 0, 1");
    }
    let (_, f) = fundamental_discriminant(4 * d)?;
    if !(f == 1 || (f == 2 && d.rem_euclid(4) == 1)) {
        return domain(format!("{d} is not squarefree"));
    }
    Ok(())
}

/// Local solubility of the twist `^d X_D` at a good prime `p` not dividing `d`.
pub fn twist_local_good(disc: &QuaternionDisc, m: u64, d: i64, p: u64) -> Result<LocalVerdict> {
    setup(disc, m)?;
    check_twist_param(d)?;
    if !is_prime_u64(p) {
        return domain(format!("{p} is not prime"));
    }
    if disc.value() % p == 0 || d % p as i64 == 0 {
        return domain(format!("{p} divides d D"));
    }
    let place = Place::Prime(p);
    let (field, _) = fundamental_discriminant(4 * d)?;
    match prime_behavior(field, p) {
        PrimeBehavior::Split => Ok(LocalVerdict::new(
            place,
            sigma_nonzero(p as i64, disc),
            rules::TWIST_GOOD_SPLIT,
        )),
        PrimeBehavior::Inert => Ok(LocalVerdict::new(
            place,
            sigma_nonzero((m * p) as i64, disc),
            rules::TWIST_GOOD_INERT,
        )),
        PrimeBehavior::Ramified => Err(Error::Unsupported(format!(
            "{p} ramifies in Q(sqrt {d}); the good-reduction twist criterion needs it unramified"
        ))),
    }
}

/// Local solubility of `^c X_D` at a prime `m | D` inert in `Q(sqrt c)`.
/// Two witnesses `p = 1 mod 4` and `q = 1 mod 3` dividing `D/m` are allowed
/// to coincide.
pub fn twist_local_bad_m(disc: &QuaternionDisc, m: u64, c: i64) -> Result<LocalVerdict> {
    if !is_prime_u64(m) || !disc.divides(m) {
        return domain(format!("m = {m} is not a prime divisor of D = {disc}"));
    }
    check_twist_param(c)?;
    if !inert_in(c, m) {
        return domain(format!("{m} is not inert in Q(sqrt {c})"));
    }
    let rest: Vec<u64> = disc.primes().iter().copied().filter(|&q| q != m).collect();
    let has_one_mod_four = rest.iter().any(|q| q % 4 == 1);
    let has_one_mod_three = rest.iter().any(|q| q % 3 == 1);
    Ok(LocalVerdict::new(
        Place::Prime(m),
        !(has_one_mod_four && has_one_mod_three),
        rules::TWIST_BAD_M,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistReport {
    pub ell: u64,
    pub m: u64,
    pub d: i64,
    /// `None` when some place could not be decided.
    #[serde(with = "tristate")]
    pub everywhere_local: Option<bool>,
    pub scan: Option<SigmaScan>,
    pub evidence: Vec<LocalVerdict>,
}

fn check_ell_m(ell: u64, m: u64) -> Result<()> {
    for (name, v) in [("l", ell), ("m", m)] {
        if v == 2 || !is_prime_u64(v) {
            return domain(format!("{name} = {v} is not an odd prime"));
        }
    }
    if ell % 4 != 3 {
        return domain(format!("l = {ell} is not 3 mod 4"));
    }
    if !inert_in(m as i64, ell) {
        return domain(format!("(m/l) = ({m}/{ell}) is not -1"));
    }
    Ok(())
}

fn summarize(evidence: &[LocalVerdict]) -> Option<bool> {
    if evidence.iter().any(|v| v.status == LocalStatus::Empty) {
        Some(false)
    } else if evidence
        .iter()
        .any(|v| v.status == LocalStatus::Undetermined)
    {
        None
    } else {
        Some(true)
    }
}

/// Local solubility of the twist `^d X_{l m}` at one place. The places
/// dividing `l m` and the real place are covered only for `d = -l` (and
/// `d > 0` at the real place).
pub fn twist_local(ell: u64, m: u64, d: i64, place: Place) -> Result<LocalVerdict> {
    check_ell_m(ell, m)?;
    check_twist_param(d)?;
    let disc = QuaternionDisc::new(ell * m)?;
    if let Place::Prime(p) = place {
        if !is_prime_u64(p) {
            return domain(format!("{p} is not prime"));
        }
        if p != ell && p != m {
            let (field, _) = fundamental_discriminant(4 * d)?;
            if field % p as i64 == 0 {
                return Ok(LocalVerdict::new(
                    place,
                    false,
                    rules::TWIST_RAMIFIED_OUTSIDE,
                ));
            }
            return twist_local_good(&disc, m, d, p);
        }
    }
    if place == Place::Real && d > 0 {
        return Ok(LocalVerdict::new(place, false, rules::TWIST_POSITIVE_REAL));
    }
    if d != -(ell as i64) {
        return Err(Error::Unsupported(format!(
            "the twist by {d} at {place}; only d = -{ell} is covered"
        )));
    }
    if place == Place::Prime(m) {
        return twist_local_bad_m(&disc, m, d);
    }
    if class_number(d)? % 2 == 1 {
        Ok(LocalVerdict::new(
            place,
            true,
            rules::TWIST_ODD_CLASS_NUMBER,
        ))
    } else {
        Ok(LocalVerdict::undetermined(
            place,
            rules::TWIST_EVEN_CLASS_NUMBER,
        ))
    }
}

/// Everywhere-local solubility of the twist `^d X_{l m}` by the involution
/// `w_m`, for `l = 3 mod 4` and `(m/l) = -1`. Complete for `d = -l`; twists
/// with `d > 0` fail at the real place and twists ramified at a prime
/// outside `{l, m}` fail there.
pub fn twist_everywhere_local(ell: u64, m: u64, d: i64) -> Result<TwistReport> {
    check_ell_m(ell, m)?;
    check_twist_param(d)?;
    let disc = QuaternionDisc::new(ell * m)?;
    let report = |mut evidence: Vec<LocalVerdict>, scan| {
        evidence.sort_by_key(|v| v.place);
        TwistReport {
            ell,
            m,
            d,
            everywhere_local: summarize(&evidence),
            scan,
            evidence,
        }
    };
    if d > 0 {
        return Ok(report(
            vec![LocalVerdict::new(
                Place::Real,
                false,
                rules::TWIST_POSITIVE_REAL,
            )],
            None,
        ));
    }
    let (field, _) = fundamental_discriminant(4 * d)?;
    let bad: Vec<u64> = crate::arith::factor_u64(field.unsigned_abs())
        .into_iter()
        .map(|(p, _)| p)
        .filter(|&p| p != ell && p != m)
        .collect();
    if let Some(&p) = bad.first() {
        return Ok(report(
            vec![LocalVerdict::new(
                Place::Prime(p),
                false,
                rules::TWIST_RAMIFIED_OUTSIDE,
            )],
            None,
        ));
    }
    if d != -(ell as i64) {
        return Err(Error::Unsupported(format!(
            "local analysis of the twist by {d}; only d = -{ell} is covered"
        )));
    }

    let mut evidence = [Place::Real, Place::Prime(ell), Place::Prime(m)]
        .into_iter()
        .map(|place| twist_local(ell, m, d, place))
        .collect::<Result<Vec<_>>>()?;

    let g = genus_curve(&disc)?;
    let bound = 4 * g * g;
    let field = -(ell as i64);
    let scan = scan_good_primes(&disc, bound, |p| match prime_behavior(field, p) {
        PrimeBehavior::Split => sigma_nonzero(p as i64, &disc),
        _ => sigma_nonzero((m * p) as i64, &disc),
    });
    for &p in &scan.failures {
        evidence.push(twist_local_good(&disc, m, d, p)?);
    }
    Ok(report(evidence, Some(scan)))
}
