//! Per-pair records for the `(l, m)` search and their replay.

use std::collections::BTreeMap;
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shimura_core::arith::{is_prime_u64, primes_up_to};
use shimura_core::local::{tristate, twist_local};
use shimura_core::quatsigma::{fixed_point_free, genus_curve, genus_quotient};
use shimura_core::{
    adelic_quotient, cm_rational_point, jordan_empty_over_k, quotient_local,
    twist_everywhere_local, Error, GlobalEvidence, LocalVerdict, QuaternionDisc,
};

use crate::cache::Cache;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    CounterexampleQuotient,
    CounterexampleTwist,
    HasRationalCmPoint,
    LocallyInsoluble,
    Undecided,
}

/// Which curve a local verdict is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveTag {
    Quotient,
    Twist,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalEvidence {
    pub curve: CurveTag,
    #[serde(flatten)]
    pub verdict: LocalVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EvidenceItem {
    Local(LocalEvidence),
    Global(GlobalEvidence),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveReport {
    pub ell: u64,
    pub m: u64,
    #[serde(rename = "D")]
    pub d: u64,
    #[serde(rename = "genus_X")]
    pub genus_x: u64,
    pub genus_quot: u64,
    pub unramified: bool,
    #[serde(with = "tristate")]
    pub adelic: Option<bool>,
    /// Computed only for quotient counterexamples; otherwise left undetermined.
    #[serde(with = "tristate")]
    pub twist_adelic: Option<bool>,
    pub cm_point: bool,
    pub jordan: bool,
    pub classification: Classification,
    pub evidence: Vec<EvidenceItem>,
}

/// The pairs the search visits, in lexicographic order: primes
/// `l = 3 mod 4` with `l > 3`, primes `m = 3 mod 4` with `m > 7`, and
/// `(m/l) = -1`.
pub fn search_pairs(ell_max: u64, m_max: u64) -> Vec<(u64, u64)> {
    let ms: Vec<u64> = primes_up_to(m_max)
        .into_iter()
        .filter(|&m| m % 4 == 3 && m > 7)
        .collect();
    let mut pairs = Vec::new();
    for ell in primes_up_to(ell_max)
        .into_iter()
        .filter(|&l| l % 4 == 3 && l > 3)
    {
        for &m in ms.iter().filter(|&&m| m != ell) {
            if shimura_core::local::inert_in(m as i64, ell) {
                pairs.push((ell, m));
            }
        }
    }
    pairs
}

pub fn classify(
    adelic: Option<bool>,
    cm_point: bool,
    jordan: bool,
    twist_adelic: Option<bool>,
) -> CliResult<Classification> {
    if cm_point && (jordan || adelic == Some(false)) {
        return Err(Error::Consistency(format!(
            "a rational CM point contradicts adelic = {adelic:?}, jordan = {jordan}"
        ))
        .into());
    }
    Ok(if cm_point {
        Classification::HasRationalCmPoint
    } else if adelic == Some(false) {
        Classification::LocallyInsoluble
    } else if adelic == Some(true) && jordan {
        // the twist's points map to the quotient's, so an empty quotient
        // settles both; the twist verdict stays in `twist_adelic`
        Classification::CounterexampleQuotient
    } else if twist_adelic == Some(true) && jordan && adelic == Some(true) {
        Classification::CounterexampleTwist
    } else {
        Classification::Undecided
    })
}

fn check_pair(ell: u64, m: u64) -> CliResult<()> {
    if !(is_prime_u64(ell) && is_prime_u64(m) && ell % 4 == 3 && m % 4 == 3 && ell > 3 && m > 7) {
        return Err(CliError::Usage(format!(
            "({ell}, {m}) is outside the search family: primes l, m = 3 mod 4 with l > 3, m > 7"
        )));
    }
    Ok(())
}

/// Computes the record for one pair from scratch.
pub fn curve_report(ell: u64, m: u64) -> CliResult<CurveReport> {
    check_pair(ell, m)?;
    let disc = QuaternionDisc::new(ell * m)?;
    let genus_x = genus_curve(&disc)?;
    let genus_quot = genus_quotient(&disc, m)?
        .exact()
        .ok_or_else(|| Error::Consistency(format!("w_{m} on X_{} has fixed points", ell * m)))?;
    let unramified = fixed_point_free(&disc, m)?;
    let adelic = adelic_quotient(&disc, m)?;
    let cm = cm_rational_point(ell, m)?;
    let jordan = jordan_empty_over_k(ell, m)?;

    let mut evidence: Vec<EvidenceItem> = adelic
        .evidence
        .iter()
        .map(|v| local(CurveTag::Quotient, v))
        .collect();
    let mut twist_adelic = None;
    if classify(adelic.adelic, cm.flag, jordan.flag, None)?
        == Classification::CounterexampleQuotient
    {
        let twist = twist_everywhere_local(ell, m, -(ell as i64))?;
        twist_adelic = twist.everywhere_local;
        evidence.extend(twist.evidence.iter().map(|v| local(CurveTag::Twist, v)));
    }
    let classification = classify(adelic.adelic, cm.flag, jordan.flag, twist_adelic)?;
    let (cm_point, jordan_flag) = (cm.flag, jordan.flag);
    evidence.push(EvidenceItem::Global(cm));
    evidence.push(EvidenceItem::Global(jordan));
    Ok(CurveReport {
        ell,
        m,
        d: ell * m,
        genus_x,
        genus_quot,
        unramified,
        adelic: adelic.adelic,
        twist_adelic,
        cm_point,
        jordan: jordan_flag,
        classification,
        evidence,
    })
}

fn local(curve: CurveTag, v: &LocalVerdict) -> EvidenceItem {
    EvidenceItem::Local(LocalEvidence {
        curve,
        verdict: v.clone(),
    })
}

/// The record for one pair, through the cache.
pub fn cached_report(cache: &Cache, ell: u64, m: u64) -> CliResult<CurveReport> {
    cache.get_or_compute(&format!("report({ell},{m})"), || curve_report(ell, m))
}

/// Runs every pair of the search range in parallel and hands the records
/// to `emit` strictly in pair order. Completed pairs are cached as soon as
/// they finish, so an interrupted run resumes where it stopped.
pub fn search(
    cache: &Cache,
    ell_max: u64,
    m_max: u64,
    mut emit: impl FnMut(&CurveReport) -> CliResult<()>,
) -> CliResult<()> {
    if ell_max < 3 || m_max < 3 {
        return Err(CliError::Usage("search bounds must be at least 3".into()));
    }
    let pairs = search_pairs(ell_max, m_max);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|s| {
        s.spawn(|| {
            pairs
                .par_iter()
                .enumerate()
                .for_each_with(tx, |tx, (i, &(ell, m))| {
                    // a closed receiver means the consumer gave up
                    let _ = tx.send((i, cached_report(cache, ell, m)));
                });
        });
        // sequencing buffer: hold finished records until their turn
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (i, result) in rx {
            pending.insert(i, result);
            while let Some(result) = pending.remove(&next) {
                emit(&result?)?;
                next += 1;
            }
        }
        Ok(())
    })
}

impl CurveReport {
    /// Recomputes every piece of evidence through the underlying modules and
    /// checks that the flags and the classification follow from it.
    pub fn replay(&self) -> CliResult<()> {
        let fail = |what: String| {
            Err(CliError::Assertion(format!(
                "report({},{}): {what}",
                self.ell, self.m
            )))
        };
        let disc = QuaternionDisc::new(self.d)?;
        for item in &self.evidence {
            match item {
                EvidenceItem::Local(LocalEvidence { curve, verdict }) => {
                    let fresh = match curve {
                        CurveTag::Quotient => quotient_local(&disc, self.m, verdict.place)?,
                        CurveTag::Twist => {
                            twist_local(self.ell, self.m, -(self.ell as i64), verdict.place)?
                        }
                    };
                    if &fresh != verdict {
                        return fail(format!(
                            "{curve:?} verdict at {} does not replay",
                            verdict.place
                        ));
                    }
                }
                EvidenceItem::Global(g) => {
                    g.reverify()?;
                    if g.ell != self.ell || g.m != self.m {
                        return fail(format!("evidence for ({}, {}) is misfiled", g.ell, g.m));
                    }
                }
            }
        }
        let fresh = curve_report(self.ell, self.m)?;
        for (name, a, b) in [
            (
                "adelic",
                format!("{:?}", self.adelic),
                format!("{:?}", fresh.adelic),
            ),
            (
                "twist_adelic",
                format!("{:?}", self.twist_adelic),
                format!("{:?}", fresh.twist_adelic),
            ),
            (
                "cm_point",
                self.cm_point.to_string(),
                fresh.cm_point.to_string(),
            ),
            ("jordan", self.jordan.to_string(), fresh.jordan.to_string()),
            (
                "classification",
                format!("{:?}", self.classification),
                format!("{:?}", fresh.classification),
            ),
        ] {
            if a != b {
                return fail(format!("{name} is {a}, replay gives {b}"));
            }
        }
        if self != &fresh {
            return fail("evidence list differs from a fresh computation".into());
        }
        let expect = classify(self.adelic, self.cm_point, self.jordan, self.twist_adelic)?;
        if expect != self.classification {
            return fail(format!(
                "classification {:?} should be {expect:?}",
                self.classification
            ));
        }
        Ok(())
    }
}
