//! Global criteria for rational points on `X_{l m}^(m)`: rational CM
//! points, the ray-class non-surjection test over `Q(sqrt -l)`, the descent
//! from `Q(sqrt -l)` to `Q`, and degree-one divisors.

use serde::{Deserialize, Serialize};

use crate::arith::{fundamental_discriminant, is_prime_u64};
use crate::classfield::{ray_class_group, surjection_exists, FiniteAbelianGroup};
use crate::error::{domain, Error, Result};
use crate::imagquad::{class_group, class_number};
use crate::local::inert_in;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvidenceKind {
    CmPoint,
    JordanEmpty,
    DescentEmpty,
    DegreeOneDivisor,
}

/// Everything needed to recompute a global decision without redoing the
/// expensive parts (class groups, ray class groups).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    CmPoint {
        h_minus_ell: u64,
        disc_minus_ell_m: i64,
        h_minus_ell_m: u64,
    },
    Jordan {
        ray_class: FiniteAbelianGroup,
        target: FiniteAbelianGroup,
        surjects: bool,
    },
    Descent {
        verdict: DescentVerdict,
        m_mod_4: u64,
        certificates: ExternalCertificates,
        jordan: Option<Box<GlobalEvidence>>,
    },
    DegreeOne {
        hypotheses: bool,
        h_minus_ell: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalEvidence {
    pub kind: EvidenceKind,
    pub ell: u64,
    pub m: u64,
    pub flag: bool,
    pub witness: Witness,
}

impl GlobalEvidence {
    /// Recomputes the decision from the stored payload.
    pub fn reverify(&self) -> Result<()> {
        let recomputed = match (&self.kind, &self.witness) {
            (
                EvidenceKind::CmPoint,
                Witness::CmPoint {
                    h_minus_ell,
                    h_minus_ell_m,
                    ..
                },
            ) => *h_minus_ell == 1 || *h_minus_ell_m == 2,
            (
                EvidenceKind::JordanEmpty,
                Witness::Jordan {
                    ray_class,
                    target,
                    surjects,
                },
            ) => {
                if surjection_exists(ray_class, target) != *surjects {
                    return Err(Error::Consistency(format!(
                        "stored surjection flag {surjects} does not match the groups {:?} and {:?}",
                        ray_class.invariant_factors(),
                        target.invariant_factors()
                    )));
                }
                !surjects
            }
            (
                EvidenceKind::DescentEmpty,
                Witness::Descent {
                    verdict,
                    m_mod_4,
                    certificates,
                    jordan,
                },
            ) => {
                let over_k = match jordan {
                    Some(j) => {
                        j.reverify()?;
                        j.flag
                    }
                    None => false,
                } || certificates.empty_over_q_sqrt_minus_ell;
                let expected = if *m_mod_4 == 3 {
                    if over_k {
                        DescentVerdict::RationallyEmpty
                    } else {
                        DescentVerdict::NoConclusion
                    }
                } else if over_k && certificates.empty_over_q_sqrt_minus_ell_m {
                    DescentVerdict::RationallyEmpty
                } else {
                    DescentVerdict::Conditional
                };
                if expected != *verdict {
                    return Err(Error::Consistency(format!(
                        "stored descent verdict {verdict:?} does not follow from its inputs ({expected:?})"
                    )));
                }
                *verdict == DescentVerdict::RationallyEmpty
            }
            (
                EvidenceKind::DegreeOneDivisor,
                Witness::DegreeOne {
                    hypotheses,
                    h_minus_ell,
                },
            ) => *hypotheses && h_minus_ell % 2 == 1,
            _ => {
                return Err(Error::Consistency(format!(
                    "evidence kind {:?} carries a mismatched witness",
                    self.kind
                )))
            }
        };
        if recomputed != self.flag {
            return Err(Error::Consistency(format!(
                "{:?} evidence for ({}, {}) stores {} but its payload gives {}",
                self.kind, self.ell, self.m, self.flag, recomputed
            )));
        }
        Ok(())
    }
}

fn check_odd_prime(name: &str, v: u64) -> Result<()> {
    if v == 2 || !is_prime_u64(v) {
        return domain(format!("{name} = {v} is not an odd prime"));
    }
    Ok(())
}

/// The common hypotheses: odd primes, `l = 3 mod 4`, `(m/l) = -1`.
fn check_pair(ell: u64, m: u64) -> Result<()> {
    check_odd_prime("l", ell)?;
    check_odd_prime("m", m)?;
    if ell % 4 != 3 {
        return domain(format!("l = {ell} is not 3 mod 4"));
    }
    if !inert_in(m as i64, ell) {
        return domain(format!("(m/l) = ({m}/{ell}) is not -1"));
    }
    Ok(())
}

/// Whether `X_{l m}^(m)` has a rational CM point: `h(-l) = 1` or the class
/// number of `Q(sqrt -l m)` is 2.
pub fn cm_rational_point(ell: u64, m: u64) -> Result<GlobalEvidence> {
    check_pair(ell, m)?;
    let h_minus_ell = class_number(-(ell as i64))?;
    let (disc, _) = fundamental_discriminant(-4 * (ell * m) as i64)?;
    let h_minus_ell_m = class_number(disc)?;
    Ok(GlobalEvidence {
        kind: EvidenceKind::CmPoint,
        ell,
        m,
        flag: h_minus_ell == 1 || h_minus_ell_m == 2,
        witness: Witness::CmPoint {
            h_minus_ell,
            disc_minus_ell_m: disc,
            h_minus_ell_m,
        },
    })
}

/// The target group `Z/((m^2-1)/12) x Cl(-l)` of the non-surjection test.
pub fn jordan_target(ell: u64, m: u64) -> Result<FiniteAbelianGroup> {
    let cl = class_group(-(ell as i64))?.structure;
    Ok(FiniteAbelianGroup::cyclic((m * m - 1) / 12).product(&cl))
}

/// `X_{l m}(Q(sqrt -l))` is empty when the ray class group of conductor `m`
/// does not surject onto `Z/((m^2-1)/12) x Cl(-l)`.
pub fn jordan_empty_over_k(ell: u64, m: u64) -> Result<GlobalEvidence> {
    check_odd_prime("l", ell)?;
    check_odd_prime("m", m)?;
    if ell % 4 != 3 || m % 4 != 3 {
        return domain(format!("l = {ell} and m = {m} must both be 3 mod 4"));
    }
    if m <= 7 {
        return domain(format!("m = {m} must exceed 7"));
    }
    if !inert_in(m as i64, ell) {
        return domain(format!("(m/l) = ({m}/{ell}) is not -1"));
    }
    if ell == 3 {
        return Err(Error::Unsupported(
            "l = 3: the unit group of Q(sqrt -3) is not handled by the ray class computation"
                .into(),
        ));
    }
    let ray_class = ray_class_group(ell, m)?;
    let target = jordan_target(ell, m)?;
    let surjects = surjection_exists(&ray_class, &target);
    Ok(GlobalEvidence {
        kind: EvidenceKind::JordanEmpty,
        ell,
        m,
        flag: !surjects,
        witness: Witness::Jordan {
            ray_class,
            target,
            surjects,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescentVerdict {
    RationallyEmpty,
    NoConclusion,
    /// Needs an emptiness certificate over `Q(sqrt -l m)` that nothing here
    /// produces.
    Conditional,
}

/// Emptiness of `X_{l m}` over quadratic fields, established elsewhere and
/// passed in by the caller.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalCertificates {
    pub empty_over_q_sqrt_minus_ell: bool,
    pub empty_over_q_sqrt_minus_ell_m: bool,
}

/// Descends emptiness over `Q(sqrt -l)` (and, for `m = 1 mod 4`, over
/// `Q(sqrt -l m)`) to emptiness of `X_{l m}^(m)(Q)`.
pub fn descent_verdict(
    ell: u64,
    m: u64,
    certificates: ExternalCertificates,
) -> Result<(DescentVerdict, GlobalEvidence)> {
    check_pair(ell, m)?;
    if ell == 3 {
        return Err(Error::Unsupported(
            "l = 3: the unit group of Q(sqrt -3) is not handled by the ray class computation"
                .into(),
        ));
    }
    let jordan = if m % 4 == 3 && m > 7 {
        Some(jordan_empty_over_k(ell, m)?)
    } else {
        None
    };
    let over_k =
        jordan.as_ref().is_some_and(|j| j.flag) || certificates.empty_over_q_sqrt_minus_ell;
    let verdict = if m % 4 == 3 {
        if over_k {
            DescentVerdict::RationallyEmpty
        } else {
            DescentVerdict::NoConclusion
        }
    } else if over_k && certificates.empty_over_q_sqrt_minus_ell_m {
        DescentVerdict::RationallyEmpty
    } else {
        DescentVerdict::Conditional
    };
    if verdict == DescentVerdict::RationallyEmpty && cm_rational_point(ell, m)?.flag {
        return Err(Error::Consistency(format!(
            "({ell}, {m}) has a rational CM point yet the descent certifies emptiness"
        )));
    }
    let evidence = GlobalEvidence {
        kind: EvidenceKind::DescentEmpty,
        ell,
        m,
        flag: verdict == DescentVerdict::RationallyEmpty,
        witness: Witness::Descent {
            verdict,
            m_mod_4: m % 4,
            certificates,
            jordan: jordan.map(Box::new),
        },
    };
    Ok((verdict, evidence))
}

/// Whether `^{-l} X_{l m}` and `X_{l m}^(m)` are known to carry a rational
/// divisor of degree one: `l = m = 3 mod 4`, `(m/l) = -1` and `h(-l)` odd.
/// Arguments outside that shape give `false`.
pub fn degree_one_divisor(ell: u64, m: u64) -> Result<GlobalEvidence> {
    let hypotheses = ell % 4 == 3
        && m % 4 == 3
        && is_prime_u64(ell)
        && is_prime_u64(m)
        && inert_in(m as i64, ell);
    let h_minus_ell = if is_prime_u64(ell) && ell % 4 == 3 {
        class_number(-(ell as i64))?
    } else {
        0
    };
    Ok(GlobalEvidence {
        kind: EvidenceKind::DegreeOneDivisor,
        ell,
        m,
        flag: hypotheses && h_minus_ell % 2 == 1,
        witness: Witness::DegreeOne {
            hypotheses,
            h_minus_ell,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cm_point_examples() {
        let e = cm_rational_point(23, 107).unwrap();
        assert!(!e.flag);
        match &e.witness {
            Witness::CmPoint {
                h_minus_ell,
                disc_minus_ell_m,
                ..
            } => {
                assert_eq!(*h_minus_ell, 3);
                assert_eq!(*disc_minus_ell_m, -9844);
            }
            w => panic!("unexpected witness {w:?}"),
        }
        e.reverify().unwrap();
        // (3/7) = -1 and h(-7) = 1
        assert!(cm_rational_point(7, 3).unwrap().flag);
        // (2/7) = 1
        assert!(matches!(cm_rational_point(7, 2), Err(Error::Domain(_))));
        assert!(matches!(cm_rational_point(7, 11), Err(Error::Domain(_))));
    }

    #[test]
    fn jordan_flagship() {
        let e = jordan_empty_over_k(23, 107).unwrap();
        assert!(e.flag);
        match &e.witness {
            Witness::Jordan {
                ray_class, target, ..
            } => {
                assert_eq!(ray_class.invariant_factors(), &[17172]);
                assert_eq!(target.invariant_factors(), &[3, 954]);
            }
            w => panic!("unexpected witness {w:?}"),
        }
        e.reverify().unwrap();
        assert!(jordan_empty_over_k(23, 7).is_err());
        assert!(matches!(
            jordan_empty_over_k(3, 11),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn tampered_evidence_fails() {
        let mut e = jordan_empty_over_k(23, 107).unwrap();
        e.flag = false;
        assert!(e.reverify().is_err());
    }

    #[test]
    fn descent_examples() {
        let (v, e) = descent_verdict(23, 107, ExternalCertificates::default()).unwrap();
        assert_eq!(v, DescentVerdict::RationallyEmpty);
        e.reverify().unwrap();
        // 5 = 1 mod 4, (5/23) = -1
        let (v, _) = descent_verdict(23, 5, ExternalCertificates::default()).unwrap();
        assert_eq!(v, DescentVerdict::Conditional);
        let both = ExternalCertificates {
            empty_over_q_sqrt_minus_ell: true,
            empty_over_q_sqrt_minus_ell_m: true,
        };
        let (v, e) = descent_verdict(23, 17, both).unwrap();
        assert_eq!(v, DescentVerdict::RationallyEmpty);
        e.reverify().unwrap();
        // h(-115) = 2: certifying emptiness contradicts the rational CM point
        assert!(matches!(
            descent_verdict(23, 5, both),
            Err(Error::Consistency(_))
        ));
        // (7, 3): rational CM point, small m
        let (v, _) = descent_verdict(7, 3, ExternalCertificates::default()).unwrap();
        assert_eq!(v, DescentVerdict::NoConclusion);
    }

    #[test]
    fn degree_one_examples() {
        assert!(degree_one_divisor(23, 107).unwrap().flag);
        // h(-39) is not relevant; h(-47) = 5 odd, but (5/47): 5 = 1 mod 4
        assert!(!degree_one_divisor(47, 5).unwrap().flag);
        // (m/l) = 1: (2/7) = 1 and 2 is not 3 mod 4 either; (11/7) = (4/7) = 1
        assert!(!degree_one_divisor(7, 11).unwrap().flag);
        assert!(!degree_one_divisor(9, 11).unwrap().flag);
    }
}
