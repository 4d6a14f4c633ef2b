//! Point counts of `X_D`, its twists and quotients over `F_{p^r}` for
//! `D <= 210`, `p <= 50`, `r <= 4`.

use shimura_core::arith::primes_up_to;
use shimura_core::pointcount::{
    count_curve, count_quotient, count_twist, weil_zeta_check, CountRequest, CurveKind,
};
use shimura_core::quatsigma::{genus_curve, genus_quotient, QuaternionDisc};

fn indefinite_discs(bound: u64) -> Vec<QuaternionDisc> {
    (6..=bound)
        .filter_map(|d| QuaternionDisc::new(d).ok())
        .filter(|d| d.is_indefinite())
        .collect()
}

fn divisors_above_one(disc: &QuaternionDisc) -> Vec<u64> {
    (2..=disc.value())
        .filter(|m| disc.value() % m == 0)
        .collect()
}

/// `s_r = p^r + 1 - N_r` predicted from `s_1, ..., s_g` for genus `g <= 2`,
/// by Newton's identities and the functional equation.
fn predicted_traces(g: u64, p: i128, s: &[i128; 4]) -> Option<[i128; 4]> {
    match g {
        0 => Some([0; 4]),
        1 => {
            let (e1, e2) = (s[0], p);
            let s2 = e1 * s[0] - 2 * e2;
            let s3 = e1 * s2 - e2 * s[0];
            let s4 = e1 * s3 - e2 * s2;
            Some([s[0], s2, s3, s4])
        }
        2 => {
            let e1 = s[0];
            let e2 = (s[0] * s[0] - s[1]) / 2;
            let (e3, e4) = (p * e1, p * p);
            let s3 = e1 * s[1] - e2 * s[0] + 3 * e3;
            let s4 = e1 * s3 - e2 * s[1] + e3 * s[0] - 4 * e4;
            Some([s[0], s[1], s3, s4])
        }
        _ => None,
    }
}

fn check_zeta_determined(disc: &QuaternionDisc, kind: CurveKind, genus: u64, p: u64) {
    let mut s = [0i128; 4];
    for r in 1..=4u32 {
        let n = CountRequest {
            disc: disc.clone(),
            kind,
            p,
            r,
        }
        .count()
        .unwrap();
        s[r as usize - 1] = (p as i128).pow(r) + 1 - n as i128;
    }
    if let Some(expect) = predicted_traces(genus, p as i128, &s) {
        assert_eq!(s, expect, "D = {disc}, {kind:?}, p = {p}, genus {genus}");
    }
}

#[test]
fn counts_satisfy_doubling_weil_and_zeta_constraints() {
    let primes = primes_up_to(50);
    for disc in indefinite_discs(210) {
        let g = genus_curve(&disc).unwrap();
        for &p in primes.iter().filter(|&&p| disc.value() % p != 0) {
            weil_zeta_check(&disc, CurveKind::Curve, p).unwrap();
            check_zeta_determined(&disc, CurveKind::Curve, g, p);
            for m in divisors_above_one(&disc) {
                weil_zeta_check(&disc, CurveKind::Quotient { m }, p).unwrap();
                weil_zeta_check(&disc, CurveKind::Twist { m }, p).unwrap();
                check_zeta_determined(&disc, CurveKind::Twist { m }, g, p);
                if let Some(gq) = genus_quotient(&disc, m).unwrap().exact() {
                    check_zeta_determined(&disc, CurveKind::Quotient { m }, gq, p);
                }
                for r in 1..=4 {
                    let x = count_curve(&disc, p, r).unwrap();
                    let q = count_quotient(&disc, m, p, r).unwrap();
                    let t = count_twist(&disc, m, p, r).unwrap();
                    if r % 2 == 1 {
                        assert_eq!(2 * q, x + t, "D = {disc}, m = {m}, p = {p}, r = {r}");
                    } else {
                        assert_eq!(t, x, "D = {disc}, m = {m}, p = {p}, r = {r}");
                    }
                }
                for r in 1..=2 {
                    for (small, big) in [
                        (count_curve(&disc, p, r), count_curve(&disc, p, 2 * r)),
                        (
                            count_quotient(&disc, m, p, r),
                            count_quotient(&disc, m, p, 2 * r),
                        ),
                        (count_twist(&disc, m, p, r), count_twist(&disc, m, p, 2 * r)),
                    ] {
                        assert!(
                            small.unwrap() <= big.unwrap(),
                            "D = {disc}, m = {m}, p = {p}, r = {r}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn genus_zero_curves_are_projective_lines() {
    for d in [6u64, 10, 22] {
        let disc = QuaternionDisc::new(d).unwrap();
        assert_eq!(genus_curve(&disc).unwrap(), 0);
        for p in primes_up_to(50).into_iter().filter(|p| d % p != 0) {
            for r in 1..=4 {
                assert_eq!(count_curve(&disc, p, r).unwrap(), p.pow(r) + 1);
                assert_eq!(count_quotient(&disc, d, p, r).unwrap(), p.pow(r) + 1);
            }
        }
    }
}
