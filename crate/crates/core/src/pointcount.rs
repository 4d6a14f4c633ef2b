//! Point counts of the good reductions of `X_D`, of its quadratic twist by
//! `w_m`, and of the quotient `X_D / w_m`, over `F_{p^r}`.
//!
//! All three are assembled from the sums `Sigma_n(D)` at `n = p^r, m p^r`
//! and their `r - 2` counterparts, in exact arithmetic (scaled by 24).

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime_u64, isqrt};
use crate::error::{domain, Error, Result};
use crate::quatsigma::{genus_curve, genus_quotient, twelve_sigma, QuaternionDisc};

/// Which curve over `F_p` is being counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "curve", rename_all = "kebab-case")]
pub enum CurveKind {
    Curve,
    Quotient { m: u64 },
    Twist { m: u64 },
}

/// A request for `|C(F_{p^r})|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRequest {
    pub disc: QuaternionDisc,
    pub kind: CurveKind,
    pub p: u64,
    pub r: u32,
}

impl CountRequest {
    pub fn count(&self) -> Result<u64> {
        match self.kind {
            CurveKind::Curve => count_curve(&self.disc, self.p, self.r),
            CurveKind::Quotient { m } => count_quotient(&self.disc, m, self.p, self.r),
            CurveKind::Twist { m } => count_twist(&self.disc, m, self.p, self.r),
        }
    }
}

fn check_good_prime(disc: &QuaternionDisc, p: u64, r: u32) -> Result<()> {
    if !is_prime_u64(p) {
        return domain(format!("{p} is not prime"));
    }
    if disc.value() % p == 0 {
        return domain(format!("{p} divides D = {disc}: bad reduction"));
    }
    if r == 0 {
        return domain("r must be positive");
    }
    Ok(())
}

fn check_m(disc: &QuaternionDisc, m: u64) -> Result<()> {
    if m <= 1 || !disc.divides(m) {
        return domain(format!("m = {m} is not a divisor > 1 of D = {disc}"));
    }
    Ok(())
}

/// `24 * Sigma_{k p^e}(D)`, zero for negative `e`.
fn sigma24(disc: &QuaternionDisc, k: u64, p: u64, e: i32) -> Result<i128> {
    if e < 0 {
        return Ok(0);
    }
    let n = (p as i128)
        .checked_pow(e as u32)
        .and_then(|pe| pe.checked_mul(k as i128))
        .filter(|&n| n <= i64::MAX as i128 / 4)
        .ok_or(Error::Overflow("Sigma index"))?;
    Ok(2 * twelve_sigma(n as i64, disc)?)
}

fn finish(twenty_four: i128, what: &str) -> Result<u64> {
    if twenty_four % 24 != 0 {
        return Err(Error::Consistency(format!(
            "{what}: {twenty_four}/24 is not an integer"
        )));
    }
    let n = twenty_four / 24;
    if n < 0 {
        return Err(Error::Consistency(format!("{what}: negative count {n}")));
    }
    u64::try_from(n).map_err(|_| Error::Overflow("point count"))
}

fn delta(r: u32) -> i128 {
    i128::from(r % 2 == 0)
}

/// `|X_D^(m)(F_{p^r})|`.
pub fn count_quotient(disc: &QuaternionDisc, m: u64, p: u64, r: u32) -> Result<u64> {
    check_good_prime(disc, p, r)?;
    check_m(disc, m)?;
    let e = r as i32;
    let top = sigma24(disc, 1, p, e)? + sigma24(disc, m, p, e)?;
    let low = sigma24(disc, 1, p, e - 2)? + sigma24(disc, m, p, e - 2)?;
    let ss = delta(r) * (p as i128 - 1) * disc.phi() as i128;
    finish(top / 2 - p as i128 * low / 2 + ss, "quotient count")
}

/// `|X_D(F_{p^r})|`.
pub fn count_curve(disc: &QuaternionDisc, p: u64, r: u32) -> Result<u64> {
    check_good_prime(disc, p, r)?;
    let e = r as i32;
    let ss = delta(r) * 2 * (p as i128 - 1) * disc.phi() as i128;
    finish(
        sigma24(disc, 1, p, e)? - p as i128 * sigma24(disc, 1, p, e - 2)? + ss,
        "curve count",
    )
}

/// `|^s X_D(F_{p^r})|` for the nontrivial twist by `w_m` over `F_p`. For
/// even `r` the twist becomes isomorphic to the curve itself.
pub fn count_twist(disc: &QuaternionDisc, m: u64, p: u64, r: u32) -> Result<u64> {
    check_good_prime(disc, p, r)?;
    check_m(disc, m)?;
    if r % 2 == 0 {
        return count_curve(disc, p, r);
    }
    let e = r as i32;
    finish(
        sigma24(disc, m, p, e)? - p as i128 * sigma24(disc, m, p, e - 2)?,
        "twist count",
    )
}

/// One row of a Weil-bound check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeilRow {
    pub r: u32,
    pub count: u64,
    /// `p^r + 1 - count`
    pub trace: i128,
    /// `floor(2 g p^{r/2})`
    pub bound: u128,
}

/// Result of checking the counts over `F_p, ..., F_{p^4}` against the
/// Weil bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeilReport {
    pub kind: CurveKind,
    pub p: u64,
    pub genus: u64,
    /// `false` when `genus` is only an upper bound.
    pub genus_exact: bool,
    pub rows: Vec<WeilRow>,
}

/// `floor(2 g sqrt(p^r))`, exactly.
fn weil_bound(g: u64, p: u64, r: u32) -> u128 {
    let pr = (p as u128).pow(r);
    let four_g2_pr = 4 * (g as u128) * (g as u128) * pr;
    let mut s = isqrt(four_g2_pr.min(u64::MAX as u128) as u64) as u128;
    while s * s > four_g2_pr {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= four_g2_pr {
        s += 1;
    }
    s
}

/// Counts the chosen curve over `F_{p^r}` for `r = 1..=4` and checks
/// `|p^r + 1 - N_r| <= 2 g p^{r/2}`, plus integrality of the second
/// elementary symmetric function of the Frobenius roots
/// (`(s_1^2 - s_2)/2` with `s_r = p^r + 1 - N_r`).
pub fn weil_zeta_check(disc: &QuaternionDisc, kind: CurveKind, p: u64) -> Result<WeilReport> {
    let (genus, genus_exact) = match kind {
        CurveKind::Curve | CurveKind::Twist { .. } => (genus_curve(disc)?, true),
        CurveKind::Quotient { m } => {
            let g = genus_quotient(disc, m)?;
            (g.bound(), g.exact().is_some())
        }
    };
    let mut rows = Vec::with_capacity(4);
    for r in 1..=4u32 {
        let req = CountRequest {
            disc: disc.clone(),
            kind,
            p,
            r,
        };
        let count = req.count()?;
        let trace = (p as i128).pow(r) + 1 - count as i128;
        let bound = weil_bound(genus, p, r);
        if trace.unsigned_abs() > bound {
            return Err(Error::Consistency(format!(
                "Weil bound violated for {kind:?} at p = {p}, r = {r}: |{trace}| > {bound}"
            )));
        }
        rows.push(WeilRow {
            r,
            count,
            trace,
            bound,
        });
    }
    let (s1, s2) = (rows[0].trace, rows[1].trace);
    if (s1 * s1 - s2) % 2 != 0 {
        return Err(Error::Consistency(format!(
            "{kind:?} at p = {p}, r = 2: s1^2 - s2 = {} is odd",
            s1 * s1 - s2
        )));
    }
    Ok(WeilReport {
        kind,
        p,
        genus,
        genus_exact,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quatsigma::sigma_value;

    fn disc(d: u64) -> QuaternionDisc {
        QuaternionDisc::new(d).unwrap()
    }

    #[test]
    fn genus_zero_counts() {
        let d6 = disc(6);
        assert_eq!(count_quotient(&d6, 6, 5, 1).unwrap(), 6);
        assert_eq!(count_curve(&d6, 5, 1).unwrap(), 6);
        assert_eq!(count_twist(&d6, 6, 5, 1).unwrap(), 6);
        for r in 1..=4 {
            assert_eq!(count_curve(&d6, 5, r).unwrap(), 5u64.pow(r) + 1);
        }
        let rep = weil_zeta_check(&d6, CurveKind::Curve, 5).unwrap();
        assert!(rep.rows.iter().all(|row| row.trace == 0));
    }

    #[test]
    fn quotient_count_matches_sigma_formula() {
        let d = disc(2461);
        let expect = (sigma_value(2, &d).unwrap() + sigma_value(214, &d).unwrap()) / 2;
        assert!(expect.is_integer());
        assert_eq!(
            count_quotient(&d, 107, 2, 1).unwrap() as i128,
            expect.to_integer()
        );
    }

    #[test]
    fn twist_even_r_is_curve() {
        let d = disc(2461);
        assert_eq!(
            count_twist(&d, 107, 5, 2).unwrap(),
            count_curve(&d, 5, 2).unwrap()
        );
        assert_eq!(
            count_twist(&d, 107, 5, 1).unwrap() as i128,
            sigma_value(535, &d).unwrap().to_integer()
        );
        assert!(count_twist(&d, 107, 5, 1).unwrap() > 0);
    }

    #[test]
    fn bad_inputs() {
        let d = disc(2461);
        assert!(count_curve(&d, 23, 1).is_err());
        assert!(count_curve(&d, 4, 1).is_err());
        assert!(count_quotient(&d, 5, 2, 1).is_err());
        assert!(count_curve(&d, 2, 0).is_err());
    }

    #[test]
    fn weil_bound_is_exact_floor() {
        assert_eq!(weil_bound(97, 2, 1), 274); // 2 * 97 * sqrt 2 = 274.36
        assert_eq!(weil_bound(1, 4, 1), 4);
        assert_eq!(weil_bound(0, 5, 3), 0);
    }

    #[test]
    fn flagship_weil_check_at_two() {
        let rep = weil_zeta_check(&disc(2461), CurveKind::Quotient { m: 107 }, 2).unwrap();
        assert_eq!(rep.genus, 97);
        assert!(rep.genus_exact);
        assert!(rep.rows[0].trace.unsigned_abs() <= 274);
    }
}
