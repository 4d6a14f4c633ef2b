//! Finite abelian groups through Smith normal form, and ray class groups of
//! imaginary quadratic fields with an inert prime conductor.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::arith::{factor_u64, is_prime_u64, isqrt, kronecker, primes_up_to, sqrt_mod_prime};
use crate::error::{domain, Error, Result};
use crate::imagquad::{
    class_number, prime_behavior, principal_generator, PrimeBehavior, QuadIdeal,
};

/// A finite abelian group `Z/d_1 x ... x Z/d_k` with `d_1 | d_2 | ... | d_k`
/// and every `d_i >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    invariant_factors: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(invariant_factors: Vec<u64>) -> Result<Self> {
        if invariant_factors.iter().any(|&d| d < 2) {
            return domain("invariant factors must be at least 2");
        }
        if invariant_factors.windows(2).any(|w| w[1] % w[0] != 0) {
            return domain(format!("{invariant_factors:?} is not a divisibility chain"));
        }
        Ok(FiniteAbelianGroup { invariant_factors })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup {
            invariant_factors: Vec::new(),
        }
    }

    pub fn cyclic(n: u64) -> Self {
        Self::from_orders(&[n])
    }

    /// The group `Z/n_1 x ... x Z/n_r` for arbitrary positive `n_i`.
    pub fn from_orders(orders: &[u64]) -> Self {
        let rows: Vec<Vec<i64>> = orders
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut row = vec![0i64; orders.len()];
                row[i] = n as i64;
                row
            })
            .collect();
        Self::from_relations(&rows, orders.len()).expect("positive orders give a finite group")
    }

    /// Cokernel of the relation matrix on `generators` generators. Fails if
    /// the relations do not cut out a finite group.
    pub fn from_relations(relations: &[Vec<i64>], generators: usize) -> Result<Self> {
        let mut rows = relations.to_vec();
        for r in rows.iter_mut() {
            if r.len() > generators {
                return domain("relation longer than the generator count");
            }
            r.resize(generators, 0);
        }
        let snf = smith_normal_form(&rows, generators);
        if snf.diagonal.len() < generators || snf.diagonal.contains(&0) {
            return Err(Error::Domain("relations define an infinite group".into()));
        }
        let factors = snf
            .diagonal
            .iter()
            .filter(|&&d| d != 1)
            .map(|&d| u64::try_from(d).map_err(|_| Error::Overflow("invariant factor")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn order(&self) -> u128 {
        self.invariant_factors.iter().map(|&d| d as u128).product()
    }

    pub fn is_cyclic(&self) -> bool {
        self.invariant_factors.len() <= 1
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut orders = self.invariant_factors.clone();
        orders.extend_from_slice(&other.invariant_factors);
        Self::from_orders(&orders)
    }

    /// Number of invariant factors divisible by `q`.
    fn count_divisible(&self, q: u64) -> usize {
        self.invariant_factors
            .iter()
            .filter(|&&d| d % q == 0)
            .count()
    }
}

/// Result of a Smith normal form computation: `u * m * v` is the
/// `rows x cols` matrix with `diagonal` on its main diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub diagonal: Vec<i128>,
    pub u: Vec<Vec<i128>>,
    pub v: Vec<Vec<i128>>,
}

impl SmithForm {
    /// Invariant factors of the cokernel, dropping units; zeros denote free
    /// summands.
    pub fn invariant_factors(&self, cols: usize) -> Vec<i128> {
        let mut out: Vec<i128> = self.diagonal.iter().copied().filter(|&d| d != 1).collect();
        out.extend(std::iter::repeat_n(
            0,
            cols.saturating_sub(self.diagonal.len()),
        ));
        out
    }
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<i128>], b: &[Vec<i128>], inner: usize, cols: usize) -> Vec<Vec<i128>> {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Smith normal form of an integer matrix with `cols` columns, with
/// unimodular witnesses. Rows are relations, columns generators.
pub fn smith_normal_form(m: &[Vec<i64>], cols: usize) -> SmithForm {
    let rows = m.len();
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| {
            (0..cols)
                .map(|j| r.get(j).copied().unwrap_or(0) as i128)
                .collect()
        })
        .collect();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut diagonal = Vec::new();

    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return SmithForm { diagonal, u, v };
            };
            a.swap(t, pi);
            u.swap(t, pi);
            for r in a.iter_mut() {
                r.swap(t, pj);
            }
            for r in v.iter_mut() {
                r.swap(t, pj);
            }

            let p = a[t][t];
            let mut clean = true;
            for i in (t + 1)..rows {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in 0..cols {
                        a[i][j] -= q * a[t][j];
                    }
                    for j in 0..rows {
                        u[i][j] -= q * u[t][j];
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in (t + 1)..cols {
                let q = a[t][j] / p;
                if q != 0 {
                    for i in 0..rows {
                        a[i][j] -= q * a[i][t];
                    }
                    for i in 0..cols {
                        v[i][j] -= q * v[i][t];
                    }
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            let offender = ((t + 1)..rows).find(|&i| ((t + 1)..cols).any(|j| a[i][j] % p != 0));
            if let Some(i) = offender {
                for j in 0..cols {
                    a[t][j] += a[i][j];
                }
                for j in 0..rows {
                    u[t][j] += u[i][j];
                }
                continue;
            }
            break;
        }
        if a[t][t] < 0 {
            for j in 0..cols {
                a[t][j] = -a[t][j];
            }
            for j in 0..rows {
                u[t][j] = -u[t][j];
            }
        }
        diagonal.push(a[t][t]);
    }
    SmithForm { diagonal, u, v }
}

/// Whether `g` surjects onto `h`: for every prime power `p^j`, `g` must have
/// at least as many invariant factors divisible by `p^j` as `h` has.
pub fn surjection_exists(g: &FiniteAbelianGroup, h: &FiniteAbelianGroup) -> bool {
    let mut primes: Vec<u64> = h
        .invariant_factors()
        .iter()
        .flat_map(|&d| factor_u64(d).into_iter().map(|(p, _)| p))
        .collect();
    primes.sort_unstable();
    primes.dedup();
    primes.into_iter().all(|p| {
        let mut q = p;
        loop {
            let need = h.count_divisible(q);
            if need == 0 {
                return true;
            }
            if g.count_divisible(q) < need {
                return false;
            }
            match q.checked_mul(p) {
                Some(next) => q = next,
                None => return true,
            }
        }
    })
}

/// Builds a triangular presentation of the group generated by `elements`
/// inside a group of known `order`. Elements are consumed until the
/// generated subgroup has that order. Returns the positions of the
/// elements kept as generators, and one relation row per generator of the
/// form `k_j e_j - sum_{i<j} c_i e_i` with `g_j^{k_j} = prod g_i^{c_i}`.
pub fn staircase_relations<E, I, F>(
    elements: I,
    identity: E,
    mul: F,
    order: u64,
) -> (Vec<usize>, Vec<Vec<i64>>)
where
    E: Eq + Hash + Clone,
    I: IntoIterator<Item = E>,
    F: Fn(&E, &E) -> E,
{
    let mut known: HashMap<E, Vec<i64>> = HashMap::new();
    known.insert(identity, Vec::new());
    let mut chosen = Vec::new();
    let mut relations: Vec<Vec<i64>> = Vec::new();
    for (pos, g) in elements.into_iter().enumerate() {
        if known.len() as u64 >= order {
            break;
        }
        if known.contains_key(&g) {
            continue;
        }
        let mut k: i64 = 1;
        let mut x = g.clone();
        while !known.contains_key(&x) {
            x = mul(&x, &g);
            k += 1;
        }
        let idx = chosen.len();
        let mut row: Vec<i64> = known[&x].iter().map(|c| -c).collect();
        row.resize(idx, 0);
        row.push(k);
        relations.push(row);
        chosen.push(pos);

        let old: Vec<(E, Vec<i64>)> = known.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        let mut power = g.clone();
        for j in 1..k {
            for (e, c) in &old {
                let mut coords = c.clone();
                coords.resize(idx, 0);
                coords.push(j);
                known.insert(mul(e, &power), coords);
            }
            power = mul(&power, &g);
        }
    }
    let n = chosen.len();
    for row in relations.iter_mut() {
        row.resize(n, 0);
    }
    (chosen, relations)
}

/// Residue arithmetic in `O_K / m = F_m[w]` where `w^2 = w - (1 + l)/4`,
/// for `K = Q(sqrt -l)` with `l = 3 mod 4` and `m` inert in `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ResidueField {
    m: u64,
    norm_w: u64,
}

impl ResidueField {
    fn mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let m = self.m as u128;
        let (a, b) = (x.0 as u128, x.1 as u128);
        let (c, d) = (y.0 as u128, y.1 as u128);
        let bd = b * d % m;
        let re = (a * c + m * m - bd * self.norm_w as u128 % m) % m;
        let im = (a * d + b * c + bd) % m;
        (re as u64, im as u64)
    }

    fn pow(&self, mut base: (u64, u64), mut e: u64) -> (u64, u64) {
        let mut acc = (1, 0);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn inverse(&self, x: (u64, u64)) -> (u64, u64) {
        self.pow(x, self.m * self.m - 2)
    }
}

/// The cyclic group `(O_K/m)^* / {+-1}` for `K = Q(sqrt -l)`, with a fixed
/// generator `x + y w`, `w = (1 + sqrt -l)/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitQuotient {
    pub ell: u64,
    pub m: u64,
    pub generator: (u64, u64),
    pub group: FiniteAbelianGroup,
    field: ResidueField,
    baby_steps: HashMap<(u64, u64), u64>,
    giant_step: (u64, u64),
    stride: u64,
}

fn check_ell_m(ell: u64, m: u64) -> Result<()> {
    if !is_prime_u64(ell) || ell % 4 != 3 {
        return domain(format!("{ell} is not a prime congruent to 3 mod 4"));
    }
    if ell == 3 {
        return Err(Error::Unsupported("l = 3: Q(sqrt -3) has six units".into()));
    }
    if m == 2 || !is_prime_u64(m) {
        return domain(format!("{m} is not an odd prime"));
    }
    if prime_behavior(-(ell as i64), m) != PrimeBehavior::Inert {
        return domain(format!("{m} is not inert in Q(sqrt -{ell})"));
    }
    Ok(())
}

impl UnitQuotient {
    pub fn new(ell: u64, m: u64) -> Result<Self> {
        check_ell_m(ell, m)?;
        let field = ResidueField {
            m,
            norm_w: ((1 + ell) / 4) % m,
        };
        let full = m * m - 1;
        let primes: Vec<u64> = factor_u64(full).into_iter().map(|(p, _)| p).collect();
        let generator = (0..m)
            .flat_map(|x| (0..m).map(move |y| (x, y)))
            .skip(1)
            .find(|&(x, y)| {
                primes
                    .iter()
                    .all(|&p| field.pow((x, y), full / p) != (1, 0))
            })
            .ok_or_else(|| Error::Consistency(format!("no generator of F_{m}^2")))?;

        let stride = isqrt(full) + 1;
        let mut baby_steps = HashMap::with_capacity(stride as usize);
        let mut cur = (1, 0);
        for j in 0..stride {
            baby_steps.entry(cur).or_insert(j);
            cur = field.mul(cur, generator);
        }
        let giant_step = field.inverse(field.pow(generator, stride));
        Ok(UnitQuotient {
            ell,
            m,
            generator,
            group: FiniteAbelianGroup::cyclic(full / 2),
            field,
            baby_steps,
            giant_step,
            stride,
        })
    }

    pub fn order(&self) -> u64 {
        (self.m * self.m - 1) / 2
    }

    /// Discrete logarithm of `x + y w` modulo `{+-1}`, in `[0, (m^2-1)/2)`.
    pub fn dlog(&self, x: i64, y: i64) -> Result<u64> {
        let m = self.m as i64;
        let mut cur = (x.rem_euclid(m) as u64, y.rem_euclid(m) as u64);
        if cur == (0, 0) {
            return domain("element is not a unit modulo m");
        }
        for i in 0..self.stride {
            if let Some(&j) = self.baby_steps.get(&cur) {
                return Ok((i * self.stride + j) % self.order());
            }
            cur = self.field.mul(cur, self.giant_step);
        }
        Err(Error::Consistency("discrete logarithm not found".into()))
    }
}

/// `(O_K/m)^*/O_K^*` for `K = Q(sqrt -l)`, with its generator.
pub fn unit_quotient_group(ell: u64, m: u64) -> Result<(FiniteAbelianGroup, (u64, u64))> {
    let uq = UnitQuotient::new(ell, m)?;
    Ok((uq.group.clone(), uq.generator))
}

/// A split prime `P = [p, b + w]` of `Q(sqrt -l)` together with its form class.
#[derive(Debug, Clone, Copy)]
struct SplitPrime {
    p: i64,
    root: i64,
}

fn split_primes(ell: u64, m: u64, bound: u64) -> Vec<SplitPrime> {
    let d = -(ell as i64);
    let norm_w = (1 + ell as i64) / 4;
    primes_up_to(bound)
        .into_iter()
        .filter(|&p| p != m && prime_behavior(d, p) == PrimeBehavior::Split)
        .map(|p| {
            let pi = p as i64;
            let root = if p == 2 {
                (0..2).find(|b| (b * b + b + norm_w) % 2 == 0).unwrap()
            } else {
                // (2b + 1)^2 = d mod p
                let s = sqrt_mod_prime(d.rem_euclid(pi) as u64, p) as i64;
                ((s - 1) * (pi + 1) / 2).rem_euclid(pi)
            };
            SplitPrime { p: pi, root }
        })
        .collect()
}

/// The ray class group `Cl_K^(m)` of `K = Q(sqrt -l)`, `m` an inert prime.
pub fn ray_class_group(ell: u64, m: u64) -> Result<FiniteAbelianGroup> {
    let uq = UnitQuotient::new(ell, m)?;
    let d = -(ell as i64);
    let h = class_number(d)?;
    let bound = 4 * ell + 100;
    let candidates = split_primes(ell, m, bound);
    let (chosen, cl_relations) = staircase_relations(
        candidates.iter().map(|sp| {
            QuadIdeal::new(d, sp.p, sp.root, 1)
                .expect("split prime ideal")
                .to_form(d)
                .reduced()
        }),
        crate::imagquad::QuadraticForm::principal(d),
        |x, y| x.compose(y),
        h,
    );
    let gens: Vec<SplitPrime> = chosen.iter().map(|&i| candidates[i]).collect();
    let generated: u128 = cl_relations
        .iter()
        .enumerate()
        .map(|(j, r)| r[j] as u128)
        .product();
    if generated != h as u128 {
        return Err(Error::Consistency(format!(
            "split primes below {bound} do not generate Cl(-{ell})"
        )));
    }

    let n = gens.len();
    let order_u = uq.order() as i64;
    let mut rows = Vec::with_capacity(n + 1);
    for (j, rel) in cl_relations.iter().enumerate() {
        let k = rel[j];
        let gj = gens[j];
        let mut ideal = QuadIdeal::split_prime_power(d, gj.p, gj.root, k as u32)?;
        let mut correction: i64 = 0;
        for i in 0..j {
            let c = -rel[i];
            if c == 0 {
                continue;
            }
            let gi = gens[i];
            let conj_root = (-1 - gi.root).rem_euclid(gi.p);
            let conj = QuadIdeal::split_prime_power(d, gi.p, conj_root, c as u32)?;
            ideal = ideal.mul_coprime(&conj, d)?;
            let log_p = uq.dlog(gi.p, 0)? as i64;
            correction = (correction + c * log_p) % order_u;
        }
        let (x, y) = principal_generator(&ideal, d)?.ok_or_else(|| {
            Error::Consistency(format!("relation ideal {ideal:?} is not principal"))
        })?;
        let log_gamma = (uq.dlog(x, y)? as i64 - correction).rem_euclid(order_u);
        let mut row = rel.clone();
        row.push(-log_gamma);
        rows.push(row);
    }
    let mut unit_row = vec![0i64; n];
    unit_row.push(order_u);
    rows.push(unit_row);

    let group = FiniteAbelianGroup::from_relations(&rows, n + 1)?;
    let expected = h as u128 * uq.order() as u128;
    if group.order() != expected {
        return Err(Error::Consistency(format!(
            "ray class group order {} differs from h * (m^2-1)/2 = {expected}",
            group.order()
        )));
    }
    Ok(group)
}

/// `kronecker(m, l) = -1` and both primes are `3 mod 4`: the shape of pair
/// for which the descent obstruction is formulated.
pub fn is_descent_pair(ell: u64, m: u64) -> bool {
    ell % 4 == 3
        && m % 4 == 3
        && is_prime_u64(ell)
        && is_prime_u64(m)
        && kronecker(m as i64, ell as i64) == Ok(-1)
}
