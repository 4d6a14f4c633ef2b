use proptest::prelude::*;
use shimura_core::arith::{is_prime_u64, kronecker, primes_up_to};
use shimura_core::classfield::{
    mat_mul, ray_class_group, smith_normal_form, surjection_exists, unit_quotient_group,
    FiniteAbelianGroup,
};
use shimura_core::imagquad::class_number;

/// Elements of `Z/d_1 x ... x Z/d_k` as coordinate vectors.
fn elements(orders: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for &d in orders {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..d).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Surjectivity by trying every homomorphism: the image of each generator
/// of `G` must be killed by that generator's order.
fn brute_surjects(g: &[u64], h: &[u64]) -> bool {
    let hs = elements(h);
    let add = |a: &[u64], b: &[u64]| -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(h)
            .map(|((x, y), d)| (x + y) % d)
            .collect()
    };
    let scale =
        |a: &[u64], k: u64| -> Vec<u64> { a.iter().zip(h).map(|(x, d)| x * k % d).collect() };
    let zero = vec![0u64; h.len()];
    let candidates: Vec<Vec<&Vec<u64>>> = g
        .iter()
        .map(|&d| hs.iter().filter(|x| scale(x, d) == zero).collect())
        .collect();
    let total = hs.len();
    let mut idx = vec![0usize; g.len()];
    loop {
        let images: Vec<&Vec<u64>> = idx.iter().zip(&candidates).map(|(&i, c)| c[i]).collect();
        let mut seen = std::collections::HashSet::new();
        seen.insert(zero.clone());
        let mut frontier = vec![zero.clone()];
        while let Some(x) = frontier.pop() {
            for y in &images {
                let z = add(&x, y);
                if seen.insert(z.clone()) {
                    frontier.push(z);
                }
            }
        }
        if seen.len() == total {
            return true;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return false;
            }
            idx[k] += 1;
            if idx[k] < candidates[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn det(m: &[Vec<i64>]) -> i128 {
    // Bareiss fraction-free elimination
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn group(orders: &[u64]) -> FiniteAbelianGroup {
    FiniteAbelianGroup::from_orders(orders)
}

#[test]
fn surjection_matches_brute_force_on_small_groups() {
    let shapes: Vec<Vec<u64>> = vec![
        vec![],
        vec![2],
        vec![3],
        vec![4],
        vec![6],
        vec![8],
        vec![2, 2],
        vec![2, 4],
        vec![3, 3],
        vec![2, 6],
        vec![12],
        vec![2, 2, 2],
        vec![4, 4],
        vec![9],
    ];
    for g in &shapes {
        for h in &shapes {
            assert_eq!(
                surjection_exists(&group(g), &group(h)),
                brute_surjects(g, h),
                "{g:?} -> {h:?}"
            );
        }
    }
}

#[test]
fn ray_class_orders_follow_the_exact_sequence() {
    for ell in primes_up_to(200)
        .into_iter()
        .filter(|&l| l % 4 == 3 && l > 3)
    {
        for m in primes_up_to(120).into_iter().filter(|&m| m > 2) {
            if kronecker(-(ell as i64), m as i64).unwrap() != -1 {
                continue;
            }
            let g = ray_class_group(ell, m).unwrap();
            let h = class_number(-(ell as i64)).unwrap() as u128;
            assert_eq!(
                g.order(),
                h * (m as u128 * m as u128 - 1) / 2,
                "({ell}, {m})"
            );
            let (units, _) = unit_quotient_group(ell, m).unwrap();
            // a subgroup of a finite abelian group is also a quotient of it
            assert!(surjection_exists(&g, &units), "({ell}, {m})");
            if h == 1 {
                assert_eq!(g, units, "({ell}, {m})");
            }
        }
    }
}

#[test]
fn flagship_ray_class_group() {
    let g = ray_class_group(23, 107).unwrap();
    assert_eq!(g.invariant_factors(), &[17172]);
    assert_eq!(g.order(), 3 * (107 * 107 - 1) / 2);
    assert!(ray_class_group(3, 5).is_err());
    assert!(ray_class_group(23, 2).is_err());
    assert!(is_prime_u64(107));
}

fn small_matrix() -> impl Strategy<Value = (Vec<Vec<i64>>, usize)> {
    (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
        (
            prop::collection::vec(prop::collection::vec(-30i64..30, c), r),
            Just(c),
        )
    })
}

fn chain() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..40, 0..4)
}

proptest! {
    #[test]
    fn smith_witnesses_multiply_back((m, cols) in small_matrix()) {
        let snf = smith_normal_form(&m, cols);
        let m128: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let prod = mat_mul(&mat_mul(&snf.u, &m128, m.len(), cols), &snf.v, cols, cols);
        for (i, row) in prod.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let expect = if i == j { snf.diagonal.get(i).copied().unwrap_or(0) } else { 0 };
                prop_assert_eq!(x, expect);
            }
        }
        for w in snf.diagonal.windows(2) {
            prop_assert!(w[1] == 0 || (w[0] != 0 && w[1] % w[0] == 0));
        }
    }

    #[test]
    fn cokernel_order_is_determinant(m in prop::collection::vec(prop::collection::vec(-20i64..20, 3), 3)) {
        let d = det(&m);
        match FiniteAbelianGroup::from_relations(&m, 3) {
            Ok(g) => prop_assert_eq!(g.order() as i128, d.abs()),
            Err(_) => prop_assert_eq!(d, 0),
        }
    }

    #[test]
    fn surjection_is_reflexive_and_monotone(g in chain(), h in chain(), extra in prop::collection::vec(-10i64..10, 0..4)) {
        let (gg, hh) = (group(&g), group(&h));
        prop_assert!(surjection_exists(&gg, &gg));
        prop_assert!(surjection_exists(&gg, &FiniteAbelianGroup::trivial()));
        prop_assert!(surjection_exists(&gg.product(&hh), &hh));
        // a quotient of h: add one more relation to its diagonal presentation
        let mut rows: Vec<Vec<i64>> = (0..h.len())
            .map(|i| { let mut r = vec![0i64; h.len()]; r[i] = h[i] as i64; r })
            .collect();
        let mut extra = extra;
        extra.resize(h.len(), 1);
        rows.push(extra);
        let q = FiniteAbelianGroup::from_relations(&rows, h.len()).unwrap();
        prop_assert!(surjection_exists(&hh, &q));
        if surjection_exists(&gg, &hh) {
            prop_assert!(surjection_exists(&gg, &q));
        }
    }
}
