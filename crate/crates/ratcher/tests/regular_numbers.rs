//! Regular numbers of split types of rank at most 4, checked against a direct
//! search over the Weyl group.
//!
//! `m` is regular when some `w` has a primitive `m`-th root of unity as an
//! eigenvalue with an eigenvector off every reflecting hyperplane. The
//! eigenspaces for all primitive `m`-th roots together form the rational
//! subspace `ker Φ_m(w)`, and one of them lies in a rational hyperplane only
//! if all of them do, so the test can be run over `Q`.

use std::collections::HashSet;

use num_traits::Zero;
use ratcher::apartment::regular_numbers;
use ratcher::coinvariant::reflect_form;
use ratcher::exactla::{kernel, q, QMatrix};
use ratcher::rootdata::{build_root_datum, inner, RootDatum};

type Mat = Vec<Vec<i64>>;

/// Group elements as matrices acting on root coordinates (column j = image of α_j).
fn weyl_group(d: &RootDatum) -> Vec<Mat> {
    let r = d.rank;
    let simple: Vec<Vec<i64>> = (0..r).map(|i| (0..r).map(|j| i64::from(i == j)).collect()).collect();
    let id: Vec<Vec<i64>> = simple.clone();
    let mut seen: HashSet<Vec<Vec<i64>>> = HashSet::from([id.clone()]);
    let mut stack = vec![id];
    while let Some(w) = stack.pop() {
        for s in &simple {
            let next: Vec<Vec<i64>> = w.iter().map(|col| reflect_form(&d.gram, s, col)).collect();
            if seen.insert(next.clone()) {
                stack.push(next);
            }
        }
    }
    // Columns to row-major matrices.
    seen.into_iter().map(|cols| (0..r).map(|i| cols.iter().map(|c| c[i]).collect()).collect()).collect()
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

/// Integer coefficients of the cyclotomic polynomial, constant term first.
fn cyclotomic(m: usize) -> Vec<i64> {
    let mut p = vec![0i64; m + 1];
    p[0] = -1;
    p[m] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            p = divide(&p, &cyclotomic(d));
        }
    }
    p
}

fn divide(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let mut quo = vec![0i64; rem.len() - dn];
    for i in (0..quo.len()).rev() {
        let c = rem[i + dn] / den[dn];
        quo[i] = c;
        for (j, &x) in den.iter().enumerate() {
            rem[i + j] -= c * x;
        }
    }
    quo
}

fn poly_at(p: &[i64], w: &Mat) -> Mat {
    let n = w.len();
    let mut acc: Mat = vec![vec![0; n]; n];
    let mut power: Mat = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for &c in p {
        for i in 0..n {
            for j in 0..n {
                acc[i][j] += c * power[i][j];
            }
        }
        power = mat_mul(&power, w);
    }
    acc
}

fn is_regular_by_search(d: &RootDatum, group: &[Mat], m: usize) -> bool {
    let phi = cyclotomic(m);
    let positive = &d.roots[..d.n_positive()];
    group.iter().any(|w| {
        let a = poly_at(&phi, w);
        let ker = kernel(&QMatrix::from_i64_rows(&a));
        if ker.is_empty() {
            return false;
        }
        // The hyperplane of α, seen in root coordinates through the invariant form, is α^⊥.
        positive.iter().all(|root| {
            ker.iter().any(|v| {
                let s: num_rational::BigRational = (0..d.rank)
                    .map(|i| {
                        let e: Vec<i64> = (0..d.rank).map(|j| i64::from(i == j)).collect();
                        &v[i] * q(inner(&d.gram, &e, &root.coeffs))
                    })
                    .sum();
                !s.is_zero()
            })
        })
    })
}

#[test]
fn regular_numbers_match_a_search_over_the_group() {
    for label in ["A1", "A2", "A3", "A4", "B2", "B3", "B4", "C3", "C4", "D4", "G2", "F4"] {
        let d = build_root_datum(label.parse().unwrap()).unwrap();
        let group = weyl_group(&d);
        assert_eq!(group.len() as u128, d.weyl_order(), "{label}");
        let (mut listed, _) = regular_numbers(&d);
        listed.sort_unstable();
        let h = d.h_theta as usize;
        let found: Vec<u64> = (1..=h).filter(|&m| is_regular_by_search(&d, &group, m)).map(|m| m as u64).collect();
        assert_eq!(listed, found, "{label}");
    }
}

#[test]
fn cyclotomic_polynomials() {
    assert_eq!(cyclotomic(1), vec![-1, 1]);
    assert_eq!(cyclotomic(4), vec![1, 0, 1]);
    assert_eq!(cyclotomic(6), vec![1, -1, 1]);
    assert_eq!(cyclotomic(12), vec![1, 0, -1, 0, 1]);
}
