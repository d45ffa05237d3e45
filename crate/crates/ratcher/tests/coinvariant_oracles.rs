//! Cross-checks of the coinvariant machinery against the slow reference
//! implementation on small reflection groups.

use proptest::prelude::*;
use ratcher::coinvariant::{build_quotient, hilbert_from_degrees, image_dimension, CoinvariantAlgebra, PolyQ, WallGroup};
use ratcher::exactla::q;
use ratcher::oracle::{generic_orbit_bound, PowerSumQuotient};
use ratcher::rootdata::{cartan_gram, positive_roots, Family};

/// Named test groups: (label, ambient Gram matrix, positive roots of the group).
fn groups() -> Vec<(&'static str, Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    let a1a1 = vec![vec![2, 0], vec![0, 2]];
    let a2 = cartan_gram(Family::A, 2);
    let b2 = cartan_gram(Family::B, 2);
    let g2 = cartan_gram(Family::G, 2);
    vec![
        ("trivial", g2.clone(), vec![]),
        ("A1", g2.clone(), vec![vec![1, 0]]),
        ("A1xA1", a1a1.clone(), positive_roots(&a1a1)),
        ("A2", a2.clone(), positive_roots(&a2)),
        ("B2", b2.clone(), positive_roots(&b2)),
        ("G2", g2.clone(), positive_roots(&g2)),
    ]
}

fn linear(images: &[i64]) -> PolyQ {
    PolyQ::linear(&images.iter().map(|&c| q(c)).collect::<Vec<_>>())
}

fn ambient_roots(gram: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let pos = positive_roots(gram);
    let neg: Vec<Vec<i64>> = pos.iter().map(|r| r.iter().map(|c| -c).collect()).collect();
    pos.into_iter().chain(neg).collect()
}

#[test]
fn reference_ideals_are_complete() {
    for (name, gram, pos) in groups() {
        let oracle = PowerSumQuotient::new(&gram, &pos);
        let wg = WallGroup::from_positive_roots(gram.clone(), pos.clone()).unwrap();
        assert_eq!(oracle.group_order() as u128, wg.order, "{name}");
        let h = oracle.hilbert();
        assert_eq!(h.iter().sum::<usize>(), oracle.group_order(), "{name}: power sums miss invariants");
        let want = hilbert_from_degrees(&wg.degrees);
        assert_eq!(&h[..want.len()], &want[..], "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn image_dimensions_agree_with_brute_force(which in 0usize..6, picks in proptest::collection::vec(0usize..12, 0..6)) {
        let (name, gram, pos) = groups().swap_remove(which);
        let roots = ambient_roots(&gram);
        let factors: Vec<Vec<i64>> = picks.iter().map(|&i| roots[i % roots.len()].clone()).collect();
        let oracle = PowerSumQuotient::new(&gram, &pos);
        let want = oracle.image_dimension(&factors);

        let wg = WallGroup::from_positive_roots(gram.clone(), pos.clone()).unwrap();
        let alg = CoinvariantAlgebra::new(&wg, 1_000_000).unwrap();
        prop_assert_eq!(alg.image_dimension(&factors), want, "factorized, {}", name);

        let generic = build_quotient(&wg, wg.n_reflections + 1).unwrap();
        let lambda = factors.iter().fold(PolyQ::one(gram.len()), |acc, f| acc.mul(&linear(f)));
        prop_assert_eq!(image_dimension(&generic, &lambda).unwrap(), want, "generic, {}", name);
    }

    #[test]
    fn scalar_invariance_and_monotonicity(which in 0usize..6, picks in proptest::collection::vec(0usize..12, 1..6), c in 2i64..5) {
        let (_, gram, pos) = groups().swap_remove(which);
        let roots = ambient_roots(&gram);
        let factors: Vec<Vec<i64>> = picks.iter().map(|&i| roots[i % roots.len()].clone()).collect();
        let wg = WallGroup::from_positive_roots(gram, pos).unwrap();
        let alg = CoinvariantAlgebra::new(&wg, 1_000_000).unwrap();
        let full = alg.image_dimension(&factors);
        let mut scaled = factors.clone();
        scaled[0] = scaled[0].iter().map(|x| x * c).collect();
        prop_assert_eq!(alg.image_dimension(&scaled), full);
        prop_assert!(alg.image_dimension(&factors[1..]) >= full);
    }
}

#[test]
fn generic_orbit_bound_holds() {
    for (name, gram, pos) in groups() {
        let wg = WallGroup::from_positive_roots(gram.clone(), pos.clone()).unwrap();
        let alg = CoinvariantAlgebra::new(&wg, 1_000_000).unwrap();
        let roots = ambient_roots(&gram);
        for k in 0..=3 {
            for start in 0..roots.len() {
                let factors: Vec<Vec<i64>> = (0..k).map(|j| roots[(start + j) % roots.len()].clone()).collect();
                assert!(alg.image_dimension(&factors) <= generic_orbit_bound(&gram, &pos, &factors), "{name}");
            }
        }
    }
}

#[test]
fn poincare_duality_of_the_hilbert_series() {
    for (name, gram, pos) in groups() {
        let wg = WallGroup::from_positive_roots(gram, pos).unwrap();
        let alg = CoinvariantAlgebra::new(&wg, 1_000_000).unwrap();
        let h = alg.image_hilbert(&[]);
        let rev: Vec<usize> = h.iter().rev().cloned().collect();
        assert_eq!(h, rev, "{name}");
        assert_eq!(h.iter().sum::<usize>() as u128, wg.order, "{name}");
    }
}
