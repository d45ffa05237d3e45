use num_traits::Zero;
use proptest::prelude::*;
use ratcher::exactla::{self, q, QMatrix, Q, SparseVec};

/// Textbook Gaussian elimination on a dense copy, used as the reference rank.
fn naive_rank(rows: &[Vec<i64>], cols: usize) -> usize {
    let mut m: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[rank][c];
                let pivot = m[rank].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn matrix() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
        // Mostly zeros so that both dense and sparse paths are exercised.
        let entry = prop_oneof![4 => Just(0i64), 1 => -4i64..5];
        (Just(c), proptest::collection::vec(proptest::collection::vec(entry, c), r))
    })
}

fn sparse(rows: &[Vec<i64>]) -> Vec<SparseVec> {
    rows.iter()
        .map(|r| r.iter().enumerate().filter(|(_, &x)| x != 0).map(|(j, &x)| (j, q(x))).collect())
        .collect()
}

proptest! {
    #[test]
    fn rank_matches_gaussian_elimination((cols, rows) in matrix()) {
        let want = naive_rank(&rows, cols);
        let m = QMatrix::from_rows(cols, rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect());
        prop_assert_eq!(exactla::rank(&m), want);
        let sp = sparse(&rows);
        prop_assert_eq!(exactla::rank_of_rows(cols, sp.iter()), want);
        prop_assert_eq!(exactla::echelonize(&m).rank(), want);
    }

    #[test]
    fn kernel_has_complementary_dimension((cols, rows) in matrix()) {
        let m = QMatrix::from_rows(cols, rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect());
        let ker = exactla::kernel(&m);
        prop_assert_eq!(ker.len() + exactla::rank(&m), cols);
        for v in &ker {
            prop_assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn solve_recovers_a_consistent_right_hand_side((cols, rows) in matrix(), x in proptest::collection::vec(-3i64..4, 6)) {
        let m = QMatrix::from_rows(cols, rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect());
        let x: Vec<Q> = x[..cols].iter().map(|&v| q(v)).collect();
        let b = m.mul_vec(&x);
        let y = exactla::solve(&m, &b).expect("system is consistent by construction");
        prop_assert_eq!(m.mul_vec(&y), b);
    }

    #[test]
    fn echelon_membership((cols, rows) in matrix(), coeffs in proptest::collection::vec(-2i64..3, 6)) {
        let sp = sparse(&rows);
        let ech = exactla::echelonize_rows(cols, sp.iter());
        // Any combination of the rows lies in their span.
        let mut comb = vec![Q::zero(); cols];
        for (r, c) in rows.iter().zip(&coeffs) {
            for (acc, &x) in comb.iter_mut().zip(r) {
                *acc += q(x * c);
            }
        }
        let v: SparseVec = comb.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
        prop_assert!(ech.contains(&v));
        prop_assert_eq!(ech.complement().len() + ech.rank(), cols);
    }
}

#[test]
fn fixed_space_of_a_swap() {
    let swap = QMatrix::from_i64_rows(&[vec![0, 1], vec![1, 0]]);
    let fixed = exactla::fixed_space(&[swap], 2);
    assert_eq!(fixed.len(), 1);
    assert_eq!(fixed[0][0], fixed[0][1]);
}

#[test]
fn empty_matrix_has_no_pivots() {
    let m = QMatrix::zeros(0, 3);
    assert_eq!(exactla::rank(&m), 0);
    assert_eq!(exactla::echelonize(&m).rank(), 0);
}
