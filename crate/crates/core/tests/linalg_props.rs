mod common;

use bellfacets::linalg::{self, IntMatrix, IntVector};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1usize..7, 0usize..7).prop_flat_map(|(cols, rows)| {
        let entry = prop_oneof![4 => -3i64..=3, 1 => any::<i64>().prop_map(|x| x >> 20)];
        (Just(cols), prop::collection::vec(prop::collection::vec(entry, cols), rows))
    })
}

/// Rows built as integer combinations of a few generators, so that rank
/// deficiency is common.
fn low_rank_matrix() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (2usize..8, 1usize..4, 2usize..9).prop_flat_map(|(cols, gens, rows)| {
        (
            Just(cols),
            prop::collection::vec(prop::collection::vec(-4i64..=4, cols), gens),
            prop::collection::vec(prop::collection::vec(-3i64..=3, gens), rows),
        )
            .prop_map(|(cols, g, coefs)| {
                let rows = coefs
                    .iter()
                    .map(|c| (0..cols).map(|j| c.iter().zip(&g).map(|(a, r)| a * r[j]).sum()).collect())
                    .collect();
                (cols, rows)
            })
    })
}

fn big_rows(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter().map(|r| common::small(r)).collect()
}

fn int_matrix(cols: usize, rows: &[Vec<i64>]) -> IntMatrix {
    IntMatrix::from_i64_rows(cols, rows).unwrap()
}

proptest! {
    #[test]
    fn rank_matches_rational_elimination((cols, rows) in matrix()) {
        let m = int_matrix(cols, &rows);
        prop_assert_eq!(linalg::rank(&m), common::rational_rank(&big_rows(&rows), cols));
    }

    #[test]
    fn rank_matches_on_dependent_rows((cols, rows) in low_rank_matrix()) {
        let m = int_matrix(cols, &rows);
        let exact = common::rational_rank(&big_rows(&rows), cols);
        prop_assert_eq!(linalg::rank(&m), exact);
        prop_assert_eq!(linalg::rank_with_ceiling(m.rows(), cols, cols), exact);
        prop_assert!(linalg::rank_lower_bound(m.rows(), cols) <= exact);
    }

    #[test]
    fn kernel_is_a_primitive_basis((cols, rows) in low_rank_matrix()) {
        let m = int_matrix(cols, &rows);
        let basis = linalg::integer_kernel_basis(&m);
        let r = common::rational_rank(&big_rows(&rows), cols);
        prop_assert_eq!(basis.len(), cols - r);
        for v in &basis {
            prop_assert!(m.mul_vec(v).unwrap().is_zero());
            prop_assert!(v.content().is_one());
        }
        let basis_rows: Vec<Vec<BigInt>> = basis.iter().map(|v| v.entries().to_vec()).collect();
        prop_assert_eq!(common::rational_rank(&basis_rows, cols), basis.len());
    }

    #[test]
    fn primitive_is_idempotent(v in prop::collection::vec(-50i64..=50, 1..8), k in 1i64..20) {
        let v = IntVector::from_i64s(&v);
        prop_assume!(!v.is_zero());
        let p = linalg::primitive(&v).unwrap();
        prop_assert!(p.content().is_one());
        prop_assert_eq!(linalg::primitive(&p).unwrap(), p.clone());
        prop_assert_eq!(linalg::primitive(&v.scaled(&BigInt::from(k))).unwrap(), p);
    }

    #[test]
    fn primitive_keeps_direction(v in prop::collection::vec(-50i64..=50, 1..8)) {
        let v = IntVector::from_i64s(&v);
        prop_assume!(!v.is_zero());
        let p = linalg::primitive(&v).unwrap();
        let g = v.content();
        prop_assert_eq!(p.scaled(&g), v);
    }
}

#[test]
fn zero_vector_has_no_primitive_form() {
    assert!(linalg::primitive(&IntVector::zeros(3)).is_err());
    assert!(IntVector::zeros(3).content().is_zero());
}
