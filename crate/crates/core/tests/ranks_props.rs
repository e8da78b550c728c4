mod common;

use proptest::prelude::*;
use rank_indep::{joint_rank_sequence, rank_columns, DataPair, TiePolicy};

fn distinct_column(n: usize) -> impl Strategy<Value = Vec<f64>> {
    Just((0..n).map(|i| i as f64 - n as f64 / 2.0).collect::<Vec<_>>()).prop_shuffle()
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<u32>> {
    Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn ranks_survive_increasing_transforms(
        (x, y) in (2usize..40).prop_flat_map(|n| (distinct_column(n), distinct_column(n))),
        which in 0usize..3,
    ) {
        let data = DataPair::from_columns(vec![x.clone()], vec![y.clone()]).unwrap();
        let f = |v: f64| match which {
            0 => v.powi(3),
            1 => (v / 10.0).exp(),
            _ => v.atan(),
        };
        let mut moved = data.clone();
        moved.map_x_column(0, f);
        moved.map_y_column(0, f);
        prop_assert_eq!(
            rank_columns(&data, TiePolicy::Error).unwrap(),
            rank_columns(&moved, TiePolicy::Error).unwrap()
        );
    }

    #[test]
    fn joint_sequence_of_a_permutation_with_itself_is_identity(rx in (1usize..60).prop_flat_map(permutation)) {
        let s = joint_rank_sequence(&rx, &rx).unwrap();
        prop_assert_eq!(s, (1..=rx.len() as u32).collect::<Vec<_>>());
    }

    #[test]
    fn swapped_joint_sequences_are_inverse(
        (rx, ry) in (1usize..60).prop_flat_map(|n| (permutation(n), permutation(n))),
    ) {
        let s = joint_rank_sequence(&rx, &ry).unwrap();
        let t = joint_rank_sequence(&ry, &rx).unwrap();
        for k in 0..s.len() {
            prop_assert_eq!(t[s[k] as usize - 1] as usize, k + 1);
        }
    }
}

#[test]
fn ties_are_rejected_or_flagged() {
    let data = DataPair::from_columns(vec![vec![1.0, 2.0, 2.0]], vec![vec![3.0, 1.0, 2.0]]).unwrap();
    assert!(rank_columns(&data, TiePolicy::Error).is_err());
    let r = rank_columns(&data, TiePolicy::AverageJitterFree).unwrap();
    assert_eq!(r.rx[0], vec![1, 2, 3]);
    assert!(r.has_ties());
}
