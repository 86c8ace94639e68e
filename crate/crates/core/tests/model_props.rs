mod common;

use dendrotest_core::model::{
    co_classification, condensed_index, condensed_len, condensed_pair, frobenius, hamming_mean,
};
use dendrotest_core::{CondensedMatrix, Partition};
use proptest::prelude::*;

fn partitions(m: usize, max_n: usize) -> impl Strategy<Value = Vec<Partition>> {
    prop::collection::vec(
        prop::collection::vec(0usize..4, m).prop_map(|a| Partition::from_assignment(&a).unwrap()),
        1..=max_n,
    )
}

#[test]
fn condensed_indexing_round_trips() {
    for m in 2..30 {
        let mut k = 0;
        for i in 0..m {
            for j in i + 1..m {
                assert_eq!(condensed_index(i, j, m).unwrap(), k);
                assert_eq!(condensed_index(j, i, m).unwrap(), k);
                assert_eq!(condensed_pair(k, m).unwrap(), (i, j));
                k += 1;
            }
        }
        assert_eq!(k, condensed_len(m));
        assert!(condensed_pair(k, m).is_err());
    }
}

proptest! {
    #[test]
    fn hamming_mean_is_a_pseudometric(parts in (3usize..9).prop_flat_map(|m| partitions(m, 12))) {
        let xs: Vec<CondensedMatrix> = parts.iter().map(co_classification).collect();
        let d = hamming_mean(&xs).unwrap();
        prop_assert!(d.values().iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(d.triangle_violation() <= 1e-12);
    }

    #[test]
    fn single_partition_distance_is_ultrametric(parts in (3usize..9).prop_flat_map(|m| partitions(m, 1))) {
        let x = co_classification(&parts[0]);
        let d = hamming_mean([&x]).unwrap();
        prop_assert_eq!(d.ultrametric_violation(), 0.0);
        for (i, j, v) in d.iter() {
            let together = parts[0].assignment()[i] == parts[0].assignment()[j];
            prop_assert_eq!(v, if together { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn frobenius_is_a_metric(
        (a, b, c) in (2usize..10).prop_flat_map(|m| {
            let v = || prop::collection::vec(0.0f64..2.0, m * (m - 1) / 2)
                .prop_map(move |v| CondensedMatrix::new(m, v).unwrap());
            (v(), v(), v())
        })
    ) {
        prop_assert_eq!(frobenius(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(frobenius(&a, &b).unwrap(), frobenius(&b, &a).unwrap());
        let direct = frobenius(&a, &c).unwrap();
        let detour = frobenius(&a, &b).unwrap() + frobenius(&b, &c).unwrap();
        prop_assert!(direct <= detour + 1e-12);
    }

    #[test]
    fn assignment_round_trip_preserves_blocks(a in prop::collection::vec(0usize..5, 2..12)) {
        let p = Partition::from_assignment(&a).unwrap();
        let q = Partition::from_assignment(&p.assignment()).unwrap();
        prop_assert_eq!(&p, &q);
        prop_assert_eq!(co_classification(&p), co_classification(&q));
    }
}
