mod common;

use common::{random_dendrogram, random_dendrogram_tree, random_split_tree, rng};
use dendrotest_core::geodesic::{brute_force_geodesic, cone_distance, geodesic_point};
use dendrotest_core::linkage::cophenetic;
use dendrotest_core::treespace::{euclidean_norm_diff, from_dendrogram, splits_compatible, to_cophenetic};
use dendrotest_core::{geodesic_distance, SplitTree};
use proptest::prelude::*;

fn d(a: &SplitTree, b: &SplitTree) -> f64 {
    geodesic_distance(a, b).unwrap().distance
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dendrogram_trees_round_trip(seed in any::<u64>(), p in 2usize..12) {
        let den = random_dendrogram(&mut rng(seed), p, if seed % 3 == 0 { 3 } else { 0 });
        let tree = from_dendrogram(&den).unwrap();
        prop_assert!(tree.depth_one_violation() <= 1e-9);
        prop_assert!(tree.inner().len() <= p.saturating_sub(2));
        prop_assert!(tree.incompatible_pair().is_none());
        let direct = cophenetic(&den);
        for (a, b) in to_cophenetic(&tree).values().iter().zip(direct.values()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn geodesic_matches_oracle(seed in any::<u64>(), p in 4usize..=7) {
        let mut r = rng(seed);
        let (a, b) = if seed % 2 == 0 {
            (random_dendrogram_tree(&mut r, p).into_tree(), random_dendrogram_tree(&mut r, p).into_tree())
        } else {
            (random_split_tree(&mut r, p), random_split_tree(&mut r, p))
        };
        let fast = geodesic_distance(&a, &b).unwrap();
        let slow = brute_force_geodesic(&a, &b).unwrap();
        prop_assert!((fast.distance - slow.distance).abs() <= 1e-9);
        prop_assert!(fast.support.satisfies_compatibility());
        prop_assert!(fast.support.satisfies_ratio_order(1e-9));
        let legs = fast.support.squared_length();
        let total = fast.leaf_contribution.powi(2) + fast.common_contribution.powi(2) + legs;
        prop_assert!((total.sqrt() - fast.distance).abs() <= 1e-12);
    }

    #[test]
    fn metric_axioms_and_bounds(seed in any::<u64>(), p in 3usize..=8) {
        let mut r = rng(seed);
        let trees: Vec<SplitTree> = (0..3).map(|_| random_split_tree(&mut r, p)).collect();
        let (x, y, z) = (&trees[0], &trees[1], &trees[2]);
        prop_assert_eq!(d(x, x), 0.0);
        prop_assert_eq!(d(x, y), d(y, x));
        prop_assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-9);
        let e = euclidean_norm_diff(x, y).unwrap();
        prop_assert!(e <= d(x, y) + 1e-9);
        prop_assert!(d(x, y) <= std::f64::consts::SQRT_2 * e + 1e-9);
        prop_assert!(d(x, y) <= cone_distance(x, y).unwrap() + 1e-9);
    }

    #[test]
    fn points_split_the_distance(seed in any::<u64>(), p in 3usize..=7, s in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let a = random_dendrogram_tree(&mut r, p).into_tree();
        let b = random_dendrogram_tree(&mut r, p).into_tree();
        let total = d(&a, &b);
        let mid = geodesic_point(&a, &b, s).unwrap();
        prop_assert!(mid.incompatible_pair().is_none());
        prop_assert!((d(&a, &mid) - s * total).abs() <= 1e-9);
        prop_assert!((d(&mid, &b) - (1.0 - s) * total).abs() <= 1e-9);
    }

    #[test]
    fn comparison_triangles_are_fat(seed in any::<u64>(), p in 3usize..=6) {
        let mut r = rng(seed);
        let a = random_dendrogram_tree(&mut r, p).into_tree();
        let b = random_dendrogram_tree(&mut r, p).into_tree();
        let c = random_dendrogram_tree(&mut r, p).into_tree();
        let (ab, ac, bc) = (d(&a, &b), d(&a, &c), d(&b, &c));
        for s in [0.25, 0.5, 0.75] {
            let point = geodesic_point(&b, &c, s).unwrap();
            // Distance from a' to the point at fraction s of b'c' in the plane.
            let euclid_sq = (1.0 - s) * ab * ab + s * ac * ac - s * (1.0 - s) * bc * bc;
            prop_assert!(d(&point, &a) <= euclid_sq.max(0.0).sqrt() + 1e-9);
        }
    }
}

#[test]
fn splits_of_one_tree_are_pairwise_compatible() {
    let mut r = rng(99);
    for p in 2..20 {
        let t = random_split_tree(&mut r, p);
        let splits: Vec<_> = t.inner().keys().collect();
        for x in &splits {
            for y in &splits {
                assert!(splits_compatible(x, y));
            }
        }
    }
}
