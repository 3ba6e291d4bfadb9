//! Property suites, runnable on their own with
//! `cargo test -p homloci --test properties`.

mod common;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use homloci::bundlecalc::DecomposedBundle;
use homloci::bwb::{bott, dual_label, euler_char};
use homloci::chow::hrr_chi;

fn assert_outcome(o: common::Outcome) {
    assert!(o.pass, "{}", o.detail);
}

#[test]
fn serre_duality_on_random_irreducibles() {
    assert_outcome(common::serre_duality(100, 7));
}

#[test]
fn littlewood_richardson_matches_weyl_dimensions() {
    assert_outcome(common::lr_weyl_consistency());
}

#[test]
fn decompose_character_round_trips() {
    assert_outcome(common::decompose_round_trip(100, 11));
}

#[test]
fn catalog_print_parse_round_trips() {
    assert_outcome(common::catalog_round_trip());
}

#[test]
fn bott_and_riemann_roch_agree() {
    assert_outcome(common::oracle_equivalence(100, 2024));
}

#[test]
fn partitions_in_box_are_counted_by_binomials() {
    // Partitions in an r x m box number binom(r+m, r).
    assert_eq!(common::partitions_in_box(5, 4).len(), 126);
    assert_eq!(common::partitions_in_box(2, 2).len(), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serre_duality_holds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = common::random_space(&mut rng, 7);
        let label = common::random_label(&mut rng, &space, 3);
        let k = space.canonical_bundle_label();
        let dual: Vec<i64> = dual_label(&space, &label).iter().zip(&k).map(|(a, b)| a + b).collect();
        let a = bott(&space, &label).unwrap();
        let b = bott(&space, &dual).unwrap();
        prop_assert_eq!(a.dimension, b.dimension);
        prop_assert_eq!(a.degree.map(|q| space.dim() - q), b.degree);
    }

    #[test]
    fn euler_characteristics_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = common::random_space(&mut rng, 6);
        let label = common::random_label(&mut rng, &space, 2);
        let bwb = euler_char(&space, &label).unwrap();
        let hrr = hrr_chi(&space, &DecomposedBundle::irreducible(label)).unwrap();
        prop_assert_eq!(hrr, BigInt::from(bwb));
    }
}
