//! Cross-checks of the Tsirelson evaluator against the brute-force oracle
//! over arbitrary finite-set admissible families.

mod common;

use banach_lab_core::tsirelson::{tsirelson_iterates, tsirelson_norm, TsBudget};
use banach_lab_core::vector::FiniteVector;
use banach_lab_core::{rat, rat_int};
use common::{brute_tables, brute_tsirelson, random_vectors, subset_families};

#[test]
fn subset_family_count_matches_interval_stream_after_hull_normalization() {
    // brute-force families over {1, 2, 3}, normalized to interval hulls and
    // deduplicated, must match the interval stream exactly
    let mut hulls: Vec<Vec<(u32, u32)>> = Vec::new();
    for family in subset_families(3) {
        let hull: Vec<(u32, u32)> = family
            .iter()
            .map(|piece| {
                let lo = piece.trailing_zeros() + 1;
                let hi = 32 - piece.leading_zeros();
                (lo, hi)
            })
            .collect();
        hulls.push(hull);
    }
    hulls.sort();
    hulls.dedup();
    let stream: Vec<Vec<(u32, u32)>> = banach_lab_core::tsirelson::admissible_families(1, 3, 3)
        .unwrap()
        .map(|f| f.intervals().to_vec())
        .collect();
    assert_eq!(stream.len(), 7);
    let mut sorted_stream = stream.clone();
    sorted_stream.sort();
    assert_eq!(hulls, sorted_stream);
}

#[test]
fn brute_force_agrees_on_small_examples() {
    let triple = FiniteVector::new(vec![
        (3, rat_int(1)),
        (4, rat_int(1)),
        (5, rat_int(1)),
    ])
    .unwrap();
    assert_eq!(brute_tsirelson(&triple), rat(3, 2));
    let pair = FiniteVector::new(vec![(1, rat_int(1)), (2, rat_int(1))]).unwrap();
    assert_eq!(brute_tsirelson(&pair), rat_int(1));
}

#[test]
fn rational_vectors_match_oracle_on_small_supports() {
    // supports of size <= 5 within [1, 8]: the interval-hull reduction must
    // give exactly the value of the arbitrary-finite-set definition
    let budget = TsBudget::default();
    for x in random_vectors(40, 5, 8, 2024) {
        let fast = tsirelson_norm(&x).unwrap();
        let slow = brute_tsirelson(&x);
        assert_eq!(fast, slow, "mismatch for {x}");
        // and the defining iterates agree level by level
        let steps = x.support_size();
        let fast_its = tsirelson_iterates(&x, steps, &budget).unwrap();
        let slow_its = brute_tables(&x).top_iterates(steps);
        assert_eq!(fast_its, slow_its, "iterate mismatch for {x}");
    }
}

#[test]
fn oracle_iterates_are_nondecreasing_and_reach_the_norm() {
    for x in random_vectors(10, 4, 7, 7) {
        let tables = brute_tables(&x);
        let its = tables.top_iterates(x.support_size());
        for w in its.windows(2) {
            assert!(w[0] <= w[1]);
        }
        assert_eq!(its.last().unwrap(), tables.top_value());
    }
}
