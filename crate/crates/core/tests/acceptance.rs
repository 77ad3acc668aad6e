//! Acceptance suite: one test per criterion, each printing a pass line.
//! Run with `cargo test -p banach-lab-core --test acceptance -- --nocapture`
//! to see the per-criterion output. Criterion 9 (byte-identical reports)
//! lives in the CLI crate's acceptance suite, next to the binary it checks.

mod common;

use banach_lab_core::certify::{equivalence_constants, CertifyBudget, PExponent};
use banach_lab_core::convolution::{convolution_phi, ConvOptions, ZVector};
use banach_lab_core::dividing::{
    default_sop_samples, double_limit_table, independence_witness_search, sop_monotonicity_check,
    summing_basis_value, IndependenceConfig, IndependenceFamily, LimitVerdict, PairStatus,
    SearchBudget, SummingBasisPhi,
};
use banach_lab_core::tsirelson::{
    admissible_families, tsirelson_iterates, tsirelson_norm, TsBudget,
};
use banach_lab_core::vector::{FiniteVector, IndexSet, NormSpace, Rat};
use banach_lab_core::{rat, rat_int};
use common::{brute_tables, random_vectors};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::time::Instant;

fn corpus() -> Vec<FiniteVector> {
    // the 200-vector corpus shared by criteria 2 and 3
    random_vectors(200, 8, 12, 0xBA9ACB)
}

#[test]
fn criterion_1_tsirelson_exactness() {
    let start = Instant::now();
    for k in 1..=30 {
        assert_eq!(tsirelson_norm(&FiniteVector::basis(k)).unwrap(), rat_int(1));
    }
    let triple = FiniteVector::new(vec![(3, rat_int(1)), (4, rat_int(1)), (5, rat_int(1))])
        .unwrap();
    assert_eq!(tsirelson_norm(&triple).unwrap(), rat(3, 2));
    // all 0/1 vectors with support inside [1, 8], against the brute-force
    // oracle over arbitrary finite-set admissible families; a single oracle
    // table covers every mask at once
    let all_ones = FiniteVector::new((1..=8).map(|i| (i, rat_int(1))).collect()).unwrap();
    let tables = brute_tables(&all_ones);
    let mut checked = 0usize;
    for mask in 1u32..(1 << 8) {
        let entries: Vec<(u32, Rat)> = (0..8)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| (b + 1, rat_int(1)))
            .collect();
        let x = FiniteVector::new(entries).unwrap();
        let fast = tsirelson_norm(&x).unwrap();
        assert_eq!(&fast, tables.value(mask), "mismatch at mask {mask:#b}");
        checked += 1;
    }
    assert_eq!(checked, 255);
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "criterion 1 exceeded 60 s: {elapsed:?}"
    );
    println!("criterion 1 (tsirelson exactness, {checked} vectors, {elapsed:?}): PASS");
}

#[test]
fn criterion_2_fixed_point_and_stabilization() {
    let budget = TsBudget::default();
    let mut checked = 0usize;
    for x in corpus() {
        let value = tsirelson_norm(&x).unwrap();
        // fixed-point identity over the enumerated interval families inside
        // the support hull, exactly
        let lo = x.min_index().unwrap();
        let hi = x.max_index().unwrap();
        let span = (hi - lo + 1) as usize;
        let mut best = x.sup_norm();
        for family in admissible_families(lo, hi, span).unwrap() {
            let mut sum = Rat::zero();
            for &(a, b) in family.intervals() {
                sum += tsirelson_norm(&x.restrict_interval(a, b)).unwrap();
            }
            let half = sum / rat_int(2);
            if half > best {
                best = half;
            }
        }
        assert_eq!(best, value, "fixed-point identity failed for {x}");
        // iterates stabilize at the norm by level |support|
        let its = tsirelson_iterates(&x, x.support_size(), &budget).unwrap();
        assert_eq!(its.last().unwrap(), &value, "iterates failed for {x}");
        for w in its.windows(2) {
            assert!(w[0] <= w[1]);
        }
        checked += 1;
    }
    assert_eq!(checked, 200);
    println!("criterion 2 (fixed point + stabilization, {checked} vectors): PASS");
}

#[test]
fn criterion_3_unconditionality_and_monotonicity() {
    let mut sign_checks = 0usize;
    let mut restrict_checks = 0usize;
    for x in corpus() {
        let value = tsirelson_norm(&x).unwrap();
        let support: Vec<u32> = x.support().items().to_vec();
        let k = support.len();
        // every sign pattern leaves the norm unchanged
        for mask in 0u32..(1 << k) {
            let flips: Vec<u32> = (0..k).filter(|b| mask & (1 << b) != 0).map(|b| support[b]).collect();
            let flipped = x.apply_signs(&IndexSet::new(flips).unwrap());
            assert_eq!(tsirelson_norm(&flipped).unwrap(), value);
            sign_checks += 1;
        }
        // restriction never increases the norm, over every support subset
        for mask in 0u32..(1 << k) {
            let subset: Vec<u32> = (0..k).filter(|b| mask & (1 << b) != 0).map(|b| support[b]).collect();
            let restricted = x.restrict(&IndexSet::new(subset).unwrap());
            assert!(tsirelson_norm(&restricted).unwrap() <= value);
            restrict_checks += 1;
        }
    }
    println!(
        "criterion 3 (unconditionality {sign_checks} patterns, monotonicity {restrict_checks} restrictions): PASS"
    );
}

#[test]
fn criterion_4_summing_basis_table_reproduction() {
    for m in 1..=20u32 {
        for n in 1..=20u32 {
            let expected = if m <= n { rat_int(2) } else { rat_int(1) };
            assert_eq!(summing_basis_value(m, n), expected);
        }
    }
    let report = double_limit_table(&SummingBasisPhi, 20, 20, &rat(1, 10)).unwrap();
    assert_eq!(report.verdict, LimitVerdict::OrderPropertyWitnessed);
    let limits = [
        report.row_then_column.lo().clone(),
        report.column_then_row.lo().clone(),
    ];
    assert!(report.row_then_column.is_exact() && report.column_then_row.is_exact());
    assert!(limits.contains(&rat_int(1)) && limits.contains(&rat_int(2)));
    println!("criterion 4 (summing-basis table + order property verdict): PASS");
}

#[test]
fn criterion_5_independence_at_depth_six() {
    let start = Instant::now();
    let family = IndependenceFamily::c0_plus_basis();
    let cfg = IndependenceConfig {
        below: rat(5, 4),
        above: rat(7, 4),
        depth: 6,
        seed: 1,
        budget: SearchBudget::default(),
    };
    let report = independence_witness_search(&family, &cfg).unwrap();
    assert!(report.independent_at_depth);
    assert_eq!(report.pairs.len(), 3usize.pow(6) - 1);
    // every witness re-verifies exactly against the stated thresholds
    for pair in &report.pairs {
        match &pair.status {
            PairStatus::Filled { witness } => {
                assert!(witness.sup_norm() <= rat_int(1));
                for &i in &pair.below_set {
                    let v = witness.add(&FiniteVector::basis(i as u32)).sup_norm();
                    assert!(v < rat(5, 4));
                }
                for &j in &pair.above_set {
                    let v = witness.add(&FiniteVector::basis(j as u32)).sup_norm();
                    assert!(v > rat(7, 4));
                }
            }
            PairStatus::Unfilled { .. } => panic!("unfilled pair at depth 6"),
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "criterion 5 exceeded 10 s: {elapsed:?}");
    println!(
        "criterion 5 (independence at depth 6, {} pairs, {elapsed:?}): PASS",
        report.pairs.len()
    );
}

#[test]
fn criterion_6_equivalence_certification() {
    // (e_1, e_2) in Tsirelson with p = 1: enclosures of 1/2 and 1, width
    // at most 1/100
    let xs = vec![FiniteVector::basis(1), FiniteVector::basis(2)];
    let cert = equivalence_constants(
        &xs,
        &PExponent::finite(rat_int(1)).unwrap(),
        &NormSpace::Tsirelson,
        &CertifyBudget::default(),
    )
    .unwrap();
    assert!(cert.c_lower.contains(&rat(1, 2)));
    assert!(cert.c_lower.width() <= rat(1, 100));
    assert!(cert.c_upper.contains(&rat_int(1)));
    assert!(cert.c_upper.width() <= rat(1, 100));

    // the standard l2 basis: both constants equal 1 exactly
    let basis = vec![
        FiniteVector::basis(1),
        FiniteVector::basis(2),
        FiniteVector::basis(3),
    ];
    let cert2 = equivalence_constants(
        &basis,
        &PExponent::finite(rat_int(2)).unwrap(),
        &NormSpace::l2(),
        &CertifyBudget::default(),
    )
    .unwrap();
    assert!(cert2.c_lower.is_exact() && *cert2.c_lower.lo() == rat_int(1));
    assert!(cert2.c_upper.is_exact() && *cert2.c_upper.lo() == rat_int(1));
    println!("criterion 6 (equivalence certification): PASS");
}

#[test]
fn criterion_7_convolution_formula() {
    let x = ZVector::delta(0);
    let tol = rat(1, 1_000_000_000);
    let mut rng = ChaCha20Rng::seed_from_u64(0xC0117);
    let mut checked = 0usize;
    while checked < 50 {
        // random y with ||y||_1 <= 3, support within [-16, 16]
        let k = rng.random_range(1..=6);
        let mut entries = std::collections::BTreeMap::new();
        for _ in 0..k {
            let idx = rng.random_range(-16i64..=16);
            let num = rng.random_range(-8i64..=8);
            let den = rng.random_range(1i64..=4);
            if num != 0 {
                entries.insert(idx, rat(num, den));
            }
        }
        let mut y = ZVector::new(entries.into_iter().collect()).unwrap();
        let norm = y.l1_norm();
        if norm.is_zero() {
            continue;
        }
        if norm > rat_int(3) {
            // scale into ||y||_1 <= 3 keeping rationality
            let shrink = rat_int(3) / &norm * rat(7, 8);
            y = ZVector::new(
                y.entries()
                    .iter()
                    .map(|(i, v)| (*i, v * &shrink))
                    .collect(),
            )
            .unwrap();
        }
        let analytic = {
            let d = y.l1_norm() - Rat::one();
            if d.is_negative() {
                Rat::zero()
            } else {
                d
            }
        };
        let report = convolution_phi(&x, &y, 16, &ConvOptions::default()).unwrap();
        // enclosure must bracket the analytic value and match within 1e-9
        assert!(*report.value.lo() <= analytic && analytic <= *report.value.hi());
        assert!((report.value.hi() - &analytic).abs() <= tol);
        assert!((report.value.lo() - &analytic).abs() <= tol);
        checked += 1;
    }
    println!("criterion 7 (convolution formula, {checked} targets): PASS");
}

#[test]
fn criterion_8_sop_chain() {
    let samples = default_sop_samples(10);
    let report = sop_monotonicity_check(20, &samples);
    assert!(report.pass, "violations: {:?}", report.violations);
    assert_eq!(report.chain_checked, 20 * 19 / 2);
    println!(
        "criterion 8 (SOP chain to depth 20, {} monotone + {} chain checks): PASS",
        report.monotone_checked, report.chain_checked
    );
}
