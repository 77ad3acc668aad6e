//! Regression anchoring for the `l1(Z)` convolution formula.
//!
//! The frozen instance is checked through an independent certificate: the
//! stored primal and dual witnesses are re-verified by elementary exact
//! arithmetic (no simplex involved), so the expected value stands on its
//! own even if the solver were wrong.

use banach_lab_core::convolution::{binomial_kernel, convolution_phi, ConvOptions, ZVector};
use banach_lab_core::rat_int;
use banach_lab_core::vector::Rat;
use num_traits::{One, Signed, Zero};

/// Elementary certificate check: any `z` with `||z||_1 <= 1` gives an upper
/// bound `||x*z - y||_1`; any `u` with `||u||_inf <= 1` gives the lower
/// bound `sum_k u_k y_k - max_j |corr(x, u)(j)|`, `j` over the truncated
/// `z` domain.
fn certified_bracket(
    x: &ZVector,
    y: &ZVector,
    halfwidth: i64,
    z: &ZVector,
    u: &ZVector,
) -> (Rat, Rat) {
    assert!(z.l1_norm() <= Rat::one(), "primal witness outside the ball");
    let upper = x.convolve(z).sub(y).l1_norm();
    let mut max_corr = Rat::zero();
    for j in -2 * halfwidth..=2 * halfwidth {
        // corr(x, u)(j) = sum_k x(k - j) u(k)
        let mut corr = Rat::zero();
        for (k, uk) in u.entries() {
            assert!(uk.abs() <= Rat::one(), "dual witness outside the sup ball");
            let xv = x.get(k - j);
            if !xv.is_zero() {
                corr += &xv * uk;
            }
        }
        let corr = corr.abs();
        if corr > max_corr {
            max_corr = corr;
        }
    }
    let mut u_dot_y = Rat::zero();
    for (k, yv) in y.entries() {
        u_dot_y += &u.get(*k) * yv;
    }
    let lower = {
        let v = u_dot_y - max_corr;
        if v.is_negative() {
            Rat::zero()
        } else {
            v
        }
    };
    (lower, upper)
}

#[test]
fn frozen_binomial_kernel_instance() {
    // phi(b_1, delta_0) at halfwidth 16 equals 1 exactly. Frozen witnesses:
    // z = 0 gives the upper bound ||delta_0||_1 = 1, and the alternating
    // parity vector u(k) = (-1)^k kills the correlation with b_1 outright
    // (1/2 - 1/4 - 1/4 = 0), giving the matching lower bound u(0) = 1.
    let expected = rat_int(1);
    let x = binomial_kernel(1);
    let y = ZVector::delta(0);
    let w: i64 = 16;

    let frozen_z = ZVector::zero();
    let frozen_u = ZVector::new(
        (-(2 * w + 1)..=(2 * w + 1))
            .map(|k| (k, if k.rem_euclid(2) == 0 { rat_int(1) } else { rat_int(-1) }))
            .collect(),
    )
    .unwrap();
    let (lower, upper) = certified_bracket(&x, &y, w, &frozen_z, &frozen_u);
    assert_eq!(lower, expected, "frozen dual certificate must be tight");
    assert_eq!(upper, expected, "frozen primal certificate must be tight");

    // the implementation must land inside the independently certified bracket
    let report = convolution_phi(&x, &y, w as u32, &ConvOptions::default()).unwrap();
    assert!(report.optimal);
    assert!(*report.value.lo() >= lower && *report.value.hi() <= upper);
    assert_eq!(*report.value.lo(), expected);
    assert_eq!(*report.value.hi(), expected);
}

#[test]
fn reported_witnesses_reverify() {
    // the report's own witnesses must pass the same elementary check
    let x = binomial_kernel(2);
    let y = binomial_kernel(1);
    let w: i64 = 8;
    let report = convolution_phi(&x, &y, w as u32, &ConvOptions::default()).unwrap();
    let (lower, upper) = certified_bracket(&x, &y, w, &report.z, &report.dual_u);
    assert!(lower <= upper);
    assert_eq!(*report.value.lo(), lower.max(Rat::zero()));
    assert_eq!(*report.value.hi(), upper);
}
