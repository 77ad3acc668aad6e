//! Net-restricted probes of the type space: trivial-type evaluation, lower
//! bounds for the d-metric between trivial types, and greedy packing
//! statistics.
//!
//! The d-metric takes a sup over the whole space, so a finite net can only
//! ever certify lower bounds. Everything here is labeled accordingly:
//! enlarging the net never decreases a reported value, and no output ever
//! claims an upper bound on the true metric.

use crate::ambient::{ambient_norm, NormError};
use crate::enclosure::Enclosure;
use crate::tsirelson::TsBudget;
use crate::vector::{FiniteVector, NormSpace, Rat};
use num_traits::One;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ProbeError {
    #[error("point is not certified to lie in the ambient unit ball")]
    NotInBall,
    #[error("net would have {0} points, over the cap of {1}")]
    NetTooLarge(u64, usize),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// A finite subset of the ambient unit ball.
#[derive(Debug, Clone)]
pub struct BallNet {
    pub ambient: NormSpace,
    points: Vec<FiniteVector>,
    pub max_index: u32,
    pub step_denominator: u32,
}

fn norm_tol() -> Rat {
    crate::rat(1, 1 << 30)
}

/// Scale a vector into the unit ball using the certified upper bound of its
/// norm; points already inside pass through untouched.
fn clamp_into_ball(
    x: FiniteVector,
    ambient: &NormSpace,
    budget: &TsBudget,
) -> Result<FiniteVector, NormError> {
    let n = ambient_norm(&x, ambient, &norm_tol(), budget)?;
    if *n.hi() <= Rat::one() {
        Ok(x)
    } else {
        Ok(x.scale(&(Rat::one() / n.hi())))
    }
}

impl BallNet {
    /// All vectors with entries on the `1/step_denominator` grid in
    /// `[-1, 1]` and support inside `[1, max_index]`, scaled into the ball.
    pub fn generate(
        ambient: NormSpace,
        max_index: u32,
        step_denominator: u32,
        cap: usize,
    ) -> Result<Self, ProbeError> {
        assert!(max_index >= 1 && step_denominator >= 1);
        let per_coord = 2 * step_denominator as u64 + 1;
        let total = per_coord.saturating_pow(max_index);
        if total > cap as u64 {
            return Err(ProbeError::NetTooLarge(total, cap));
        }
        let budget = TsBudget::default();
        let mut points = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        let mut odometer = vec![0u64; max_index as usize];
        loop {
            let mut entries = Vec::new();
            for (pos, &slot) in odometer.iter().enumerate() {
                let num = slot as i64 - step_denominator as i64;
                if num != 0 {
                    entries.push(((pos + 1) as u32, crate::rat(num, step_denominator as i64)));
                }
            }
            let x = FiniteVector::new(entries).expect("distinct indices");
            let x = clamp_into_ball(x, &ambient, &budget)?;
            if seen.insert(x.clone()) {
                points.push(x);
            }
            let mut carry = true;
            for slot in odometer.iter_mut() {
                if *slot + 1 < per_coord {
                    *slot += 1;
                    carry = false;
                    break;
                }
                *slot = 0;
            }
            if carry {
                break;
            }
        }
        Ok(BallNet {
            ambient,
            points,
            max_index,
            step_denominator,
        })
    }

    /// Wrap explicit points, scaling any that exceed the ball.
    pub fn from_points(ambient: NormSpace, points: Vec<FiniteVector>) -> Result<Self, ProbeError> {
        let budget = TsBudget::default();
        let max_index = points.iter().filter_map(|p| p.max_index()).max().unwrap_or(1);
        let points = points
            .into_iter()
            .map(|x| clamp_into_ball(x, &ambient, &budget))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BallNet {
            ambient,
            points,
            max_index,
            step_denominator: 0,
        })
    }

    pub fn points(&self) -> &[FiniteVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The net restricted to its first `n` points (monotonicity probes).
    pub fn prefix(&self, n: usize) -> BallNet {
        BallNet {
            ambient: self.ambient.clone(),
            points: self.points[..n.min(self.points.len())].to_vec(),
            max_index: self.max_index,
            step_denominator: self.step_denominator,
        }
    }
}

fn require_in_ball(a: &FiniteVector, ambient: &NormSpace) -> Result<(), ProbeError> {
    let n = ambient_norm(a, ambient, &norm_tol(), &TsBudget::default())?;
    if *n.hi() <= Rat::one() {
        Ok(())
    } else {
        Err(ProbeError::NotInBall)
    }
}

/// Values of the trivial type `f_a(x) = ||x + a||` on every net point.
pub fn trivial_type_eval(a: &FiniteVector, net: &BallNet) -> Result<Vec<Enclosure>, ProbeError> {
    require_in_ball(a, &net.ambient)?;
    let budget = TsBudget::default();
    net.points
        .iter()
        .map(|x| {
            ambient_norm(&x.add(a), &net.ambient, &norm_tol(), &budget).map_err(ProbeError::from)
        })
        .collect()
}

/// Net-restricted lower bound on the d-metric between the trivial types of
/// `a` and `b`: `max_x |f_a(x) - f_b(x)|` over the net. Monotone
/// nondecreasing under net refinement.
pub fn d_metric_lower(
    a: &FiniteVector,
    b: &FiniteVector,
    net: &BallNet,
) -> Result<Enclosure, ProbeError> {
    let fa = trivial_type_eval(a, net)?;
    let fb = trivial_type_eval(b, net)?;
    let mut best = Enclosure::zero();
    for (va, vb) in fa.iter().zip(&fb) {
        best = best.max(&va.sub(vb).abs());
    }
    Ok(best)
}

/// Greedy packing report for a family of trivial types.
#[derive(Debug, Clone)]
pub struct PackingReport {
    pub epsilon: Rat,
    /// Indices into the family, in first-fit order.
    pub selected: Vec<usize>,
    /// Pairwise net lower bounds on the d-metric.
    pub pairwise: Vec<Vec<Enclosure>>,
    /// Packing count as the net grows: (net prefix size, count).
    pub growth: Vec<(usize, usize)>,
}

fn greedy_selection(pairwise: &[Vec<Enclosure>], epsilon: &Rat) -> Vec<usize> {
    let mut selected: Vec<usize> = Vec::new();
    for i in 0..pairwise.len() {
        if selected.iter().all(|&s| pairwise[i][s].lo() > epsilon) {
            selected.push(i);
        }
    }
    selected
}

/// Deterministic first-fit epsilon-packing of the trivial types of the
/// family under the net-restricted d-metric lower bound.
pub fn packing_stats(
    family: &[FiniteVector],
    epsilon: &Rat,
    net: &BallNet,
) -> Result<PackingReport, ProbeError> {
    let values: Vec<Vec<Enclosure>> = family
        .iter()
        .map(|a| trivial_type_eval(a, net))
        .collect::<Result<_, _>>()?;
    let lower_at = |i: usize, j: usize, points: usize| -> Enclosure {
        let mut best = Enclosure::zero();
        for x in 0..points {
            best = best.max(&values[i][x].sub(&values[j][x]).abs());
        }
        best
    };
    let n = family.len();
    let full = net.len();
    let mut pairwise = vec![vec![Enclosure::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairwise[i][j] = lower_at(i, j, full);
            }
        }
    }
    let selected = greedy_selection(&pairwise, epsilon);
    // growth trend over doubling net prefixes
    let mut growth = Vec::new();
    let mut size = 1usize;
    while size < full {
        let mut partial = vec![vec![Enclosure::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    partial[i][j] = lower_at(i, j, size);
                }
            }
        }
        growth.push((size, greedy_selection(&partial, epsilon).len()));
        size *= 2;
    }
    growth.push((full, selected.len()));
    Ok(PackingReport {
        epsilon: epsilon.clone(),
        selected,
        pairwise,
        growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, rat_int};

    fn neg_basis_net(space: NormSpace, count: u32) -> BallNet {
        let pts = (1..=count)
            .map(|k| FiniteVector::basis(k).scale(&-Rat::one()))
            .collect();
        BallNet::from_points(space, pts).unwrap()
    }

    #[test]
    fn trivial_type_of_zero_is_the_norm() {
        let net = BallNet::generate(NormSpace::Sup, 2, 2, 1000).unwrap();
        let vals = trivial_type_eval(&FiniteVector::zero(), &net).unwrap();
        for (x, v) in net.points().iter().zip(&vals) {
            assert_eq!(*v.lo(), x.sup_norm());
        }
    }

    #[test]
    fn trivial_type_hits_zero_at_negated_point() {
        let net = neg_basis_net(NormSpace::Sup, 1);
        let vals = trivial_type_eval(&FiniteVector::basis(1), &net).unwrap();
        assert_eq!(*vals[0].hi(), rat_int(0));
    }

    #[test]
    fn trivial_type_in_tsirelson_scales() {
        let a = FiniteVector::new(vec![(3, rat(2, 3)), (4, rat(2, 3)), (5, rat(2, 3))]).unwrap();
        let net = BallNet::from_points(NormSpace::Tsirelson, vec![FiniteVector::zero()]).unwrap();
        let vals = trivial_type_eval(&a, &net).unwrap();
        // ||a||_T = (2/3) * (3/2) = 1
        assert_eq!(*vals[0].lo(), rat_int(1));
        assert_eq!(*vals[0].hi(), rat_int(1));
    }

    #[test]
    fn d_metric_zero_for_equal_types() {
        let net = BallNet::generate(NormSpace::Sup, 2, 2, 1000).unwrap();
        let a = FiniteVector::basis(1);
        let d = d_metric_lower(&a, &a, &net).unwrap();
        assert_eq!(*d.hi(), rat_int(0));
    }

    #[test]
    fn d_metric_separates_c0_basis_vectors() {
        let net = neg_basis_net(NormSpace::Sup, 1);
        let d = d_metric_lower(&FiniteVector::basis(1), &FiniteVector::basis(2), &net).unwrap();
        // f_{e1}(-e1) = 0 while f_{e2}(-e1) = 1
        assert!(*d.lo() >= rat_int(1));
    }

    #[test]
    fn d_metric_l2_sqrt_two() {
        let net = neg_basis_net(NormSpace::l2(), 1);
        let d = d_metric_lower(&FiniteVector::basis(1), &FiniteVector::basis(2), &net).unwrap();
        // |0 - sqrt(2)| = 1.41421...
        assert!(*d.lo() > rat(14142, 10000));
        assert!(*d.hi() < rat(14143, 10000));
    }

    #[test]
    fn packing_keeps_separated_family() {
        let family: Vec<FiniteVector> = (1..=10).map(FiniteVector::basis).collect();
        let net = neg_basis_net(NormSpace::Sup, 10);
        let report = packing_stats(&family, &rat(1, 2), &net).unwrap();
        assert_eq!(report.selected.len(), 10);
        // growth is nondecreasing in the net size
        for w in report.growth.windows(2) {
            assert!(w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn packing_single_and_oversized_epsilon() {
        let net = neg_basis_net(NormSpace::Sup, 3);
        let single = packing_stats(&[FiniteVector::basis(1)], &rat(1, 2), &net).unwrap();
        assert_eq!(single.selected.len(), 1);
        // trivial types take values in [0, 2], so eps > 2 packs only one
        let family: Vec<FiniteVector> = (1..=5).map(FiniteVector::basis).collect();
        let wide = packing_stats(&family, &rat(5, 2), &net).unwrap();
        assert_eq!(wide.selected.len(), 1);
    }

    #[test]
    fn net_generation_is_deduplicated_and_in_ball() {
        let net = BallNet::generate(NormSpace::l2(), 2, 1, 1000).unwrap();
        // 9 raw grid points, some coincide after scaling into the ball
        assert!(net.len() <= 9);
        for x in net.points() {
            assert!(x.l2_norm_sq() <= rat_int(1));
        }
    }

    #[test]
    fn net_cap_is_enforced() {
        assert!(matches!(
            BallNet::generate(NormSpace::Sup, 8, 4, 1000),
            Err(ProbeError::NetTooLarge(_, _))
        ));
    }

    #[test]
    fn lipschitz_bound_of_trivial_types() {
        let net = BallNet::generate(NormSpace::Sup, 2, 2, 1000).unwrap();
        let a = FiniteVector::new(vec![(1, rat(1, 2)), (2, rat(-1, 4))]).unwrap();
        let vals = trivial_type_eval(&a, &net).unwrap();
        for (i, x) in net.points().iter().enumerate() {
            for (j, y) in net.points().iter().enumerate() {
                let diff = vals[i].sub(&vals[j]).abs();
                let dist = x.sub(y).sup_norm();
                assert!(*diff.lo() <= dist, "trivial types must be 1-Lipschitz");
            }
        }
    }

    #[test]
    fn value_range_zero_two() {
        let net = BallNet::generate(NormSpace::Sup, 2, 2, 1000).unwrap();
        let a = FiniteVector::basis(1);
        for v in trivial_type_eval(&a, &net).unwrap() {
            assert!(*v.lo() >= rat_int(0) && *v.hi() <= rat_int(2));
        }
    }

    #[test]
    fn estimated_metric_is_symmetric_and_triangular() {
        let net = BallNet::generate(NormSpace::Sup, 3, 2, 1000).unwrap();
        let a = FiniteVector::basis(1);
        let b = FiniteVector::new(vec![(2, rat(1, 2))]).unwrap();
        let c = FiniteVector::new(vec![(1, rat(-1, 4)), (3, rat(3, 4))]).unwrap();
        let dab = d_metric_lower(&a, &b, &net).unwrap();
        let dba = d_metric_lower(&b, &a, &net).unwrap();
        assert_eq!(dab, dba);
        let dac = d_metric_lower(&a, &c, &net).unwrap();
        let dcb = d_metric_lower(&c, &b, &net).unwrap();
        // exact ambient: the net metric satisfies the triangle inequality
        assert!(*dab.lo() <= dac.lo() + dcb.lo());
    }

    #[test]
    fn net_monotonicity() {
        let family: Vec<FiniteVector> = (1..=4).map(FiniteVector::basis).collect();
        let net = neg_basis_net(NormSpace::Sup, 4);
        let small = net.prefix(2);
        let d_small = d_metric_lower(&family[0], &family[1], &small).unwrap();
        let d_full = d_metric_lower(&family[0], &family[1], &net).unwrap();
        assert!(d_small.lo() <= d_full.lo());
        let p_small = packing_stats(&family, &rat(1, 2), &small).unwrap();
        let p_full = packing_stats(&family, &rat(1, 2), &net).unwrap();
        assert!(p_small.selected.len() <= p_full.selected.len());
    }
}
