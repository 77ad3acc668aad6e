//! The `l1(Z)` convolution formula `phi(x, y) = min { ||x*z - y||_1 :
//! ||z||_1 <= 1 }`, evaluated as a certified enclosure.
//!
//! The minimizing `z` is truncated to `[-2W, 2W]` (the truncation halfwidth is
//! part of the report, not hidden); with supports of `x` and `y` inside
//! `[-W, W]` the residual `x*z - y` lives inside `[-3W, 3W]` and the whole
//! problem is a finite linear program. The exact simplex returns a primal
//! point and a dual vector; re-evaluating both independently gives an
//! enclosure `[y.dual, ||x*z - y||_1]` that is sound even against solver
//! bugs, and collapses to a point at optimality.

use crate::enclosure::Enclosure;
use crate::simplex::{self, LpError, LpProblem};
use crate::vector::Rat;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ConvError {
    #[error("support index {index} outside halfwidth {halfwidth}")]
    SupportOutOfRange { index: i64, halfwidth: u32 },
    #[error("duplicate index {0}")]
    DuplicateIndex(i64),
    #[error("malformed vector: {0}")]
    Parse(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// A finitely supported vector indexed by the integers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ZVector {
    entries: Vec<(i64, Rat)>,
}

impl ZVector {
    pub fn new(entries: Vec<(i64, Rat)>) -> Result<Self, ConvError> {
        let mut map = BTreeMap::new();
        for (idx, value) in entries {
            if map.insert(idx, value).is_some() {
                return Err(ConvError::DuplicateIndex(idx));
            }
        }
        Ok(ZVector {
            entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        })
    }

    pub fn zero() -> Self {
        ZVector { entries: Vec::new() }
    }

    /// The convolution identity `delta_0` (or a shifted delta).
    pub fn delta(at: i64) -> Self {
        ZVector {
            entries: vec![(at, Rat::one())],
        }
    }

    pub fn entries(&self) -> &[(i64, Rat)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: i64) -> Rat {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => Rat::zero(),
        }
    }

    pub fn min_index(&self) -> Option<i64> {
        self.entries.first().map(|(i, _)| *i)
    }

    pub fn max_index(&self) -> Option<i64> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn l1_norm(&self) -> Rat {
        self.entries
            .iter()
            .fold(Rat::zero(), |acc, (_, v)| acc + v.abs())
    }

    pub fn sum(&self) -> Rat {
        self.entries
            .iter()
            .fold(Rat::zero(), |acc, (_, v)| acc + v)
    }

    pub fn sub(&self, other: &ZVector) -> ZVector {
        let mut map: BTreeMap<i64, Rat> = self.entries.iter().cloned().collect();
        for (i, v) in &other.entries {
            let entry = map.entry(*i).or_insert_with(Rat::zero);
            *entry = &*entry - v;
        }
        ZVector {
            entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    pub fn convolve(&self, other: &ZVector) -> ZVector {
        let mut map: BTreeMap<i64, Rat> = BTreeMap::new();
        for (i, a) in &self.entries {
            for (j, b) in &other.entries {
                let entry = map.entry(i + j).or_insert_with(Rat::zero);
                *entry = &*entry + &(a * b);
            }
        }
        ZVector {
            entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(i, v)| serde_json::json!([i, v.to_string()]))
            .collect();
        serde_json::json!({ "entries": entries })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, ConvError> {
        let entries_value = match value {
            serde_json::Value::Object(map) => map
                .get("entries")
                .ok_or_else(|| ConvError::Parse("missing `entries` field".into()))?,
            serde_json::Value::Array(_) => value,
            _ => return Err(ConvError::Parse("expected object or array".into())),
        };
        let items = entries_value
            .as_array()
            .ok_or_else(|| ConvError::Parse("`entries` must be an array".into()))?;
        let mut entries = Vec::with_capacity(items.len());
        for item in items {
            let pair = item
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| ConvError::Parse("each entry must be [index, value]".into()))?;
            let idx = pair[0]
                .as_i64()
                .ok_or_else(|| ConvError::Parse("entry index must be an integer".into()))?;
            let value = match &pair[1] {
                serde_json::Value::String(s) => s
                    .parse::<Rat>()
                    .map_err(|e| ConvError::Parse(format!("bad rational `{s}`: {e}")))?,
                serde_json::Value::Number(n) => n
                    .as_i64()
                    .map(|i| Rat::from_integer(i.into()))
                    .ok_or_else(|| ConvError::Parse(format!("non-integer number {n}")))?,
                _ => return Err(ConvError::Parse("entry value must be string or integer".into())),
            };
            entries.push((idx, value));
        }
        ZVector::new(entries)
    }
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Coefficient sequence of `(cos t)^(2i)` on `Z`: entry `k` is
/// `C(2i, i+k) / 4^i` for `|k| <= i`. Nonnegative, sums to 1.
pub fn binomial_kernel(i: u32) -> ZVector {
    let denom = BigInt::from(4).pow(i);
    let mut entries = Vec::new();
    for k in -(i as i64)..=(i as i64) {
        let c = binomial(2 * i as u64, (i as i64 + k) as u64);
        entries.push((k, Rat::new(c, denom.clone())));
    }
    ZVector::new(entries).expect("distinct indices by construction")
}

#[derive(Debug, Clone)]
pub struct ConvOptions {
    /// Requested enclosure width (the exact solve yields width zero; this
    /// only matters for budget-exhausted fallbacks).
    pub tol: Rat,
    pub max_pivots: usize,
}

impl Default for ConvOptions {
    fn default() -> Self {
        ConvOptions {
            tol: crate::rat(1, 1_000_000_000),
            max_pivots: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvReport {
    /// Enclosure of `min ||x*z - y||_1` over the truncated ball.
    pub value: Enclosure,
    /// Primal witness (feasible, reproduces the upper bound exactly).
    pub z: ZVector,
    /// Dual witness: `|u_k| <= 1` and `sum u_k y_k + ball_offset` is the
    /// certified lower bound (`ball_offset <= 0` bounds `||corr(x, u)||_inf`).
    pub dual_u: ZVector,
    pub dual_ball_offset: Rat,
    pub pivots: usize,
    /// Whether the simplex reached optimality (enclosure width zero).
    pub optimal: bool,
    /// The `z` domain was `[-2W, 2W]` for this halfwidth `W`.
    pub halfwidth: u32,
}

fn check_support(v: &ZVector, w: u32) -> Result<(), ConvError> {
    for (i, _) in v.entries() {
        if i.unsigned_abs() > w as u64 {
            return Err(ConvError::SupportOutOfRange {
                index: *i,
                halfwidth: w,
            });
        }
    }
    Ok(())
}

/// Certified enclosure of `inf { ||x*z - y||_1 : supp z in [-2W, 2W],
/// ||z||_1 <= 1 }`. Requires supports of `x` and `y` inside `[-W, W]`.
pub fn convolution_phi(
    x: &ZVector,
    y: &ZVector,
    halfwidth: u32,
    opts: &ConvOptions,
) -> Result<ConvReport, ConvError> {
    check_support(x, halfwidth)?;
    check_support(y, halfwidth)?;
    let w = halfwidth as i64;
    let zlo = -2 * w;
    let zhi = 2 * w;
    let klo = -3 * w;
    let khi = 3 * w;
    let nz = (zhi - zlo + 1) as usize;
    let nk = (khi - klo + 1) as usize;
    // columns: zp, zn, rp, rn, s
    let col_zp = |j: i64| (j - zlo) as usize;
    let col_zn = |j: i64| nz + (j - zlo) as usize;
    let col_rp = |k: i64| 2 * nz + (k - klo) as usize;
    let col_rn = |k: i64| 2 * nz + nk + (k - klo) as usize;
    let col_s = 2 * nz + 2 * nk;
    let num_vars = 2 * nz + 2 * nk + 1;

    let mut objective = vec![Rat::zero(); num_vars];
    for k in klo..=khi {
        objective[col_rp(k)] = Rat::one();
        objective[col_rn(k)] = Rat::one();
    }

    let mut rows = Vec::with_capacity(nk + 1);
    let mut rhs = Vec::with_capacity(nk + 1);
    let mut basis = Vec::with_capacity(nk + 1);
    for k in klo..=khi {
        let mut row = vec![Rat::zero(); num_vars];
        for (i, xi) in x.entries() {
            let j = k - i;
            if j >= zlo && j <= zhi {
                row[col_zp(j)] = xi.clone();
                row[col_zn(j)] = -xi.clone();
            }
        }
        row[col_rp(k)] = -Rat::one();
        row[col_rn(k)] = Rat::one();
        let b = y.get(k);
        basis.push(if b.is_negative() { col_rp(k) } else { col_rn(k) });
        rows.push(row);
        rhs.push(b);
    }
    let mut ball_row = vec![Rat::zero(); num_vars];
    for j in zlo..=zhi {
        ball_row[col_zp(j)] = Rat::one();
        ball_row[col_zn(j)] = Rat::one();
    }
    ball_row[col_s] = Rat::one();
    rows.push(ball_row);
    rhs.push(Rat::one());
    basis.push(col_s);

    let lp = LpProblem {
        num_vars,
        objective,
        rows,
        rhs,
    };

    let solved = simplex::solve_with_basis(&lp, &basis, opts.max_pivots);
    let (z, dual, pivots, optimal) = match solved {
        Ok(sol) => {
            let mut z_entries = Vec::new();
            for j in zlo..=zhi {
                let v = &sol.primal[col_zp(j)] - &sol.primal[col_zn(j)];
                if !v.is_zero() {
                    z_entries.push((j, v));
                }
            }
            let z = ZVector::new(z_entries).expect("distinct indices");
            (z, Some(sol.dual), sol.pivots, true)
        }
        Err(LpError::PivotBudget(p)) => (ZVector::zero(), None, p, false),
        Err(e) => return Err(e.into()),
    };

    // Upper bound: independent exact evaluation of the primal witness.
    let residual = x.convolve(&z).sub(y);
    let upper = residual.l1_norm();
    debug_assert!(z.l1_norm() <= Rat::one());

    // Lower bound: the dual vector, verified exactly; fall back to the
    // analytic bound max(0, ||y||_1 - ||x||_1) when unavailable.
    let analytic_lower = {
        let d = y.l1_norm() - x.l1_norm();
        if d.is_negative() {
            Rat::zero()
        } else {
            d
        }
    };
    let mut dual_u = ZVector::zero();
    let mut dual_ball_offset = Rat::zero();
    let mut lower = analytic_lower;
    if let Some(dualvec) = dual {
        if let Some(bound) = lp.check_dual(&dualvec) {
            if bound > lower {
                lower = bound;
            }
            let mut u_entries = Vec::new();
            for k in klo..=khi {
                let v = dualvec[(k - klo) as usize].clone();
                if !v.is_zero() {
                    u_entries.push((k, v));
                }
            }
            dual_u = ZVector::new(u_entries).expect("distinct indices");
            dual_ball_offset = dualvec[nk].clone();
        }
    }
    // The simplex is exact, so at optimality lower == upper; the guard keeps
    // the enclosure sound no matter what.
    if lower > upper {
        lower = upper.clone();
    }
    Ok(ConvReport {
        value: Enclosure::new(lower, upper),
        z,
        dual_u,
        dual_ball_offset,
        pivots,
        optimal,
        halfwidth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, rat_int};

    #[test]
    fn binomial_kernel_base_cases() {
        assert_eq!(binomial_kernel(0), ZVector::delta(0));
        let b1 = binomial_kernel(1);
        assert_eq!(b1.get(-1), rat(1, 4));
        assert_eq!(b1.get(0), rat(1, 2));
        assert_eq!(b1.get(1), rat(1, 4));
        for i in 0..6 {
            let b = binomial_kernel(i);
            assert_eq!(b.sum(), rat_int(1));
            assert_eq!(b.l1_norm(), rat_int(1));
        }
    }

    #[test]
    fn identity_kernel_gives_distance_to_ball() {
        let x = ZVector::delta(0);
        let y = ZVector::new(vec![(0, rat_int(2)), (3, rat(1, 2))]).unwrap();
        let report = convolution_phi(&x, &y, 4, &ConvOptions::default()).unwrap();
        // ||y||_1 = 5/2, so phi = 3/2 exactly
        assert!(report.optimal);
        assert!(report.value.is_exact());
        assert_eq!(*report.value.lo(), rat(3, 2));
    }

    #[test]
    fn zero_target_is_free() {
        let x = binomial_kernel(2);
        let report = convolution_phi(&x, &ZVector::zero(), 4, &ConvOptions::default()).unwrap();
        assert!(report.value.is_exact());
        assert_eq!(*report.value.lo(), rat_int(0));
    }

    #[test]
    fn value_within_analytic_bracket() {
        let x = binomial_kernel(1);
        let y = ZVector::new(vec![(0, rat(3, 4)), (1, rat(-1, 2))]).unwrap();
        let report = convolution_phi(&x, &y, 4, &ConvOptions::default()).unwrap();
        let y_norm = y.l1_norm();
        assert!(*report.value.hi() <= y_norm);
        let floor = &y_norm - &x.l1_norm();
        assert!(*report.value.lo() >= floor.max(Rat::zero()));
        // dual witness stays in the sup ball
        for (_, u) in report.dual_u.entries() {
            assert!(u.abs() <= rat_int(1));
        }
    }

    #[test]
    fn support_check() {
        let x = ZVector::delta(9);
        match convolution_phi(&x, &ZVector::zero(), 4, &ConvOptions::default()) {
            Err(ConvError::SupportOutOfRange { index: 9, .. }) => {}
            other => panic!("expected support error, got {other:?}"),
        }
    }
}
