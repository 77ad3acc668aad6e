//! Rational interval arithmetic for certified real enclosures.
//!
//! Rationals are closed under `+`, `-`, `*`, `/`, so the only operations that
//! force a genuine interval are roots (see [`crate::roots`]). Exact values are
//! represented as degenerate intervals with `lo == hi`.

use crate::vector::Rat;
use num_traits::{Signed, Zero};

/// A closed interval `[lo, hi]` with exact rational endpoints, guaranteed to
/// contain the real value it stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    lo: Rat,
    hi: Rat,
}

impl Enclosure {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order");
        Enclosure { lo, hi }
    }

    pub fn exact(value: Rat) -> Self {
        Enclosure {
            lo: value.clone(),
            hi: value,
        }
    }

    pub fn zero() -> Self {
        Enclosure::exact(Rat::zero())
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Midpoint; for reporting only, carries no certification.
    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / crate::rat_int(2)
    }

    pub fn contains(&self, value: &Rat) -> bool {
        &self.lo <= value && value <= &self.hi
    }

    /// Certified strict comparison: every point of `self` is below every point
    /// of `other`.
    pub fn strictly_below(&self, other: &Enclosure) -> bool {
        self.hi < other.lo
    }

    /// Certified non-strict comparison on the whole enclosures.
    pub fn entirely_le(&self, other: &Enclosure) -> bool {
        self.hi <= other.lo
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure::new(-self.hi.clone(), -self.lo.clone())
    }

    pub fn abs(&self) -> Enclosure {
        if self.lo.is_negative() && self.hi.is_positive() {
            Enclosure::new(Rat::zero(), self.hi.clone().max(-self.lo.clone()))
        } else if self.hi.is_negative() || (self.hi.is_zero() && self.lo.is_negative()) {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        let corners = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = corners.iter().min().unwrap().clone();
        let hi = corners.iter().max().unwrap().clone();
        Enclosure::new(lo, hi)
    }

    /// Division; `other` must be entirely positive or entirely negative.
    pub fn div(&self, other: &Enclosure) -> Enclosure {
        assert!(
            other.lo.is_positive() || other.hi.is_negative(),
            "division by an enclosure containing zero"
        );
        let corners = [
            &self.lo / &other.lo,
            &self.lo / &other.hi,
            &self.hi / &other.lo,
            &self.hi / &other.hi,
        ];
        let lo = corners.iter().min().unwrap().clone();
        let hi = corners.iter().max().unwrap().clone();
        Enclosure::new(lo, hi)
    }

    pub fn scale(&self, c: &Rat) -> Enclosure {
        if c.is_negative() {
            Enclosure::new(c * &self.hi, c * &self.lo)
        } else {
            Enclosure::new(c * &self.lo, c * &self.hi)
        }
    }

    pub fn shift(&self, c: &Rat) -> Enclosure {
        Enclosure::new(&self.lo + c, &self.hi + c)
    }

    /// Pointwise max of two enclosures (encloses `max(a, b)`).
    pub fn max(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(
            self.lo.clone().max(other.lo.clone()),
            self.hi.clone().max(other.hi.clone()),
        )
    }

    /// Pointwise min of two enclosures (encloses `min(a, b)`).
    pub fn min(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(
            self.lo.clone().min(other.lo.clone()),
            self.hi.clone().min(other.hi.clone()),
        )
    }

    /// Smallest interval containing both (interval-hull, not set union).
    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(
            self.lo.clone().min(other.lo.clone()),
            self.hi.clone().max(other.hi.clone()),
        )
    }
}

impl std::fmt::Display for Enclosure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}
