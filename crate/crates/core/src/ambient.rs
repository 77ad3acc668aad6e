//! Unified norm evaluation across the ambient spaces.
//!
//! Sup, `l1` and Tsirelson norms are exact rationals; general `lp` norms come
//! back as certified enclosures (exact whenever the value is a detectable
//! perfect power). For the exact ambients a norming functional — an element
//! of the dual unit ball attaining the norm — is available as a rigorous
//! certificate for lower bounds elsewhere.

use crate::enclosure::Enclosure;
use crate::roots::RootError;
use crate::tsirelson::{self, TsBudget, TsirelsonError};
use crate::vector::{FiniteVector, NormSpace, Rat};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum NormError {
    #[error(transparent)]
    Tsirelson(#[from] TsirelsonError),
    #[error(transparent)]
    Root(#[from] RootError),
}

/// An exact rational norm value, or a certified real enclosure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormValue {
    Exact(Rat),
    Enclosure(Enclosure),
}

impl NormValue {
    pub fn enclosure(&self) -> Enclosure {
        match self {
            NormValue::Exact(r) => Enclosure::exact(r.clone()),
            NormValue::Enclosure(e) => e.clone(),
        }
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            NormValue::Exact(r) => Some(r),
            NormValue::Enclosure(_) => None,
        }
    }
}

/// Norm of `x` in the given space; for `lp` spaces the enclosure width is at
/// most `tol`.
pub fn ambient_norm_value(
    x: &FiniteVector,
    space: &NormSpace,
    tol: &Rat,
    budget: &TsBudget,
) -> Result<NormValue, NormError> {
    match space {
        NormSpace::Sup => Ok(NormValue::Exact(x.sup_norm())),
        NormSpace::Tsirelson => Ok(NormValue::Exact(
            tsirelson::tsirelson_norm_with(x, budget)?.value,
        )),
        NormSpace::Lp(p) => {
            if p.is_one() {
                return Ok(NormValue::Exact(x.l1_norm()));
            }
            let e = x.lp_norm_enclosure(p, tol)?;
            if e.is_exact() {
                Ok(NormValue::Exact(e.lo().clone()))
            } else {
                Ok(NormValue::Enclosure(e))
            }
        }
    }
}

/// Norm as an enclosure (degenerate for exact ambients).
pub fn ambient_norm(
    x: &FiniteVector,
    space: &NormSpace,
    tol: &Rat,
    budget: &TsBudget,
) -> Result<Enclosure, NormError> {
    Ok(ambient_norm_value(x, space, tol, budget)?.enclosure())
}

/// For exact ambients, return `(||x||, f)` where `f` lies in the dual unit
/// ball and `f . x = ||x||`; `None` for general `lp` spaces.
pub fn norming_functional(
    x: &FiniteVector,
    space: &NormSpace,
    budget: &TsBudget,
) -> Result<Option<(Rat, Vec<(u32, Rat)>)>, NormError> {
    match space {
        NormSpace::Sup => {
            if x.is_zero() {
                return Ok(Some((Rat::zero(), Vec::new())));
            }
            let (idx, val) = x
                .entries()
                .iter()
                .max_by_key(|(_, v)| v.abs())
                .expect("nonempty")
                .clone();
            let sign = if val.is_negative() {
                -Rat::one()
            } else {
                Rat::one()
            };
            Ok(Some((val.abs(), vec![(idx, sign)])))
        }
        NormSpace::Lp(p) if p.is_one() => {
            // sign vector on the support
            let f: Vec<(u32, Rat)> = x
                .entries()
                .iter()
                .map(|(i, v)| {
                    (
                        *i,
                        if v.is_negative() {
                            -Rat::one()
                        } else {
                            Rat::one()
                        },
                    )
                })
                .collect();
            Ok(Some((x.l1_norm(), f)))
        }
        NormSpace::Tsirelson => {
            let comp = tsirelson::tsirelson_norm_with(x, budget)?;
            let f = tsirelson::dual_functional(&comp.tree, x);
            debug_assert_eq!(tsirelson::functional_value(&f, x), comp.value);
            Ok(Some((comp.value, f)))
        }
        NormSpace::Lp(_) => Ok(None),
    }
}
