//! Directed-rounding roots and rational powers.
//!
//! `q^(a/b)` for nonnegative rational `q` is computed as the exact rational
//! `q^a` followed by an integer-arithmetic `b`-th root at a chosen dyadic
//! scale, so both endpoints of the result are honest bounds. Perfect powers
//! are detected and returned exactly.

use crate::enclosure::Enclosure;
use crate::vector::Rat;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exponents are plain machine-sized fractions in practice; reject pathological
/// ones instead of attempting gigantic integer powers.
pub const MAX_EXPONENT_PART: u64 = 64;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum RootError {
    #[error("negative radicand")]
    NegativeRadicand,
    #[error("exponent {0} outside the supported range (numerator and denominator must be <= {MAX_EXPONENT_PART})")]
    ExponentTooLarge(Rat),
}

fn pow_biguint(base: &BigUint, exp: u32) -> BigUint {
    base.pow(exp)
}

/// Floor of the `n`-th root of `q * 4^scale_bits`-style scaled value; returns
/// an enclosure of `q^(1/n)` of width `1 / (denom * 2^scale_bits)`.
pub fn nth_root_enclosure(q: &Rat, n: u32, scale_bits: u32) -> Result<Enclosure, RootError> {
    if q.is_negative() {
        return Err(RootError::NegativeRadicand);
    }
    if q.is_zero() {
        return Ok(Enclosure::zero());
    }
    if n == 1 {
        return Ok(Enclosure::exact(q.clone()));
    }
    let numer = q.numer().to_biguint().expect("nonnegative numerator");
    let denom = q.denom().to_biguint().expect("positive denominator");
    // (numer/denom)^(1/n) = (numer * denom^(n-1))^(1/n) / denom
    let m = &numer * pow_biguint(&denom, n - 1);
    let scaled = &m << (n as u64 * scale_bits as u64);
    let root = scaled.nth_root(n);
    let unit = BigInt::from(&denom << scale_bits);
    let lo = Rat::new(BigInt::from(root.clone()), unit.clone());
    // Detect exact roots so perfect powers come back with zero width.
    if pow_biguint(&root, n) == scaled {
        return Ok(Enclosure::exact(lo));
    }
    let hi = Rat::new(BigInt::from(root + BigUint::one()), unit);
    Ok(Enclosure::new(lo, hi))
}

/// Exact `n`-th root when `q` is a perfect `n`-th power of a rational.
pub fn nth_root_exact(q: &Rat, n: u32) -> Option<Rat> {
    if q.is_negative() {
        return None;
    }
    if q.is_zero() {
        return Some(Rat::zero());
    }
    let numer = q.numer().to_biguint().expect("nonnegative numerator");
    let denom = q.denom().to_biguint().expect("positive denominator");
    let rn = numer.nth_root(n);
    let rd = denom.nth_root(n);
    if pow_biguint(&rn, n) == numer && pow_biguint(&rd, n) == denom {
        Some(Rat::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}

fn exponent_parts(p: &Rat) -> Result<(u64, u32), RootError> {
    let a = p.numer().to_u64();
    let b = p.denom().to_u64();
    match (a, b) {
        (Some(a), Some(b)) if a <= MAX_EXPONENT_PART && b <= MAX_EXPONENT_PART && b > 0 => {
            Ok((a, b as u32))
        }
        _ => Err(RootError::ExponentTooLarge(p.clone())),
    }
}

fn rat_pow_int(q: &Rat, a: u64) -> Rat {
    let mut acc = Rat::one();
    let mut base = q.clone();
    let mut e = a;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Enclosure of `q^p` for `q >= 0` and rational `p >= 0`.
pub fn rat_pow_enclosure(q: &Rat, p: &Rat, scale_bits: u32) -> Result<Enclosure, RootError> {
    if q.is_negative() {
        return Err(RootError::NegativeRadicand);
    }
    if p.is_negative() {
        // q^(-p) = 1 / q^p; not neededby the norms, keep the contract narrow.
        return Err(RootError::ExponentTooLarge(p.clone()));
    }
    let (a, b) = exponent_parts(p)?;
    if a == 0 {
        return Ok(Enclosure::exact(Rat::one()));
    }
    if q.is_zero() {
        return Ok(Enclosure::zero());
    }
    let powered = rat_pow_int(q, a);
    if b == 1 {
        return Ok(Enclosure::exact(powered));
    }
    nth_root_enclosure(&powered, b, scale_bits)
}

/// Enclosure of `(sum)^(1/p)` given an enclosure of the nonnegative `sum`.
fn inverse_power(sum: &Enclosure, p: &Rat, scale_bits: u32) -> Result<Enclosure, RootError> {
    let (a, b) = exponent_parts(p)?;
    // sum^(1/p) = sum^(b/a) = (sum^b)^(1/a); monotone for nonnegative sums.
    let lo_pow = rat_pow_int(sum.lo(), b as u64);
    let hi_pow = rat_pow_int(sum.hi(), b as u64);
    let lo = nth_root_enclosure(&lo_pow, a as u32, scale_bits)?;
    let hi = nth_root_enclosure(&hi_pow, a as u32, scale_bits)?;
    Ok(Enclosure::new(lo.lo().clone(), hi.hi().clone()))
}

/// Certified enclosure of the `lp` norm `(sum |v_i|^p)^(1/p)` of the given
/// values, with final width at most `tol` (exact when the value is detectably
/// rational, e.g. integer `p` with a perfect-power sum).
pub fn lp_norm_enclosure(values: &[Rat], p: &Rat, tol: &Rat) -> Result<Enclosure, RootError> {
    assert!(tol.is_positive(), "tolerance must be positive");
    if values.iter().all(|v| v.is_zero()) {
        return Ok(Enclosure::zero());
    }
    let mut scale_bits: u32 = 16;
    loop {
        let mut sum = Enclosure::zero();
        for v in values {
            let term = rat_pow_enclosure(&v.abs(), p, scale_bits)?;
            sum = sum.add(&term);
        }
        let result = inverse_power(&sum, p, scale_bits)?;
        if result.width() <= *tol || scale_bits >= 1 << 14 {
            return Ok(result);
        }
        scale_bits *= 2;
    }
}

/// Enclosure of `sqrt(q)` for `q >= 0`, width at most `tol`; exact for
/// perfect squares.
pub fn sqrt_enclosure(q: &Rat, tol: &Rat) -> Result<Enclosure, RootError> {
    assert!(tol.is_positive(), "tolerance must be positive");
    let mut scale_bits: u32 = 16;
    loop {
        let e = nth_root_enclosure(q, 2, scale_bits)?;
        if e.width() <= *tol || scale_bits >= 1 << 14 {
            return Ok(e);
        }
        scale_bits *= 2;
    }
}
