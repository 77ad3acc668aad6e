//! Certified two-sided equivalence constants between finite vector systems
//! and the `lp` / `c0` unit bases.
//!
//! The map `r -> ||sum r_i x_i||` is Lipschitz with constant `max_i ||x_i||`
//! in the `l1` distance on coefficients, so sampling the unit `p`-sphere on a
//! sign-pattern-by-simplex grid and widening by (covering radius) * (Lipschitz
//! constant) yields rigorous enclosures of the extremal ratios with no
//! convexity assumption on the ambient norm.
//!
//! For the exact ambients (sup, `l1`, Tsirelson) the evaluator also returns a
//! norming functional at every sample. Each functional is a globally valid
//! affine minorant of the coefficient norm, and convex combinations of
//! minorants remain minorants, so a small exact LP over the collected
//! functionals often certifies the lower constant with zero slack — in
//! particular at tight thresholds the grid alone could only approach.

use crate::ambient::{ambient_norm, norming_functional, NormError};
use crate::enclosure::Enclosure;
use crate::roots::{self, RootError};
use crate::simplex::{self, LpError, LpProblem};
use crate::tsirelson::TsBudget;
use crate::vector::{FiniteVector, NormSpace, Rat};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use std::collections::BTreeSet;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum CertifyError {
    #[error("the vector system is empty")]
    EmptySystem,
    #[error("exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(Rat),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

impl From<RootError> for CertifyError {
    fn from(e: RootError) -> Self {
        CertifyError::Norm(NormError::Root(e))
    }
}

/// Exponent of the reference basis: finite `p >= 1` or `infinity` (the
/// `c0` case, handled by the max-of-coefficients formula).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PExponent {
    Finite(Rat),
    Infinity,
}

impl PExponent {
    pub fn finite(p: Rat) -> Result<Self, CertifyError> {
        if p < Rat::one() {
            return Err(CertifyError::InvalidExponent(p));
        }
        Ok(PExponent::Finite(p))
    }

    pub fn parse(tag: &str) -> Result<Self, CertifyError> {
        match tag {
            "inf" | "infinity" | "oo" => Ok(PExponent::Infinity),
            _ => {
                let p: Rat = tag
                    .parse()
                    .map_err(|_| CertifyError::InvalidExponent(Rat::zero()))?;
                PExponent::finite(p)
            }
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, PExponent::Finite(p) if p.is_one())
    }

    /// `||r||_p` of a coefficient vector, as an enclosure.
    pub fn coefficient_norm(&self, r: &[Rat], tol: &Rat) -> Result<Enclosure, RootError> {
        match self {
            PExponent::Infinity => Ok(Enclosure::exact(
                r.iter().map(|v| v.abs()).max().unwrap_or_else(Rat::zero),
            )),
            PExponent::Finite(p) if p.is_one() => Ok(Enclosure::exact(
                r.iter().fold(Rat::zero(), |acc, v| acc + v.abs()),
            )),
            PExponent::Finite(p) => roots::lp_norm_enclosure(r, p, tol),
        }
    }
}

impl std::fmt::Display for PExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => write!(f, "inf"),
        }
    }
}

/// Search budget for the sphere grid.
#[derive(Debug, Clone)]
pub struct CertifyBudget {
    /// Refine until the Lipschitz widening drops below this fraction of the
    /// current best lower bound.
    pub target_slack_fraction: Rat,
    /// Total ratio evaluations allowed.
    pub max_evals: usize,
    /// Initial grid resolution (subdivisions per simplex edge).
    pub initial_resolution: u32,
    /// Enclosure tolerance for inexact ambient evaluations.
    pub eval_tol: Rat,
    pub ts_budget: TsBudget,
}

impl Default for CertifyBudget {
    fn default() -> Self {
        CertifyBudget {
            target_slack_fraction: crate::rat(1, 100),
            max_evals: 200_000,
            initial_resolution: 8,
            eval_tol: crate::rat(1, 1 << 30),
            ts_budget: TsBudget::default(),
        }
    }
}

/// Certified two-sided constants for a vector system against the `lp`/`c0`
/// unit basis: `c_lower` encloses `inf ||sum r_i x_i||` and `c_upper`
/// encloses `sup ||sum r_i x_i||` over the unit `p`-sphere of coefficients.
#[derive(Debug, Clone)]
pub struct EquivalenceCertificate {
    pub p: PExponent,
    pub ambient: NormSpace,
    pub c_lower: Enclosure,
    pub c_upper: Enclosure,
    pub witness_lower: Vec<Rat>,
    pub witness_upper: Vec<Rat>,
    /// Final covering radius of the sphere grid (0 when an exact route
    /// settled both constants).
    pub resolution: Rat,
    pub lipschitz_bound: Rat,
    /// False when the evaluation budget ran out before the slack target.
    pub conclusive: bool,
    pub evals: usize,
}

fn combination(xs: &[FiniteVector], r: &[Rat]) -> FiniteVector {
    let mut acc = FiniteVector::zero();
    for (x, c) in xs.iter().zip(r) {
        if !c.is_zero() {
            acc = acc.add(&x.scale(c));
        }
    }
    acc
}

/// Ratio `||sum r_i x_i|| / ||r||_p` with an optional norming functional of
/// the combination (exact ambients only).
fn ratio_at(
    xs: &[FiniteVector],
    r: &[Rat],
    p: &PExponent,
    ambient: &NormSpace,
    budget: &CertifyBudget,
) -> Result<(Enclosure, Option<Vec<(u32, Rat)>>), CertifyError> {
    // exact squared arithmetic for the (l2 ambient, p = 2) pairing
    if let (NormSpace::Lp(ap), PExponent::Finite(fp)) = (ambient, p) {
        if *ap == crate::rat_int(2) && *fp == crate::rat_int(2) {
            let v = combination(xs, r);
            let num_sq = v.l2_norm_sq();
            let den_sq = r.iter().fold(Rat::zero(), |acc, c| acc + c * c);
            let ratio_sq = num_sq / den_sq;
            let e = roots::sqrt_enclosure(&ratio_sq, &budget.eval_tol)?;
            return Ok((e, None));
        }
    }
    let v = combination(xs, r);
    if ambient.is_exact() {
        if let Some((value, f)) = norming_functional(&v, ambient, &budget.ts_budget)? {
            let pnorm = p.coefficient_norm(r, &budget.eval_tol)?;
            let e = Enclosure::exact(value).div(&pnorm);
            return Ok((e, Some(f)));
        }
    }
    let n = ambient_norm(&v, ambient, &budget.eval_tol, &budget.ts_budget)?;
    let pnorm = p.coefficient_norm(r, &budget.eval_tol)?;
    Ok((n.div(&pnorm), None))
}

fn for_each_composition(total: u32, parts: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(buf: &mut Vec<u32>, remaining: u32, parts_left: usize, f: &mut impl FnMut(&[u32])) {
        if parts_left == 1 {
            buf.push(remaining);
            f(buf);
            buf.pop();
            return;
        }
        for v in 0..=remaining {
            buf.push(v);
            rec(buf, remaining - v, parts_left - 1, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(parts);
    rec(&mut buf, total, parts, f);
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn grid_size(k: u32, m: usize, p: &PExponent) -> u64 {
    match p {
        PExponent::Infinity => {
            let per_face = ((2 * k + 1) as u64).saturating_pow((m - 1) as u32);
            (2 * m as u64).saturating_mul(per_face)
        }
        PExponent::Finite(_) => {
            let orthants = 1u64 << (m - 1).min(62);
            orthants.saturating_mul(binom((k as u64) + (m as u64) - 1, (m as u64) - 1))
        }
    }
}

/// Covering radius in the coefficient `l1` distance for the grid at
/// resolution `k`, including the radial-projection distortion for finite
/// `p > 1` (bounded by `m^(1-1/p) + m^(2-2/p) <= m + m^2`).
fn cover_radius(k: u32, m: usize, p: &PExponent) -> Rat {
    let base = crate::rat(m as i64, k as i64);
    match p {
        PExponent::Infinity => crate::rat((m as i64 - 1).max(1), k as i64),
        PExponent::Finite(p) if p.is_one() => base,
        PExponent::Finite(_) => {
            let m_rat = crate::rat_int(m as i64);
            base * (&m_rat + &m_rat * &m_rat)
        }
    }
}

#[derive(Clone)]
struct Extremum {
    value: Enclosure,
    witness: Vec<Rat>,
}

/// A convex (or near-convex) patch of the unit `p`-sphere to sample:
/// a signed simplex face for finite `p`, a cube face for `p = inf`.
#[derive(Clone)]
enum Region {
    /// `{ sigma_t u_t : u >= 0, ||u||_p = 1 }`.
    Orthant { sigma: Vec<i8> },
    /// `{ r : r_pivot = sign, |r_i| <= 1 }`.
    Face { pivot: usize, sign: i8 },
}

#[derive(Clone)]
struct RegionScan {
    min: Option<Extremum>,
    max: Option<Extremum>,
    /// Raw functional pullbacks `g_t = f . x_t` collected on this region.
    functionals: BTreeSet<Vec<Rat>>,
    evals: usize,
}

const MAX_FUNCTIONALS_PER_REGION: usize = 64;

fn scan_region(
    xs: &[FiniteVector],
    region: &Region,
    resolution: u32,
    p: &PExponent,
    ambient: &NormSpace,
    budget: &CertifyBudget,
) -> Result<RegionScan, CertifyError> {
    let m = xs.len();
    let mut scan = RegionScan {
        min: None,
        max: None,
        functionals: BTreeSet::new(),
        evals: 0,
    };
    let k_rat = crate::rat_int(resolution as i64);
    let mut err: Option<CertifyError> = None;
    let mut visit = |r: &[Rat]| {
        if err.is_some() || r.iter().all(|v| v.is_zero()) {
            return;
        }
        match ratio_at(xs, r, p, ambient, budget) {
            Ok((ratio, functional)) => {
                scan.evals += 1;
                if let Some(f) = functional {
                    if scan.functionals.len() < MAX_FUNCTIONALS_PER_REGION {
                        let g: Vec<Rat> = xs
                            .iter()
                            .map(|x| crate::tsirelson::functional_value(&f, x))
                            .collect();
                        scan.functionals.insert(g);
                    }
                }
                let better_min = scan
                    .min
                    .as_ref()
                    .is_none_or(|cur| ratio.lo() < cur.value.lo());
                if better_min {
                    scan.min = Some(Extremum {
                        value: ratio.clone(),
                        witness: r.to_vec(),
                    });
                }
                let better_max = scan
                    .max
                    .as_ref()
                    .is_none_or(|cur| ratio.hi() > cur.value.hi());
                if better_max {
                    scan.max = Some(Extremum {
                        value: ratio,
                        witness: r.to_vec(),
                    });
                }
            }
            Err(e) => err = Some(e),
        }
    };
    match region {
        Region::Orthant { sigma } => {
            for_each_composition(resolution, m, &mut |parts| {
                let r: Vec<Rat> = parts
                    .iter()
                    .zip(sigma)
                    .map(|(&v, &s)| {
                        let val = crate::rat_int(v as i64) / &k_rat;
                        if s < 0 {
                            -val
                        } else {
                            val
                        }
                    })
                    .collect();
                visit(&r);
            });
        }
        Region::Face { pivot, sign } => {
            // signed grid over the non-pivot coordinates
            let others = m - 1;
            let pivot_val = if *sign < 0 { -Rat::one() } else { Rat::one() };
            if others == 0 {
                visit(&[pivot_val]);
            } else {
                let span = 2 * resolution; // grid index 0..=2K maps to [-1, 1]
                let mut idxbuf = vec![0u32; others];
                loop {
                    let mut r = Vec::with_capacity(m);
                    let mut oi = 0;
                    for t in 0..m {
                        if t == *pivot {
                            r.push(pivot_val.clone());
                        } else {
                            let v =
                                crate::rat_int(idxbuf[oi] as i64 - resolution as i64) / &k_rat;
                            r.push(v);
                            oi += 1;
                        }
                    }
                    visit(&r);
                    let mut carry = true;
                    for slot in idxbuf.iter_mut() {
                        if *slot < span {
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
            }
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(scan)
}

/// Exact lower bound for the region from collected affine minorants:
/// the best single functional, plus a small LP over convex combinations
/// whenever the region's convex hull has a usable finite vertex set.
fn region_functional_bound(
    functionals: &BTreeSet<Vec<Rat>>,
    region: &Region,
    m: usize,
    p: &PExponent,
    budget: &CertifyBudget,
) -> Result<Option<Rat>, CertifyError> {
    if functionals.is_empty() {
        return Ok(None);
    }
    let gs: Vec<&Vec<Rat>> = functionals.iter().collect();
    // minimum of an affine minorant g over the region
    let single_bound = |g: &Vec<Rat>| -> Result<Rat, CertifyError> {
        match region {
            Region::Face { pivot, sign } => {
                // cube face: min at corners, each free coordinate worth -|g_i|
                let mut b = if *sign < 0 {
                    -g[*pivot].clone()
                } else {
                    g[*pivot].clone()
                };
                for (t, gt) in g.iter().enumerate() {
                    if t != *pivot {
                        b -= gt.abs();
                    }
                }
                Ok(b)
            }
            Region::Orthant { sigma } => {
                let w: Vec<Rat> = g
                    .iter()
                    .zip(sigma)
                    .map(|(v, &s)| if s < 0 { -v.clone() } else { v.clone() })
                    .collect();
                match p {
                    PExponent::Finite(q) if q.is_one() => {
                        Ok(w.iter().min().cloned().expect("nonempty"))
                    }
                    PExponent::Finite(q) => {
                        // curved piece: min_t w_t when all nonnegative (the
                        // coefficients satisfy sum u >= ||u||_p = 1), else
                        // -||negative part||_q'
                        if w.iter().all(|v| !v.is_negative()) {
                            Ok(w.iter().min().cloned().expect("nonempty"))
                        } else {
                            let qc = q / &(q - Rat::one());
                            let negs: Vec<Rat> = w
                                .iter()
                                .filter(|v| v.is_negative())
                                .map(|v| v.abs())
                                .collect();
                            let norm = roots::lp_norm_enclosure(&negs, &qc, &budget.eval_tol)?;
                            Ok(-norm.hi().clone())
                        }
                    }
                    PExponent::Infinity => unreachable!("faces handle p = inf"),
                }
            }
        }
    };
    let mut best: Option<Rat> = None;
    for g in &gs {
        let b = single_bound(g)?;
        if best.as_ref().is_none_or(|cur| b > *cur) {
            best = Some(b);
        }
    }
    // convex-combination LP over the hull vertices
    let vertex_values: Option<Vec<Vec<Rat>>> = match region {
        Region::Orthant { sigma } => match p {
            PExponent::Finite(q) if q.is_one() => Some(
                (0..m)
                    .map(|t| {
                        gs.iter()
                            .map(|g| {
                                if sigma[t] < 0 {
                                    -g[t].clone()
                                } else {
                                    g[t].clone()
                                }
                            })
                            .collect()
                    })
                    .collect(),
            ),
            _ => None,
        },
        Region::Face { pivot, sign } if m <= 7 => {
            // corners: pivot fixed, every sign choice on the rest
            let free: Vec<usize> = (0..m).filter(|t| t != pivot).collect();
            let mut rows = Vec::with_capacity(1 << free.len());
            for mask in 0u32..(1 << free.len()) {
                let row: Vec<Rat> = gs
                    .iter()
                    .map(|g| {
                        let mut v = if *sign < 0 {
                            -g[*pivot].clone()
                        } else {
                            g[*pivot].clone()
                        };
                        for (bit, &t) in free.iter().enumerate() {
                            if mask & (1 << bit) != 0 {
                                v -= &g[t];
                            } else {
                                v += &g[t];
                            }
                        }
                        v
                    })
                    .collect();
                rows.push(row);
            }
            Some(rows)
        }
        _ => None,
    };
    if let (Some(vertex_values), true) = (vertex_values, gs.len() > 1) {
        // max t  s.t.  sum_k lambda_k G_jk >= t for every vertex j,
        //              sum lambda = 1, lambda >= 0
        let nf = gs.len();
        let nv = vertex_values.len();
        let num_vars = nf + 2 + nv; // lambdas, t+, t-, slacks
        let mut objective = vec![Rat::zero(); num_vars];
        objective[nf] = -Rat::one();
        objective[nf + 1] = Rat::one();
        let mut rows = Vec::with_capacity(nv + 1);
        let mut rhs = Vec::with_capacity(nv + 1);
        for (j, vrow) in vertex_values.iter().enumerate() {
            let mut row = vec![Rat::zero(); num_vars];
            row[..nf].clone_from_slice(vrow);
            row[nf] = -Rat::one();
            row[nf + 1] = Rat::one();
            row[nf + 2 + j] = -Rat::one();
            rows.push(row);
            rhs.push(Rat::zero());
        }
        let mut sum_row = vec![Rat::zero(); num_vars];
        for c in sum_row.iter_mut().take(nf) {
            *c = Rat::one();
        }
        rows.push(sum_row);
        rhs.push(Rat::one());
        let lp = LpProblem {
            num_vars,
            objective,
            rows,
            rhs,
        };
        if let Ok(sol) = simplex::solve(&lp, 20_000) {
            let t = -sol.value;
            if best.as_ref().is_none_or(|cur| t > *cur) {
                best = Some(t);
            }
        }
    }
    // ratios are nonnegative, so the bound can be clamped at zero
    Ok(best.map(|b| if b.is_negative() { Rat::zero() } else { b }))
}

fn sign_patterns(m: usize) -> Vec<Vec<i8>> {
    // global sign flips leave the ratio invariant, so pin the first sign
    let free = m - 1;
    (0..(1u64 << free))
        .map(|mask| {
            let mut sigma = vec![1i8; m];
            for t in 0..free {
                if mask & (1 << t) != 0 {
                    sigma[t + 1] = -1;
                }
            }
            sigma
        })
        .collect()
}

/// Exact route for the upper constant when the `p`-ball has finitely many
/// extreme points: `p = 1` (coordinate vectors) and `p = inf` (sign vectors).
fn exact_upper(
    xs: &[FiniteVector],
    p: &PExponent,
    ambient: &NormSpace,
    budget: &CertifyBudget,
) -> Result<Option<Extremum>, CertifyError> {
    let m = xs.len();
    match p {
        PExponent::Finite(q) if q.is_one() => {
            let mut best: Option<Extremum> = None;
            for (t, x) in xs.iter().enumerate() {
                let n = ambient_norm(x, ambient, &budget.eval_tol, &budget.ts_budget)?;
                if best.as_ref().is_none_or(|b| n.hi() > b.value.hi()) {
                    let mut witness = vec![Rat::zero(); m];
                    witness[t] = Rat::one();
                    best = Some(Extremum { value: n, witness });
                }
            }
            Ok(best)
        }
        PExponent::Infinity => {
            // 2^(m-1) vertices; beyond this the grid route takes over
            if (1u64 << (m - 1).min(62)) > budget.max_evals as u64 {
                return Ok(None);
            }
            let mut best: Option<Extremum> = None;
            for sigma in sign_patterns(m) {
                let r: Vec<Rat> = sigma
                    .iter()
                    .map(|&s| if s < 0 { -Rat::one() } else { Rat::one() })
                    .collect();
                let v = combination(xs, &r);
                let n = ambient_norm(&v, ambient, &budget.eval_tol, &budget.ts_budget)?;
                if best.as_ref().is_none_or(|b| n.hi() > b.value.hi()) {
                    best = Some(Extremum { value: n, witness: r });
                }
            }
            Ok(best)
        }
        PExponent::Finite(_) => Ok(None),
    }
}

fn supports_pairwise_disjoint(xs: &[FiniteVector]) -> bool {
    let mut seen = BTreeSet::new();
    for x in xs {
        for (i, _) in x.entries() {
            if !seen.insert(*i) {
                return false;
            }
        }
    }
    true
}

/// Two-sided equivalence constants for the system against the `lp`/`c0`
/// basis, certified over the whole coefficient sphere.
pub fn equivalence_constants(
    xs: &[FiniteVector],
    p: &PExponent,
    ambient: &NormSpace,
    budget: &CertifyBudget,
) -> Result<EquivalenceCertificate, CertifyError> {
    if xs.is_empty() {
        return Err(CertifyError::EmptySystem);
    }
    let m = xs.len();
    // Lipschitz constant of r -> ||sum r_i x_i|| in the l1 coefficient metric
    let mut lipschitz = Rat::zero();
    for x in xs {
        let n = ambient_norm(x, ambient, &budget.eval_tol, &budget.ts_budget)?;
        if *n.hi() > lipschitz {
            lipschitz = n.hi().clone();
        }
    }

    // Diagonal Rayleigh shortcut: in the (l2, p = 2) pairing with pairwise
    // disjoint supports the squared ratio is a weighted average of the
    // squared norms, so both extrema are attained at coordinate vectors.
    if let (NormSpace::Lp(ap), PExponent::Finite(fp)) = (ambient, p) {
        if *ap == crate::rat_int(2) && *fp == crate::rat_int(2) && supports_pairwise_disjoint(xs)
        {
            let squares: Vec<Rat> = xs.iter().map(|x| x.l2_norm_sq()).collect();
            let (tmin, _) = squares
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.cmp(b.1))
                .expect("nonempty");
            let (tmax, _) = squares
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1))
                .expect("nonempty");
            let lo = roots::sqrt_enclosure(&squares[tmin], &budget.eval_tol)?;
            let hi = roots::sqrt_enclosure(&squares[tmax], &budget.eval_tol)?;
            let mut witness_lower = vec![Rat::zero(); m];
            witness_lower[tmin] = Rat::one();
            let mut witness_upper = vec![Rat::zero(); m];
            witness_upper[tmax] = Rat::one();
            return Ok(EquivalenceCertificate {
                p: p.clone(),
                ambient: ambient.clone(),
                c_lower: lo,
                c_upper: hi,
                witness_lower,
                witness_upper,
                resolution: Rat::zero(),
                lipschitz_bound: lipschitz,
                conclusive: true,
                evals: m,
            });
        }
    }

    let exact_up = exact_upper(xs, p, ambient, budget)?;

    // m = 1: the sphere is {±1}; one ratio is the whole story.
    if m == 1 {
        let (ratio, _) = ratio_at(xs, &[Rat::one()], p, ambient, budget)?;
        return Ok(EquivalenceCertificate {
            p: p.clone(),
            ambient: ambient.clone(),
            c_lower: ratio.clone(),
            c_upper: ratio,
            witness_lower: vec![Rat::one()],
            witness_upper: vec![Rat::one()],
            resolution: Rat::zero(),
            lipschitz_bound: lipschitz,
            conclusive: true,
            evals: 1,
        });
    }

    // Too many regions to cover the sphere at all: fall back to coordinate
    // directions plus the always-valid outer bounds (0 below, the triangle
    // inequality above), flagged inconclusive.
    if grid_size(1, m, p) > budget.max_evals as u64 {
        let mut min_e: Option<Extremum> = None;
        let mut max_e: Option<Extremum> = None;
        for t in 0..m {
            let mut r = vec![Rat::zero(); m];
            r[t] = Rat::one();
            let (ratio, _) = ratio_at(xs, &r, p, ambient, budget)?;
            if min_e.as_ref().is_none_or(|e| ratio.lo() < e.value.lo()) {
                min_e = Some(Extremum {
                    value: ratio.clone(),
                    witness: r.clone(),
                });
            }
            if max_e.as_ref().is_none_or(|e| ratio.hi() > e.value.hi()) {
                max_e = Some(Extremum { value: ratio, witness: r });
            }
        }
        let min_e = min_e.expect("nonempty system");
        let max_e = max_e.expect("nonempty system");
        let coarse_upper = &lipschitz * &crate::rat_int(m as i64);
        return Ok(EquivalenceCertificate {
            p: p.clone(),
            ambient: ambient.clone(),
            c_lower: Enclosure::new(Rat::zero(), min_e.value.hi().clone()),
            c_upper: Enclosure::new(
                max_e.value.lo().clone().min(coarse_upper.clone()),
                coarse_upper,
            ),
            witness_lower: min_e.witness,
            witness_upper: max_e.witness,
            resolution: crate::rat_int(m as i64),
            lipschitz_bound: lipschitz,
            conclusive: false,
            evals: m,
        });
    }

    let regions: Vec<Region> = match p {
        PExponent::Finite(_) => sign_patterns(m)
            .into_iter()
            .map(|sigma| Region::Orthant { sigma })
            .collect(),
        PExponent::Infinity => {
            let mut v = Vec::with_capacity(2 * m);
            for pivot in 0..m {
                for sign in [1i8, -1i8] {
                    v.push(Region::Face { pivot, sign });
                }
            }
            v
        }
    };
    // start at the requested resolution, shrinking until the grid fits
    let mut resolution = budget.initial_resolution.max(2);
    while resolution > 1 && grid_size(resolution, m, p) > (budget.max_evals as u64) / 2 {
        resolution /= 2;
    }
    let mut evals_used = 0usize;

    struct Level {
        global_min: Extremum,
        global_max: Extremum,
        lower_lo: Rat,
        slack: Rat,
        resolution: u32,
    }
    let evaluate_level = |scans: &[RegionScan],
                          resolution: u32,
                          lipschitz: &Rat|
     -> Result<Level, CertifyError> {
        let slack = cover_radius(resolution, m, p) * lipschitz;
        let global_min = scans
            .iter()
            .filter_map(|s| s.min.clone())
            .min_by(|a, b| a.value.lo().cmp(b.value.lo()))
            .expect("at least one sample");
        let global_max = scans
            .iter()
            .filter_map(|s| s.max.clone())
            .max_by(|a, b| a.value.hi().cmp(b.value.hi()))
            .expect("at least one sample");
        // exact route: min over regions of the per-region functional bound
        let mut exact_lower: Option<Rat> = None;
        if scans.iter().all(|s| !s.functionals.is_empty()) {
            let mut worst: Option<Rat> = None;
            let mut complete = true;
            for (s, region) in scans.iter().zip(&regions) {
                match region_functional_bound(&s.functionals, region, m, p, budget)? {
                    Some(b) => {
                        if worst.as_ref().is_none_or(|w| b < *w) {
                            worst = Some(b);
                        }
                    }
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if complete {
                exact_lower = worst;
            }
        }
        let grid_lower = {
            let v = global_min.value.lo() - &slack;
            if v.is_negative() {
                Rat::zero()
            } else {
                v
            }
        };
        let lower_lo = match &exact_lower {
            Some(e) if *e > grid_lower => e.clone(),
            _ => grid_lower,
        };
        Ok(Level {
            global_min,
            global_max,
            lower_lo,
            slack,
            resolution,
        })
    };

    let mut last: Option<Level> = None;
    let mut conclusive = false;
    loop {
        let projected = grid_size(resolution, m, p);
        if projected.saturating_add(evals_used as u64) > budget.max_evals as u64 {
            break;
        }
        let scans: Result<Vec<RegionScan>, CertifyError> = regions
            .par_iter()
            .map(|region| scan_region(xs, region, resolution, p, ambient, budget))
            .collect();
        let scans = scans?;
        evals_used += scans.iter().map(|s| s.evals).sum::<usize>();
        let level = evaluate_level(&scans, resolution, &lipschitz)?;
        // stop once the lower enclosure is tight relative to its value
        let width = level.global_min.value.hi() - &level.lower_lo;
        let target = &budget.target_slack_fraction * level.global_min.value.hi();
        let attained_min_positive = level.global_min.value.hi().is_positive();
        let done = !attained_min_positive || width <= target;
        last = Some(level);
        if done {
            conclusive = true;
            break;
        }
        resolution *= 2;
    }
    let level = match last {
        Some(v) => v,
        None => {
            // budget too small for even the coarsest grid; fall back to the
            // coordinate directions so the certificate is still honest
            let scans: Result<Vec<RegionScan>, CertifyError> = regions
                .iter()
                .map(|region| scan_region(xs, region, 1, p, ambient, budget))
                .collect();
            let scans = scans?;
            evals_used += scans.iter().map(|s| s.evals).sum::<usize>();
            evaluate_level(&scans, 1, &lipschitz)?
        }
    };

    let c_lower = Enclosure::new(
        level
            .lower_lo
            .clone()
            .min(level.global_min.value.hi().clone()),
        level.global_min.value.hi().clone(),
    );
    let (c_upper, witness_upper) = match exact_up {
        Some(e) => (e.value, e.witness),
        None => (
            Enclosure::new(
                level.global_max.value.lo().clone(),
                level.global_max.value.hi() + &level.slack,
            ),
            level.global_max.witness.clone(),
        ),
    };

    Ok(EquivalenceCertificate {
        p: p.clone(),
        ambient: ambient.clone(),
        c_lower,
        c_upper,
        witness_lower: level.global_min.witness.clone(),
        witness_upper,
        resolution: cover_radius(level.resolution, m, p),
        lipschitz_bound: lipschitz,
        conclusive,
        evals: evals_used,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeVerdict {
    Pass,
    Violation,
    Inconclusive,
}

/// Outcome of an epsilon-`lp`-type (or epsilon-`c0`-type) check.
#[derive(Debug, Clone)]
pub struct TypeCheckResult {
    pub verdict: TypeVerdict,
    /// A concrete coefficient vector falsifying one of the two inequalities.
    pub violating: Option<Vec<Rat>>,
    /// Certified violation margin.
    pub margin: Option<Rat>,
    /// `||x_0||`; the inequalities are normalized by the yardstick norm.
    pub yardstick_norm: Enclosure,
    pub epsilon: Rat,
    pub certificate: EquivalenceCertificate,
}

/// Check the two-sided type inequalities: for all scalars `r`,
/// `(1+eps)^-1 ||sum r_i x_i|| <= ||r||_p ||x_0|| <= (1+eps) ||sum r_i x_i||`.
/// Equivalently, the ratio range must lie inside
/// `[||x_0||/(1+eps), ||x_0||(1+eps)]`.
pub fn check_eps_lp_type(
    xs: &[FiniteVector],
    p: &PExponent,
    epsilon: &Rat,
    ambient: &NormSpace,
    budget: &CertifyBudget,
) -> Result<TypeCheckResult, CertifyError> {
    if xs.is_empty() {
        return Err(CertifyError::EmptySystem);
    }
    assert!(!epsilon.is_negative(), "epsilon must be nonnegative");
    let cert = equivalence_constants(xs, p, ambient, budget)?;
    let yard = ambient_norm(&xs[0], ambient, &budget.eval_tol, &budget.ts_budget)?;
    let one_plus = Rat::one() + epsilon;
    let t_low = yard.scale(&(Rat::one() / &one_plus));
    let t_high = yard.scale(&one_plus);

    // certified pass on the whole sphere
    if *cert.c_lower.lo() >= *t_low.hi() && *cert.c_upper.hi() <= *t_high.lo() {
        return Ok(TypeCheckResult {
            verdict: TypeVerdict::Pass,
            violating: None,
            margin: None,
            yardstick_norm: yard,
            epsilon: epsilon.clone(),
            certificate: cert,
        });
    }
    // certified violation at one of the extremal witnesses
    let low_wit = ratio_at(xs, &cert.witness_lower, p, ambient, budget)?.0;
    if low_wit.hi() < t_low.lo() {
        let margin = t_low.lo() - low_wit.hi();
        return Ok(TypeCheckResult {
            verdict: TypeVerdict::Violation,
            violating: Some(cert.witness_lower.clone()),
            margin: Some(margin),
            yardstick_norm: yard,
            epsilon: epsilon.clone(),
            certificate: cert,
        });
    }
    let up_wit = ratio_at(xs, &cert.witness_upper, p, ambient, budget)?.0;
    if up_wit.lo() > t_high.hi() {
        let margin = up_wit.lo() - t_high.hi();
        return Ok(TypeCheckResult {
            verdict: TypeVerdict::Violation,
            violating: Some(cert.witness_upper.clone()),
            margin: Some(margin),
            yardstick_norm: yard,
            epsilon: epsilon.clone(),
            certificate: cert,
        });
    }
    Ok(TypeCheckResult {
        verdict: TypeVerdict::Inconclusive,
        violating: None,
        margin: None,
        yardstick_norm: yard,
        epsilon: epsilon.clone(),
        certificate: cert,
    })
}

/// Result of a best-effort block-representation search.
#[derive(Debug, Clone)]
pub struct BlockRepResult {
    /// `y_0, ..., y_n` on successive index blocks passing the type check.
    pub blocks: Option<Vec<FiniteVector>>,
    pub check: Option<TypeCheckResult>,
    pub best_candidate: Vec<FiniteVector>,
    /// Violation magnitude of the best candidate (zero means pass).
    pub best_score: Rat,
    pub attempts: usize,
}

fn candidate_score(
    xs: &[FiniteVector],
    p: &PExponent,
    epsilon: &Rat,
    ambient: &NormSpace,
    budget: &CertifyBudget,
) -> Result<(Rat, TypeCheckResult), CertifyError> {
    let check = check_eps_lp_type(xs, p, epsilon, ambient, budget)?;
    if check.verdict == TypeVerdict::Pass {
        return Ok((Rat::zero(), check));
    }
    let yard = &check.yardstick_norm;
    let one_plus = Rat::one() + epsilon;
    let t_low = yard.scale(&(Rat::one() / &one_plus));
    let t_high = yard.scale(&one_plus);
    let cert = &check.certificate;
    let mut score = Rat::zero();
    let short_low = t_low.hi() - cert.c_lower.lo();
    if short_low > score {
        score = short_low;
    }
    let short_high = cert.c_upper.hi() - t_high.lo();
    if short_high > score {
        score = short_high;
    }
    Ok((score, check))
}

/// Search for `n + 1` successive block vectors `(1+eps)`-equivalent to the
/// `lp` (or `c0`) unit basis inside `e_1 .. e_basis_range`.
///
/// Best-effort by design: a ladder of singleton runs at doubling start
/// offsets, then coordinate ascent (shift the window, widen the blocks)
/// accepting only score improvements. Failure reports the best candidate
/// found, never an error.
pub fn block_rep_search(
    ambient: &NormSpace,
    basis_range: u32,
    p: &PExponent,
    epsilon: &Rat,
    n: usize,
    budget: &CertifyBudget,
) -> Result<BlockRepResult, CertifyError> {
    assert!(n >= 1, "need at least two blocks");
    let count = n + 1;
    let singleton_run = |start: u32| -> Option<Vec<FiniteVector>> {
        let end = start as u64 + count as u64 - 1;
        if start == 0 || end > basis_range as u64 {
            return None;
        }
        Some(
            (0..count)
                .map(|j| FiniteVector::basis(start + j as u32))
                .collect(),
        )
    };
    // flat blocks, or blocks with end entries reweighted to 1/2
    let block_run = |start: u32, width: u32, tapered: bool| -> Option<Vec<FiniteVector>> {
        let end = start as u64 + (count as u64) * (width as u64) - 1;
        if start == 0 || end > basis_range as u64 {
            return None;
        }
        let mut out = Vec::with_capacity(count);
        for j in 0..count {
            let a = start + (j as u32) * width;
            let entries: Vec<(u32, Rat)> = (a..a + width)
                .map(|i| {
                    let edge = tapered && width > 1 && (i == a || i == a + width - 1);
                    let v = if edge { crate::rat(1, 2) } else { Rat::one() };
                    (i, v)
                })
                .collect();
            out.push(FiniteVector::new(entries).expect("distinct indices"));
        }
        Some(out)
    };

    let mut attempts = 0usize;
    let mut best: Option<(Rat, Vec<FiniteVector>, TypeCheckResult)> = None;
    let try_candidate = |cand: Vec<FiniteVector>,
                             attempts: &mut usize,
                             best: &mut Option<(Rat, Vec<FiniteVector>, TypeCheckResult)>|
     -> Result<bool, CertifyError> {
        *attempts += 1;
        let (score, check) = candidate_score(&cand, p, epsilon, ambient, budget)?;
        let improves = best.as_ref().is_none_or(|(s, _, _)| score < *s);
        let passed = score.is_zero() && check.verdict == TypeVerdict::Pass;
        if improves {
            *best = Some((score, cand, check));
        }
        Ok(passed)
    };

    // ladder of singleton runs at doubling offsets
    let mut start = 1u32;
    let mut passed = false;
    while let Some(cand) = singleton_run(start) {
        if try_candidate(cand, &mut attempts, &mut best)? {
            passed = true;
            break;
        }
        start = start.saturating_mul(2);
    }
    // coordinate ascent from the best candidate
    if !passed {
        let mut cur_start = best
            .as_ref()
            .and_then(|(_, cand, _)| cand[0].min_index())
            .unwrap_or(1);
        let mut cur_width = 1u32;
        let mut improved = true;
        while improved && attempts < 64 {
            improved = false;
            // shift one step, jump ahead, grow every block, reweight ends
            let moves: Vec<(u32, u32, bool)> = vec![
                (cur_start + 1, cur_width, false),
                (cur_start.saturating_mul(2), cur_width, false),
                (cur_start, cur_width + 1, false),
                (cur_start, cur_width.max(2), true),
            ];
            for (s, w, tapered) in moves {
                let cand = if w == 1 {
                    singleton_run(s)
                } else {
                    block_run(s, w, tapered)
                };
                if let Some(cand) = cand {
                    let prev = best.as_ref().map(|(sc, _, _)| sc.clone());
                    let hit = try_candidate(cand, &mut attempts, &mut best)?;
                    if hit {
                        passed = true;
                        break;
                    }
                    let now = best.as_ref().map(|(sc, _, _)| sc.clone());
                    if now < prev {
                        cur_start = s;
                        cur_width = w;
                        improved = true;
                        break;
                    }
                }
            }
            if passed {
                break;
            }
        }
    }

    let (score, cand, check) = best.expect("at least one candidate was scored");
    if score.is_zero() && check.verdict == TypeVerdict::Pass {
        Ok(BlockRepResult {
            blocks: Some(cand.clone()),
            check: Some(check),
            best_candidate: cand,
            best_score: score,
            attempts,
        })
    } else {
        Ok(BlockRepResult {
            blocks: None,
            check: Some(check),
            best_candidate: cand,
            best_score: score,
            attempts,
        })
    }
}
