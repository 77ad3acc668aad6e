//! Finite-depth executable checkers for the model-theoretic dividing lines:
//! order property via double-limit tables, independence via witness search
//! over disjoint index pairs, and the strict order property via monotone
//! chains. The `l1(Z)` convolution formula lives in [`crate::convolution`].
//!
//! None of these claim the infinitary property. A report says what was
//! verified at the declared finite depth and budget, nothing more: an
//! unfilled independence pair means "no witness found", never "no witness
//! exists" (unless an exact feasibility analysis proves it).

use crate::ambient::{ambient_norm, NormError};
use crate::enclosure::Enclosure;
use crate::tsirelson::TsBudget;
use crate::vector::{FiniteVector, NormSpace, Rat};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("evaluator failed at pair ({left}, {right}): {source}")]
    Eval {
        left: usize,
        right: usize,
        source: NormError,
    },
    #[error("need at least {needed} indices per side, got ({rows}, {cols})")]
    TooSmall {
        needed: usize,
        rows: usize,
        cols: usize,
    },
    #[error("depth {0} exceeds the supported maximum of 16")]
    DepthTooLarge(usize),
    #[error("value at pair ({left}, {right}) violates the declared bounds: {message}")]
    BoundsViolation {
        left: usize,
        right: usize,
        message: String,
    },
}

/// A two-sequence formula `phi(a_m, b_n)` evaluated on 1-based index pairs.
pub trait MatrixFormula: Sync {
    fn name(&self) -> &str;
    /// Declared value bounds.
    fn bounds(&self) -> (Rat, Rat);
    fn eval(&self, m: usize, n: usize) -> Result<Enclosure, FormulaError>;
}

/// An indexed family `f_n(x)` of real-valued functions on vectors.
pub trait IndexedFormula: Sync {
    fn name(&self) -> &str;
    fn ambient(&self) -> NormSpace;
    fn bounds(&self) -> (Rat, Rat);
    fn eval(&self, index: usize, arg: &FiniteVector) -> Result<Enclosure, FormulaError>;
    /// Exact squared value, when the ambient admits one (`l2`); lets
    /// threshold comparisons avoid root enclosures entirely.
    fn eval_sq_exact(&self, _index: usize, _arg: &FiniteVector) -> Option<Rat> {
        None
    }
}

/// `||e_m + s_n||` in `c0`, evaluated by direct coordinate arithmetic.
/// Equals 2 when `m <= n` and 1 otherwise.
pub fn summing_basis_value(m: u32, n: u32) -> Rat {
    assert!(m >= 1 && n >= 1);
    FiniteVector::basis(m)
        .add(&FiniteVector::summing(n))
        .sup_norm()
}

/// The order-property example on `c0`: `phi(x, y) = ||x + y||` along
/// `a_m = e_m`, `b_n = s_n`.
pub struct SummingBasisPhi;

impl MatrixFormula for SummingBasisPhi {
    fn name(&self) -> &str {
        "c0-summing-basis"
    }
    fn bounds(&self) -> (Rat, Rat) {
        (Rat::zero(), crate::rat_int(2))
    }
    fn eval(&self, m: usize, n: usize) -> Result<Enclosure, FormulaError> {
        Ok(Enclosure::exact(summing_basis_value(m as u32, n as u32)))
    }
}

/// The stable counterpart: `phi(x, y) = ||x + y||` along `a_m = e_m`,
/// `b_n = e_n` in `l2` (constant `sqrt 2` off the diagonal).
pub struct L2BasisPhi {
    pub tol: Rat,
}

impl Default for L2BasisPhi {
    fn default() -> Self {
        L2BasisPhi {
            tol: crate::rat(1, 1 << 30),
        }
    }
}

impl MatrixFormula for L2BasisPhi {
    fn name(&self) -> &str {
        "l2-basis"
    }
    fn bounds(&self) -> (Rat, Rat) {
        (Rat::zero(), crate::rat_int(2))
    }
    fn eval(&self, m: usize, n: usize) -> Result<Enclosure, FormulaError> {
        let v = FiniteVector::basis(m as u32).add(&FiniteVector::basis(n as u32));
        ambient_norm(&v, &NormSpace::l2(), &self.tol, &TsBudget::default()).map_err(|source| {
            FormulaError::Eval {
                left: m,
                right: n,
                source,
            }
        })
    }
}

/// A constant formula, the degenerate stable example.
pub struct ConstantPhi(pub Rat);

impl MatrixFormula for ConstantPhi {
    fn name(&self) -> &str {
        "constant"
    }
    fn bounds(&self) -> (Rat, Rat) {
        (self.0.clone(), self.0.clone())
    }
    fn eval(&self, _m: usize, _n: usize) -> Result<Enclosure, FormulaError> {
        Ok(Enclosure::exact(self.0.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitVerdict {
    OrderPropertyWitnessed,
    ConsistentWithStability,
    Inconclusive,
}

/// Finite double-limit probe of a formula along two index sequences.
#[derive(Debug, Clone)]
pub struct DoubleLimitReport {
    pub rows: usize,
    pub cols: usize,
    pub matrix: Vec<Vec<Enclosure>>,
    /// Estimate of `lim_m lim_n phi(a_m, b_n)` (inner limit over columns).
    pub row_then_column: Enclosure,
    /// Estimate of `lim_n lim_m phi(a_m, b_n)` (inner limit over rows).
    pub column_then_row: Enclosure,
    pub gap: Enclosure,
    pub verdict: LimitVerdict,
    pub tolerance: Rat,
}

fn mean(values: &[Enclosure]) -> Enclosure {
    let n = crate::rat_int(values.len() as i64);
    let mut acc = Enclosure::zero();
    for v in values {
        acc = acc.add(v);
    }
    acc.scale(&(Rat::one() / n))
}

/// Last-quarter window of `1..=limit`.
fn tail_window(limit: usize) -> std::ops::RangeInclusive<usize> {
    let q = limit.div_ceil(4);
    (limit - q + 1)..=limit
}

/// Outer-variable window: the last quarter of an initial segment capped at
/// half the inner tail start, so the inner variable genuinely outruns the
/// outer one at finite depth.
fn outer_window(own_limit: usize, inner_tail_start: usize) -> std::ops::RangeInclusive<usize> {
    let cap = (inner_tail_start / 2).clamp(1, own_limit);
    tail_window(cap)
}

/// Evaluate the full `rows x cols` matrix and estimate both iterated limits
/// by staggered tail averages.
pub fn double_limit_table(
    phi: &dyn MatrixFormula,
    rows: usize,
    cols: usize,
    tolerance: &Rat,
) -> Result<DoubleLimitReport, FormulaError> {
    if rows < 4 || cols < 4 {
        return Err(FormulaError::TooSmall {
            needed: 4,
            rows,
            cols,
        });
    }
    let (lo_bound, hi_bound) = phi.bounds();
    let matrix: Result<Vec<Vec<Enclosure>>, FormulaError> = (1..=rows)
        .into_par_iter()
        .map(|m| {
            (1..=cols)
                .map(|n| {
                    let v = phi.eval(m, n)?;
                    if *v.hi() < lo_bound || *v.lo() > hi_bound {
                        return Err(FormulaError::BoundsViolation {
                            left: m,
                            right: n,
                            message: format!("{v} outside [{lo_bound}, {hi_bound}]"),
                        });
                    }
                    Ok(v)
                })
                .collect()
        })
        .collect();
    let matrix = matrix?;
    let at = |m: usize, n: usize| &matrix[m - 1][n - 1];

    // row-then-column: inner tail over n, outer m window staggered below it
    let inner_n = tail_window(cols);
    let outer_m = outer_window(rows, *inner_n.start());
    let row_tails: Vec<Enclosure> = outer_m
        .clone()
        .map(|m| {
            mean(
                &inner_n
                    .clone()
                    .map(|n| at(m, n).clone())
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let row_then_column = mean(&row_tails);

    // column-then-row: inner tail over m, outer n window staggered below it
    let inner_m = tail_window(rows);
    let outer_n = outer_window(cols, *inner_m.start());
    let col_tails: Vec<Enclosure> = outer_n
        .clone()
        .map(|n| {
            mean(
                &inner_m
                    .clone()
                    .map(|m| at(m, n).clone())
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let column_then_row = mean(&col_tails);

    let gap = row_then_column.sub(&column_then_row).abs();
    // the verdict requires the separation to hold across the whole outer
    // windows, not merely on the averages
    let mut all_separated = true;
    let mut all_close = true;
    for rt in &row_tails {
        for ct in &col_tails {
            let g = rt.sub(ct).abs();
            if *g.lo() <= *tolerance {
                all_separated = false;
            }
            if *g.hi() > *tolerance {
                all_close = false;
            }
        }
    }
    let verdict = if all_separated {
        LimitVerdict::OrderPropertyWitnessed
    } else if all_close {
        LimitVerdict::ConsistentWithStability
    } else {
        LimitVerdict::Inconclusive
    };
    Ok(DoubleLimitReport {
        rows,
        cols,
        matrix,
        row_then_column,
        column_then_row,
        gap,
        verdict,
        tolerance: tolerance.clone(),
    })
}

/// The family `f_n(x) = ||x + e_n||` in a chosen ambient space.
pub struct PlusBasisFamily {
    pub space: NormSpace,
    pub tol: Rat,
}

impl PlusBasisFamily {
    pub fn new(space: NormSpace) -> Self {
        PlusBasisFamily {
            space,
            tol: crate::rat(1, 1 << 30),
        }
    }
}

impl IndexedFormula for PlusBasisFamily {
    fn name(&self) -> &str {
        "plus-basis"
    }
    fn ambient(&self) -> NormSpace {
        self.space.clone()
    }
    fn bounds(&self) -> (Rat, Rat) {
        (Rat::zero(), crate::rat_int(2))
    }
    fn eval(&self, index: usize, arg: &FiniteVector) -> Result<Enclosure, FormulaError> {
        let v = arg.add(&FiniteVector::basis(index as u32));
        ambient_norm(&v, &self.space, &self.tol, &TsBudget::default()).map_err(|source| {
            FormulaError::Eval {
                left: index,
                right: 0,
                source,
            }
        })
    }
    fn eval_sq_exact(&self, index: usize, arg: &FiniteVector) -> Option<Rat> {
        match &self.space {
            NormSpace::Lp(p) if *p == crate::rat_int(2) => {
                Some(arg.add(&FiniteVector::basis(index as u32)).l2_norm_sq())
            }
            _ => None,
        }
    }
}

/// Constructive witness source tried before blind sampling.
pub trait WitnessRule: Sync {
    fn name(&self) -> &str;
    fn propose(
        &self,
        below_set: &[usize],
        above_set: &[usize],
        below: &Rat,
        above: &Rat,
    ) -> Vec<FiniteVector>;
}

/// Exact infeasibility analysis for a pair shape, when the family admits one.
pub trait FeasibilityAnalyzer: Sync {
    fn proves_infeasible(
        &self,
        below_count: usize,
        above_count: usize,
        below: &Rat,
        above: &Rat,
    ) -> bool;
}

/// The appendix construction for `c0`: the characteristic vector of the
/// above-threshold set gives `f_i = 1` on the below set and `f_j = 2` on
/// the above set.
pub struct CharacteristicRule;

impl WitnessRule for CharacteristicRule {
    fn name(&self) -> &str {
        "characteristic-of-above-set"
    }
    fn propose(
        &self,
        _below_set: &[usize],
        above_set: &[usize],
        _below: &Rat,
        _above: &Rat,
    ) -> Vec<FiniteVector> {
        let entries: Vec<(u32, Rat)> = above_set.iter().map(|&j| (j as u32, Rat::one())).collect();
        vec![FiniteVector::new(entries).expect("distinct indices")]
    }
}

fn two_level_requirements(t: &Rat, below: &Rat, above: &Rat) -> (Rat, Rat) {
    // f_i(x)^2 = t + 1 + 2 x_i with t = ||x||^2; the below set needs
    // x_i < (s^2 - 1 - t)/2, the above set needs x_j > (r^2 - 1 - t)/2
    let two = crate::rat_int(2);
    let a_req = {
        let v = (t + Rat::one() - below * below) / &two;
        if v.is_negative() {
            Rat::zero()
        } else {
            v
        }
    };
    let b_req = {
        let v = (above * above - Rat::one() - t) / &two;
        if v.is_negative() {
            Rat::zero()
        } else {
            v
        }
    };
    (a_req, b_req)
}

fn two_level_deficit(t: &Rat, p: usize, q: usize, below: &Rat, above: &Rat) -> Rat {
    // g(t) = p a(t)^2 + q b(t)^2 - t; a witness forces g(t) <= 0 somewhere
    let (a, b) = two_level_requirements(t, below, above);
    crate::rat_int(p as i64) * &a * &a + crate::rat_int(q as i64) * &b * &b - t
}

/// Two-level symmetric candidates for the `l2` family `||x + e_n||`:
/// `x = -a` on the below set and `+b` on the above set, with `(a, b)` read
/// off the exactly-analyzed region `p a(t)^2 + q b(t)^2 <= t <= 1`.
pub struct SymmetricTwoLevelRule;

impl WitnessRule for SymmetricTwoLevelRule {
    fn name(&self) -> &str {
        "l2-symmetric-two-level"
    }
    fn propose(
        &self,
        below_set: &[usize],
        above_set: &[usize],
        below: &Rat,
        above: &Rat,
    ) -> Vec<FiniteVector> {
        let p = below_set.len();
        let q = above_set.len();
        let negatives: Vec<Rat> = (0..=64u32)
            .map(|i| crate::rat(i as i64, 64))
            .filter(|t| two_level_deficit(t, p, q, below, above).is_negative())
            .collect();
        if negatives.is_empty() {
            return Vec::new();
        }
        // a few representative starts suffice; verification filters anyway
        let starts = vec![
            negatives[0].clone(),
            negatives[negatives.len() / 2].clone(),
            negatives[negatives.len() - 1].clone(),
        ];
        let mut out = Vec::new();
        for t0 in starts {
            for shift in [8u32, 12] {
                let mu = crate::rat(1, 1i64 << shift);
                // the requirements depend on the witness's own squared norm,
                // so chase the fixed point t = p a(t)^2 + q b(t)^2 with the
                // margin folded in (the map contracts near the window)
                let mut t = t0.clone();
                for _ in 0..12 {
                    let (a_req, b_req) = two_level_requirements(&t, below, above);
                    let a = &a_req + &mu;
                    let b = &b_req + &mu;
                    t = crate::rat_int(p as i64) * &a * &a + crate::rat_int(q as i64) * &b * &b;
                    // keep denominators bounded across iterations
                    let scale = crate::rat_int(1 << 24);
                    t = (t * &scale).floor() / &scale;
                }
                let (a_req, b_req) = two_level_requirements(&t, below, above);
                let a = &a_req + &mu;
                let b = &b_req + &mu;
                let mut entries: Vec<(u32, Rat)> = Vec::new();
                for &i in below_set {
                    entries.push((i as u32, -a.clone()));
                }
                for &j in above_set {
                    entries.push((j as u32, b.clone()));
                }
                if let Ok(v) = FiniteVector::new(entries) {
                    out.push(v);
                }
            }
        }
        out
    }
}

/// Exact infeasibility certificate for the `l2` family: any unit-ball witness
/// for the pair yields some `t` in `[0, 1]` with `p a(t)^2 + q b(t)^2 <= t`,
/// so a strictly positive minimum of the deficit over `[0, 1]` rules every
/// witness out.
pub struct QuadraticBallAnalyzer;

impl FeasibilityAnalyzer for QuadraticBallAnalyzer {
    fn proves_infeasible(
        &self,
        below_count: usize,
        above_count: usize,
        below: &Rat,
        above: &Rat,
    ) -> bool {
        let p = below_count;
        let q = above_count;
        // g is piecewise quadratic; its minimum over [0, 1] is attained at an
        // endpoint, a breakpoint, or an interior vertex of one of the pieces.
        let mut candidates: Vec<Rat> = vec![Rat::zero(), Rat::one()];
        let b1 = below * below - Rat::one(); // a-requirement activates above this
        let b2 = above * above - Rat::one(); // b-requirement vanishes above this
        for b in [b1, b2] {
            if !b.is_negative() && b <= Rat::one() {
                candidates.push(b);
            }
        }
        let two = crate::rat_int(2);
        let p_rat = crate::rat_int(p as i64);
        let q_rat = crate::rat_int(q as i64);
        let s2 = below * below;
        let r2 = above * above;
        if !(&p_rat + &q_rat).is_zero() {
            // both requirements active: g' = p(t+1-s2)/2 - q(r2-1-t)/2 - 1
            let vertex = (&two + &p_rat * &(Rat::one() - &s2) + &q_rat * &(&r2 - &Rat::one()))
                / (&p_rat + &q_rat);
            if !vertex.is_negative() && vertex <= Rat::one() {
                candidates.push(vertex);
            }
        }
        if !p_rat.is_zero() {
            // only a active: g' = p(t+1-s2)/2 - 1
            let vertex = &two / &p_rat + &(&s2 - &Rat::one());
            if !vertex.is_negative() && vertex <= Rat::one() {
                candidates.push(vertex);
            }
        }
        if !q_rat.is_zero() {
            // only b active: g' = -q(r2-1-t)/2 - 1
            let vertex = (&r2 - &Rat::one()) - &two / &q_rat;
            if !vertex.is_negative() && vertex <= Rat::one() {
                candidates.push(vertex);
            }
        }
        candidates
            .iter()
            .all(|t| two_level_deficit(t, p, q, below, above).is_positive())
    }
}

/// A formula family bundled with its constructive rules and optional
/// feasibility analysis, ready for independence search.
pub struct IndependenceFamily {
    pub formula: Box<dyn IndexedFormula>,
    pub rules: Vec<Box<dyn WitnessRule>>,
    pub analyzer: Option<Box<dyn FeasibilityAnalyzer>>,
}

impl IndependenceFamily {
    /// `f_n(x) = ||x + e_n||` on the `c0` unit ball, with the appendix
    /// characteristic-vector rule.
    pub fn c0_plus_basis() -> Self {
        IndependenceFamily {
            formula: Box::new(PlusBasisFamily::new(NormSpace::Sup)),
            rules: vec![Box::new(CharacteristicRule)],
            analyzer: None,
        }
    }

    /// `f_n(x) = ||x + e_n||` on the `l2` unit ball, with the symmetric
    /// two-level rule and the exact quadratic feasibility analysis.
    pub fn l2_plus_basis() -> Self {
        IndependenceFamily {
            formula: Box::new(PlusBasisFamily::new(NormSpace::l2())),
            rules: vec![Box::new(SymmetricTwoLevelRule)],
            analyzer: Some(Box::new(QuadraticBallAnalyzer)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchBudget {
    /// Random samples attempted per unfilled pair after the rules.
    pub samples_per_pair: usize,
    /// Overall evaluation cap.
    pub max_evals: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            samples_per_pair: 64,
            max_evals: 500_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IndependenceConfig {
    /// Threshold `s`: the below set needs `f_n(x) < s`.
    pub below: Rat,
    /// Threshold `r`: the above set needs `f_n(x) > r`.
    pub above: Rat,
    pub depth: usize,
    pub seed: u64,
    pub budget: SearchBudget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairStatus {
    Filled { witness: FiniteVector },
    Unfilled { proved_infeasible: bool },
}

#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub below_set: Vec<usize>,
    pub above_set: Vec<usize>,
    pub status: PairStatus,
    pub evals: usize,
}

/// Outcome of a finite-depth independence search.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub below: Rat,
    pub above: Rat,
    pub depth: usize,
    pub pairs: Vec<PairOutcome>,
    /// True only when every disjoint pair carries a verified witness.
    pub independent_at_depth: bool,
    pub first_unfilled: Option<usize>,
    pub evals_used: usize,
}

/// Certified check that `x` lies in the ambient unit ball and satisfies the
/// strict threshold conditions for the given pair.
pub fn verify_witness(
    family: &IndependenceFamily,
    below_set: &[usize],
    above_set: &[usize],
    cfg: &IndependenceConfig,
    x: &FiniteVector,
    evals: &mut usize,
) -> bool {
    let ambient = family.formula.ambient();
    // unit-ball membership, on exact squares where possible
    let in_ball = match &ambient {
        NormSpace::Lp(p) if *p == crate::rat_int(2) => x.l2_norm_sq() <= Rat::one(),
        _ => {
            let tol = crate::rat(1, 1 << 30);
            match ambient_norm(x, &ambient, &tol, &TsBudget::default()) {
                Ok(e) => *e.hi() <= Rat::one(),
                Err(_) => false,
            }
        }
    };
    if !in_ball {
        return false;
    }
    let below_sq = &cfg.below * &cfg.below;
    let above_sq = &cfg.above * &cfg.above;
    for &i in below_set {
        *evals += 1;
        if let Some(sq) = family.formula.eval_sq_exact(i, x) {
            if sq >= below_sq {
                return false;
            }
            continue;
        }
        match family.formula.eval(i, x) {
            Ok(v) if *v.hi() < cfg.below => {}
            _ => return false,
        }
    }
    for &j in above_set {
        *evals += 1;
        if let Some(sq) = family.formula.eval_sq_exact(j, x) {
            if sq <= above_sq {
                return false;
            }
            continue;
        }
        match family.formula.eval(j, x) {
            Ok(v) if *v.lo() > cfg.above => {}
            _ => return false,
        }
    }
    true
}

fn sample_candidates(cfg: &IndependenceConfig, pair_index: usize, count: usize) -> Vec<FiniteVector> {
    // per-pair deterministic stream: the seed is mixed with the pair index
    let mut rng =
        ChaCha20Rng::seed_from_u64(cfg.seed ^ (pair_index as u64).wrapping_mul(0x9E3779B97F4A7C15));
    let max_index = (cfg.depth + 2) as u32;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut entries = Vec::new();
        for i in 1..=max_index {
            // quarter-integer grid in [-1, 1], mostly zero
            let roll: u32 = rng.random_range(0..12);
            if roll < 9 {
                continue;
            }
            let num: i64 = rng.random_range(-4..=4);
            if num != 0 {
                entries.push((i, crate::rat(num, 4)));
            }
        }
        if let Ok(v) = FiniteVector::new(entries) {
            out.push(v);
        }
    }
    out
}

/// Enumerate every pair of disjoint subsets `(P, M)` of `{1..depth}` with
/// `P ∪ M` nonempty and try to fill each with a verified witness:
/// registered constructive rules first, then seeded grid sampling. Reports
/// `independent_at_depth` only when all pairs are filled.
pub fn independence_witness_search(
    family: &IndependenceFamily,
    cfg: &IndependenceConfig,
) -> Result<WitnessReport, FormulaError> {
    if cfg.depth > 16 {
        return Err(FormulaError::DepthTooLarge(cfg.depth));
    }
    assert!(cfg.below < cfg.above, "need below < above");
    let mut assignments: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let total = 3usize.pow(cfg.depth as u32);
    for code in 1..total {
        let mut c = code;
        let mut below_set = Vec::new();
        let mut above_set = Vec::new();
        for n in 1..=cfg.depth {
            match c % 3 {
                1 => below_set.push(n),
                2 => above_set.push(n),
                _ => {}
            }
            c /= 3;
        }
        assignments.push((below_set, above_set));
    }
    let per_pair_budget = (cfg.budget.max_evals / assignments.len().max(1)).max(4);
    let pairs: Vec<PairOutcome> = assignments
        .into_par_iter()
        .enumerate()
        .map(|(idx, (below_set, above_set))| {
            let mut evals = 0usize;
            let mut witness: Option<FiniteVector> = None;
            for rule in &family.rules {
                for cand in rule.propose(&below_set, &above_set, &cfg.below, &cfg.above) {
                    if verify_witness(family, &below_set, &above_set, cfg, &cand, &mut evals) {
                        witness = Some(cand);
                        break;
                    }
                }
                if witness.is_some() {
                    break;
                }
            }
            if witness.is_none() {
                let infeasible = family.analyzer.as_ref().is_some_and(|a| {
                    a.proves_infeasible(below_set.len(), above_set.len(), &cfg.below, &cfg.above)
                });
                if !infeasible {
                    for cand in sample_candidates(cfg, idx, cfg.budget.samples_per_pair) {
                        if evals >= per_pair_budget {
                            break;
                        }
                        if verify_witness(family, &below_set, &above_set, cfg, &cand, &mut evals) {
                            witness = Some(cand);
                            break;
                        }
                    }
                }
                if witness.is_none() {
                    return PairOutcome {
                        below_set,
                        above_set,
                        status: PairStatus::Unfilled {
                            proved_infeasible: infeasible,
                        },
                        evals,
                    };
                }
            }
            PairOutcome {
                below_set,
                above_set,
                status: PairStatus::Filled {
                    witness: witness.expect("set above"),
                },
                evals,
            }
        })
        .collect();
    let first_unfilled = pairs
        .iter()
        .position(|p| matches!(p.status, PairStatus::Unfilled { .. }));
    let evals_used = pairs.iter().map(|p| p.evals).sum();
    Ok(WitnessReport {
        below: cfg.below.clone(),
        above: cfg.above.clone(),
        depth: cfg.depth,
        independent_at_depth: first_unfilled.is_none(),
        first_unfilled,
        pairs,
        evals_used,
    })
}

/// `psi(x, y) = max(||x + y||, ||x - y||)` in `c0` along the summing basis.
pub fn c0_psi(x: &FiniteVector, n: u32) -> Rat {
    let s = FiniteVector::summing(n);
    x.add(&s).sup_norm().max(x.sub(&s).sup_norm())
}

#[derive(Debug, Clone)]
pub struct SopViolation {
    pub kind: &'static str,
    pub m: usize,
    pub n: usize,
    pub left_value: Rat,
    pub right_value: Rat,
    pub sample: Option<FiniteVector>,
}

/// Report of the monotone-plus-strict-chain check for `psi` on `c0`.
#[derive(Debug, Clone)]
pub struct SopReport {
    pub depth: usize,
    pub samples: usize,
    pub monotone_checked: usize,
    pub chain_checked: usize,
    pub violations: Vec<SopViolation>,
    pub pass: bool,
}

/// Verify `psi(x, s_m) <= psi(x, s_n)` for `m <= n <= depth` over the given
/// samples, and the exact strict chain `psi(e_n, s_m) < psi(e_m, s_n)` for
/// all `m < n <= depth`. Depth 1 is vacuously a pass.
pub fn sop_monotonicity_check(depth: usize, samples: &[FiniteVector]) -> SopReport {
    let mut violations = Vec::new();
    let mut monotone_checked = 0usize;
    let mut chain_checked = 0usize;
    for x in samples {
        let values: Vec<Rat> = (1..=depth).map(|n| c0_psi(x, n as u32)).collect();
        for m in 0..depth {
            for n in m + 1..depth {
                monotone_checked += 1;
                if values[m] > values[n] {
                    violations.push(SopViolation {
                        kind: "monotone",
                        m: m + 1,
                        n: n + 1,
                        left_value: values[m].clone(),
                        right_value: values[n].clone(),
                        sample: Some(x.clone()),
                    });
                }
            }
        }
    }
    for m in 1..=depth {
        for n in m + 1..=depth {
            chain_checked += 1;
            let left = c0_psi(&FiniteVector::basis(n as u32), m as u32);
            let right = c0_psi(&FiniteVector::basis(m as u32), n as u32);
            if left >= right {
                violations.push(SopViolation {
                    kind: "strict-chain",
                    m,
                    n,
                    left_value: left,
                    right_value: right,
                    sample: None,
                });
            }
        }
    }
    SopReport {
        depth,
        samples: samples.len(),
        monotone_checked,
        chain_checked,
        pass: violations.is_empty(),
        violations,
    }
}

/// A deterministic set of `c0` unit-ball sample vectors for the SOP
/// monotone check: basis and summing vectors at a few scales plus a seeded
/// quarter-grid batch.
pub fn default_sop_samples(max_index: u32) -> Vec<FiniteVector> {
    let mut out = vec![FiniteVector::zero()];
    for k in 1..=max_index {
        out.push(FiniteVector::basis(k));
        out.push(FiniteVector::basis(k).scale(&crate::rat(-1, 2)));
        out.push(FiniteVector::summing(k).scale(&crate::rat(1, 2)));
        out.push(FiniteVector::summing(k).scale(&-Rat::one()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    for _ in 0..24 {
        let mut entries = Vec::new();
        for i in 1..=max_index {
            let roll: u32 = rng.random_range(0..3);
            if roll == 0 {
                let num: i64 = rng.random_range(-4..=4);
                if num != 0 {
                    entries.push((i, crate::rat(num, 4)));
                }
            }
        }
        if let Ok(v) = FiniteVector::new(entries) {
            out.push(v);
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    out.retain(|v| seen.insert(v.clone()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, rat_int};

    #[test]
    fn summing_basis_pattern() {
        assert_eq!(summing_basis_value(1, 1), rat_int(2));
        assert_eq!(summing_basis_value(3, 2), rat_int(1));
        assert_eq!(summing_basis_value(2, 5), rat_int(2));
    }

    #[test]
    fn c0_table_witnesses_order_property() {
        let report = double_limit_table(&SummingBasisPhi, 20, 20, &rat(1, 10)).unwrap();
        assert_eq!(report.verdict, LimitVerdict::OrderPropertyWitnessed);
        assert_eq!(*report.row_then_column.lo(), rat_int(2));
        assert_eq!(*report.column_then_row.lo(), rat_int(1));
        assert_eq!(*report.gap.lo(), rat_int(1));
    }

    #[test]
    fn constant_formula_is_stable() {
        let report = double_limit_table(&ConstantPhi(rat(3, 7)), 8, 8, &rat(1, 10)).unwrap();
        assert_eq!(report.verdict, LimitVerdict::ConsistentWithStability);
        assert_eq!(*report.gap.hi(), rat_int(0));
    }

    #[test]
    fn l2_basis_is_consistent_with_stability() {
        let report = double_limit_table(&L2BasisPhi::default(), 8, 8, &rat(1, 100)).unwrap();
        assert_eq!(report.verdict, LimitVerdict::ConsistentWithStability);
    }

    #[test]
    fn table_requires_minimum_size() {
        assert!(double_limit_table(&SummingBasisPhi, 3, 8, &rat(1, 10)).is_err());
    }

    #[test]
    fn c0_family_independent_at_depth_four() {
        let family = IndependenceFamily::c0_plus_basis();
        let cfg = IndependenceConfig {
            below: rat(5, 4),
            above: rat(7, 4),
            depth: 4,
            seed: 1,
            budget: SearchBudget::default(),
        };
        let report = independence_witness_search(&family, &cfg).unwrap();
        assert!(report.independent_at_depth);
        assert_eq!(report.pairs.len(), 3usize.pow(4) - 1);
        for pair in &report.pairs {
            if let PairStatus::Filled { witness } = &pair.status {
                for &i in &pair.below_set {
                    let v = family.formula.eval(i, witness).unwrap();
                    assert!(*v.hi() < rat(5, 4));
                }
                for &j in &pair.above_set {
                    let v = family.formula.eval(j, witness).unwrap();
                    assert!(*v.lo() > rat(7, 4));
                }
            }
        }
    }

    #[test]
    fn single_function_with_two_values() {
        let family = IndependenceFamily::c0_plus_basis();
        let cfg = IndependenceConfig {
            below: rat(5, 4),
            above: rat(7, 4),
            depth: 1,
            seed: 1,
            budget: SearchBudget::default(),
        };
        let report = independence_witness_search(&family, &cfg).unwrap();
        assert_eq!(report.pairs.len(), 2);
        assert!(report.independent_at_depth);
    }

    #[test]
    fn l2_balanced_three_three_is_feasible_but_four_four_is_not() {
        // exact feasibility analysis at s = 1, r = 8/5
        let analyzer = QuadraticBallAnalyzer;
        assert!(!analyzer.proves_infeasible(3, 3, &rat_int(1), &rat(8, 5)));
        assert!(analyzer.proves_infeasible(4, 4, &rat_int(1), &rat(8, 5)));
        // and the constructive rule really does fill a 3|3 pair
        let family = IndependenceFamily::l2_plus_basis();
        let cfg = IndependenceConfig {
            below: rat_int(1),
            above: rat(8, 5),
            depth: 6,
            seed: 1,
            budget: SearchBudget::default(),
        };
        let rule = SymmetricTwoLevelRule;
        let below_set = vec![1, 2, 3];
        let above_set = vec![4, 5, 6];
        let mut evals = 0;
        let filled = rule
            .propose(&below_set, &above_set, &cfg.below, &cfg.above)
            .into_iter()
            .any(|cand| verify_witness(&family, &below_set, &above_set, &cfg, &cand, &mut evals));
        assert!(filled, "balanced 3|3 split admits an exact witness");
    }

    #[test]
    fn l2_depth_eight_balanced_pairs_unfilled_with_flag() {
        let family = IndependenceFamily::l2_plus_basis();
        let cfg = IndependenceConfig {
            below: rat_int(1),
            above: rat(8, 5),
            depth: 8,
            seed: 1,
            budget: SearchBudget {
                samples_per_pair: 2,
                max_evals: 400_000,
            },
        };
        let report = independence_witness_search(&family, &cfg).unwrap();
        assert!(!report.independent_at_depth);
        let balanced = report
            .pairs
            .iter()
            .find(|p| p.below_set.len() == 4 && p.above_set.len() == 4)
            .expect("4|4 pair exists at depth 8");
        assert_eq!(
            balanced.status,
            PairStatus::Unfilled {
                proved_infeasible: true
            }
        );
    }

    #[test]
    fn sop_chain_holds_to_depth_twenty() {
        let samples = default_sop_samples(8);
        let report = sop_monotonicity_check(20, &samples);
        assert!(report.pass, "violations: {:?}", report.violations);
        // the depth-2 instance from the worked example
        assert_eq!(c0_psi(&FiniteVector::basis(2), 1), rat_int(1));
        assert_eq!(c0_psi(&FiniteVector::basis(1), 2), rat_int(2));
    }

    #[test]
    fn sop_depth_one_is_vacuous() {
        let report = sop_monotonicity_check(1, &[]);
        assert!(report.pass);
        assert_eq!(report.chain_checked, 0);
    }
}
