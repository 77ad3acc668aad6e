//! Exact computation of the Figiel–Johnson Tsirelson norm.
//!
//! The norm is defined implicitly: `||x|| = max(||x||_inf, sup { 1/2 sum_i
//! ||E_i x|| })` over admissible families `E_1 < ... < E_n` of finite sets
//! with `n <= min E_1`. Two reductions turn this into a terminating exact
//! algorithm:
//!
//! * families in which fewer than two pieces meet the support can never
//!   attain the outer max (a single piece contributes at most half the norm),
//!   so the recursion only descends into families whose pieces all have
//!   strictly smaller support — a well-founded recursion on support subsets;
//! * replacing each piece by the interval hull of its intersection with the
//!   support preserves disjointness, ordering and admissibility and never
//!   lowers the attained value, so pieces can be enumerated as consecutive
//!   runs of support points instead of arbitrary finite sets.
//!
//! Both reductions are cross-checked against a brute-force oracle over
//! arbitrary finite-set families in the test suite.

use crate::vector::{FiniteVector, Rat};
use num_traits::{Signed, Zero};
use std::collections::HashMap;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum TsirelsonError {
    #[error("support size {support} exceeds the evaluation budget ({max_support}); raise TsBudget::max_support to proceed")]
    SupportBudget { support: usize, max_support: usize },
    #[error("support span {span} exceeds the evaluation budget ({max_span}); raise TsBudget::max_span to proceed")]
    SpanBudget { span: u32, max_span: u32 },
    #[error("invalid admissible family: {0}")]
    InvalidFamily(String),
    #[error("invalid enumeration range lo={lo}, hi={hi}")]
    InvalidRange { lo: u32, hi: u32 },
}

/// Evaluation budget. Beyond it the evaluator refuses rather than silently
/// approximating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsBudget {
    pub max_support: usize,
    pub max_span: u32,
}

impl Default for TsBudget {
    fn default() -> Self {
        TsBudget {
            max_support: 20,
            max_span: 40,
        }
    }
}

impl TsBudget {
    pub fn unlimited() -> Self {
        TsBudget {
            max_support: usize::MAX,
            max_span: u32::MAX,
        }
    }

    fn check(&self, x: &FiniteVector) -> Result<(), TsirelsonError> {
        let support = x.support_size();
        if support > self.max_support {
            return Err(TsirelsonError::SupportBudget {
                support,
                max_support: self.max_support,
            });
        }
        if let (Some(lo), Some(hi)) = (x.min_index(), x.max_index()) {
            let span = hi - lo + 1;
            if span > self.max_span {
                return Err(TsirelsonError::SpanBudget {
                    span,
                    max_span: self.max_span,
                });
            }
        }
        Ok(())
    }
}

/// An ordered family of disjoint integer intervals `E_1 < ... < E_n` with the
/// admissibility constraint `n <= min E_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibleFamily {
    intervals: Vec<(u32, u32)>,
}

impl AdmissibleFamily {
    pub fn new(intervals: Vec<(u32, u32)>) -> Result<Self, TsirelsonError> {
        if intervals.is_empty() {
            return Err(TsirelsonError::InvalidFamily("empty family".into()));
        }
        let n = intervals.len() as u32;
        if intervals[0].0 < n {
            return Err(TsirelsonError::InvalidFamily(format!(
                "{n} pieces must start at index >= {n}, got {}",
                intervals[0].0
            )));
        }
        let mut prev_end: u32 = 0;
        for &(a, b) in &intervals {
            if a == 0 || a > b {
                return Err(TsirelsonError::InvalidFamily(format!(
                    "bad interval [{a}, {b}]"
                )));
            }
            if a <= prev_end {
                return Err(TsirelsonError::InvalidFamily(format!(
                    "interval [{a}, {b}] overlaps or is out of order"
                )));
            }
            prev_end = b;
        }
        Ok(AdmissibleFamily { intervals })
    }

    pub fn intervals(&self) -> &[(u32, u32)] {
        &self.intervals
    }

    pub fn pieces(&self) -> usize {
        self.intervals.len()
    }
}

/// Streams every admissible interval family inside `[lo, hi]` with at most
/// `max_pieces` pieces, each exactly once, in lexicographic order by
/// `(n, a_1, b_1, a_2, b_2, ...)`.
pub fn admissible_families(
    lo: u32,
    hi: u32,
    max_pieces: usize,
) -> Result<AdmissibleFamilies, TsirelsonError> {
    if lo < 1 || lo > hi {
        return Err(TsirelsonError::InvalidRange { lo, hi });
    }
    Ok(AdmissibleFamilies {
        lo,
        hi,
        max_pieces,
        pieces: 0,
        current: Vec::new(),
        fresh: false,
    })
}

pub struct AdmissibleFamilies {
    lo: u32,
    hi: u32,
    max_pieces: usize,
    pieces: usize,
    current: Vec<(u32, u32)>,
    fresh: bool,
}

impl AdmissibleFamilies {
    /// Minimal family for the current piece count, or `None` if it cannot fit.
    fn init_pieces(&mut self) -> bool {
        let n = self.pieces as u32;
        let a1 = self.lo.max(n);
        if a1 + n - 1 > self.hi {
            return false;
        }
        self.current = (0..n).map(|i| (a1 + i, a1 + i)).collect();
        true
    }

    fn advance(&mut self) -> bool {
        let n = self.pieces;
        for j in (0..n).rev() {
            let rest = (n - 1 - j) as u32;
            let (a, b) = self.current[j];
            if b + 1 + rest <= self.hi {
                self.current[j] = (a, b + 1);
                self.reinit_after(j);
                return true;
            }
            if a + 1 + rest <= self.hi {
                self.current[j] = (a + 1, a + 1);
                self.reinit_after(j);
                return true;
            }
        }
        false
    }

    fn reinit_after(&mut self, j: usize) {
        for i in j + 1..self.pieces {
            let start = self.current[i - 1].1 + 1;
            self.current[i] = (start, start);
        }
    }
}

impl Iterator for AdmissibleFamilies {
    type Item = AdmissibleFamily;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.pieces == 0 || !self.fresh {
                // move to the next piece count
                self.pieces += 1;
                if self.pieces > self.max_pieces {
                    return None;
                }
                if !self.init_pieces() {
                    // larger counts need even more room
                    return None;
                }
                self.fresh = true;
                return Some(AdmissibleFamily {
                    intervals: self.current.clone(),
                });
            }
            if self.advance() {
                return Some(AdmissibleFamily {
                    intervals: self.current.clone(),
                });
            }
            self.fresh = false;
        }
    }
}

/// Where the outer max of the fixed-point equation was attained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessTree {
    /// The zero vector.
    Zero,
    /// Attained by `||x||_inf` at the given index.
    Sup { index: u32 },
    /// Attained by an admissible family; pieces carry the interval hull of
    /// the support points they cover.
    Family { pieces: Vec<FamilyPiece> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyPiece {
    pub lo: u32,
    pub hi: u32,
    pub tree: WitnessTree,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoStats {
    /// Distinct sub-vectors evaluated (memo-table size).
    pub subvectors: usize,
    /// Lookups answered from the memo table.
    pub cache_hits: usize,
}

/// Result of one exact norm evaluation.
#[derive(Debug, Clone)]
pub struct NormComputation {
    pub input: FiniteVector,
    pub value: Rat,
    pub tree: WitnessTree,
    /// The defining iterates, when requested; nondecreasing and bounded by
    /// `value`.
    pub iterates: Option<Vec<Rat>>,
    pub stats: MemoStats,
}

impl NormComputation {
    /// Attach the defining iterates `||x||_0 .. ||x||_steps` to the result.
    pub fn with_iterates(mut self, steps: usize, budget: &TsBudget) -> Result<Self, TsirelsonError> {
        self.iterates = Some(tsirelson_iterates(&self.input, steps, budget)?);
        Ok(self)
    }
}

#[derive(Clone)]
enum Choice {
    Sup(usize),
    Family(Vec<(usize, usize)>),
}

struct RangeEntry {
    value: Rat,
    choice: Choice,
}

/// Best admissible block decomposition of `positions[i0..=i1]`:
/// for each piece count `k >= 2`, the first block must start at a support
/// position whose index value is at least `k`. Returns the best
/// `(sum, blocks)` over all k, or `None` when no family fits.
fn best_admissible_blocks<F>(
    indices: &[u32],
    i0: usize,
    i1: usize,
    mut piece_value: F,
) -> Option<(Rat, Vec<(usize, usize)>)>
where
    F: FnMut(usize, usize) -> Rat,
{
    let len = i1 - i0 + 1;
    if len < 2 {
        return None;
    }
    // piece values for all subranges
    let mut pieces: HashMap<(usize, usize), Rat> = HashMap::new();
    for i in i0..=i1 {
        for j in i..=i1 {
            if (i, j) != (i0, i1) {
                pieces.insert((i, j), piece_value(i, j));
            }
        }
    }
    // h[i - i0][c] = best sum of exactly c blocks within positions [i..=i1]
    let mut h: Vec<Vec<Option<Rat>>> = vec![vec![None; len + 1]; len + 2];
    #[derive(Clone, Copy)]
    enum Step {
        Skip,
        Take(usize),
    }
    let mut step: Vec<Vec<Step>> = vec![vec![Step::Skip; len + 1]; len + 2];
    for row in h.iter_mut() {
        row[0] = Some(Rat::zero());
    }
    for i in (i0..=i1).rev() {
        let r = i - i0;
        for c in 1..=len {
            if (i1 - i + 1) < c {
                continue;
            }
            let mut best: Option<Rat> = h[r + 1][c].clone();
            let mut choice = Step::Skip;
            for j in i..=(i1 - (c - 1)) {
                if (i, j) == (i0, i1) {
                    // the whole range as a single piece; never part of a
                    // family with two or more pieces, and its value is the
                    // one currently being computed
                    continue;
                }
                if let Some(tail) = &h[j - i0 + 1][c - 1] {
                    let cand = pieces
                        .get(&(i, j))
                        .expect("piece value precomputed")
                        .clone()
                        + tail.clone();
                    if best.as_ref().is_none_or(|b| cand > *b) {
                        best = Some(cand);
                        choice = Step::Take(j);
                    }
                }
            }
            h[r][c] = best;
            step[r][c] = choice;
        }
    }
    let mut best: Option<(Rat, usize, usize)> = None;
    for k in 2..=len {
        // first support position whose index value allows k pieces
        let p = match indices[i0..=i1].iter().position(|&v| v >= k as u32) {
            Some(off) => i0 + off,
            None => break,
        };
        if i1 - p + 1 < k {
            break;
        }
        if let Some(v) = &h[p - i0][k] {
            if best.as_ref().is_none_or(|(b, _, _)| *v > *b) {
                best = Some((v.clone(), p, k));
            }
        }
    }
    let (value, start, k) = best?;
    // backtrack the chosen placement
    let mut blocks = Vec::with_capacity(k);
    let mut i = start;
    let mut c = k;
    while c > 0 {
        match step[i - i0][c] {
            Step::Skip => i += 1,
            Step::Take(j) => {
                blocks.push((i, j));
                i = j + 1;
                c -= 1;
            }
        }
    }
    Some((value, blocks))
}

struct Evaluator<'a> {
    indices: &'a [u32],
    values: &'a [Rat],
    memo: HashMap<(usize, usize), RangeEntry>,
    hits: usize,
}

impl<'a> Evaluator<'a> {
    /// Bottom-up over range lengths, so every piece lookup hits the memo.
    fn run(&mut self) {
        let m = self.indices.len();
        for len in 1..=m {
            for i0 in 0..=(m - len) {
                let i1 = i0 + len - 1;
                let entry = self.eval_range(i0, i1);
                self.memo.insert((i0, i1), entry);
            }
        }
    }

    fn eval_range(&mut self, i0: usize, i1: usize) -> RangeEntry {
        // sup part
        let mut sup_pos = i0;
        let mut sup_val = self.values[i0].abs();
        for i in i0 + 1..=i1 {
            let a = self.values[i].abs();
            if a > sup_val {
                sup_val = a;
                sup_pos = i;
            }
        }
        // family part; pieces are strict subranges, already memoized
        let memo = &self.memo;
        let mut hits = 0usize;
        let family = best_admissible_blocks(self.indices, i0, i1, |i, j| {
            hits += 1;
            memo[&(i, j)].value.clone()
        });
        self.hits += hits;
        if let Some((sum, blocks)) = family {
            let half = sum / crate::rat_int(2);
            if half > sup_val {
                return RangeEntry {
                    value: half,
                    choice: Choice::Family(blocks),
                };
            }
        }
        RangeEntry {
            value: sup_val,
            choice: Choice::Sup(sup_pos),
        }
    }

    fn build_tree(&self, i0: usize, i1: usize) -> WitnessTree {
        match &self.memo[&(i0, i1)].choice {
            Choice::Sup(pos) => WitnessTree::Sup {
                index: self.indices[*pos],
            },
            Choice::Family(blocks) => WitnessTree::Family {
                pieces: blocks
                    .iter()
                    .map(|&(i, j)| FamilyPiece {
                        lo: self.indices[i],
                        hi: self.indices[j],
                        tree: self.build_tree(i, j),
                    })
                    .collect(),
            },
        }
    }
}

/// Exact Tsirelson norm with default budget.
pub fn tsirelson_norm(x: &FiniteVector) -> Result<Rat, TsirelsonError> {
    Ok(tsirelson_norm_with(x, &TsBudget::default())?.value)
}

/// Exact Tsirelson norm with explicit budget, returning the fixed-point
/// witness tree and memo statistics alongside the value.
pub fn tsirelson_norm_with(
    x: &FiniteVector,
    budget: &TsBudget,
) -> Result<NormComputation, TsirelsonError> {
    budget.check(x)?;
    if x.is_zero() {
        return Ok(NormComputation {
            input: x.clone(),
            value: Rat::zero(),
            tree: WitnessTree::Zero,
            iterates: None,
            stats: MemoStats::default(),
        });
    }
    let indices: Vec<u32> = x.entries().iter().map(|(i, _)| *i).collect();
    let values: Vec<Rat> = x.entries().iter().map(|(_, v)| v.clone()).collect();
    let mut ev = Evaluator {
        indices: &indices,
        values: &values,
        memo: HashMap::new(),
        hits: 0,
    };
    ev.run();
    let m = indices.len();
    let value = ev.memo[&(0, m - 1)].value.clone();
    let tree = ev.build_tree(0, m - 1);
    Ok(NormComputation {
        input: x.clone(),
        value,
        tree,
        iterates: None,
        stats: MemoStats {
            subvectors: ev.memo.len(),
            cache_hits: ev.hits,
        },
    })
}

/// The defining iterates `||x||_0, ..., ||x||_n`: `||x||_0 = ||x||_inf` and
/// each step takes the sup over admissible families (evaluated at the
/// previous level) that meet the support. The list is nondecreasing and
/// stabilizes at the norm once the level reaches the support size.
pub fn tsirelson_iterates(
    x: &FiniteVector,
    steps: usize,
    budget: &TsBudget,
) -> Result<Vec<Rat>, TsirelsonError> {
    budget.check(x)?;
    if x.is_zero() {
        return Ok(vec![Rat::zero(); steps + 1]);
    }
    let indices: Vec<u32> = x.entries().iter().map(|(i, _)| *i).collect();
    let values: Vec<Rat> = x.entries().iter().map(|(_, v)| v.clone()).collect();
    let m = indices.len();
    let mut ranges: Vec<(usize, usize)> = Vec::new();
    for i in 0..m {
        for j in i..m {
            ranges.push((i, j));
        }
    }
    // level 0: sup norm of every contiguous subrange
    let mut level: HashMap<(usize, usize), Rat> = ranges
        .iter()
        .map(|&(i, j)| {
            let sup = values[i..=j]
                .iter()
                .map(|v| v.abs())
                .max()
                .expect("nonempty range");
            ((i, j), sup)
        })
        .collect();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(level[&(0, m - 1)].clone());
    for _ in 0..steps {
        let mut next: HashMap<(usize, usize), Rat> = HashMap::new();
        for &(i0, i1) in &ranges {
            let mut best = level[&(i0, i1)].clone();
            if let Some((sum, _)) =
                best_admissible_blocks(&indices, i0, i1, |i, j| level[&(i, j)].clone())
            {
                let half = sum / crate::rat_int(2);
                if half > best {
                    best = half;
                }
            }
            next.insert((i0, i1), best);
        }
        level = next;
        out.push(level[&(0, m - 1)].clone());
    }
    Ok(out)
}

/// Extract a norming functional from a witness tree: a rational functional
/// `f` with `sum_i f_i x_i = ||x||` and `|f . y| <= ||y||` for every `y`.
pub fn dual_functional(tree: &WitnessTree, x: &FiniteVector) -> Vec<(u32, Rat)> {
    match tree {
        WitnessTree::Zero => Vec::new(),
        WitnessTree::Sup { index } => {
            let v = x.get(*index);
            let sign = if v.is_negative() {
                -Rat::from_integer(1.into())
            } else {
                Rat::from_integer(1.into())
            };
            vec![(*index, sign)]
        }
        WitnessTree::Family { pieces } => {
            let half = crate::rat(1, 2);
            let mut out = Vec::new();
            for piece in pieces {
                for (i, c) in dual_functional(&piece.tree, x) {
                    out.push((i, &half * &c));
                }
            }
            out
        }
    }
}

/// Evaluate a functional against a vector.
pub fn functional_value(f: &[(u32, Rat)], x: &FiniteVector) -> Rat {
    f.iter()
        .fold(Rat::zero(), |acc, (i, c)| acc + c * &x.get(*i))
}
