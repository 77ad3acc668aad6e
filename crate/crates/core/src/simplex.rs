//! Dense exact-rational simplex for small certified linear programs.
//!
//! Solves `min c.x  s.t.  A x = b, x >= 0` with Bland's rule (guaranteed
//! termination) in exact arithmetic, and returns both the optimal primal
//! point and the dual vector read off the final basis, so callers can verify
//! optimality independently: any primal-feasible point bounds the value from
//! above, any dual-feasible vector bounds it from below.
//!
//! Problems are expected to have full row rank (each constructed row carries
//! its own slack or residual column), which the two-phase driver relies on to
//! pivot artificial variables out of the basis.

use crate::vector::Rat;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum LpError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("pivot budget of {0} exhausted")]
    PivotBudget(usize),
    #[error("malformed problem: {0}")]
    Shape(String),
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<Rat>,
    pub rows: Vec<Vec<Rat>>,
    pub rhs: Vec<Rat>,
}

impl LpProblem {
    fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars {
            return Err(LpError::Shape("objective length mismatch".into()));
        }
        if self.rows.len() != self.rhs.len() {
            return Err(LpError::Shape("rhs length mismatch".into()));
        }
        for row in &self.rows {
            if row.len() != self.num_vars {
                return Err(LpError::Shape("row length mismatch".into()));
            }
        }
        Ok(())
    }

    /// Exact feasibility check; returns the objective value when feasible.
    pub fn check_primal(&self, x: &[Rat]) -> Option<Rat> {
        if x.len() != self.num_vars || x.iter().any(|v| v.is_negative()) {
            return None;
        }
        for (row, b) in self.rows.iter().zip(&self.rhs) {
            let lhs = row
                .iter()
                .zip(x)
                .filter(|(a, _)| !a.is_zero())
                .fold(Rat::zero(), |acc, (a, v)| acc + a * v);
            if lhs != *b {
                return None;
            }
        }
        Some(
            self.objective
                .iter()
                .zip(x)
                .fold(Rat::zero(), |acc, (c, v)| acc + c * v),
        )
    }

    /// Exact dual feasibility check (`y^T A <= c`); returns `y.b` when
    /// feasible, which is a certified lower bound on the optimum.
    pub fn check_dual(&self, y: &[Rat]) -> Option<Rat> {
        if y.len() != self.rows.len() {
            return None;
        }
        for j in 0..self.num_vars {
            let mut yaj = Rat::zero();
            for (i, row) in self.rows.iter().enumerate() {
                if !row[j].is_zero() {
                    yaj += &y[i] * &row[j];
                }
            }
            if yaj > self.objective[j] {
                return None;
            }
        }
        Some(
            y.iter()
                .zip(&self.rhs)
                .fold(Rat::zero(), |acc, (yi, bi)| acc + yi * bi),
        )
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: Rat,
    pub primal: Vec<Rat>,
    pub dual: Vec<Rat>,
    pub pivots: usize,
}

struct Tableau {
    nstruct: usize,
    m: usize,
    /// m rows of `nstruct + m + 1` entries; the m tracking columns start as
    /// the identity and therefore always hold the current basis inverse.
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.nstruct + self.m + 1
    }

    fn rhs_col(&self) -> usize {
        self.nstruct + self.m
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width();
        let pivot_val = self.rows[r][q].clone();
        debug_assert!(!pivot_val.is_zero());
        for j in 0..w {
            if !self.rows[r][j].is_zero() {
                self.rows[r][j] = &self.rows[r][j] / &pivot_val;
            }
        }
        let nonzero_cols: Vec<usize> = (0..w).filter(|&j| !self.rows[r][j].is_zero()).collect();
        for i in 0..self.m {
            if i == r || self.rows[i][q].is_zero() {
                continue;
            }
            let factor = self.rows[i][q].clone();
            for &j in &nonzero_cols {
                let delta = &factor * &self.rows[r][j];
                self.rows[i][j] = &self.rows[i][j] - &delta;
            }
            self.rows[i][q] = Rat::zero();
        }
        self.basis[r] = q;
        self.pivots += 1;
    }

    /// Reduced costs for the given cost vector (length nstruct + m).
    fn reduced_costs(&self, cost: &[Rat]) -> Vec<Rat> {
        let ncols = self.nstruct + self.m;
        let mut out = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for j in 0..ncols {
                if !self.rows[r][j].is_zero() {
                    let delta = cb * &self.rows[r][j];
                    out[j] = &out[j] - &delta;
                }
            }
        }
        out
    }

    /// Bland-rule simplex on the restricted entering set. Reduced costs are
    /// maintained incrementally.
    fn run(
        &mut self,
        cost: &[Rat],
        enterable: &dyn Fn(usize) -> bool,
        max_pivots: usize,
    ) -> Result<(), LpError> {
        let ncols = self.nstruct + self.m;
        let rhs = self.rhs_col();
        let mut reduced = self.reduced_costs(cost);
        loop {
            let entering = (0..ncols).find(|&j| enterable(j) && reduced[j].is_negative());
            let q = match entering {
                Some(q) => q,
                None => return Ok(()),
            };
            if self.pivots >= max_pivots {
                return Err(LpError::PivotBudget(max_pivots));
            }
            // ratio test with Bland tie-break (smallest basis index)
            let mut leave: Option<(usize, Rat)> = None;
            for r in 0..self.m {
                if self.rows[r][q].is_positive() {
                    let ratio = &self.rows[r][rhs] / &self.rows[r][q];
                    match &leave {
                        None => leave = Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < *lratio
                                || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let (r, _) = leave.ok_or(LpError::Unbounded)?;
            self.pivot(r, q);
            // update the reduced-cost row with the (now normalized) pivot row
            let dq = reduced[q].clone();
            for j in 0..ncols {
                if !self.rows[r][j].is_zero() {
                    let delta = &dq * &self.rows[r][j];
                    reduced[j] = &reduced[j] - &delta;
                }
            }
            reduced[q] = Rat::zero();
        }
    }

    fn primal(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.nstruct];
        let rhs = self.rhs_col();
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.nstruct {
                x[b] = self.rows[r][rhs].clone();
            }
        }
        x
    }

    /// Dual vector `y = c_B^T B^{-1}`, read from the tracking columns.
    fn dual(&self, objective: &[Rat], row_signs: &[i8]) -> Vec<Rat> {
        let mut y = vec![Rat::zero(); self.m];
        for i in 0..self.m {
            let mut yi = Rat::zero();
            for (r, &b) in self.basis.iter().enumerate() {
                if b < self.nstruct && !objective[b].is_zero() {
                    let t = &self.rows[r][self.nstruct + i];
                    if !t.is_zero() {
                        yi += &objective[b] * t;
                    }
                }
            }
            if row_signs[i] < 0 {
                yi = -yi;
            }
            y[i] = yi;
        }
        y
    }
}

/// Two-phase simplex from scratch.
pub fn solve(lp: &LpProblem, max_pivots: usize) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let m = lp.rows.len();
    let n = lp.num_vars;
    let mut row_signs = vec![1i8; m];
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<Rat> = Vec::with_capacity(n + m + 1);
        let flip = lp.rhs[i].is_negative();
        if flip {
            row_signs[i] = -1;
        }
        for j in 0..n {
            row.push(if flip {
                -lp.rows[i][j].clone()
            } else {
                lp.rows[i][j].clone()
            });
        }
        for k in 0..m {
            row.push(if k == i {
                Rat::from_integer(1.into())
            } else {
                Rat::zero()
            });
        }
        row.push(if flip {
            -lp.rhs[i].clone()
        } else {
            lp.rhs[i].clone()
        });
        rows.push(row);
    }
    let mut tab = Tableau {
        nstruct: n,
        m,
        rows,
        basis: (n..n + m).collect(),
        pivots: 0,
    };
    // phase 1: drive the artificial (tracking) variables to zero
    let mut phase1_cost = vec![Rat::zero(); n + m];
    for c in phase1_cost.iter_mut().skip(n) {
        *c = Rat::from_integer(1.into());
    }
    tab.run(&phase1_cost, &|j| j < n, max_pivots)?;
    let rhs = tab.rhs_col();
    let mut infeas = Rat::zero();
    for (r, &b) in tab.basis.iter().enumerate() {
        if b >= n {
            infeas += &tab.rows[r][rhs];
        }
    }
    if !infeas.is_zero() {
        return Err(LpError::Infeasible);
    }
    // pivot any residual zero-value artificials out of the basis; full row
    // rank guarantees a structural pivot exists
    for r in 0..m {
        if tab.basis[r] >= n {
            let q = (0..n)
                .find(|&j| !tab.rows[r][j].is_zero())
                .ok_or_else(|| LpError::Shape("rows are linearly dependent".into()))?;
            tab.pivot(r, q);
        }
    }
    // phase 2
    let mut phase2_cost = lp.objective.clone();
    phase2_cost.extend(std::iter::repeat_with(Rat::zero).take(m));
    tab.run(&phase2_cost, &|j| j < n, max_pivots)?;
    finish(lp, tab, &row_signs)
}

/// Simplex warm-started from a known feasible basis (one column per row);
/// skips phase 1 entirely.
pub fn solve_with_basis(
    lp: &LpProblem,
    basis: &[usize],
    max_pivots: usize,
) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let m = lp.rows.len();
    let n = lp.num_vars;
    if basis.len() != m {
        return Err(LpError::Shape("basis length mismatch".into()));
    }
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = lp.rows[i].clone();
        for k in 0..m {
            row.push(if k == i {
                Rat::from_integer(1.into())
            } else {
                Rat::zero()
            });
        }
        row.push(lp.rhs[i].clone());
        rows.push(row);
    }
    let mut tab = Tableau {
        nstruct: n,
        m,
        rows,
        basis: (n..n + m).collect(),
        pivots: 0,
    };
    for (r, &b) in basis.iter().enumerate() {
        if b >= n {
            return Err(LpError::Shape("basis column out of range".into()));
        }
        if tab.rows[r][b].is_zero() {
            return Err(LpError::Shape(format!(
                "provided basis is singular at row {r}"
            )));
        }
        tab.pivot(r, b);
    }
    tab.pivots = 0;
    let rhs = tab.rhs_col();
    if (0..m).any(|r| tab.rows[r][rhs].is_negative()) {
        return Err(LpError::Shape("provided basis is not primal feasible".into()));
    }
    let mut phase2_cost = lp.objective.clone();
    phase2_cost.extend(std::iter::repeat_with(Rat::zero).take(m));
    tab.run(&phase2_cost, &|j| j < n, max_pivots)?;
    let row_signs = vec![1i8; m];
    finish(lp, tab, &row_signs)
}

fn finish(lp: &LpProblem, tab: Tableau, row_signs: &[i8]) -> Result<LpSolution, LpError> {
    let primal = tab.primal();
    let value = lp
        .check_primal(&primal)
        .ok_or_else(|| LpError::Shape("internal error: optimal point infeasible".into()))?;
    let dual = tab.dual(&lp.objective, row_signs);
    Ok(LpSolution {
        value,
        primal,
        dual,
        pivots: tab.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, rat_int};

    fn lp(
        objective: Vec<Rat>,
        rows: Vec<Vec<Rat>>,
        rhs: Vec<Rat>,
    ) -> LpProblem {
        LpProblem {
            num_vars: objective.len(),
            objective,
            rows,
            rhs,
        }
    }

    #[test]
    fn tiny_lp_with_slack() {
        // min -x1 - 2 x2  s.t.  x1 + x2 + s = 3, x2 <= 2 (slack t), x >= 0
        let p = lp(
            vec![rat_int(-1), rat_int(-2), rat_int(0), rat_int(0)],
            vec![
                vec![rat_int(1), rat_int(1), rat_int(1), rat_int(0)],
                vec![rat_int(0), rat_int(1), rat_int(0), rat_int(1)],
            ],
            vec![rat_int(3), rat_int(2)],
        );
        let sol = solve(&p, 1000).unwrap();
        assert_eq!(sol.value, rat_int(-5)); // x1 = 1, x2 = 2
        assert_eq!(sol.primal[0], rat_int(1));
        assert_eq!(sol.primal[1], rat_int(2));
        // strong duality, verified through the independent dual check
        let lb = p.check_dual(&sol.dual).expect("dual must be feasible");
        assert_eq!(lb, sol.value);
    }

    #[test]
    fn infeasible_detected() {
        // x1 = 1 and x1 = 2 simultaneously
        let p = lp(
            vec![rat_int(0), rat_int(0)],
            vec![
                vec![rat_int(1), rat_int(1)],
                vec![rat_int(1), rat_int(1)],
            ],
            vec![rat_int(1), rat_int(2)],
        );
        match solve(&p, 1000) {
            Err(LpError::Infeasible) => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_detected() {
        // min -x1 with x1 - x2 = 0 (both can grow)
        let p = lp(
            vec![rat_int(-1), rat_int(0)],
            vec![vec![rat_int(1), rat_int(-1)]],
            vec![rat_int(0)],
        );
        match solve(&p, 1000) {
            Err(LpError::Unbounded) => {}
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn dual_extraction_with_negative_rhs() {
        // min x1 + x2  s.t.  -x1 - x2 + s = -3  (i.e. x1 + x2 >= 3)
        // the row gets sign-normalized internally; the reported dual must
        // still be feasible for the original system and match the optimum
        let p = lp(
            vec![rat_int(1), rat_int(1), rat_int(0)],
            vec![vec![rat_int(-1), rat_int(-1), rat_int(1)]],
            vec![rat_int(-3)],
        );
        let sol = solve(&p, 1000).unwrap();
        assert_eq!(sol.value, rat_int(3));
        let lb = p.check_dual(&sol.dual).expect("dual must be feasible");
        assert_eq!(lb, sol.value);
    }

    #[test]
    fn warm_start_matches_cold_start() {
        // min rp + rn  s.t.  z - rp + rn = 5/2, z + s = 1
        let p = lp(
            vec![rat_int(0), rat_int(1), rat_int(1), rat_int(0)],
            vec![
                vec![rat_int(1), rat_int(-1), rat_int(1), rat_int(0)],
                vec![rat_int(1), rat_int(0), rat_int(0), rat_int(1)],
            ],
            vec![rat(5, 2), rat_int(1)],
        );
        let cold = solve(&p, 1000).unwrap();
        let warm = solve_with_basis(&p, &[2, 3], 1000).unwrap();
        assert_eq!(cold.value, rat(3, 2));
        assert_eq!(warm.value, cold.value);
        assert_eq!(p.check_dual(&warm.dual), Some(warm.value.clone()));
    }

    #[test]
    fn fractional_coefficients() {
        // min x  s.t.  (2/3) x - s = 1/2
        let p = lp(
            vec![rat_int(1), rat_int(0)],
            vec![vec![rat(2, 3), rat_int(-1)]],
            vec![rat(1, 2)],
        );
        let sol = solve(&p, 1000).unwrap();
        assert_eq!(sol.value, rat(3, 4));
    }
}
