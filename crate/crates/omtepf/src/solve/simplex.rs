//! Bounded-variable two-phase primal simplex with an explicitly maintained
//! basis inverse.
//!
//! Variables carry individual bounds (finite, infinite, or fixed); `≤` rows
//! get slack columns and both phases share one pivoting loop. Selection rules
//! are fully deterministic: most-negative reduced cost with lowest-index
//! tie-break, switching to lowest-index-only (Bland) after a run of
//! degenerate pivots so cycling terminates.

use super::{residual_summary, SolveOptions, SolveResult, Status};
use crate::assemble::ProblemMatrices;
use crate::error::{Error, Result};
use crate::lp::merge_linear;
use std::time::Instant;

const PIVOT_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-11;
const DEGENERATE_RUN_LIMIT: usize = 256;
const REFRESH_INTERVAL: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Free variable resting at zero while nonbasic.
    FreeAtZero,
}

struct Tableau {
    /// Dense row-major constraint matrix over all columns.
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    m: usize,
    n_total: usize,
    n_struct: usize,
    art_start: usize,
    state: Vec<VarState>,
    x: Vec<f64>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    pivots: usize,
    degenerate_run: usize,
}

enum LoopEnd {
    Optimal,
    Unbounded,
    TimedOut,
}

impl Tableau {
    fn new(prob: &ProblemMatrices, lower: &[f64], upper: &[f64]) -> Tableau {
        let n_struct = prob.n_vars;
        let m_eq = prob.eq_rhs.len();
        let m_le = prob.le_rhs.len();
        let m = m_eq + m_le;
        let n_slack = m_le;
        let art_start = n_struct + n_slack;
        let n_total = art_start + m;

        let mut a = vec![vec![0.0; n_total]; m];
        let mut b = vec![0.0; m];
        for r in 0..m_eq {
            for (c, v) in prob.eq.row(r) {
                a[r][c] += v;
            }
            b[r] = prob.eq_rhs[r];
        }
        for r in 0..m_le {
            for (c, v) in prob.le.row(r) {
                a[m_eq + r][c] += v;
            }
            a[m_eq + r][n_struct + r] = 1.0;
            b[m_eq + r] = prob.le_rhs[r];
        }

        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        lo.extend(std::iter::repeat(0.0).take(n_slack));
        hi.extend(std::iter::repeat(f64::INFINITY).take(n_slack));
        // Artificial bounds start permissive; phase transitions pin them.
        lo.extend(std::iter::repeat(0.0).take(m));
        hi.extend(std::iter::repeat(f64::INFINITY).take(m));

        Tableau {
            a,
            b,
            lower: lo,
            upper: hi,
            cost: vec![0.0; n_total],
            m,
            n_total,
            n_struct,
            art_start,
            state: vec![VarState::AtLower; n_total],
            x: vec![0.0; n_total],
            basis: Vec::new(),
            binv: Vec::new(),
            pivots: 0,
            degenerate_run: 0,
        }
    }

    /// Deterministic starting point: every structural/slack column nonbasic
    /// at its nearest finite bound (zero when free), one artificial per row
    /// carrying the residual, basis inverse diagonal ±1.
    fn install_start(&mut self) {
        for j in 0..self.art_start {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let (state, val) = if lo.is_finite() {
                (VarState::AtLower, lo)
            } else if hi.is_finite() {
                (VarState::AtUpper, hi)
            } else {
                (VarState::FreeAtZero, 0.0)
            };
            self.state[j] = state;
            self.x[j] = val;
        }
        // Row residuals at the nonbasic point decide artificial signs.
        let mut resid = self.b.clone();
        for (r, row) in self.a.iter().enumerate() {
            for j in 0..self.art_start {
                if row[j] != 0.0 && self.x[j] != 0.0 {
                    resid[r] -= row[j] * self.x[j];
                }
            }
        }
        self.basis = Vec::with_capacity(self.m);
        self.binv = vec![vec![0.0; self.m]; self.m];
        for r in 0..self.m {
            let art = self.art_start + r;
            let sign = if resid[r] < 0.0 { -1.0 } else { 1.0 };
            self.a[r][art] = sign;
            self.basis.push(art);
            self.state[art] = VarState::Basic;
            self.x[art] = resid[r].abs();
            self.binv[r][r] = sign;
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::FreeAtZero => 0.0,
            VarState::Basic => unreachable!("basic treated as nonbasic"),
        }
    }

    /// Recompute basic values from scratch: x_B = B⁻¹(b − N·x_N).
    fn refresh_basics(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.n_total {
            if self.state[j] != VarState::Basic {
                let v = self.nonbasic_value(j);
                self.x[j] = v;
                if v != 0.0 {
                    for r in 0..self.m {
                        if self.a[r][j] != 0.0 {
                            rhs[r] -= self.a[r][j] * v;
                        }
                    }
                }
            }
        }
        for r in 0..self.m {
            let mut val = 0.0;
            for c in 0..self.m {
                val += self.binv[r][c] * rhs[c];
            }
            self.x[self.basis[r]] = val;
        }
    }

    /// Rebuild B⁻¹ from the basis columns by Gauss-Jordan elimination.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut work: Vec<Vec<f64>> = (0..m)
            .map(|r| {
                let mut row: Vec<f64> = self.basis.iter().map(|&j| self.a[r][j]).collect();
                let mut inv = vec![0.0; m];
                inv[r] = 1.0;
                row.extend(inv);
                row
            })
            .collect();
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&i, &j| {
                    work[i][col]
                        .abs()
                        .partial_cmp(&work[j][col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if work[piv][col].abs() < 1e-12 {
                return Err(Error::Audit("singular basis during refactorization".into()));
            }
            work.swap(col, piv);
            let p = work[col][col];
            for v in work[col].iter_mut() {
                *v /= p;
            }
            for r in 0..m {
                if r != col && work[r][col] != 0.0 {
                    let f = work[r][col];
                    let (head, tail) = work.split_at_mut(r.max(col));
                    let (src, dst) = if r < col {
                        (&tail[0], &mut head[r])
                    } else {
                        (&head[col], &mut tail[0])
                    };
                    for (d, s) in dst.iter_mut().zip(src.iter()) {
                        *d -= f * s;
                    }
                }
            }
        }
        for r in 0..m {
            for c in 0..m {
                self.binv[r][c] = work[r][m + c];
            }
        }
        Ok(())
    }

    fn duals(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (r, &bi) in self.basis.iter().enumerate() {
            let cb = self.cost[bi];
            if cb != 0.0 {
                for c in 0..self.m {
                    y[c] += cb * self.binv[r][c];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, y: &[f64], j: usize) -> f64 {
        let mut d = self.cost[j];
        for r in 0..self.m {
            if self.a[r][j] != 0.0 {
                d -= y[r] * self.a[r][j];
            }
        }
        d
    }

    /// One phase of the simplex: pivot until no improving column remains.
    fn optimize(&mut self, tol: f64, deadline: Instant) -> Result<LoopEnd> {
        loop {
            if Instant::now() > deadline {
                return Ok(LoopEnd::TimedOut);
            }
            if self.pivots > 0 && self.pivots % (4 * REFRESH_INTERVAL) == 0 {
                self.refactor()?;
                self.refresh_basics();
            } else if self.pivots > 0 && self.pivots % REFRESH_INTERVAL == 0 {
                self.refresh_basics();
            }
            let y = self.duals();
            let bland = self.degenerate_run > DEGENERATE_RUN_LIMIT;

            // Entering column: direction +1 means the value increases.
            let mut enter: Option<(usize, f64, f64)> = None; // (col, score, dir)
            for j in 0..self.n_total {
                if self.state[j] == VarState::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced_cost(&y, j);
                let cand = match self.state[j] {
                    VarState::AtLower if d < -tol => Some((d.abs(), 1.0)),
                    VarState::AtUpper if d > tol => Some((d.abs(), -1.0)),
                    VarState::FreeAtZero if d.abs() > tol => {
                        Some((d.abs(), if d < 0.0 { 1.0 } else { -1.0 }))
                    }
                    _ => None,
                };
                if let Some((score, dir)) = cand {
                    if bland {
                        enter = Some((j, score, dir));
                        break;
                    }
                    if enter.map_or(true, |(_, s, _)| score > s + ZERO_TOL) {
                        enter = Some((j, score, dir));
                    }
                }
            }
            let Some((e, _, dir)) = enter else {
                return Ok(LoopEnd::Optimal);
            };

            // Column in the current basis frame.
            let mut w = vec![0.0; self.m];
            for r in 0..self.m {
                let mut v = 0.0;
                for c in 0..self.m {
                    if self.binv[r][c] != 0.0 && self.a[c][e] != 0.0 {
                        v += self.binv[r][c] * self.a[c][e];
                    }
                }
                w[r] = v;
            }

            // Ratio test: smallest step at which a basic variable hits a
            // bound, capped by the entering variable's own range.
            let own_range = self.upper[e] - self.lower[e];
            let mut t_best = if own_range.is_finite() { own_range } else { f64::INFINITY };
            let mut leave: Option<(usize, f64)> = None; // (row, bound hit)
            for r in 0..self.m {
                let wd = dir * w[r];
                if wd.abs() <= PIVOT_TOL {
                    continue;
                }
                let bi = self.basis[r];
                let (t, bound) = if wd > 0.0 {
                    if self.lower[bi] == f64::NEG_INFINITY {
                        continue;
                    }
                    ((self.x[bi] - self.lower[bi]) / wd, self.lower[bi])
                } else {
                    if self.upper[bi] == f64::INFINITY {
                        continue;
                    }
                    ((self.upper[bi] - self.x[bi]) / (-wd), self.upper[bi])
                };
                let t = t.max(0.0);
                if t < t_best - ZERO_TOL
                    || (t < t_best + ZERO_TOL
                        && leave.map_or(false, |(lr, _)| {
                            // Exact tie: larger pivot magnitude, then lower
                            // basic index, keeps the factorization stable and
                            // the path deterministic.
                            w[r].abs() > w[lr].abs() + ZERO_TOL
                                || (w[r].abs() > w[lr].abs() - ZERO_TOL
                                    && self.basis[r] < self.basis[lr])
                        }))
                {
                    t_best = t.min(t_best);
                    leave = Some((r, bound));
                }
            }

            if t_best == f64::INFINITY {
                return Ok(LoopEnd::Unbounded);
            }
            self.degenerate_run =
                if t_best <= ZERO_TOL { self.degenerate_run + 1 } else { 0 };
            self.pivots += 1;

            match leave {
                None => {
                    // Bound flip: the entering variable crosses its range.
                    let delta = dir * t_best;
                    for r in 0..self.m {
                        if w[r] != 0.0 {
                            self.x[self.basis[r]] -= delta * w[r];
                        }
                    }
                    self.x[e] += delta;
                    self.state[e] = match self.state[e] {
                        VarState::AtLower => VarState::AtUpper,
                        VarState::AtUpper => VarState::AtLower,
                        s => s,
                    };
                }
                Some((lr, bound)) => {
                    let delta = dir * t_best;
                    for r in 0..self.m {
                        if w[r] != 0.0 {
                            self.x[self.basis[r]] -= delta * w[r];
                        }
                    }
                    let leaving = self.basis[lr];
                    self.x[e] = self.nonbasic_value(e) + delta;
                    self.x[leaving] = bound;
                    self.state[leaving] = if bound == self.lower[leaving] {
                        VarState::AtLower
                    } else {
                        VarState::AtUpper
                    };
                    self.state[e] = VarState::Basic;
                    self.basis[lr] = e;
                    // Elementary update of the inverse.
                    let piv = w[lr];
                    for c in 0..self.m {
                        self.binv[lr][c] /= piv;
                    }
                    for r in 0..self.m {
                        if r != lr && w[r] != 0.0 {
                            let f = w[r];
                            let (pivot_row, other_row) = if r < lr {
                                let (head, tail) = self.binv.split_at_mut(lr);
                                (&tail[0], &mut head[r])
                            } else {
                                let (head, tail) = self.binv.split_at_mut(r);
                                (&head[lr], &mut tail[0])
                            };
                            for (o, p) in other_row.iter_mut().zip(pivot_row.iter()) {
                                *o -= f * p;
                            }
                        }
                    }
                }
            }
        }
    }

    /// After phase 1: pin artificials to zero and pivot basic ones out where
    /// a structural/slack column can replace them (remaining ones flag
    /// redundant rows and stay pinned).
    fn retire_artificials(&mut self) {
        for j in self.art_start..self.n_total {
            self.upper[j] = 0.0;
        }
        for r in 0..self.m {
            if self.basis[r] < self.art_start {
                continue;
            }
            let replacement = (0..self.art_start).find(|&j| {
                if self.state[j] == VarState::Basic {
                    return false;
                }
                let mut v = 0.0;
                for c in 0..self.m {
                    if self.binv[r][c] != 0.0 && self.a[c][j] != 0.0 {
                        v += self.binv[r][c] * self.a[c][j];
                    }
                }
                v.abs() > 1e-7
            });
            if let Some(e) = replacement {
                let mut w = vec![0.0; self.m];
                for rr in 0..self.m {
                    let mut v = 0.0;
                    for c in 0..self.m {
                        if self.binv[rr][c] != 0.0 && self.a[c][e] != 0.0 {
                            v += self.binv[rr][c] * self.a[c][e];
                        }
                    }
                    w[rr] = v;
                }
                let leaving = self.basis[r];
                self.state[leaving] = VarState::AtLower;
                self.x[leaving] = 0.0;
                self.state[e] = VarState::Basic;
                self.basis[r] = e;
                let piv = w[r];
                for c in 0..self.m {
                    self.binv[r][c] /= piv;
                }
                for rr in 0..self.m {
                    if rr != r && w[rr] != 0.0 {
                        let f = w[rr];
                        let (pivot_row, other_row) = if rr < r {
                            let (head, tail) = self.binv.split_at_mut(r);
                            (&tail[0], &mut head[rr])
                        } else {
                            let (head, tail) = self.binv.split_at_mut(rr);
                            (&head[r], &mut tail[0])
                        };
                        for (o, p) in other_row.iter_mut().zip(pivot_row.iter()) {
                            *o -= f * p;
                        }
                    }
                }
                self.refresh_basics();
            }
        }
    }
}

/// Solve the linear program `min c·x` over `prob`'s rows with the given bound
/// vectors (callers override bounds for branch-and-bound nodes).
pub fn solve_with_bounds(
    prob: &ProblemMatrices,
    lower: &[f64],
    upper: &[f64],
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let start = Instant::now();
    let deadline = start + std::time::Duration::from_secs_f64(opts.time_limit.max(0.001));
    for v in 0..prob.n_vars {
        if lower[v] > upper[v] + 1e-12 {
            return Ok(SolveResult::infeasible());
        }
    }

    let mut t = Tableau::new(prob, lower, upper);
    t.install_start();

    // Phase 1: minimize total artificial mass.
    for j in t.art_start..t.n_total {
        t.cost[j] = 1.0;
    }
    match t.optimize(opts.feas_tol * 0.01, deadline)? {
        LoopEnd::Optimal => {}
        LoopEnd::Unbounded => {
            return Err(Error::Audit("phase-1 simplex reported unbounded".into()))
        }
        LoopEnd::TimedOut => {
            return Ok(SolveResult {
                status: Status::Limit,
                x: Vec::new(),
                objective: f64::INFINITY,
                residuals: Default::default(),
                nodes: 0,
                wall_secs: start.elapsed().as_secs_f64(),
                eq_duals: None,
            })
        }
    }
    t.refresh_basics();
    let infeas: f64 = (t.art_start..t.n_total).map(|j| t.x[j].max(0.0)).sum();
    let scale = t.b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if infeas > opts.feas_tol * scale {
        return Ok(SolveResult::infeasible());
    }
    t.retire_artificials();

    // Phase 2: the real objective.
    for j in 0..t.n_total {
        t.cost[j] = 0.0;
    }
    for (v, c) in merge_linear(&prob.objective.linear) {
        t.cost[v] = c;
    }
    let end = t.optimize(opts.feas_tol * 0.01, deadline)?;
    t.refresh_basics();
    let wall = start.elapsed().as_secs_f64();
    match end {
        LoopEnd::Unbounded => Ok(SolveResult {
            status: Status::Unbounded,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
            residuals: Default::default(),
            nodes: 0,
            wall_secs: wall,
            eq_duals: None,
        }),
        LoopEnd::TimedOut => Ok(SolveResult {
            status: Status::Limit,
            x: Vec::new(),
            objective: f64::INFINITY,
            residuals: Default::default(),
            nodes: 0,
            wall_secs: wall,
            eq_duals: None,
        }),
        LoopEnd::Optimal => {
            let x: Vec<f64> = t.x[..t.n_struct].to_vec();
            let mut check = prob.clone();
            check.lower = lower.to_vec();
            check.upper = upper.to_vec();
            let residuals = residual_summary(&check, &x);
            let objective = prob.objective.eval(&x);
            let y = t.duals();
            Ok(SolveResult {
                status: Status::Optimal,
                x,
                objective,
                residuals,
                nodes: 0,
                wall_secs: wall,
                eq_duals: Some(y[..prob.eq_rhs.len()].to_vec()),
            })
        }
    }
}

/// Solve with the problem's own bounds.
pub fn solve(prob: &ProblemMatrices, opts: &SolveOptions) -> Result<SolveResult> {
    solve_with_bounds(prob, &prob.lower, &prob.upper, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::{Assembler, RowTag};
    use crate::index::VariableIndex;

    /// Core-index variables of the throwaway index are pinned to zero so only
    /// the named extras participate.
    fn fresh(n: usize) -> (Assembler, Vec<usize>) {
        let mut asm = Assembler::new(VariableIndex::new(1, 1, 1, 0, 0));
        for v in 0..asm.index.total() {
            asm.set_bounds(v, 0.0, 0.0);
        }
        let vars: Vec<usize> =
            (0..n).map(|i| asm.add_extra(format!("T{i}"), 0.0, f64::INFINITY)).collect();
        (asm, vars)
    }

    #[test]
    fn minimizes_over_a_simple_bound() {
        // min x subject to x ≥ 3 (as a lower bound).
        let (mut asm, v) = fresh(1);
        asm.set_bounds(v[0], 3.0, f64::INFINITY);
        asm.add_linear_cost(v[0], 1.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[v[0]] - 3.0).abs() < 1e-9, "FAIL: expected 3, got {}", r.x[v[0]]);
    }

    #[test]
    fn respects_equality_and_inequality_rows() {
        // min x + y  s.t.  x + y = 2,  x − y ≤ 0.5, x,y ≥ 0.
        let (mut asm, v) = fresh(2);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], 1.0)], 2.0);
        asm.add_le(RowTag::Pin { pin: 1 }, &[(v[0], 1.0), (v[1], -1.0)], 0.5);
        asm.add_linear_cost(v[0], 1.0);
        asm.add_linear_cost(v[1], 1.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective - 2.0).abs() < 1e-8);
        assert!(r.residuals.within(1e-7), "FAIL: residuals {:?}", r.residuals);
    }

    #[test]
    fn detects_infeasibility() {
        // x ≤ 1 and x ≥ 2 simultaneously.
        let (mut asm, v) = fresh(1);
        asm.set_bounds(v[0], 2.0, f64::INFINITY);
        asm.add_le(RowTag::Pin { pin: 0 }, &[(v[0], 1.0)], 1.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        let (mut asm, v) = fresh(1);
        asm.add_linear_cost(v[0], -1.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Unbounded);
    }

    #[test]
    fn handles_upper_bounded_maximization_pattern() {
        // min −x − 2y  s.t.  x + y ≤ 4, x ≤ 3, y ≤ 2.5 → x=1.5, y=2.5.
        let (mut asm, v) = fresh(2);
        asm.set_bounds(v[0], 0.0, 3.0);
        asm.set_bounds(v[1], 0.0, 2.5);
        asm.add_le(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], 1.0)], 4.0);
        asm.add_linear_cost(v[0], -1.0);
        asm.add_linear_cost(v[1], -2.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective - (-6.5)).abs() < 1e-8, "FAIL: objective {}", r.objective);
        assert!((r.x[v[0]] - 1.5).abs() < 1e-8);
        assert!((r.x[v[1]] - 2.5).abs() < 1e-8);
    }

    #[test]
    fn free_variables_take_negative_values() {
        // min y s.t. y ≥ x − 4, x = 1 → y = −3 with y free.
        let (mut asm, v) = fresh(2);
        asm.set_bounds(v[0], 1.0, 1.0);
        asm.set_bounds(v[1], f64::NEG_INFINITY, f64::INFINITY);
        // y ≥ x − 4  ⇔  x − y ≤ 4.
        asm.add_le(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], -1.0)], 4.0);
        asm.add_linear_cost(v[1], 1.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[v[1]] + 3.0).abs() < 1e-8, "FAIL: y = {}", r.x[v[1]]);
    }

    #[test]
    fn degenerate_equality_system_is_certified_feasible() {
        // Redundant equalities pinning a single point.
        let (mut asm, v) = fresh(2);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], 1.0)], 2.0);
        asm.add_eq(RowTag::Pin { pin: 1 }, &[(v[0], 2.0), (v[1], 2.0)], 4.0);
        asm.add_eq(RowTag::Pin { pin: 2 }, &[(v[0], 1.0), (v[1], -1.0)], 0.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[v[0]] - 1.0).abs() < 1e-8);
        assert!((r.x[v[1]] - 1.0).abs() < 1e-8);
        assert!(r.residuals.within(1e-7));
    }

    #[test]
    fn duals_price_the_binding_equality() {
        // min x + 3y s.t. x + y = 5 → all mass on x, dual = 1.
        let (mut asm, v) = fresh(2);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], 1.0)], 5.0);
        asm.add_linear_cost(v[0], 1.0);
        asm.add_linear_cost(v[1], 3.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        let y = r.eq_duals.unwrap();
        assert!((y[0] - 1.0).abs() < 1e-8, "FAIL: dual {}", y[0]);
    }
}
