//! Solver stack: bounded-variable two-phase simplex for linear programs,
//! branch-and-bound for integrality (shared by the linear and convex paths),
//! a primal-dual interior-point method for the convex quadratically
//! constrained programs, an independent connected-component splitter, and the
//! external-solver path over the plain-text interchange format.
//!
//! Every result labeled optimal passes an independent residual audit computed
//! outside the solver loop; callers never trust a solver's own bookkeeping.

pub mod components;
pub mod external;
pub mod ipm;
pub mod milp;
pub mod simplex;

pub use external::solve_external;
pub use milp::{branch_and_bound, NodeSolver};

use crate::assemble::ProblemMatrices;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tie-break rule for branching-variable selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    /// Most fractional first, lowest index on ties — the deterministic
    /// default.
    LowestIndex,
}

/// Centralized solver options; all tolerances live here.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Primal/dual feasibility for the simplex (basic solutions).
    pub feas_tol: f64,
    /// KKT residual target for the interior-point method.
    pub kkt_tol: f64,
    /// Integrality tolerance for branch-and-bound incumbents.
    pub int_tol: f64,
    /// Relative optimality gap at which branch-and-bound stops.
    pub rel_gap: f64,
    /// Node budget for branch-and-bound.
    pub node_limit: usize,
    /// Wall-clock budget in seconds.
    pub time_limit: f64,
    /// Branching tie-break rule.
    pub tie_break: TieBreak,
    /// Worker count. Only 1 is implemented; kept for interface stability.
    pub threads: usize,
    /// Tolerance of the independent residual audit.
    pub audit_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            feas_tol: 1e-7,
            kkt_tol: 1e-6,
            int_tol: 1e-6,
            rel_gap: 1e-6,
            node_limit: 200_000,
            time_limit: 1800.0,
            tie_break: TieBreak::LowestIndex,
            threads: 1,
            audit_tol: 1e-6,
        }
    }
}

/// A problem plus the options to solve it with. Variable kinds (binary flags
/// and bounds) travel inside the matrices.
#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub prob: ProblemMatrices,
    pub options: SolveOptions,
}

impl SolveRequest {
    pub fn new(prob: ProblemMatrices) -> SolveRequest {
        SolveRequest { prob, options: SolveOptions::default() }
    }

    /// Binary variables must have bounds within [0, 1].
    pub fn validate(&self) -> Result<()> {
        for v in 0..self.prob.n_vars {
            if self.prob.binary[v]
                && (self.prob.lower[v] < -0.0 || self.prob.upper[v] > 1.0)
            {
                return Err(Error::Structure(format!(
                    "binary variable {} has bounds [{}, {}] outside [0, 1]",
                    self.prob.var_name(v),
                    self.prob.lower[v],
                    self.prob.upper[v]
                )));
            }
        }
        Ok(())
    }
}

/// Terminal solver status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// Node or time budget exhausted; the result carries the incumbent if one
    /// exists.
    Limit,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::Limit => "limit",
        }
    }

    pub fn from_str(s: &str) -> Result<Status> {
        match s {
            "optimal" => Ok(Status::Optimal),
            "infeasible" => Ok(Status::Infeasible),
            "unbounded" => Ok(Status::Unbounded),
            "limit" => Ok(Status::Limit),
            other => Err(Error::Parse(format!("unknown status '{other}'"))),
        }
    }
}

/// Worst violation per constraint family, computed independently of any
/// solver internals.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub equality: f64,
    pub inequality: f64,
    pub bounds: f64,
    pub integrality: f64,
    pub quadratic: f64,
}

impl ResidualSummary {
    pub fn worst(&self) -> f64 {
        self.equality
            .max(self.inequality)
            .max(self.bounds)
            .max(self.integrality)
            .max(self.quadratic)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

/// Compute the residual summary of `x` against `prob`.
pub fn residual_summary(prob: &ProblemMatrices, x: &[f64]) -> ResidualSummary {
    let mut r = ResidualSummary::default();
    for (row, &rhs) in prob.eq_rhs.iter().enumerate() {
        let lhs: f64 = prob.eq.row(row).map(|(c, v)| v * x[c]).sum();
        r.equality = r.equality.max((lhs - rhs).abs());
    }
    for (row, &rhs) in prob.le_rhs.iter().enumerate() {
        let lhs: f64 = prob.le.row(row).map(|(c, v)| v * x[c]).sum();
        r.inequality = r.inequality.max(lhs - rhs);
    }
    for v in 0..prob.n_vars {
        r.bounds = r.bounds.max(prob.lower[v] - x[v]).max(x[v] - prob.upper[v]);
        if prob.binary[v] {
            r.integrality = r.integrality.max((x[v] - x[v].round()).abs());
        }
    }
    for qc in &prob.quad_constraints {
        r.quadratic = r.quadratic.max(qc.eval_lhs(x) - qc.rhs);
    }
    ResidualSummary {
        equality: r.equality,
        inequality: r.inequality.max(0.0),
        bounds: r.bounds.max(0.0),
        integrality: r.integrality,
        quadratic: r.quadratic.max(0.0),
    }
}

/// Outcome of a solve: status, primal vector, objective, independent residual
/// summary, node count, and wall time. Equality-row duals are attached by the
/// interior-point path for sensitivity (cut) generation.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    pub x: Vec<f64>,
    pub objective: f64,
    pub residuals: ResidualSummary,
    pub nodes: usize,
    pub wall_secs: f64,
    pub eq_duals: Option<Vec<f64>>,
}

impl SolveResult {
    pub fn infeasible() -> SolveResult {
        SolveResult {
            status: Status::Infeasible,
            x: Vec::new(),
            objective: f64::INFINITY,
            residuals: ResidualSummary::default(),
            nodes: 0,
            wall_secs: 0.0,
            eq_duals: None,
        }
    }
}

/// Solve a pure linear program (no binaries, no quadratic terms).
pub fn solve_lp(req: &SolveRequest) -> Result<SolveResult> {
    req.validate()?;
    if req.prob.binary.iter().any(|&b| b) {
        return Err(Error::Structure("solve_lp called with binary variables".into()));
    }
    if !req.prob.objective.quad.is_empty() || !req.prob.quad_constraints.is_empty() {
        return Err(Error::Structure("solve_lp called with quadratic terms".into()));
    }
    simplex::solve(&req.prob, &req.options)
}

/// Solve a mixed-integer linear program by branch-and-bound over simplex
/// relaxations.
pub fn solve_milp(req: &SolveRequest) -> Result<SolveResult> {
    req.validate()?;
    if !req.prob.objective.quad.is_empty() || !req.prob.quad_constraints.is_empty() {
        return Err(Error::Structure("solve_milp called with quadratic terms".into()));
    }
    milp::branch_and_bound(&req.prob, &req.options, milp::NodeSolver::Linear)
}

/// Solve a convex (quadratically constrained quadratic) program with the
/// interior-point method.
pub fn solve_convex(req: &SolveRequest) -> Result<SolveResult> {
    req.validate()?;
    if req.prob.binary.iter().any(|&b| b) {
        return Err(Error::Structure("solve_convex called with binary variables".into()));
    }
    ipm::solve(&req.prob, &req.options)
}

/// Solve a mixed-integer convex program: branch-and-bound with interior-point
/// node relaxations.
pub fn solve_mi_convex(req: &SolveRequest) -> Result<SolveResult> {
    req.validate()?;
    let node = if req.prob.objective.quad.is_empty() && req.prob.quad_constraints.is_empty() {
        milp::NodeSolver::Linear
    } else {
        milp::NodeSolver::Convex
    };
    milp::branch_and_bound(&req.prob, &req.options, node)
}

/// Dispatch on problem content: integrality and quadratic terms select the
/// matching algorithm.
pub fn solve_auto(req: &SolveRequest) -> Result<SolveResult> {
    let has_bin = req.prob.binary.iter().any(|&b| b);
    let has_quad =
        !req.prob.objective.quad.is_empty() || !req.prob.quad_constraints.is_empty();
    match (has_bin, has_quad) {
        (false, false) => solve_lp(req),
        (true, false) => solve_milp(req),
        (false, true) => solve_convex(req),
        (true, true) => solve_mi_convex(req),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::{Assembler, RowTag};
    use crate::index::VariableIndex;

    #[test]
    fn residual_summary_flags_each_family() {
        let mut asm = Assembler::new(VariableIndex::new(1, 1, 1, 0, 0));
        asm.set_bounds(0, 0.0, 1.0);
        asm.set_binary(1);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(0, 1.0)], 0.5);
        asm.add_le(RowTag::Pin { pin: 1 }, &[(1, 1.0)], 0.5);
        let prob = asm.finish();
        let mut x = vec![0.0; prob.n_vars];
        x[0] = 2.0; // violates eq by 1.5 and its upper bound by 1.0
        x[1] = 0.7; // violates the inequality by 0.2 and integrality by 0.3
        let r = residual_summary(&prob, &x);
        assert!((r.equality - 1.5).abs() < 1e-12);
        assert!((r.inequality - 0.2).abs() < 1e-12);
        assert!((r.bounds - 1.0).abs() < 1e-12);
        assert!((r.integrality - 0.3).abs() < 1e-12);
        assert!(!r.within(1e-6));
    }
}
