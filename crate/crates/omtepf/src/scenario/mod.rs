//! The two day-cycle operating scenarios, end to end.
//!
//! * [`run_uncoordinated`] — movement first, charging second, grid last:
//!   a routing MILP commits every trip (with charging forbidden and the
//!   battery floor relaxed), three range-anxiety passes graft charging onto
//!   the committed movement, and the grid prices what it is handed.
//! * [`run_coordinated`] — the joint program, solved by the decomposition in
//!   [`gbd`]: a transport master carries per-step stand-ins for the grid
//!   cost, repeatedly corrected by dual-price cuts from real dispatches.
//!
//! Both return a [`ScenarioOutcome`] whose composed solution vector has been
//! audited row by row against the same canonical joint program, so their
//! objectives are directly comparable.

pub mod evaluate;
pub mod gbd;
pub mod heuristic;
pub mod opf;
pub mod report;
pub mod stage;

use std::time::Instant;

use crate::assemble::{assemble_full, assemble_transport, presolve, ProblemMatrices};
use crate::builder::{build_boundary, derive_net, Catalog};
use crate::petri::EngineeringSystemNet;
use crate::error::{Error, Result};
use crate::model::{ScenarioKind, TenModel};
use crate::solve::{
    branch_and_bound, solve_external, NodeSolver, SolveOptions, SolveResult, Status,
};

// ---------------------------------------------------------------------------
// Mixed-integer entry point
// ---------------------------------------------------------------------------

/// Which solver backs the mixed-integer stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    /// The crate's own presolve + depth-first branch and bound.
    Builtin,
    /// The configured external command (see [`crate::solve::external`]).
    External,
}

impl std::str::FromStr for SolverChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "builtin" => Ok(Self::Builtin),
            "external" => Ok(Self::External),
            other => Err(Error::Parse(format!(
                "unknown solver '{other}' (expected 'builtin' or 'external')"
            ))),
        }
    }
}

impl std::fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverChoice::Builtin => "builtin",
            SolverChoice::External => "external",
        })
    }
}

/// Solve one mixed-integer linear program and return a full-length,
/// independently audited solution.
///
/// The builtin path reduces the program first (equal-bound and alias chains
/// dominate these assemblies), branches on the remainder, and expands the
/// incumbent; the external path exports the whole program and re-imports the
/// answer.  Either way the full vector is audited against the unreduced rows
/// and the objective is re-evaluated from scratch before being returned —
/// a solver's own claims are never forwarded.
pub fn solve_milp(
    prob: &ProblemMatrices,
    opts: &SolveOptions,
    choice: SolverChoice,
) -> Result<SolveResult> {
    let mut res = match choice {
        SolverChoice::Builtin => {
            let pre = presolve(prob, opts.feas_tol)?;
            let mut r = branch_and_bound(&pre.reduced, opts, NodeSolver::Linear)?;
            if !r.x.is_empty() {
                r.x = pre.recover(&r.x);
            }
            r
        }
        SolverChoice::External => solve_external(prob, opts)?,
    };
    match res.status {
        Status::Optimal | Status::Limit => {}
        Status::Infeasible => {
            return Err(Error::Infeasible(
                "mixed-integer stage proved infeasible".into(),
            ));
        }
        Status::Unbounded => {
            return Err(Error::Unbounded("mixed-integer stage is unbounded".into()));
        }
    }
    if res.x.is_empty() {
        return Err(Error::SolverLimit(
            "mixed-integer stage hit its limit before finding any incumbent".into(),
        ));
    }
    let issues = prob.audit(&res.x, opts.audit_tol.max(1e-6));
    if !issues.is_empty() {
        return Err(Error::Audit(format!(
            "mixed-integer solution violates the program ({} issues; first: {})",
            issues.len(),
            issues[0]
        )));
    }
    res.objective = prob.objective.eval(&res.x);
    Ok(res)
}

// ---------------------------------------------------------------------------
// Scenario pipelines
// ---------------------------------------------------------------------------

/// Everything downstream layers need about one completed scenario run.
pub struct ScenarioOutcome {
    pub scenario: ScenarioKind,
    /// Solver backend the mixed-integer stages ran on.
    pub solver: SolverChoice,
    /// `Optimal`, or `Limit` when an iteration budget interrupted the proof
    /// (the solution is still feasible and audited).
    pub status: Status,
    pub schedule: stage::Schedule,
    pub trajectory: stage::Trajectory,
    pub dispatch: opf::GridDispatch,
    /// The canonical joint program the composed solution was audited against.
    pub problem: ProblemMatrices,
    /// Movement + queue cost of the committed schedule.
    pub transport_cost: f64,
    /// Joint objective (transport + grid) — the number scenarios compete on.
    pub objective: f64,
    /// Charging-pass bookkeeping (sequential pipeline only).
    pub heuristics: Option<heuristic::HeuristicReport>,
    /// Decomposition trace (coordinated pipeline only).
    pub coordination: Option<gbd::CoordinationLog>,
    pub wall_secs: f64,
}

/// Movement first, charging second, grid last.
pub fn run_uncoordinated(
    model: &TenModel,
    net: &EngineeringSystemNet,
    catalog: &Catalog,
    opts: &SolveOptions,
    choice: SolverChoice,
) -> Result<ScenarioOutcome> {
    let started = Instant::now();
    let canonical = build_boundary(model, catalog, ScenarioKind::Uncoordinated)?;

    // Stage 1: commit movement with charging forbidden.  The battery floor
    // is relaxed because the deferred charging makes honest schedules dip
    // below zero until the passes restore the energy.
    let routing = stage::routing_boundary(model, catalog, &canonical)?;
    let mut transport = assemble_transport(model, net, catalog, &routing)?;
    stage::relax_soc_floor(model, &transport.index, &mut transport.lower);
    let res = solve_milp(&transport, opts, choice)?;
    let mut sched = stage::Schedule::from_solution(
        catalog,
        model.horizon,
        &transport.index,
        &res.x,
        opts.int_tol,
    )?;

    // Stage 2: graft charging onto the committed movement.
    let heuristics = heuristic::apply_all(model, catalog, &mut sched)?;

    // Stage 3: replay under the physical battery floor, then price the grid.
    let trajectory = stage::replay(model, catalog, &sched, true)?;
    let problem = assemble_full(model, net, catalog, &canonical)?;
    let dispatch = opf::dispatch(model, catalog, &problem, &sched, &trajectory, opts)?;

    let transport_cost = evaluate::transport_cost(model, catalog, &problem.index, &dispatch.x);
    let objective = transport_cost + dispatch.step_values.iter().sum::<f64>();
    Ok(ScenarioOutcome {
        scenario: ScenarioKind::Uncoordinated,
        solver: choice,
        status: res.status,
        schedule: sched,
        trajectory,
        dispatch,
        problem,
        transport_cost,
        objective,
        heuristics: Some(heuristics),
        coordination: None,
        wall_secs: started.elapsed().as_secs_f64(),
    })
}

/// The joint program via decomposition.
pub fn run_coordinated(
    model: &TenModel,
    net: &EngineeringSystemNet,
    catalog: &Catalog,
    opts: &SolveOptions,
    choice: SolverChoice,
) -> Result<ScenarioOutcome> {
    let started = Instant::now();
    let co = gbd::run(model, net, catalog, opts, |p, o| solve_milp(p, o, choice))?;
    let transport_cost =
        evaluate::transport_cost(model, catalog, &co.problem.index, &co.dispatch.x);
    let objective = transport_cost + co.dispatch.step_values.iter().sum::<f64>();
    let status = if co.log.converged { Status::Optimal } else { Status::Limit };
    Ok(ScenarioOutcome {
        scenario: ScenarioKind::Coordinated,
        solver: choice,
        status,
        schedule: co.schedule,
        trajectory: co.trajectory,
        dispatch: co.dispatch,
        problem: co.problem,
        transport_cost,
        objective,
        heuristics: None,
        coordination: Some(co.log),
        wall_secs: started.elapsed().as_secs_f64(),
    })
}

/// Derive the net once and dispatch on the scenario kind.
pub fn run_scenario(
    model: &TenModel,
    scenario: ScenarioKind,
    opts: &SolveOptions,
    choice: SolverChoice,
) -> Result<ScenarioOutcome> {
    let (net, catalog) = derive_net(model)?;
    match scenario {
        ScenarioKind::Uncoordinated => run_uncoordinated(model, &net, &catalog, opts, choice),
        ScenarioKind::Coordinated => run_coordinated(model, &net, &catalog, opts, choice),
    }
}

// ===========================================================================
// Tests
// ===========================================================================
