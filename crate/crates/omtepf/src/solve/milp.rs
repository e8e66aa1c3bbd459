//! Branch and bound over binary variables.
//!
//! Nodes carry only their bound vectors; the constraint matrices are shared
//! by reference with the node solver. Search order is deterministic:
//! depth-first, branching on the most fractional binary (lowest index on
//! ties), down-branch explored first.

use super::{ipm, residual_summary, simplex, SolveOptions, SolveResult, Status};
use crate::assemble::ProblemMatrices;
use crate::error::{Error, Result};
use std::time::Instant;

/// Which relaxation is solved at each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSolver {
    /// Pure linear relaxations (two-phase simplex).
    Linear,
    /// Quadratic objective and/or quadratic constraints (interior point).
    Convex,
}

struct Node {
    lower: Vec<f64>,
    upper: Vec<f64>,
    depth: usize,
}

fn solve_node(
    prob: &ProblemMatrices,
    node: &Node,
    opts: &SolveOptions,
    which: NodeSolver,
) -> Result<SolveResult> {
    match which {
        NodeSolver::Linear => simplex::solve_with_bounds(prob, &node.lower, &node.upper, opts),
        NodeSolver::Convex => ipm::solve_with_bounds(prob, &node.lower, &node.upper, opts),
    }
}

/// Most fractional binary, lowest index on ties. `None` when integral.
fn pick_branch(prob: &ProblemMatrices, x: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (v, &is_bin) in prob.binary.iter().enumerate() {
        if !is_bin {
            continue;
        }
        let frac = (x[v] - x[v].round()).abs();
        if frac > tol {
            // Distance from the most-fractional point; strictly smaller wins,
            // so ties keep the lowest index.
            let dist = (0.5 - frac).abs();
            match best {
                Some((_, d)) if dist >= d => {}
                _ => best = Some((v, dist)),
            }
        }
    }
    best.map(|(v, _)| v)
}

/// Round the relaxation's binaries, re-solve with them fixed, and accept the
/// result only if it is genuinely integral-feasible. Used to certify every
/// incumbent against an independent residual check.
fn certify_incumbent(
    prob: &ProblemMatrices,
    node: &Node,
    x: &[f64],
    opts: &SolveOptions,
    which: NodeSolver,
) -> Result<Option<SolveResult>> {
    let mut lower = node.lower.clone();
    let mut upper = node.upper.clone();
    for (v, &is_bin) in prob.binary.iter().enumerate() {
        if !is_bin {
            continue;
        }
        let r = x[v].round();
        if r < lower[v] - opts.int_tol || r > upper[v] + opts.int_tol {
            return Ok(None);
        }
        lower[v] = r;
        upper[v] = r;
    }
    let fixed = Node { lower, upper, depth: node.depth };
    let res = solve_node(prob, &fixed, opts, which)?;
    if res.status != Status::Optimal {
        return Ok(None);
    }
    let mut check = prob.clone();
    check.lower = fixed.lower.clone();
    check.upper = fixed.upper.clone();
    let resid = residual_summary(&check, &res.x);
    if !resid.within(opts.audit_tol.max(opts.feas_tol * 10.0)) {
        return Ok(None);
    }
    Ok(Some(res))
}

/// Depth-first branch and bound. Returns the incumbent with `Status::Limit`
/// when node or time limits interrupt the proof of optimality.
pub fn branch_and_bound(
    prob: &ProblemMatrices,
    opts: &SolveOptions,
    which: NodeSolver,
) -> Result<SolveResult> {
    let start = Instant::now();
    if prob.binary.len() != prob.n_vars {
        return Err(Error::Structure(format!(
            "binary marker vector has {} entries for {} variables",
            prob.binary.len(),
            prob.n_vars
        )));
    }

    let mut stack = vec![Node {
        lower: prob.lower.clone(),
        upper: prob.upper.clone(),
        depth: 0,
    }];
    let mut incumbent: Option<SolveResult> = None;
    let mut nodes: usize = 0;
    let mut limit_hit = false;

    while let Some(node) = stack.pop() {
        if nodes >= opts.node_limit {
            limit_hit = true;
            break;
        }
        if start.elapsed().as_secs_f64() > opts.time_limit {
            limit_hit = true;
            break;
        }
        nodes += 1;

        let relax = solve_node(prob, &node, opts, which)?;
        match relax.status {
            Status::Infeasible => continue,
            Status::Unbounded => {
                // An unbounded relaxation at the root means the integer
                // problem is unbounded or ill-posed; deeper nodes only
                // tighten bounds, so propagate.
                return Ok(SolveResult {
                    status: Status::Unbounded,
                    nodes,
                    wall_secs: start.elapsed().as_secs_f64(),
                    ..relax
                });
            }
            Status::Limit => {
                limit_hit = true;
                continue;
            }
            Status::Optimal => {}
        }

        // Prune against the incumbent (relative gap on the node bound).
        if let Some(inc) = &incumbent {
            let cutoff = inc.objective - opts.rel_gap * inc.objective.abs().max(1.0);
            if relax.objective >= cutoff {
                continue;
            }
        }

        match pick_branch(prob, &relax.x, opts.int_tol) {
            None => {
                if let Some(cert) = certify_incumbent(prob, &node, &relax.x, opts, which)? {
                    let better = incumbent
                        .as_ref()
                        .map_or(true, |inc| cert.objective < inc.objective - 1e-12);
                    if better {
                        incumbent = Some(cert);
                    }
                }
            }
            Some(v) => {
                let floor = relax.x[v].floor();
                // Down branch is explored first: push up, then down (stack).
                let mut up = Node {
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                    depth: node.depth + 1,
                };
                up.lower[v] = floor + 1.0;
                let mut down = node;
                down.upper[v] = floor;
                down.depth += 1;
                stack.push(up);
                stack.push(down);
            }
        }
    }

    let wall = start.elapsed().as_secs_f64();
    match incumbent {
        Some(mut inc) => {
            inc.status = if limit_hit { Status::Limit } else { Status::Optimal };
            inc.nodes = nodes;
            inc.wall_secs = wall;
            Ok(inc)
        }
        None => Ok(SolveResult {
            status: if limit_hit { Status::Limit } else { Status::Infeasible },
            x: Vec::new(),
            objective: f64::INFINITY,
            residuals: Default::default(),
            nodes,
            wall_secs: wall,
            eq_duals: None,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::{Assembler, RowTag};
    use crate::index::VariableIndex;

    fn fresh(n: usize) -> (Assembler, Vec<usize>) {
        let mut asm = Assembler::new(VariableIndex::new(1, 1, 1, 0, 0));
        for v in 0..asm.index.total() {
            asm.set_bounds(v, 0.0, 0.0);
        }
        let vars: Vec<usize> =
            (0..n).map(|i| asm.add_extra(format!("T{i}"), 0.0, 1.0)).collect();
        (asm, vars)
    }

    /// Exhaustive-reference knapsack: max value under a weight cap, solved
    /// here as min of the negated value.
    fn knapsack_best(values: &[f64], weights: &[f64], cap: f64) -> f64 {
        let n = values.len();
        let mut best = 0.0_f64;
        for mask in 0..(1u32 << n) {
            let (mut v, mut w) = (0.0, 0.0);
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    v += values[i];
                    w += weights[i];
                }
            }
            if w <= cap + 1e-9 {
                best = best.max(v);
            }
        }
        best
    }

    #[test]
    fn knapsack_matches_exhaustive_reference() {
        let values = [6.0, 5.0, 4.0, 3.0, 7.0, 2.0];
        let weights = [4.0, 3.0, 2.0, 1.0, 5.0, 1.0];
        let cap = 8.0;
        let (mut asm, v) = fresh(values.len());
        let terms: Vec<(usize, f64)> =
            v.iter().zip(weights.iter()).map(|(&var, &w)| (var, w)).collect();
        asm.add_le(RowTag::Pin { pin: 0 }, &terms, cap);
        for (i, &var) in v.iter().enumerate() {
            asm.set_binary(var);
            asm.add_linear_cost(var, -values[i]);
        }
        let r =
            branch_and_bound(&asm.finish(), &SolveOptions::default(), NodeSolver::Linear).unwrap();
        assert_eq!(r.status, Status::Optimal);
        let expect = -knapsack_best(&values, &weights, cap);
        assert!(
            (r.objective - expect).abs() < 1e-6,
            "FAIL: branch-and-bound {} vs exhaustive {}",
            r.objective,
            expect
        );
        for &var in &v {
            assert!((r.x[var] - r.x[var].round()).abs() < 1e-6, "FAIL: fractional {}", r.x[var]);
        }
    }

    #[test]
    fn integral_relaxation_needs_one_node() {
        // Totally unimodular: x0 + x1 = 1 with distinct costs.
        let (mut asm, v) = fresh(2);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], 1.0)], 1.0);
        asm.set_binary(v[0]);
        asm.set_binary(v[1]);
        asm.add_linear_cost(v[0], 2.0);
        asm.add_linear_cost(v[1], 1.0);
        let r =
            branch_and_bound(&asm.finish(), &SolveOptions::default(), NodeSolver::Linear).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert_eq!(r.nodes, 1, "FAIL: integral root should close the search");
        assert!((r.objective - 1.0).abs() < 1e-8);
    }

    #[test]
    fn infeasible_integer_problem_is_reported() {
        // 2x0 + 2x1 = 3 has no 0/1 solution (relaxation is feasible).
        let (mut asm, v) = fresh(2);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 2.0), (v[1], 2.0)], 3.0);
        asm.set_binary(v[0]);
        asm.set_binary(v[1]);
        asm.add_linear_cost(v[0], 1.0);
        let r =
            branch_and_bound(&asm.finish(), &SolveOptions::default(), NodeSolver::Linear).unwrap();
        assert_eq!(r.status, Status::Infeasible);
    }

    #[test]
    fn node_limit_yields_limit_status() {
        let values = [6.0, 5.0, 4.0, 3.0, 7.0, 2.0, 9.0, 1.0];
        let weights = [4.0, 3.0, 2.0, 1.0, 5.0, 1.0, 6.0, 1.0];
        let (mut asm, v) = fresh(values.len());
        let terms: Vec<(usize, f64)> =
            v.iter().zip(weights.iter()).map(|(&var, &w)| (var, w)).collect();
        asm.add_le(RowTag::Pin { pin: 0 }, &terms, 9.5);
        for (i, &var) in v.iter().enumerate() {
            asm.set_binary(var);
            asm.add_linear_cost(var, -values[i]);
        }
        let opts = SolveOptions { node_limit: 1, ..SolveOptions::default() };
        let r = branch_and_bound(&asm.finish(), &opts, NodeSolver::Linear).unwrap();
        assert_eq!(r.status, Status::Limit);
    }

    #[test]
    fn relaxation_bound_never_exceeds_integer_optimum() {
        let values = [6.0, 5.0, 4.0, 3.0];
        let weights = [4.0, 3.0, 2.0, 1.0];
        let cap = 5.0;
        let (mut asm, v) = fresh(values.len());
        let terms: Vec<(usize, f64)> =
            v.iter().zip(weights.iter()).map(|(&var, &w)| (var, w)).collect();
        asm.add_le(RowTag::Pin { pin: 0 }, &terms, cap);
        for (i, &var) in v.iter().enumerate() {
            asm.set_binary(var);
            asm.add_linear_cost(var, -values[i]);
        }
        let prob = asm.finish();
        let relax = simplex::solve(&prob, &SolveOptions::default()).unwrap();
        let exact =
            branch_and_bound(&prob, &SolveOptions::default(), NodeSolver::Linear).unwrap();
        assert!(
            relax.objective <= exact.objective + 1e-9,
            "FAIL: relaxation {} above integer optimum {}",
            relax.objective,
            exact.objective
        );
    }
}
