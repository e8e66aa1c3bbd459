//! Independent-subproblem splitter.
//!
//! Variables are joined whenever they share a row, a quadratic constraint, or
//! a quadratic objective term; each resulting component is solved on its own
//! and the pieces are merged back, duals included. With vehicle variables
//! held fixed the day-cycle problem falls apart into one small grid problem
//! per firing step, which is the path the dispatch pipeline uses.

use super::{residual_summary, SolveOptions, SolveResult, Status};
use crate::assemble::{Assembler, ProblemMatrices, QuadConstraint};
use crate::error::{Error, Result};
use crate::index::VariableIndex;
use crate::lp::{merge_linear, merge_quad};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = v;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }
    fn join(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Lower root wins, keeping component identity deterministic.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// One connected piece of the problem: the variables it owns (original
/// indices, ascending) and the rows it captured.
pub struct Component {
    pub vars: Vec<usize>,
    pub eq_rows: Vec<usize>,
    pub le_rows: Vec<usize>,
    pub quad_rows: Vec<usize>,
    pub prob: ProblemMatrices,
}

fn join_all(uf: &mut UnionFind, vars: &[usize]) {
    for w in vars.windows(2) {
        uf.join(w[0], w[1]);
    }
}

/// Split `prob` into connected components over the given bounds. Untouched
/// variables (no rows, no quadratic terms) are not returned as components;
/// `solve_split` resolves them directly from their cost sign.
pub fn split(prob: &ProblemMatrices, lower: &[f64], upper: &[f64]) -> Result<Vec<Component>> {
    let n = prob.n_vars;
    let mut uf = UnionFind::new(n);
    let mut touched = vec![false; n];

    let mut eq_vars: Vec<Vec<(usize, f64)>> = Vec::with_capacity(prob.eq_rhs.len());
    for r in 0..prob.eq_rhs.len() {
        let terms: Vec<(usize, f64)> =
            prob.eq.row(r).filter(|&(_, c)| c != 0.0).collect();
        for &(v, _) in &terms {
            touched[v] = true;
        }
        join_all(&mut uf, &terms.iter().map(|&(v, _)| v).collect::<Vec<_>>());
        eq_vars.push(terms);
    }
    let mut le_vars: Vec<Vec<(usize, f64)>> = Vec::with_capacity(prob.le_rhs.len());
    for r in 0..prob.le_rhs.len() {
        let terms: Vec<(usize, f64)> =
            prob.le.row(r).filter(|&(_, c)| c != 0.0).collect();
        for &(v, _) in &terms {
            touched[v] = true;
        }
        join_all(&mut uf, &terms.iter().map(|&(v, _)| v).collect::<Vec<_>>());
        le_vars.push(terms);
    }
    for qc in &prob.quad_constraints {
        let mut vs: Vec<usize> = qc.quad.terms.iter().flat_map(|&(i, j, _)| [i, j]).collect();
        vs.extend(qc.linear.iter().map(|&(v, _)| v));
        for &v in &vs {
            touched[v] = true;
        }
        join_all(&mut uf, &vs);
    }
    for &(i, j, c) in &prob.objective.quad.terms {
        if c != 0.0 {
            touched[i] = true;
            touched[j] = true;
            uf.join(i, j);
        }
    }

    // Group variables by root, skipping untouched singletons.
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for v in 0..n {
        if touched[v] {
            groups.entry(uf.find(v)).or_default().push(v);
        }
    }

    let mut linear_cost = vec![0.0; n];
    for (v, c) in merge_linear(&prob.objective.linear) {
        linear_cost[v] = c;
    }

    let mut comps = Vec::with_capacity(groups.len());
    for (&root, vars) in &groups {
        let mut local = vec![usize::MAX; n];
        for (new, &old) in vars.iter().enumerate() {
            local[old] = new;
        }
        let mut asm = Assembler::new(VariableIndex::new(0, 0, 0, 0, 0));
        for &old in vars {
            let v = asm.add_extra(prob.var_name(old), lower[old], upper[old]);
            debug_assert_eq!(v, local[old]);
            if prob.binary[old] {
                asm.set_binary(v);
            }
            if linear_cost[old] != 0.0 {
                asm.add_linear_cost(v, linear_cost[old]);
            }
        }
        for (i, j, c) in merge_quad(&prob.objective.quad.terms) {
            if c != 0.0 && local[i] != usize::MAX && local[j] != usize::MAX {
                asm.add_quad_cost(local[i], local[j], c);
            }
        }

        let mut eq_rows = Vec::new();
        for (r, terms) in eq_vars.iter().enumerate() {
            if terms.first().map_or(false, |&(v, _)| uf.find(v) == root) {
                let mapped: Vec<(usize, f64)> =
                    terms.iter().map(|&(v, c)| (local[v], c)).collect();
                asm.add_eq(prob.eq_tags[r].clone(), &mapped, prob.eq_rhs[r]);
                eq_rows.push(r);
            }
        }
        let mut le_rows = Vec::new();
        for (r, terms) in le_vars.iter().enumerate() {
            if terms.first().map_or(false, |&(v, _)| uf.find(v) == root) {
                let mapped: Vec<(usize, f64)> =
                    terms.iter().map(|&(v, c)| (local[v], c)).collect();
                asm.add_le(prob.le_tags[r].clone(), &mapped, prob.le_rhs[r]);
                le_rows.push(r);
            }
        }
        let mut quad_rows = Vec::new();
        for (qi, qc) in prob.quad_constraints.iter().enumerate() {
            let owner = qc
                .quad
                .terms
                .first()
                .map(|&(i, _, _)| i)
                .or_else(|| qc.linear.first().map(|&(v, _)| v));
            if owner.map_or(false, |v| uf.find(v) == root) {
                asm.add_quad_constraint(QuadConstraint {
                    tag: qc.tag.clone(),
                    quad: crate::assemble::QuadForm {
                        terms: qc
                            .quad
                            .terms
                            .iter()
                            .map(|&(i, j, c)| (local[i], local[j], c))
                            .collect(),
                    },
                    linear: qc.linear.iter().map(|&(v, c)| (local[v], c)).collect(),
                    rhs: qc.rhs,
                });
                quad_rows.push(qi);
            }
        }
        comps.push(Component {
            vars: vars.clone(),
            eq_rows,
            le_rows,
            quad_rows,
            prob: asm.finish(),
        });
    }

    // Empty rows belong to no component; they must hold identically.
    for (r, terms) in eq_vars.iter().enumerate() {
        if terms.is_empty() && prob.eq_rhs[r].abs() > 1e-9 {
            return Err(Error::Structure(format!(
                "equality row {} has no variables and nonzero target {}",
                prob.eq_tags[r].describe(),
                prob.eq_rhs[r]
            )));
        }
    }
    for (r, terms) in le_vars.iter().enumerate() {
        if terms.is_empty() && prob.le_rhs[r] < -1e-9 {
            return Err(Error::Structure(format!(
                "inequality row {} has no variables and negative cap {}",
                prob.le_tags[r].describe(),
                prob.le_rhs[r]
            )));
        }
    }
    Ok(comps)
}

/// Solve each component with `solver` and merge the pieces back together.
/// Untouched variables are placed at the bound their cost prefers.
pub fn solve_split<F>(
    prob: &ProblemMatrices,
    lower: &[f64],
    upper: &[f64],
    opts: &SolveOptions,
    solver: F,
) -> Result<SolveResult>
where
    F: Fn(&ProblemMatrices, &SolveOptions) -> Result<SolveResult>,
{
    let comps = split(prob, lower, upper)?;
    let n = prob.n_vars;
    let mut x = vec![0.0; n];
    let mut in_component = vec![false; n];
    let mut eq_duals = vec![0.0; prob.eq_rhs.len()];
    let mut have_duals = true;
    let mut nodes = 0;
    let mut wall = 0.0;

    for comp in &comps {
        let res = solver(&comp.prob, opts)?;
        nodes += res.nodes;
        wall += res.wall_secs;
        match res.status {
            Status::Optimal => {}
            Status::Infeasible => {
                return Ok(SolveResult {
                    status: Status::Infeasible,
                    wall_secs: wall,
                    nodes,
                    ..SolveResult::infeasible()
                })
            }
            Status::Unbounded => {
                return Ok(SolveResult {
                    status: Status::Unbounded,
                    x: Vec::new(),
                    objective: f64::NEG_INFINITY,
                    residuals: Default::default(),
                    nodes,
                    wall_secs: wall,
                    eq_duals: None,
                })
            }
            Status::Limit => {
                return Ok(SolveResult {
                    status: Status::Limit,
                    x: Vec::new(),
                    objective: f64::INFINITY,
                    residuals: Default::default(),
                    nodes,
                    wall_secs: wall,
                    eq_duals: None,
                })
            }
        }
        for (new, &old) in comp.vars.iter().enumerate() {
            x[old] = res.x[new];
            in_component[old] = true;
        }
        match &res.eq_duals {
            Some(d) => {
                for (sub, &orig) in comp.eq_rows.iter().enumerate() {
                    eq_duals[orig] = d[sub];
                }
            }
            None => have_duals = false,
        }
    }

    // Variables no constraint touches: cost sign decides the bound.
    let mut linear_cost = vec![0.0; n];
    for (v, c) in merge_linear(&prob.objective.linear) {
        linear_cost[v] = c;
    }
    for v in 0..n {
        if in_component[v] {
            continue;
        }
        let c = linear_cost[v];
        x[v] = if c > 0.0 {
            if lower[v].is_finite() {
                lower[v]
            } else {
                return Ok(SolveResult {
                    status: Status::Unbounded,
                    x: Vec::new(),
                    objective: f64::NEG_INFINITY,
                    residuals: Default::default(),
                    nodes,
                    wall_secs: wall,
                    eq_duals: None,
                });
            }
        } else if c < 0.0 {
            if upper[v].is_finite() {
                upper[v]
            } else {
                return Ok(SolveResult {
                    status: Status::Unbounded,
                    x: Vec::new(),
                    objective: f64::NEG_INFINITY,
                    residuals: Default::default(),
                    nodes,
                    wall_secs: wall,
                    eq_duals: None,
                });
            }
        } else {
            0.0_f64.clamp(lower[v].max(f64::NEG_INFINITY), upper[v].min(f64::INFINITY))
        };
        if prob.binary[v] {
            x[v] = x[v].round();
        }
    }

    let mut check = prob.clone();
    check.lower = lower.to_vec();
    check.upper = upper.to_vec();
    let residuals = residual_summary(&check, &x);
    let objective = prob.objective.eval(&x);
    Ok(SolveResult {
        status: Status::Optimal,
        x,
        objective,
        residuals,
        nodes,
        wall_secs: wall,
        eq_duals: if have_duals { Some(eq_duals) } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::RowTag;
    use crate::solve::{ipm, simplex};

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
    fn disjoint_blocks_are_found() {
        // Two separate 2-variable blocks plus one untouched variable.
        let (mut asm, v) = fresh(5);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], 1.0)], 1.0);
        asm.add_eq(RowTag::Pin { pin: 1 }, &[(v[2], 1.0), (v[3], 1.0)], 2.0);
        asm.add_linear_cost(v[4], 1.0);
        let prob = asm.finish();
        let comps = split(&prob, &prob.lower, &prob.upper).unwrap();
        // The pinned core variables are all fixed at zero and never appear in
        // rows, so exactly the two blocks emerge.
        assert_eq!(comps.len(), 2, "FAIL: expected 2 components");
        assert_eq!(comps[0].vars, vec![v[0], v[1]]);
        assert_eq!(comps[1].vars, vec![v[2], v[3]]);
    }

    #[test]
    fn split_solution_matches_whole_problem_solution() {
        let (mut asm, v) = fresh(4);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], 1.0)], 2.0);
        asm.add_le(RowTag::Pin { pin: 1 }, &[(v[2], 1.0), (v[3], 1.0)], 3.0);
        asm.add_linear_cost(v[0], 1.0);
        asm.add_linear_cost(v[1], 2.0);
        asm.add_linear_cost(v[2], -1.0);
        asm.set_bounds(v[2], 0.0, 2.0);
        let prob = asm.finish();
        let whole = simplex::solve(&prob, &SolveOptions::default()).unwrap();
        let split_res = solve_split(
            &prob,
            &prob.lower,
            &prob.upper,
            &SolveOptions::default(),
            |p, o| simplex::solve(p, o),
        )
        .unwrap();
        assert_eq!(split_res.status, Status::Optimal);
        assert!(
            (whole.objective - split_res.objective).abs() < 1e-8,
            "FAIL: whole {} vs split {}",
            whole.objective,
            split_res.objective
        );
        assert!(split_res.residuals.within(1e-7));
    }

    #[test]
    fn duals_map_back_to_original_rows() {
        // Second block's equality gets dual −2·x*/1 under L = f + ν(Ax−b):
        // min x² s.t. x = 3 in block B, plus an unrelated block A.
        let (mut asm, v) = fresh(3);
        asm.set_bounds(v[2], f64::NEG_INFINITY, f64::INFINITY);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], 1.0)], 1.0);
        asm.add_eq(RowTag::Pin { pin: 1 }, &[(v[2], 1.0)], 3.0);
        asm.add_quad_cost(v[2], v[2], 1.0);
        asm.add_linear_cost(v[0], 1.0);
        let prob = asm.finish();
        let res = solve_split(
            &prob,
            &prob.lower,
            &prob.upper,
            &SolveOptions::default(),
            |p, o| ipm::solve(p, o),
        )
        .unwrap();
        assert_eq!(res.status, Status::Optimal);
        assert!((res.x[v[2]] - 3.0).abs() < 1e-5);
        let duals = res.eq_duals.expect("duals");
        // ∇(x²) + ν = 0 at x = 3 → ν = −6.
        assert!((duals[1] + 6.0).abs() < 1e-4, "FAIL: dual {}", duals[1]);
    }

    #[test]
    fn quadratic_objective_terms_join_variables() {
        let (mut asm, v) = fresh(2);
        asm.add_quad_cost(v[0], v[1], 0.5);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0)], 1.0);
        let prob = asm.finish();
        let comps = split(&prob, &prob.lower, &prob.upper).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].vars, vec![v[0], v[1]]);
    }

    #[test]
    fn untouched_variable_with_negative_cost_and_no_cap_is_unbounded() {
        let (mut asm, v) = fresh(2);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0)], 1.0);
        asm.add_linear_cost(v[1], -1.0);
        let prob = asm.finish();
        let res = solve_split(
            &prob,
            &prob.lower,
            &prob.upper,
            &SolveOptions::default(),
            |p, o| simplex::solve(p, o),
        )
        .unwrap();
        assert_eq!(res.status, Status::Unbounded);
    }
}
