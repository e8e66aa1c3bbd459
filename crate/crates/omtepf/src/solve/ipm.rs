//! Primal-dual interior-point method for convex quadratically constrained
//! quadratic programs, with a Mehrotra-style predictor-corrector step.
//!
//! The problem is treated as
//! `min ½xᵀHx + cᵀx  s.t.  Ax = b,  g(x) ≤ 0`
//! where the inequality family collects linear rows, finite variable bounds,
//! and convex quadratic constraints. Fixed variables (equal bounds) become
//! equality rows so a strictly feasible interior exists. The reduced KKT
//! system is solved densely with light primal-dual regularization, which also
//! absorbs redundant equality rows.

use super::{residual_summary, simplex, SolveOptions, SolveResult, Status};
use crate::assemble::ProblemMatrices;
use crate::error::Result;
use crate::lp::{merge_linear, merge_quad};
use std::time::Instant;

const MAX_ITER: usize = 120;
const FRACTION_TO_BOUNDARY: f64 = 0.995;
const REG_PRIMAL: f64 = 1e-9;
const REG_DUAL: f64 = 1e-9;

/// One convex inequality `½xᵀPx + qᵀx − r ≤ 0`; `hess` is the (sparse,
/// symmetric) Hessian P, empty for linear rows.
struct Ineq {
    hess: Vec<(usize, usize, f64)>,
    lin: Vec<(usize, f64)>,
    rhs: f64,
}

impl Ineq {
    fn value(&self, x: &[f64]) -> f64 {
        let quad: f64 =
            self.hess.iter().map(|&(i, j, c)| if i == j { 0.5 * c * x[i] * x[i] } else { c * x[i] * x[j] }).sum();
        let lin: f64 = self.lin.iter().map(|&(v, c)| c * x[v]).sum();
        quad + lin - self.rhs
    }

    /// Gradient accumulated into `out`.
    fn add_gradient(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        for &(i, j, c) in &self.hess {
            if i == j {
                out[i] += scale * c * x[i];
            } else {
                out[i] += scale * c * x[j];
                out[j] += scale * c * x[i];
            }
        }
        for &(v, c) in &self.lin {
            out[v] += scale * c;
        }
    }

    /// Jacobian row (dense) at `x`.
    fn gradient(&self, x: &[f64], n: usize) -> Vec<f64> {
        let mut g = vec![0.0; n];
        self.add_gradient(x, 1.0, &mut g);
        g
    }
}

/// Symmetric Hessian triplets of a quadratic form `Σ c·xᵢ·xⱼ`: diagonal
/// entries doubled, off-diagonal kept once (applied symmetrically).
fn hessian_triplets(terms: &[(usize, usize, f64)]) -> Vec<(usize, usize, f64)> {
    merge_quad(terms)
        .into_iter()
        .map(|(i, j, c)| if i == j { (i, j, 2.0 * c) } else { (i, j, c) })
        .collect()
}

/// Dense LU with partial pivoting; solves in place. Returns false when the
/// matrix is numerically singular.
fn lu_solve(mat: &mut [Vec<f64>], rhs: &mut [f64]) -> bool {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| {
                mat[a][col].abs().partial_cmp(&mat[b][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if mat[piv][col].abs() < 1e-14 {
            return false;
        }
        mat.swap(col, piv);
        rhs.swap(col, piv);
        let p = mat[col][col];
        for r in col + 1..n {
            if mat[r][col] != 0.0 {
                let f = mat[r][col] / p;
                mat[r][col] = 0.0;
                for c in col + 1..n {
                    mat[r][c] -= f * mat[col][c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    for col in (0..n).rev() {
        rhs[col] /= mat[col][col];
        let v = rhs[col];
        for r in 0..col {
            if mat[r][col] != 0.0 {
                rhs[r] -= mat[r][col] * v;
            }
        }
    }
    true
}

struct Workspace {
    n: usize,
    /// Objective Hessian (symmetric triplets, diagonal already doubled).
    hess: Vec<(usize, usize, f64)>,
    cost: Vec<f64>,
    /// Equality rows: original rows then fixed-variable pins.
    a_rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    n_orig_eq: usize,
    ineqs: Vec<Ineq>,
}

fn build_workspace(prob: &ProblemMatrices, lower: &[f64], upper: &[f64]) -> Workspace {
    let n = prob.n_vars;
    let hess = hessian_triplets(&prob.objective.quad.terms);
    let mut cost = vec![0.0; n];
    for (v, c) in merge_linear(&prob.objective.linear) {
        cost[v] = c;
    }

    let mut a_rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(prob.eq_rhs.len());
    let mut b = prob.eq_rhs.clone();
    for r in 0..prob.eq_rhs.len() {
        a_rows.push(prob.eq.row(r).collect());
    }
    let n_orig_eq = a_rows.len();

    let mut ineqs = Vec::new();
    for r in 0..prob.le_rhs.len() {
        ineqs.push(Ineq { hess: Vec::new(), lin: prob.le.row(r).collect(), rhs: prob.le_rhs[r] });
    }
    for v in 0..n {
        let (lo, hi) = (lower[v], upper[v]);
        if lo == hi {
            a_rows.push(vec![(v, 1.0)]);
            b.push(lo);
            continue;
        }
        if lo.is_finite() {
            ineqs.push(Ineq { hess: Vec::new(), lin: vec![(v, -1.0)], rhs: -lo });
        }
        if hi.is_finite() {
            ineqs.push(Ineq { hess: Vec::new(), lin: vec![(v, 1.0)], rhs: hi });
        }
    }
    for qc in &prob.quad_constraints {
        ineqs.push(Ineq {
            hess: hessian_triplets(&qc.quad.terms),
            lin: merge_linear(&qc.linear),
            rhs: qc.rhs,
        });
    }

    Workspace { n, hess, cost, a_rows, b, n_orig_eq, ineqs }
}

impl Workspace {
    fn objective_gradient(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.cost);
        for &(i, j, c) in &self.hess {
            if i == j {
                out[i] += c * x[i];
            } else {
                out[i] += c * x[j];
                out[j] += c * x[i];
            }
        }
    }

    /// r_dual = ∇f + Aᵀν + Jᵀλ.
    fn dual_residual(&self, x: &[f64], nu: &[f64], lam: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.n];
        self.objective_gradient(x, &mut r);
        for (row, terms) in self.a_rows.iter().enumerate() {
            if nu[row] != 0.0 {
                for &(v, c) in terms {
                    r[v] += nu[row] * c;
                }
            }
        }
        for (i, q) in self.ineqs.iter().enumerate() {
            if lam[i] != 0.0 {
                q.add_gradient(x, lam[i], &mut r);
            }
        }
        r
    }

    fn eq_residual(&self, x: &[f64]) -> Vec<f64> {
        self.a_rows
            .iter()
            .zip(&self.b)
            .map(|(terms, &rhs)| terms.iter().map(|&(v, c)| c * x[v]).sum::<f64>() - rhs)
            .collect()
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
}

/// Largest α ∈ (0, 1] with v + α·dv ≥ (1 − boundary_frac)·v componentwise.
fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    let mut a = 1.0_f64;
    for (&x, &dx) in v.iter().zip(dv) {
        if dx < 0.0 {
            a = a.min(-FRACTION_TO_BOUNDARY * x / dx);
        }
    }
    a.min(1.0)
}

/// Solve with bound vectors supplied by the caller (branch-and-bound nodes
/// override bounds without cloning the matrices).
pub fn solve_with_bounds(
    prob: &ProblemMatrices,
    lower: &[f64],
    upper: &[f64],
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let start = Instant::now();
    for v in 0..prob.n_vars {
        if lower[v] > upper[v] + 1e-12 {
            return Ok(SolveResult::infeasible());
        }
    }
    let w = build_workspace(prob, lower, upper);
    let n = w.n;
    let m_eq = w.a_rows.len();
    let m_in = w.ineqs.len();

    // Starting point: midpoint of finite bounds, zero otherwise.
    let mut x = vec![0.0; n];
    for v in 0..n {
        x[v] = match (lower[v].is_finite(), upper[v].is_finite()) {
            (true, true) => 0.5 * (lower[v] + upper[v]),
            (true, false) => lower[v],
            (false, true) => upper[v],
            (false, false) => 0.0,
        };
    }
    let mut nu = vec![0.0; m_eq];
    let mut lam = vec![1.0; m_in];
    let mut slack: Vec<f64> = w
        .ineqs
        .iter()
        .map(|q| {
            let g = q.value(&x);
            if g < -1.0 {
                -g
            } else {
                1.0
            }
        })
        .collect();

    // Purely equality-constrained case: one Newton solve.
    if m_in == 0 {
        let dim = n + m_eq;
        let mut mat = vec![vec![0.0; dim]; dim];
        for &(i, j, c) in &w.hess {
            mat[i][j] += c;
            if i != j {
                mat[j][i] += c;
            }
        }
        for i in 0..n {
            mat[i][i] += REG_PRIMAL;
        }
        for (row, terms) in w.a_rows.iter().enumerate() {
            for &(v, c) in terms {
                mat[n + row][v] += c;
                mat[v][n + row] += c;
            }
            mat[n + row][n + row] = -REG_DUAL;
        }
        let mut rhs = vec![0.0; dim];
        for v in 0..n {
            rhs[v] = -w.cost[v];
        }
        for (row, &bv) in w.b.iter().enumerate() {
            rhs[n + row] = bv;
        }
        if !lu_solve(&mut mat, &mut rhs) {
            return Ok(SolveResult::infeasible());
        }
        let xs = rhs[..n].to_vec();
        let residuals = residual_with_bounds(prob, lower, upper, &xs);
        let status = if residuals.within(opts.audit_tol.max(1e-6)) {
            Status::Optimal
        } else {
            Status::Infeasible
        };
        return Ok(SolveResult {
            status,
            objective: prob.objective.eval(&xs),
            x: xs,
            residuals,
            nodes: 0,
            wall_secs: start.elapsed().as_secs_f64(),
            eq_duals: Some(rhs[n..n + w.n_orig_eq].to_vec()),
        });
    }

    let data_scale = 1.0
        + inf_norm(&w.cost)
        + w.b.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));

    let mut converged = false;
    let mut iter = 0;
    while iter < MAX_ITER {
        iter += 1;
        if start.elapsed().as_secs_f64() > opts.time_limit {
            break;
        }

        let r_dual = w.dual_residual(&x, &nu, &lam);
        let r_eq = w.eq_residual(&x);
        let g_vals: Vec<f64> = w.ineqs.iter().map(|q| q.value(&x)).collect();
        let r_ineq: Vec<f64> = g_vals.iter().zip(&slack).map(|(&g, &s)| g + s).collect();
        let mu = lam.iter().zip(&slack).map(|(&l, &s)| l * s).sum::<f64>() / m_in as f64;

        let x_scale = 1.0 + inf_norm(&x);
        if inf_norm(&r_dual) <= opts.kkt_tol * (data_scale + x_scale)
            && inf_norm(&r_eq) <= opts.kkt_tol * x_scale
            && inf_norm(&r_ineq) <= opts.kkt_tol * x_scale
            && mu <= opts.kkt_tol
        {
            converged = true;
            break;
        }

        // Jacobian of the inequality family at x.
        let jac: Vec<Vec<f64>> = w.ineqs.iter().map(|q| q.gradient(&x, n)).collect();

        // Reduced KKT matrix: [H + Σλ∇²g + JᵀDJ + δI, Aᵀ; A, −δI].
        let dim = n + m_eq;
        let mut base = vec![vec![0.0; dim]; dim];
        for &(i, j, c) in &w.hess {
            base[i][j] += c;
            if i != j {
                base[j][i] += c;
            }
        }
        for (qi, q) in w.ineqs.iter().enumerate() {
            if !q.hess.is_empty() {
                let l = lam[qi];
                for &(i, j, c) in &q.hess {
                    base[i][j] += l * c;
                    if i != j {
                        base[j][i] += l * c;
                    }
                }
            }
        }
        for (qi, row) in jac.iter().enumerate() {
            let d = lam[qi] / slack[qi];
            // Most rows are sparse (bounds, linear rows); skip zeros.
            for i in 0..n {
                if row[i] == 0.0 {
                    continue;
                }
                let di = d * row[i];
                for j in 0..n {
                    if row[j] != 0.0 {
                        base[i][j] += di * row[j];
                    }
                }
            }
        }
        for i in 0..n {
            base[i][i] += REG_PRIMAL;
        }
        for (row, terms) in w.a_rows.iter().enumerate() {
            for &(v, c) in terms {
                base[n + row][v] += c;
                base[v][n + row] += c;
            }
            base[n + row][n + row] = -REG_DUAL;
        }

        // Affine predictor: target complementarity zero.
        let solve_step = |mat_base: &Vec<Vec<f64>>,
                          r_comp: &[f64]|
         -> Option<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
            let mut rhs = vec![0.0; dim];
            for v in 0..n {
                rhs[v] = -r_dual[v];
            }
            for (qi, row) in jac.iter().enumerate() {
                // Jᵀ S⁻¹ (r_comp − λ∘r_ineq)
                let coef = (r_comp[qi] - lam[qi] * r_ineq[qi]) / slack[qi];
                if coef != 0.0 {
                    for i in 0..n {
                        if row[i] != 0.0 {
                            rhs[i] += coef * row[i];
                        }
                    }
                }
            }
            for row in 0..m_eq {
                rhs[n + row] = -r_eq[row];
            }
            let mut mat = mat_base.clone();
            if !lu_solve(&mut mat, &mut rhs) {
                return None;
            }
            let dx = rhs[..n].to_vec();
            let dnu = rhs[n..].to_vec();
            let mut ds = vec![0.0; m_in];
            let mut dl = vec![0.0; m_in];
            for qi in 0..m_in {
                let jdx: f64 = jac[qi].iter().zip(&dx).map(|(&a, &b)| a * b).sum();
                ds[qi] = -r_ineq[qi] - jdx;
                dl[qi] = -(r_comp[qi] + lam[qi] * ds[qi]) / slack[qi];
            }
            Some((dx, dnu, ds, dl))
        };

        let r_comp_aff: Vec<f64> = lam.iter().zip(&slack).map(|(&l, &s)| l * s).collect();
        let Some((_dx_a, _dnu_a, ds_a, dl_a)) = solve_step(&base, &r_comp_aff) else {
            break;
        };
        let alpha_p_aff = max_step(&slack, &ds_a);
        let alpha_d_aff = max_step(&lam, &dl_a);
        let mu_aff = (0..m_in)
            .map(|i| (slack[i] + alpha_p_aff * ds_a[i]) * (lam[i] + alpha_d_aff * dl_a[i]))
            .sum::<f64>()
            / m_in as f64;
        let sigma = (mu_aff / mu).max(0.0).powi(3).min(1.0);

        // Corrector: recentre and compensate the affine cross terms.
        let r_comp: Vec<f64> = (0..m_in)
            .map(|i| lam[i] * slack[i] - sigma * mu + ds_a[i] * dl_a[i])
            .collect();
        let Some((dx, dnu, ds, dl)) = solve_step(&base, &r_comp) else {
            break;
        };
        let alpha_p = max_step(&slack, &ds);
        let alpha_d = max_step(&lam, &dl);
        let alpha = alpha_p.min(alpha_d);

        for v in 0..n {
            x[v] += alpha * dx[v];
        }
        for r in 0..m_eq {
            nu[r] += alpha * dnu[r];
        }
        for i in 0..m_in {
            slack[i] += alpha * ds[i];
            lam[i] += alpha * dl[i];
            slack[i] = slack[i].max(1e-14);
            lam[i] = lam[i].max(1e-14);
        }
    }

    let wall = start.elapsed().as_secs_f64();
    if converged {
        let residuals = residual_with_bounds(prob, lower, upper, &x);
        return Ok(SolveResult {
            status: Status::Optimal,
            objective: prob.objective.eval(&x),
            x,
            residuals,
            nodes: 0,
            wall_secs: wall,
            eq_duals: Some(nu[..w.n_orig_eq].to_vec()),
        });
    }

    // Not converged: decide between infeasible and iteration/time limit by
    // checking the linear part with the simplex (quadratic constraints in the
    // assembled problems never remove feasibility on their own: epigraph and
    // ball constraints always admit interior points once the linear system
    // does).
    let mut lin = prob.clone();
    lin.quad_constraints.clear();
    lin.objective = Default::default();
    let feas = simplex::solve_with_bounds(&lin, lower, upper, opts)?;
    if feas.status == Status::Infeasible {
        return Ok(SolveResult { wall_secs: wall, ..SolveResult::infeasible() });
    }
    Ok(SolveResult {
        status: Status::Limit,
        x,
        objective: f64::INFINITY,
        residuals: Default::default(),
        nodes: 0,
        wall_secs: wall,
        eq_duals: None,
    })
}

fn residual_with_bounds(
    prob: &ProblemMatrices,
    lower: &[f64],
    upper: &[f64],
    x: &[f64],
) -> super::ResidualSummary {
    let mut check = prob.clone();
    check.lower = lower.to_vec();
    check.upper = upper.to_vec();
    residual_summary(&check, x)
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

    fn fresh(n: usize) -> (Assembler, Vec<usize>) {
        let mut asm = Assembler::new(VariableIndex::new(1, 1, 1, 0, 0));
        for v in 0..asm.index.total() {
            asm.set_bounds(v, 0.0, 0.0);
        }
        let vars: Vec<usize> = (0..n)
            .map(|i| asm.add_extra(format!("T{i}"), f64::NEG_INFINITY, f64::INFINITY))
            .collect();
        (asm, vars)
    }

    #[test]
    fn unconstrained_quadratic_reaches_its_vertex() {
        // min (x−3)² = x² − 6x + 9.
        let (mut asm, v) = fresh(1);
        asm.add_quad_cost(v[0], v[0], 1.0);
        asm.add_linear_cost(v[0], -6.0);
        asm.add_cost_constant(9.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[v[0]] - 3.0).abs() < 1e-6, "FAIL: vertex at {}", r.x[v[0]]);
        assert!(r.objective.abs() < 1e-6);
    }

    #[test]
    fn equality_constrained_quadratic_matches_closed_form() {
        // min x² + y² s.t. x + y = 2 → (1, 1), duals ν = −2·x* = −2·1… with
        // L = f + ν(x + y − 2): ∇ = 2x + ν = 0 → ν = −2.
        let (mut asm, v) = fresh(2);
        asm.add_quad_cost(v[0], v[0], 1.0);
        asm.add_quad_cost(v[1], v[1], 1.0);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], 1.0)], 2.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[v[0]] - 1.0).abs() < 1e-6);
        assert!((r.x[v[1]] - 1.0).abs() < 1e-6);
        let duals = r.eq_duals.expect("equality duals");
        assert!((duals[0] + 2.0).abs() < 1e-5, "FAIL: dual {}", duals[0]);
    }

    #[test]
    fn active_bound_shifts_the_minimizer() {
        // min (x−3)² with x ≤ 1 → x = 1.
        let (mut asm, v) = fresh(1);
        asm.set_bounds(v[0], f64::NEG_INFINITY, 1.0);
        asm.add_quad_cost(v[0], v[0], 1.0);
        asm.add_linear_cost(v[0], -6.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[v[0]] - 1.0).abs() < 1e-6, "FAIL: x = {}", r.x[v[0]]);
    }

    #[test]
    fn quadratic_ball_constraint_binds() {
        // min −x − y s.t. x² + y² ≤ 2 → (1, 1), objective −2.
        let (mut asm, v) = fresh(2);
        asm.add_linear_cost(v[0], -1.0);
        asm.add_linear_cost(v[1], -1.0);
        asm.add_quad_constraint(crate::assemble::QuadConstraint {
            tag: RowTag::Pin { pin: 0 },
            quad: crate::assemble::QuadForm {
                terms: vec![(v[0], v[0], 1.0), (v[1], v[1], 1.0)],
            },
            linear: vec![],
            rhs: 2.0,
        });
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[v[0]] - 1.0).abs() < 1e-5, "FAIL: x = {}", r.x[v[0]]);
        assert!((r.x[v[1]] - 1.0).abs() < 1e-5, "FAIL: y = {}", r.x[v[1]]);
        assert!((r.objective + 2.0).abs() < 1e-5);
    }

    #[test]
    fn kkt_stationarity_holds_at_reported_optimum() {
        // min x² + xy + y² − y s.t. x + 2y = 1, x ≥ 0: verify ∇f + Aᵀν lies
        // in the normal cone (here x* > 0 so the bound multiplier vanishes).
        let (mut asm, v) = fresh(2);
        asm.set_bounds(v[0], 0.0, f64::INFINITY);
        asm.add_quad_cost(v[0], v[0], 1.0);
        asm.add_quad_cost(v[0], v[1], 1.0);
        asm.add_quad_cost(v[1], v[1], 1.0);
        asm.add_linear_cost(v[1], -1.0);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], 2.0)], 1.0);
        let prob = asm.finish();
        let r = solve(&prob, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        let (x, y) = (r.x[v[0]], r.x[v[1]]);
        let nu = r.eq_duals.unwrap()[0];
        let g0 = 2.0 * x + y + nu;
        let g1 = x + 2.0 * y - 1.0 + 2.0 * nu;
        if x > 1e-6 {
            assert!(g0.abs() < 1e-4, "FAIL: stationarity in x: {g0}");
        } else {
            assert!(g0 > -1e-4, "FAIL: bound multiplier must be nonnegative: {g0}");
        }
        assert!(g1.abs() < 1e-4, "FAIL: stationarity in y: {g1}");
    }

    #[test]
    fn crossed_bounds_are_infeasible() {
        let (mut asm, v) = fresh(1);
        asm.set_bounds(v[0], 2.0, 1.0);
        asm.add_quad_cost(v[0], v[0], 1.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Infeasible);
    }

    #[test]
    fn conflicting_rows_detected_as_infeasible() {
        // x = 1 and x = 2 simultaneously (with a quadratic cost so the IPM
        // path is exercised, then the linear fallback certifies).
        let (mut asm, v) = fresh(1);
        asm.add_quad_cost(v[0], v[0], 1.0);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0)], 1.0);
        asm.add_eq(RowTag::Pin { pin: 1 }, &[(v[0], 1.0)], 2.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Infeasible);
    }

    #[test]
    fn fixed_variables_become_equalities_and_duals_survive() {
        // min (x − 5)² with helper pinned at 2 via equal bounds; the pin term
        // y enters the equality x − y = 1 so x = 3.
        let (mut asm, v) = fresh(2);
        asm.set_bounds(v[1], 2.0, 2.0);
        asm.add_quad_cost(v[0], v[0], 1.0);
        asm.add_linear_cost(v[0], -10.0);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(v[0], 1.0), (v[1], -1.0)], 1.0);
        let r = solve(&asm.finish(), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[v[0]] - 3.0).abs() < 1e-6, "FAIL: x = {}", r.x[v[0]]);
        // L = (x−5)² + ν(x − y − 1) → ν = −2(x−5) = 4 at x = 3.
        let nu = r.eq_duals.unwrap()[0];
        assert!((nu - 4.0).abs() < 1e-4, "FAIL: dual {nu}");
    }
}
