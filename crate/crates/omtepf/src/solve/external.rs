//! External-solver bridge: export the problem in the plain-text interchange
//! dialect, run a solver command, read the solution file back, and re-audit
//! everything locally before trusting it.
//!
//! The command template comes from the `OMTEPF_SOLVER_CMD` environment
//! variable (placeholders `{model}` and `{solution}`), defaulting to the
//! bundled Python driver. Imported solutions are never taken at face value:
//! the objective is recomputed from our own matrices and all residuals are
//! checked against the audit tolerance, so a tampered or stale file fails.

use super::{residual_summary, SolveOptions, SolveResult, Status};
use crate::assemble::ProblemMatrices;
use crate::error::{Error, Result};
use crate::lp::{read_solution, write_lp, write_solution, SolutionFile};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

static EXPORT_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Default command template; `{model}` and `{solution}` are replaced by file
/// paths.
pub const DEFAULT_COMMAND: &str = "python3 tools/solver_driver.py {model} {solution}";

/// Environment variable overriding the solver command template.
pub const COMMAND_ENV: &str = "OMTEPF_SOLVER_CMD";

/// Serialize the problem to `path` in the interchange dialect.
pub fn export_model(prob: &ProblemMatrices, path: &Path) -> Result<()> {
    std::fs::write(path, write_lp(prob))?;
    Ok(())
}

/// Read a solution file produced for `prob` and re-audit it: recompute the
/// objective from our own matrices, reject mismatches beyond a relative
/// 1e-6, and reject residuals beyond the audit tolerance.
pub fn import_result(
    prob: &ProblemMatrices,
    path: &Path,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let file: SolutionFile = read_solution(path)?;
    let status = Status::from_str(&file.status)?;
    if status == Status::Infeasible {
        return Ok(SolveResult::infeasible());
    }
    if status == Status::Unbounded {
        return Ok(SolveResult {
            status,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
            residuals: Default::default(),
            nodes: 0,
            wall_secs: 0.0,
            eq_duals: None,
        });
    }
    let x = file.to_vector(prob.n_vars)?;
    let recomputed = prob.objective.eval(&x);
    let scale = 1.0_f64.max(recomputed.abs());
    if (recomputed - file.objective).abs() > 1e-6 * scale {
        return Err(Error::Audit(format!(
            "imported objective {} disagrees with recomputation {}",
            file.objective, recomputed
        )));
    }
    let residuals = residual_summary(prob, &x);
    if status == Status::Optimal && !residuals.within(opts.audit_tol) {
        return Err(Error::Audit(format!(
            "imported solution violates constraints: worst residual {:.3e} over {:?}",
            residuals.worst(),
            residuals
        )));
    }
    Ok(SolveResult {
        status,
        x,
        objective: recomputed,
        residuals,
        nodes: 0,
        wall_secs: 0.0,
        eq_duals: None,
    })
}

/// Round-trip helper for tests and tooling: write a solution file for `x`.
pub fn export_result(
    prob: &ProblemMatrices,
    x: &[f64],
    status: Status,
    path: &Path,
) -> Result<()> {
    let file = SolutionFile::from_vector(status.as_str(), prob.objective.eval(x), x);
    write_solution(path, &file)
}

fn scratch_pair() -> (PathBuf, PathBuf) {
    let stamp = format!(
        "omtepf-{}-{}",
        std::process::id(),
        EXPORT_COUNTER.fetch_add(1, Ordering::Relaxed)
    );
    let dir = std::env::temp_dir();
    (dir.join(format!("{stamp}.model")), dir.join(format!("{stamp}.solution")))
}

/// Solve via the external command. The model is exported to a scratch file,
/// the command is run with substituted paths, and the returned solution is
/// re-audited before being accepted.
pub fn solve_external(prob: &ProblemMatrices, opts: &SolveOptions) -> Result<SolveResult> {
    let template =
        std::env::var(COMMAND_ENV).unwrap_or_else(|_| DEFAULT_COMMAND.to_string());
    let (model_path, solution_path) = scratch_pair();
    export_model(prob, &model_path)?;
    let cmd = template
        .replace("{model}", &model_path.to_string_lossy())
        .replace("{solution}", &solution_path.to_string_lossy());
    let started = std::time::Instant::now();
    let output = Command::new("sh").arg("-c").arg(&cmd).output()?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        return Err(Error::Audit(format!(
            "solver command '{cmd}' failed with {}: {}",
            output.status,
            stderr.trim()
        )));
    }
    let mut result = import_result(prob, &solution_path, opts)?;
    result.wall_secs = started.elapsed().as_secs_f64();
    let _ = std::fs::remove_file(&model_path);
    let _ = std::fs::remove_file(&solution_path);
    Ok(result)
}
