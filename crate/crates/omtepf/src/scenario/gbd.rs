//! Coordinated scenario: joint transport + grid optimization by generalized
//! decomposition.
//!
//! The joint program is a mixed-integer convex QCP — too large to hand to a
//! branch-and-bound solver whole at full scale, but it splits cleanly: for a
//! fixed vehicle schedule the grid decouples into per-step convex dispatches
//! (see [`opf`]), and the grid's optimal value is a convex function of the
//! charging firings because those enter the bus balances affinely.  We
//! therefore solve a **master** MILP over the vehicle network with one extra
//! continuous variable per step standing in for that step's grid cost, and
//! tighten the stand-ins with supporting hyperplanes (value cuts) priced by
//! the bus-balance multipliers of repeated dispatches:
//!
//! ```text
//! minimize   transport(y) + Σ_k θ_k
//! subject to vehicle rows,  θ_k ≥ floor_k,
//!            θ_k ≥ v_k(ŷ) + Σ_t π_t,k · (y_t,k − ŷ_t,k)      (one per round)
//! ```
//!
//! where `π_t,k = ν_r·scale·draw_r + ν_i·scale·draw_i` is the marginal
//! electric cost of transition `t` firing at step `k`.  The master objective
//! is a lower bound on the joint optimum; every dispatched candidate is an
//! upper bound; the loop stops when they agree to [`COORDINATION_GAP`].
//!
//! Movement variables never appear in a cut (they draw no current), so the
//! alternation only ever reshapes *charging*; routing is decided by the
//! master's own transport objective from round one.

use std::time::Instant;

use crate::assemble::{
    assemble_full, assemble_transport, ExtraVar, ProblemMatrices, RowTag,
};
use crate::builder::{build_boundary, Catalog};
use crate::petri::EngineeringSystemNet;
use crate::error::{Error, Result};
use crate::model::{ScenarioKind, TenModel};
use crate::power::{demand_coefficients, demand_secant, V_I_BOUND, V_R_MAX};
use crate::scenario::opf::{self, GridDispatch};
use crate::scenario::stage::{self, replay, Schedule, Trajectory};
use crate::solve::{SolveOptions, SolveResult, Status};
use crate::sparse::Triplets;

/// Relative gap between incumbent and master bound at which the loop stops.
pub const COORDINATION_GAP: f64 = 1e-4;

/// Hard cap on alternation rounds; hitting it returns the best incumbent
/// with `converged = false` rather than an error.
pub const MAX_ROUNDS: usize = 60;

// ---------------------------------------------------------------------------
// Cuts
// ---------------------------------------------------------------------------

/// One linear row destined for the master's `≤` block:
/// `Σ terms·y − θ_{theta_k} ≤ rhs` (the θ column is implied, not stored).
#[derive(Debug, Clone)]
pub struct CutRow {
    pub tag: RowTag,
    /// Schedule-variable coefficients `(column, weight)`.
    pub terms: Vec<(usize, f64)>,
    /// 1-based step whose value variable the row bounds; `None` for
    /// pattern-exclusion rows.
    pub theta_k: Option<usize>,
    pub rhs: f64,
}

/// Supporting hyperplanes of every step's grid value at the dispatched
/// candidate `sched`: for each step `k`,
/// `θ_k ≥ v_k(ŷ) + Σ_t π_t,k (y_t,k − ŷ_t,k)`.
///
/// Weak duality makes the row globally valid: at any schedule `y` the
/// dispatch at `y` is feasible for the dual at the old multipliers, whose
/// objective is exactly the right-hand side.  Rows are emitted even when all
/// prices vanish (then they pin `θ_k ≥ v_k(ŷ)` outright, still valid).
pub fn value_cuts(
    model: &TenModel,
    catalog: &Catalog,
    index: &crate::index::VariableIndex,
    sched: &Schedule,
    d: &GridDispatch,
    round: usize,
) -> Vec<CutRow> {
    let scale = model.coefficients.current_draw_scale;
    let mut cuts = Vec::with_capacity(model.horizon);
    for k in 1..=model.horizon {
        let mut terms = Vec::new();
        let mut rhs = -d.step_values[k - 1];
        for (t, cap) in catalog.caps.iter().enumerate() {
            if cap.draw.is_none() {
                continue;
            }
            let price = d.marginal_draw_price(catalog, scale, t, k);
            if price == 0.0 {
                continue;
            }
            terms.push((index.u_minus(t, k), price));
            rhs += price * sched.get(t, k);
        }
        cuts.push(CutRow { tag: RowTag::ValueCut { k, round }, terms, theta_k: Some(k), rhs });
    }
    cuts
}

/// Exclude the candidate's exact *charging pattern* after an infeasible
/// dispatch.  Grid feasibility depends only on the charging firings (they
/// alone draw current), so every schedule sharing the pattern is equally
/// infeasible and the exclusion is sound:
/// `Σ_{ŷ=1} y − Σ_{ŷ=0} y ≤ |ŷ=1| − 1` over charging columns.
pub fn exclusion_cut(
    model: &TenModel,
    catalog: &Catalog,
    index: &crate::index::VariableIndex,
    sched: &Schedule,
    round: usize,
) -> CutRow {
    let mut terms = Vec::new();
    let mut ones = 0usize;
    for (t, cap) in catalog.caps.iter().enumerate() {
        if cap.draw.is_none() {
            continue;
        }
        for k in 1..=model.horizon {
            if sched.get(t, k) == 1.0 {
                terms.push((index.u_minus(t, k), 1.0));
                ones += 1;
            } else {
                terms.push((index.u_minus(t, k), -1.0));
            }
        }
    }
    CutRow {
        tag: RowTag::FeasibilityCut { k: 0, round },
        terms,
        theta_k: None,
        rhs: ones as f64 - 1.0,
    }
}

// ---------------------------------------------------------------------------
// Value floors
// ---------------------------------------------------------------------------

/// Minimum of `a·t² + b·t + c` over `t ∈ [lo, hi]` (`hi` may be infinite;
/// callers only pass convex or affine-nonnegative data on unbounded ranges).
fn parabola_min_over(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> f64 {
    let eval = |t: f64| (a * t + b) * t + c;
    if a > 0.0 {
        return eval((-b / (2.0 * a)).clamp(lo, hi));
    }
    if hi.is_finite() {
        eval(lo).min(eval(hi))
    } else if b >= 0.0 {
        eval(lo)
    } else {
        f64::NEG_INFINITY
    }
}

/// Analytic lower bound on the step-`k` grid value, term by term: the
/// generator cost at zero current, each demand-revenue parabola minimized
/// over the voltage box image, and the constant solar procurement.  No grid
/// solve can come in below this, so it is a sound initial bound for the
/// step's value variable (a zero floor would not be: revenue terms can make
/// individual steps negative).
pub fn theta_floor(model: &TenModel, k: usize) -> f64 {
    let co = &model.coefficients;
    let mut v = parabola_min_over(co.gen_alpha, co.gen_beta, co.gen_gamma, 0.0, f64::INFINITY);
    let (p, d) = demand_secant(model.capacities.v_r_min, V_R_MAX, V_I_BOUND);
    let t_a = p * model.capacities.v_r_min + d;
    let t_b = p * V_R_MAX + d;
    let (t_lo, t_hi) = if t_a <= t_b { (t_a, t_b) } else { (t_b, t_a) };
    for load in &model.capabilities.load_units {
        let g = model.profiles.load_g(load.class, k);
        if g == 0.0 {
            continue;
        }
        let (a_coef, c_coef) = demand_coefficients(model, g);
        v += parabola_min_over(a_coef, -c_coef, co.eds_gamma, t_lo, t_hi);
    }
    // Solar procurement is linear in the panel voltages; minimize each term
    // over the voltage box.
    for _ in &model.capabilities.solar_units {
        let (sr, si) = model.profiles.solar(k);
        let cr = co.c_solar * sr;
        let ci = co.c_solar * si;
        v += cr * if cr >= 0.0 { model.capacities.v_r_min } else { V_R_MAX };
        v -= ci.abs() * V_I_BOUND;
    }
    v
}

// ---------------------------------------------------------------------------
// Master assembly
// ---------------------------------------------------------------------------

/// Extend the transport base with one value variable per step and the
/// accumulated cut rows.  The sparse blocks are rebuilt from triplets so the
/// new columns exist in both matrices.
pub fn build_master(
    base: &ProblemMatrices,
    horizon: usize,
    floors: &[f64],
    cuts: &[CutRow],
) -> ProblemMatrices {
    let mut prob = base.clone();
    let n0 = prob.n_vars;
    for k in 1..=horizon {
        prob.extras.push(ExtraVar { name: format!("STEPVAL_k{k}") });
        prob.lower.push(floors[k - 1]);
        prob.upper.push(f64::INFINITY);
        prob.binary.push(false);
        prob.objective.linear.push((n0 + k - 1, 1.0));
    }
    prob.n_vars = n0 + horizon;

    let mut eq = Triplets::with_capacity(prob.eq.nnz());
    for (r, c, v) in prob.eq.iter() {
        eq.push(r, c, v);
    }
    prob.eq = eq.to_csr(prob.eq_rhs.len(), prob.n_vars);

    let mut le = Triplets::with_capacity(prob.le.nnz() + cuts.iter().map(|c| c.terms.len() + 1).sum::<usize>());
    for (r, c, v) in prob.le.iter() {
        le.push(r, c, v);
    }
    let mut le_rhs = prob.le_rhs.clone();
    let mut le_tags = prob.le_tags.clone();
    for cut in cuts {
        let r = le_rhs.len();
        for &(col, w) in &cut.terms {
            le.push(r, col, w);
        }
        if let Some(k) = cut.theta_k {
            le.push(r, n0 + k - 1, -1.0);
        }
        le_rhs.push(cut.rhs);
        le_tags.push(cut.tag);
    }
    prob.le = le.to_csr(le_rhs.len(), prob.n_vars);
    prob.le_rhs = le_rhs;
    prob.le_tags = le_tags;
    prob
}

// ---------------------------------------------------------------------------
// The alternation
// ---------------------------------------------------------------------------

/// One round's bookkeeping.
#[derive(Debug, Clone)]
pub struct RoundLog {
    pub round: usize,
    /// Master optimum — the global lower bound as of this round.
    pub lower_bound: f64,
    /// Transport + dispatched grid cost of this round's candidate;
    /// `NaN` when the dispatch was infeasible.
    pub candidate: f64,
    /// Relative gap between the incumbent and the lower bound.
    pub gap: f64,
    pub cuts_total: usize,
    pub wall_secs: f64,
}

/// Trace of the full alternation.
#[derive(Debug, Clone)]
pub struct CoordinationLog {
    pub rounds: Vec<RoundLog>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub gap: f64,
    pub converged: bool,
}

/// The coordinated solution: incumbent schedule, its replayed state, its
/// grid dispatch, and the joint objective (transport + grid).
pub struct Coordinated {
    pub schedule: Schedule,
    pub trajectory: Trajectory,
    pub dispatch: GridDispatch,
    pub problem: ProblemMatrices,
    pub objective: f64,
    pub transport_cost: f64,
    pub log: CoordinationLog,
}

/// Run the decomposition.  `solve_master` solves one mixed-integer master
/// (builtin branch-and-bound or the external solver).  Returns the best
/// dispatched candidate; `log.converged` records whether the bound gap
/// closed before [`MAX_ROUNDS`] or the time limit.
pub fn run<F>(
    model: &TenModel,
    net: &EngineeringSystemNet,
    catalog: &Catalog,
    opts: &SolveOptions,
    mut solve_master: F,
) -> Result<Coordinated>
where
    F: FnMut(&ProblemMatrices, &SolveOptions) -> Result<SolveResult>,
{
    let started = Instant::now();
    let canonical = build_boundary(model, catalog, ScenarioKind::Coordinated)?;
    let master_bound = stage::master_boundary(model, catalog, &canonical)?;
    let base = assemble_transport(model, net, catalog, &master_bound)?;
    let full = assemble_full(model, net, catalog, &canonical)?;
    let floors: Vec<f64> = (1..=model.horizon).map(|k| theta_floor(model, k)).collect();

    let mut cuts: Vec<CutRow> = Vec::new();
    let mut lower = f64::NEG_INFINITY;
    let mut best: Option<(f64, f64, Schedule, Trajectory, GridDispatch)> = None;
    let mut rounds = Vec::new();
    let mut converged = false;

    for round in 1..=MAX_ROUNDS {
        let round_started = Instant::now();
        let master = build_master(&base, model.horizon, &floors, &cuts);
        let res = solve_master(&master, opts)?;
        match res.status {
            Status::Optimal => lower = lower.max(res.objective),
            Status::Limit => {} // incumbent candidate is usable, bound is not
            Status::Infeasible => {
                return Err(Error::Infeasible(if round == 1 {
                    "coordinated master is infeasible: no schedule satisfies the itineraries"
                        .into()
                } else {
                    "cut rows made the master infeasible; a value floor or cut must overshoot"
                        .into()
                }));
            }
            Status::Unbounded => {
                return Err(Error::Unbounded(
                    "coordinated master is unbounded despite value floors".into(),
                ));
            }
        }

        let sched =
            Schedule::from_solution(catalog, model.horizon, &base.index, &res.x, opts.int_tol)?;
        let transport_cost = base.objective.eval(&res.x);
        let traj = replay(model, catalog, &sched, true)?;
        let candidate = match opf::dispatch(model, catalog, &full, &sched, &traj, opts) {
            Ok(d) => {
                let value = transport_cost + d.step_values.iter().sum::<f64>();
                cuts.extend(value_cuts(model, catalog, &base.index, &sched, &d, round));
                if best.as_ref().map_or(true, |(b, ..)| value < *b) {
                    best = Some((value, transport_cost, sched, traj, d));
                }
                value
            }
            Err(Error::Infeasible(_)) => {
                cuts.push(exclusion_cut(model, catalog, &base.index, &sched, round));
                f64::NAN
            }
            Err(e) => return Err(e),
        };

        let upper = best.as_ref().map_or(f64::INFINITY, |(b, ..)| *b);
        let gap = (upper - lower) / upper.abs().max(1.0);
        rounds.push(RoundLog {
            round,
            lower_bound: lower,
            candidate,
            gap,
            cuts_total: cuts.len(),
            wall_secs: round_started.elapsed().as_secs_f64(),
        });
        if gap <= COORDINATION_GAP {
            converged = true;
            break;
        }
        if started.elapsed().as_secs_f64() > opts.time_limit {
            break;
        }
    }

    let (objective, transport_cost, schedule, trajectory, dispatch) = best.ok_or_else(|| {
        Error::SolverLimit(format!(
            "no dispatchable schedule found in {} coordination rounds",
            rounds.len()
        ))
    })?;
    let upper = objective;
    Ok(Coordinated {
        schedule,
        trajectory,
        dispatch,
        problem: full,
        objective,
        transport_cost,
        log: CoordinationLog {
            rounds,
            lower_bound: lower,
            upper_bound: upper,
            gap: (upper - lower) / upper.abs().max(1.0),
            converged,
        },
    })
}

// ===========================================================================
// Tests
// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{build_mini, derive_net, MiniConfig};
    use crate::scenario::heuristic;
    use crate::scenario::{solve_milp, SolverChoice};

    fn mini() -> (TenModel, EngineeringSystemNet, Catalog) {
        let model = build_mini(&MiniConfig::default()).expect("mini model builds");
        let (net, catalog) = derive_net(&model).expect("net derives");
        (model, net, catalog)
    }

    /// Canonical hand-routed day with heuristic charging — a feasible,
    /// dispatchable schedule for cut soundness checks.
    fn heuristic_schedule(model: &TenModel, catalog: &Catalog) -> Schedule {
        let mut sched = Schedule::zeros(catalog.transition_count(), model.horizon);
        for it in &model.itineraries {
            let home_park = catalog.parking(it.home, it.ev).unwrap();
            let work_park = catalog.parking(it.work, it.ev).unwrap();
            let out = catalog.road_travel(it.ev, 0, it.ev).unwrap();
            let back = catalog.road_travel(it.ev, 1, it.ev).unwrap();
            sched.set(home_park, 1, 1.0);
            sched.set(out, it.morning_window.0, 1.0);
            for k in it.morning_window.0 + 1..=it.work_departure {
                sched.set(work_park, k, 1.0);
            }
            sched.set(back, it.evening_window.0, 1.0);
            for k in it.evening_window.0 + 1..=model.horizon {
                sched.set(home_park, k, 1.0);
            }
        }
        heuristic::apply_all(model, catalog, &mut sched).expect("charging passes run");
        sched
    }

    #[test]
    fn value_floors_lie_below_every_dispatched_step() {
        let (model, net, catalog) = mini();
        let sched = heuristic_schedule(&model, &catalog);
        let traj = replay(&model, &catalog, &sched, true).expect("replays");
        let canonical =
            build_boundary(&model, &catalog, ScenarioKind::Coordinated).expect("boundary");
        let full = assemble_full(&model, &net, &catalog, &canonical).expect("assembles");
        let opts = SolveOptions::default();
        let d = opf::dispatch(&model, &catalog, &full, &sched, &traj, &opts).expect("dispatch");
        for k in 1..=model.horizon {
            let floor = theta_floor(&model, k);
            assert!(
                floor <= d.step_values[k - 1] + 1e-9,
                "FAIL: floor {floor:.6} exceeds dispatched value {:.6} at step {k}",
                d.step_values[k - 1]
            );
        }
    }

    #[test]
    fn master_extension_widens_both_blocks_and_prices_value_variables() {
        let (model, net, catalog) = mini();
        let canonical =
            build_boundary(&model, &catalog, ScenarioKind::Coordinated).expect("boundary");
        let master_bound =
            stage::master_boundary(&model, &catalog, &canonical).expect("master boundary");
        let base = assemble_transport(&model, &net, &catalog, &master_bound).expect("assembles");
        let floors: Vec<f64> = (1..=model.horizon).map(|k| theta_floor(&model, k)).collect();
        let cut = CutRow {
            tag: RowTag::ValueCut { k: 1, round: 1 },
            terms: vec![(base.index.u_minus(0, 1), 2.5)],
            theta_k: Some(1),
            rhs: -3.0,
        };
        let master = build_master(&base, model.horizon, &floors, &[cut]);

        assert_eq!(master.n_vars, base.n_vars + model.horizon);
        assert_eq!(master.eq.ncols(), master.n_vars, "FAIL: eq block must cover new columns");
        assert_eq!(master.le.ncols(), master.n_vars, "FAIL: le block must cover new columns");
        assert_eq!(master.le_rhs.len(), base.le_rhs.len() + 1);
        assert_eq!(master.lower[base.n_vars], floors[0]);
        // The appended row reads 2.5·y − θ_1 ≤ −3.
        let r = master.le_rhs.len() - 1;
        let row: Vec<(usize, f64)> = master.le.row(r).collect();
        assert!(row.contains(&(base.index.u_minus(0, 1), 2.5)));
        assert!(row.contains(&(base.n_vars, -1.0)));
        assert_eq!(master.le_rhs[r], -3.0);
        // Objective picked up a unit price on every value variable.
        let priced = master
            .objective
            .linear
            .iter()
            .filter(|(v, w)| *v >= base.n_vars && *w == 1.0)
            .count();
        assert_eq!(priced, model.horizon);
    }

    #[test]
    fn value_cuts_underestimate_other_schedules() {
        // Convexity check on real data: a cut priced at schedule A, evaluated
        // at schedule B's firings, must sit below B's dispatched values.
        let (model, net, catalog) = mini();
        let canonical =
            build_boundary(&model, &catalog, ScenarioKind::Coordinated).expect("boundary");
        let full = assemble_full(&model, &net, &catalog, &canonical).expect("assembles");
        let opts = SolveOptions::default();

        let sched_a = heuristic_schedule(&model, &catalog);
        let traj_a = replay(&model, &catalog, &sched_a, true).expect("replays");
        let d_a = opf::dispatch(&model, &catalog, &full, &sched_a, &traj_a, &opts).expect("ok");

        // Schedule B: move vehicle 1's last work charging step one later.
        let mut sched_b = sched_a.clone();
        let station = model
            .capabilities
            .stations
            .iter()
            .find(|s| s.kind == crate::model::StationKind::Commercial)
            .unwrap();
        let charge = catalog.wired_charge(station.id, 1).unwrap();
        let park = catalog.parking(model.itineraries[1].work, 1).unwrap();
        let k_move = (1..=model.horizon)
            .filter(|&k| sched_b.get(charge, k) == 1.0)
            .max()
            .expect("vehicle 1 charges at work");
        sched_b.set(charge, k_move, 0.0);
        sched_b.set(park, k_move, 1.0);
        sched_b.set(park, k_move + 1, 0.0);
        sched_b.set(charge, k_move + 1, 1.0);
        let traj_b = replay(&model, &catalog, &sched_b, true).expect("replays");
        let d_b = opf::dispatch(&model, &catalog, &full, &sched_b, &traj_b, &opts).expect("ok");

        // Reverse map from firing columns back to (transition, step).
        let mut firing_of = std::collections::BTreeMap::new();
        for t in 0..catalog.transition_count() {
            for k in 1..=model.horizon {
                firing_of.insert(full.index.u_minus(t, k), (t, k));
            }
        }
        let cuts = value_cuts(&model, &catalog, &full.index, &sched_a, &d_a, 1);
        for cut in &cuts {
            let k = cut.theta_k.unwrap();
            // Reconstruct θ_k ≥ v_A(k) + Σ π (y_B − y_A)  ⇔  Σ π·y_B − rhs.
            let lhs: f64 = cut
                .terms
                .iter()
                .map(|&(col, w)| {
                    let (t, kk) = firing_of[&col];
                    assert_eq!(kk, k, "cut columns stay on their own step");
                    w * sched_b.get(t, kk)
                })
                .sum();
            let bound = lhs - cut.rhs;
            assert!(
                bound <= d_b.step_values[k - 1] + 1e-5,
                "FAIL: step {k} cut claims ≥ {bound:.8} but dispatch at B costs {:.8}",
                d_b.step_values[k - 1]
            );
        }
    }

    #[test]
    fn coordination_converges_on_the_mini_day() {
        let (model, net, catalog) = mini();
        let opts = SolveOptions::default();
        let co = run(&model, &net, &catalog, &opts, |p, o| {
            solve_milp(p, o, SolverChoice::Builtin)
        })
        .expect("coordination runs");
        assert!(co.log.converged, "FAIL: mini coordination must close its bound gap");
        assert!(
            co.log.gap <= COORDINATION_GAP + 1e-12,
            "FAIL: reported gap {:.3e} above threshold",
            co.log.gap
        );
        // The incumbent must be a genuinely dispatchable schedule.
        let issues = co.problem.audit(&co.dispatch.x, 1e-6);
        assert!(issues.is_empty(), "FAIL: incumbent fails the joint audit: {issues:?}");
        // And its value must match transport + grid bookkeeping.
        let grid: f64 = co.dispatch.step_values.iter().sum();
        assert!(
            (co.objective - (co.transport_cost + grid)).abs() <= 1e-9,
            "FAIL: objective bookkeeping drifted"
        );
    }

    #[test]
    fn coordination_never_loses_to_the_sequential_pipeline() {
        // The coordinated feasible set contains every sequential outcome, so
        // the incumbent objective must come in at or below the heuristic
        // day's transport + grid cost.
        let (model, net, catalog) = mini();
        let canonical =
            build_boundary(&model, &catalog, ScenarioKind::Coordinated).expect("boundary");
        let full = assemble_full(&model, &net, &catalog, &canonical).expect("assembles");
        let opts = SolveOptions::default();

        let sched = heuristic_schedule(&model, &catalog);
        let traj = replay(&model, &catalog, &sched, true).expect("replays");
        let d = opf::dispatch(&model, &catalog, &full, &sched, &traj, &opts).expect("ok");
        let sequential = {
            let master_bound =
                stage::master_boundary(&model, &catalog, &canonical).expect("master boundary");
            let base =
                assemble_transport(&model, &net, &catalog, &master_bound).expect("assembles");
            let mut x = vec![0.0; base.n_vars];
            crate::scenario::stage::write_vehicle_vars(
                &model, &catalog, &base.index, &sched, &traj, &mut x,
            );
            base.objective.eval(&x) + d.step_values.iter().sum::<f64>()
        };

        let co = run(&model, &net, &catalog, &opts, |p, o| {
            solve_milp(p, o, SolverChoice::Builtin)
        })
        .expect("coordination runs");
        assert!(
            co.objective <= sequential + 1e-6,
            "FAIL: coordinated {:.8} must not exceed sequential {sequential:.8}",
            co.objective
        );
    }
}
