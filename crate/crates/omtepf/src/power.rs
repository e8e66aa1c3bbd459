//! Electric device layer: conductance/susceptance current laws for lines and
//! loads, exogenous solar injections, voltage limits and phase reference, the
//! generator-cost epigraph, and the demand-revenue objective with its secant
//! substitution — plus the true-formula cost evaluators and tightness audits
//! used for reporting.
//!
//! Sign conventions (fixed by the device unit suite): a branch or load with
//! admittance `g + jb` carries current `I = (g + jb)·ΔV`, i.e.
//! `I_R = g·ΔV_R − b·ΔV_I` and `I_I = b·ΔV_R + g·ΔV_I`, where `ΔV` is the
//! voltage at a load's bus, or the from-minus-to voltage drop of a line.

use crate::assemble::{Assembler, ProblemMatrices, QuadConstraint, QuadForm, RowTag};
use crate::builder::Catalog;
use crate::error::Result;
use crate::index::VariableIndex;
use crate::model::{TenModel, PF_TAN};

/// Symmetric bound on imaginary voltage components; the demand-revenue
/// secant uses it as the curvature allowance, so solutions must respect it
/// (the looseness audit reports how far it is from binding).
pub const V_I_BOUND: f64 = 0.15;

/// Real-voltage ceiling used by the secant (the square root of the squared
/// magnitude ceiling with the default limits).
pub const V_R_MAX: f64 = 1.1;

// ---------------------------------------------------------------------------
// Constraint emission
// ---------------------------------------------------------------------------

/// Attach every electric device constraint: solar pins, line and load current
/// laws, voltage bounds, phase reference, and squared-magnitude ceilings.
pub fn attach_device_models(asm: &mut Assembler, model: &TenModel, catalog: &Catalog) -> Result<()> {
    let k_max = model.horizon;
    let nb = model.buffers.len();

    // Voltage bounds, phase reference, and magnitude ceiling.
    for bus in 0..nb {
        for k in 1..=k_max {
            let vr = asm.index.v_real(bus, k);
            let vi = asm.index.v_imag(bus, k);
            asm.set_bounds(vr, model.capacities.v_r_min, V_R_MAX);
            if bus == model.gen_buffer {
                asm.set_bounds(vi, 0.0, 0.0);
            } else {
                asm.set_bounds(vi, -V_I_BOUND, V_I_BOUND);
            }
            asm.add_quad_constraint(QuadConstraint {
                tag: RowTag::VoltageBall { bus, k },
                quad: QuadForm { terms: vec![(vr, vr, 1.0), (vi, vi, 1.0)] },
                linear: Vec::new(),
                rhs: model.capacities.v_max_sq,
            });
        }
    }

    // Solar injections are exogenous: pin both components to the profile.
    for (u, _) in model.capabilities.solar_units.iter().enumerate() {
        let (tr, ti) = (catalog.solar_real_t[u], catalog.solar_imag_t[u]);
        for k in 1..=k_max {
            let (ir, ii) = model.profiles.solar(k);
            asm.set_bounds(asm.index.u_minus(tr, k), ir, ir);
            asm.set_bounds(asm.index.u_minus(ti, k), ii, ii);
        }
    }

    // Line current law on the initiation firings (instantaneous transitions
    // complete in-step, so the completions carry the same values via the
    // duration rows).
    for line in &model.lines {
        let (tr, ti) = (catalog.line_real_t[line.id], catalog.line_imag_t[line.id]);
        let (g, b) = (line.conductance, line.susceptance);
        for k in 1..=k_max {
            let vr_f = asm.index.v_real(line.from, k);
            let vr_t = asm.index.v_real(line.to, k);
            let vi_f = asm.index.v_imag(line.from, k);
            let vi_t = asm.index.v_imag(line.to, k);
            asm.add_eq(
                RowTag::OhmReal { trans: tr, k },
                &[
                    (asm.index.u_minus(tr, k), 1.0),
                    (vr_f, -g),
                    (vr_t, g),
                    (vi_f, b),
                    (vi_t, -b),
                ],
                0.0,
            );
            asm.add_eq(
                RowTag::OhmImag { trans: ti, k },
                &[
                    (asm.index.u_minus(ti, k), 1.0),
                    (vr_f, -b),
                    (vr_t, b),
                    (vi_f, -g),
                    (vi_t, g),
                ],
                0.0,
            );
        }
    }

    // Load current law with the per-class day profile; susceptance tracks the
    // conductance at power factor 0.9.
    for (u, load) in model.capabilities.load_units.iter().enumerate() {
        let (tr, ti) = (catalog.load_real_t[u], catalog.load_imag_t[u]);
        for k in 1..=k_max {
            let g = model.profiles.load_g(load.class, k);
            let b = -PF_TAN * g;
            let vr = asm.index.v_real(load.buffer, k);
            let vi = asm.index.v_imag(load.buffer, k);
            asm.add_eq(
                RowTag::OhmReal { trans: tr, k },
                &[(asm.index.u_minus(tr, k), 1.0), (vr, -g), (vi, b)],
                0.0,
            );
            asm.add_eq(
                RowTag::OhmImag { trans: ti, k },
                &[(asm.index.u_minus(ti, k), 1.0), (vr, -b), (vi, -g)],
                0.0,
            );
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Electric objective
// ---------------------------------------------------------------------------

/// Secant substitution parameters for the demand-revenue term: over
/// `V_R ∈ [a, b]`, `|V|²` is over-estimated by the affine
/// `t(V) = (a + b)·V_R − a·b + c²` whenever `|V_I| ≤ c`. Returns the slope
/// `P = a + b` and offset `D = −a·b + c²` of `t = P·V_R + D`.
pub fn demand_secant(a: f64, b: f64, c: f64) -> (f64, f64) {
    (a + b, -a * b + c * c)
}

/// Demand-revenue coefficients of one load with conductance `g` (susceptance
/// implied): the per-step true cost is `A·s² − C·s + γ̄` with `s = |V|²`.
pub fn demand_coefficients(model: &TenModel, g: f64) -> (f64, f64) {
    let co = &model.coefficients;
    let b = -PF_TAN * g;
    let a_coef = co.eds_rho_r * g * g - co.eds_rho_i * b * b;
    let c_coef = co.eds_beta_r * g - co.eds_beta_i * b;
    (a_coef, c_coef)
}

/// Emit the electric cost terms: generator quartic via a tight epigraph
/// (auxiliary `s ≥ I_R² + I_I²`, objective `α·s² + β·s + γ` increasing in
/// `s`), the demand-revenue quartic via the secant substitution (convex
/// quadratic in `V_R`, no auxiliary variable), and the solar procurement
/// term (linear in the panel buses' voltages: exogenous current, paid by
/// delivered power).
pub fn emit_electric_objective(asm: &mut Assembler, model: &TenModel, catalog: &Catalog) {
    let co = model.coefficients.clone();
    let k_max = model.horizon;

    // Generator: α·|I|⁴ + β·|I|² + γ per step.
    for k in 1..=k_max {
        let s = asm.add_extra(format!("GENSQ_k{k}"), 0.0, f64::INFINITY);
        let ir = asm.index.u_minus(catalog.gen_real_t, k);
        let ii = asm.index.u_minus(catalog.gen_imag_t, k);
        asm.add_quad_constraint(QuadConstraint {
            tag: RowTag::GenEpigraph { k },
            quad: QuadForm { terms: vec![(ir, ir, 1.0), (ii, ii, 1.0)] },
            linear: vec![(s, -1.0)],
            rhs: 0.0,
        });
        asm.add_quad_cost(s, s, co.gen_alpha);
        asm.add_linear_cost(s, co.gen_beta);
        asm.add_cost_constant(co.gen_gamma);
    }

    // Demand revenue per load and step, secant-substituted.
    let (p, d) = demand_secant(model.capacities.v_r_min, V_R_MAX, V_I_BOUND);
    for load in &model.capabilities.load_units {
        for k in 1..=k_max {
            let g = model.profiles.load_g(load.class, k);
            if g == 0.0 {
                continue;
            }
            let (a_coef, c_coef) = demand_coefficients(model, g);
            let vr = asm.index.v_real(load.buffer, k);
            // A·(P·vr + D)² − C·(P·vr + D) + γ̄
            asm.add_quad_cost(vr, vr, a_coef * p * p);
            asm.add_linear_cost(vr, 2.0 * a_coef * p * d - c_coef * p);
            asm.add_cost_constant(a_coef * d * d - c_coef * d + co.eds_gamma);
        }
    }

    // Solar procurement: the injected current is exogenous, but the power it
    // delivers — and therefore the bill — scales with the voltage at the
    // panel's bus, so the term is linear in those voltages.
    for &bus in &model.capabilities.solar_units {
        for k in 1..=k_max {
            let (ir, ii) = model.profiles.solar(k);
            if ir == 0.0 && ii == 0.0 {
                continue;
            }
            asm.add_linear_cost(asm.index.v_real(bus, k), co.c_solar * ir);
            asm.add_linear_cost(asm.index.v_imag(bus, k), co.c_solar * ii);
        }
    }
}

/// Reported solar cost at a solution: unit price times the power the
/// exogenous current injections deliver, `c · Σ (I_R·V_R + I_I·V_I)` over
/// units and steps.  The current profile is fixed; the delivered power — and
/// so the bill — still varies with the operating voltages.
pub fn solar_true_cost(model: &TenModel, index: &VariableIndex, x: &[f64]) -> f64 {
    let c = model.coefficients.c_solar;
    let mut total = 0.0;
    for &bus in &model.capabilities.solar_units {
        for k in 1..=model.horizon {
            let (ir, ii) = model.profiles.solar(k);
            total += c * (ir * x[index.v_real(bus, k)] + ii * x[index.v_imag(bus, k)]);
        }
    }
    total
}

// ---------------------------------------------------------------------------
// True-formula evaluation and audits
// ---------------------------------------------------------------------------

/// Electric cost report recomputed from a solved vector with the true
/// (quartic) formulas — never from solver surrogates.
#[derive(Debug, Clone)]
pub struct ElectricCosts {
    /// Dispatchable generation cost Σ α|I|⁴ + β|I|² + γ.
    pub z_egc: f64,
    /// Demand revenue Σ A·|V|⁴ − C·|V|² + γ̄ (negative = revenue).
    pub z_eds: f64,
    /// Solar procurement cost (exogenous current × operating voltage).
    pub z_egs: f64,
}

/// Evaluate the true electric costs at a solution.
pub fn electric_true_costs(
    model: &TenModel,
    catalog: &Catalog,
    index: &VariableIndex,
    x: &[f64],
) -> ElectricCosts {
    let co = &model.coefficients;
    let mut z_egc = 0.0;
    for k in 1..=model.horizon {
        let ir = x[index.u_minus(catalog.gen_real_t, k)];
        let ii = x[index.u_minus(catalog.gen_imag_t, k)];
        let s = ir * ir + ii * ii;
        z_egc += co.gen_alpha * s * s + co.gen_beta * s + co.gen_gamma;
    }
    let mut z_eds = 0.0;
    for load in &model.capabilities.load_units {
        for k in 1..=model.horizon {
            let g = model.profiles.load_g(load.class, k);
            if g == 0.0 {
                continue;
            }
            let (a_coef, c_coef) = demand_coefficients(model, g);
            let vr = x[index.v_real(load.buffer, k)];
            let vi = x[index.v_imag(load.buffer, k)];
            let s = vr * vr + vi * vi;
            z_eds += a_coef * s * s - c_coef * s + co.eds_gamma;
        }
    }
    ElectricCosts { z_egc, z_eds, z_egs: solar_true_cost(model, index, x) }
}

/// Per-step electric objective at a solved vector, evaluated with the same
/// surrogate the assembler emits: the generator epigraph taken tight (a
/// correct minimizer leaves no gap) and the secant-substituted demand terms.
/// Summing over steps reproduces the electric part of the solve objective,
/// which is what the coordination loop bounds step by step.
pub fn step_objective_values(
    model: &TenModel,
    catalog: &Catalog,
    index: &VariableIndex,
    x: &[f64],
) -> Vec<f64> {
    let co = &model.coefficients;
    let (p, d) = demand_secant(model.capacities.v_r_min, V_R_MAX, V_I_BOUND);
    (1..=model.horizon)
        .map(|k| {
            let ir = x[index.u_minus(catalog.gen_real_t, k)];
            let ii = x[index.u_minus(catalog.gen_imag_t, k)];
            let s = ir * ir + ii * ii;
            let mut v = co.gen_alpha * s * s + co.gen_beta * s + co.gen_gamma;
            for load in &model.capabilities.load_units {
                let g = model.profiles.load_g(load.class, k);
                if g == 0.0 {
                    continue;
                }
                let (a_coef, c_coef) = demand_coefficients(model, g);
                let t = p * x[index.v_real(load.buffer, k)] + d;
                v += a_coef * t * t - c_coef * t + co.eds_gamma;
            }
            for &bus in &model.capabilities.solar_units {
                let (sr, si) = model.profiles.solar(k);
                v += co.c_solar
                    * (sr * x[index.v_real(bus, k)] + si * x[index.v_imag(bus, k)]);
            }
            v
        })
        .collect()
}

/// Largest gap `s − (I_R² + I_I²)` across generator epigraph auxiliaries; a
/// correct minimizer leaves these within solver tolerance of zero because
/// the objective increases in `s`.
pub fn epigraph_gap(prob: &ProblemMatrices, catalog: &Catalog, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for qc in &prob.quad_constraints {
        if let RowTag::GenEpigraph { .. } = qc.tag {
            let quad = qc.quad.eval(x);
            let s: f64 = -qc.linear.iter().map(|&(v, c)| c * x[v]).sum::<f64>();
            worst = worst.max(s - quad);
        }
    }
    let _ = catalog;
    worst
}

/// Largest over-estimate `t(V) − |V|²` of the demand-revenue secant across
/// buses and steps carrying load, and the largest `|V_I|` observed (which
/// must stay within the curvature allowance for the secant to be valid).
pub fn secant_looseness(
    model: &TenModel,
    index: &VariableIndex,
    x: &[f64],
) -> (f64, f64) {
    let (p, d) = demand_secant(model.capacities.v_r_min, V_R_MAX, V_I_BOUND);
    let mut worst_gap: f64 = 0.0;
    let mut worst_vi: f64 = 0.0;
    for load in &model.capabilities.load_units {
        for k in 1..=model.horizon {
            if model.profiles.load_g(load.class, k) == 0.0 {
                continue;
            }
            let vr = x[index.v_real(load.buffer, k)];
            let vi = x[index.v_imag(load.buffer, k)];
            let t = p * vr + d;
            let s = vr * vr + vi * vi;
            worst_gap = worst_gap.max(t - s);
            worst_vi = worst_vi.max(vi.abs());
        }
    }
    (worst_gap, worst_vi)
}

/// Verify that a solved vector satisfies the bus current balances exactly:
/// the place-dynamics rows of electric places are the current law, so this
/// simply filters the problem audit to those rows.
pub fn kcl_violations(prob: &ProblemMatrices, x: &[f64], tol: f64) -> Vec<String> {
    prob.audit(x, tol)
        .into_iter()
        .filter(|m| m.contains("place-dynamics"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::{assemble_full, index_variables, Assembler};
    use crate::builder::{build_boundary, build_mini, derive_net};
    use crate::model::ScenarioKind;

    /// Feed one line Ohm row pair with a fixed voltage drop and check the
    /// reference currents: G = 46.5, B = −15.8, ΔV_R = 0.01, ΔV_I = 0 gives
    /// a real current of 0.465 and an imaginary current of magnitude 0.158
    /// (negative under the implemented sign convention).
    #[test]
    fn line_current_law_reference_values() {
        let model = build_mini(&Default::default()).unwrap();
        let (net, catalog) = derive_net(&model).unwrap();
        let index = index_variables(&model, &net);
        let mut asm = Assembler::new(index);
        attach_device_models(&mut asm, &model, &catalog).unwrap();
        let prob = asm.finish();
        // Line 0 runs G→W with (46.5, −15.8).
        let line = &model.lines[0];
        assert_eq!((line.conductance, line.susceptance), (46.5, -15.8));
        let k = 1;
        let mut x = vec![0.0; prob.n_vars];
        x[prob.index.v_real(line.from, k)] = 1.01;
        x[prob.index.v_real(line.to, k)] = 1.00;
        let tr = catalog.line_real_t[0];
        let ti = catalog.line_imag_t[0];
        // Solve the two Ohm rows for the currents.
        x[prob.index.u_minus(tr, k)] = 46.5 * 0.01;
        x[prob.index.u_minus(ti, k)] = -15.8 * 0.01;
        let viol: Vec<String> = prob
            .audit(&x, 1e-9)
            .into_iter()
            .filter(|m| m.contains(&format!("ohm-real t{tr} k{k}")) || m.contains(&format!("ohm-imag t{ti} k{k}")))
            .collect();
        assert!(viol.is_empty(), "FAIL: line currents disagree with the current law: {viol:?}");
        assert!((x[prob.index.u_minus(tr, k)] - 0.465).abs() < 1e-12);
        assert!((x[prob.index.u_minus(ti, k)].abs() - 0.158).abs() < 1e-12);
    }

    /// Load with G = 1, B = −0.4843 at V = 1 + j0 draws current of magnitude
    /// 1.111 at power factor 0.9.
    #[test]
    fn load_current_law_reference_magnitude() {
        let g: f64 = 1.0;
        let b: f64 = -PF_TAN * g;
        let (vr, vi) = (1.0, 0.0);
        let ir = g * vr - b * vi;
        let ii = b * vr + g * vi;
        let mag = (ir * ir + ii * ii).sqrt();
        assert!((mag - 1.111).abs() < 1e-3, "FAIL: load magnitude {mag}");
        let pf = ir / mag;
        assert!((pf - 0.9).abs() < 1e-4, "FAIL: power factor {pf}");
    }

    #[test]
    fn secant_overestimates_square_within_box() {
        let (a, b, c) = (0.85, 1.1, 0.15);
        let (p, d) = demand_secant(a, b, c);
        for i in 0..=20 {
            let vr = a + (b - a) * (i as f64) / 20.0;
            for j in 0..=10 {
                let vi = -c + 2.0 * c * (j as f64) / 10.0;
                let s = vr * vr + vi * vi;
                let t = p * vr + d;
                assert!(
                    t >= s - 1e-12,
                    "FAIL: secant under-estimates at ({vr}, {vi}): {t} < {s}"
                );
            }
        }
        // Exact at the corners (V_R at either end, |V_I| = c).
        for vr in [a, b] {
            let t = p * vr + d;
            let s = vr * vr + c * c;
            assert!((t - s).abs() < 1e-12, "FAIL: secant not tight at corner {vr}");
        }
    }

    #[test]
    fn demand_coefficients_positive_for_reference_loads() {
        let model = build_mini(&Default::default()).unwrap();
        let (a_coef, c_coef) = demand_coefficients(&model, 1.0);
        assert!(a_coef > 0.0, "FAIL: quartic coefficient must stay positive (convex secant form)");
        assert!(c_coef > 0.0, "FAIL: revenue coefficient must be positive");
        // Values from the printed coefficient set at g = 1.
        assert!((a_coef - (0.6614 - 0.00049 * PF_TAN * PF_TAN)).abs() < 1e-12);
        assert!((c_coef - (0.6826 + 0.0433 * PF_TAN)).abs() < 1e-12);
    }

    #[test]
    fn true_cost_evaluator_matches_hand_computation() {
        let model = build_mini(&Default::default()).unwrap();
        let (net, catalog) = derive_net(&model).unwrap();
        let index = index_variables(&model, &net);
        let mut x = vec![0.0; index.total()];
        // Give the generator |I|² = 2 at every step: α·4 + β·2 per step.
        for k in 1..=model.horizon {
            x[index.u_minus(catalog.gen_real_t, k)] = 1.0;
            x[index.u_minus(catalog.gen_imag_t, k)] = 1.0;
        }
        // All voltages at 1 + j0.
        for bus in 0..model.buffers.len() {
            for k in 1..=model.horizon {
                x[index.v_real(bus, k)] = 1.0;
            }
        }
        let costs = electric_true_costs(&model, &catalog, &index, &x);
        let co = &model.coefficients;
        let expect_gen = model.horizon as f64 * (co.gen_alpha * 4.0 + co.gen_beta * 2.0);
        assert!((costs.z_egc - expect_gen).abs() < 1e-9, "FAIL: generator cost");
        // Demand revenue at s = 1: Σ A − C per loaded (unit, step).
        let mut expect_eds = 0.0;
        for load in &model.capabilities.load_units {
            for k in 1..=model.horizon {
                let g = model.profiles.load_g(load.class, k);
                if g > 0.0 {
                    let (a_coef, c_coef) = demand_coefficients(&model, g);
                    expect_eds += a_coef - c_coef;
                }
            }
        }
        assert!((costs.z_eds - expect_eds).abs() < 1e-9, "FAIL: demand revenue");
        assert!(costs.z_eds < 0.0, "FAIL: demand term should be a net revenue at s = 1");
        // Solar at V = 1 + j0 pays for the real current alone.
        let expect_solar: f64 = co.c_solar
            * model.capabilities.solar_units.len() as f64
            * (1..=model.horizon).map(|k| model.profiles.solar(k).0).sum::<f64>();
        assert!((costs.z_egs - expect_solar).abs() < 1e-12);
    }

    #[test]
    fn assembled_mini_problem_is_well_formed() {
        let model = build_mini(&Default::default()).unwrap();
        let (net, catalog) = derive_net(&model).unwrap();
        let boundary = build_boundary(&model, &catalog, ScenarioKind::Uncoordinated).unwrap();
        let prob = assemble_full(&model, &net, &catalog, &boundary).unwrap();
        assert!(prob.eq_rhs.len() > 0);
        // Ball constraints: 4 buses × 12 steps.
        let balls = prob
            .quad_constraints
            .iter()
            .filter(|q| matches!(q.tag, RowTag::VoltageBall { .. }))
            .count();
        assert_eq!(balls, 4 * 12);
        // Solar pins fixed both components.
        let tr = catalog.solar_real_t[0];
        let v = prob.index.u_minus(tr, 6);
        assert_eq!(prob.lower[v], prob.upper[v]);
        assert!(prob.lower[v] > 0.0, "FAIL: midday solar must be positive");
    }
}
