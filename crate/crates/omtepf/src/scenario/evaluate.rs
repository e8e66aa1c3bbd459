//! Day-cycle evaluation: cost tables recomputed from first principles,
//! battery energy ledgers, queue trajectories, and fleet service metrics.
//!
//! Everything here is derived from the composed solution (or its replayed
//! trajectory) with the *true* cost formulas — never from a solver's own
//! objective claim — so the numbers stay comparable across solver backends
//! and scenarios.

use crate::index::VariableIndex;
use crate::builder::{Catalog, CapabilityKind};
use crate::model::{StationKind, TenModel};
use crate::power::{self, ElectricCosts};
use crate::scenario::stage::Trajectory;

// ---------------------------------------------------------------------------
// Transport cost
// ---------------------------------------------------------------------------

/// Movement + queue cost of a composed solution, mirroring the emitted
/// transport objective: the travel price on every in-motion activity marking
/// and the queue price on every vehicle token resting in a buffer, both
/// summed over instants 2..=K+1 (the pinned first instant is cost-free).
pub fn transport_cost(
    model: &TenModel,
    catalog: &Catalog,
    index: &VariableIndex,
    x: &[f64],
) -> f64 {
    let mut cost = 0.0;
    for (t, cap) in catalog.caps.iter().enumerate() {
        if matches!(
            cap.kind,
            CapabilityKind::RoadTravel { .. } | CapabilityKind::WirelessCharge { .. }
        ) {
            for inst in 2..=model.horizon + 1 {
                cost += model.coefficients.f_qet * x[index.q_e(t, inst)];
            }
        }
    }
    for ev in 0..catalog.n_evs {
        for b in 0..catalog.n_buffers {
            let p = catalog.place_ev(ev, b);
            for inst in 2..=model.horizon + 1 {
                cost += model.coefficients.f_qbt * x[index.q_b(p, inst)];
            }
        }
    }
    cost
}

// ---------------------------------------------------------------------------
// Queues
// ---------------------------------------------------------------------------

/// Total vehicle tokens resting in buffers at each instant (index 0 =
/// instant 1).  A token rests in a buffer exactly while it queues for its
/// next activity, so this is the fleet queue-length trajectory.
pub fn queue_lengths(model: &TenModel, catalog: &Catalog, traj: &Trajectory) -> Vec<f64> {
    (0..=model.horizon)
        .map(|i| {
            (0..catalog.n_evs)
                .map(|ev| {
                    (0..catalog.n_buffers)
                        .map(|b| traj.q_b[catalog.place_ev(ev, b)][i])
                        .sum::<f64>()
                })
                .sum()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Fleet metrics
// ---------------------------------------------------------------------------

/// Fleet service metrics over the day.  All shares are fractions of the
/// same denominator: vehicle-instants (`n_evs × (horizon + 1)`).
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// 1 − queue share: the fraction of vehicle-time not spent waiting.
    pub qos: f64,
    /// Share of vehicle-time spent moving (road or in-motion charging).
    pub utilization: f64,
    /// Share of vehicle-time not consumed by charging or queueing.
    pub availability: f64,
    /// Utilization of the *available* time: `utilization / availability`.
    pub effective_utilization: f64,
    pub driving_steps: f64,
    pub wired_steps: f64,
    pub wireless_steps: f64,
    pub queue_steps: f64,
    pub queue_peak: f64,
    pub denominator: f64,
}

/// Compute the fleet metrics from a replayed trajectory.
pub fn fleet_metrics(model: &TenModel, catalog: &Catalog, traj: &Trajectory) -> Metrics {
    let mut driving = 0.0;
    let mut wired = 0.0;
    let mut wireless = 0.0;
    // Activity markings at instants 2..=K+1; the pinned first instant's
    // mid-parking is neither driving nor charging.
    for (t, cap) in catalog.caps.iter().enumerate() {
        let steps: f64 = (1..=model.horizon).map(|k| traj.q_e[t][k]).sum();
        match cap.kind {
            CapabilityKind::RoadTravel { .. } => driving += steps,
            CapabilityKind::WirelessCharge { .. } => {
                driving += steps;
                wireless += steps;
            }
            CapabilityKind::WiredCharge { .. } => wired += steps,
            _ => {}
        }
    }
    let queues = queue_lengths(model, catalog, traj);
    let queue_steps: f64 = queues.iter().sum();
    let queue_peak = queues.iter().cloned().fold(0.0, f64::max);
    let denominator = (catalog.n_evs * (model.horizon + 1)) as f64;

    let qos = 1.0 - queue_steps / denominator;
    let utilization = driving / denominator;
    let availability = 1.0 - (wired + wireless + queue_steps) / denominator;
    Metrics {
        qos,
        utilization,
        availability,
        effective_utilization: utilization / availability,
        driving_steps: driving,
        wired_steps: wired,
        wireless_steps: wireless,
        queue_steps,
        queue_peak,
        denominator,
    }
}

// ---------------------------------------------------------------------------
// Cost table
// ---------------------------------------------------------------------------

/// The day's cost decomposition, every term recomputed from the composed
/// solution with the true (quartic) electric formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    /// Travel time cost (movement activity-steps × travel price).
    pub z_tt: f64,
    /// Queue time cost (queue token-steps × queue price).
    pub z_tq: f64,
    /// Dispatchable generation cost.
    pub z_egc: f64,
    /// Solar procurement cost (exogenous, scenario-independent).
    pub z_egs: f64,
    /// Demand revenue (negative = the utility earns).
    pub z_eds: f64,
    /// Vehicle energy compensation: travelers are reimbursed their movement
    /// cost, the exact negative of `z_tt`.
    pub z_ec: f64,
    pub total: f64,
}

/// Build the cost table from a composed, audited solution vector.
pub fn cost_table(
    model: &TenModel,
    catalog: &Catalog,
    index: &VariableIndex,
    x: &[f64],
) -> CostTable {
    let mut z_tt = 0.0;
    for (t, cap) in catalog.caps.iter().enumerate() {
        if matches!(
            cap.kind,
            CapabilityKind::RoadTravel { .. } | CapabilityKind::WirelessCharge { .. }
        ) {
            for inst in 2..=model.horizon + 1 {
                z_tt += model.coefficients.f_qet * x[index.q_e(t, inst)];
            }
        }
    }
    let mut z_tq = 0.0;
    for ev in 0..catalog.n_evs {
        for b in 0..catalog.n_buffers {
            let p = catalog.place_ev(ev, b);
            for inst in 2..=model.horizon + 1 {
                z_tq += model.coefficients.f_qbt * x[index.q_b(p, inst)];
            }
        }
    }
    let ElectricCosts { z_egc, z_eds, z_egs } = power::electric_true_costs(model, catalog, index, x);
    let z_ec = -z_tt;
    CostTable { z_tt, z_tq, z_egc, z_egs, z_eds, z_ec, total: z_tt + z_tq + z_egc + z_egs + z_eds + z_ec }
}

// ---------------------------------------------------------------------------
// Battery ledger
// ---------------------------------------------------------------------------

/// Battery energy moved over the day, by charging family, in battery units.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryLedger {
    pub home: f64,
    pub commercial: f64,
    pub wireless: f64,
    /// Total energy added (home + commercial + wireless).
    pub charged: f64,
    /// Total energy removed by road travel (positive number).
    pub discharged: f64,
}

/// Sum charge/discharge rates over the replayed activity markings.
pub fn battery_ledger(model: &TenModel, catalog: &Catalog, traj: &Trajectory) -> BatteryLedger {
    let mut home = 0.0;
    let mut commercial = 0.0;
    let mut wireless = 0.0;
    let mut discharged = 0.0;
    for (t, cap) in catalog.caps.iter().enumerate() {
        let steps: f64 = (1..=model.horizon).map(|k| traj.q_e[t][k]).sum();
        let rate = catalog.battery_rate(t);
        match cap.kind {
            CapabilityKind::RoadTravel { .. } => discharged += -rate * steps,
            CapabilityKind::WirelessCharge { .. } => wireless += rate * steps,
            CapabilityKind::WiredCharge { station, .. } => {
                if model.capabilities.stations[station].kind == StationKind::Home {
                    home += rate * steps;
                } else {
                    commercial += rate * steps;
                }
            }
            _ => {}
        }
    }
    BatteryLedger {
        home,
        commercial,
        wireless,
        charged: home + commercial + wireless,
        discharged,
    }
}

// ---------------------------------------------------------------------------
// Grid energy accounting
// ---------------------------------------------------------------------------

/// One cost bearer of the grid day: its total cost, the electric energy it
/// moved (power × step, per-unit), and the resulting unit price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub cost: f64,
    /// Energy moved over the day, always reported as a positive quantity.
    pub energy: f64,
    /// `|cost| / energy`; zero when no energy moved.
    pub unit_cost: f64,
}

impl EnergyRow {
    fn new(cost: f64, energy: f64) -> Self {
        let unit_cost = if energy.abs() > 1e-12 { cost.abs() / energy } else { 0.0 };
        EnergyRow { cost, energy, unit_cost }
    }
}

/// Grid-side energy accounting: who produced, who consumed, and at what
/// effective price.  Every power term is `v_r·i_r + v_i·i_i` at the device's
/// bus, summed over firing steps, so the rows are consistent with the current
/// conservation rows of the composed program.
#[derive(Debug, Clone, PartialEq)]
pub struct GridEnergyTable {
    /// Dispatchable generation: quartic cost over delivered energy.
    pub generator: EnergyRow,
    /// Solar procurement: linear cost over delivered energy.
    pub solar: EnergyRow,
    /// Vehicle charging: the travel compensation over the grid energy the
    /// chargers drew.
    pub charging: EnergyRow,
    /// Exogenous demand: revenue (negative cost) over the energy served.
    pub demand: EnergyRow,
    /// Resistive line losses over the day (energy only).
    pub line_losses: f64,
}

/// Build the grid energy table from a composed, audited solution vector and
/// its recomputed cost table.
pub fn grid_energy_table(
    model: &TenModel,
    catalog: &Catalog,
    index: &VariableIndex,
    x: &[f64],
    costs: &CostTable,
) -> GridEnergyTable {
    let scale = model.coefficients.current_draw_scale;
    let mut gen_energy = 0.0;
    let mut solar_energy = 0.0;
    let mut demand_energy = 0.0;
    let mut charging_energy = 0.0;
    let mut line_losses = 0.0;
    for k in 1..=model.horizon {
        let power = |t_real: usize, t_imag: usize| {
            let bus = catalog.caps[t_real].from_buffer;
            x[index.v_real(bus, k)] * x[index.u_minus(t_real, k)]
                + x[index.v_imag(bus, k)] * x[index.u_minus(t_imag, k)]
        };
        gen_energy += power(catalog.gen_real_t, catalog.gen_imag_t);
        for u in 0..catalog.solar_real_t.len() {
            solar_energy += power(catalog.solar_real_t[u], catalog.solar_imag_t[u]);
        }
        for u in 0..catalog.load_real_t.len() {
            demand_energy += power(catalog.load_real_t[u], catalog.load_imag_t[u]);
        }
        for (i, &t) in catalog.line_real_t.iter().enumerate() {
            let from = catalog.caps[t].from_buffer;
            let to = catalog.caps[t].to_buffer;
            let ir = x[index.u_minus(t, k)];
            let ii = x[index.u_minus(catalog.line_imag_t[i], k)];
            let dvr = x[index.v_real(from, k)] - x[index.v_real(to, k)];
            let dvi = x[index.v_imag(from, k)] - x[index.v_imag(to, k)];
            line_losses += dvr * ir + dvi * ii;
        }
        for (t, cap) in catalog.caps.iter().enumerate() {
            if let Some((dr, di)) = cap.draw {
                let firing = x[index.u_minus(t, k)];
                if firing > 0.5 {
                    let bus = cap.from_buffer;
                    charging_energy += firing
                        * scale
                        * (dr * x[index.v_real(bus, k)] + di * x[index.v_imag(bus, k)]);
                }
            }
        }
    }
    GridEnergyTable {
        generator: EnergyRow::new(costs.z_egc, gen_energy),
        solar: EnergyRow::new(costs.z_egs, solar_energy),
        charging: EnergyRow::new(costs.z_ec, charging_energy),
        demand: EnergyRow::new(costs.z_eds, demand_energy),
        line_losses,
    }
}

// ===========================================================================
// Tests
// ===========================================================================
