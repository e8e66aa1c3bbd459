//! Report writers: CSV time series, the two summary tables, and a JSON
//! metrics blob, all derived from one audited [`ScenarioOutcome`].
//!
//! Every file is recomputed from the composed solution vector or the
//! replayed trajectory; nothing is forwarded from solver internals.  Files
//! written into the output directory:
//!
//! | file             | content                                            |
//! |------------------|----------------------------------------------------|
//! | `voltages.csv`   | per-bus voltage magnitude per step                 |
//! | `currents.csv`   | per-line current magnitude per step                |
//! | `soc.csv`        | per-vehicle battery level at the end of each step  |
//! | `locations.csv`  | per-vehicle activity label at the end of each step |
//! | `queues.csv`     | per-buffer resting vehicle tokens per instant      |
//! | `generation.csv` | dispatchable + solar injection and step cost       |
//! | `summary.csv`    | the six cost categories and their total            |
//! | `energy.csv`     | cost / energy / unit cost per grid cost bearer     |
//! | `metrics.json`   | machine-readable metrics, costs, and run metadata  |

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::builder::{Catalog, CapabilityKind};
use crate::error::Result;
use crate::model::{ScenarioKind, TenModel};
use crate::scenario::evaluate::{self, BatteryLedger, CostTable, GridEnergyTable, Metrics};
use crate::scenario::ScenarioOutcome;
use crate::solve::Status;

/// Quantize to a stable text form: enough digits to round-trip the physics,
/// few enough to diff.
fn num(v: f64) -> String {
    format!("{v:.9}")
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(content.as_bytes())?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Time series
// ---------------------------------------------------------------------------

fn voltages_csv(model: &TenModel, out: &ScenarioOutcome) -> String {
    let index = &out.problem.index;
    let mut s = String::from("step");
    for b in &model.buffers {
        s.push_str(&format!(",{}", b.name));
    }
    s.push('\n');
    for k in 1..=model.horizon {
        s.push_str(&k.to_string());
        for b in &model.buffers {
            let vr = out.dispatch.x[index.v_real(b.id, k)];
            let vi = out.dispatch.x[index.v_imag(b.id, k)];
            s.push_str(&format!(",{}", num(vr.hypot(vi))));
        }
        s.push('\n');
    }
    s
}

fn currents_csv(model: &TenModel, catalog: &Catalog, out: &ScenarioOutcome) -> String {
    let index = &out.problem.index;
    // Transition pair per line, in line order.
    let mut pairs = vec![(usize::MAX, usize::MAX); model.lines.len()];
    for (t, cap) in catalog.caps.iter().enumerate() {
        match cap.kind {
            CapabilityKind::LineReal { line } => pairs[line].0 = t,
            CapabilityKind::LineImag { line } => pairs[line].1 = t,
            _ => {}
        }
    }
    let mut s = String::from("step");
    for line in &model.lines {
        s.push_str(&format!(
            ",{}-{}",
            model.buffers[line.from].name, model.buffers[line.to].name
        ));
    }
    s.push('\n');
    for k in 1..=model.horizon {
        s.push_str(&k.to_string());
        for (tr, ti) in &pairs {
            let ir = out.dispatch.x[index.u_minus(*tr, k)];
            let ii = out.dispatch.x[index.u_minus(*ti, k)];
            s.push_str(&format!(",{}", num(ir.hypot(ii))));
        }
        s.push('\n');
    }
    s
}

fn soc_csv(model: &TenModel, out: &ScenarioOutcome) -> String {
    let mut s = String::from("step");
    for ev in &model.evs {
        s.push_str(&format!(",ev{}", ev.id));
    }
    s.push('\n');
    for k in 1..=model.horizon {
        s.push_str(&k.to_string());
        for ev in &model.evs {
            // Battery level at the end of step k (instant k+1).
            s.push_str(&format!(",{}", num(out.trajectory.soc[ev.id][k])));
        }
        s.push('\n');
    }
    s
}

/// Label of one vehicle's state at an instant: the activity its token is
/// inside, or the buffer it rests in while queueing.
fn location_label(
    model: &TenModel,
    catalog: &Catalog,
    out: &ScenarioOutcome,
    ev: usize,
    instant_idx: usize,
) -> String {
    let name = |b: usize| model.buffers[b].name.as_str();
    for t in catalog.vehicle_transitions(ev) {
        if out.trajectory.q_e[t][instant_idx] > 0.5 {
            let cap = &catalog.caps[t];
            return match cap.kind {
                CapabilityKind::Parking { .. } => format!("parked:{}", name(cap.from_buffer)),
                CapabilityKind::WiredCharge { .. } => {
                    format!("charging:{}", name(cap.from_buffer))
                }
                CapabilityKind::RoadTravel { .. } => {
                    format!("road:{}>{}", name(cap.from_buffer), name(cap.to_buffer))
                }
                CapabilityKind::WirelessCharge { .. } => {
                    format!("wireless:{}>{}", name(cap.from_buffer), name(cap.to_buffer))
                }
                _ => unreachable!("vehicle transitions carry vehicle kinds"),
            };
        }
    }
    for b in 0..catalog.n_buffers {
        if out.trajectory.q_b[catalog.place_ev(ev, b)][instant_idx] > 0.5 {
            return format!("queued:{}", name(b));
        }
    }
    String::from("unaccounted")
}

fn locations_csv(model: &TenModel, catalog: &Catalog, out: &ScenarioOutcome) -> String {
    let mut s = String::from("step");
    for ev in &model.evs {
        s.push_str(&format!(",ev{}", ev.id));
    }
    s.push('\n');
    for k in 1..=model.horizon {
        s.push_str(&k.to_string());
        for ev in &model.evs {
            s.push_str(&format!(",{}", location_label(model, catalog, out, ev.id, k)));
        }
        s.push('\n');
    }
    s
}

fn queues_csv(model: &TenModel, catalog: &Catalog, out: &ScenarioOutcome) -> String {
    let mut s = String::from("instant");
    for b in &model.buffers {
        s.push_str(&format!(",{}", b.name));
    }
    s.push_str(",total\n");
    for i in 0..=model.horizon {
        s.push_str(&(i + 1).to_string());
        let mut total = 0.0;
        for b in &model.buffers {
            let q: f64 = (0..catalog.n_evs)
                .map(|ev| out.trajectory.q_b[catalog.place_ev(ev, b.id)][i])
                .sum();
            total += q;
            s.push_str(&format!(",{}", num(q)));
        }
        s.push_str(&format!(",{}\n", num(total)));
    }
    s
}

fn generation_csv(model: &TenModel, catalog: &Catalog, out: &ScenarioOutcome) -> String {
    let index = &out.problem.index;
    let mut solar_pairs: Vec<(usize, usize)> =
        vec![(usize::MAX, usize::MAX); model.capabilities.solar_units.len()];
    for (t, cap) in catalog.caps.iter().enumerate() {
        match cap.kind {
            CapabilityKind::SolarReal { unit } => solar_pairs[unit].0 = t,
            CapabilityKind::SolarImag { unit } => solar_pairs[unit].1 = t,
            _ => {}
        }
    }
    let mut s =
        String::from("step,gen_real,gen_imag,gen_magnitude,solar_real,solar_imag,step_cost\n");
    for k in 1..=model.horizon {
        let ir = out.dispatch.x[index.u_minus(catalog.gen_real_t, k)];
        let ii = out.dispatch.x[index.u_minus(catalog.gen_imag_t, k)];
        let sr: f64 =
            solar_pairs.iter().map(|(t, _)| out.dispatch.x[index.u_minus(*t, k)]).sum();
        let si: f64 =
            solar_pairs.iter().map(|(_, t)| out.dispatch.x[index.u_minus(*t, k)]).sum();
        s.push_str(&format!(
            "{k},{},{},{},{},{},{}\n",
            num(ir),
            num(ii),
            num(ir.hypot(ii)),
            num(sr),
            num(si),
            num(out.dispatch.step_values[k - 1]),
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// Summary tables
// ---------------------------------------------------------------------------

fn summary_csv(table: &CostTable) -> String {
    let mut s = String::from("category,value\n");
    for (name, v) in [
        ("Z_TT", table.z_tt),
        ("Z_TQ", table.z_tq),
        ("Z_EGC", table.z_egc),
        ("Z_EGS", table.z_egs),
        ("Z_EC", table.z_ec),
        ("Z_EDS", table.z_eds),
        ("TOTAL", table.total),
    ] {
        s.push_str(&format!("{name},{}\n", num(v)));
    }
    s
}

fn energy_csv(grid: &GridEnergyTable) -> String {
    let mut s = String::from("category,cost,energy,unit_cost\n");
    for (name, row) in [
        ("dispatchable_generator", &grid.generator),
        ("solar", &grid.solar),
        ("charging", &grid.charging),
        ("exogenous_demand", &grid.demand),
    ] {
        s.push_str(&format!(
            "{name},{},{},{}\n",
            num(row.cost),
            num(row.energy),
            num(row.unit_cost)
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// JSON metrics
// ---------------------------------------------------------------------------

fn energy_row_json(row: &evaluate::EnergyRow) -> serde_json::Value {
    json!({ "cost": row.cost, "energy": row.energy, "unit_cost": row.unit_cost })
}

fn status_str(status: Status) -> &'static str {
    match status {
        Status::Optimal => "optimal",
        Status::Limit => "limit",
        Status::Infeasible => "infeasible",
        Status::Unbounded => "unbounded",
    }
}

fn metrics_json(
    model: &TenModel,
    catalog: &Catalog,
    out: &ScenarioOutcome,
    costs: &CostTable,
    battery: &BatteryLedger,
    grid: &GridEnergyTable,
    metrics: &Metrics,
) -> String {
    // Queue decomposition by commute: instants up to the last work arrival
    // belong to the morning window, the rest to the evening.
    let queues = evaluate::queue_lengths(model, catalog, &out.trajectory);
    let split = model.itineraries.iter().map(|it| it.work_arrival).max().unwrap_or(0);
    let morning: f64 = queues.iter().take(split).sum();
    let evening: f64 = queues.iter().skip(split).sum();

    let scenario = match out.scenario {
        ScenarioKind::Uncoordinated => "uncoordinated",
        ScenarioKind::Coordinated => "coordinated",
    };
    let grid_cost: f64 = out.dispatch.step_values.iter().sum();
    let value = json!({
        "scenario": scenario,
        "solver": out.solver.to_string(),
        "status": status_str(out.status),
        "objective": out.objective,
        "transport_cost": out.transport_cost,
        "grid_cost": grid_cost,
        "wall_secs": out.wall_secs,
        "horizon": model.horizon,
        "vehicles": model.evs.len(),
        "costs": {
            "z_tt": costs.z_tt,
            "z_tq": costs.z_tq,
            "z_egc": costs.z_egc,
            "z_egs": costs.z_egs,
            "z_ec": costs.z_ec,
            "z_eds": costs.z_eds,
            "total": costs.total,
        },
        "battery": {
            "home": battery.home,
            "commercial": battery.commercial,
            "wireless": battery.wireless,
            "charged": battery.charged,
            "discharged": battery.discharged,
        },
        "grid_energy": {
            "dispatchable_generator": energy_row_json(&grid.generator),
            "solar": energy_row_json(&grid.solar),
            "charging": energy_row_json(&grid.charging),
            "exogenous_demand": energy_row_json(&grid.demand),
            "line_losses": grid.line_losses,
        },
        "metrics": {
            "qos": metrics.qos,
            "utilization": metrics.utilization,
            "availability": metrics.availability,
            "effective_utilization": metrics.effective_utilization,
            "driving_steps": metrics.driving_steps,
            "wired_steps": metrics.wired_steps,
            "wireless_steps": metrics.wireless_steps,
            "queue_steps": metrics.queue_steps,
            "queue_steps_morning": morning,
            "queue_steps_evening": evening,
            "queue_peak": metrics.queue_peak,
            "denominator": metrics.denominator,
        },
        "heuristics": out.heuristics.as_ref().map(|h| json!({
            "wireless_rewrites": h.wireless_rewrites,
            "work_slot_steps": h.work_slot_steps,
            "work_wait_steps": h.work_wait_steps,
            "home_charge_steps": h.home_charge_steps,
        })),
        "coordination": out.coordination.as_ref().map(|c| json!({
            "rounds": c.rounds.len(),
            "lower_bound": c.lower_bound,
            "upper_bound": c.upper_bound,
            "gap": c.gap,
            "converged": c.converged,
        })),
    });
    serde_json::to_string_pretty(&value).expect("metrics serialize") + "\n"
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Write every report for one scenario outcome into `dir` (created if
/// missing).  Returns the written paths.
pub fn write_reports(
    dir: &Path,
    model: &TenModel,
    catalog: &Catalog,
    out: &ScenarioOutcome,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let costs = evaluate::cost_table(model, catalog, &out.problem.index, &out.dispatch.x);
    let battery = evaluate::battery_ledger(model, catalog, &out.trajectory);
    let grid =
        evaluate::grid_energy_table(model, catalog, &out.problem.index, &out.dispatch.x, &costs);
    let metrics = evaluate::fleet_metrics(model, catalog, &out.trajectory);

    let files = vec![
        write_file(dir, "voltages.csv", &voltages_csv(model, out))?,
        write_file(dir, "currents.csv", &currents_csv(model, catalog, out))?,
        write_file(dir, "soc.csv", &soc_csv(model, out))?,
        write_file(dir, "locations.csv", &locations_csv(model, catalog, out))?,
        write_file(dir, "queues.csv", &queues_csv(model, catalog, out))?,
        write_file(dir, "generation.csv", &generation_csv(model, catalog, out))?,
        write_file(dir, "summary.csv", &summary_csv(&costs))?,
        write_file(dir, "energy.csv", &energy_csv(&grid))?,
        write_file(
            dir,
            "metrics.json",
            &metrics_json(model, catalog, out, &costs, &battery, &grid, &metrics),
        )?,
    ];
    Ok(files)
}

// ===========================================================================
// Tests
// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{build_mini, MiniConfig};
    use crate::scenario::{run_scenario, SolverChoice};
    use crate::solve::SolveOptions;

    fn mini_outcome() -> (TenModel, Catalog, ScenarioOutcome) {
        let model = build_mini(&MiniConfig::default()).expect("mini model builds");
        let (_, catalog) = crate::builder::derive_net(&model).expect("net derives");
        let out = run_scenario(
            &model,
            ScenarioKind::Uncoordinated,
            &SolveOptions::default(),
            SolverChoice::Builtin,
        )
        .expect("pipeline runs");
        (model, catalog, out)
    }

    #[test]
    fn reports_cover_every_file_with_the_contracted_shapes() {
        let (model, catalog, out) = mini_outcome();
        let dir = tempfile::tempdir().expect("tempdir");
        let files = write_reports(dir.path(), &model, &catalog, &out).expect("reports write");
        assert_eq!(files.len(), 9);
        for f in &files {
            assert!(f.exists(), "FAIL: missing report {}", f.display());
        }

        // Battery series: one row per step, one column per vehicle.
        let soc = std::fs::read_to_string(dir.path().join("soc.csv")).unwrap();
        let rows: Vec<&str> = soc.lines().collect();
        assert_eq!(rows.len(), model.horizon + 1, "FAIL: header + one row per step");
        assert_eq!(rows[0].split(',').count(), model.evs.len() + 1);

        // Summary: the six cost categories plus their total.
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        let names: Vec<&str> =
            summary.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(names, ["Z_TT", "Z_TQ", "Z_EGC", "Z_EGS", "Z_EC", "Z_EDS", "TOTAL"]);

        // Energy accounting: four cost bearers, three numeric columns each.
        let energy = std::fs::read_to_string(dir.path().join("energy.csv")).unwrap();
        let categories: Vec<&str> =
            energy.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(
            categories,
            ["dispatchable_generator", "solar", "charging", "exogenous_demand"]
        );
        for line in energy.lines().skip(1) {
            assert_eq!(line.split(',').count(), 4, "FAIL: bad energy row {line}");
        }

        // Metrics blob parses and carries the run identity.
        let blob = std::fs::read_to_string(dir.path().join("metrics.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&blob).unwrap();
        assert_eq!(v["scenario"], "uncoordinated");
        assert_eq!(v["status"], "optimal");
        assert!(v["metrics"]["availability"].as_f64().unwrap() < 1.0);
        assert!(v["grid_energy"]["solar"]["unit_cost"].as_f64().unwrap() > 0.0);
        assert!(v["heuristics"].is_object());
        assert!(v["coordination"].is_null());
    }

    #[test]
    fn every_vehicle_is_accounted_for_at_every_step() {
        let (model, catalog, out) = mini_outcome();
        let csv = locations_csv(&model, &catalog, &out);
        for (i, line) in csv.lines().skip(1).enumerate() {
            for cell in line.split(',').skip(1) {
                assert_ne!(
                    cell,
                    "unaccounted",
                    "FAIL: a vehicle token vanished at step {}",
                    i + 1
                );
            }
        }
        // The day starts parked at home and ends parked at home.
        let first = csv.lines().nth(1).unwrap();
        let last = csv.lines().last().unwrap();
        for cell in first.split(',').skip(1).chain(last.split(',').skip(1)) {
            assert!(cell.starts_with("parked:"), "FAIL: expected parking, found {cell}");
        }
    }
}
