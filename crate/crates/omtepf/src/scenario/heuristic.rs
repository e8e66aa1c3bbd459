//! Self-interested charging behavior layered onto a committed routing: top
//! up wirelessly while driving whenever the battery has headroom, plug in at
//! the workplace from the workday start and hold the outlet until full
//! (first-come-first-served over the pooled slots), and charge at home after
//! the evening commute until the end-of-day target is met.
//!
//! Each pass rewrites parking/driving firings into their charging
//! counterparts in place; the token flow through buffers is untouched, so
//! queue shapes and shared-capacity usage are preserved exactly.

use crate::builder::{Catalog, CapabilityKind};
use crate::error::{Error, Result};
use crate::model::{StationKind, TenModel};
use crate::scenario::stage::Schedule;

/// Slack used when comparing charge levels against capacities.
const SOC_TOL: f64 = 1e-9;

/// What the passes did, for diagnostics and metric cross-checks.
#[derive(Debug, Clone, Default)]
pub struct HeuristicReport {
    /// Road hops rewritten into in-motion charging hops.
    pub wireless_rewrites: usize,
    /// Vehicle-steps spent on a workplace outlet.
    pub work_slot_steps: usize,
    /// Vehicle-steps spent parked while waiting for a workplace outlet.
    pub work_wait_steps: usize,
    /// Vehicle-steps spent on a home outlet.
    pub home_charge_steps: usize,
}

/// State-of-charge trace of one vehicle under a schedule, one value per
/// instant `1..=horizon + 1`, without bound enforcement.
pub fn soc_trace(model: &TenModel, catalog: &Catalog, sched: &Schedule, ev: usize) -> Vec<f64> {
    let transitions = catalog.vehicle_transitions(ev);
    let mut trace = Vec::with_capacity(model.horizon + 1);
    trace.push(model.evs[ev].initial_soc);
    for k in 1..=model.horizon {
        let delta: f64 = transitions.iter().map(|&t| catalog.battery_rate(t) * sched.get(t, k)).sum();
        trace.push(trace[k - 1] + delta);
    }
    trace
}

/// Rewrite morning road hops into in-motion charging hops wherever an
/// electrified lane runs under the hop and the battery has headroom for the
/// net gain.  Returns the number of rewritten hops.
pub fn wireless_pass(
    model: &TenModel,
    catalog: &Catalog,
    sched: &mut Schedule,
) -> Result<usize> {
    let mut rewrites = 0;
    for it in &model.itineraries {
        let cap = model.evs[it.ev].battery_capacity;
        // (road hop, charging hop) pairs available to this vehicle.
        let mut lanes: Vec<(usize, usize)> = Vec::new();
        for lane in &model.capabilities.wireless_lanes {
            let road = &model.roads[lane.road];
            let dir = if road.a == lane.from { 0 } else { 1 };
            if let (Some(rt), Some(wt)) = (
                catalog.road_travel(lane.road, dir, it.ev),
                catalog.wireless_charge(lane.id, it.ev),
            ) {
                lanes.push((rt, wt));
            }
        }
        let transitions = catalog.vehicle_transitions(it.ev);
        let mut soc = model.evs[it.ev].initial_soc;
        for k in 1..=model.horizon {
            if k <= it.morning_window.1 {
                for &(rt, wt) in &lanes {
                    if sched.get(rt, k) == 1.0 && soc + catalog.battery_rate(wt) <= cap + SOC_TOL {
                        sched.set(rt, k, 0.0);
                        sched.set(wt, k, 1.0);
                        rewrites += 1;
                    }
                }
            }
            soc += transitions
                .iter()
                .map(|&t| catalog.battery_rate(t) * sched.get(t, k))
                .sum::<f64>();
        }
    }
    Ok(rewrites)
}

/// First-come-first-served workplace charging: every vehicle plugs in from
/// the workday-start anchor, holds its outlet until full, and vehicles
/// beyond the slot budget wait parked in arrival order (ascending id — all
/// arrivals are anchored to the same instant).
pub fn work_charge_pass(
    model: &TenModel,
    catalog: &Catalog,
    sched: &mut Schedule,
) -> Result<(usize, usize)> {
    // Pooled commercial stations per buffer.
    struct Pool {
        station: usize,
        slots: usize,
        used: usize,
    }
    let mut slot_steps = 0;
    let mut wait_steps = 0;

    // Group itineraries by workplace so one pass handles each pool.
    let mut works: Vec<usize> = model.itineraries.iter().map(|it| it.work).collect();
    works.sort_unstable();
    works.dedup();
    for &work in &works {
        let mut pools: Vec<Pool> = model
            .capabilities
            .stations
            .iter()
            .filter(|s| s.buffer == work && s.kind == StationKind::Commercial)
            .map(|s| Pool { station: s.id, slots: (s.slots + SOC_TOL).floor() as usize, used: 0 })
            .collect();
        if pools.is_empty() {
            continue;
        }
        // Remaining outlet-steps wanted per vehicle, ascending id.
        struct Want {
            ev: usize,
            park: usize,
            charge: usize,
            steps: usize,
        }
        let mut waiting: Vec<Want> = Vec::new();
        let mut window = (usize::MAX, 0);
        for it in model.itineraries.iter().filter(|it| it.work == work) {
            window.0 = window.0.min(it.work_arrival);
            window.1 = window.1.max(it.work_departure);
            let park = catalog
                .parking(work, it.ev)
                .ok_or_else(|| Error::Structure(format!("no work parking for ev {}", it.ev)))?;
            let (station, charge) = pools
                .iter()
                .find_map(|p| catalog.wired_charge(p.station, it.ev).map(|t| (p.station, t)))
                .ok_or_else(|| {
                    Error::Structure(format!("no workplace outlet reaches ev {}", it.ev))
                })?;
            let _ = station;
            let rate = catalog.battery_rate(charge);
            let soc_at_start = soc_trace(model, catalog, sched, it.ev)[it.work_arrival - 1];
            let deficit = model.evs[it.ev].battery_capacity - soc_at_start;
            let steps = ((deficit + SOC_TOL) / rate).floor() as usize;
            if steps > 0 {
                waiting.push(Want { ev: it.ev, park, charge, steps });
            }
        }
        waiting.sort_by_key(|w| w.ev);
        let mut active: Vec<Want> = Vec::new();
        for k in window.0..=window.1 {
            if waiting.is_empty() && active.is_empty() {
                break;
            }
            // Vehicles already on an outlet keep it; newly admitted vehicles
            // fill the freed slots in arrival order.
            let mut admitted = 0;
            while admitted < waiting.len() {
                let want = &waiting[admitted];
                let pool = pools
                    .iter_mut()
                    .find(|p| p.used < p.slots && catalog.wired_charge(p.station, want.ev).is_some());
                match pool {
                    Some(p) => {
                        p.used += 1;
                        admitted += 1;
                    }
                    None => break,
                }
            }
            active.extend(waiting.drain(..admitted));
            for want in &mut active {
                if sched.get(want.park, k) != 1.0 {
                    return Err(Error::HeuristicConflict(format!(
                        "vehicle {} is not parked at the workplace at step {k}",
                        want.ev
                    )));
                }
                sched.set(want.park, k, 0.0);
                sched.set(want.charge, k, 1.0);
                want.steps -= 1;
                slot_steps += 1;
            }
            for done in active.iter().filter(|w| w.steps == 0) {
                for p in pools.iter_mut() {
                    if catalog.wired_charge(p.station, done.ev) == Some(done.charge) {
                        p.used -= 1;
                        break;
                    }
                }
            }
            active.retain(|w| w.steps > 0);
            wait_steps += waiting.len();
        }
        if !waiting.is_empty() || !active.is_empty() {
            return Err(Error::HeuristicConflict(format!(
                "workplace charging at buffer {work} does not finish inside the workday"
            )));
        }
    }
    Ok((slot_steps, wait_steps))
}

/// Overnight charging: rewrite the earliest home-parking firings after the
/// evening commute into home charging until the end-of-day target is met.
/// Returns the number of charging steps inserted.
pub fn home_charge_pass(
    model: &TenModel,
    catalog: &Catalog,
    sched: &mut Schedule,
) -> Result<usize> {
    let mut inserted = 0;
    for it in &model.itineraries {
        let home_station = model
            .capabilities
            .stations
            .iter()
            .find(|s| s.buffer == it.home && s.kind == StationKind::Home)
            .ok_or_else(|| Error::Structure(format!("no home station at buffer {}", it.home)))?;
        let charge = catalog.wired_charge(home_station.id, it.ev).ok_or_else(|| {
            Error::Structure(format!("home station misses an outlet for ev {}", it.ev))
        })?;
        let park = catalog
            .parking(it.home, it.ev)
            .ok_or_else(|| Error::Structure(format!("no home parking for ev {}", it.ev)))?;
        let trace = soc_trace(model, catalog, sched, it.ev);
        let need = model.evs[it.ev].final_soc - trace[model.horizon];
        if need <= SOC_TOL {
            continue;
        }
        let rate = catalog.battery_rate(charge);
        let steps_f = need / rate;
        let steps = steps_f.round();
        if (steps_f - steps).abs() > 1e-6 {
            return Err(Error::HeuristicConflict(format!(
                "vehicle {} needs {need} charge units at home, not a whole number of steps",
                it.ev
            )));
        }
        let mut remaining = steps as usize;
        for k in it.work_departure + 1..=model.horizon {
            if remaining == 0 {
                break;
            }
            if sched.get(park, k) == 1.0 {
                sched.set(park, k, 0.0);
                sched.set(charge, k, 1.0);
                remaining -= 1;
                inserted += 1;
            }
        }
        if remaining > 0 {
            return Err(Error::HeuristicConflict(format!(
                "vehicle {} cannot reach its end-of-day charge target: {remaining} steps short",
                it.ev
            )));
        }
    }
    Ok(inserted)
}

/// Run all three passes in order and report what they did.
pub fn apply_all(
    model: &TenModel,
    catalog: &Catalog,
    sched: &mut Schedule,
) -> Result<HeuristicReport> {
    let wireless_rewrites = wireless_pass(model, catalog, sched)?;
    let (work_slot_steps, work_wait_steps) = work_charge_pass(model, catalog, sched)?;
    let home_charge_steps = home_charge_pass(model, catalog, sched)?;
    Ok(HeuristicReport { wireless_rewrites, work_slot_steps, work_wait_steps, home_charge_steps })
}

/// Total steps each charging family fires in a schedule, for report tables:
/// `(wired home, wired commercial, wireless)`.
pub fn charging_steps(
    model: &TenModel,
    catalog: &Catalog,
    sched: &Schedule,
) -> (usize, usize, usize) {
    let mut home = 0;
    let mut commercial = 0;
    let mut wireless = 0;
    for (t, cap) in catalog.caps.iter().enumerate() {
        let count: f64 = (1..=model.horizon).map(|k| sched.get(t, k)).sum();
        match cap.kind {
            CapabilityKind::WiredCharge { station, .. } => {
                let kind = model.capabilities.stations[station].kind;
                if kind == StationKind::Home {
                    home += count as usize;
                } else {
                    commercial += count as usize;
                }
            }
            CapabilityKind::WirelessCharge { .. } => wireless += count as usize,
            _ => {}
        }
    }
    (home, commercial, wireless)
}

// ===========================================================================
// Tests
// ===========================================================================
