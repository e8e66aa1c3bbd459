//! Commute staging: shortest-route lattices over the road graph, boundary
//! variants for the routing problems, and integer schedule handling —
//! extraction from solver output, exact replay, and feasibility audit.
//!
//! A vehicle's commute is restricted to arcs that lie on *some* shortest
//! route between its home and workplace, taken inside the step interval in
//! which the arc can still be part of an on-time trip.  Any detour costs
//! strictly more in-flight steps and battery, so the restriction only prunes
//! dominated routings while shrinking the binary search space drastically.

use std::collections::BTreeMap;

use crate::assemble::{BoundaryData, FiringCap, PinVar};
use crate::index::VariableIndex;
use crate::builder::{Catalog, CapabilityKind};
use crate::error::{Error, Result};
use crate::model::{Itinerary, StationKind, TenModel};

/// Tolerance used when validating replayed token counts.
const TOKEN_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Road-graph distances and commute lattices
// ---------------------------------------------------------------------------

/// Hop counts from `source` to every buffer over the undirected road graph.
/// Buffers without road access (e.g. the generator) stay at `usize::MAX`.
pub fn road_distances(model: &TenModel, source: usize) -> Vec<usize> {
    let n = model.buffers.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in &model.roads {
        adj[r.a].push(r.b);
        adj[r.b].push(r.a);
    }
    let mut dist = vec![usize::MAX; n];
    dist[source] = 0;
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(b) = queue.pop_front() {
        for &nb in &adj[b] {
            if dist[nb] == usize::MAX {
                dist[nb] = dist[b] + 1;
                queue.push_back(nb);
            }
        }
    }
    dist
}

/// Inclusive firing-step window per transition in which a road hop (or the
/// wireless-charge hop sharing the same lane) can appear in an on-time
/// shortest commute of this vehicle.  Transitions absent from the map are
/// never usable by the vehicle.
pub fn commute_lattice(
    model: &TenModel,
    catalog: &Catalog,
    it: &Itinerary,
) -> Result<BTreeMap<usize, (usize, usize)>> {
    let d_home = road_distances(model, it.home);
    let d_work = road_distances(model, it.work);
    if d_home[it.work] == usize::MAX {
        return Err(Error::Config(format!(
            "no road route between buffers {} and {}",
            it.home, it.work
        )));
    }
    let total = d_home[it.work];
    let mut windows = BTreeMap::new();
    for road in &model.roads {
        for dir in 0..2u8 {
            let (from, to) = if dir == 0 { (road.a, road.b) } else { (road.b, road.a) };
            if d_home[from] == usize::MAX || d_work[to] == usize::MAX {
                continue;
            }
            // Window for this directed arc, if it sits on a shortest route of
            // either commute leg.  No arc can serve both legs: on a shortest
            // route every visited buffer satisfies d_home + d_work = total,
            // which is incompatible with using one directed arc both ways.
            // The destination activity must already be in flight at the
            // arrival instant, so it fires one step earlier and the last hop
            // must land one instant before that again.
            let window = if d_home[from] + 1 + d_work[to] == total {
                let lo = it.morning_window.0 + d_home[from];
                let hi = it.work_arrival.saturating_sub(2 + d_work[to]);
                Some((lo, hi))
            } else if d_work[from] + 1 + d_home[to] == total {
                let lo = it.evening_window.0 + d_work[from];
                let hi = it.home_arrival.saturating_sub(2 + d_home[to]);
                Some((lo, hi))
            } else {
                None
            };
            let Some((lo, hi)) = window else { continue };
            if lo > hi {
                continue;
            }
            if let Some(t) = catalog.road_travel(road.id, dir, it.ev) {
                windows.insert(t, (lo, hi));
            }
            for lane in &model.capabilities.wireless_lanes {
                if lane.road == road.id && lane.from == from && lane.to == to {
                    if let Some(t) = catalog.wireless_charge(lane.id, it.ev) {
                        windows.insert(t, (lo, hi));
                    }
                }
            }
        }
    }
    Ok(windows)
}

/// Firing caps that close every road/wireless hop outside the vehicle's
/// shortest-route lattice.
pub fn lattice_caps(model: &TenModel, catalog: &Catalog) -> Result<Vec<FiringCap>> {
    let mut caps = Vec::new();
    for it in &model.itineraries {
        let windows = commute_lattice(model, catalog, it)?;
        for (t, cap) in catalog.caps.iter().enumerate() {
            let movement = matches!(
                cap.kind,
                CapabilityKind::RoadTravel { .. } | CapabilityKind::WirelessCharge { .. }
            );
            if !movement || cap.kind.ev() != Some(it.ev) {
                continue;
            }
            match windows.get(&t) {
                Some(&(lo, hi)) => {
                    for k in 1..=model.horizon {
                        if k < lo || k > hi {
                            caps.push(FiringCap { trans: t, k, upper: 0.0 });
                        }
                    }
                }
                None => {
                    for k in 1..=model.horizon {
                        caps.push(FiringCap { trans: t, k, upper: 0.0 });
                    }
                }
            }
        }
    }
    Ok(caps)
}

// ---------------------------------------------------------------------------
// Stage boundary variants
// ---------------------------------------------------------------------------

/// Boundary for the pure-routing stage: the canonical pins minus the final
/// state-of-charge targets (charging is deferred to later passes), with every
/// charging action closed and movement restricted to the commute lattices.
pub fn routing_boundary(
    model: &TenModel,
    catalog: &Catalog,
    canonical: &BoundaryData,
) -> Result<BoundaryData> {
    let mut boundary = canonical.clone();
    boundary.pins.retain(|pin| {
        !pin.terms.iter().any(|(v, _)| matches!(v, PinVar::SocFinal { .. }))
    });
    boundary.firing_caps.extend(lattice_caps(model, catalog)?);
    for (t, cap) in catalog.caps.iter().enumerate() {
        if matches!(
            cap.kind,
            CapabilityKind::WiredCharge { .. } | CapabilityKind::WirelessCharge { .. }
        ) {
            for k in 1..=model.horizon {
                boundary.firing_caps.push(FiringCap { trans: t, k, upper: 0.0 });
            }
        }
    }
    Ok(boundary)
}

/// Boundary for the coordinated master: canonical pins (including final
/// state of charge) with movement restricted to the commute lattices and
/// charging left open inside its canonical windows.
pub fn master_boundary(
    model: &TenModel,
    catalog: &Catalog,
    canonical: &BoundaryData,
) -> Result<BoundaryData> {
    let mut boundary = canonical.clone();
    boundary.firing_caps.extend(lattice_caps(model, catalog)?);
    Ok(boundary)
}

/// Relax the state-of-charge floor so a routing stage can defer charging.
/// The replayed trajectory dips below zero exactly by the energy that later
/// passes must restore.
pub fn relax_soc_floor(model: &TenModel, index: &VariableIndex, lower: &mut [f64]) {
    for ev in &model.evs {
        for inst in 1..=model.horizon + 1 {
            lower[index.soc(ev.id, inst)] = -1e4;
        }
    }
}

// ---------------------------------------------------------------------------
// Integer schedules
// ---------------------------------------------------------------------------

/// A complete firing commitment for every transition and step.  Electric
/// rows are kept (all zeros) so transition indices can be used directly.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub horizon: usize,
    fire: Vec<Vec<f64>>,
}

impl Schedule {
    pub fn zeros(n_trans: usize, horizon: usize) -> Schedule {
        Schedule { horizon, fire: vec![vec![0.0; horizon]; n_trans] }
    }

    /// Extract the vehicle firings from a solver vector, insisting that every
    /// binary came back integral.
    pub fn from_solution(
        catalog: &Catalog,
        horizon: usize,
        index: &VariableIndex,
        x: &[f64],
        int_tol: f64,
    ) -> Result<Schedule> {
        let mut sched = Schedule::zeros(catalog.transition_count(), horizon);
        for (t, cap) in catalog.caps.iter().enumerate() {
            if !cap.kind.is_vehicle() {
                continue;
            }
            for k in 1..=horizon {
                let v = x[index.u_minus(t, k)];
                let r = v.round();
                if (v - r).abs() > int_tol || !(0.0..=1.0).contains(&r) {
                    return Err(Error::Structure(format!(
                        "non-integral firing {v} for transition {t} at step {k}"
                    )));
                }
                sched.fire[t][k - 1] = r;
            }
        }
        Ok(sched)
    }

    pub fn get(&self, trans: usize, k: usize) -> f64 {
        self.fire[trans][k - 1]
    }

    pub fn set(&mut self, trans: usize, k: usize, value: f64) {
        self.fire[trans][k - 1] = value;
    }

    /// Pin the vehicle firings into a bound pair (equal bounds) for steps
    /// `k_from..=k_to`, leaving later steps free.
    pub fn fix_bounds(
        &self,
        catalog: &Catalog,
        index: &VariableIndex,
        lower: &mut [f64],
        upper: &mut [f64],
        k_from: usize,
        k_to: usize,
    ) {
        for (t, cap) in catalog.caps.iter().enumerate() {
            if !cap.kind.is_vehicle() {
                continue;
            }
            for k in k_from..=k_to {
                let v = self.fire[t][k - 1];
                let um = index.u_minus(t, k);
                lower[um] = v;
                upper[um] = v;
            }
        }
    }

    /// Total firings of one transition over the whole horizon.
    pub fn total(&self, trans: usize) -> f64 {
        self.fire[trans].iter().sum()
    }
}

// ---------------------------------------------------------------------------
// Exact replay
// ---------------------------------------------------------------------------

/// Replayed vehicle state: in-flight markings, buffer tokens, and state of
/// charge, one value per instant `1..=horizon + 1` (stored 0-indexed).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub q_e: Vec<Vec<f64>>,
    pub q_b: Vec<Vec<f64>>,
    pub soc: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Completion flow of a duration-1 vehicle transition at step `k`.
    pub fn u_plus(&self, sched: &Schedule, trans: usize, k: usize) -> f64 {
        if k == 1 {
            self.q_e[trans][0]
        } else {
            sched.get(trans, k - 1)
        }
    }
}

/// Replay a schedule through the vehicle half of the net, validating token
/// conservation, binary markings, battery bounds, and shared capacities.
/// `enforce_soc` is dropped by routing stages, whose schedules deliberately
/// defer charging and so dip below the physical floor until later passes
/// restore it.
pub fn replay(
    model: &TenModel,
    catalog: &Catalog,
    sched: &Schedule,
    enforce_soc: bool,
) -> Result<Trajectory> {
    let n_inst = model.horizon + 1;
    let nt = catalog.transition_count();
    let np = catalog.place_count();
    let nb = catalog.n_buffers;
    let mut q_e = vec![vec![0.0; n_inst]; nt];
    let mut q_b = vec![vec![0.0; n_inst]; np];
    let mut soc = vec![vec![0.0; n_inst]; model.evs.len()];

    // Initial state: one token mid-parking at home per vehicle.
    for it in &model.itineraries {
        let home_park = catalog
            .parking(it.home, it.ev)
            .ok_or_else(|| Error::Structure(format!("no home parking for ev {}", it.ev)))?;
        q_e[home_park][0] = 1.0;
    }
    for ev in &model.evs {
        soc[ev.id][0] = ev.initial_soc;
    }

    for k in 1..=model.horizon {
        // Transition balances: all vehicle capabilities have duration 1.
        for (t, cap) in catalog.caps.iter().enumerate() {
            if !cap.kind.is_vehicle() {
                continue;
            }
            let completion = if k == 1 { q_e[t][0] } else { sched.get(t, k - 1) };
            let next = q_e[t][k - 1] + sched.get(t, k) - completion;
            if !(-TOKEN_TOL..=1.0 + TOKEN_TOL).contains(&next) {
                return Err(Error::InfeasibleFiring(format!(
                    "in-flight marking of transition {t} leaves [0,1] at instant {}: {next}",
                    k + 1
                )));
            }
            q_e[t][k] = next.clamp(0.0, 1.0);
        }
        // Buffer balances per vehicle slice.
        for (t, cap) in catalog.caps.iter().enumerate() {
            if !cap.kind.is_vehicle() {
                continue;
            }
            let ev = cap.kind.ev().expect("vehicle capability carries its ev");
            let completion = if k == 1 { q_e[t][0] } else { sched.get(t, k - 1) };
            q_b[catalog.place_ev(ev, cap.to_buffer)][k] += completion;
            q_b[catalog.place_ev(ev, cap.from_buffer)][k] -= sched.get(t, k);
        }
        for ev in &model.evs {
            for b in 0..nb {
                let p = catalog.place_ev(ev.id, b);
                let next = q_b[p][k - 1] + q_b[p][k];
                if !(-TOKEN_TOL..=1.0 + TOKEN_TOL).contains(&next) {
                    return Err(Error::InfeasibleFiring(format!(
                        "vehicle {} buffer {b} token leaves [0,1] at instant {}: {next}",
                        ev.id,
                        k + 1
                    )));
                }
                q_b[p][k] = next.clamp(0.0, 1.0);
            }
        }
        // Battery balances.
        for ev in &model.evs {
            let mut delta = 0.0;
            for t in catalog.vehicle_transitions(ev.id) {
                delta += catalog.battery_rate(t) * sched.get(t, k);
            }
            let next = soc[ev.id][k - 1] + delta;
            if enforce_soc && !(-TOKEN_TOL..=ev.battery_capacity + TOKEN_TOL).contains(&next) {
                return Err(Error::SocBound(format!(
                    "vehicle {} state of charge {next} at instant {} outside [0, {}]",
                    ev.id,
                    k + 1,
                    ev.battery_capacity
                )));
            }
            soc[ev.id][k] = next;
        }
    }

    check_capacities(model, catalog, sched)?;
    Ok(Trajectory { q_e, q_b, soc })
}

/// Shared-capacity audit of a schedule: directed roads (movers plus in-motion
/// chargers), pooled commercial stations, and the pooled workplace lot.
pub fn check_capacities(model: &TenModel, catalog: &Catalog, sched: &Schedule) -> Result<()> {
    let nev = model.evs.len();
    for road in &model.roads {
        for dir in 0..2u8 {
            let (from, to) = if dir == 0 { (road.a, road.b) } else { (road.b, road.a) };
            let mut members: Vec<usize> =
                (0..nev).filter_map(|ev| catalog.road_travel(road.id, dir, ev)).collect();
            for lane in &model.capabilities.wireless_lanes {
                if lane.road == road.id && lane.from == from && lane.to == to {
                    members.extend((0..nev).filter_map(|ev| catalog.wireless_charge(lane.id, ev)));
                }
            }
            for k in 1..=model.horizon {
                let used: f64 = members.iter().map(|&t| sched.get(t, k)).sum();
                if used > road.capacity_per_direction + TOKEN_TOL {
                    return Err(Error::HeuristicConflict(format!(
                        "road {} direction {dir} carries {used} at step {k}, capacity {}",
                        road.id, road.capacity_per_direction
                    )));
                }
            }
        }
    }
    for s in &model.capabilities.stations {
        if s.kind != StationKind::Commercial {
            continue;
        }
        let members: Vec<usize> =
            (0..nev).filter_map(|ev| catalog.wired_charge(s.id, ev)).collect();
        for k in 1..=model.horizon {
            let used: f64 = members.iter().map(|&t| sched.get(t, k)).sum();
            if used > s.slots + TOKEN_TOL {
                return Err(Error::HeuristicConflict(format!(
                    "station {} serves {used} vehicles at step {k}, slots {}",
                    s.id, s.slots
                )));
            }
        }
    }
    for &lot in &model.capabilities.parking_lots {
        if model.buffers[lot].role != crate::model::BufferRole::CommercialCenter {
            continue;
        }
        let members: Vec<usize> = (0..nev).filter_map(|ev| catalog.parking(lot, ev)).collect();
        for k in 1..=model.horizon {
            let used: f64 = members.iter().map(|&t| sched.get(t, k)).sum();
            if used > model.capacities.work_parking + TOKEN_TOL {
                return Err(Error::HeuristicConflict(format!(
                    "lot {lot} holds {used} vehicles at step {k}, capacity {}",
                    model.capacities.work_parking
                )));
            }
        }
    }
    Ok(())
}

/// Write the schedule and its replayed trajectory into a full-length
/// variable vector (vehicle columns only; electric columns untouched).
pub fn write_vehicle_vars(
    model: &TenModel,
    catalog: &Catalog,
    index: &VariableIndex,
    sched: &Schedule,
    traj: &Trajectory,
    x: &mut [f64],
) {
    for (t, cap) in catalog.caps.iter().enumerate() {
        if !cap.kind.is_vehicle() {
            continue;
        }
        for k in 1..=model.horizon {
            x[index.u_minus(t, k)] = sched.get(t, k);
            x[index.u_plus(t, k)] = traj.u_plus(sched, t, k);
        }
        for inst in 1..=model.horizon + 1 {
            x[index.q_e(t, inst)] = traj.q_e[t][inst - 1];
        }
    }
    for ev in &model.evs {
        for b in 0..catalog.n_buffers {
            let p = catalog.place_ev(ev.id, b);
            for inst in 1..=model.horizon + 1 {
                x[index.q_b(p, inst)] = traj.q_b[p][inst - 1];
            }
        }
        for inst in 1..=model.horizon + 1 {
            x[index.soc(ev.id, inst)] = traj.soc[ev.id][inst - 1];
        }
    }
}

// ===========================================================================
// Tests
// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{build_mini, derive_net, MiniConfig};

    fn mini() -> (TenModel, Catalog) {
        let model = build_mini(&MiniConfig::default()).expect("mini model builds");
        let (_, catalog) = derive_net(&model).expect("net derives");
        (model, catalog)
    }

    #[test]
    fn distances_count_road_hops() {
        let (model, _) = mini();
        let d = road_distances(&model, 0);
        assert_eq!(d[0], 0, "FAIL: distance to self must be zero");
        assert_eq!(d[2], 1, "FAIL: one hop from first home to workplace");
        assert_eq!(d[1], 2, "FAIL: homes connect through the workplace");
        assert_eq!(d[3], usize::MAX, "FAIL: generator bus has no road access");
    }

    #[test]
    fn lattice_windows_cover_exactly_the_on_time_steps() {
        let (model, catalog) = mini();
        let it = &model.itineraries[0];
        let windows = commute_lattice(&model, &catalog, it).expect("lattice builds");
        let morning = catalog.road_travel(0, 0, it.ev).expect("outbound hop exists");
        let evening = catalog.road_travel(0, 1, it.ev).expect("return hop exists");
        let off_route = catalog.road_travel(1, 0, it.ev);
        assert_eq!(
            windows.get(&morning),
            Some(&(it.morning_window.0, it.work_arrival - 2)),
            "FAIL: outbound hop must land in time for the work-arrival anchor"
        );
        assert_eq!(
            windows.get(&evening),
            Some(&(it.evening_window.0, it.home_arrival - 2)),
            "FAIL: return hop must land in time for the home-arrival anchor"
        );
        if let Some(t) = off_route {
            assert!(
                !windows.contains_key(&t),
                "FAIL: a road not on any shortest route must stay closed"
            );
        }
    }

    #[test]
    fn replay_of_a_parked_day_conserves_tokens_and_charge() {
        let (model, catalog) = mini();
        let mut sched = Schedule::zeros(catalog.transition_count(), model.horizon);
        for it in &model.itineraries {
            let park = catalog.parking(it.home, it.ev).unwrap();
            for k in 1..=model.horizon {
                sched.set(park, k, 1.0);
            }
        }
        let traj = replay(&model, &catalog, &sched, true).expect("parked day replays");
        for ev in &model.evs {
            for inst in 0..model.horizon {
                assert!(
                    (traj.soc[ev.id][inst] - ev.initial_soc).abs() < 1e-9,
                    "FAIL: parked vehicle must hold its charge"
                );
            }
            let park = catalog.parking(model.itineraries[ev.id].home, ev.id).unwrap();
            assert!(
                (traj.q_e[park][model.horizon] - 1.0).abs() < 1e-9,
                "FAIL: parked vehicle must stay mid-parking at the last instant"
            );
        }
    }

    #[test]
    fn replay_rejects_firing_from_an_empty_buffer() {
        let (model, catalog) = mini();
        let mut sched = Schedule::zeros(catalog.transition_count(), model.horizon);
        let it = &model.itineraries[0];
        let park = catalog.parking(it.home, it.ev).unwrap();
        sched.set(park, 1, 1.0);
        // Fire the outbound hop while the token is still mid-parking.
        let hop = catalog.road_travel(0, 0, it.ev).unwrap();
        sched.set(hop, 1, 1.0);
        let err = replay(&model, &catalog, &sched, false);
        assert!(err.is_err(), "FAIL: replay must reject a firing without a token");
    }

    #[test]
    fn routing_boundary_drops_final_charge_and_closes_charging() {
        let (model, catalog) = mini();
        let canonical = crate::builder::build_boundary(
            &model,
            &catalog,
            crate::model::ScenarioKind::Uncoordinated,
        )
        .expect("canonical boundary builds");
        let staged = routing_boundary(&model, &catalog, &canonical).expect("staged builds");
        let has_final = staged
            .pins
            .iter()
            .any(|p| p.terms.iter().any(|(v, _)| matches!(v, PinVar::SocFinal { .. })));
        assert!(!has_final, "FAIL: routing stage must not pin the final state of charge");
        for (t, cap) in catalog.caps.iter().enumerate() {
            if matches!(cap.kind, CapabilityKind::WiredCharge { .. }) {
                for k in 1..=model.horizon {
                    assert!(
                        staged
                            .firing_caps
                            .iter()
                            .any(|c| c.trans == t && c.k == k && c.upper == 0.0),
                        "FAIL: routing stage must close wired charging everywhere"
                    );
                }
            }
        }
    }
}
