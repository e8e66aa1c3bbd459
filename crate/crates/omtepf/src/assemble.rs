//! Assembly of the network-flow optimization problem: variable indexing,
//! constraint-row emission from the Petri structure, scenario boundary
//! application, capacity rows, and an affine presolve with exact recovery.
//!
//! Every row carries a provenance tag naming the rule that emitted it, so a
//! failed audit or an infeasibility can always be traced to its source.

use crate::builder::{CapabilityKind, Catalog};
use crate::error::{Error, Result};
use crate::index::VariableIndex;
use crate::model::{ScenarioKind, TenModel};
use crate::petri::{EngineeringSystemNet, ValueKind};
use crate::sparse::{SparseMat, Triplets};
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Row provenance
// ---------------------------------------------------------------------------

/// Which emission rule produced a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowTag {
    /// Buffer-place balance at one step (bus current balance for electric
    /// places).
    PlaceDynamics { place: usize, k: usize },
    /// Transition in-flight balance at one step.
    TransDynamics { trans: usize, k: usize },
    /// Completion-equals-delayed-initiation coupling.
    Duration { trans: usize, k: usize },
    /// Battery-level balance of one vehicle at one step.
    BatteryDynamics { ev: usize, k: usize },
    /// Scenario boundary pin (index into the boundary pin list).
    Pin { pin: usize },
    /// Shared-capacity row: directed road, station, or lot at one step.
    RoadCapacity { road: usize, dir: u8, k: usize },
    StationCapacity { station: usize, k: usize },
    LotCapacity { lot: usize, k: usize },
    /// Conductance/susceptance current law for one electric device at one
    /// step (real or imaginary row).
    OhmReal { trans: usize, k: usize },
    OhmImag { trans: usize, k: usize },
    /// Squared-voltage-magnitude ceiling at one bus and step.
    VoltageBall { bus: usize, k: usize },
    /// Generator quadratic epigraph at one step.
    GenEpigraph { k: usize },
    /// Linear lower bound on a per-step dispatch-value variable, added by the
    /// coordination loop in the round it was separated.
    ValueCut { k: usize, round: usize },
    /// Linear exclusion of charging patterns one step's grid cannot serve,
    /// added by the coordination loop in the round it was separated.
    FeasibilityCut { k: usize, round: usize },
}

impl RowTag {
    pub fn describe(&self) -> String {
        match *self {
            RowTag::PlaceDynamics { place, k } => format!("place-dynamics p{place} k{k}"),
            RowTag::TransDynamics { trans, k } => format!("transition-dynamics t{trans} k{k}"),
            RowTag::Duration { trans, k } => format!("duration t{trans} k{k}"),
            RowTag::BatteryDynamics { ev, k } => format!("battery-dynamics ev{ev} k{k}"),
            RowTag::Pin { pin } => format!("boundary-pin {pin}"),
            RowTag::RoadCapacity { road, dir, k } => format!("road-capacity r{road} d{dir} k{k}"),
            RowTag::StationCapacity { station, k } => format!("station-capacity s{station} k{k}"),
            RowTag::LotCapacity { lot, k } => format!("lot-capacity b{lot} k{k}"),
            RowTag::OhmReal { trans, k } => format!("ohm-real t{trans} k{k}"),
            RowTag::OhmImag { trans, k } => format!("ohm-imag t{trans} k{k}"),
            RowTag::VoltageBall { bus, k } => format!("voltage-ball b{bus} k{k}"),
            RowTag::GenEpigraph { k } => format!("generator-epigraph k{k}"),
            RowTag::ValueCut { k, round } => format!("value-cut k{k} r{round}"),
            RowTag::FeasibilityCut { k, round } => format!("feasibility-cut k{k} r{round}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Boundary data
// ---------------------------------------------------------------------------

/// A variable referenced by a boundary pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PinVar {
    PlaceMarking { place: usize, instant: usize },
    TransMarking { trans: usize, instant: usize },
    FiringMinus { trans: usize, k: usize },
    SocInitial { ev: usize },
    SocFinal { ev: usize },
}

/// One linear equality over pin variables: `Σ coefᵢ·varᵢ = rhs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearPin {
    pub terms: Vec<(PinVar, f64)>,
    pub rhs: f64,
}

impl LinearPin {
    pub fn single(var: PinVar, rhs: f64) -> LinearPin {
        LinearPin { terms: vec![(var, 1.0)], rhs }
    }
}

/// Per-step upper-bound override on an initiation firing.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FiringCap {
    pub trans: usize,
    pub k: usize,
    pub upper: f64,
}

/// Scenario boundary conditions: equality pins plus firing windows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryData {
    pub scenario: ScenarioKind,
    pub pins: Vec<LinearPin>,
    pub firing_caps: Vec<FiringCap>,
}

impl BoundaryData {
    /// Two single-variable pins demanding different values of the same
    /// variable make the boundary infeasible before any solve.
    pub fn check_conflicts(&self) -> Result<()> {
        let mut seen: std::collections::BTreeMap<PinVar, f64> = Default::default();
        for pin in &self.pins {
            if pin.terms.len() != 1 || pin.terms[0].1 != 1.0 {
                continue;
            }
            let (var, _) = pin.terms[0];
            if let Some(prev) = seen.insert(var, pin.rhs) {
                if (prev - pin.rhs).abs() > 1e-12 {
                    return Err(Error::BoundaryConflict(format!(
                        "{var:?} pinned to both {prev} and {}",
                        pin.rhs
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Problem container
// ---------------------------------------------------------------------------

/// `Σ cᵢⱼ·xᵢ·xⱼ` with symmetric duplicates merged at build time.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct QuadForm {
    pub terms: Vec<(usize, usize, f64)>,
}

impl QuadForm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, j, c)| c * x[i] * x[j]).sum()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Convex constraint `quad(x) + Σ linear·x ≤ rhs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadConstraint {
    pub tag: RowTag,
    pub quad: QuadForm,
    pub linear: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl QuadConstraint {
    pub fn eval_lhs(&self, x: &[f64]) -> f64 {
        self.quad.eval(x) + self.linear.iter().map(|&(v, c)| c * x[v]).sum::<f64>()
    }
}

/// Minimization objective `const + c·x + quad(x)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Objective {
    pub linear: Vec<(usize, f64)>,
    pub quad: QuadForm,
    pub constant: f64,
}

impl Objective {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant
            + self.linear.iter().map(|&(v, c)| c * x[v]).sum::<f64>()
            + self.quad.eval(x)
    }
}

/// Name and role of a variable appended after the core index (epigraph
/// auxiliaries and similar).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtraVar {
    pub name: String,
}

/// The assembled problem: minimize `objective` subject to `eq·x = eq_rhs`,
/// `le·x ≤ le_rhs`, convex quadratic constraints, bounds, and integrality.
#[derive(Debug, Clone)]
pub struct ProblemMatrices {
    pub index: VariableIndex,
    pub n_vars: usize,
    pub extras: Vec<ExtraVar>,
    pub eq: SparseMat,
    pub eq_rhs: Vec<f64>,
    pub eq_tags: Vec<RowTag>,
    pub le: SparseMat,
    pub le_rhs: Vec<f64>,
    pub le_tags: Vec<RowTag>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub binary: Vec<bool>,
    pub objective: Objective,
    pub quad_constraints: Vec<QuadConstraint>,
}

impl ProblemMatrices {
    /// Stable name of any variable, core or appended.
    pub fn var_name(&self, var: usize) -> String {
        if var < self.index.total() {
            self.index.describe(var)
        } else {
            self.extras[var - self.index.total()].name.clone()
        }
    }

    /// Violations of every constraint family at `x`, worst first.
    pub fn audit(&self, x: &[f64], tol: f64) -> Vec<String> {
        let mut issues = Vec::new();
        assert_eq!(x.len(), self.n_vars);
        for (r, (&rhs, tag)) in self.eq_rhs.iter().zip(&self.eq_tags).enumerate() {
            let lhs: f64 = self.eq.row(r).map(|(c, v)| v * x[c]).sum();
            if (lhs - rhs).abs() > tol {
                issues.push(format!(
                    "equality {} violated by {:.3e}",
                    tag.describe(),
                    (lhs - rhs).abs()
                ));
            }
        }
        for (r, (&rhs, tag)) in self.le_rhs.iter().zip(&self.le_tags).enumerate() {
            let lhs: f64 = self.le.row(r).map(|(c, v)| v * x[c]).sum();
            if lhs > rhs + tol {
                issues.push(format!(
                    "inequality {} violated by {:.3e}",
                    tag.describe(),
                    lhs - rhs
                ));
            }
        }
        for v in 0..self.n_vars {
            if x[v] < self.lower[v] - tol || x[v] > self.upper[v] + tol {
                issues.push(format!(
                    "bound on {} violated: {} outside [{}, {}]",
                    self.var_name(v),
                    x[v],
                    self.lower[v],
                    self.upper[v]
                ));
            }
            if self.binary[v] {
                let r = x[v].round();
                if (x[v] - r).abs() > tol || !(r == 0.0 || r == 1.0) {
                    issues.push(format!("binary {} is fractional: {}", self.var_name(v), x[v]));
                }
            }
        }
        for qc in &self.quad_constraints {
            let lhs = qc.eval_lhs(x);
            if lhs > qc.rhs + tol {
                issues.push(format!(
                    "quadratic {} violated by {:.3e}",
                    qc.tag.describe(),
                    lhs - qc.rhs
                ));
            }
        }
        issues
    }
}

// ---------------------------------------------------------------------------
// Assembler
// ---------------------------------------------------------------------------

/// Accumulates rows, bounds, and objective terms, then freezes them into
/// [`ProblemMatrices`].
pub struct Assembler {
    pub index: VariableIndex,
    extras: Vec<ExtraVar>,
    eq: Triplets,
    eq_rhs: Vec<f64>,
    eq_tags: Vec<RowTag>,
    le: Triplets,
    le_rhs: Vec<f64>,
    le_tags: Vec<RowTag>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    binary: Vec<bool>,
    objective: Objective,
    quad_constraints: Vec<QuadConstraint>,
}

impl Assembler {
    pub fn new(index: VariableIndex) -> Assembler {
        let n = index.total();
        Assembler {
            index,
            extras: Vec::new(),
            eq: Triplets::new(),
            eq_rhs: Vec::new(),
            eq_tags: Vec::new(),
            le: Triplets::new(),
            le_rhs: Vec::new(),
            le_tags: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            binary: vec![false; n],
            objective: Objective::default(),
            quad_constraints: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.index.total() + self.extras.len()
    }

    /// Append an auxiliary variable (returns its index).
    pub fn add_extra(&mut self, name: String, lower: f64, upper: f64) -> usize {
        let v = self.n_vars();
        self.extras.push(ExtraVar { name });
        self.lower.push(lower);
        self.upper.push(upper);
        self.binary.push(false);
        v
    }

    pub fn add_eq(&mut self, tag: RowTag, terms: &[(usize, f64)], rhs: f64) {
        let r = self.eq_rhs.len();
        for &(v, c) in terms {
            self.eq.push(r, v, c);
        }
        self.eq_rhs.push(rhs);
        self.eq_tags.push(tag);
    }

    pub fn add_le(&mut self, tag: RowTag, terms: &[(usize, f64)], rhs: f64) {
        let r = self.le_rhs.len();
        for &(v, c) in terms {
            self.le.push(r, v, c);
        }
        self.le_rhs.push(rhs);
        self.le_tags.push(tag);
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    /// Tighten (never loosen) the bounds of a variable.
    pub fn tighten_upper(&mut self, var: usize, upper: f64) {
        if upper < self.upper[var] {
            self.upper[var] = upper;
        }
    }

    pub fn set_binary(&mut self, var: usize) {
        self.binary[var] = true;
        self.lower[var] = self.lower[var].max(0.0);
        self.upper[var] = self.upper[var].min(1.0);
    }

    pub fn add_linear_cost(&mut self, var: usize, coeff: f64) {
        if coeff != 0.0 {
            self.objective.linear.push((var, coeff));
        }
    }

    pub fn add_quad_cost(&mut self, vi: usize, vj: usize, coeff: f64) {
        if coeff != 0.0 {
            self.objective.quad.terms.push((vi, vj, coeff));
        }
    }

    pub fn add_cost_constant(&mut self, c: f64) {
        self.objective.constant += c;
    }

    pub fn add_quad_constraint(&mut self, qc: QuadConstraint) {
        self.quad_constraints.push(qc);
    }

    pub fn finish(self) -> ProblemMatrices {
        let n = self.index.total() + self.extras.len();
        let n_eq = self.eq_rhs.len();
        let n_le = self.le_rhs.len();
        let mut objective = self.objective;
        objective.linear = merge_linear(objective.linear);
        objective.quad = merge_quad(objective.quad);
        ProblemMatrices {
            index: self.index,
            n_vars: n,
            extras: self.extras,
            eq: self.eq.to_csr(n_eq, n),
            eq_rhs: self.eq_rhs,
            eq_tags: self.eq_tags,
            le: self.le.to_csr(n_le, n),
            le_rhs: self.le_rhs,
            le_tags: self.le_tags,
            lower: self.lower,
            upper: self.upper,
            binary: self.binary,
            objective,
            quad_constraints: self.quad_constraints,
        }
    }
}

fn merge_linear(mut terms: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    terms.sort_unstable_by_key(|&(v, _)| v);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
    for (v, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += c,
            _ => out.push((v, c)),
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out
}

fn merge_quad(form: QuadForm) -> QuadForm {
    let mut terms: Vec<(usize, usize, f64)> = form
        .terms
        .into_iter()
        .map(|(i, j, c)| if i <= j { (i, j, c) } else { (j, i, c) })
        .collect();
    terms.sort_unstable_by_key(|&(i, j, _)| (i, j));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(terms.len());
    for (i, j, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += c,
            _ => out.push((i, j, c)),
        }
    }
    out.retain(|&(_, _, c)| c != 0.0);
    QuadForm { terms: out }
}

// ---------------------------------------------------------------------------
// Emitters
// ---------------------------------------------------------------------------

/// Build the variable index for a derived net over the model horizon.
pub fn index_variables(model: &TenModel, net: &EngineeringSystemNet) -> VariableIndex {
    VariableIndex::new(
        model.horizon,
        net.place_count,
        net.transition_count,
        model.evs.len(),
        model.buffers.len(),
    )
}

/// Which slice of the network a stage problem assembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssemblyScope {
    /// Vehicle places and transitions only; every electric variable is pinned
    /// to zero and the bus balance rows are skipped, so routing and charging
    /// schedules can be optimized without carrying the grid. Electric
    /// feasibility is restored afterwards by the per-step dispatch problems.
    VehicleOnly,
    /// The complete coupled network.
    Full,
}

/// Place and transition balance rows for every step:
/// `Q_B[k+1] − Q_B[k] − M⁺U⁺[k] + M⁻U⁻[k] = 0` and
/// `Q_E[k+1] − Q_E[k] − U⁻[k] + U⁺[k] = 0`.
///
/// Electric places are bus current balances; on those rows the entries of
/// charging columns are scaled by the model's `current_draw_scale`.
pub fn emit_esn_dynamics(
    asm: &mut Assembler,
    model: &TenModel,
    net: &EngineeringSystemNet,
    catalog: &Catalog,
    scope: AssemblyScope,
) {
    let scale = model.coefficients.current_draw_scale;
    let nb = catalog.n_buffers;
    let m_plus_rows = net.m_plus.transpose();
    let m_minus_rows = net.m_minus.transpose();
    let electric_place = |p: usize| p < 2 * nb;
    for k in 1..=model.horizon {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); net.place_count];
        for t in 0..net.transition_count {
            let charging = catalog.caps[t].draw.is_some();
            for (p, w) in m_plus_rows.row(t) {
                let w = if charging && electric_place(p) { w * scale } else { w };
                rows[p].push((asm.index.u_plus(t, k), -w));
            }
            for (p, w) in m_minus_rows.row(t) {
                let w = if charging && electric_place(p) { w * scale } else { w };
                rows[p].push((asm.index.u_minus(t, k), w));
            }
        }
        for (p, mut terms) in rows.into_iter().enumerate() {
            if scope == AssemblyScope::VehicleOnly && electric_place(p) {
                continue;
            }
            terms.push((asm.index.q_b(p, k + 1), 1.0));
            terms.push((asm.index.q_b(p, k), -1.0));
            asm.add_eq(RowTag::PlaceDynamics { place: p, k }, &terms, 0.0);
        }
        for t in 0..net.transition_count {
            if scope == AssemblyScope::VehicleOnly && !catalog.caps[t].kind.is_vehicle() {
                continue;
            }
            asm.add_eq(
                RowTag::TransDynamics { trans: t, k },
                &[
                    (asm.index.q_e(t, k + 1), 1.0),
                    (asm.index.q_e(t, k), -1.0),
                    (asm.index.u_minus(t, k), -1.0),
                    (asm.index.u_plus(t, k), 1.0),
                ],
                0.0,
            );
        }
    }
}

/// Completion coupling per transition duration: instantaneous transitions
/// complete in their initiation step (`U⁺[k] = U⁻[k]`); unit-duration
/// transitions complete one step later (`U⁺[k] = U⁻[k−1]`, and at the first
/// step the completions equal the initially in-flight stock `Q_E[1]`).
pub fn emit_duration_rows(
    asm: &mut Assembler,
    model: &TenModel,
    net: &EngineeringSystemNet,
    catalog: &Catalog,
    scope: AssemblyScope,
) -> Result<()> {
    for t in 0..net.transition_count {
        if scope == AssemblyScope::VehicleOnly && !catalog.caps[t].kind.is_vehicle() {
            continue;
        }
        match net.durations[t] {
            0 => {
                for k in 1..=model.horizon {
                    asm.add_eq(
                        RowTag::Duration { trans: t, k },
                        &[(asm.index.u_plus(t, k), 1.0), (asm.index.u_minus(t, k), -1.0)],
                        0.0,
                    );
                }
            }
            1 => {
                asm.add_eq(
                    RowTag::Duration { trans: t, k: 1 },
                    &[(asm.index.u_plus(t, 1), 1.0), (asm.index.q_e(t, 1), -1.0)],
                    0.0,
                );
                for k in 2..=model.horizon {
                    asm.add_eq(
                        RowTag::Duration { trans: t, k },
                        &[(asm.index.u_plus(t, k), 1.0), (asm.index.u_minus(t, k - 1), -1.0)],
                        0.0,
                    );
                }
            }
            d => {
                return Err(Error::Structure(format!(
                    "transition {t} has duration {d}; only 0 and 1 are assembled"
                )))
            }
        }
    }
    Ok(())
}

/// Battery charge/discharge rates coupled to initiation firings of one
/// vehicle: the synchronization row applied by [`emit_operand_rows`].
pub fn sync_rates(catalog: &Catalog, ev: usize) -> Vec<(usize, f64)> {
    catalog
        .vehicle_transitions(ev)
        .into_iter()
        .filter_map(|t| {
            let r = catalog.battery_rate(t);
            (r != 0.0).then_some((t, r))
        })
        .collect()
}

/// Battery-level dynamics per vehicle:
/// `SOC[k+1] − SOC[k] − Σ rate(t)·U⁻[t,k] = 0`, with levels bounded by the
/// battery capacity.
pub fn emit_operand_rows(asm: &mut Assembler, model: &TenModel, catalog: &Catalog) {
    for ev in &model.evs {
        let rates = sync_rates(catalog, ev.id);
        for inst in 1..=model.horizon + 1 {
            asm.set_bounds(asm.index.soc(ev.id, inst), 0.0, ev.battery_capacity);
        }
        for k in 1..=model.horizon {
            let mut terms = vec![
                (asm.index.soc(ev.id, k + 1), 1.0),
                (asm.index.soc(ev.id, k), -1.0),
            ];
            for &(t, r) in &rates {
                terms.push((asm.index.u_minus(t, k), -r));
            }
            asm.add_eq(RowTag::BatteryDynamics { ev: ev.id, k }, &terms, 0.0);
        }
    }
}

/// Apply boundary pins as equality rows and firing windows as bound
/// tightenings.
pub fn emit_boundary(asm: &mut Assembler, boundary: &BoundaryData) -> Result<()> {
    boundary.check_conflicts()?;
    let resolve = |idx: &VariableIndex, var: PinVar| -> usize {
        match var {
            PinVar::PlaceMarking { place, instant } => idx.q_b(place, instant),
            PinVar::TransMarking { trans, instant } => idx.q_e(trans, instant),
            PinVar::FiringMinus { trans, k } => idx.u_minus(trans, k),
            PinVar::SocInitial { ev } => idx.soc(ev, 1),
            PinVar::SocFinal { ev } => idx.soc(ev, idx.horizon + 1),
        }
    };
    for (i, pin) in boundary.pins.iter().enumerate() {
        let terms: Vec<(usize, f64)> =
            pin.terms.iter().map(|&(v, c)| (resolve(&asm.index, v), c)).collect();
        asm.add_eq(RowTag::Pin { pin: i }, &terms, pin.rhs);
    }
    for cap in &boundary.firing_caps {
        asm.tighten_upper(asm.index.u_minus(cap.trans, cap.k), cap.upper);
    }
    Ok(())
}

/// Shared-capacity rows per step: directed roads (movers plus in-motion
/// chargers), commercial stations, and the workplace lot.
pub fn emit_capacity_rows(asm: &mut Assembler, model: &TenModel, catalog: &Catalog) {
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
                let terms: Vec<(usize, f64)> =
                    members.iter().map(|&t| (asm.index.u_minus(t, k), 1.0)).collect();
                asm.add_le(
                    RowTag::RoadCapacity { road: road.id, dir, k },
                    &terms,
                    road.capacity_per_direction,
                );
            }
        }
    }
    for s in &model.capabilities.stations {
        if s.kind != crate::model::StationKind::Commercial {
            continue; // Home stations are ownership-restricted, not pooled.
        }
        let members: Vec<usize> = (0..nev).filter_map(|ev| catalog.wired_charge(s.id, ev)).collect();
        for k in 1..=model.horizon {
            let terms: Vec<(usize, f64)> =
                members.iter().map(|&t| (asm.index.u_minus(t, k), 1.0)).collect();
            asm.add_le(RowTag::StationCapacity { station: s.id, k }, &terms, s.slots);
        }
    }
    for &lot in &model.capabilities.parking_lots {
        // Only the workplace lot pools all vehicles; home lots are
        // ownership-restricted per vehicle.
        if model.buffers[lot].role != crate::model::BufferRole::CommercialCenter {
            continue;
        }
        let members: Vec<usize> = (0..nev).filter_map(|ev| catalog.parking(lot, ev)).collect();
        for k in 1..=model.horizon {
            let terms: Vec<(usize, f64)> =
                members.iter().map(|&t| (asm.index.u_minus(t, k), 1.0)).collect();
            asm.add_le(RowTag::LotCapacity { lot, k }, &terms, model.capacities.work_parking);
        }
    }
}

/// Default variable bounds derived from capability kinds: firings of vehicle
/// capabilities are binary; electric real components are nonnegative while
/// imaginary components are free; bus current places stay identically zero
/// (their balance rows are the current law); vehicle in-flight markings are
/// binary-bounded.
pub fn apply_default_bounds(
    asm: &mut Assembler,
    model: &TenModel,
    catalog: &Catalog,
    scope: AssemblyScope,
) {
    let nb = catalog.n_buffers;
    let np = catalog.place_count();
    let k_max = model.horizon;
    for p in 0..np {
        let electric = p < 2 * nb;
        for inst in 1..=k_max + 1 {
            let v = asm.index.q_b(p, inst);
            if electric {
                asm.set_bounds(v, 0.0, 0.0);
            } else {
                asm.set_bounds(v, 0.0, f64::INFINITY);
            }
        }
    }
    for (t, cap) in catalog.caps.iter().enumerate() {
        if scope == AssemblyScope::VehicleOnly && !cap.kind.is_vehicle() {
            for k in 1..=k_max {
                asm.set_bounds(asm.index.u_minus(t, k), 0.0, 0.0);
                asm.set_bounds(asm.index.u_plus(t, k), 0.0, 0.0);
            }
            for inst in 1..=k_max + 1 {
                asm.set_bounds(asm.index.q_e(t, inst), 0.0, 0.0);
            }
            continue;
        }
        let imag = matches!(
            cap.kind,
            CapabilityKind::SolarImag { .. }
                | CapabilityKind::GenImag
                | CapabilityKind::LoadImag { .. }
                | CapabilityKind::LineImag { .. }
        );
        for k in 1..=k_max {
            let um = asm.index.u_minus(t, k);
            let up = asm.index.u_plus(t, k);
            match cap.value_kind {
                ValueKind::BinaryInteger => {
                    asm.set_binary(um);
                    asm.set_bounds(up, 0.0, 1.0);
                }
                ValueKind::ContinuousReal => {
                    if imag {
                        asm.set_bounds(um, f64::NEG_INFINITY, f64::INFINITY);
                        asm.set_bounds(up, f64::NEG_INFINITY, f64::INFINITY);
                    } else {
                        asm.set_bounds(um, 0.0, f64::INFINITY);
                        asm.set_bounds(up, 0.0, f64::INFINITY);
                    }
                }
            }
        }
        for inst in 1..=k_max + 1 {
            let qe = asm.index.q_e(t, inst);
            match cap.value_kind {
                ValueKind::BinaryInteger => asm.set_bounds(qe, 0.0, 1.0),
                ValueKind::ContinuousReal => asm.set_bounds(qe, 0.0, 0.0),
            }
        }
    }
    if scope == AssemblyScope::VehicleOnly {
        for bus in 0..nb {
            for k in 1..=k_max {
                asm.set_bounds(asm.index.v_real(bus, k), 0.0, 0.0);
                asm.set_bounds(asm.index.v_imag(bus, k), 0.0, 0.0);
            }
        }
    }
}

/// Transportation objective: every step a vehicle spends in motion (road or
/// in-motion charging) costs `f_qet`, and every step a vehicle rests queued
/// in a buffer costs `f_qbt`.
pub fn emit_transport_objective(asm: &mut Assembler, model: &TenModel, catalog: &Catalog) {
    let f_qet = model.coefficients.f_qet;
    let f_qbt = model.coefficients.f_qbt;
    for (t, cap) in catalog.caps.iter().enumerate() {
        if matches!(
            cap.kind,
            CapabilityKind::RoadTravel { .. } | CapabilityKind::WirelessCharge { .. }
        ) {
            for inst in 2..=model.horizon + 1 {
                asm.add_linear_cost(asm.index.q_e(t, inst), f_qet);
            }
        }
    }
    for ev in 0..catalog.n_evs {
        for b in 0..catalog.n_buffers {
            let p = catalog.place_ev(ev, b);
            for inst in 2..=model.horizon + 1 {
                asm.add_linear_cost(asm.index.q_b(p, inst), f_qbt);
            }
        }
    }
}

/// Full assembly pipeline for one scenario: index, default bounds, dynamics,
/// durations, battery rows, capacities, boundary, transport and electric
/// objectives, and the electric device layer.
pub fn assemble_full(
    model: &TenModel,
    net: &EngineeringSystemNet,
    catalog: &Catalog,
    boundary: &BoundaryData,
) -> Result<ProblemMatrices> {
    let index = index_variables(model, net);
    let mut asm = Assembler::new(index);
    apply_default_bounds(&mut asm, model, catalog, AssemblyScope::Full);
    emit_esn_dynamics(&mut asm, model, net, catalog, AssemblyScope::Full);
    emit_duration_rows(&mut asm, model, net, catalog, AssemblyScope::Full)?;
    emit_operand_rows(&mut asm, model, catalog);
    emit_capacity_rows(&mut asm, model, catalog);
    emit_boundary(&mut asm, boundary)?;
    emit_transport_objective(&mut asm, model, catalog);
    crate::power::attach_device_models(&mut asm, model, catalog)?;
    crate::power::emit_electric_objective(&mut asm, model, catalog);
    Ok(asm.finish())
}

/// Vehicle-network assembly for routing/charging stage problems: electric
/// variables are pinned to zero, bus balances are skipped, and the objective
/// carries only the transportation terms. Grid feasibility of the resulting
/// schedule is handled separately by per-step dispatch.
pub fn assemble_transport(
    model: &TenModel,
    net: &EngineeringSystemNet,
    catalog: &Catalog,
    boundary: &BoundaryData,
) -> Result<ProblemMatrices> {
    let index = index_variables(model, net);
    let mut asm = Assembler::new(index);
    apply_default_bounds(&mut asm, model, catalog, AssemblyScope::VehicleOnly);
    emit_esn_dynamics(&mut asm, model, net, catalog, AssemblyScope::VehicleOnly);
    emit_duration_rows(&mut asm, model, net, catalog, AssemblyScope::VehicleOnly)?;
    emit_operand_rows(&mut asm, model, catalog);
    emit_capacity_rows(&mut asm, model, catalog);
    emit_boundary(&mut asm, boundary)?;
    emit_transport_objective(&mut asm, model, catalog);
    Ok(asm.finish())
}

// ---------------------------------------------------------------------------
// Presolve
// ---------------------------------------------------------------------------

/// How one original variable maps back from the reduced problem.
#[derive(Debug, Clone, Copy)]
enum VarState {
    /// `x = mul · reduced[rep] + add` (rep indexes the reduced problem after
    /// renumbering; before renumbering it indexes original variables).
    Alias { rep: usize, mul: f64, add: f64 },
    Fixed(f64),
}

/// Result of presolve: the reduced problem plus the recovery map.
pub struct Presolved {
    pub reduced: ProblemMatrices,
    map: Vec<VarState>,
    pub kept: Vec<usize>,
}

impl Presolved {
    /// Expand a reduced solution back to the full variable vector.
    pub fn recover(&self, reduced_x: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|state| match *state {
                VarState::Fixed(v) => v,
                VarState::Alias { rep, mul, add } => mul * reduced_x[rep] + add,
            })
            .collect()
    }

    pub fn n_reduced(&self) -> usize {
        self.kept.len()
    }
}

struct UnionFind {
    // x_i = mul_i · x_parent(i) + add_i
    parent: Vec<usize>,
    mul: Vec<f64>,
    add: Vec<f64>,
    fixed: Vec<Option<f64>>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
            mul: vec![1.0; n],
            add: vec![0.0; n],
            fixed: vec![None; n],
        }
    }

    /// Resolve `x_i = mul · x_root + add`, compressing the path.
    fn find(&mut self, i: usize) -> (usize, f64, f64) {
        if self.parent[i] == i {
            return (i, 1.0, 0.0);
        }
        let p = self.parent[i];
        let (root, pm, pa) = self.find(p);
        let m = self.mul[i] * pm;
        let a = self.mul[i] * pa + self.add[i];
        self.parent[i] = root;
        self.mul[i] = m;
        self.add[i] = a;
        (root, m, a)
    }

    fn root_value(&mut self, i: usize) -> Option<f64> {
        let (root, m, a) = self.find(i);
        self.fixed[root].map(|v| m * v + a)
    }

    /// Record `x_i = mul · x_j + add`. Returns false on a numeric conflict.
    fn alias(&mut self, i: usize, j: usize, mul: f64, add: f64, tol: f64) -> bool {
        let (ri, mi, ai) = self.find(i);
        let (rj, mj, aj) = self.find(j);
        if ri == rj {
            // mi·x + ai must equal mul·(mj·x + aj) + add for the shared root.
            let m = mi - mul * mj;
            let a = ai - (mul * aj + add);
            if m.abs() < tol {
                return a.abs() < tol;
            }
            // Forced: x_root = −a / m.
            return self.fix_root(ri, -a / m, tol);
        }
        // x_ri: mi·ri + ai = mul·(mj·rj + aj) + add → ri = (mul·mj/mi)·rj + (mul·aj + add − ai)/mi
        let m = mul * mj / mi;
        let a = (mul * aj + add - ai) / mi;
        match (self.fixed[ri], self.fixed[rj]) {
            (Some(vi), Some(vj)) => return (vi - (m * vj + a)).abs() < tol,
            (Some(vi), None) => {
                self.parent[rj] = rj;
                return self.fix_root(rj, (vi - a) / m, tol);
            }
            _ => {}
        }
        self.parent[ri] = rj;
        self.mul[ri] = m;
        self.add[ri] = a;
        true
    }

    fn fix_root(&mut self, root: usize, value: f64, tol: f64) -> bool {
        match self.fixed[root] {
            Some(v) => (v - value).abs() < tol,
            None => {
                self.fixed[root] = Some(value);
                true
            }
        }
    }

    /// Record `x_i = value`.
    fn fix(&mut self, i: usize, value: f64, tol: f64) -> bool {
        let (root, m, a) = self.find(i);
        self.fix_root(root, (value - a) / m, tol)
    }
}

/// Eliminate fixed and pairwise-aliased variables, substitute them into all
/// rows, bounds, objective, and quadratic forms, and drop vacuous rows.
///
/// Sources of eliminations: equal lower/upper bounds; equality rows with one
/// term; equality rows with two terms (affine alias). Rounds repeat until no
/// rows shrink further.
pub fn presolve(prob: &ProblemMatrices, tol: f64) -> Result<Presolved> {
    presolve_impl(prob, tol, |_| false)
}

/// Presolve that never consumes rows whose tag matches `protect`. Protected
/// rows survive into the reduced problem (with substituted variables), so
/// their duals remain addressable; eliminations through *other* rows leave
/// those duals equal to the original problem's duals, because every consumed
/// row holds identically on the reduced subspace.
pub fn presolve_protected(
    prob: &ProblemMatrices,
    tol: f64,
    protect: impl Fn(&RowTag) -> bool,
) -> Result<Presolved> {
    presolve_impl(prob, tol, protect)
}

fn presolve_impl(
    prob: &ProblemMatrices,
    tol: f64,
    protect: impl Fn(&RowTag) -> bool,
) -> Result<Presolved> {
    let n = prob.n_vars;
    let mut uf = UnionFind::new(n);
    let infeasible = |what: &str| Err(Error::Infeasible(format!("presolve: {what}")));

    // Bounds that already pin a variable.
    for v in 0..n {
        if (prob.lower[v] - prob.upper[v]).abs() <= tol && prob.lower[v].is_finite() {
            if !uf.fix(v, prob.lower[v], tol) {
                return infeasible(&format!("conflicting fixes on {}", prob.var_name(v)));
            }
        }
    }

    // Iterate over equality rows until closure.
    let mut active: Vec<bool> = vec![true; prob.eq_rhs.len()];
    loop {
        let mut changed = false;
        for r in 0..prob.eq_rhs.len() {
            if !active[r] || protect(&prob.eq_tags[r]) {
                continue;
            }
            // Resolve every term through the union-find.
            let mut coef: std::collections::BTreeMap<usize, f64> = Default::default();
            let mut rhs = prob.eq_rhs[r];
            for (c, w) in prob.eq.row(r) {
                if let Some(v) = uf.root_value(c) {
                    rhs -= w * v;
                    continue;
                }
                let (root, m, a) = uf.find(c);
                rhs -= w * a;
                *coef.entry(root).or_insert(0.0) += w * m;
            }
            coef.retain(|_, w| w.abs() > tol);
            match coef.len() {
                0 => {
                    if rhs.abs() > 1e-6 {
                        return infeasible(&format!(
                            "row {} reduces to 0 = {rhs}",
                            prob.eq_tags[r].describe()
                        ));
                    }
                    active[r] = false;
                    changed = true;
                }
                1 => {
                    let (&v, &w) = coef.iter().next().unwrap();
                    if !uf.fix(v, rhs / w, tol) {
                        return infeasible(&format!(
                            "row {} forces conflicting value",
                            prob.eq_tags[r].describe()
                        ));
                    }
                    active[r] = false;
                    changed = true;
                }
                2 => {
                    let mut it = coef.iter();
                    let (&v1, &w1) = it.next().unwrap();
                    let (&v2, &w2) = it.next().unwrap();
                    // w1·v1 + w2·v2 = rhs → v1 = (−w2/w1)·v2 + rhs/w1
                    if !uf.alias(v1, v2, -w2 / w1, rhs / w1, tol) {
                        return infeasible(&format!(
                            "row {} conflicts with earlier aliases",
                            prob.eq_tags[r].describe()
                        ));
                    }
                    active[r] = false;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    // Fold bounds and integrality onto representatives.
    let mut rep_lower = vec![f64::NEG_INFINITY; n];
    let mut rep_upper = vec![f64::INFINITY; n];
    let mut rep_binary = vec![false; n];
    let mut is_rep = vec![false; n];
    for v in 0..n {
        if uf.root_value(v).is_some() {
            // Check the fixed value against v's own bounds.
            let val = uf.root_value(v).unwrap();
            if val < prob.lower[v] - 1e-7 || val > prob.upper[v] + 1e-7 {
                return infeasible(&format!(
                    "fixed {} = {val} violates its bounds [{}, {}]",
                    prob.var_name(v),
                    prob.lower[v],
                    prob.upper[v]
                ));
            }
            if prob.binary[v] && (val - val.round()).abs() > 1e-6 {
                return infeasible(&format!("fixed binary {} = {val}", prob.var_name(v)));
            }
            continue;
        }
        let (root, m, a) = uf.find(v);
        is_rep[root] = true;
        // v ∈ [lo, hi] → root ∈ [(lo−a)/m, (hi−a)/m] (order by sign of m).
        let b1 = (prob.lower[v] - a) / m;
        let b2 = (prob.upper[v] - a) / m;
        let (lo, hi) = if m > 0.0 { (b1, b2) } else { (b2, b1) };
        rep_lower[root] = rep_lower[root].max(lo);
        rep_upper[root] = rep_upper[root].min(hi);
        if prob.binary[v] {
            rep_binary[root] = true;
        }
    }
    for v in 0..n {
        if is_rep[v] && rep_lower[v] > rep_upper[v] + 1e-7 {
            return infeasible(&format!(
                "empty bound interval on representative {}",
                prob.var_name(v)
            ));
        }
    }

    // Renumber surviving representatives densely.
    let mut new_id = vec![usize::MAX; n];
    let mut kept = Vec::new();
    for v in 0..n {
        if is_rep[v] {
            new_id[v] = kept.len();
            kept.push(v);
        }
    }
    let n_red = kept.len();

    // Rebuild rows. A term c·x with x = m·root + a becomes (c·m)·root with
    // c·a moved to the right-hand side.
    let resolve = |uf: &mut UnionFind, c: usize| -> (Option<usize>, f64, f64) {
        if let Some(v) = uf.root_value(c) {
            return (None, 0.0, v);
        }
        let (root, m, a) = uf.find(c);
        (Some(new_id[root]), m, a)
    };

    let mut eq = Triplets::new();
    let mut eq_rhs = Vec::new();
    let mut eq_tags = Vec::new();
    for r in 0..prob.eq_rhs.len() {
        if !active[r] {
            continue;
        }
        let mut coef: std::collections::BTreeMap<usize, f64> = Default::default();
        let mut rhs = prob.eq_rhs[r];
        for (c, w) in prob.eq.row(r) {
            match resolve(&mut uf, c) {
                (None, _, v) => rhs -= w * v,
                (Some(id), m, a) => {
                    rhs -= w * a;
                    *coef.entry(id).or_insert(0.0) += w * m;
                }
            }
        }
        coef.retain(|_, w| w.abs() > tol);
        if coef.is_empty() {
            if rhs.abs() > 1e-6 {
                return infeasible(&format!(
                    "row {} reduces to 0 = {rhs}",
                    prob.eq_tags[r].describe()
                ));
            }
            // Protected rows stay addressable even when vacuous (dual 0).
            if !protect(&prob.eq_tags[r]) {
                continue;
            }
        }
        let row = eq_rhs.len();
        for (id, w) in coef {
            eq.push(row, id, w);
        }
        eq_rhs.push(rhs);
        eq_tags.push(prob.eq_tags[r]);
    }

    let mut le = Triplets::new();
    let mut le_rhs = Vec::new();
    let mut le_tags = Vec::new();
    for r in 0..prob.le_rhs.len() {
        let mut coef: std::collections::BTreeMap<usize, f64> = Default::default();
        let mut rhs = prob.le_rhs[r];
        for (c, w) in prob.le.row(r) {
            match resolve(&mut uf, c) {
                (None, _, v) => rhs -= w * v,
                (Some(id), m, a) => {
                    rhs -= w * a;
                    *coef.entry(id).or_insert(0.0) += w * m;
                }
            }
        }
        coef.retain(|_, w| w.abs() > tol);
        if coef.is_empty() {
            if rhs < -1e-6 {
                return infeasible(&format!(
                    "row {} reduces to 0 ≤ {rhs}",
                    prob.le_tags[r].describe()
                ));
            }
            continue;
        }
        let row = le_rhs.len();
        for (id, w) in coef {
            le.push(row, id, w);
        }
        le_rhs.push(rhs);
        le_tags.push(prob.le_tags[r]);
    }

    // Objective substitution.
    let mut objective = Objective::default();
    objective.constant = prob.objective.constant;
    for &(v, c) in &prob.objective.linear {
        match resolve(&mut uf, v) {
            (None, _, val) => objective.constant += c * val,
            (Some(id), m, a) => {
                objective.linear.push((id, c * m));
                objective.constant += c * a;
            }
        }
    }
    let subst_quad = |uf: &mut UnionFind,
                          form: &QuadForm,
                          linear: &mut Vec<(usize, f64)>,
                          constant: &mut f64|
     -> QuadForm {
        let mut out = QuadForm::default();
        for &(i, j, c) in &form.terms {
            let (ri, mi, ai) = match resolve(uf, i) {
                (None, _, v) => (None, 0.0, v),
                (Some(id), m, a) => (Some(id), m, a),
            };
            let (rj, mj, aj) = match resolve(uf, j) {
                (None, _, v) => (None, 0.0, v),
                (Some(id), m, a) => (Some(id), m, a),
            };
            // (mi·x + ai)(mj·y + aj) = mi·mj·xy + mi·aj·x + mj·ai·y + ai·aj
            match (ri, rj) {
                (Some(x), Some(y)) => {
                    out.terms.push((x, y, c * mi * mj));
                    if aj != 0.0 {
                        linear.push((x, c * mi * aj));
                    }
                    if ai != 0.0 {
                        linear.push((y, c * mj * ai));
                    }
                    *constant += c * ai * aj;
                }
                (Some(x), None) => {
                    linear.push((x, c * mi * aj));
                    *constant += c * ai * aj;
                }
                (None, Some(y)) => {
                    linear.push((y, c * mj * ai));
                    *constant += c * ai * aj;
                }
                (None, None) => *constant += c * ai * aj,
            }
        }
        merge_quad(out)
    };
    objective.quad = subst_quad(
        &mut uf,
        &prob.objective.quad,
        &mut objective.linear,
        &mut objective.constant,
    );
    objective.linear = merge_linear(objective.linear);

    let mut quad_constraints = Vec::new();
    for qc in &prob.quad_constraints {
        let mut linear: Vec<(usize, f64)> = Vec::new();
        let mut shift = 0.0;
        for &(v, c) in &qc.linear {
            match resolve(&mut uf, v) {
                (None, _, val) => shift += c * val,
                (Some(id), m, a) => {
                    linear.push((id, c * m));
                    shift += c * a;
                }
            }
        }
        let quad = subst_quad(&mut uf, &qc.quad, &mut linear, &mut shift);
        let rhs = qc.rhs - shift;
        let linear = merge_linear(linear);
        if quad.is_empty() && linear.is_empty() {
            if rhs < -1e-6 {
                return infeasible(&format!(
                    "quadratic row {} reduces to 0 ≤ {rhs}",
                    qc.tag.describe()
                ));
            }
            continue;
        }
        quad_constraints.push(QuadConstraint { tag: qc.tag, quad, linear, rhs });
    }

    // Build the recovery map.
    let mut map = Vec::with_capacity(n);
    for v in 0..n {
        if let Some(val) = uf.root_value(v) {
            map.push(VarState::Fixed(val));
        } else {
            let (root, m, a) = uf.find(v);
            map.push(VarState::Alias { rep: new_id[root], mul: m, add: a });
        }
    }

    let lower: Vec<f64> = kept.iter().map(|&v| rep_lower[v]).collect();
    let upper: Vec<f64> = kept.iter().map(|&v| rep_upper[v]).collect();
    let binary: Vec<bool> = kept.iter().map(|&v| rep_binary[v]).collect();
    let n_eq = eq_rhs.len();
    let n_le = le_rhs.len();
    let reduced = ProblemMatrices {
        index: prob.index.clone(),
        n_vars: n_red,
        extras: Vec::new(),
        eq: eq.to_csr(n_eq, n_red),
        eq_rhs,
        eq_tags,
        le: le.to_csr(n_le, n_red),
        le_rhs,
        le_tags,
        lower,
        upper,
        binary,
        objective,
        quad_constraints,
    };
    Ok(Presolved { reduced, map, kept })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::VariableIndex;

    fn tiny_assembler(n_extra: usize) -> Assembler {
        // A 1-step, 1-place, 1-transition index gives a small base; extras
        // supply the variables under test.
        let idx = VariableIndex::new(1, 1, 1, 0, 0);
        let mut asm = Assembler::new(idx);
        for i in 0..n_extra {
            asm.add_extra(format!("x{i}"), f64::NEG_INFINITY, f64::INFINITY);
        }
        asm
    }

    #[test]
    fn presolve_fixes_chains_and_recovers() {
        let mut asm = tiny_assembler(4);
        let base = asm.index.total();
        let (a, b, c, d) = (base, base + 1, base + 2, base + 3);
        // a = 2, b = a + 1, c = 2b, objective on d and c; d free with a row
        // d + c = 10.
        asm.set_bounds(a, 2.0, 2.0);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(b, 1.0), (a, -1.0)], 1.0);
        asm.add_eq(RowTag::Pin { pin: 1 }, &[(c, 1.0), (b, -2.0)], 0.0);
        asm.add_eq(RowTag::Pin { pin: 2 }, &[(d, 1.0), (c, 1.0)], 10.0);
        asm.add_linear_cost(d, 1.0);
        asm.add_linear_cost(c, 3.0);
        let prob = asm.finish();
        let pre = presolve(&prob, 1e-9).unwrap();
        // Everything is determined: a=2, b=3, c=6, d=4.
        let x = pre.recover(&vec![0.0; pre.n_reduced()]);
        assert_eq!(x[a], 2.0);
        assert_eq!(x[b], 3.0);
        assert_eq!(x[c], 6.0);
        assert_eq!(x[d], 4.0);
        // Objective folded into the constant: d + 3c = 4 + 18 = 22.
        assert!((pre.reduced.objective.constant - 22.0).abs() < 1e-9);
    }

    #[test]
    fn presolve_flags_conflicting_fixes() {
        let mut asm = tiny_assembler(2);
        let base = asm.index.total();
        let (a, b) = (base, base + 1);
        asm.set_bounds(a, 1.0, 1.0);
        asm.set_bounds(b, 3.0, 3.0);
        // Row demands b = a + 1 → 3 = 2, infeasible.
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(b, 1.0), (a, -1.0)], 1.0);
        let prob = asm.finish();
        match presolve(&prob, 1e-9) {
            Err(Error::Infeasible(_)) => {}
            other => panic!("expected infeasible, got {:?}", other.map(|p| p.n_reduced())),
        }
    }

    #[test]
    fn presolve_substitutes_quadratics() {
        let mut asm = tiny_assembler(3);
        let base = asm.index.total();
        let (a, b, s) = (base, base + 1, base + 2);
        // a = 3 fixed; b free in [0, 10]; s ≥ a² + b² as a quad constraint
        // s − a² − b² ≥ 0 → a² + b² − s ≤ 0.
        asm.set_bounds(a, 3.0, 3.0);
        asm.set_bounds(b, 0.0, 10.0);
        asm.set_bounds(s, 0.0, f64::INFINITY);
        asm.add_quad_constraint(QuadConstraint {
            tag: RowTag::GenEpigraph { k: 1 },
            quad: QuadForm { terms: vec![(a, a, 1.0), (b, b, 1.0)] },
            linear: vec![(s, -1.0)],
            rhs: 0.0,
        });
        let prob = asm.finish();
        let pre = presolve(&prob, 1e-9).unwrap();
        // a eliminated: constraint is now b² − s ≤ −9.
        let qc = &pre.reduced.quad_constraints[0];
        assert!((qc.rhs - -9.0).abs() < 1e-9);
        assert_eq!(qc.quad.terms.len(), 1);
        assert_eq!(qc.linear.len(), 1);
        // Recover maps reduced values back; b and s are the last two kept
        // variables (extras follow the core block).
        let mut rx = vec![0.0; pre.n_reduced()];
        let n = pre.n_reduced();
        rx[n - 2] = 2.0;
        rx[n - 1] = 13.0;
        let x = pre.recover(&rx);
        assert_eq!(x[a], 3.0);
        assert_eq!(x[b], 2.0);
        assert_eq!(x[s], 13.0);
    }

    #[test]
    fn audit_reports_violations_with_provenance() {
        let mut asm = tiny_assembler(2);
        let base = asm.index.total();
        let (a, b) = (base, base + 1);
        asm.set_bounds(a, 0.0, 5.0);
        asm.set_bounds(b, 0.0, 5.0);
        asm.add_eq(RowTag::Pin { pin: 7 }, &[(a, 1.0), (b, 1.0)], 4.0);
        asm.add_le(RowTag::LotCapacity { lot: 3, k: 2 }, &[(a, 1.0)], 1.0);
        let prob = asm.finish();
        let mut x = vec![0.0; prob.n_vars];
        x[a] = 2.0;
        x[b] = 1.0;
        let issues = prob.audit(&x, 1e-9);
        assert_eq!(issues.len(), 2, "FAIL: expected equality + capacity violations: {issues:?}");
        assert!(issues.iter().any(|m| m.contains("boundary-pin 7")));
        assert!(issues.iter().any(|m| m.contains("lot-capacity b3 k2")));
    }

    #[test]
    fn protected_rows_survive_presolve() {
        let mut asm = tiny_assembler(3);
        let base = asm.index.total();
        let (a, b, c) = (base, base + 1, base + 2);
        // Two 2-term rows: one protected (kept), one not (consumed as an
        // alias). Without protection both would be folded away.
        asm.add_eq(RowTag::PlaceDynamics { place: 9, k: 1 }, &[(a, 1.0), (b, -1.0)], 0.0);
        asm.add_eq(RowTag::Pin { pin: 0 }, &[(b, 1.0), (c, -1.0)], 0.0);
        asm.add_eq(RowTag::Pin { pin: 1 }, &[(c, 1.0)], 4.0);
        let prob = asm.finish();
        let pre = presolve_protected(&prob, 1e-9, |tag| {
            matches!(tag, RowTag::PlaceDynamics { .. })
        })
        .unwrap();
        assert!(
            pre.reduced
                .eq_tags
                .iter()
                .any(|t| matches!(t, RowTag::PlaceDynamics { .. })),
            "FAIL: protected row was consumed"
        );
        // The reduced problem still pins everything to 4 through the
        // surviving row plus the recovery map.
        let solved = crate::solve::simplex::solve(
            &pre.reduced,
            &crate::solve::SolveOptions::default(),
        )
        .unwrap();
        let x = pre.recover(&solved.x);
        assert!((x[a] - 4.0).abs() < 1e-8);
        assert!((x[b] - 4.0).abs() < 1e-8);
        assert!((x[c] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn protected_row_duals_match_the_unreduced_problem() {
        // min u² + w²  s.t.  u + w − d = 0 (protected), d = 3 (consumable).
        // Eliminating d leaves the protected row as u + w = 3; its dual must
        // equal the dual computed on the original problem.
        let build = || {
            let mut asm = tiny_assembler(3);
            let base = asm.index.total();
            let (u, w, d) = (base, base + 1, base + 2);
            asm.add_quad_cost(u, u, 1.0);
            asm.add_quad_cost(w, w, 1.0);
            asm.add_eq(
                RowTag::PlaceDynamics { place: 1, k: 2 },
                &[(u, 1.0), (w, 1.0), (d, -1.0)],
                0.0,
            );
            asm.add_eq(RowTag::Pin { pin: 0 }, &[(d, 1.0)], 3.0);
            (asm.finish(), u, w)
        };
        let (orig, _, _) = build();
        let full = crate::solve::ipm::solve(&orig, &crate::solve::SolveOptions::default())
            .unwrap();
        let full_dual = full.eq_duals.as_ref().unwrap()[0];

        let pre = presolve_protected(&orig, 1e-9, |tag| {
            matches!(tag, RowTag::PlaceDynamics { .. })
        })
        .unwrap();
        let red = crate::solve::ipm::solve(&pre.reduced, &crate::solve::SolveOptions::default())
            .unwrap();
        let row = pre
            .reduced
            .eq_tags
            .iter()
            .position(|t| matches!(t, RowTag::PlaceDynamics { .. }))
            .expect("protected row present");
        let red_dual = red.eq_duals.as_ref().unwrap()[row];
        assert!(
            (full_dual - red_dual).abs() < 1e-4,
            "FAIL: dual drifted through presolve: {full_dual} vs {red_dual}"
        );
        // Sanity: at u = w = 3/2, stationarity gives ν = −2u = −3.
        assert!((full_dual + 3.0).abs() < 1e-4, "FAIL: dual {full_dual}");
    }
}
