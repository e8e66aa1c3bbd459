//! Serializable network model: buffers, roads, lines, charging
//! infrastructure, exogenous profiles, cost coefficients, capacities, and
//! vehicle itineraries.
//!
//! A [`TenModel`] is pure data — JSON-serializable, hand-editable, versioned.
//! The [`crate::builder`] module constructs the two canonical instances (the
//! full symmetric test network and a 4-buffer mini instance) and derives the
//! Petri-net/capability view from any model deterministically.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

/// Current model file format version; the loader rejects anything else.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// tan(acos(0.9)) rounded as used throughout the source material: couples a
/// real current/conductance to its reactive counterpart at power factor 0.9.
pub const PF_TAN: f64 = 0.4843;

/// What a buffer is, in the road-network sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BufferRole {
    /// Peripheral residential node: homes, home chargers, solar, load.
    Neighborhood,
    /// Central node: workplace parking, commercial charging, solar, load.
    CommercialCenter,
    /// Electric-only node carrying the dispatchable generator.
    GeneratorNode,
    /// Interior road junction: load only.
    Intersection,
}

/// Facilities a buffer can host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Facility {
    Parking,
    HomeCharger,
    CommercialCharger,
    Bus,
    Solar,
    Load,
}

/// One node of the coupled network. Every buffer has an electric bus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Buffer {
    pub id: usize,
    pub name: String,
    pub role: BufferRole,
    pub facilities: Vec<Facility>,
    /// Grid coordinates for road-bearing buffers (used only by builders and
    /// reports; `None` for the generator node).
    pub grid_pos: Option<(i32, i32)>,
}

/// A two-way road between two buffers. Directed road capabilities are derived
/// as `(a → b)` and `(b → a)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Road {
    pub id: usize,
    pub a: usize,
    pub b: usize,
    /// Whether the road is equipped for in-motion wireless charging.
    pub electrified: bool,
    /// Maximum vehicles per direction per step (movers plus in-motion
    /// chargers).
    pub capacity_per_direction: f64,
}

/// A distribution line with per-unit admittance `g + jb`, oriented `from → to`
/// (positive real current flows in that orientation).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Line {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub conductance: f64,
    pub susceptance: f64,
}

/// One electric vehicle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ev {
    pub id: usize,
    pub home: usize,
    pub work: usize,
    pub battery_capacity: f64,
    pub initial_soc: f64,
    pub final_soc: f64,
}

/// Wired charging station kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationKind {
    /// Serves only the vehicles homed at its buffer, all of them
    /// concurrently (each home supplies its own vehicle's charger).
    Home,
    /// Open to every vehicle, limited to `slots` concurrent vehicles.
    Commercial,
}

/// A wired charging station at a buffer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Station {
    pub id: usize,
    pub buffer: usize,
    pub kind: StationKind,
    /// Concurrent-vehicle limit for commercial stations; ignored for home
    /// stations (ownership already restricts them).
    pub slots: f64,
}

/// A directed wireless-charging lane along an electrified road; the current
/// is drawn from the bus of the departure-side buffer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WirelessLane {
    pub id: usize,
    pub road: usize,
    pub from: usize,
    pub to: usize,
}

/// A stochastic load and its profile class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadUnit {
    pub buffer: usize,
    pub class: LoadClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadClass {
    Neighborhood,
    Workplace,
    Intersection,
}

/// Charging/parking infrastructure section of the model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Capabilities {
    pub stations: Vec<Station>,
    pub wireless_lanes: Vec<WirelessLane>,
    /// Buffers carrying one solar unit each.
    pub solar_units: Vec<usize>,
    pub load_units: Vec<LoadUnit>,
    /// Buffers with parking lots (vehicle-capable buffers that can hold a
    /// resting vehicle across steps).
    pub parking_lots: Vec<usize>,
}

/// Exogenous per-step profiles, one value per firing step `k = 1..=horizon`
/// (stored 0-indexed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profiles {
    /// Per-panel solar current injection (real part); imaginary part is
    /// `PF_TAN ×` real.
    pub solar_real: Vec<f64>,
    /// Load conductance per class; susceptance is `−PF_TAN ×` conductance.
    pub load_g_neighborhood: Vec<f64>,
    pub load_g_workplace: Vec<f64>,
    pub load_g_intersection: Vec<f64>,
}

impl Profiles {
    pub fn load_g(&self, class: LoadClass, k: usize) -> f64 {
        match class {
            LoadClass::Neighborhood => self.load_g_neighborhood[k - 1],
            LoadClass::Workplace => self.load_g_workplace[k - 1],
            LoadClass::Intersection => self.load_g_intersection[k - 1],
        }
    }

    /// Solar current (real, imag) injected by one panel at firing step `k`.
    pub fn solar(&self, k: usize) -> (f64, f64) {
        let r = self.solar_real[k - 1];
        (r, r * PF_TAN)
    }
}

/// Objective coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostCoefficients {
    /// Per-step cost of one in-flight road traversal.
    pub f_qet: f64,
    /// Per-step cost of one vehicle resting in a buffer queue.
    pub f_qbt: f64,
    /// Dispatchable generator cost `α·|I|⁴ + β·|I|² + γ` per step.
    pub gen_alpha: f64,
    pub gen_beta: f64,
    pub gen_gamma: f64,
    /// Demand-revenue coefficients (per load, per step):
    /// `(ρ̄_R·G² − ρ̄_I·B²)·|V|⁴ − (β̄_R·G − β̄_I·B)·|V|² + γ̄`.
    pub eds_rho_r: f64,
    pub eds_beta_r: f64,
    pub eds_rho_i: f64,
    pub eds_beta_i: f64,
    pub eds_gamma: f64,
    /// Unit price applied to total solar energy for the reported solar cost
    /// (the solar term is constant in every optimization).
    pub c_solar: f64,
    /// Scale applied to the per-unit charging current draws when they enter
    /// the bus current balance; the capability draw values themselves stay at
    /// their nominal magnitudes.
    pub current_draw_scale: f64,
}

/// Hard capacities and voltage limits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Capacities {
    /// Per-direction cap on the four center-adjacent roads.
    pub road_center: f64,
    /// Per-direction cap on every other road.
    pub road_other: f64,
    /// Workplace parking lot total across vehicles.
    pub work_parking: f64,
    /// Squared voltage-magnitude ceiling (per-unit²).
    pub v_max_sq: f64,
    /// Linear floor on the real voltage component (secant relaxation of the
    /// magnitude lower bound).
    pub v_r_min: f64,
}

/// Per-vehicle daily schedule in firing-step indices (1-based).
///
/// With the default horizon (6am–8pm at 15-minute steps, 56 firing steps),
/// 8am is step 9, 4pm is step 41 and 6pm is step 49.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Itinerary {
    pub ev: usize,
    pub home: usize,
    pub work: usize,
    /// First/last firing step of the morning commute window.
    pub morning_window: (usize, usize),
    /// First/last firing step of the evening commute window.
    pub evening_window: (usize, usize),
    /// Step at which the vehicle must be (re-)parking or charging at work.
    pub work_arrival: usize,
    /// Step at which the vehicle must still be parking/charging at work
    /// before the evening commute begins.
    pub work_departure: usize,
    /// Step at which the vehicle must be (re-)parking at home.
    pub home_arrival: usize,
}

/// Scenario selector baked into boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Uncoordinated,
    Coordinated,
}

/// The complete, serializable network model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TenModel {
    pub version: u32,
    pub name: String,
    /// Wall-clock hours per firing step (reporting only; dynamics use unit
    /// steps).
    pub dt_hours: f64,
    /// Number of firing steps K; markings exist at instants `1..=K+1`.
    pub horizon: usize,
    pub buffers: Vec<Buffer>,
    pub roads: Vec<Road>,
    pub lines: Vec<Line>,
    pub evs: Vec<Ev>,
    pub capabilities: Capabilities,
    pub gen_buffer: usize,
    pub profiles: Profiles,
    pub coefficients: CostCoefficients,
    pub capacities: Capacities,
    pub itineraries: Vec<Itinerary>,
}

impl TenModel {
    /// Load a model file, rejecting unknown format versions.
    pub fn load(path: &Path) -> Result<TenModel> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<TenModel> {
        // Peek at the version before full decoding so schema drift in a
        // newer file yields the version error, not a field error.
        #[derive(Deserialize)]
        struct VersionOnly {
            version: u32,
        }
        let v: VersionOnly =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("model header: {e}")))?;
        if v.version != MODEL_FORMAT_VERSION {
            return Err(Error::Version { found: v.version, expected: MODEL_FORMAT_VERSION });
        }
        let model: TenModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Structural consistency of the model file (cross-references, profile
    /// lengths, facility agreement).
    pub fn validate(&self) -> Result<()> {
        let nb = self.buffers.len();
        let bad = |msg: String| Err(Error::Config(msg));
        for (i, b) in self.buffers.iter().enumerate() {
            if b.id != i {
                return bad(format!("buffer {} stored at position {i}", b.id));
            }
        }
        for r in &self.roads {
            if r.a >= nb || r.b >= nb || r.a == r.b {
                return bad(format!("road {} endpoints ({}, {}) invalid", r.id, r.a, r.b));
            }
        }
        for l in &self.lines {
            if l.from >= nb || l.to >= nb || l.from == l.to {
                return bad(format!("line {} endpoints ({}, {}) invalid", l.id, l.from, l.to));
            }
        }
        for ev in &self.evs {
            if ev.home >= nb || ev.work >= nb {
                return bad(format!("ev {} home/work out of range", ev.id));
            }
            if ev.initial_soc < 0.0
                || ev.initial_soc > ev.battery_capacity
                || ev.final_soc < 0.0
                || ev.final_soc > ev.battery_capacity
            {
                return bad(format!("ev {} boundary soc outside battery range", ev.id));
            }
        }
        for s in &self.capabilities.stations {
            if s.buffer >= nb {
                return bad(format!("station {} buffer out of range", s.id));
            }
        }
        let road_pairs: BTreeSet<(usize, usize)> = self
            .roads
            .iter()
            .flat_map(|r| [(r.a, r.b), (r.b, r.a)])
            .collect();
        for w in &self.capabilities.wireless_lanes {
            let road = self
                .roads
                .get(w.road)
                .ok_or_else(|| Error::Config(format!("wireless lane {} road missing", w.id)))?;
            if !road.electrified {
                return bad(format!("wireless lane {} rides non-electrified road", w.id));
            }
            if !road_pairs.contains(&(w.from, w.to)) {
                return bad(format!("wireless lane {} endpoints not a road direction", w.id));
            }
        }
        for &s in &self.capabilities.solar_units {
            if s >= nb {
                return bad(format!("solar unit buffer {s} out of range"));
            }
        }
        for l in &self.capabilities.load_units {
            if l.buffer >= nb {
                return bad(format!("load unit buffer {} out of range", l.buffer));
            }
        }
        for &p in &self.capabilities.parking_lots {
            if p >= nb {
                return bad(format!("parking lot buffer {p} out of range"));
            }
        }
        if self.gen_buffer >= nb {
            return bad("generator buffer out of range".into());
        }
        let k = self.horizon;
        if k < 2 {
            return bad(format!("horizon {k} too short"));
        }
        for (name, v) in [
            ("solar_real", &self.profiles.solar_real),
            ("load_g_neighborhood", &self.profiles.load_g_neighborhood),
            ("load_g_workplace", &self.profiles.load_g_workplace),
            ("load_g_intersection", &self.profiles.load_g_intersection),
        ] {
            if v.len() != k {
                return bad(format!("profile {name} has {} entries, horizon is {k}", v.len()));
            }
        }
        if self.itineraries.len() != self.evs.len() {
            return bad("one itinerary required per vehicle".into());
        }
        for it in &self.itineraries {
            if it.ev >= self.evs.len() {
                return bad(format!("itinerary for unknown ev {}", it.ev));
            }
            let ok = it.morning_window.0 >= 2
                && it.morning_window.0 <= it.morning_window.1
                && it.morning_window.1 <= it.work_arrival
                && it.work_arrival <= it.work_departure
                && it.work_departure < it.evening_window.0
                && it.evening_window.0 <= it.evening_window.1
                && it.evening_window.1 <= it.home_arrival
                && it.home_arrival <= k;
            if !ok {
                return bad(format!("itinerary for ev {} has disordered windows", it.ev));
            }
        }
        // Facility agreement.
        for s in &self.capabilities.stations {
            let f = match s.kind {
                StationKind::Home => Facility::HomeCharger,
                StationKind::Commercial => Facility::CommercialCharger,
            };
            if !self.buffers[s.buffer].facilities.contains(&f) {
                return bad(format!("station {} not in buffer {} facilities", s.id, s.buffer));
            }
        }
        for &p in &self.capabilities.parking_lots {
            if !self.buffers[p].facilities.contains(&Facility::Parking) {
                return bad(format!("parking lot at {p} not in buffer facilities"));
            }
        }
        Ok(())
    }

    /// Vehicles homed at `buffer`.
    pub fn resident_evs(&self, buffer: usize) -> Vec<usize> {
        self.evs.iter().filter(|e| e.home == buffer).map(|e| e.id).collect()
    }

    /// Marking instants `1..=horizon+1`.
    pub fn instant_count(&self) -> usize {
        self.horizon + 1
    }

    /// Shorten the day to its first `n` firing steps.  Profiles are
    /// truncated; every itinerary must still fit the shorter day (enforced
    /// by [`TenModel::validate`]).
    pub fn truncate_horizon(&mut self, n: usize) -> Result<()> {
        if n > self.horizon {
            return Err(Error::Config(format!(
                "cannot extend the horizon from {} to {n} steps",
                self.horizon
            )));
        }
        self.horizon = n;
        self.profiles.solar_real.truncate(n);
        self.profiles.load_g_neighborhood.truncate(n);
        self.profiles.load_g_workplace.truncate(n);
        self.profiles.load_g_intersection.truncate(n);
        self.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::build_mini;

    #[test]
    fn mini_model_round_trips_through_json() {
        let model = build_mini(&Default::default()).unwrap();
        let text = serde_json::to_string(&model).unwrap();
        let back = TenModel::from_json(&text).unwrap();
        assert_eq!(back.buffers.len(), model.buffers.len());
        assert_eq!(back.horizon, model.horizon);
        assert_eq!(back.evs.len(), 2);
    }

    #[test]
    fn loader_rejects_unknown_version() {
        let model = build_mini(&Default::default()).unwrap();
        let mut value: serde_json::Value = serde_json::to_value(&model).unwrap();
        value["version"] = serde_json::json!(99);
        let text = serde_json::to_string(&value).unwrap();
        match TenModel::from_json(&text) {
            Err(Error::Version { found: 99, expected }) => {
                assert_eq!(expected, MODEL_FORMAT_VERSION)
            }
            other => panic!("expected version error, got {other:?}"),
        }
    }
}
