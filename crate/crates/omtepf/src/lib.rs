//! Optimal multi-modal transportation and electric power flow (OMTEPF).
//!
//! This crate models a transportation–electricity nexus — a road network of
//! electric vehicles coupled to an electric distribution feeder through wired
//! and wireless charging — as a pair of timed Petri nets (an engineering
//! system net plus one operand net per vehicle battery), assembles the
//! resulting discrete-time minimum-cost-flow program, and solves two operating
//! scenarios end to end:
//!
//! * **uncoordinated** — a transportation MILP fixes routes, a range-anxiety
//!   charging heuristic fixes charging, and per-step IV-ACOPF problems price
//!   the resulting electric demand;
//! * **coordinated** — one joint mixed-integer convex program over transport,
//!   charging, and power flow.
//!
//! Layering (each module only depends on the ones above it):
//!
//! 1. [`sparse`] — minimal sparse/dense linear-algebra containers.
//! 2. [`petri`] — timed Petri nets and marking evolution.
//! 3. [`model`] — the serializable network model (buffers, roads, lines,
//!    stations, profiles, coefficients, itineraries).
//! 4. [`builder`] — constructors for the full symmetric test network and a
//!    4-buffer mini instance used by exhaustive oracles.
//! 5. [`index`] / [`assemble`] — decision-variable layout and sparse
//!    constraint-block emission with per-row provenance.
//! 6. [`power`] — rectangular current–voltage device models and convex
//!    electric objective terms.
//! 7. [`solve`] — bounded simplex, branch-and-bound, an interior-point method
//!    for convex quadratically-constrained programs, and an external-solver
//!    export/import path with post-import audits.
//! 8. [`scenario`] — the two scenario pipelines, evaluation metrics, and
//!    report writers.

pub mod assemble;
pub mod builder;
pub mod error;
pub mod index;
pub mod lp;
pub mod model;
pub mod petri;
pub mod power;
pub mod scenario;
pub mod solve;
pub mod sparse;

pub use error::{Error, Result};
