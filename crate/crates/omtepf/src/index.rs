//! Deterministic variable indexing for the assembled optimization problem.
//!
//! Core network-flow variables are laid out step-major: for each firing step
//! `k` the block `[Q_B[k], Q_E[k], U⁻[k], U⁺[k]]`, followed by one tail block
//! `[Q_B[K+1], Q_E[K+1]]` for the final markings. Device-layer variables
//! (battery levels and bus voltages) are appended after the core so the core
//! layout — and with it every stored fixture — never shifts when device
//! models are attached.

use serde::{Deserialize, Serialize};

/// Index of every variable family in the assembled problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableIndex {
    pub horizon: usize,
    pub place_count: usize,
    pub transition_count: usize,
    pub n_evs: usize,
    pub n_buses: usize,
    core: usize,
    soc_base: usize,
    v_base: usize,
    total: usize,
}

impl VariableIndex {
    pub fn new(
        horizon: usize,
        place_count: usize,
        transition_count: usize,
        n_evs: usize,
        n_buses: usize,
    ) -> VariableIndex {
        let per_step = place_count + 3 * transition_count;
        let core = horizon * per_step + place_count + transition_count;
        let soc_base = core;
        let v_base = soc_base + n_evs * (horizon + 1);
        let total = v_base + 2 * n_buses * horizon;
        VariableIndex {
            horizon,
            place_count,
            transition_count,
            n_evs,
            n_buses,
            core,
            soc_base,
            v_base,
            total,
        }
    }

    fn per_step(&self) -> usize {
        self.place_count + 3 * self.transition_count
    }

    /// Buffer-place marking `Q_B[place]` at a marking instant in `1..=K+1`.
    pub fn q_b(&self, place: usize, instant: usize) -> usize {
        debug_assert!(place < self.place_count && instant >= 1 && instant <= self.horizon + 1);
        if instant <= self.horizon {
            (instant - 1) * self.per_step() + place
        } else {
            self.horizon * self.per_step() + place
        }
    }

    /// Transition (in-flight) marking `Q_E[trans]` at an instant in `1..=K+1`.
    pub fn q_e(&self, trans: usize, instant: usize) -> usize {
        debug_assert!(trans < self.transition_count && instant >= 1 && instant <= self.horizon + 1);
        if instant <= self.horizon {
            (instant - 1) * self.per_step() + self.place_count + trans
        } else {
            self.horizon * self.per_step() + self.place_count + trans
        }
    }

    /// Initiation firing `U⁻[trans]` at step `k` in `1..=K`.
    pub fn u_minus(&self, trans: usize, k: usize) -> usize {
        debug_assert!(trans < self.transition_count && k >= 1 && k <= self.horizon);
        (k - 1) * self.per_step() + self.place_count + self.transition_count + trans
    }

    /// Completion firing `U⁺[trans]` at step `k` in `1..=K`.
    pub fn u_plus(&self, trans: usize, k: usize) -> usize {
        debug_assert!(trans < self.transition_count && k >= 1 && k <= self.horizon);
        (k - 1) * self.per_step() + self.place_count + 2 * self.transition_count + trans
    }

    /// Battery level of vehicle `ev` at a marking instant in `1..=K+1`.
    pub fn soc(&self, ev: usize, instant: usize) -> usize {
        debug_assert!(ev < self.n_evs && instant >= 1 && instant <= self.horizon + 1);
        self.soc_base + ev * (self.horizon + 1) + (instant - 1)
    }

    /// Real bus-voltage component at step `k` in `1..=K`.
    pub fn v_real(&self, bus: usize, k: usize) -> usize {
        debug_assert!(bus < self.n_buses && k >= 1 && k <= self.horizon);
        self.v_base + (k - 1) * 2 * self.n_buses + bus
    }

    /// Imaginary bus-voltage component at step `k` in `1..=K`.
    pub fn v_imag(&self, bus: usize, k: usize) -> usize {
        debug_assert!(bus < self.n_buses && k >= 1 && k <= self.horizon);
        self.v_base + (k - 1) * 2 * self.n_buses + self.n_buses + bus
    }

    /// Number of core network-flow variables (markings and firings only).
    pub fn core_total(&self) -> usize {
        self.core
    }

    /// Total variable count including battery and voltage variables.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Unique, stable textual name for a variable (used by the exchange
    /// format writer and solver diagnostics).
    pub fn describe(&self, var: usize) -> String {
        assert!(var < self.total, "variable {var} out of range");
        if var < self.core {
            let per = self.per_step();
            let block = var / per;
            let within = var % per;
            if block == self.horizon {
                // Tail: final markings.
                return if within < self.place_count {
                    format!("QB_p{}_i{}", within, self.horizon + 1)
                } else {
                    format!("QE_t{}_i{}", within - self.place_count, self.horizon + 1)
                };
            }
            let k = block + 1;
            if within < self.place_count {
                format!("QB_p{within}_i{k}")
            } else if within < self.place_count + self.transition_count {
                format!("QE_t{}_i{k}", within - self.place_count)
            } else if within < self.place_count + 2 * self.transition_count {
                format!("UM_t{}_k{k}", within - self.place_count - self.transition_count)
            } else {
                format!("UP_t{}_k{k}", within - self.place_count - 2 * self.transition_count)
            }
        } else if var < self.v_base {
            let off = var - self.soc_base;
            format!("SOC_ev{}_i{}", off / (self.horizon + 1), off % (self.horizon + 1) + 1)
        } else {
            let off = var - self.v_base;
            let k = off / (2 * self.n_buses) + 1;
            let within = off % (2 * self.n_buses);
            if within < self.n_buses {
                format!("VR_b{within}_k{k}")
            } else {
                format!("VI_b{}_k{k}", within - self.n_buses)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scale_core_count_matches_identity() {
        // 56 steps × (884 places + 3 × 4040 transitions) + final markings.
        let idx = VariableIndex::new(56, 884, 4040, 32, 26);
        assert_eq!(
            idx.core_total(),
            56 * (884 + 3 * 4040) + (884 + 4040),
            "FAIL: core variable count identity"
        );
        assert_eq!(idx.core_total(), 733_148);
        assert_eq!(idx.total(), 733_148 + 32 * 57 + 2 * 26 * 56);
    }

    #[test]
    fn indices_are_disjoint_and_dense() {
        let idx = VariableIndex::new(3, 5, 4, 2, 3);
        let mut seen = vec![false; idx.total()];
        let mut mark = |v: usize| {
            assert!(!seen[v], "FAIL: variable {v} assigned twice");
            seen[v] = true;
        };
        for k in 1..=3 {
            for p in 0..5 {
                mark(idx.q_b(p, k));
            }
            for t in 0..4 {
                mark(idx.q_e(t, k));
                mark(idx.u_minus(t, k));
                mark(idx.u_plus(t, k));
            }
        }
        for p in 0..5 {
            mark(idx.q_b(p, 4));
        }
        for t in 0..4 {
            mark(idx.q_e(t, 4));
        }
        for ev in 0..2 {
            for i in 1..=4 {
                mark(idx.soc(ev, i));
            }
        }
        for k in 1..=3 {
            for b in 0..3 {
                mark(idx.v_real(b, k));
                mark(idx.v_imag(b, k));
            }
        }
        assert!(seen.iter().all(|&s| s), "FAIL: layout leaves holes");
    }

    #[test]
    fn names_round_trip_identity() {
        let idx = VariableIndex::new(2, 3, 2, 1, 2);
        assert_eq!(idx.describe(idx.q_b(1, 1)), "QB_p1_i1");
        assert_eq!(idx.describe(idx.q_e(0, 3)), "QE_t0_i3");
        assert_eq!(idx.describe(idx.u_minus(1, 2)), "UM_t1_k2");
        assert_eq!(idx.describe(idx.u_plus(0, 1)), "UP_t0_k1");
        assert_eq!(idx.describe(idx.soc(0, 2)), "SOC_ev0_i2");
        assert_eq!(idx.describe(idx.v_imag(1, 2)), "VI_b1_k2");
        // All names distinct.
        let names: std::collections::BTreeSet<String> =
            (0..idx.total()).map(|v| idx.describe(v)).collect();
        assert_eq!(names.len(), idx.total());
    }
}
