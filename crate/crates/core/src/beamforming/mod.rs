//! Analog and digital beamformer design for the full-duplex node and its
//! uplink peer.

mod analog;
mod digital;
mod op2;
mod uplink;

pub use analog::{assemble_block_diagonal, AnalogBeamformer};
pub use digital::{algorithm1_digital_precoder, capacity_precoder, CapacityPrecoder, DigitalPrecoder};
pub use op2::{op2_search, Op2Result, SearchStrategy};
pub use uplink::{design_ul_combiner, design_vm, UlCombiner};

use crate::canceller::CancellerConfig;
use crate::numerics::ComplexMatrix;
use crate::scalar::{dbm_to_watts, Real};

/// Antenna, RF-chain, stream and power configuration of the three nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeConfig {
    /// TX antennas at node `k`.
    pub n_k: usize,
    /// RX antennas at node `k`.
    pub m_k: usize,
    pub n_rf: usize,
    pub m_rf: usize,
    /// Antennas at the downlink receiver `q`.
    pub m_q: usize,
    /// Antennas at the uplink transmitter `m`.
    pub n_m: usize,
    /// Upper bound on downlink streams.
    pub d_k: usize,
    pub d_m: usize,
    pub p_k_dbm: f64,
    pub p_m_dbm: f64,
    pub noise_k_dbm: f64,
    pub noise_q_dbm: f64,
    /// Per-RX-chain residual SI budget.
    pub rho_a_dbm: f64,
}

impl Default for NodeConfig {
    fn default() -> Self {
        Self {
            n_k: 64,
            m_k: 32,
            n_rf: 4,
            m_rf: 2,
            m_q: 4,
            n_m: 1,
            d_k: 4,
            d_m: 1,
            p_k_dbm: 40.0,
            p_m_dbm: 40.0,
            noise_k_dbm: -110.0,
            noise_q_dbm: -110.0,
            rho_a_dbm: -47.0,
        }
    }
}

impl NodeConfig {
    /// Antennas per TX RF chain.
    pub fn n_a(&self) -> usize {
        self.n_k / self.n_rf.max(1)
    }

    /// Antennas per RX RF chain.
    pub fn m_a(&self) -> usize {
        self.m_k / self.m_rf.max(1)
    }

    pub fn p_k(&self) -> f64 {
        dbm_to_watts(self.p_k_dbm)
    }

    pub fn p_m(&self) -> f64 {
        dbm_to_watts(self.p_m_dbm)
    }

    pub fn noise_k(&self) -> f64 {
        dbm_to_watts(self.noise_k_dbm)
    }

    pub fn noise_q(&self) -> f64 {
        dbm_to_watts(self.noise_q_dbm)
    }

    pub fn rho_a(&self) -> f64 {
        dbm_to_watts(self.rho_a_dbm)
    }

    /// Every violated invariant, named by field.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, val) in [
            ("n_k", self.n_k),
            ("m_k", self.m_k),
            ("n_rf", self.n_rf),
            ("m_rf", self.m_rf),
            ("m_q", self.m_q),
            ("n_m", self.n_m),
            ("d_k", self.d_k),
            ("d_m", self.d_m),
        ] {
            if val == 0 {
                v.push(format!("{name} must be at least 1"));
            }
        }
        if self.n_rf > 0 && self.n_k % self.n_rf != 0 {
            v.push(format!(
                "n_k = {} is not divisible by n_rf = {}",
                self.n_k, self.n_rf
            ));
        }
        if self.m_rf > 0 && self.m_k % self.m_rf != 0 {
            v.push(format!(
                "m_k = {} is not divisible by m_rf = {}",
                self.m_k, self.m_rf
            ));
        }
        if self.n_rf < 2 {
            v.push(format!("n_rf = {} must be at least 2", self.n_rf));
        }
        if self.d_k > self.m_q.min(self.n_rf) {
            v.push(format!(
                "d_k = {} exceeds min(m_q, n_rf) = {}",
                self.d_k,
                self.m_q.min(self.n_rf)
            ));
        }
        if self.d_m > self.m_rf.min(self.n_m) {
            v.push(format!(
                "d_m = {} exceeds min(m_rf, n_m) = {}",
                self.d_m,
                self.m_rf.min(self.n_m)
            ));
        }
        for (name, val) in [
            ("p_k_dbm", self.p_k_dbm),
            ("p_m_dbm", self.p_m_dbm),
            ("noise_k_dbm", self.noise_k_dbm),
            ("noise_q_dbm", self.noise_q_dbm),
            ("rho_a_dbm", self.rho_a_dbm),
        ] {
            if val.is_nan() || val == f64::INFINITY {
                v.push(format!("{name} = {val} is not a usable power level"));
            }
        }
        v
    }
}

/// Complete transceiver design for one channel draw.
#[derive(Debug, Clone)]
pub struct HybridDesign<T: Real> {
    pub v_rf: AnalogBeamformer<T>,
    pub u_rf: AnalogBeamformer<T>,
    /// `N_RF × d_k`.
    pub v_bb: ComplexMatrix<T>,
    /// `M_RF × d_m`.
    pub u_bb: ComplexMatrix<T>,
    /// `N_m × d_m`.
    pub v_m: ComplexMatrix<T>,
    pub canceller: CancellerConfig<T>,
    /// Effective SI channel after analog beamforming and cancellation.
    pub h_tilde: ComplexMatrix<T>,
    pub alpha: usize,
    /// Residual-SI budget met on every RX chain.
    pub feasible: bool,
}

impl<T: Real> HybridDesign<T> {
    /// `V_RF · V_BB`.
    pub fn v_k(&self) -> ComplexMatrix<T> {
        &self.v_rf.assembled * &self.v_bb
    }

    /// `U_RF · U_BB`.
    pub fn u_k(&self) -> ComplexMatrix<T> {
        &self.u_rf.assembled * &self.u_bb
    }

    /// `tr{V_RF V_BB V_BB^H V_RF^H}`.
    pub fn transmit_power(&self) -> T {
        self.v_k().frobenius_norm_sqr()
    }
}
