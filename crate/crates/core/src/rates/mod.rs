//! Achievable downlink/uplink rates, interference-plus-noise covariances and
//! residual SI powers.
//!
//! Determinants are never formed directly: every rate is a difference of
//! Hermitian log-determinants computed through Cholesky factors.

mod baseline;
mod oracle;

pub use baseline::{hd_baseline, HdBaseline};
pub use oracle::{signal_oracle, OracleEstimates};

use crate::error::{invalid, Error, Result};
use crate::numerics::{is_hermitian, log2_det_hpd, ComplexMatrix};
use crate::scalar::Real;

/// Per-trial rate summary in bits/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRecord<T> {
    pub dl_rate_bpshz: T,
    pub ul_rate_bpshz: T,
    pub fd_sum_bpshz: T,
    pub hd_rate_bpshz: T,
    /// Worst RX-chain residual SI power.
    pub max_residual_si_dbm: f64,
    pub feasible: bool,
}

impl<T: Real> RateRecord<T> {
    pub fn new(dl: T, ul: T, hd: T, max_residual_si_dbm: f64, feasible: bool) -> Self {
        Self {
            dl_rate_bpshz: dl,
            ul_rate_bpshz: ul,
            fd_sum_bpshz: dl + ul,
            hd_rate_bpshz: hd,
            max_residual_si_dbm,
            feasible,
        }
    }
}

/// Hermitian positive-semidefinite interference-plus-noise covariance.
#[derive(Debug, Clone)]
pub struct IpnCovariance<T: Real> {
    pub matrix: ComplexMatrix<T>,
}

impl<T: Real> IpnCovariance<T> {
    /// Wraps `matrix` after checking it is square and Hermitian.
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        let tol = T::lit(1e-12) * matrix.max_abs().max(T::min_positive_value());
        if !is_hermitian(&matrix, tol) {
            return invalid("IpN covariance must be Hermitian");
        }
        Ok(Self { matrix })
    }
}

/// `log2 det(I + M·M^H/σ²)` using whichever Gram matrix is smaller.
fn log2_det_gram<T: Real>(m: &ComplexMatrix<T>, sigma_sq: T) -> Result<T> {
    let mut g = if m.rows() <= m.cols() {
        m * &m.adjoint()
    } else {
        m.adjoint_mul(m)
    };
    g = g.scale(T::one() / sigma_sq);
    g.add_diagonal(T::one());
    Ok(log2_det_hpd(&g)?.log2.max(T::zero()))
}

/// Downlink rate `log2 det(I + H V V^H H^H / σ_q²)` with white noise at node `q`.
pub fn dl_rate<T: Real>(h_qk: &ComplexMatrix<T>, v_k: &ComplexMatrix<T>, sigma_q_sq: T) -> Result<T> {
    if !(sigma_q_sq > T::zero()) {
        return invalid("noise variance must be positive");
    }
    log2_det_gram(&h_qk.try_mul(v_k)?, sigma_q_sq)
}

/// IpN covariance at the RX RF-chain outputs, before digital combining:
/// `H̃ V_BB V_BB^H H̃^H + σ_k² U_RF^H U_RF`.
pub fn ipn_at_rf_chains<T: Real>(
    h_tilde: &ComplexMatrix<T>,
    v_bb: &ComplexMatrix<T>,
    u_rf: &ComplexMatrix<T>,
    sigma_k_sq: T,
) -> Result<ComplexMatrix<T>> {
    let si = h_tilde.try_mul(v_bb)?;
    let noise = u_rf.adjoint_mul(u_rf).scale(sigma_k_sq);
    (&si * &si.adjoint()).try_add(&noise).map(|m| m.hermitian_part())
}

/// IpN covariance after A/D combining,
/// `U_BB^H H̃ V_BB V_BB^H H̃^H U_BB + σ_k² U_BB^H U_RF^H U_RF U_BB`.
pub fn ipn_covariance_k<T: Real>(
    u_bb: &ComplexMatrix<T>,
    u_rf: &ComplexMatrix<T>,
    h_tilde: &ComplexMatrix<T>,
    v_bb: &ComplexMatrix<T>,
    sigma_k_sq: T,
) -> Result<IpnCovariance<T>> {
    let inner = ipn_at_rf_chains(h_tilde, v_bb, u_rf, sigma_k_sq)?;
    if inner.cols() != u_bb.rows() {
        return Err(Error::DimensionMismatch {
            op: "ipn_covariance_k",
            detail: format!("U_BB has {} rows for {} RX chains", u_bb.rows(), inner.cols()),
        });
    }
    let q = u_bb.adjoint_mul(&(&inner * u_bb)).hermitian_part();
    IpnCovariance::new(q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlRate<T> {
    pub bits: T,
    /// `Q_k` needed diagonal loading.
    pub regularized: bool,
}

/// Uplink rate `log2 det(I + U^H H V V^H H^H U Q⁻¹)`, evaluated as
/// `log2 det(Q + S) - log2 det(Q)` with `S = U^H H V V^H H^H U`.
pub fn ul_rate<T: Real>(
    u_k: &ComplexMatrix<T>,
    h_km: &ComplexMatrix<T>,
    v_m: &ComplexMatrix<T>,
    q_k: &IpnCovariance<T>,
) -> Result<UlRate<T>> {
    let a = u_k.adjoint_mul(&h_km.try_mul(v_m)?);
    if a.rows() != q_k.matrix.rows() {
        return Err(Error::DimensionMismatch {
            op: "ul_rate",
            detail: format!("{} streams vs {}x{} Q_k", a.rows(), q_k.matrix.rows(), q_k.matrix.cols()),
        });
    }
    let s = &a * &a.adjoint();
    let base = log2_det_hpd(&q_k.matrix)?;
    let with_signal = log2_det_hpd(&(&q_k.matrix + &s))?;
    let regularized = base.regularized || with_signal.regularized;
    if regularized {
        log::warn!("uplink rate evaluated with a regularized IpN covariance");
    }
    Ok(UlRate {
        bits: (with_signal.log2 - base.log2).max(T::zero()),
        regularized,
    })
}

/// Average SI power entering RX chain `row`: `‖[H̃ V_BB]_(row,:)‖²`.
pub fn residual_si_power<T: Real>(h_tilde: &ComplexMatrix<T>, v_bb: &ComplexMatrix<T>, row: usize) -> Result<T> {
    if row >= h_tilde.rows() {
        return invalid(format!("row {row} outside {} RX chains", h_tilde.rows()));
    }
    let r = ComplexMatrix::from_vec(1, h_tilde.cols(), h_tilde.row(row).to_vec())?.try_mul(v_bb)?;
    Ok(r.frobenius_norm_sqr())
}

/// Largest per-chain residual SI power.
pub fn max_residual_si_power<T: Real>(h_tilde: &ComplexMatrix<T>, v_bb: &ComplexMatrix<T>) -> Result<T> {
    let r = h_tilde.try_mul(v_bb)?;
    Ok((0..r.rows()).map(|j| r.row_norm_sqr(j)).fold(T::zero(), |a, b| a.max(b)))
}
