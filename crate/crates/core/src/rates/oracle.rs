//! Sample-level simulation of the received signals, used to cross-check the
//! analytic covariances and SI powers.
//!
//! Downlink (node `q`): `y_q = H_qk V_RF V_BB s_k + n_q`; the inter-node
//! interference channel is zero.
//! Uplink estimate (node `k`):
//! `ŝ_m = U_BB^H H̃ V_BB s_k + U_BB^H U_RF^H (H_km V_m s_m + n_k)`.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;

use crate::beamforming::{HybridDesign, NodeConfig};
use crate::channel::{complex_normal, ChannelRealization};
use crate::error::{invalid, Result};
use crate::numerics::ComplexMatrix;
use crate::scalar::{cplx, Real};

/// Empirical second-order statistics from the signal simulation.
#[derive(Debug, Clone)]
pub struct OracleEstimates<T: Real> {
    /// Time-averaged `|[H̃ V_BB s_k]_j|²` per RX chain.
    pub per_chain_si_power: Vec<T>,
    /// Sample covariance of the SI-plus-noise part of `ŝ_m`.
    pub q_k: ComplexMatrix<T>,
    /// Sample covariance of `y_q`.
    pub y_q_cov: ComplexMatrix<T>,
    /// Sample covariance of the full `ŝ_m`.
    pub s_hat_cov: ComplexMatrix<T>,
    pub num_samples: usize,
}

fn draw<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, std_dev: f64) -> Vec<Complex<T>> {
    (0..n)
        .map(|_| {
            let z = complex_normal(rng) * std_dev;
            cplx(T::lit(z.re), T::lit(z.im))
        })
        .collect()
}

fn apply<T: Real>(m: &ComplexMatrix<T>, x: &[Complex<T>], out: &mut [Complex<T>]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = m.row(i).iter().zip(x).map(|(a, b)| *a * *b).sum();
    }
}

fn accumulate<T: Real>(acc: &mut ComplexMatrix<T>, x: &[Complex<T>]) {
    for i in 0..x.len() {
        for j in 0..x.len() {
            acc[(i, j)] += x[i] * x[j].conj();
        }
    }
}

/// Draws unit-power circular Gaussian symbols and AWGN, forms both received
/// signals and returns their empirical statistics.
pub fn signal_oracle<T: Real, R: Rng + ?Sized>(
    design: &HybridDesign<T>,
    channels: &ChannelRealization<T>,
    cfg: &NodeConfig,
    num_samples: usize,
    rng: &mut R,
) -> Result<OracleEstimates<T>> {
    if num_samples == 0 {
        return invalid("signal oracle needs at least one sample");
    }
    let sigma_k = cfg.noise_k().sqrt();
    let sigma_q = cfg.noise_q().sqrt();

    let si_map = design.h_tilde.try_mul(&design.v_bb)?; // M_RF × d_k
    let si_to_streams = design.u_bb.adjoint_mul(&si_map); // d_m × d_k
    let rx_combine = design.u_bb.adjoint_mul(&design.u_rf.assembled.adjoint()); // d_m × M_k
    let ul_map = rx_combine.try_mul(&channels.h_km.try_mul(&design.v_m)?)?; // d_m × d_m
    let dl_map = channels.h_qk.try_mul(&design.v_k())?; // M_q × d_k

    let (m_rf, d_k) = si_map.shape();
    let d_m = design.u_bb.cols();
    let m_k = channels.h_kk.rows();
    let m_q = channels.h_qk.rows();

    let mut si_pow = vec![T::zero(); m_rf];
    let mut q_acc = ComplexMatrix::zeros(d_m, d_m);
    let mut s_acc = ComplexMatrix::zeros(d_m, d_m);
    let mut y_acc = ComplexMatrix::zeros(m_q, m_q);
    let mut si = vec![Complex::zero(); m_rf];
    let mut ipn = vec![Complex::zero(); d_m];
    let mut tmp = vec![Complex::zero(); d_m];
    let mut sig = vec![Complex::zero(); d_m];
    let mut y = vec![Complex::zero(); m_q];

    for _ in 0..num_samples {
        let s_k: Vec<Complex<T>> = draw(rng, d_k, 1.0);
        let s_m: Vec<Complex<T>> = draw(rng, design.v_m.cols(), 1.0);
        let n_k: Vec<Complex<T>> = draw(rng, m_k, sigma_k);
        let n_q: Vec<Complex<T>> = draw(rng, m_q, sigma_q);

        apply(&si_map, &s_k, &mut si);
        for (p, z) in si_pow.iter_mut().zip(&si) {
            *p += z.norm_sqr();
        }

        apply(&si_to_streams, &s_k, &mut ipn);
        apply(&rx_combine, &n_k, &mut tmp);
        for (a, b) in ipn.iter_mut().zip(&tmp) {
            *a += *b;
        }
        accumulate(&mut q_acc, &ipn);

        apply(&ul_map, &s_m, &mut sig);
        for (a, b) in sig.iter_mut().zip(&ipn) {
            *a += *b;
        }
        accumulate(&mut s_acc, &sig);

        apply(&dl_map, &s_k, &mut y);
        for (a, b) in y.iter_mut().zip(&n_q) {
            *a += *b;
        }
        accumulate(&mut y_acc, &y);
    }

    let inv = T::one() / T::count(num_samples);
    Ok(OracleEstimates {
        per_chain_si_power: si_pow.into_iter().map(|p| p * inv).collect(),
        q_k: q_acc.scale(inv),
        y_q_cov: y_acc.scale(inv),
        s_hat_cov: s_acc.scale(inv),
        num_samples,
    })
}
