//! Half-duplex reference: downlink and uplink share time equally, each with
//! its own SI-free design.

use crate::beamforming::{capacity_precoder, design_ul_combiner, design_vm, AnalogBeamformer, NodeConfig};
use crate::channel::ChannelRealization;
use crate::codebook::BeamCodebook;
use crate::error::Result;
use crate::numerics::ComplexMatrix;
use crate::scalar::Real;

use super::{dl_rate, ul_rate, IpnCovariance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdBaseline<T> {
    pub dl_rate: T,
    pub ul_rate: T,
    /// `(dl_rate + ul_rate) / 2`.
    pub rate: T,
}

/// Per-chain codebook index maximizing `‖B_i · beam‖²`, where `B_i =
/// chain_block(i)` has the chain's subarray along its columns.
fn best_beams<T: Real>(
    codebook: &BeamCodebook<T>,
    chains: usize,
    chain_block: impl Fn(usize) -> ComplexMatrix<T>,
) -> Vec<usize> {
    let beams = codebook.as_matrix();
    (0..chains)
        .map(|i| {
            let g = &chain_block(i) * &beams;
            let mut best = 0;
            for b in 1..codebook.cardinality() {
                if g.column_norm_sqr(b) > g.column_norm_sqr(best) {
                    best = b;
                }
            }
            best
        })
        .collect()
}

/// Half-duplex rate with time sharing.
///
/// Downlink: each TX chain takes the beam maximizing its `‖H_qk^(i) v‖`, then
/// the water-filled capacity precoder at full `P_k`. Uplink: each RX chain
/// takes the beam maximizing `‖u^H H_km^(n)‖`, node `m` water-fills over the
/// analog-combined channel, and node `k` uses the MMSE combiner against
/// noise only.
pub fn hd_baseline<T: Real>(
    channels: &ChannelRealization<T>,
    cfg: &NodeConfig,
    codebook_tx: &BeamCodebook<T>,
    codebook_rx: &BeamCodebook<T>,
) -> Result<HdBaseline<T>> {
    let (n_a, m_a) = (codebook_tx.beam_length(), codebook_rx.beam_length());
    let h_qk = &channels.h_qk;
    let h_km = &channels.h_km;
    let sigma_q = T::lit(cfg.noise_q());
    let sigma_k = T::lit(cfg.noise_k());

    let tx = best_beams(codebook_tx, cfg.n_rf, |i| h_qk.block(0, i * n_a, h_qk.rows(), n_a));
    let v_rf = AnalogBeamformer::from_codebook(codebook_tx, &tx)?;
    let h_eff_dl = h_qk.try_mul(&v_rf.assembled)?;
    let v_bb = capacity_precoder(&h_eff_dl, T::lit(cfg.p_k()), sigma_q, cfg.d_k)?.precoder;
    let dl = dl_rate(&h_eff_dl, &v_bb, sigma_q)?;

    let rx = best_beams(codebook_rx, cfg.m_rf, |n| {
        h_km.block(n * m_a, 0, m_a, h_km.cols()).adjoint()
    });
    let u_rf = AnalogBeamformer::from_codebook(codebook_rx, &rx)?;
    let h_eff_ul = u_rf.assembled.adjoint_mul(h_km);
    let v_m = design_vm(&h_eff_ul, T::lit(cfg.p_m()), sigma_k, cfg.d_m)?;
    let q_inner = u_rf.assembled.adjoint_mul(&u_rf.assembled).scale(sigma_k);
    let u_bb = design_ul_combiner(&h_eff_ul, &v_m, &q_inner)?.u_bb;
    let q_k = IpnCovariance::new(u_bb.adjoint_mul(&(&q_inner * &u_bb)).hermitian_part())?;
    let u_k = &u_rf.assembled * &u_bb;
    let ul = ul_rate(&u_k, h_km, &v_m, &q_k)?.bits;

    Ok(HdBaseline {
        dl_rate: dl,
        ul_rate: ul,
        rate: (dl + ul) * T::lit(0.5),
    })
}
