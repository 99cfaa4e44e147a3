//! One-trial solver: analog beam search, canceller routing sweep, digital
//! precoder, then the uplink precoder/combiner and rate evaluation.
//!
//! The downlink-side quantities (canceller, analog beams, digital precoder)
//! are fixed first to maximize the downlink rate; the uplink combiner is
//! then chosen for the resulting interference.

use crate::beamforming::{
    algorithm1_digital_precoder, design_ul_combiner, design_vm, op2_search, DigitalPrecoder,
    HybridDesign, NodeConfig, Op2Result, SearchStrategy,
};
use crate::canceller::{analog_si, enumerate_routings, CancellerConfig, TapImpairments, TapRouting};
use crate::channel::ChannelRealization;
use crate::codebook::BeamCodebook;
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::rates::{
    dl_rate, hd_baseline, ipn_at_rf_chains, ipn_covariance_k, ul_rate, RateRecord,
};
use crate::scalar::{watts_to_dbm, Real};

/// TX and RX analog codebooks.
#[derive(Debug, Clone)]
pub struct Codebooks<T: Real> {
    pub tx: BeamCodebook<T>,
    pub rx: BeamCodebook<T>,
}

impl<T: Real> Codebooks<T> {
    /// DFT codebooks matching the subarray sizes of `cfg`, keeping every
    /// `step`-th beam.
    pub fn dft(cfg: &NodeConfig, tx_step: usize, rx_step: usize) -> Result<Self> {
        Ok(Self {
            tx: BeamCodebook::dft_subsampled(cfg.n_a(), tx_step)?,
            rx: BeamCodebook::dft_subsampled(cfg.m_a(), rx_step)?,
        })
    }
}

/// Canceller and search settings shared by every trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignParams {
    pub n_taps: usize,
    pub impairments: TapImpairments,
    pub strategy: SearchStrategy,
}

impl Default for DesignParams {
    fn default() -> Self {
        Self {
            n_taps: 4,
            impairments: TapImpairments::default(),
            strategy: SearchStrategy::default(),
        }
    }
}

/// Digital precoder obtained for one canceller routing.
#[derive(Debug, Clone)]
pub struct RoutingOutcome<T: Real> {
    pub canceller: CancellerConfig<T>,
    pub h_tilde: ComplexMatrix<T>,
    pub precoder: DigitalPrecoder<T>,
    pub dl_rate: T,
}

#[derive(Debug, Clone)]
pub struct TrialResult<T: Real> {
    pub rate_record: RateRecord<T>,
    pub chosen_routing: TapRouting,
    pub chosen_alpha: usize,
    pub op2_objective: T,
    pub routings_evaluated: usize,
    pub design: HybridDesign<T>,
    /// Log-det or combiner evaluations that needed diagonal loading.
    pub regularizations: usize,
}

/// Runs the digital precoder design for every routing of `n_taps` taps
/// against fixed analog beams.
pub fn sweep_routings<T: Real>(
    channels: &ChannelRealization<T>,
    cfg: &NodeConfig,
    op2: &Op2Result<T>,
    params: &DesignParams,
) -> Result<Vec<RoutingOutcome<T>>> {
    let si = analog_si(&op2.u_rf.assembled, &channels.h_kk, &op2.v_rf.assembled)?;
    let h_eff_dl = channels.h_qk.try_mul(&op2.v_rf.assembled)?;
    let (p_k, rho_a, noise_q) = (T::lit(cfg.p_k()), T::lit(cfg.rho_a()), T::lit(cfg.noise_q()));
    enumerate_routings(cfg.n_rf, cfg.m_rf, params.n_taps)?
        .into_iter()
        .map(|routing| {
            let canceller = CancellerConfig::realize(routing, &si, params.impairments)?;
            let h_tilde = si.try_add(&canceller.c)?;
            let precoder = algorithm1_digital_precoder(&h_tilde, &h_eff_dl, p_k, rho_a, noise_q, cfg.d_k)?;
            let dl = dl_rate(&h_eff_dl, &precoder.v_bb, noise_q)?;
            Ok(RoutingOutcome {
                canceller,
                h_tilde,
                precoder,
                dl_rate: dl,
            })
        })
        .collect()
}

/// Index of the routing to keep: the best feasible downlink rate (ties go to
/// fewer streams, then the earlier routing), or, when nothing is feasible,
/// the smallest worst-chain residual SI.
pub fn select_routing<T: Real>(outcomes: &[RoutingOutcome<T>]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, o) in outcomes.iter().enumerate().filter(|(_, o)| o.precoder.feasible) {
        let better = match best {
            None => true,
            Some(b) => {
                let cur = &outcomes[b];
                o.dl_rate > cur.dl_rate
                    || (o.dl_rate == cur.dl_rate && o.precoder.streams < cur.precoder.streams)
            }
        };
        if better {
            best = Some(i);
        }
    }
    if best.is_some() {
        return best;
    }
    for (i, o) in outcomes.iter().enumerate() {
        if best.is_none_or(|b| o.precoder.max_residual_si < outcomes[b].precoder.max_residual_si) {
            best = Some(i);
        }
    }
    best
}

/// Solves one channel realization end to end.
pub fn solve_trial<T: Real>(
    channels: &ChannelRealization<T>,
    cfg: &NodeConfig,
    codebooks: &Codebooks<T>,
    params: &DesignParams,
) -> Result<TrialResult<T>> {
    let violations = cfg.violations();
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    let op2 = op2_search(
        &channels.h_qk,
        &channels.h_kk,
        &codebooks.tx,
        &codebooks.rx,
        cfg.n_rf,
        cfg.m_rf,
        params.strategy,
    )?;
    let outcomes = sweep_routings(channels, cfg, &op2, params)?;
    let routings_evaluated = outcomes.len();
    let chosen = select_routing(&outcomes).expect("at least one routing");
    let RoutingOutcome {
        canceller,
        h_tilde,
        precoder,
        dl_rate: dl,
    } = outcomes.into_iter().nth(chosen).expect("selected index in range");

    let sigma_k = T::lit(cfg.noise_k());
    let u_rf = &op2.u_rf.assembled;
    let h_eff_ul = u_rf.adjoint_mul(&channels.h_km);
    let v_m = design_vm(&h_eff_ul, T::lit(cfg.p_m()), sigma_k, cfg.d_m)?;
    let q_inner = ipn_at_rf_chains(&h_tilde, &precoder.v_bb, u_rf, sigma_k)?;
    let combiner = design_ul_combiner(&h_eff_ul, &v_m, &q_inner)?;
    let q_k = ipn_covariance_k(&combiner.u_bb, u_rf, &h_tilde, &precoder.v_bb, sigma_k)?;
    let u_k = u_rf * &combiner.u_bb;
    let ul = ul_rate(&u_k, &channels.h_km, &v_m, &q_k)?;
    let hd = hd_baseline(channels, cfg, &codebooks.tx, &codebooks.rx)?;

    let rate_record = RateRecord::new(
        dl,
        ul.bits,
        hd.rate,
        watts_to_dbm(precoder.max_residual_si.to_f64_lossy()),
        precoder.feasible,
    );
    let chosen_routing = canceller.routing.clone();
    let design = HybridDesign {
        v_rf: op2.v_rf,
        u_rf: op2.u_rf,
        v_bb: precoder.v_bb,
        u_bb: combiner.u_bb,
        v_m,
        canceller,
        h_tilde,
        alpha: precoder.alpha,
        feasible: precoder.feasible,
    };
    Ok(TrialResult {
        rate_record,
        chosen_routing,
        chosen_alpha: precoder.alpha,
        op2_objective: op2.objective,
        routings_evaluated,
        design,
        regularizations: usize::from(combiner.regularized) + usize::from(ul.regularized),
    })
}
