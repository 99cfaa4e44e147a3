mod common;

use common::*;
use fdhbf::beamforming::{op2_search, NodeConfig};
use fdhbf::canceller::TapImpairments;
use fdhbf::numerics::{svd, waterfill};
use fdhbf::orchestrator::{select_routing, solve_trial, sweep_routings, Codebooks, DesignParams};
use fdhbf::rates::{dl_rate, hd_baseline, ul_rate, IpnCovariance};
use fdhbf::rng::{StreamId, CHANNEL_LANE};
use fdhbf::sweep::{run_sweep, RunOptions, SweepConfig};
use fdhbf::{CMatrix, Channels};

fn draw(cfg: &NodeConfig, seed: u64, trial: u32) -> Channels {
    model_for(cfg)
        .draw(&mut StreamId::new(seed, 0, trial).rng(CHANNEL_LANE))
        .unwrap()
}

fn ideal(n_taps: usize) -> DesignParams {
    DesignParams {
        n_taps,
        impairments: TapImpairments::ideal(),
        ..DesignParams::default()
    }
}

#[test]
fn default_configuration_sweeps_seventy_routings() {
    let cfg = NodeConfig::default();
    let ch = draw(&cfg, 1, 0);
    let cb = Codebooks::dft(&cfg, 1, 1).unwrap();
    let r = solve_trial(&ch, &cfg, &cb, &DesignParams::default()).unwrap();
    assert_eq!(r.routings_evaluated, 70);
    assert_eq!(r.chosen_routing.num_taps(), 4);
    assert!((1..cfg.n_rf).contains(&r.chosen_alpha));
}

#[test]
fn chosen_routing_has_the_best_feasible_downlink_rate() {
    for t in 0..5 {
        let cfg = small_node();
        let ch = draw(&cfg, 2, t);
        let cb = Codebooks::dft(&cfg, 1, 1).unwrap();
        let params = DesignParams::default();
        let result = solve_trial(&ch, &cfg, &cb, &params).unwrap();
        let op2 = op2_search(&ch.h_qk, &ch.h_kk, &cb.tx, &cb.rx, cfg.n_rf, cfg.m_rf, params.strategy).unwrap();
        let outcomes = sweep_routings(&ch, &cfg, &op2, &params).unwrap();
        let best = outcomes
            .iter()
            .filter(|o| o.precoder.feasible)
            .map(|o| o.dl_rate)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(result.rate_record.dl_rate_bpshz, best);
        let idx = select_routing(&outcomes).unwrap();
        assert_eq!(outcomes[idx].canceller.routing, result.chosen_routing);
        for o in outcomes.iter().take(idx) {
            assert!(!o.precoder.feasible || o.dl_rate < best || o.precoder.streams > outcomes[idx].precoder.streams);
        }
    }
}

#[test]
fn full_tap_limit_reaches_capacity_of_alpha_max_streams() {
    let cfg = small_node();
    let cb = Codebooks::dft(&cfg, 1, 1).unwrap();
    for t in 0..5 {
        let ch = draw(&cfg, 3, t);
        let r = solve_trial(&ch, &cfg, &cb, &ideal(cfg.n_rf * cfg.m_rf)).unwrap();
        assert_eq!(r.design.h_tilde, CMatrix::zeros(cfg.m_rf, cfg.n_rf));
        assert!(r.rate_record.feasible);
        assert_eq!(r.chosen_alpha, cfg.n_rf - 1);

        let h_eff = &ch.h_qk * &r.design.v_rf.assembled;
        let s = svd(&h_eff).unwrap().singular_values;
        let streams = (cfg.n_rf - 1).min(cfg.d_k);
        let gains: Vec<f64> = s[..streams].iter().map(|x| x * x / cfg.noise_q()).collect();
        let wf = waterfill(&gains, cfg.p_k()).unwrap();
        let cap: f64 = gains.iter().zip(&wf.powers).map(|(g, p)| (1.0 + g * p).log2()).sum();
        assert!((r.rate_record.dl_rate_bpshz - cap).abs() < 1e-9, "{} vs {cap}", r.rate_record.dl_rate_bpshz);
    }
}

#[test]
fn canceller_off_with_vacuous_budget() {
    let cfg = NodeConfig {
        rho_a_dbm: 300.0,
        ..small_node()
    };
    let ch = draw(&cfg, 4, 0);
    let cb = Codebooks::dft(&cfg, 1, 1).unwrap();
    let r = solve_trial(&ch, &cfg, &cb, &ideal(0)).unwrap();
    assert_eq!(r.routings_evaluated, 1);
    assert_eq!(r.chosen_routing.num_taps(), 0);
    assert!(r.rate_record.feasible);
    assert_eq!(r.chosen_alpha, cfg.n_rf - 1);
    // Uncancelled SI swamps the uplink.
    let full = solve_trial(&ch, &cfg, &cb, &ideal(8)).unwrap();
    assert!(r.rate_record.ul_rate_bpshz < full.rate_record.ul_rate_bpshz);
}

#[test]
fn feasibility_is_monotone_in_tap_count() {
    let shapes = [(2, 2), (2, 3), (3, 3), (3, 2)];
    let mut infeasible_seen = 0;
    for (k, &(n_rf, m_rf)) in shapes.iter().enumerate() {
        let cfg = NodeConfig {
            n_k: 4 * n_rf,
            m_k: 4 * m_rf,
            n_rf,
            m_rf,
            d_k: n_rf.min(4),
            rho_a_dbm: -60.0,
            ..NodeConfig::default()
        };
        let cb = Codebooks::dft(&cfg, 1, 1).unwrap();
        for t in 0..6 {
            let ch = draw(&cfg, 50 + k as u64, t);
            let feasible: Vec<bool> = (0..=n_rf * m_rf)
                .map(|n| solve_trial(&ch, &cfg, &cb, &ideal(n)).unwrap().rate_record.feasible)
                .collect();
            for n in 0..feasible.len() - 1 {
                assert!(!feasible[n] || feasible[n + 1], "{n_rf}x{m_rf} trial {t}: {feasible:?}");
            }
            assert!(feasible[n_rf * m_rf]);
            infeasible_seen += feasible.iter().filter(|f| !**f).count();
        }
    }
    assert!(infeasible_seen > 0);
}

#[test]
fn trials_are_deterministic() {
    let cfg = small_node();
    let cb = Codebooks::dft(&cfg, 1, 1).unwrap();
    let a = solve_trial(&draw(&cfg, 9, 4), &cfg, &cb, &DesignParams::default()).unwrap();
    let b = solve_trial(&draw(&cfg, 9, 4), &cfg, &cb, &DesignParams::default()).unwrap();
    assert_eq!(a.rate_record, b.rate_record);
    assert_eq!(a.chosen_routing, b.chosen_routing);
    assert_eq!(a.design.v_bb, b.design.v_bb);
}

#[test]
fn single_trial_sweep_equals_direct_solve() {
    let mut c = SweepConfig::default();
    c.node = small_node();
    c.trials = 1;
    c.power_grid_dbm = vec![c.node.p_k_dbm];
    c.seed = 17;
    let out = run_sweep(&c, &RunOptions::default()).unwrap();
    let cb = Codebooks::dft(&c.node, 1, 1).unwrap();
    let ch: Channels = c
        .channel_model()
        .unwrap()
        .draw(&mut StreamId::new(17, 0, 0).rng(CHANNEL_LANE))
        .unwrap();
    let direct = solve_trial(&ch, &c.node, &cb, &c.design).unwrap().rate_record;
    let row = &out.rows[0];
    assert_eq!(row.fd_rate, direct.fd_sum_bpshz);
    assert_eq!(row.dl_rate, direct.dl_rate_bpshz);
    assert_eq!(row.ul_rate, direct.ul_rate_bpshz);
    assert_eq!(row.hd_rate, direct.hd_rate_bpshz);
    assert_eq!(row.trials, 1);
}

#[test]
fn adding_power_points_leaves_existing_ones_unchanged() {
    let mut c = SweepConfig::default();
    c.node = small_node();
    c.trials = 2;
    c.power_grid_dbm = vec![10.0, 20.0];
    let a = run_sweep(&c, &RunOptions::default()).unwrap();
    c.power_grid_dbm.push(30.0);
    let b = run_sweep(&c, &RunOptions::default()).unwrap();
    assert_eq!(a.rows[..], b.rows[..2]);
}

#[test]
fn doubling_trials_shrinks_standard_error() {
    let mut c = SweepConfig::default();
    c.node = small_node();
    c.power_grid_dbm = vec![30.0];
    c.trials = 100;
    let a = run_sweep(&c, &RunOptions::default()).unwrap().rows[0].fd_std_err;
    c.trials = 200;
    let b = run_sweep(&c, &RunOptions::default()).unwrap().rows[0].fd_std_err;
    let ratio = b / a;
    assert!((ratio / std::f64::consts::FRAC_1_SQRT_2 - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn rates_grow_with_power_on_a_fixed_draw() {
    let cfg = small_node();
    let ch = draw(&cfg, 6, 0);
    let cb = Codebooks::dft(&cfg, 1, 1).unwrap();
    let v = solve_trial(&ch, &cfg, &cb, &DesignParams::default()).unwrap().design.v_k();
    let mut last = 0.0;
    for k in 0..10 {
        let r = dl_rate(&ch.h_qk, &v.scale(2f64.powi(k)), cfg.noise_q()).unwrap();
        assert!(r >= last);
        last = r;
    }
    let mut hd_last = 0.0;
    for p in [-60.0, -30.0, 0.0, 20.0, 40.0] {
        let c = NodeConfig {
            p_k_dbm: p,
            p_m_dbm: p,
            ..cfg.clone()
        };
        let hd = hd_baseline(&ch, &c, &cb.tx, &cb.rx).unwrap();
        assert!(hd.rate >= hd_last);
        hd_last = hd.rate;
    }
}

#[test]
fn half_duplex_rate_vanishes_at_low_power() {
    let cfg = NodeConfig {
        p_k_dbm: -150.0,
        p_m_dbm: -150.0,
        ..small_node()
    };
    let ch = draw(&cfg, 7, 0);
    let cb = Codebooks::dft(&cfg, 1, 1).unwrap();
    assert!(hd_baseline(&ch, &cfg, &cb.tx, &cb.rx).unwrap().rate < 1e-6);
}

#[test]
fn uplink_rate_falls_as_residual_si_grows() {
    let mut r = rng(8);
    let u = random_matrix(4, 1, 1.0, &mut r);
    let h = random_matrix(4, 1, 1.0, &mut r);
    let v = CMatrix::identity(1);
    let si = random_matrix(1, 3, 1.0, &mut r);
    let no_si = ul_rate(&u, &h, &v, &IpnCovariance::new(CMatrix::identity(1)).unwrap()).unwrap().bits;
    let mut last = no_si;
    for k in 0..12 {
        let mut q = (&si * &si.adjoint()).scale(10f64.powi(k - 6));
        q.add_diagonal(1.0);
        let bits = ul_rate(&u, &h, &v, &IpnCovariance::new(q).unwrap()).unwrap().bits;
        assert!(bits < last);
        last = bits;
    }
    assert!(last < 0.01 * no_si);
}
