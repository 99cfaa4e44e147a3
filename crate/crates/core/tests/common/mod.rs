#![allow(dead_code)]

use fdhbf::beamforming::NodeConfig;
use fdhbf::orchestrator::{solve_trial, Codebooks, DesignParams};
use fdhbf::rng::{StreamId, CHANNEL_LANE};
use fdhbf::{Channels, Design};
use fdhbf::channel::{ArrayGeometry, ChannelModel, ClusteredChannelParams, SiChannelParams};
use fdhbf::numerics::svd;
use fdhbf::CMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
    })
}

/// Small node for fast end-to-end tests: 16 TX and 8 RX antennas.
pub fn small_node() -> NodeConfig {
    NodeConfig {
        n_k: 16,
        m_k: 8,
        ..NodeConfig::default()
    }
}

pub fn model_for(cfg: &NodeConfig) -> ChannelModel {
    ChannelModel {
        tx_k: ArrayGeometry::half_wavelength(cfg.n_k).unwrap(),
        rx_k: ArrayGeometry::half_wavelength(cfg.m_k).unwrap(),
        node_q: ArrayGeometry::half_wavelength(cfg.m_q).unwrap(),
        node_m: ArrayGeometry::half_wavelength(cfg.n_m).unwrap(),
        clustered: ClusteredChannelParams::default(),
        si: SiChannelParams::default(),
    }
}

/// LU with partial pivoting; returns `(det, solve)` helpers in one pass.
pub struct Lu {
    lu: Vec<Vec<Complex64>>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Lu {
        let n = a.rows();
        assert_eq!(n, a.cols());
        let mut lu: Vec<Vec<Complex64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| lu[x][k].norm().partial_cmp(&lu[y][k].norm()).unwrap())
                .unwrap();
            if p != k {
                lu.swap(p, k);
                perm.swap(p, k);
                sign = -sign;
            }
            for i in k + 1..n {
                let f = lu[i][k] / lu[k][k];
                lu[i][k] = f;
                for j in k + 1..n {
                    let t = lu[k][j];
                    lu[i][j] -= f * t;
                }
            }
        }
        Lu { lu, perm, sign }
    }

    pub fn log2_abs_det(&self) -> f64 {
        (0..self.lu.len()).map(|i| self.lu[i][i].norm().log2()).sum()
    }

    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        let n = self.lu.len();
        let mut x = CMatrix::zeros(n, b.cols());
        for c in 0..b.cols() {
            let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[(p, c)]).collect();
            for i in 0..n {
                for j in 0..i {
                    let t = self.lu[i][j] * y[j];
                    y[i] -= t;
                }
            }
            for i in (0..n).rev() {
                for j in i + 1..n {
                    let t = self.lu[i][j] * y[j];
                    y[i] -= t;
                }
                y[i] /= self.lu[i][i];
            }
            for i in 0..n {
                x[(i, c)] = y[i];
            }
        }
        let _ = self.sign;
        x
    }
}

/// `log2 det(I + M)` through LU.
pub fn log2_det_i_plus(m: &CMatrix) -> f64 {
    let mut a = m.clone();
    a.add_diagonal(1.0);
    Lu::new(&a).log2_abs_det()
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    svd(m).unwrap().singular_values[0]
}

/// Maximizes `Σ log2(1 + g_i p_i)` over the power simplex by nested ternary
/// search (the objective is concave), independently of any closed form.
pub fn waterfill_search(gains: &[f64], power: f64) -> f64 {
    fn rate(gains: &[f64], p: &[f64]) -> f64 {
        gains.iter().zip(p).map(|(g, x)| (1.0 + g * x).log2()).sum()
    }
    fn best(gains: &[f64], budget: f64, fixed: &mut Vec<f64>) -> f64 {
        if fixed.len() + 1 == gains.len() {
            fixed.push(budget);
            let r = rate(gains, fixed);
            fixed.pop();
            return r;
        }
        let (mut lo, mut hi) = (0.0, budget);
        let eval = |x: f64, fixed: &mut Vec<f64>| {
            fixed.push(x);
            let r = best(gains, budget - x, fixed);
            fixed.pop();
            r
        };
        for _ in 0..90 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if eval(m1, fixed) < eval(m2, fixed) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        eval(0.5 * (lo + hi), fixed)
    }
    best(gains, power, &mut Vec::new())
}

fn explicit_block_diagonal(beams: &[Vec<Complex64>]) -> CMatrix {
    let len = beams[0].len();
    let mut m = CMatrix::zeros(len * beams.len(), beams.len());
    for (c, b) in beams.iter().enumerate() {
        for (r, z) in b.iter().enumerate() {
            m[(c * len + r, c)] = *z;
        }
    }
    m
}

fn digits(mut code: usize, base: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = code % base;
        code /= base;
    }
    d
}

/// Joint exhaustive analog search written from dense products. Candidates are
/// visited TX-major in lexicographic order; a candidate replaces the incumbent
/// only on a strictly larger ratio, or an equal ratio with a larger numerator.
pub fn brute_force_op2(
    h_qk: &CMatrix,
    h_kk: &CMatrix,
    cb_tx: &[Vec<Complex64>],
    cb_rx: &[Vec<Complex64>],
    n_rf: usize,
    m_rf: usize,
) -> (Vec<usize>, Vec<usize>) {
    let mut best: Option<(f64, f64, Vec<usize>, Vec<usize>)> = None;
    for tc in 0..cb_tx.len().pow(n_rf as u32) {
        let tx = digits(tc, cb_tx.len(), n_rf);
        let v = explicit_block_diagonal(&tx.iter().map(|&b| cb_tx[b].clone()).collect::<Vec<_>>());
        let num = (h_qk * &v).frobenius_norm_sqr();
        for rc in 0..cb_rx.len().pow(m_rf as u32) {
            let rx = digits(rc, cb_rx.len(), m_rf);
            let u = explicit_block_diagonal(&rx.iter().map(|&b| cb_rx[b].clone()).collect::<Vec<_>>());
            let den = (&u.adjoint() * &(h_kk * &v)).frobenius_norm_sqr();
            let ratio = if den > 0.0 { num / den } else { f64::INFINITY };
            let better = match &best {
                None => true,
                Some((bn, bd, _, _)) => {
                    let br = if *bd > 0.0 { bn / bd } else { f64::INFINITY };
                    ratio > br || (ratio == br && num > *bn)
                }
            };
            if better {
                best = Some((num, den, tx.clone(), rx));
            }
        }
    }
    let (_, _, tx, rx) = best.unwrap();
    (tx, rx)
}

pub fn worst_row_power(h_tilde: &CMatrix, v_bb: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..h_tilde.rows() {
        let mut p = 0.0;
        for c in 0..v_bb.cols() {
            let z: Complex64 = (0..h_tilde.cols()).map(|i| h_tilde[(j, i)] * v_bb[(i, c)]).sum();
            p += z.norm_sqr();
        }
        worst = worst.max(p);
    }
    worst
}

/// Evaluates every `α` from `N_RF − 1` down to 1 over the right singular
/// vectors of `h_tilde` and returns the first that passes the per-chain
/// budget, with `(1, false)` when none does. The third value is the smallest
/// relative gap between any candidate's worst-chain power and the budget.
pub fn precoder_by_enumeration(
    h_tilde: &CMatrix,
    h_eff_dl: &CMatrix,
    p_k: f64,
    rho_a: f64,
    noise_q: f64,
    max_streams: usize,
) -> (usize, bool, f64) {
    let n_rf = h_tilde.cols();
    let s = svd(h_tilde).unwrap();
    let top = s.singular_values[0];
    let tol = f64::EPSILON * h_tilde.rows().max(n_rf) as f64 * top;
    let rank = s.singular_values.iter().filter(|&&x| top > 0.0 && x > tol).count();
    let mut d = s.right_vectors.clone();
    if n_rf - rank >= 2 {
        // Degenerate null space: order its basis by downlink gain, strongest last.
        let null = d.columns(rank..n_rf);
        let w = svd(&(h_eff_dl * &null)).unwrap().right_vectors;
        let rotated = &null * &w;
        for k in 0..n_rf - rank {
            d.set_column(n_rf - 1 - k, &rotated.column(k));
        }
    }
    let mut margin = f64::INFINITY;
    let passes: Vec<bool> = (1..n_rf)
        .map(|alpha| {
            let f = d.columns(n_rf - alpha..n_rf);
            let v_bb = if alpha == 1 {
                f.scale(p_k.sqrt())
            } else {
                let g = fdhbf::beamforming::capacity_precoder(
                    &(h_eff_dl * &f),
                    p_k,
                    noise_q,
                    max_streams.min(alpha),
                )
                .unwrap();
                &f * &g.precoder
            };
            let worst = worst_row_power(h_tilde, &v_bb);
            margin = margin.min((worst - rho_a).abs() / rho_a);
            worst <= rho_a
        })
        .collect();
    for alpha in (2..n_rf).rev() {
        if passes[alpha - 1] {
            return (alpha, true, margin);
        }
    }
    (1, passes[0], margin)
}

/// End-to-end designs on small nodes, alternating 4x2 and 2x2 RF chains,
/// single- and dual-antenna uplink nodes, and full or reduced tap counts.
pub fn design_instances() -> Vec<(NodeConfig, Channels, Design)> {
    (0..20u32)
        .map(|i| {
            let mut cfg = if i % 2 == 0 {
                small_node()
            } else {
                NodeConfig {
                    n_k: 8,
                    m_k: 8,
                    n_rf: 2,
                    m_rf: 2,
                    d_k: 2,
                    ..NodeConfig::default()
                }
            };
            if i % 4 < 2 {
                cfg.n_m = 2;
                cfg.d_m = 2;
            }
            cfg.p_k_dbm = 10.0 * (i % 5) as f64;
            cfg.p_m_dbm = cfg.p_k_dbm;
            let channels: Channels = model_for(&cfg)
                .draw(&mut StreamId::new(77, 0, i).rng(CHANNEL_LANE))
                .unwrap();
            let cb = Codebooks::dft(&cfg, 1, 1).unwrap();
            let params = DesignParams {
                n_taps: (cfg.n_rf * cfg.m_rf).min(4) - (i as usize % 2),
                ..DesignParams::default()
            };
            let design = solve_trial(&channels, &cfg, &cb, &params).unwrap().design;
            (cfg, channels, design)
        })
        .collect()
}
