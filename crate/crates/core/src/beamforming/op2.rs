//! Codebook search for the analog TX precoder and RX combiner maximizing
//! `‖H_qk V_RF‖_F / ‖U_RF^H H_kk V_RF‖_F`.
//!
//! Both norms separate over RF chains, so the search works on per-chain gain
//! tables: `num[i][b] = ‖H_qk^(i) v_b‖²` for TX chain `i`, and
//! `si[n][i][a][b] = |u_a^H H_kk^(n,i) v_b|²` for RX chain `n` against TX
//! chain `i`. Candidates are visited in lexicographic beam-index order and
//! only a strictly better one replaces the incumbent, so the result is the
//! argmax under the total order (ratio, numerator, lowest index).

use std::cmp::Ordering;

use crate::codebook::BeamCodebook;
use crate::error::{invalid, Error, Result};
use crate::numerics::ComplexMatrix;
use crate::scalar::Real;

use super::AnalogBeamformer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    /// Every joint assignment of codebook beams to chains.
    Exhaustive,
    /// Keep each TX chain's top-`B` beams by downlink gain and each RX
    /// chain's bottom-`B` beams by SI gain, then search jointly.
    Shortlist(usize),
}

impl Default for SearchStrategy {
    fn default() -> Self {
        Self::Shortlist(4)
    }
}

impl std::fmt::Display for SearchStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Exhaustive => f.write_str("exhaustive"),
            Self::Shortlist(b) => write!(f, "shortlist:{b}"),
        }
    }
}

impl std::str::FromStr for SearchStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "exhaustive" {
            return Ok(Self::Exhaustive);
        }
        if s == "shortlist" {
            return Ok(Self::default());
        }
        if let Some(b) = s.strip_prefix("shortlist:") {
            return match b.parse::<usize>() {
                Ok(b) if b >= 1 => Ok(Self::Shortlist(b)),
                _ => invalid(format!("bad shortlist size in {s:?}")),
            };
        }
        invalid(format!(
            "unknown search strategy {s:?} (expected exhaustive or shortlist:B)"
        ))
    }
}

#[derive(Debug, Clone)]
pub struct Op2Result<T: Real> {
    pub v_rf: AnalogBeamformer<T>,
    pub u_rf: AnalogBeamformer<T>,
    /// Frobenius-norm ratio; `+inf` when the analog SI vanishes.
    pub objective: T,
    /// `‖H_qk V_RF‖_F²`.
    pub numerator_sqr: T,
    /// `‖U_RF^H H_kk V_RF‖_F²`.
    pub denominator_sqr: T,
    /// Joint assignments evaluated.
    pub evaluated: usize,
}

struct Tables<T> {
    num: Vec<Vec<T>>,
    si: Vec<Vec<Vec<Vec<T>>>>,
}

fn gain_tables<T: Real>(
    h_qk: &ComplexMatrix<T>,
    h_kk: &ComplexMatrix<T>,
    cb_tx: &BeamCodebook<T>,
    cb_rx: &BeamCodebook<T>,
    n_rf: usize,
    m_rf: usize,
) -> Tables<T> {
    let (n_a, m_a) = (cb_tx.beam_length(), cb_rx.beam_length());
    let tx_beams = cb_tx.as_matrix();
    let num = (0..n_rf)
        .map(|i| {
            let prod = &h_qk.block(0, i * n_a, h_qk.rows(), n_a) * &tx_beams;
            (0..cb_tx.cardinality()).map(|b| prod.column_norm_sqr(b)).collect()
        })
        .collect();
    let rx_beams = cb_rx.as_matrix();
    let si = (0..m_rf)
        .map(|n| {
            (0..n_rf)
                .map(|i| {
                    let blk = h_kk.block(n * m_a, i * n_a, m_a, n_a);
                    let g = rx_beams.adjoint_mul(&(&blk * &tx_beams));
                    (0..cb_rx.cardinality())
                        .map(|a| (0..cb_tx.cardinality()).map(|b| g[(a, b)].norm_sqr()).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    Tables { num, si }
}

/// `Greater` when candidate `(num, den)` beats `(best_num, best_den)`.
fn compare<T: Real>(num: T, den: T, best_num: T, best_den: T) -> Ordering {
    let ratio = |n: T, d: T| if d > T::zero() { n / d } else { T::infinity() };
    ratio(num, den)
        .partial_cmp(&ratio(best_num, best_den))
        .unwrap_or(Ordering::Equal)
        .then(num.partial_cmp(&best_num).unwrap_or(Ordering::Equal))
}

/// Advances a mixed-radix counter over `lists`; `false` once it wraps.
fn advance(counter: &mut [usize], lists: &[Vec<usize>]) -> bool {
    for pos in (0..counter.len()).rev() {
        counter[pos] += 1;
        if counter[pos] < lists[pos].len() {
            return true;
        }
        counter[pos] = 0;
    }
    false
}

/// Analog beam search. `h_qk` is `M_q × N_RF·N_A`, `h_kk` is
/// `M_RF·M_A × N_RF·N_A`; chain `i` owns the `i`-th contiguous subarray.
pub fn op2_search<T: Real>(
    h_qk: &ComplexMatrix<T>,
    h_kk: &ComplexMatrix<T>,
    codebook_tx: &BeamCodebook<T>,
    codebook_rx: &BeamCodebook<T>,
    n_rf: usize,
    m_rf: usize,
    strategy: SearchStrategy,
) -> Result<Op2Result<T>> {
    if codebook_tx.cardinality() == 0 || codebook_rx.cardinality() == 0 {
        return invalid("beam codebooks must be nonempty");
    }
    if n_rf == 0 || m_rf == 0 {
        return invalid("need at least one TX and one RX chain");
    }
    let (n_a, m_a) = (codebook_tx.beam_length(), codebook_rx.beam_length());
    if h_qk.cols() != n_rf * n_a || h_kk.cols() != n_rf * n_a || h_kk.rows() != m_rf * m_a {
        return Err(Error::DimensionMismatch {
            op: "op2_search",
            detail: format!(
                "H_qk {}x{}, H_kk {}x{} for {n_rf}x{n_a} TX and {m_rf}x{m_a} RX elements",
                h_qk.rows(),
                h_qk.cols(),
                h_kk.rows(),
                h_kk.cols()
            ),
        });
    }
    let t = gain_tables(h_qk, h_kk, codebook_tx, codebook_rx, n_rf, m_rf);

    let all_tx: Vec<usize> = (0..codebook_tx.cardinality()).collect();
    let all_rx: Vec<usize> = (0..codebook_rx.cardinality()).collect();
    let (tx_lists, rx_lists): (Vec<Vec<usize>>, Vec<Vec<usize>>) = match strategy {
        SearchStrategy::Exhaustive => (vec![all_tx; n_rf], vec![all_rx; m_rf]),
        SearchStrategy::Shortlist(b) => {
            if b == 0 {
                return invalid("shortlist size must be at least 1");
            }
            let tx = (0..n_rf)
                .map(|i| shortlist(&all_tx, b, |x, y| t.num[i][y].partial_cmp(&t.num[i][x])))
                .collect();
            let rx = (0..m_rf)
                .map(|n| {
                    let gain: Vec<T> = all_rx
                        .iter()
                        .map(|&a| (0..n_rf).map(|i| t.si[n][i][a].iter().copied().sum::<T>()).sum())
                        .collect();
                    shortlist(&all_rx, b, |x, y| gain[x].partial_cmp(&gain[y]))
                })
                .collect();
            (tx, rx)
        }
    };

    let mut best: Option<(T, T, Vec<usize>, Vec<usize>)> = None;
    let mut evaluated = 0usize;
    let mut tx_ctr = vec![0usize; n_rf];
    // Per-RX-chain SI power for each candidate beam given the current TX beams.
    let mut rx_si: Vec<Vec<T>> = rx_lists.iter().map(|l| vec![T::zero(); l.len()]).collect();
    loop {
        let tx_beams: Vec<usize> = tx_ctr.iter().zip(&tx_lists).map(|(&c, l)| l[c]).collect();
        let num: T = tx_beams.iter().enumerate().map(|(i, &b)| t.num[i][b]).sum();
        for (n, list) in rx_lists.iter().enumerate() {
            for (slot, &a) in list.iter().enumerate() {
                rx_si[n][slot] = tx_beams.iter().enumerate().map(|(i, &b)| t.si[n][i][a][b]).sum();
            }
        }
        let mut rx_ctr = vec![0usize; m_rf];
        loop {
            let den: T = rx_ctr.iter().enumerate().map(|(n, &c)| rx_si[n][c]).sum();
            evaluated += 1;
            let better = match &best {
                None => true,
                Some((bn, bd, _, _)) => compare(num, den, *bn, *bd) == Ordering::Greater,
            };
            if better {
                let rx_beams = rx_ctr.iter().zip(&rx_lists).map(|(&c, l)| l[c]).collect();
                best = Some((num, den, tx_beams.clone(), rx_beams));
            }
            if !advance(&mut rx_ctr, &rx_lists) {
                break;
            }
        }
        if !advance(&mut tx_ctr, &tx_lists) {
            break;
        }
    }

    let (num, den, tx_beams, rx_beams) = best.expect("nonempty search space");
    let objective = if den > T::zero() {
        (num / den).sqrt()
    } else {
        T::infinity()
    };
    Ok(Op2Result {
        v_rf: AnalogBeamformer::from_codebook(codebook_tx, &tx_beams)?,
        u_rf: AnalogBeamformer::from_codebook(codebook_rx, &rx_beams)?,
        objective,
        numerator_sqr: num,
        denominator_sqr: den,
        evaluated,
    })
}

/// First `b` items under `better_first` (ties by lower index), returned in
/// ascending index order.
fn shortlist(
    items: &[usize],
    b: usize,
    better_first: impl Fn(usize, usize) -> Option<Ordering>,
) -> Vec<usize> {
    let mut ranked = items.to_vec();
    ranked.sort_by(|&x, &y| better_first(x, y).unwrap_or(Ordering::Equal).then(x.cmp(&y)));
    ranked.truncate(b);
    ranked.sort_unstable();
    ranked
}
