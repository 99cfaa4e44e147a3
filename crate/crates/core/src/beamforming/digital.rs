//! Digital TX precoder design under the per-RX-chain residual SI budget.

use crate::error::{invalid, Result};
use crate::numerics::{svd, waterfill, ComplexMatrix};
use crate::scalar::{creal, Real};

/// Water-filled eigen-precoder for a point-to-point MIMO channel.
#[derive(Debug, Clone)]
pub struct CapacityPrecoder<T: Real> {
    /// `cols(H) × streams`, with `‖G‖_F² = power`.
    pub precoder: ComplexMatrix<T>,
    pub streams: usize,
}

/// Capacity-achieving precoder of `h` under total power `power` and white
/// noise `noise`, using at most `max_streams` eigenmodes. Modes left dry by
/// water-filling are dropped.
pub fn capacity_precoder<T: Real>(
    h: &ComplexMatrix<T>,
    power: T,
    noise: T,
    max_streams: usize,
) -> Result<CapacityPrecoder<T>> {
    if !(noise > T::zero()) {
        return invalid("noise power must be positive");
    }
    let s = svd(h)?;
    let tol = T::epsilon() * T::count(h.rows().max(h.cols()));
    let modes = s.rank(tol).min(max_streams.max(1));
    if modes == 0 {
        // Nothing to fill; put the budget on the first input direction.
        let g = s.right_vectors.columns(0..1).scale(power.sqrt());
        return Ok(CapacityPrecoder {
            precoder: g,
            streams: 1,
        });
    }
    let gains: Vec<T> = s.singular_values[..modes]
        .iter()
        .map(|&x| x * x / noise)
        .collect();
    let wf = waterfill(&gains, power)?;
    let active: Vec<usize> = (0..modes).filter(|&i| wf.powers[i] > T::zero()).collect();
    let active = if active.is_empty() { vec![0] } else { active };
    let mut g = ComplexMatrix::zeros(h.cols(), active.len());
    for (c, &i) in active.iter().enumerate() {
        let amp = wf.powers[i].sqrt();
        for r in 0..h.cols() {
            g[(r, c)] = s.right_vectors[(r, i)] * amp;
        }
    }
    Ok(CapacityPrecoder {
        precoder: g,
        streams: active.len(),
    })
}

/// Outcome of the SI-constrained digital precoder design.
#[derive(Debug, Clone)]
pub struct DigitalPrecoder<T: Real> {
    /// `N_RF × streams`.
    pub v_bb: ComplexMatrix<T>,
    /// Number of trailing right-singular vectors of the effective SI channel used.
    pub alpha: usize,
    pub streams: usize,
    /// Residual SI budget met on every RX chain.
    pub feasible: bool,
    /// `max_j ‖[H̃ V_BB]_(j,:)‖²`.
    pub max_residual_si: T,
}

fn max_row_power<T: Real>(h_tilde: &ComplexMatrix<T>, v_bb: &ComplexMatrix<T>) -> T {
    let r = h_tilde * v_bb;
    (0..r.rows())
        .map(|j| r.row_norm_sqr(j))
        .fold(T::zero(), |a, b| a.max(b))
}

/// Digital TX precoder for one canceller realization.
///
/// With `D` the right-singular vectors of `h_tilde` (`M_RF × N_RF`) in
/// descending singular-value order, tries `α = N_RF-1, …, 2`: the precoder
/// is the water-filled capacity precoder of `h_eff_dl · F` restricted to the
/// last `α` columns `F` of `D`, accepted once every row of `h_tilde · V_BB`
/// carries at most `rho_a`. Otherwise the weakest SI direction alone is
/// driven at full power; if even that breaks the budget the design is
/// returned as infeasible.
/// Right singular vectors of `h_tilde`, weakest last. Inside an exactly
/// degenerate null space any basis is valid; this one is rotated so the
/// strongest modes of `h_eff_dl` come last.
fn null_aligned_right_vectors<T: Real>(
    h_tilde: &ComplexMatrix<T>,
    h_eff_dl: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    let s = svd(h_tilde)?;
    let n = h_tilde.cols();
    let tol = T::epsilon() * T::count(h_tilde.rows().max(n));
    let null_dim = n - s.rank(tol);
    let mut d = s.right_vectors;
    if null_dim < 2 {
        return Ok(d);
    }
    let null = d.columns(n - null_dim..n);
    let w = svd(&(h_eff_dl * &null))?.right_vectors;
    let rotated = &null * &w;
    for k in 0..null_dim {
        d.set_column(n - 1 - k, &rotated.column(k));
    }
    Ok(d)
}

pub fn algorithm1_digital_precoder<T: Real>(
    h_tilde: &ComplexMatrix<T>,
    h_eff_dl: &ComplexMatrix<T>,
    p_k: T,
    rho_a: T,
    noise_q: T,
    max_streams: usize,
) -> Result<DigitalPrecoder<T>> {
    let n_rf = h_tilde.cols();
    if n_rf < 2 {
        return invalid("the digital precoder design needs at least two TX RF chains");
    }
    if h_eff_dl.cols() != n_rf {
        return invalid(format!(
            "effective DL channel has {} columns for {n_rf} TX chains",
            h_eff_dl.cols()
        ));
    }
    if !(p_k > T::zero()) {
        return invalid("transmit power must be positive");
    }
    let d = null_aligned_right_vectors(h_tilde, h_eff_dl)?;

    for alpha in (2..n_rf).rev() {
        let f = d.columns(n_rf - alpha..n_rf);
        let g = capacity_precoder(&(h_eff_dl * &f), p_k, noise_q, max_streams.min(alpha))?;
        let v_bb = &f * &g.precoder;
        let worst = max_row_power(h_tilde, &v_bb);
        if worst <= rho_a {
            return Ok(DigitalPrecoder {
                v_bb,
                alpha,
                streams: g.streams,
                feasible: true,
                max_residual_si: worst,
            });
        }
    }

    let v_bb = d.columns(n_rf - 1..n_rf).scale_complex(creal(p_k.sqrt()));
    let worst = max_row_power(h_tilde, &v_bb);
    Ok(DigitalPrecoder {
        v_bb,
        alpha: 1,
        streams: 1,
        feasible: worst <= rho_a,
        max_residual_si: worst,
    })
}
