use crate::error::{invalid, Result};
use crate::numerics::{solve_hpd, ComplexMatrix};
use crate::scalar::{creal, Real};

use super::capacity_precoder;

#[derive(Debug, Clone)]
pub struct UlCombiner<T: Real> {
    /// `M_RF × d_m`, unit-norm columns.
    pub u_bb: ComplexMatrix<T>,
    /// The interference-plus-noise covariance needed diagonal loading.
    pub regularized: bool,
}

/// Linear MMSE digital combiner `Q⁻¹·H·V_m` with unit-norm columns.
///
/// `h_eff_ul` is `U_RF^H·H_km` (`M_RF × N_m`) and `q_inner` the
/// interference-plus-noise covariance at the RX RF-chain outputs. For any
/// invertible column scaling this attains
/// `log2 det(I + V_m^H H^H Q⁻¹ H V_m)`, the best rate of any linear combiner.
pub fn design_ul_combiner<T: Real>(
    h_eff_ul: &ComplexMatrix<T>,
    v_m: &ComplexMatrix<T>,
    q_inner: &ComplexMatrix<T>,
) -> Result<UlCombiner<T>> {
    let hv = h_eff_ul.try_mul(v_m)?;
    let (mut u, regularized) = solve_hpd(q_inner, &hv)?;
    if regularized {
        log::warn!("uplink IpN covariance was singular; combiner used diagonal loading");
    }
    for j in 0..u.cols() {
        let n = u.column_norm_sqr(j).sqrt();
        if n > T::zero() && n.is_finite() {
            let col: Vec<_> = u.column(j).into_iter().map(|z| z / n).collect();
            u.set_column(j, &col);
        } else {
            // Stream carries no signal; any unit vector is rate-equivalent.
            let mut e = vec![creal(T::zero()); u.rows()];
            e[j % u.rows()] = creal(T::one());
            u.set_column(j, &e);
        }
    }
    Ok(UlCombiner { u_bb: u, regularized })
}

/// Digital precoder of the uplink node: `√p_m` for a single antenna,
/// otherwise water-filling over the eigenmodes of `h_eff_ul` with at most
/// `max_streams` streams.
pub fn design_vm<T: Real>(
    h_eff_ul: &ComplexMatrix<T>,
    p_m: T,
    noise: T,
    max_streams: usize,
) -> Result<ComplexMatrix<T>> {
    if !(p_m > T::zero()) {
        return invalid("uplink transmit power must be positive");
    }
    if h_eff_ul.cols() == 1 {
        return Ok(ComplexMatrix::from_fn(1, 1, |_, _| creal(p_m.sqrt())));
    }
    Ok(capacity_precoder(h_eff_ul, p_m, noise, max_streams)?.precoder)
}
