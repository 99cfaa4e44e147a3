use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Capacity-achieving power split across parallel eigenmodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFilling<T> {
    /// Per-mode powers, in the input order.
    pub powers: Vec<T>,
    /// Common water level `μ`; active modes satisfy `p_i = μ - 1/g_i`.
    pub water_level: T,
}

/// Maximizes `Σ log2(1 + g_i p_i)` subject to `Σ p_i ≤ p_total`.
///
/// `gains` are channel-power to noise ratios per eigenmode and must be
/// strictly positive.
pub fn waterfill<T: Real>(gains: &[T], p_total: T) -> Result<WaterFilling<T>> {
    if gains.is_empty() {
        return invalid("waterfill needs at least one eigenmode");
    }
    if gains.iter().any(|g| !(*g > T::zero()) || !g.is_finite()) {
        return invalid("waterfill gains must be positive and finite");
    }
    if !(p_total >= T::zero()) || !p_total.is_finite() {
        return invalid("waterfill power budget must be nonnegative and finite");
    }

    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].partial_cmp(&gains[a]).expect("finite gains"));
    let inv: Vec<T> = order.iter().map(|&i| T::one() / gains[i]).collect();

    // Largest active set whose weakest member still sits below the water.
    let mut level = inv[0] + p_total;
    let mut acc = T::zero();
    let mut candidates = Vec::with_capacity(inv.len());
    for (k, &x) in inv.iter().enumerate() {
        acc += x;
        candidates.push((p_total + acc) / T::count(k + 1));
    }
    for k in (0..inv.len()).rev() {
        if candidates[k] > inv[k] || k == 0 {
            level = candidates[k];
            break;
        }
    }

    let mut powers = vec![T::zero(); gains.len()];
    for (&i, &x) in order.iter().zip(&inv) {
        powers[i] = (level - x).max(T::zero());
    }
    Ok(WaterFilling {
        powers,
        water_level: level,
    })
}
