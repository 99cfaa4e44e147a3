//! `N`-tap analog canceller between the TX and RX RF chains.
//!
//! The canceller is `C = L3·L2·L1`: `L1` (N×N_RF) selects the TX chain
//! feeding each tap, `L2` holds the complex tap values on its diagonal and
//! `L3` (M_RF×N) routes each tap to one RX chain. Because every row of `L1`
//! and every column of `L3` carries a single one, the product reduces to
//! scattering each tap value to its `(rx, tx)` position.
//!
//! Nothing here depends on the antenna counts: the canceller only ever sees
//! RF-chain dimensions.

use itertools::Itertools;
use num_complex::Complex;
use num_traits::Zero;

use crate::error::{invalid, Error, Result};
use crate::numerics::ComplexMatrix;
use crate::scalar::{creal, Real};

/// One tap: source TX chain and destination RX chain (both 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tap {
    pub tx: usize,
    pub rx: usize,
}

/// Binary routing `L1`/`L3` of an `N`-tap canceller.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TapRouting {
    n_rf: usize,
    m_rf: usize,
    taps: Vec<Tap>,
}

impl TapRouting {
    pub fn new(n_rf: usize, m_rf: usize, taps: Vec<Tap>) -> Result<Self> {
        if n_rf == 0 || m_rf == 0 {
            return invalid("routing needs at least one TX and one RX chain");
        }
        if let Some(t) = taps.iter().find(|t| t.tx >= n_rf || t.rx >= m_rf) {
            return invalid(format!(
                "tap ({}, {}) outside {n_rf} TX x {m_rf} RX chains",
                t.tx, t.rx
            ));
        }
        if taps.iter().duplicates().next().is_some() {
            return invalid("taps must connect distinct (tx, rx) pairs");
        }
        Ok(Self { n_rf, m_rf, taps })
    }

    /// Canceller with no taps.
    pub fn empty(n_rf: usize, m_rf: usize) -> Self {
        Self {
            n_rf,
            m_rf,
            taps: Vec::new(),
        }
    }

    /// Every TX chain connected to every RX chain.
    pub fn full(n_rf: usize, m_rf: usize) -> Self {
        let taps = (0..n_rf)
            .cartesian_product(0..m_rf)
            .map(|(tx, rx)| Tap { tx, rx })
            .collect();
        Self { n_rf, m_rf, taps }
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn num_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf
    }

    pub fn m_rf(&self) -> usize {
        self.m_rf
    }

    /// `L1` (N×N_RF) and `L3` (M_RF×N) as dense 0/1 matrices; `None` without taps.
    pub fn selection_matrices<T: Real>(&self) -> Option<(ComplexMatrix<T>, ComplexMatrix<T>)> {
        if self.taps.is_empty() {
            return None;
        }
        let n = self.taps.len();
        let one = creal(T::one());
        let l1 = ComplexMatrix::from_fn(n, self.n_rf, |j, l| {
            if self.taps[j].tx == l {
                one
            } else {
                Complex::zero()
            }
        });
        let l3 = ComplexMatrix::from_fn(self.m_rf, n, |i, j| {
            if self.taps[j].rx == i {
                one
            } else {
                Complex::zero()
            }
        });
        Some((l1, l3))
    }
}

impl std::fmt::Display for TapRouting {
    /// 1-based `(tx,rx)` pairs separated by `;`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = self
            .taps
            .iter()
            .map(|t| format!("({},{})", t.tx + 1, t.rx + 1))
            .join(";");
        f.write_str(&s)
    }
}

/// Diagonal of `L2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TapValues<T: Real> {
    pub values: Vec<Complex<T>>,
}

/// Hardware resolution of the variable attenuators and phase shifters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapImpairments {
    /// Attenuation grid in dB; 0 means continuous.
    pub attenuation_step_db: f64,
    /// Phase resolution in bits; 0 means continuous.
    pub phase_bits: u32,
    pub enabled: bool,
}

impl TapImpairments {
    pub fn ideal() -> Self {
        Self {
            attenuation_step_db: 0.0,
            phase_bits: 0,
            enabled: false,
        }
    }

    /// Quantizer with the given resolutions, enabled.
    pub fn quantized(attenuation_step_db: f64, phase_bits: u32) -> Self {
        Self {
            attenuation_step_db,
            phase_bits,
            enabled: true,
        }
    }

    /// Upper bound on `|quantize(c) - c| / |c|` for any tap value `c`.
    pub fn relative_error_bound(&self) -> f64 {
        if !self.enabled {
            return 0.0;
        }
        let mag = if self.attenuation_step_db > 0.0 {
            10f64.powf(self.attenuation_step_db / 40.0) - 1.0
        } else {
            0.0
        };
        let phase = if self.phase_bits > 0 {
            std::f64::consts::PI / 2f64.powi(self.phase_bits as i32)
        } else {
            0.0
        };
        mag + phase
    }

    /// Rounds magnitude (in dB) and phase to the hardware grids.
    pub fn quantize<T: Real>(&self, c: Complex<T>) -> Complex<T> {
        if !self.enabled || c.is_zero() {
            return c;
        }
        let (mut mag, mut phase) = (c.norm().to_f64_lossy(), c.arg().to_f64_lossy());
        if self.attenuation_step_db > 0.0 {
            let step = self.attenuation_step_db;
            let db = 20.0 * mag.log10();
            mag = 10f64.powf((db / step).round() * step / 20.0);
        }
        if self.phase_bits > 0 {
            let level = std::f64::consts::TAU / 2f64.powi(self.phase_bits as i32);
            phase = (phase / level).round() * level;
        }
        let z = Complex::from_polar(mag, phase);
        Complex::new(T::lit(z.re), T::lit(z.im))
    }
}

impl Default for TapImpairments {
    fn default() -> Self {
        Self::quantized(0.25, 10)
    }
}

/// All size-`n_taps` subsets of the `n_rf·m_rf` chain pairs, lexicographic in
/// the pair index `tx·m_rf + rx`.
pub fn enumerate_routings(n_rf: usize, m_rf: usize, n_taps: usize) -> Result<Vec<TapRouting>> {
    if n_rf == 0 || m_rf == 0 {
        return invalid("routing needs at least one TX and one RX chain");
    }
    let pairs = n_rf * m_rf;
    if n_taps > pairs {
        return invalid(format!(
            "{n_taps} taps exceed the {pairs} distinct TX/RX chain pairs"
        ));
    }
    Ok((0..pairs)
        .combinations(n_taps)
        .map(|idx| TapRouting {
            n_rf,
            m_rf,
            taps: idx
                .into_iter()
                .map(|p| Tap {
                    tx: p / m_rf,
                    rx: p % m_rf,
                })
                .collect(),
        })
        .collect())
}

/// Tap values that null the routed entries of the analog-beamformed SI
/// channel (`M_RF×N_RF`), then quantized by `impairments`.
pub fn set_tap_values<T: Real>(
    routing: &TapRouting,
    analog_si: &ComplexMatrix<T>,
    impairments: &TapImpairments,
) -> Result<TapValues<T>> {
    check_shape(routing, analog_si.shape(), "set_tap_values")?;
    Ok(TapValues {
        values: routing
            .taps
            .iter()
            .map(|t| impairments.quantize(-analog_si[(t.rx, t.tx)]))
            .collect(),
    })
}

/// Dense `C = L3·L2·L1` (`M_RF×N_RF`), assembled by scattering tap values.
pub fn assemble_c<T: Real>(routing: &TapRouting, values: &TapValues<T>) -> Result<ComplexMatrix<T>> {
    if values.values.len() != routing.taps.len() {
        return Err(Error::DimensionMismatch {
            op: "assemble_c",
            detail: format!(
                "{} tap values for {} taps",
                values.values.len(),
                routing.taps.len()
            ),
        });
    }
    let mut c = ComplexMatrix::zeros(routing.m_rf, routing.n_rf);
    for (t, &v) in routing.taps.iter().zip(&values.values) {
        c[(t.rx, t.tx)] += v;
    }
    Ok(c)
}

/// Effective SI channel after analog beamforming and cancellation:
/// `U_RF^H · H_kk · V_RF + C`.
pub fn effective_si<T: Real>(
    u_rf: &ComplexMatrix<T>,
    h_kk: &ComplexMatrix<T>,
    v_rf: &ComplexMatrix<T>,
    c: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    analog_si(u_rf, h_kk, v_rf)?.try_add(c)
}

/// `U_RF^H · H_kk · V_RF`.
pub fn analog_si<T: Real>(
    u_rf: &ComplexMatrix<T>,
    h_kk: &ComplexMatrix<T>,
    v_rf: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    if u_rf.rows() != h_kk.rows() || h_kk.cols() != v_rf.rows() {
        return Err(Error::DimensionMismatch {
            op: "effective_si",
            detail: format!(
                "U_RF {}x{}, H_kk {}x{}, V_RF {}x{}",
                u_rf.rows(),
                u_rf.cols(),
                h_kk.rows(),
                h_kk.cols(),
                v_rf.rows(),
                v_rf.cols()
            ),
        });
    }
    Ok(u_rf.adjoint_mul(&(h_kk * v_rf)))
}

/// Full canceller realization: routing, tap values and dense matrix.
#[derive(Debug, Clone)]
pub struct CancellerConfig<T: Real> {
    pub routing: TapRouting,
    pub values: TapValues<T>,
    pub impairments: TapImpairments,
    pub c: ComplexMatrix<T>,
}

impl<T: Real> CancellerConfig<T> {
    /// Sets taps against `analog_si` and assembles `C`.
    pub fn realize(
        routing: TapRouting,
        analog_si: &ComplexMatrix<T>,
        impairments: TapImpairments,
    ) -> Result<Self> {
        let values = set_tap_values(&routing, analog_si, &impairments)?;
        let c = assemble_c(&routing, &values)?;
        Ok(Self {
            routing,
            values,
            impairments,
            c,
        })
    }
}

fn check_shape(routing: &TapRouting, shape: (usize, usize), op: &'static str) -> Result<()> {
    if shape != (routing.m_rf, routing.n_rf) {
        return Err(Error::DimensionMismatch {
            op,
            detail: format!(
                "{}x{} SI matrix for a {} RX x {} TX routing",
                shape.0, shape.1, routing.m_rf, routing.n_rf
            ),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> ComplexMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn enumerate_small() {
        let r = enumerate_routings(2, 1, 1).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].taps(), &[Tap { tx: 0, rx: 0 }]);
        assert_eq!(r[1].taps(), &[Tap { tx: 1, rx: 0 }]);
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate_routings(4, 2, 4).unwrap().len(), 70);
        assert_eq!(enumerate_routings(4, 2, 0).unwrap().len(), 1);
        assert_eq!(enumerate_routings(4, 2, 8).unwrap().len(), 1);
        assert!(enumerate_routings(2, 2, 5).is_err());
    }

    #[test]
    fn enumerated_routings_satisfy_selection_constraints() {
        for r in enumerate_routings(4, 2, 4).unwrap() {
            let (l1, l3) = r.selection_matrices::<f64>().unwrap();
            for j in 0..4 {
                let row: f64 = l1.row(j).iter().map(|z| z.re).sum();
                let col: f64 = l3.column(j).iter().map(|z| z.re).sum();
                assert_eq!((row, col), (1.0, 1.0));
            }
            assert!(l1.as_slice().iter().chain(l3.as_slice()).all(|z| z.re == 0.0 || z.re == 1.0));
        }
    }

    #[test]
    fn routing_rejects_duplicates_and_out_of_range() {
        let t = Tap { tx: 0, rx: 0 };
        assert!(TapRouting::new(2, 2, vec![t, t]).is_err());
        assert!(TapRouting::new(2, 2, vec![Tap { tx: 2, rx: 0 }]).is_err());
    }

    #[test]
    fn zero_si_gives_zero_taps() {
        let r = TapRouting::full(2, 2);
        let v = set_tap_values(&r, &ComplexMatrix::<f64>::zeros(2, 2), &TapImpairments::default()).unwrap();
        assert!(v.values.iter().all(|z| z.is_zero()));
    }

    #[test]
    fn ideal_taps_null_routed_entries() {
        let si = random(2, 4, 1);
        for r in enumerate_routings(4, 2, 4).unwrap() {
            let cfg = CancellerConfig::realize(r.clone(), &si, TapImpairments::ideal()).unwrap();
            let h = &si + &cfg.c;
            for t in r.taps() {
                assert_eq!(h[(t.rx, t.tx)], Complex::zero());
            }
            let untouched = (0..2)
                .flat_map(|i| (0..4).map(move |j| (i, j)))
                .filter(|&(i, j)| !r.taps().contains(&Tap { tx: j, rx: i }))
                .filter(|&(i, j)| h[(i, j)] == si[(i, j)])
                .count();
            assert_eq!(untouched, 4);
        }
    }

    #[test]
    fn single_tap_quantization_bound() {
        let si = ComplexMatrix::from_fn(1, 1, |_, _| Complex::from_polar(0.1, std::f64::consts::FRAC_PI_3));
        let imp = TapImpairments::quantized(0.25, 10);
        let r = TapRouting::full(1, 1);
        let cfg = CancellerConfig::realize(r, &si, imp).unwrap();
        let residual = (si[(0, 0)] + cfg.c[(0, 0)]).norm();
        let bound = 0.1 * (10f64.powf(0.125 / 20.0) - 1.0 + std::f64::consts::PI / 1024.0);
        assert!(residual <= bound, "{residual} > {bound}");
        assert!((bound - 0.1 * imp.relative_error_bound()).abs() < 1e-15);
    }

    #[test]
    fn scatter_matches_triple_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let all = enumerate_routings(4, 2, 4).unwrap();
        for _ in 0..10 {
            let r = &all[rng.random_range(0..all.len())];
            let vals = TapValues {
                values: (0..4)
                    .map(|_| cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            };
            let (l1, l3) = r.selection_matrices::<f64>().unwrap();
            let dense = &(&l3 * &ComplexMatrix::diag(&vals.values)) * &l1;
            let c = assemble_c(r, &vals).unwrap();
            assert!((&c - &dense).max_abs() < 1e-14);
        }
    }

    #[test]
    fn assemble_edge_cases() {
        let c = assemble_c::<f64>(&TapRouting::empty(3, 2), &TapValues { values: vec![] }).unwrap();
        assert_eq!(c, ComplexMatrix::zeros(2, 3));
        let r = TapRouting::new(2, 1, vec![Tap { tx: 1, rx: 0 }]).unwrap();
        let v = cplx(0.5, -2.0);
        let c = assemble_c(&r, &TapValues { values: vec![v] }).unwrap();
        assert_eq!(c[(0, 1)], v);
        assert_eq!(c[(0, 0)], Complex::zero());
        assert!(assemble_c::<f64>(&r, &TapValues { values: vec![] }).is_err());
    }

    #[test]
    fn full_cancellation_and_no_cancellation() {
        let u = random(6, 2, 7);
        let h = random(6, 8, 8);
        let v = random(8, 4, 9);
        let si = analog_si(&u, &h, &v).unwrap();
        let full = effective_si(&u, &h, &v, &(-&si)).unwrap();
        assert!(full.max_abs() < 1e-15);
        let none = effective_si(&u, &h, &v, &ComplexMatrix::zeros(2, 4)).unwrap();
        assert_eq!(none, si);
        assert!(effective_si(&u, &h, &random(7, 4, 1), &ComplexMatrix::zeros(2, 4)).is_err());
    }

    #[test]
    fn refining_the_grid_shrinks_the_error_bound() {
        let coarse = TapImpairments::quantized(1.0, 4);
        let fine = TapImpairments::quantized(0.25, 10);
        assert!(fine.relative_error_bound() < coarse.relative_error_bound());
        assert_eq!(TapImpairments::ideal().relative_error_bound(), 0.0);
    }
}
