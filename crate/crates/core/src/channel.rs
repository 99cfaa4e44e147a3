//! Random channel generation: clustered millimeter-wave DL/UL channels and
//! the near-field Rician self-interference channel of the full-duplex node.
//!
//! The clustered model (cluster/ray counts, Laplacian ray offsets) and the
//! near-field SI geometry are substitutes chosen for this simulator; the
//! defaults follow common millimeter-wave literature values and are all
//! exposed as parameters.

use std::io::{BufRead, Write};

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::numerics::ComplexMatrix;
use crate::scalar::{cplx, db_to_linear, Real};

/// Uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub num_elements: usize,
    pub spacing_wavelengths: f64,
}

impl ArrayGeometry {
    pub fn ula(num_elements: usize, spacing_wavelengths: f64) -> Result<Self> {
        let g = Self {
            num_elements,
            spacing_wavelengths,
        };
        g.validate()?;
        Ok(g)
    }

    /// Half-wavelength ULA.
    pub fn half_wavelength(num_elements: usize) -> Result<Self> {
        Self::ula(num_elements, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_elements == 0 {
            return invalid("array must have at least one element");
        }
        if !(self.spacing_wavelengths > 0.0) || !self.spacing_wavelengths.is_finite() {
            return invalid("array spacing must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusteredChannelParams {
    pub num_clusters: usize,
    pub rays_per_cluster: usize,
    /// Standard deviation of the Laplacian ray offsets around a cluster center.
    pub angle_spread_rad: f64,
    pub pathloss_db: f64,
}

impl Default for ClusteredChannelParams {
    fn default() -> Self {
        Self {
            num_clusters: 6,
            rays_per_cluster: 8,
            angle_spread_rad: 10f64.to_radians(),
            pathloss_db: 110.0,
        }
    }
}

impl ClusteredChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_clusters == 0 || self.rays_per_cluster == 0 {
            return invalid("cluster and ray counts must be at least 1");
        }
        if !(self.angle_spread_rad >= 0.0) {
            return invalid("angle spread must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiChannelParams {
    /// Rician K-factor in dB; `-inf` gives pure scattering.
    pub k_factor_db: f64,
    pub pathloss_db: f64,
    /// Distance between the reference elements of the TX and RX arrays.
    pub tx_rx_distance_wavelengths: f64,
    /// Rotation of the RX array axis relative to the TX array axis.
    pub tx_rx_angle_rad: f64,
}

impl Default for SiChannelParams {
    fn default() -> Self {
        Self {
            k_factor_db: 35.0,
            pathloss_db: 40.0,
            tx_rx_distance_wavelengths: 2.0,
            tx_rx_angle_rad: std::f64::consts::FRAC_PI_6,
        }
    }
}

impl SiChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tx_rx_distance_wavelengths > 0.0) {
            return invalid("TX/RX array distance must be positive");
        }
        if self.k_factor_db.is_nan() {
            return invalid("K-factor must not be NaN");
        }
        Ok(())
    }
}

/// One draw of the three channels seen by the full-duplex node `k`.
#[derive(Debug, Clone)]
pub struct ChannelRealization<T: Real> {
    /// Downlink, `M_q × N_k`.
    pub h_qk: ComplexMatrix<T>,
    /// Uplink, `M_k × N_m`.
    pub h_km: ComplexMatrix<T>,
    /// Self-interference, `M_k × N_k`.
    pub h_kk: ComplexMatrix<T>,
}

/// Unit-norm ULA response: element `l` is `exp(j2π·spacing·l·sin θ)/√n`.
pub fn steering_vector<T: Real>(geom: &ArrayGeometry, angle_rad: f64) -> Vec<Complex<T>> {
    let n = geom.num_elements;
    let scale = 1.0 / (n as f64).sqrt();
    let k = std::f64::consts::TAU * geom.spacing_wavelengths * angle_rad.sin();
    (0..n)
        .map(|l| {
            let z = Complex::from_polar(scale, k * l as f64);
            cplx(T::lit(z.re), T::lit(z.im))
        })
        .collect()
}

/// One propagation path of the clustered model.
#[derive(Debug, Clone, Copy)]
pub struct Path {
    pub gain: Complex<f64>,
    pub aoa_rad: f64,
    pub aod_rad: f64,
}

/// `scale · Σ gain · a_rx(aoa) · a_tx(aod)^H`.
pub fn channel_from_paths<T: Real>(
    geom_rx: &ArrayGeometry,
    geom_tx: &ArrayGeometry,
    paths: &[Path],
    scale: f64,
) -> ComplexMatrix<T> {
    let (rows, cols) = (geom_rx.num_elements, geom_tx.num_elements);
    let mut acc = vec![Complex::<f64>::new(0.0, 0.0); rows * cols];
    for p in paths {
        let a_rx: Vec<Complex<f64>> = steering_vector(geom_rx, p.aoa_rad);
        let a_tx: Vec<Complex<f64>> = steering_vector(geom_tx, p.aod_rad);
        for (i, ar) in a_rx.iter().enumerate() {
            let gr = p.gain * ar;
            for (j, at) in a_tx.iter().enumerate() {
                acc[i * cols + j] += gr * at.conj();
            }
        }
    }
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        let z = acc[i * cols + j] * scale;
        cplx(T::lit(z.re), T::lit(z.im))
    })
}

/// Circularly-symmetric complex normal with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Laplacian sample with the given standard deviation.
fn laplacian<R: Rng + ?Sized>(rng: &mut R, std_dev: f64) -> f64 {
    if std_dev == 0.0 {
        return 0.0;
    }
    let b = std_dev / std::f64::consts::SQRT_2;
    let u: f64 = rng.random_range(-0.5..0.5);
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Clustered millimeter-wave channel, `geom_rx.num_elements × geom_tx.num_elements`.
///
/// The scale is chosen so that `E‖H‖_F² = rows·cols·10^(-pathloss/10)`.
pub fn gen_clustered_channel<T: Real, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    geom_rx: &ArrayGeometry,
    geom_tx: &ArrayGeometry,
    params: &ClusteredChannelParams,
    rng: &mut R,
) -> Result<ComplexMatrix<T>> {
    geom_rx.validate()?;
    geom_tx.validate()?;
    params.validate()?;
    if geom_rx.num_elements != rows || geom_tx.num_elements != cols {
        return Err(Error::DimensionMismatch {
            op: "gen_clustered_channel",
            detail: format!(
                "{rows}x{cols} channel for {}-element RX and {}-element TX arrays",
                geom_rx.num_elements, geom_tx.num_elements
            ),
        });
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut paths = Vec::with_capacity(params.num_clusters * params.rays_per_cluster);
    for _ in 0..params.num_clusters {
        let aoa_c = rng.random_range(-half_pi..=half_pi);
        let aod_c = rng.random_range(-half_pi..=half_pi);
        for _ in 0..params.rays_per_cluster {
            let aoa_rad = aoa_c + laplacian(rng, params.angle_spread_rad);
            let aod_rad = aod_c + laplacian(rng, params.angle_spread_rad);
            paths.push(Path {
                gain: complex_normal(rng),
                aoa_rad,
                aod_rad,
            });
        }
    }
    let scale = ((rows * cols) as f64 * db_to_linear(-params.pathloss_db) / paths.len() as f64).sqrt();
    Ok(channel_from_paths(geom_rx, geom_tx, &paths, scale))
}

/// Deterministic near-field line-of-sight response between the TX and RX
/// arrays of one node, normalized to `‖H‖_F² = rows·cols`.
///
/// TX element `n` sits at `(n·δ_tx, 0)`; RX element `m` at
/// `(0, d) + m·δ_rx·(cos ω, sin ω)`. Entry `(m, n)` is
/// `(r_ref / r_mn)·exp(-j2π r_mn)` with distances in wavelengths and `r_ref`
/// the shortest element distance.
pub fn si_los_response<T: Real>(
    geom_rx: &ArrayGeometry,
    geom_tx: &ArrayGeometry,
    params: &SiChannelParams,
) -> ComplexMatrix<T> {
    let (rows, cols) = (geom_rx.num_elements, geom_tx.num_elements);
    let (sin_w, cos_w) = params.tx_rx_angle_rad.sin_cos();
    let d = params.tx_rx_distance_wavelengths;
    let dist = |m: usize, n: usize| {
        let rx = (
            m as f64 * geom_rx.spacing_wavelengths * cos_w,
            d + m as f64 * geom_rx.spacing_wavelengths * sin_w,
        );
        let tx = (n as f64 * geom_tx.spacing_wavelengths, 0.0);
        ((rx.0 - tx.0).powi(2) + (rx.1 - tx.1).powi(2)).sqrt()
    };
    let mut r = vec![0.0; rows * cols];
    for m in 0..rows {
        for n in 0..cols {
            r[m * cols + n] = dist(m, n);
        }
    }
    let r_ref = r.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<Complex<f64>> = r
        .iter()
        .map(|&rmn| Complex::from_polar(r_ref / rmn, -std::f64::consts::TAU * rmn))
        .collect();
    let energy: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
    let norm = ((rows * cols) as f64 / energy).sqrt();
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        let z = raw[i * cols + j] * norm;
        cplx(T::lit(z.re), T::lit(z.im))
    })
}

/// Rician self-interference channel `M_k × N_k` with
/// `E‖H‖_F² = m_k·n_k·10^(-pathloss/10)`.
pub fn gen_si_channel<T: Real, R: Rng + ?Sized>(
    m_k: usize,
    n_k: usize,
    geom_rx: &ArrayGeometry,
    geom_tx: &ArrayGeometry,
    params: &SiChannelParams,
    rng: &mut R,
) -> Result<ComplexMatrix<T>> {
    geom_rx.validate()?;
    geom_tx.validate()?;
    params.validate()?;
    if geom_rx.num_elements != m_k || geom_tx.num_elements != n_k {
        return Err(Error::DimensionMismatch {
            op: "gen_si_channel",
            detail: format!(
                "{m_k}x{n_k} channel for {}-element RX and {}-element TX arrays",
                geom_rx.num_elements, geom_tx.num_elements
            ),
        });
    }
    let k = db_to_linear(params.k_factor_db);
    let (los_w, nlos_w) = if k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
    };
    let amp = db_to_linear(-params.pathloss_db).sqrt();
    let los: ComplexMatrix<f64> = si_los_response(geom_rx, geom_tx, params);
    Ok(ComplexMatrix::from_fn(m_k, n_k, |i, j| {
        let z = (los[(i, j)] * los_w + complex_normal(rng) * nlos_w) * amp;
        cplx(T::lit(z.re), T::lit(z.im))
    }))
}

/// Array layout and propagation parameters for all three links.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub tx_k: ArrayGeometry,
    pub rx_k: ArrayGeometry,
    pub node_q: ArrayGeometry,
    pub node_m: ArrayGeometry,
    pub clustered: ClusteredChannelParams,
    pub si: SiChannelParams,
}

impl ChannelModel {
    pub fn draw<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChannelRealization<T>> {
        let (n_k, m_k) = (self.tx_k.num_elements, self.rx_k.num_elements);
        let h_qk = gen_clustered_channel(
            self.node_q.num_elements,
            n_k,
            &self.node_q,
            &self.tx_k,
            &self.clustered,
            rng,
        )?;
        let h_km = gen_clustered_channel(
            m_k,
            self.node_m.num_elements,
            &self.rx_k,
            &self.node_m,
            &self.clustered,
            rng,
        )?;
        let h_kk = gen_si_channel(m_k, n_k, &self.rx_k, &self.tx_k, &self.si, rng)?;
        Ok(ChannelRealization { h_qk, h_km, h_kk })
    }
}

/// Writes a textual matrix dump: a `rows cols` header line, then one line per
/// row of interleaved real/imaginary values.
pub fn write_matrix_text<T: Real, W: Write>(w: &mut W, m: &ComplexMatrix<T>) -> Result<()> {
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let line: Vec<String> = m
            .row(i)
            .iter()
            .flat_map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()])
            .map(|x| format!("{x:e}"))
            .collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_matrix_text<T: Real, R: BufRead>(r: R) -> Result<ComplexMatrix<T>> {
    let bad = |msg: &str| Error::InvalidInput(format!("matrix dump: {msg}"));
    let mut tokens = Vec::new();
    for line in r.lines() {
        let line = line?;
        tokens.extend(line.split_whitespace().map(str::to_owned));
    }
    let mut it = tokens.into_iter();
    let mut next_usize = || -> Result<usize> {
        it.next()
            .ok_or_else(|| bad("missing header"))?
            .parse()
            .map_err(|_| bad("bad header"))
    };
    let rows = next_usize()?;
    let cols = next_usize()?;
    let vals: Vec<f64> = it
        .map(|t| t.parse::<f64>().map_err(|_| bad("bad value")))
        .collect::<Result<_>>()?;
    if vals.len() != 2 * rows * cols {
        return Err(bad("entry count does not match header"));
    }
    let data = vals
        .chunks_exact(2)
        .map(|p| cplx(T::lit(p[0]), T::lit(p[1])))
        .collect();
    ComplexMatrix::from_vec(rows, cols, data)
}
