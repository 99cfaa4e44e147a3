//! Sweep configuration: a flat key/value file with dotted section keys.
//!
//! ```text
//! node.n_k = 64
//! node.n_rf = 4
//! sweep.power_grid_dbm = [0, 10, 20, 30, 40, 50]
//! search.strategy = "shortlist"
//! ```
//!
//! Any TOML layout producing the same dotted paths (e.g. `[node]` tables) is
//! accepted. Omitted keys take the defaults of [`SweepConfig::default`];
//! unknown keys produce warnings and are otherwise ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::beamforming::{NodeConfig, SearchStrategy};
use crate::channel::{ArrayGeometry, ChannelModel, ClusteredChannelParams, SiChannelParams};
use crate::error::{Error, Result};
use crate::orchestrator::DesignParams;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub node: NodeConfig,
    pub array_spacing_wavelengths: f64,
    pub clustered: ClusteredChannelParams,
    pub si: SiChannelParams,
    /// Keep every `step`-th DFT beam.
    pub codebook_tx_step: usize,
    pub codebook_rx_step: usize,
    pub design: DesignParams,
    /// Transmit powers swept jointly for nodes `k` and `m`.
    pub power_grid_dbm: Vec<f64>,
    /// Optional separate grid for node `m`, same length as `power_grid_dbm`.
    pub p_m_grid_dbm: Option<Vec<f64>>,
    pub trials: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub plot_data: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            node: NodeConfig::default(),
            array_spacing_wavelengths: 0.5,
            clustered: ClusteredChannelParams::default(),
            si: SiChannelParams::default(),
            codebook_tx_step: 1,
            codebook_rx_step: 1,
            design: DesignParams::default(),
            power_grid_dbm: vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0],
            p_m_grid_dbm: None,
            trials: 1000,
            seed: 1,
            output: PathBuf::from("fd_rates.csv"),
            plot_data: None,
        }
    }
}

impl SweepConfig {
    /// Node configuration at power index `p`.
    pub fn node_at(&self, p: usize) -> NodeConfig {
        let p_k = self.power_grid_dbm[p];
        let p_m = self.p_m_grid_dbm.as_ref().map_or(p_k, |g| g[p]);
        NodeConfig {
            p_k_dbm: p_k,
            p_m_dbm: p_m,
            ..self.node.clone()
        }
    }

    pub fn channel_model(&self) -> Result<ChannelModel> {
        let s = self.array_spacing_wavelengths;
        Ok(ChannelModel {
            tx_k: ArrayGeometry::ula(self.node.n_k, s)?,
            rx_k: ArrayGeometry::ula(self.node.m_k, s)?,
            node_q: ArrayGeometry::ula(self.node.m_q, s)?,
            node_m: ArrayGeometry::ula(self.node.n_m, s)?,
            clustered: self.clustered,
            si: self.si,
        })
    }

    /// Every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut v = self.node.violations();
        if self.trials == 0 {
            v.push("sweep.trials must be at least 1".into());
        }
        if self.power_grid_dbm.is_empty() {
            v.push("sweep.power_grid_dbm must not be empty".into());
        }
        if self.power_grid_dbm.iter().any(|p| !p.is_finite()) {
            v.push("sweep.power_grid_dbm entries must be finite".into());
        }
        if let Some(g) = &self.p_m_grid_dbm {
            if g.len() != self.power_grid_dbm.len() {
                v.push(format!(
                    "sweep.p_m_grid_dbm has {} entries but sweep.power_grid_dbm has {}",
                    g.len(),
                    self.power_grid_dbm.len()
                ));
            }
            if g.iter().any(|p| !p.is_finite()) {
                v.push("sweep.p_m_grid_dbm entries must be finite".into());
            }
        }
        let pairs = self.node.n_rf * self.node.m_rf;
        if self.design.n_taps > pairs {
            v.push(format!(
                "canceller.taps = {} exceeds n_rf * m_rf = {pairs}",
                self.design.n_taps
            ));
        }
        if self.codebook_tx_step == 0 || self.codebook_rx_step == 0 {
            v.push("codebook steps must be at least 1".into());
        }
        if let SearchStrategy::Shortlist(0) = self.design.strategy {
            v.push("search.shortlist_size must be at least 1".into());
        }
        if !(self.array_spacing_wavelengths > 0.0) {
            v.push("array.spacing_wavelengths must be positive".into());
        }
        if self.design.impairments.attenuation_step_db < 0.0 {
            v.push("canceller.attenuation_step_db must be nonnegative".into());
        }
        if let Err(e) = self.clustered.validate() {
            v.push(format!("channel: {e}"));
        }
        if let Err(e) = self.si.validate() {
            v.push(format!("si: {e}"));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

/// Parsed configuration plus non-fatal warnings.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: SweepConfig,
    pub warnings: Vec<String>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

struct Reader {
    values: BTreeMap<String, toml::Value>,
    errors: Vec<String>,
}

impl Reader {
    fn float(&mut self, key: &str, slot: &mut f64) {
        match self.values.remove(key) {
            None => {}
            Some(toml::Value::Float(x)) => *slot = x,
            Some(toml::Value::Integer(i)) => *slot = i as f64,
            Some(other) => self.errors.push(format!("{key} must be a number, got {other}")),
        }
    }

    fn count(&mut self, key: &str, slot: &mut usize) {
        match self.values.remove(key) {
            None => {}
            Some(toml::Value::Integer(i)) if i >= 0 => *slot = i as usize,
            Some(other) => self
                .errors
                .push(format!("{key} must be a nonnegative integer, got {other}")),
        }
    }

    fn boolean(&mut self, key: &str, slot: &mut bool) {
        match self.values.remove(key) {
            None => {}
            Some(toml::Value::Boolean(b)) => *slot = b,
            Some(other) => self.errors.push(format!("{key} must be true or false, got {other}")),
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.values.remove(key) {
            None => None,
            Some(toml::Value::String(s)) => Some(s),
            Some(other) => {
                self.errors.push(format!("{key} must be a string, got {other}"));
                None
            }
        }
    }

    fn float_list(&mut self, key: &str) -> Option<Vec<f64>> {
        match self.values.remove(key) {
            None => None,
            Some(toml::Value::Array(a)) => {
                let parsed: Option<Vec<f64>> = a
                    .iter()
                    .map(|v| match v {
                        toml::Value::Float(x) => Some(*x),
                        toml::Value::Integer(i) => Some(*i as f64),
                        _ => None,
                    })
                    .collect();
                if parsed.is_none() {
                    self.errors.push(format!("{key} must be a list of numbers"));
                }
                parsed
            }
            Some(other) => {
                self.errors.push(format!("{key} must be a list of numbers, got {other}"));
                None
            }
        }
    }
}

/// Parses configuration text.
pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![format!("parse error: {e}")]))?;
    let mut values = BTreeMap::new();
    flatten("", &table, &mut values);
    let mut r = Reader {
        values,
        errors: Vec::new(),
    };
    let mut c = SweepConfig::default();

    let n = &mut c.node;
    r.count("node.n_k", &mut n.n_k);
    r.count("node.m_k", &mut n.m_k);
    r.count("node.n_rf", &mut n.n_rf);
    r.count("node.m_rf", &mut n.m_rf);
    r.count("node.m_q", &mut n.m_q);
    r.count("node.n_m", &mut n.n_m);
    n.d_k = n.m_q.min(n.n_rf);
    n.d_m = n.m_rf.min(n.n_m);
    r.count("node.d_k", &mut n.d_k);
    r.count("node.d_m", &mut n.d_m);
    r.float("noise.k_dbm", &mut n.noise_k_dbm);
    r.float("noise.q_dbm", &mut n.noise_q_dbm);
    r.float("canceller.rho_a_dbm", &mut n.rho_a_dbm);

    let d = &mut c.design;
    r.count("canceller.taps", &mut d.n_taps);
    r.boolean("canceller.impairments", &mut d.impairments.enabled);
    r.float("canceller.attenuation_step_db", &mut d.impairments.attenuation_step_db);
    let mut bits = d.impairments.phase_bits as usize;
    r.count("canceller.phase_bits", &mut bits);
    d.impairments.phase_bits = bits.min(52) as u32;
    if let Some(s) = r.string("search.strategy") {
        match s.parse::<SearchStrategy>() {
            Ok(st) => d.strategy = st,
            Err(e) => r.errors.push(format!("search.strategy: {e}")),
        }
    }
    if let SearchStrategy::Shortlist(mut b) = d.strategy {
        r.count("search.shortlist_size", &mut b);
        d.strategy = SearchStrategy::Shortlist(b);
    } else if r.values.remove("search.shortlist_size").is_some() {
        log::debug!("search.shortlist_size ignored for exhaustive search");
    }

    r.float("array.spacing_wavelengths", &mut c.array_spacing_wavelengths);
    r.count("channel.num_clusters", &mut c.clustered.num_clusters);
    r.count("channel.rays_per_cluster", &mut c.clustered.rays_per_cluster);
    let mut spread_deg = c.clustered.angle_spread_rad.to_degrees();
    r.float("channel.angle_spread_deg", &mut spread_deg);
    c.clustered.angle_spread_rad = spread_deg.to_radians();
    r.float("channel.pathloss_db", &mut c.clustered.pathloss_db);
    r.float("si.k_factor_db", &mut c.si.k_factor_db);
    r.float("si.pathloss_db", &mut c.si.pathloss_db);
    r.float("si.distance_wavelengths", &mut c.si.tx_rx_distance_wavelengths);
    r.float("si.angle_rad", &mut c.si.tx_rx_angle_rad);
    r.count("codebook.tx_step", &mut c.codebook_tx_step);
    r.count("codebook.rx_step", &mut c.codebook_rx_step);

    if let Some(g) = r.float_list("sweep.power_grid_dbm") {
        c.power_grid_dbm = g;
    }
    c.p_m_grid_dbm = r.float_list("sweep.p_m_grid_dbm");
    r.count("sweep.trials", &mut c.trials);
    match r.values.remove("sweep.seed") {
        None => {}
        Some(toml::Value::Integer(i)) if i >= 0 => c.seed = i as u64,
        Some(other) => r.errors.push(format!("sweep.seed must be a nonnegative integer, got {other}")),
    }
    if let Some(p) = r.string("output.csv") {
        c.output = PathBuf::from(p);
    }
    c.plot_data = r.string("output.plot_data").map(PathBuf::from);

    let mut errors = r.errors;
    errors.extend(c.violations());
    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    let warnings = r
        .values
        .keys()
        .map(|k| format!("unknown configuration key {k:?} ignored"))
        .collect();
    Ok(LoadedConfig { config: c, warnings })
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(vec![format!("cannot read {}: {e}", path.display())])
    })?;
    parse_config(&text)
}
