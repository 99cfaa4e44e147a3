//! Monte-Carlo power sweeps and their CSV output.
//!
//! Trial `(p, t)` draws its channels from [`StreamId::new`]`(seed, p, t)`, so
//! results do not depend on worker count or scheduling.

mod config;
mod csv;

pub use config::{load_config, parse_config, LoadedConfig, SweepConfig};
pub use csv::{emit_csv, format_sig6, write_plot_data, write_summary, CSV_HEADER};

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::channel::{write_matrix_text, ChannelRealization};
use crate::error::{Error, Result};
use crate::orchestrator::{solve_trial, Codebooks};
use crate::rng::{StreamId, CHANNEL_LANE};
use crate::scalar::{dbm_to_watts, watts_to_dbm};

/// Outcome of one trial, as written to the plot-data file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub power_index: usize,
    pub trial_index: usize,
    pub power_dbm: f64,
    pub fd_rate: f64,
    pub dl_rate: f64,
    pub ul_rate: f64,
    pub hd_rate: f64,
    pub feasible: bool,
    pub max_residual_si_dbm: f64,
    pub alpha: usize,
    pub routing: String,
    pub regularizations: usize,
}

/// Averages over the trials at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub power_dbm: f64,
    pub fd_rate: f64,
    pub dl_rate: f64,
    pub ul_rate: f64,
    pub hd_rate: f64,
    /// Fraction of trials meeting the residual-SI constraint.
    pub feasibility: f64,
    /// dBm of the trial-averaged worst-chain residual SI power.
    pub mean_residual_si_dbm: f64,
    pub trials: usize,
    /// Standard error of `fd_rate`.
    pub fd_std_err: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub trials: Vec<TrialRecord>,
    pub regularizations: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
    /// Directory receiving every channel realization as text.
    pub dump_channels: Option<PathBuf>,
}

fn dump(dir: &Path, p: usize, t: usize, ch: &ChannelRealization<f64>) -> Result<()> {
    for (name, m) in [("h_qk", &ch.h_qk), ("h_km", &ch.h_km), ("h_kk", &ch.h_kk)] {
        let path = dir.join(format!("p{p}_t{t}_{name}.txt"));
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_matrix_text(&mut f, m)?;
    }
    Ok(())
}

fn run_one(cfg: &SweepConfig, opts: &RunOptions, p: usize, t: usize) -> Result<TrialRecord> {
    let node = cfg.node_at(p);
    let model = cfg.channel_model()?;
    let codebooks = Codebooks::<f64>::dft(&node, cfg.codebook_tx_step, cfg.codebook_rx_step)?;
    let mut rng = StreamId::new(cfg.seed, p as u32, t as u32).rng(CHANNEL_LANE);
    let channels: ChannelRealization<f64> = model.draw(&mut rng)?;
    if let Some(dir) = &opts.dump_channels {
        dump(dir, p, t, &channels)?;
    }
    let r = solve_trial(&channels, &node, &codebooks, &cfg.design)?;
    let rr = &r.rate_record;
    Ok(TrialRecord {
        power_index: p,
        trial_index: t,
        power_dbm: cfg.power_grid_dbm[p],
        fd_rate: rr.fd_sum_bpshz,
        dl_rate: rr.dl_rate_bpshz,
        ul_rate: rr.ul_rate_bpshz,
        hd_rate: rr.hd_rate_bpshz,
        feasible: rr.feasible,
        max_residual_si_dbm: rr.max_residual_si_dbm,
        alpha: r.chosen_alpha,
        routing: r.chosen_routing.to_string(),
        regularizations: r.regularizations,
    })
}

fn summarize(power_dbm: f64, records: &[TrialRecord]) -> SweepRow {
    let n = records.len() as f64;
    let mean = |f: fn(&TrialRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let fd = mean(|r| r.fd_rate);
    let var = if records.len() > 1 {
        records.iter().map(|r| (r.fd_rate - fd).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    SweepRow {
        power_dbm,
        fd_rate: fd,
        dl_rate: mean(|r| r.dl_rate),
        ul_rate: mean(|r| r.ul_rate),
        hd_rate: mean(|r| r.hd_rate),
        feasibility: records.iter().filter(|r| r.feasible).count() as f64 / n,
        mean_residual_si_dbm: watts_to_dbm(mean(|r| dbm_to_watts(r.max_residual_si_dbm))),
        trials: records.len(),
        fd_std_err: (var / n).sqrt(),
    }
}

/// Runs every `(power, trial)` pair and reduces the results in index order.
pub fn run_sweep(cfg: &SweepConfig, opts: &RunOptions) -> Result<SweepOutput> {
    cfg.validate()?;
    if let Some(dir) = &opts.dump_channels {
        std::fs::create_dir_all(dir)?;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        pool = pool.num_threads(w.max(1));
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;

    let (np, nt) = (cfg.power_grid_dbm.len(), cfg.trials);
    let records: Vec<TrialRecord> = pool.install(|| {
        (0..np * nt)
            .into_par_iter()
            .map(|i| run_one(cfg, opts, i / nt, i % nt))
            .collect::<Result<_>>()
    })?;

    let rows = records
        .chunks(nt)
        .zip(&cfg.power_grid_dbm)
        .map(|(chunk, &p)| summarize(p, chunk))
        .collect();
    let regularizations = records.iter().map(|r| r.regularizations).sum();
    if regularizations > 0 {
        log::warn!("{regularizations} evaluations needed diagonal loading");
    }
    Ok(SweepOutput {
        rows,
        trials: records,
        regularizations,
    })
}
