use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdhbf::beamforming::SearchStrategy;
use fdhbf::sweep::{self, LoadedConfig, RunOptions, SweepConfig};
use fdhbf::Error;

#[derive(Parser)]
#[command(name = "fdhbf", version, about = "Full-duplex hybrid beamforming sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo power sweep and write the summary CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated transmit powers in dBm.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        power_grid: Option<Vec<f64>>,
        /// `exhaustive`, `shortlist` or `shortlist:B`.
        #[arg(long)]
        strategy: Option<SearchStrategy>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Directory for text dumps of every channel realization.
        #[arg(long)]
        dump_channels: Option<PathBuf>,
        /// Per-trial CSV.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a configuration file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Config(Vec<String>),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(v) => Failure::Config(v),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(path: &PathBuf) -> Result<SweepConfig, Failure> {
    let LoadedConfig { config, warnings } = sweep::load_config(path)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(config)
}

fn write_file(path: &PathBuf, f: impl FnOnce(&mut Vec<u8>) -> fdhbf::Result<()>) -> Result<(), Failure> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    std::fs::write(path, buf).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { config } => {
            let c = load(&config)?;
            println!(
                "ok: {} power points x {} trials, N_RF = {}, M_RF = {}, {} taps",
                c.power_grid_dbm.len(),
                c.trials,
                c.node.n_rf,
                c.node.m_rf,
                c.design.n_taps
            );
            Ok(())
        }
        Command::Run {
            config,
            trials,
            seed,
            power_grid,
            strategy,
            output,
            dump_channels,
            plot_data,
            workers,
        } => {
            let mut c = load(&config)?;
            if let Some(t) = trials {
                c.trials = t;
            }
            if let Some(s) = seed {
                c.seed = s;
            }
            if let Some(g) = power_grid {
                c.power_grid_dbm = g;
                c.p_m_grid_dbm = None;
            }
            if let Some(s) = strategy {
                c.design.strategy = s;
            }
            if let Some(o) = output {
                c.output = o;
            }
            if plot_data.is_some() {
                c.plot_data = plot_data;
            }
            c.validate()?;

            let out = sweep::run_sweep(&c, &RunOptions { workers, dump_channels })?;
            write_file(&c.output, |w| sweep::write_summary(w, &out.rows))?;
            if let Some(p) = &c.plot_data {
                write_file(p, |w| sweep::write_plot_data(w, &out.trials))?;
            }
            for r in &out.rows {
                println!(
                    "P = {:>6.1} dBm  FD {:>8.3}  HD {:>8.3}  feasible {:>5.1}%  (+/- {:.3})",
                    r.power_dbm,
                    r.fd_rate,
                    r.hd_rate,
                    100.0 * r.feasibility,
                    r.fd_std_err
                );
            }
            println!("regularized evaluations: {}", out.regularizations);
            println!("wrote {}", c.output.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msgs)) => {
            for m in msgs {
                eprintln!("config error: {m}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
