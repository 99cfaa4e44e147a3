use std::io::Write;
use std::path::Path;

use crate::error::Result;

use super::{SweepRow, TrialRecord};

pub const CSV_HEADER: &str =
    "power_dbm,fd_rate,dl_rate,ul_rate,hd_rate,feasibility,mean_residual_si_dbm,trials";

const PLOT_HEADER: &str =
    "power_dbm,trial,fd_rate,dl_rate,ul_rate,hd_rate,feasible,max_residual_si_dbm,alpha,routing";

/// Six significant digits: fixed notation for exponents in `[-5, 6)`,
/// scientific otherwise.
pub fn format_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.00000".into();
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, x)
    } else {
        sci
    }
}

pub fn write_summary<W: Write>(w: &mut W, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            format_sig6(r.power_dbm),
            format_sig6(r.fd_rate),
            format_sig6(r.dl_rate),
            format_sig6(r.ul_rate),
            format_sig6(r.hd_rate),
            format_sig6(r.feasibility),
            format_sig6(r.mean_residual_si_dbm),
            r.trials
        )?;
    }
    Ok(())
}

/// Writes the summary CSV to `path`.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_summary(&mut buf, rows)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn write_plot_data<W: Write>(w: &mut W, trials: &[TrialRecord]) -> Result<()> {
    writeln!(w, "{PLOT_HEADER}")?;
    for t in trials {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            format_sig6(t.power_dbm),
            t.trial_index,
            format_sig6(t.fd_rate),
            format_sig6(t.dl_rate),
            format_sig6(t.ul_rate),
            format_sig6(t.hd_rate),
            u8::from(t.feasible),
            format_sig6(t.max_residual_si_dbm),
            t.alpha,
            t.routing
        )?;
    }
    Ok(())
}
