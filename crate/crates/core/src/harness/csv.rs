//! CSV writers for per-round logs and sweep summaries.

use std::io::Write;

use crate::harness::run::ExperimentResult;
use crate::harness::sweep::SweepRow;

pub const ROUND_HEADER: &str = "t,loss,cum_loss,arrivals,tau,cum_regret";
pub const SWEEP_HEADER: &str = "T,d_max,algo,set,seed,regret,wall_ms";

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_rounds(result: &ExperimentResult, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{ROUND_HEADER}")?;
    for r in &result.rounds {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.t,
            fmt_real(r.loss),
            fmt_real(r.cum_loss),
            r.arrivals,
            r.tau,
            fmt_real(r.cum_regret)
        )?;
    }
    Ok(())
}

pub fn write_sweep(rows: &[SweepRow], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.horizon,
            r.d_max,
            r.algorithm,
            r.set,
            r.seed,
            fmt_real(r.regret),
            r.wall_ms
        )?;
    }
    Ok(())
}
