//! CSV emission. All files are UTF-8, comma-separated, with a header row;
//! floats carry 9 significant digits.

use std::path::Path;

use comdml_core::learning::TrainingReport;
use comdml_core::profiler::offloaded_model_bytes;
use comdml_core::{ModelSpec, SimResult, SplitProfile};

use crate::error::CliError;

pub const TIMING_HEADER: [&str; 5] = [
    "method",
    "round",
    "makespan_s",
    "aggregation_s",
    "cumulative_s",
];
pub const PAIRS_HEADER: [&str; 6] = ["round", "slow_id", "fast_id", "split_m", "est_s", "sim_s"];
pub const LEARNING_HEADER: [&str; 4] = ["round", "loss", "accuracy", "drift"];
pub const ORACLE_HEADER: [&str; 4] = ["instance", "greedy_makespan", "opt_makespan", "ratio"];
pub const PROFILE_HEADER: [&str; 5] = [
    "split_m",
    "slow_frac",
    "fast_frac",
    "interm_bytes",
    "offloaded_param_bytes",
];

/// `%.9g`-style rendering: fixed notation for moderate magnitudes, scientific otherwise,
/// trailing zeros removed.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn write_timing(path: &Path, results: &[SimResult]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(TIMING_HEADER)?;
    for r in results {
        for (i, round) in r.rounds.iter().enumerate() {
            w.write_record([
                r.baseline_name.clone(),
                (i + 1).to_string(),
                sig9(round.makespan_s),
                sig9(r.per_round_aggregation_s[i]),
                sig9(r.cumulative_by_round[i]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_pairs(path: &Path, result: Option<&SimResult>) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(PAIRS_HEADER)?;
    for p in result.map(|r| r.pairs.as_slice()).unwrap_or_default() {
        w.write_record([
            (p.round + 1).to_string(),
            p.slow.to_string(),
            p.fast.to_string(),
            p.split_id.to_string(),
            sig9(p.est_s),
            sig9(p.sim_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Round 0 is the untrained model; drift is measured at the configured split point.
pub fn write_learning(path: &Path, report: &TrainingReport) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(LEARNING_HEADER)?;
    for m in &report.rounds {
        let drift = m.drift_at(report.drift_split).unwrap_or(f64::NAN);
        w.write_record([
            m.round.to_string(),
            sig9(m.loss),
            sig9(m.accuracy),
            sig9(drift),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub greedy_makespan: f64,
    pub opt_makespan: f64,
}

impl OracleRow {
    pub fn ratio(&self) -> f64 {
        self.greedy_makespan / self.opt_makespan
    }
}

pub fn write_oracle(path: &Path, rows: &[OracleRow]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(ORACLE_HEADER)?;
    for (i, r) in rows.iter().enumerate() {
        w.write_record([
            i.to_string(),
            sig9(r.greedy_makespan),
            sig9(r.opt_makespan),
            sig9(r.ratio()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile(
    path: &Path,
    model: &ModelSpec,
    splits: &[SplitProfile],
) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(PROFILE_HEADER)?;
    for s in splits {
        w.write_record([
            s.split_id.to_string(),
            sig9(s.slow_frac),
            sig9(s.fast_frac),
            sig9(s.interm_bytes),
            sig9(offloaded_model_bytes(model, s.split_id)?),
        ])?;
    }
    w.flush()?;
    Ok(())
}
