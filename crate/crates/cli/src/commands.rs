//! Subcommand implementations, independent of argument parsing.

use std::fs;
use std::path::Path;

use comdml_core::learning::{run_training, TrainingReport};
use comdml_core::simulator::{derive_seed, simulate, Method};
use comdml_core::{
    plan_makespan, profile_splits, schedule, solve_exact, AgentProfile, PairingOptions,
    PairingPlan, SimResult, SplitProfile, SplitTable,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Mode};
use crate::error::CliError;
use crate::output::{self, OracleRow};

pub const THREADS_ENV: &str = "COMDML_SIM_THREADS";

const STREAM_ORACLE: u64 = 7;

/// Worker pool sized by `COMDML_SIM_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize =
            raw.trim()
                .parse()
                .ok()
                .filter(|n| *n >= 1)
                .ok_or_else(|| CliError::Validation {
                    field: THREADS_ENV.into(),
                    constraint: format!("must be a positive integer, got `{raw}`"),
                })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))
}

#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub timing: Vec<SimResult>,
    pub learning: Option<TrainingReport>,
}

/// Runs the configured methods and/or training and writes the CSVs into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let mut outcome = RunOutcome::default();

    if matches!(cfg.mode, Mode::Timing | Mode::Both) {
        let sim = cfg.sim_config()?;
        let methods: Vec<Method> = cfg
            .methods
            .iter()
            .map(|m| m.parse::<Method>())
            .collect::<Result<_, _>>()?;
        outcome.timing = methods
            .par_iter()
            .map(|&m| simulate(&sim, m))
            .collect::<Result<_, _>>()?;
        output::write_timing(&out.join("timing.csv"), &outcome.timing)?;
        let comdml = outcome.timing.iter().find(|r| r.baseline_name == "comdml");
        output::write_pairs(&out.join("pairs.csv"), comdml)?;
    }

    if matches!(cfg.mode, Mode::Learning | Mode::Both) {
        let report = run_training(&cfg.training_config()?)?;
        output::write_learning(&out.join("learning.csv"), &report)?;
        outcome.learning = Some(report);
    }
    Ok(outcome)
}

/// Keeps `count` split points spread evenly over the profile, always including interior ones.
pub fn thin_splits(splits: &[SplitProfile], count: usize) -> Vec<SplitProfile> {
    let n = splits.len();
    if count == 0 || count >= n {
        return splits.to_vec();
    }
    (1..=count)
        .map(|i| splits[i * (n + 1) / (count + 1) - 1])
        .collect()
}

/// A random instance drawn from the config: speed tiers per agent, links from a fresh topology.
pub fn random_instance(
    cfg: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<AgentProfile>, CliError> {
    let a = &cfg.agents;
    let mut topo = cfg.topology();
    topo.seed = rng.random();
    let net = topo.realize(a.count)?;
    Ok((0..a.count)
        .map(|i| {
            let speed = a.speed_tiers.choose(rng).expect("validated non-empty") * a.base_rate;
            let mut p = AgentProfile::new(i, speed, a.num_batches);
            for j in net.neighbors(i) {
                p.links
                    .insert(j, net.bandwidth(i, j).expect("neighbor has a link"));
            }
            p
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub instances: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    /// Instances where the greedy plan took longer than training without offloading.
    pub worse_than_no_offload: usize,
}

/// Compares greedy pairing with the exact optimum on random instances and writes `oracle.csv`.
pub fn oracle_check(
    cfg: &ExperimentConfig,
    instances: usize,
    split_count: Option<usize>,
    out: &Path,
) -> Result<OracleSummary, CliError> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let model = cfg.model_spec()?;
    let all = profile_splits(&model)?;
    let splits = SplitTable::shared(thin_splits(&all, split_count.unwrap_or(0)));
    let opts = PairingOptions {
        improvement_threshold: cfg.improvement_threshold,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_ORACLE));
    let drawn: Vec<Vec<AgentProfile>> = (0..instances)
        .map(|_| random_instance(cfg, &mut rng))
        .collect::<Result<_, _>>()?;

    let solved: Vec<(OracleRow, bool)> = drawn
        .par_iter()
        .map(|agents| -> Result<_, CliError> {
            let exact = solve_exact(agents, &splits)?;
            let plan = schedule(agents, &splits, opts).plan;
            let greedy = plan_makespan(agents, &plan, &splits)?.makespan_s;
            let ids = agents.iter().map(|a| a.id);
            let alone =
                plan_makespan(agents, &PairingPlan::all_independent(ids), &splits)?.makespan_s;
            Ok((
                OracleRow {
                    greedy_makespan: greedy,
                    opt_makespan: exact.best_makespan_s,
                },
                greedy > alone,
            ))
        })
        .collect::<Result<_, _>>()?;

    let rows: Vec<OracleRow> = solved.iter().map(|(r, _)| *r).collect();
    output::write_oracle(&out.join("oracle.csv"), &rows)?;
    let ratios: Vec<f64> = rows.iter().map(OracleRow::ratio).collect();
    Ok(OracleSummary {
        instances,
        max_ratio: ratios.iter().copied().fold(f64::NAN, f64::max),
        mean_ratio: ratios.iter().sum::<f64>() / ratios.len().max(1) as f64,
        worse_than_no_offload: solved.iter().filter(|(_, w)| *w).count(),
    })
}

/// Writes `profile.csv` for the configured model.
pub fn profile(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<SplitProfile>, CliError> {
    let model = cfg.model_spec()?;
    let splits = profile_splits(&model)?;
    fs::create_dir_all(out)?;
    output::write_profile(&out.join("profile.csv"), &model, &splits)?;
    Ok(splits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_keeps_interior_points() {
        let splits: Vec<SplitProfile> = (1..=26)
            .map(|m| SplitProfile::new(m, m as f64 / 27.0, 1.0 - m as f64 / 27.0, 1.0))
            .collect();
        let ids: Vec<usize> = thin_splits(&splits, 3).iter().map(|s| s.split_id).collect();
        assert_eq!(ids, vec![6, 13, 20]);
        assert_eq!(thin_splits(&splits, 5).len(), 5);
        assert_eq!(thin_splits(&splits, 0).len(), 26);
        assert_eq!(thin_splits(&splits, 40).len(), 26);
    }
}
