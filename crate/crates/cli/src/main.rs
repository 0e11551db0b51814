use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use comdml_cli::commands::{oracle_check, profile, run, thread_pool};
use comdml_cli::{CliError, ExperimentConfig, Mode, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "comdml",
    version,
    about = "Workload-balancing simulator for decentralized training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate round timing and/or run split training; writes timing.csv, pairs.csv, learning.csv.
    Run {
        #[command(flatten)]
        common: Common,
        /// What to run (overrides the config's `mode`).
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Comma-separated methods to simulate, e.g. `comdml,allreduce_no_offload`.
        #[arg(long, value_delimiter = ',')]
        compare: Option<Vec<String>>,
        /// Override the number of rounds (timing and learning).
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Compare greedy pairing against the exact optimum on random instances; writes oracle.csv.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Restrict each instance to this many evenly spaced split points.
        #[arg(long)]
        splits: Option<usize>,
    },
    /// Dump the split profiles of the configured model; writes profile.csv.
    Profile {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; built-in defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the number of agents.
    #[arg(long)]
    agents: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::with_seed(0),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(k) = self.agents {
            cfg.agents.count = k;
        }
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let pool = thread_pool()?;
    pool.install(|| match cli.command {
        Command::Run {
            common,
            mode,
            compare,
            rounds,
        } => {
            let mut cfg = common.load()?;
            if let Some(mode) = mode {
                cfg.mode = mode;
            }
            if let Some(methods) = compare {
                cfg.methods = methods.into_iter().map(|m| m.trim().to_string()).collect();
            }
            if let Some(r) = rounds {
                cfg.rounds = r;
                cfg.learning.rounds = Some(r);
            }
            let outcome = run(&cfg, &common.out)?;
            for r in &outcome.timing {
                println!(
                    "{}: cumulative {:.3} s over {} rounds",
                    r.baseline_name,
                    r.cumulative_time_s,
                    r.rounds.len()
                );
            }
            if let Some(report) = &outcome.learning {
                let last = report.final_metrics();
                println!(
                    "learning: round {} loss {:.6} accuracy {:.4}",
                    last.round, last.loss, last.accuracy
                );
            }
            report_written(&common.out);
            Ok(())
        }
        Command::Oracle {
            common,
            instances,
            splits,
        } => {
            let cfg = common.load()?;
            let s = oracle_check(&cfg, instances, splits, &common.out)?;
            println!(
                "{} instances: max ratio {:.6}, mean ratio {:.6}, worse than no-offload {}",
                s.instances, s.max_ratio, s.mean_ratio, s.worse_than_no_offload
            );
            report_written(&common.out);
            Ok(())
        }
        Command::Profile { common } => {
            let cfg = common.load()?;
            let splits = profile(&cfg, &common.out)?;
            println!("{} split points", splits.len());
            report_written(&common.out);
            Ok(())
        }
    })
}

fn report_written(out: &Path) {
    log::info!("results written to {}", out.display());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
