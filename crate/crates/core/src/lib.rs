//! Decentralized training-workload balancing: split profiling, a greedy
//! slowest-first pairing scheduler, an exact min-makespan oracle, a round
//! simulator with baseline timing models, and a toy local-loss split
//! training engine.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod learning;
pub mod oracle;
pub mod profiler;
pub mod scheduler;
pub mod simulator;
pub mod time_model;
pub mod types;

pub use error::{Error, Result};
pub use oracle::{solve_exact, OracleResult, MAX_ORACLE_AGENTS};
pub use profiler::{offloaded_model_bytes, profile_splits, resnet56_like, LayerSpec, ModelSpec};
pub use scheduler::{
    agent_training_time, fast_agent_time_estimate, greedy_pair, schedule, EstimateResult,
    PairingOptions, Schedule,
};
pub use simulator::{
    allreduce_cost, run_baseline, run_comdml, AllReduceAlgorithm, AllReduceModel, Baseline,
    SimConfig, SimResult,
};
pub use time_model::{individual_time, pair_time, plan_makespan, PairTimes};
pub use types::{
    AgentId, AgentProfile, AgentTimes, Pair, PairingPlan, RoundReport, SplitProfile, SplitTable,
};
