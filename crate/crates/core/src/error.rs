use thiserror::Error;

use crate::types::AgentId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no link from agent {from} to agent {to}")]
    MissingLink { from: AgentId, to: AgentId },

    #[error("invalid pairing plan: {0}")]
    InvalidPlan(String),

    #[error("invalid agent profile: {0}")]
    InvalidAgent(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("split index {index} out of range 1..{layers}")]
    OutOfRange { index: usize, layers: usize },

    #[error("no split profiles supplied")]
    NoSplits,

    #[error("bandwidth must be positive, got {0}")]
    BadBandwidth(f64),

    #[error("instance has {agents} agents; the exact solver handles at most {max}")]
    TooLarge { agents: usize, max: usize },

    #[error("allreduce needs at least 2 agents, got {0}")]
    BadK(usize),

    #[error("unknown baseline `{0}`")]
    UnknownBaseline(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty sample")]
    EmptySample,

    #[error("invalid configuration: {0}")]
    Config(String),
}
