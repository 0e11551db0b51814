//! Small dense-network engine used to check convergence of split training.

pub mod aggregate;
pub mod data;
pub mod drift;
pub mod net;
pub mod train;

pub use aggregate::{aggregate, weighted_mean};
pub use data::{MixtureSpec, Sample, SyntheticDataset};
pub use drift::{drift_estimate, histogram_l1, DriftEstimate, DEFAULT_DRIFT_BINS};
pub use net::{Activation, Dense, SplitNet};
pub use train::{
    dense_model_spec, run_training, LrSchedule, PlanSource, RoundMetrics, TrainingConfig,
    TrainingReport,
};
