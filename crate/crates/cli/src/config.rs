//! Strict TOML experiment configuration.
//!
//! Every section is optional except the top-level `seed`; unknown keys are
//! rejected. Speeds are given in relative CPUs and links in Mbps; both are
//! converted here into the batches/s and bytes/s the core library uses.

use std::path::Path;

use comdml_core::learning::{LrSchedule, MixtureSpec, PlanSource, TrainingConfig};
use comdml_core::profiler::{preset, LayerSpec, ModelSpec, MAX_AUX_COST_FRAC, RESNET56_LIKE};
use comdml_core::simulator::topology::BYTES_PER_MBPS;
use comdml_core::simulator::{
    derive_seed, AgentSpec, BandwidthAssignment, ChurnPolicy, Method, ProfilePool, Topology,
    TopologyKind,
};
use comdml_core::{AgentProfile, AllReduceAlgorithm, AllReduceModel, SimConfig};
use serde::Deserialize;

use crate::error::CliError;

const STREAM_TOPOLOGY: u64 = 2;
const STREAM_CHURN: u64 = 4;
const STREAM_LEARNING: u64 = 5;
const STREAM_DATA: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Timing,
    Learning,
    Both,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "defaults::rounds")]
    pub rounds: usize,
    #[serde(default = "defaults::one")]
    pub sample_rate: f64,
    #[serde(default = "defaults::mode")]
    pub mode: Mode,
    /// Methods simulated in timing mode: `comdml` and/or baseline names.
    #[serde(default = "defaults::methods")]
    pub methods: Vec<String>,
    #[serde(default)]
    pub partial_model_transfer: bool,
    #[serde(default)]
    pub uniform_average: bool,
    /// Relative improvement an offload must promise before an agent pairs.
    #[serde(default)]
    pub improvement_threshold: f64,
    #[serde(default)]
    pub agents: AgentsConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub topology: TopologyConfig,
    pub churn: Option<ChurnConfig>,
    #[serde(default)]
    pub aggregation: AggregationConfig,
    #[serde(default)]
    pub learning: LearningConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsConfig {
    #[serde(default = "defaults::agent_count")]
    pub count: usize,
    /// Relative CPUs, assigned round-robin by agent id.
    #[serde(default = "defaults::speed_tiers")]
    pub speed_tiers: Vec<f64>,
    /// Explicit relative CPU per agent; overrides the round-robin assignment.
    pub speeds: Option<Vec<f64>>,
    /// Batches per second delivered by one relative CPU.
    #[serde(default = "defaults::base_rate")]
    pub base_rate: f64,
    #[serde(default = "defaults::link_tiers")]
    pub link_tiers_mbps: Vec<f64>,
    #[serde(default = "defaults::num_batches")]
    pub num_batches: u64,
    #[serde(default = "defaults::batch_size")]
    pub batch_size: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Named preset; defaults to `resnet56-like` when no layers are given.
    pub preset: Option<String>,
    #[serde(default)]
    pub layers: Vec<LayerSpec>,
    pub aux_cost_frac: Option<f64>,
    pub aux_out_classes: Option<usize>,
    pub label_bytes: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKindConfig {
    Full,
    Random,
    Ring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthConfig {
    /// One NIC tier per agent; a link runs at the slower endpoint.
    AgentTiers,
    /// One tier per link.
    EdgeTiers,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    #[serde(default = "defaults::topology_kind")]
    pub kind: TopologyKindConfig,
    pub edge_probability: Option<f64>,
    #[serde(default = "defaults::bandwidth")]
    pub bandwidth: BandwidthConfig,
    pub constant_mbps: Option<f64>,
    /// Defaults to a value derived from the master seed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChurnConfig {
    pub fraction: f64,
    pub period_rounds: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmConfig {
    HalvingDoubling,
    Ring,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationConfig {
    #[serde(default = "defaults::algorithm")]
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub latency_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanSourceConfig {
    Comdml,
    NoOffload,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningConfig {
    #[serde(default = "defaults::hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "defaults::classes")]
    pub classes: usize,
    #[serde(default = "defaults::dim")]
    pub dim: usize,
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    #[serde(default = "defaults::mean_scale")]
    pub mean_scale: f64,
    #[serde(default = "defaults::one")]
    pub std: f64,
    /// Dirichlet concentration for label skew across agents; omit for i.i.d.
    pub label_skew: Option<f64>,
    /// Defaults to the top-level `rounds`.
    pub rounds: Option<usize>,
    #[serde(default = "defaults::lr")]
    pub lr: f64,
    #[serde(default = "defaults::decay_factor")]
    pub decay_factor: f64,
    #[serde(default = "defaults::plateau_rounds")]
    pub plateau_rounds: usize,
    #[serde(default = "defaults::min_improvement")]
    pub min_improvement: f64,
    #[serde(default = "defaults::learning_batch")]
    pub batch_size: usize,
    #[serde(default = "defaults::plan_source")]
    pub plan_source: PlanSourceConfig,
    #[serde(default = "defaults::drift_split")]
    pub drift_split: usize,
    #[serde(default = "defaults::drift_bins")]
    pub drift_bins: usize,
    #[serde(default = "defaults::probe_samples")]
    pub probe_samples: usize,
}

mod defaults {
    use super::*;

    pub fn rounds() -> usize {
        100
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn mode() -> Mode {
        Mode::Timing
    }
    pub fn methods() -> Vec<String> {
        vec!["comdml".into()]
    }
    pub fn agent_count() -> usize {
        10
    }
    pub fn speed_tiers() -> Vec<f64> {
        vec![4.0, 2.0, 1.0, 0.5, 0.2]
    }
    pub fn base_rate() -> f64 {
        10.0
    }
    pub fn link_tiers() -> Vec<f64> {
        vec![10.0, 20.0, 50.0, 100.0]
    }
    pub fn num_batches() -> u64 {
        50
    }
    pub fn batch_size() -> u64 {
        100
    }
    pub fn topology_kind() -> TopologyKindConfig {
        TopologyKindConfig::Full
    }
    pub fn bandwidth() -> BandwidthConfig {
        BandwidthConfig::AgentTiers
    }
    pub fn algorithm() -> AlgorithmConfig {
        AlgorithmConfig::HalvingDoubling
    }
    pub fn hidden() -> Vec<usize> {
        vec![32, 32, 16]
    }
    pub fn classes() -> usize {
        2
    }
    pub fn dim() -> usize {
        16
    }
    pub fn samples() -> usize {
        4000
    }
    pub fn mean_scale() -> f64 {
        2.0
    }
    pub fn lr() -> f64 {
        LrSchedule::default().initial
    }
    pub fn decay_factor() -> f64 {
        LrSchedule::default().decay_factor
    }
    pub fn plateau_rounds() -> usize {
        LrSchedule::default().plateau_rounds
    }
    pub fn min_improvement() -> f64 {
        LrSchedule::default().min_improvement
    }
    pub fn learning_batch() -> usize {
        100
    }
    pub fn plan_source() -> PlanSourceConfig {
        PlanSourceConfig::Comdml
    }
    pub fn drift_split() -> usize {
        1
    }
    pub fn drift_bins() -> usize {
        32
    }
    pub fn probe_samples() -> usize {
        500
    }
}

macro_rules! impl_default_from_empty {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                toml::from_str("").expect("every field has a default")
            }
        }
    )*};
}
impl_default_from_empty!(
    AgentsConfig,
    TopologyConfig,
    AggregationConfig,
    LearningConfig
);

fn invalid(field: &str, constraint: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.into(),
        constraint: constraint.into(),
    }
}

fn check(ok: bool, field: &str, constraint: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(invalid(field, constraint))
    }
}

impl ExperimentConfig {
    /// Built-in defaults with the given seed.
    pub fn with_seed(seed: u64) -> Self {
        toml::from_str(&format!("seed = {seed}")).expect("defaults parse")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check(self.rounds >= 1, "rounds", "must be >= 1")?;
        check(
            self.sample_rate > 0.0 && self.sample_rate <= 1.0,
            "sample_rate",
            "must lie in (0, 1]",
        )?;
        check(
            (0.0..1.0).contains(&self.improvement_threshold),
            "improvement_threshold",
            "must lie in [0, 1)",
        )?;
        check(
            !self.methods.is_empty(),
            "methods",
            "must name at least one method",
        )?;
        for m in &self.methods {
            m.parse::<Method>()
                .map_err(|_| invalid("methods", format!("unknown method `{m}`")))?;
        }

        let a = &self.agents;
        check(a.count >= 1, "agents.count", "must be >= 1")?;
        check(
            !a.speed_tiers.is_empty() && a.speed_tiers.iter().all(|s| *s > 0.0),
            "agents.speed_tiers",
            "must be a non-empty list of positive values",
        )?;
        if let Some(speeds) = &a.speeds {
            check(
                speeds.len() == a.count,
                "agents.speeds",
                "must list exactly agents.count values",
            )?;
            check(
                speeds.iter().all(|s| *s > 0.0),
                "agents.speeds",
                "must be positive",
            )?;
        }
        check(a.base_rate > 0.0, "agents.base_rate", "must be > 0")?;
        check(
            !a.link_tiers_mbps.is_empty() && a.link_tiers_mbps.iter().all(|s| *s > 0.0),
            "agents.link_tiers_mbps",
            "must be a non-empty list of positive values",
        )?;
        check(a.num_batches >= 1, "agents.num_batches", "must be >= 1")?;
        check(a.batch_size >= 1, "agents.batch_size", "must be >= 1")?;

        let t = &self.topology;
        match (t.kind, t.edge_probability) {
            (TopologyKindConfig::Random, Some(p)) => check(
                (0.0..=1.0).contains(&p),
                "topology.edge_probability",
                "must lie in [0, 1]",
            )?,
            (TopologyKindConfig::Random, None) => {
                return Err(invalid(
                    "topology.edge_probability",
                    "required for a random topology",
                ))
            }
            (_, Some(_)) => {
                return Err(invalid(
                    "topology.edge_probability",
                    "only applies to a random topology",
                ))
            }
            _ => {}
        }
        match (t.bandwidth, t.constant_mbps) {
            (BandwidthConfig::Constant, Some(c)) => {
                check(c > 0.0, "topology.constant_mbps", "must be > 0")?
            }
            (BandwidthConfig::Constant, None) => {
                return Err(invalid(
                    "topology.constant_mbps",
                    "required for constant bandwidth",
                ))
            }
            (_, Some(_)) => {
                return Err(invalid(
                    "topology.constant_mbps",
                    "only applies to constant bandwidth",
                ))
            }
            _ => {}
        }

        if let Some(c) = &self.churn {
            check(
                (0.0..=1.0).contains(&c.fraction),
                "churn.fraction",
                "must lie in [0, 1]",
            )?;
            check(c.period_rounds >= 1, "churn.period_rounds", "must be >= 1")?;
        }
        check(
            self.aggregation.latency_s >= 0.0,
            "aggregation.latency_s",
            "must be >= 0",
        )?;

        let m = &self.model;
        if m.preset.is_some() && !m.layers.is_empty() {
            return Err(invalid(
                "model",
                "set either model.preset or model.layers, not both",
            ));
        }
        if let Some(name) = &m.preset {
            check(
                preset(name).is_some(),
                "model.preset",
                "must name a known preset",
            )?;
        }
        if let Some(aux) = m.aux_cost_frac {
            check(
                (0.0..=MAX_AUX_COST_FRAC).contains(&aux),
                "model.aux_cost_frac",
                "must lie in [0, 0.5]",
            )?;
        }
        if let Some(b) = m.label_bytes {
            check(b >= 0.0, "model.label_bytes", "must be >= 0")?;
        }
        self.model_spec()?
            .validate()
            .map_err(|e| invalid("model", e.to_string()))?;

        let l = &self.learning;
        check(
            !l.hidden.is_empty(),
            "learning.hidden",
            "needs at least one hidden layer",
        )?;
        check(
            l.hidden.iter().all(|w| *w >= 1),
            "learning.hidden",
            "widths must be >= 1",
        )?;
        check(l.classes >= 2, "learning.classes", "must be >= 2")?;
        check(l.dim >= 1, "learning.dim", "must be >= 1")?;
        check(l.samples >= 1, "learning.samples", "must be >= 1")?;
        check(l.std > 0.0, "learning.std", "must be > 0")?;
        if let Some(s) = l.label_skew {
            check(s > 0.0, "learning.label_skew", "must be > 0")?;
        }
        check(l.lr > 0.0, "learning.lr", "must be > 0")?;
        check(
            l.decay_factor > 0.0 && l.decay_factor <= 1.0,
            "learning.decay_factor",
            "must lie in (0, 1]",
        )?;
        check(
            l.plateau_rounds >= 1,
            "learning.plateau_rounds",
            "must be >= 1",
        )?;
        check(l.batch_size >= 1, "learning.batch_size", "must be >= 1")?;
        check(
            l.drift_split >= 1 && l.drift_split <= l.hidden.len(),
            "learning.drift_split",
            "must name a split point between 1 and the number of hidden layers",
        )?;
        check(l.drift_bins >= 1, "learning.drift_bins", "must be >= 1")?;
        check(
            l.probe_samples >= 1,
            "learning.probe_samples",
            "must be >= 1",
        )?;
        Ok(())
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let m = &self.model;
        let mut spec = if m.layers.is_empty() {
            let name = m.preset.as_deref().unwrap_or(RESNET56_LIKE);
            preset(name).ok_or_else(|| invalid("model.preset", "must name a known preset"))?
        } else {
            ModelSpec::new(m.layers.clone(), 0.0)
        };
        if let Some(v) = m.aux_cost_frac {
            spec.aux_cost_frac = v;
        }
        if let Some(v) = m.aux_out_classes {
            spec.aux_out_classes = v;
        }
        if let Some(v) = m.label_bytes {
            spec.label_bytes = v;
        }
        Ok(spec)
    }

    /// Relative CPU of each agent.
    pub fn relative_speeds(&self) -> Vec<f64> {
        let a = &self.agents;
        match &a.speeds {
            Some(s) => s.clone(),
            None => (0..a.count)
                .map(|i| a.speed_tiers[i % a.speed_tiers.len()])
                .collect(),
        }
    }

    pub fn link_tiers_bps(&self) -> Vec<f64> {
        self.agents
            .link_tiers_mbps
            .iter()
            .map(|m| m * BYTES_PER_MBPS)
            .collect()
    }

    pub fn topology_seed(&self) -> u64 {
        self.topology
            .seed
            .unwrap_or_else(|| derive_seed(self.seed, STREAM_TOPOLOGY))
    }

    pub fn topology(&self) -> Topology {
        let t = &self.topology;
        let tiers = self.link_tiers_bps();
        Topology {
            kind: match t.kind {
                TopologyKindConfig::Full => TopologyKind::Full,
                TopologyKindConfig::Ring => TopologyKind::Ring,
                TopologyKindConfig::Random => TopologyKind::Random {
                    p: t.edge_probability.unwrap_or(1.0),
                },
            },
            seed: self.topology_seed(),
            bandwidth: match t.bandwidth {
                BandwidthConfig::AgentTiers => BandwidthAssignment::AgentTiers(tiers),
                BandwidthConfig::EdgeTiers => BandwidthAssignment::EdgeTiers(tiers),
                BandwidthConfig::Constant => {
                    BandwidthAssignment::Constant(t.constant_mbps.unwrap_or(0.0) * BYTES_PER_MBPS)
                }
            },
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let a = &self.agents;
        let model = self.model_spec()?;
        let model_bytes = model.total_param_bytes();
        Ok(SimConfig {
            agents: self
                .relative_speeds()
                .into_iter()
                .map(|s| AgentSpec {
                    proc_speed: s * a.base_rate,
                    num_batches: a.num_batches,
                    dataset_size: a.num_batches * a.batch_size,
                })
                .collect(),
            model,
            topology: self.topology(),
            churn: self.churn.as_ref().map(|c| ChurnPolicy {
                fraction: c.fraction,
                period_rounds: c.period_rounds,
                seed: c
                    .seed
                    .unwrap_or_else(|| derive_seed(self.seed, STREAM_CHURN)),
            }),
            pool: ProfilePool {
                speeds: a.speed_tiers.iter().map(|s| s * a.base_rate).collect(),
                links: self.link_tiers_bps(),
            },
            aggregation: AllReduceModel::new(
                match self.aggregation.algorithm {
                    AlgorithmConfig::HalvingDoubling => AllReduceAlgorithm::HalvingDoubling,
                    AlgorithmConfig::Ring => AllReduceAlgorithm::Ring,
                },
                self.aggregation.latency_s,
                model_bytes,
            ),
            rounds: self.rounds,
            sample_rate: self.sample_rate,
            seed: self.seed,
            partial_model_transfer: self.partial_model_transfer,
            improvement_threshold: self.improvement_threshold,
        })
    }

    /// Static timing profiles over the realized topology, used to pair agents in learning runs.
    pub fn agent_profiles(&self) -> Result<Vec<AgentProfile>, CliError> {
        let net = self.topology().realize(self.agents.count)?;
        Ok(self
            .relative_speeds()
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let mut p =
                    AgentProfile::new(i, s * self.agents.base_rate, self.agents.num_batches);
                for j in net.neighbors(i) {
                    p.links
                        .insert(j, net.bandwidth(i, j).expect("neighbor has a link"));
                }
                p
            })
            .collect())
    }

    pub fn training_config(&self) -> Result<TrainingConfig, CliError> {
        let l = &self.learning;
        let mut cfg = TrainingConfig::new(
            self.agent_profiles()?,
            MixtureSpec {
                classes: l.classes,
                dim: l.dim,
                samples: l.samples,
                mean_scale: l.mean_scale,
                std: l.std,
                seed: derive_seed(self.seed, STREAM_DATA),
            },
        );
        cfg.hidden = l.hidden.clone();
        cfg.label_skew = l.label_skew;
        cfg.plan_source = match l.plan_source {
            PlanSourceConfig::Comdml => PlanSource::ComDml,
            PlanSourceConfig::NoOffload => PlanSource::NoOffload,
        };
        cfg.rounds = l.rounds.unwrap_or(self.rounds);
        cfg.lr = LrSchedule {
            initial: l.lr,
            decay_factor: l.decay_factor,
            plateau_rounds: l.plateau_rounds,
            min_improvement: l.min_improvement,
        };
        cfg.batch_size = l.batch_size;
        cfg.seed = derive_seed(self.seed, STREAM_LEARNING);
        cfg.uniform_average = self.uniform_average;
        cfg.improvement_threshold = self.improvement_threshold;
        cfg.drift_bins = l.drift_bins;
        cfg.drift_split = l.drift_split;
        cfg.probe_samples = l.probe_samples;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_documented_defaults() {
        let cfg = ExperimentConfig::parse("seed = 3").unwrap();
        assert_eq!(cfg.rounds, 100);
        assert_eq!(cfg.mode, Mode::Timing);
        assert_eq!(cfg.methods, vec!["comdml"]);
        assert_eq!(cfg.agents.count, 10);
        assert_eq!(cfg.agents.speed_tiers, vec![4.0, 2.0, 1.0, 0.5, 0.2]);
        assert_eq!(cfg.link_tiers_bps(), vec![1.25e6, 2.5e6, 6.25e6, 12.5e6]);
        assert_eq!(cfg.learning.lr, 0.001);
        assert!(cfg.churn.is_none());
        let sim = cfg.sim_config().unwrap();
        assert_eq!(sim.agents[0].proc_speed, 40.0);
        assert_eq!(sim.agents[4].proc_speed, 2.0);
        assert_eq!(sim.model.layers.len(), 27);
    }

    #[test]
    fn seed_is_required() {
        assert!(matches!(
            ExperimentConfig::parse("rounds = 3"),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = ExperimentConfig::parse("seed = 1\n[agents]\ncuont = 4\n").unwrap_err();
        let CliError::Parse(msg) = err else {
            panic!("{err:?}")
        };
        assert!(msg.contains("cuont") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn churn_fraction_is_named() {
        let err =
            ExperimentConfig::parse("seed = 1\n[churn]\nfraction = 1.5\nperiod_rounds = 10\n")
                .unwrap_err();
        assert_eq!(
            err,
            CliError::Validation {
                field: "churn.fraction".into(),
                constraint: "must lie in [0, 1]".into()
            }
        );
    }

    #[test]
    fn rejects_unknown_preset_and_method() {
        let e = ExperimentConfig::parse("seed = 1\n[model]\npreset = \"vgg\"\n").unwrap_err();
        assert!(matches!(e, CliError::Validation { ref field, .. } if field == "model.preset"));
        let e = ExperimentConfig::parse("seed = 1\nmethods = [\"fedsgd\"]\n").unwrap_err();
        assert!(matches!(e, CliError::Validation { ref field, .. } if field == "methods"));
    }

    #[test]
    fn explicit_layers_replace_the_preset() {
        let cfg = ExperimentConfig::parse(
            r#"
seed = 1
[model]
aux_cost_frac = 0.05
[[model.layers]]
name = "a"
cost = 1.0
out_bytes = 10.0
[[model.layers]]
name = "b"
cost = 3.0
out_bytes = 4.0
"#,
        )
        .unwrap();
        let m = cfg.model_spec().unwrap();
        assert_eq!(m.layers.len(), 2);
        assert_eq!(m.aux_cost_frac, 0.05);
    }

    #[test]
    fn random_topology_needs_probability() {
        let e = ExperimentConfig::parse("seed = 1\n[topology]\nkind = \"random\"\n").unwrap_err();
        assert!(
            matches!(e, CliError::Validation { ref field, .. } if field == "topology.edge_probability")
        );
    }
}
