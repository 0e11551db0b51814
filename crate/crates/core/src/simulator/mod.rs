//! Round-level simulation of the pairing workflow and of the baselines.
//!
//! Rounds are evaluated in closed form. Every method sees the same world:
//! sampling, churn and topology draw from their own seeded streams, so
//! two methods run with the same config see the same participants and
//! profiles in every round.

pub mod allreduce;
pub mod topology;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, IndexedRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use allreduce::{allreduce_cost, AllReduceAlgorithm, AllReduceModel};
pub use topology::{BandwidthAssignment, Network, Topology, TopologyKind, LINK_TIERS_BPS};

use crate::error::{Error, Result};
use crate::profiler::{offloaded_model_bytes, profile_splits, ModelSpec};
use crate::scheduler::{schedule, PairingOptions};
use crate::time_model::{individual_time, plan_makespan};
use crate::types::{AgentId, AgentProfile, PairingPlan, RoundReport, SplitTable};

/// splitmix64 finalizer over `master` and a stream tag.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_SAMPLING: u64 = 1;
const STREAM_METHOD: u64 = 3;

/// `ceil(x * k)` tolerant of representation error such as `0.2 * 10 = 2.0000000000000004`.
pub fn ceil_share(fraction: f64, k: usize) -> usize {
    let raw = fraction * k as f64;
    let rounded = raw.round();
    if (raw - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        raw.ceil() as usize
    }
}

/// Static description of one simulated agent; links come from the topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentSpec {
    pub proc_speed: f64,
    pub num_batches: u64,
    pub dataset_size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChurnPolicy {
    pub fraction: f64,
    pub period_rounds: usize,
    pub seed: u64,
}

impl ChurnPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(Error::Config(format!(
                "churn.fraction must lie in [0, 1], got {}",
                self.fraction
            )));
        }
        if self.period_rounds < 1 {
            return Err(Error::Config("churn.period_rounds must be >= 1".into()));
        }
        Ok(())
    }
}

/// Profiles that churn draws replacements from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfilePool {
    /// Batches per second.
    pub speeds: Vec<f64>,
    /// NIC bytes per second; used when bandwidth is assigned per agent.
    pub links: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub agents: Vec<AgentSpec>,
    pub model: ModelSpec,
    pub topology: Topology,
    pub churn: Option<ChurnPolicy>,
    pub pool: ProfilePool,
    pub aggregation: AllReduceModel,
    pub rounds: usize,
    pub sample_rate: f64,
    pub seed: u64,
    /// Charge the one-time suffix parameter transfer to the helper.
    pub partial_model_transfer: bool,
    pub improvement_threshold: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::Config("rounds must be >= 1".into()));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate <= 1.0) {
            return Err(Error::Config(format!(
                "sample_rate must lie in (0, 1], got {}",
                self.sample_rate
            )));
        }
        if !(self.improvement_threshold >= 0.0 && self.improvement_threshold < 1.0) {
            return Err(Error::Config(format!(
                "improvement_threshold must lie in [0, 1), got {}",
                self.improvement_threshold
            )));
        }
        for (i, a) in self.agents.iter().enumerate() {
            if !(a.proc_speed > 0.0) {
                return Err(Error::Config(format!("agent {i}: proc_speed must be > 0")));
            }
        }
        if self
            .pool
            .speeds
            .iter()
            .chain(&self.pool.links)
            .any(|v| !(*v > 0.0))
        {
            return Err(Error::Config("profile pool values must be > 0".into()));
        }
        if let Some(c) = &self.churn {
            c.validate()?;
        }
        self.model.validate()?;
        self.topology.validate()?;
        self.aggregation.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    FedAvg,
    Gossip,
    BrainTorrent,
    AllReduceNoOffload,
}

impl Baseline {
    pub const ALL: [Baseline; 4] = [
        Baseline::FedAvg,
        Baseline::Gossip,
        Baseline::BrainTorrent,
        Baseline::AllReduceNoOffload,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::FedAvg => "fedavg",
            Baseline::Gossip => "gossip",
            Baseline::BrainTorrent => "braintorrent",
            Baseline::AllReduceNoOffload => "allreduce_no_offload",
        }
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownBaseline(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ComDml,
    Baseline(Baseline),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ComDml => "comdml",
            Method::Baseline(b) => b.name(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "comdml" {
            Ok(Method::ComDml)
        } else {
            s.parse().map(Method::Baseline)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub round: usize,
    pub slow: AgentId,
    pub fast: AgentId,
    pub split_id: usize,
    /// Scheduler estimate.
    pub est_s: f64,
    /// Simulated pair completion, `max(slow_total, fast_total)`.
    pub sim_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub baseline_name: String,
    pub rounds: Vec<RoundReport>,
    pub per_round_aggregation_s: Vec<f64>,
    /// Sum of makespan plus aggregation over rounds; for gossip, which has no
    /// global barrier, the largest per-agent running total.
    pub cumulative_time_s: f64,
    /// Running value of `cumulative_time_s` after each round.
    pub cumulative_by_round: Vec<f64>,
    pub pairs: Vec<PairRecord>,
    pub participants: Vec<Vec<AgentId>>,
    /// Sampled agents dropped because the topology leaves them without links.
    pub excluded: Vec<Vec<AgentId>>,
}

/// Mutable per-run state shared by every method.
#[derive(Debug, Clone)]
pub struct World {
    agents: Vec<AgentSpec>,
    network: Network,
    sample_rate: f64,
    churn: Option<ChurnPolicy>,
    pool: ProfilePool,
    sampler: ChaCha8Rng,
    churn_rng: ChaCha8Rng,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub participants: Vec<AgentId>,
    pub excluded: Vec<AgentId>,
}

impl World {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        Ok(Self {
            agents: cfg.agents.clone(),
            network: cfg.topology.realize(cfg.agents.len())?,
            sample_rate: cfg.sample_rate,
            churn: cfg.churn,
            pool: cfg.pool.clone(),
            sampler: ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_SAMPLING)),
            churn_rng: ChaCha8Rng::seed_from_u64(cfg.churn.map_or(0, |c| c.seed)),
        })
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    /// Draws this round's participants uniformly without replacement.
    pub fn sample(&mut self) -> Selection {
        let k = self.agents.len();
        if k == 0 {
            return Selection {
                participants: vec![],
                excluded: vec![],
            };
        }
        let n = ceil_share(self.sample_rate, k).clamp(1, k);
        let mut picked = index::sample(&mut self.sampler, k, n).into_vec();
        picked.sort_unstable();
        if k < 2 {
            return Selection {
                participants: picked,
                excluded: vec![],
            };
        }
        let (participants, excluded) = picked
            .into_iter()
            .partition(|&a| self.network.degree(a) > 0);
        Selection {
            participants,
            excluded,
        }
    }

    pub fn profiles(&self, ids: &[AgentId]) -> Vec<AgentProfile> {
        let among: BTreeSet<AgentId> = ids.iter().copied().collect();
        ids.iter()
            .map(|&id| {
                let spec = self.agents[id];
                AgentProfile {
                    id,
                    proc_speed: spec.proc_speed,
                    num_batches: spec.num_batches,
                    dataset_size: spec.dataset_size,
                    links: self.network.links_within(id, &among),
                }
            })
            .collect()
    }

    /// Slowest link among `ids`, falling back to their links to anyone.
    pub fn min_bandwidth(&self, ids: &[AgentId]) -> f64 {
        let among: BTreeSet<AgentId> = ids.iter().copied().collect();
        let inner = ids
            .iter()
            .flat_map(|&a| self.network.links_within(a, &among).into_values())
            .fold(f64::INFINITY, f64::min);
        if inner.is_finite() || ids.len() < 2 {
            return inner;
        }
        ids.iter()
            .flat_map(|&a| {
                self.network
                    .neighbors(a)
                    .filter_map(move |b| self.network.bandwidth(a, b))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Ends round `round` (0-based): applies churn when a period completes.
    /// Returns the agents whose profile changed.
    pub fn finish_round(&mut self, round: usize) -> Vec<AgentId> {
        let Some(churn) = self.churn else {
            return vec![];
        };
        if !(round + 1).is_multiple_of(churn.period_rounds) {
            return vec![];
        }
        let k = self.agents.len();
        let n = ceil_share(churn.fraction, k).min(k);
        let mut chosen = index::sample(&mut self.churn_rng, k, n).into_vec();
        chosen.sort_unstable();
        let mut changed = Vec::with_capacity(n);
        for &a in &chosen {
            let current = self.agents[a].proc_speed;
            let options: Vec<f64> = self
                .pool
                .speeds
                .iter()
                .copied()
                .filter(|s| *s != current)
                .collect();
            let mut moved = false;
            if let Some(&s) = options.choose(&mut self.churn_rng) {
                self.agents[a].proc_speed = s;
                moved = true;
            }
            if self.network.nic(a).is_some() {
                if let Some(&bw) = self.pool.links.choose(&mut self.churn_rng) {
                    moved |= self.network.nic(a) != Some(bw);
                    self.network.set_nic(a, bw);
                }
            }
            if moved {
                changed.push(a);
            }
        }
        log::debug!("round {round}: churned agents {changed:?}");
        changed
    }
}

/// Per-agent link to the virtual FedAvg server.
#[derive(Debug, Clone)]
enum ServerLinks {
    Constant(f64),
    Nic(f64),
    PerAgent(Vec<f64>),
}

impl ServerLinks {
    fn draw(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Self {
        let k = cfg.agents.len();
        match &cfg.topology.bandwidth {
            BandwidthAssignment::Constant(c) => ServerLinks::Constant(*c),
            BandwidthAssignment::AgentTiers(t) => {
                ServerLinks::Nic(*t.choose(rng).expect("validated non-empty"))
            }
            BandwidthAssignment::EdgeTiers(t) => ServerLinks::PerAgent(
                (0..k)
                    .map(|_| *t.choose(rng).expect("validated non-empty"))
                    .collect(),
            ),
        }
    }

    fn to(&self, a: AgentId, net: &Network) -> f64 {
        match self {
            ServerLinks::Constant(c) => *c,
            ServerLinks::Nic(s) => net.nic(a).map_or(*s, |n| n.min(*s)),
            ServerLinks::PerAgent(v) => v[a],
        }
    }
}

struct RoundOutcome {
    report: RoundReport,
    aggregation_s: f64,
    pairs: Vec<PairRecord>,
}

pub fn run_comdml(cfg: &SimConfig) -> Result<SimResult> {
    simulate(cfg, Method::ComDml)
}

pub fn run_baseline(name: &str, cfg: &SimConfig) -> Result<SimResult> {
    let baseline: Baseline = name.parse()?;
    simulate(cfg, Method::Baseline(baseline))
}

pub fn simulate(cfg: &SimConfig, method: Method) -> Result<SimResult> {
    cfg.validate()?;
    let mut world = World::new(cfg)?;
    let splits = SplitTable::shared(profile_splits(&cfg.model)?);
    let opts = PairingOptions {
        improvement_threshold: cfg.improvement_threshold,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_METHOD));
    let server = ServerLinks::draw(cfg, &mut rng);
    let model_bytes = cfg.aggregation.model_bytes;

    let mut result = SimResult {
        baseline_name: method.name().to_string(),
        rounds: Vec::with_capacity(cfg.rounds),
        per_round_aggregation_s: Vec::with_capacity(cfg.rounds),
        cumulative_time_s: 0.0,
        cumulative_by_round: Vec::with_capacity(cfg.rounds),
        pairs: Vec::new(),
        participants: Vec::with_capacity(cfg.rounds),
        excluded: Vec::with_capacity(cfg.rounds),
    };
    let mut gossip_clock: BTreeMap<AgentId, f64> = BTreeMap::new();

    for round in 0..cfg.rounds {
        let sel = world.sample();
        if !sel.excluded.is_empty() {
            log::warn!("round {round}: isolated agents {:?} sit out", sel.excluded);
        }
        let agents = world.profiles(&sel.participants);
        let ids = &sel.participants;
        let aggregate = |w: &World| -> Result<f64> {
            if ids.len() < 2 {
                Ok(0.0)
            } else {
                cfg.aggregation.cost(ids.len(), w.min_bandwidth(ids))
            }
        };

        let outcome = match method {
            Method::ComDml => {
                let sched = schedule(&agents, &splits, opts);
                let mut report = plan_makespan(&agents, &sched.plan, &splits)?;
                if cfg.partial_model_transfer {
                    for p in &sched.plan.pairs {
                        let bw = agents
                            .iter()
                            .find(|a| a.id == p.slow)
                            .and_then(|a| a.link_to(p.fast))
                            .ok_or(Error::MissingLink {
                                from: p.slow,
                                to: p.fast,
                            })?;
                        let extra = offloaded_model_bytes(&cfg.model, p.split_id)? / bw;
                        let t = report.per_agent.get_mut(&p.fast).expect("fast in report");
                        t.comm_s += extra;
                        t.total_s += extra;
                    }
                    report.rebarrier();
                }
                let pairs = sched
                    .estimates
                    .iter()
                    .map(|e| PairRecord {
                        round,
                        slow: e.pair.slow,
                        fast: e.pair.fast,
                        split_id: e.pair.split_id,
                        est_s: e.est_time_s,
                        sim_s: report.per_agent[&e.pair.slow]
                            .total_s
                            .max(report.per_agent[&e.pair.fast].total_s),
                    })
                    .collect();
                RoundOutcome {
                    report,
                    aggregation_s: aggregate(&world)?,
                    pairs,
                }
            }
            Method::Baseline(Baseline::AllReduceNoOffload) => RoundOutcome {
                report: plan_makespan(
                    &agents,
                    &PairingPlan::all_independent(ids.clone()),
                    &splits,
                )?,
                aggregation_s: aggregate(&world)?,
                pairs: vec![],
            },
            Method::Baseline(Baseline::FedAvg) => {
                let busy = agents.iter().map(|a| {
                    let t = individual_time(a);
                    let comm = 2.0 * model_bytes / server.to(a.id, world.network());
                    (a.id, t, comm, t + comm)
                });
                RoundOutcome {
                    report: RoundReport::from_busy(busy.collect::<Vec<_>>()),
                    aggregation_s: 0.0,
                    pairs: vec![],
                }
            }
            Method::Baseline(Baseline::BrainTorrent) => {
                let fallback = world.min_bandwidth(ids);
                let server_id = ids.choose(&mut rng).copied();
                let busy: Vec<_> = agents
                    .iter()
                    .map(|a| {
                        let t = individual_time(a);
                        let bw = if Some(a.id) == server_id {
                            a.links.values().copied().fold(f64::INFINITY, f64::min)
                        } else {
                            server_id.and_then(|s| a.link_to(s)).unwrap_or(fallback)
                        };
                        let bw = if bw.is_finite() { bw } else { fallback };
                        let comm = if ids.len() < 2 {
                            0.0
                        } else {
                            2.0 * model_bytes / bw
                        };
                        (a.id, t, comm, t + comm)
                    })
                    .collect();
                RoundOutcome {
                    report: RoundReport::from_busy(busy),
                    aggregation_s: 0.0,
                    pairs: vec![],
                }
            }
            Method::Baseline(Baseline::Gossip) => {
                let net = world.network();
                let busy: Vec<_> = agents
                    .iter()
                    .map(|a| {
                        let t = individual_time(a);
                        let mut peers: Vec<AgentId> = a.links.keys().copied().collect();
                        if peers.is_empty() {
                            peers = net.neighbors(a.id).collect();
                        }
                        let comm = match peers.choose(&mut rng) {
                            Some(&p) => model_bytes / net.bandwidth(a.id, p).expect("neighbor"),
                            None => 0.0,
                        };
                        (a.id, t, comm, t + comm)
                    })
                    .collect();
                for &(id, _, _, total) in &busy {
                    *gossip_clock.entry(id).or_default() += total;
                }
                RoundOutcome {
                    report: RoundReport::from_busy(busy),
                    aggregation_s: 0.0,
                    pairs: vec![],
                }
            }
        };

        result.cumulative_time_s += outcome.report.makespan_s + outcome.aggregation_s;
        if method == Method::Baseline(Baseline::Gossip) {
            result.cumulative_time_s = gossip_clock.values().copied().fold(0.0, f64::max);
        }
        result.cumulative_by_round.push(result.cumulative_time_s);
        result.rounds.push(outcome.report);
        result.per_round_aggregation_s.push(outcome.aggregation_s);
        result.pairs.extend(outcome.pairs);
        result.participants.push(sel.participants);
        result.excluded.push(sel.excluded);
        world.finish_round(round);
    }

    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiler::resnet56_like;

    fn config(agents: Vec<AgentSpec>, bandwidth: BandwidthAssignment, rounds: usize) -> SimConfig {
        let model = resnet56_like();
        let bytes = model.total_param_bytes();
        SimConfig {
            agents,
            model,
            topology: Topology::full(bandwidth, 11),
            churn: None,
            pool: ProfilePool::default(),
            aggregation: AllReduceModel::new(AllReduceAlgorithm::HalvingDoubling, 0.0, bytes),
            rounds,
            sample_rate: 1.0,
            seed: 5,
            partial_model_transfer: false,
            improvement_threshold: 0.0,
        }
    }

    fn spec(speed: f64, batches: u64) -> AgentSpec {
        AgentSpec {
            proc_speed: speed,
            num_batches: batches,
            dataset_size: batches * 100,
        }
    }

    fn mixed() -> Vec<AgentSpec> {
        [40.0, 20.0, 10.0, 5.0, 2.0]
            .iter()
            .flat_map(|&s| [spec(s, 50), spec(s, 50)])
            .collect()
    }

    #[test]
    fn single_agent_runs_alone() {
        let cfg = config(vec![spec(2.0, 10)], BandwidthAssignment::Constant(1e6), 3);
        let r = run_comdml(&cfg).unwrap();
        assert_eq!(r.rounds.len(), 3);
        assert!(r.pairs.is_empty());
        assert_eq!(r.per_round_aggregation_s, vec![0.0; 3]);
        assert_eq!(r.cumulative_time_s, 15.0);
    }

    #[test]
    fn homogeneous_infinite_bandwidth_all_equal() {
        let cfg = config(
            vec![spec(4.0, 20); 4],
            BandwidthAssignment::Constant(f64::INFINITY),
            7,
        );
        let expected = 7.0 * 5.0;
        assert_eq!(run_comdml(&cfg).unwrap().cumulative_time_s, expected);
        for b in Baseline::ALL {
            assert_eq!(
                run_baseline(b.name(), &cfg).unwrap().cumulative_time_s,
                expected,
                "{}",
                b.name()
            );
        }
    }

    #[test]
    fn fedavg_matches_braintorrent_on_uniform_links() {
        let cfg = config(mixed(), BandwidthAssignment::Constant(2.5e6), 20);
        let f = run_baseline("fedavg", &cfg).unwrap();
        let b = run_baseline("braintorrent", &cfg).unwrap();
        assert_eq!(f.cumulative_time_s, b.cumulative_time_s);
    }

    #[test]
    fn unknown_baseline() {
        let cfg = config(mixed(), BandwidthAssignment::Constant(1e6), 1);
        assert_eq!(
            run_baseline("ps", &cfg).unwrap_err(),
            Error::UnknownBaseline("ps".into())
        );
    }

    #[test]
    fn comdml_beats_no_offload_on_mix() {
        let cfg = config(
            mixed(),
            BandwidthAssignment::AgentTiers(LINK_TIERS_BPS.to_vec()),
            10,
        );
        let c = run_comdml(&cfg).unwrap();
        let base = run_baseline("allreduce_no_offload", &cfg).unwrap();
        assert!(c.cumulative_time_s < base.cumulative_time_s);
        for (rc, rb) in c.rounds.iter().zip(&base.rounds) {
            assert!(rc.makespan_s <= rb.makespan_s);
        }
        assert!(!c.pairs.is_empty());
        for p in &c.pairs {
            assert!((p.est_s - p.sim_s).abs() <= 1e-9 * p.est_s);
        }
    }

    #[test]
    fn partial_transfer_only_adds_time() {
        let mut cfg = config(mixed(), BandwidthAssignment::Constant(2.5e6), 5);
        let plain = run_comdml(&cfg).unwrap();
        cfg.partial_model_transfer = true;
        let heavy = run_comdml(&cfg).unwrap();
        assert!(heavy.cumulative_time_s > plain.cumulative_time_s);
        assert!(heavy.pairs.iter().any(|p| p.sim_s > p.est_s));
    }

    #[test]
    fn churn_changes_exact_share_at_period() {
        let mut cfg = config(
            mixed(),
            BandwidthAssignment::AgentTiers(LINK_TIERS_BPS.to_vec()),
            1,
        );
        cfg.churn = Some(ChurnPolicy {
            fraction: 0.2,
            period_rounds: 100,
            seed: 9,
        });
        cfg.pool = ProfilePool {
            speeds: vec![40.0, 20.0, 10.0, 5.0, 2.0],
            links: LINK_TIERS_BPS.to_vec(),
        };
        let mut world = World::new(&cfg).unwrap();
        for r in 0..99 {
            assert!(world.finish_round(r).is_empty());
        }
        let before = world.agents().to_vec();
        let changed = world.finish_round(99);
        let after = world.agents();
        let differing: Vec<_> = (0..10).filter(|&i| before[i] != after[i]).collect();
        assert_eq!(differing.len(), 2);
        assert_eq!(differing, changed);
        assert!(after.iter().all(|a| a.proc_speed > 0.0));
    }

    #[test]
    fn sampling_share_and_determinism() {
        let mut cfg = config(mixed(), BandwidthAssignment::Constant(1e6), 6);
        cfg.sample_rate = 0.2;
        let a = run_comdml(&cfg).unwrap();
        assert!(a.participants.iter().all(|p| p.len() == 2));
        assert_eq!(a, run_comdml(&cfg).unwrap());
        let base = run_baseline("fedavg", &cfg).unwrap();
        assert_eq!(a.participants, base.participants);
    }

    #[test]
    fn isolated_agents_sit_out() {
        let mut cfg = config(mixed(), BandwidthAssignment::Constant(1e6), 2);
        cfg.topology.kind = TopologyKind::Random { p: 0.0 };
        let r = run_comdml(&cfg).unwrap();
        assert!(r.participants.iter().all(Vec::is_empty));
        assert_eq!(r.excluded[0].len(), 10);
        assert_eq!(r.cumulative_time_s, 0.0);
    }

    #[test]
    fn gossip_has_no_barrier() {
        let cfg = config(mixed(), BandwidthAssignment::Constant(1e9), 4);
        let g = run_baseline("gossip", &cfg).unwrap();
        let sum: f64 = g.rounds.iter().map(|r| r.makespan_s).sum();
        assert!(g.cumulative_time_s <= sum + 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = config(mixed(), BandwidthAssignment::Constant(1e6), 1);
        cfg.sample_rate = 0.0;
        assert!(run_comdml(&cfg).is_err());
        cfg.sample_rate = 1.0;
        cfg.churn = Some(ChurnPolicy {
            fraction: 1.5,
            period_rounds: 1,
            seed: 0,
        });
        assert!(matches!(run_comdml(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn ceil_share_guards_float_noise() {
        assert_eq!(ceil_share(0.2, 10), 2);
        assert_eq!(ceil_share(0.2, 11), 3);
        assert_eq!(ceil_share(1.0, 7), 7);
        assert_eq!(ceil_share(0.1, 3), 1);
    }
}
