//! Domain types shared by the scheduler, the exact solver and the simulator.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub type AgentId = usize;

/// Compute and network resources of one agent for a single round.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentProfile {
    pub id: AgentId,
    /// Batches per second when training the full, unsplit model.
    pub proc_speed: f64,
    /// Number of local batches in one epoch.
    pub num_batches: u64,
    /// Number of local samples; used as the aggregation weight.
    pub dataset_size: u64,
    /// Outgoing bandwidth in bytes per second. A missing peer means no link.
    pub links: BTreeMap<AgentId, f64>,
}

impl AgentProfile {
    pub fn new(id: AgentId, proc_speed: f64, num_batches: u64) -> Self {
        Self {
            id,
            proc_speed,
            num_batches,
            dataset_size: 0,
            links: BTreeMap::new(),
        }
    }

    pub fn with_dataset_size(mut self, samples: u64) -> Self {
        self.dataset_size = samples;
        self
    }

    pub fn with_link(mut self, peer: AgentId, bandwidth: f64) -> Self {
        self.links.insert(peer, bandwidth);
        self
    }

    pub fn link_to(&self, peer: AgentId) -> Option<f64> {
        self.links.get(&peer).copied()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.proc_speed > 0.0) {
            return Err(Error::InvalidAgent(format!(
                "agent {}: proc_speed must be > 0, got {}",
                self.id, self.proc_speed
            )));
        }
        if self.links.contains_key(&self.id) {
            return Err(Error::InvalidAgent(format!(
                "agent {} links to itself",
                self.id
            )));
        }
        if let Some((peer, bw)) = self.links.iter().find(|(_, bw)| !(**bw > 0.0)) {
            return Err(Error::InvalidAgent(format!(
                "agent {}: link to {} has non-positive bandwidth {}",
                self.id, peer, bw
            )));
        }
        Ok(())
    }
}

/// Relative cost of splitting the model after layer `split_id`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitProfile {
    pub split_id: usize,
    /// Slow-side training time as a fraction of the full model (includes the auxiliary head).
    pub slow_frac: f64,
    /// Fast-side training time as a fraction of the full model.
    pub fast_frac: f64,
    /// Intermediate bytes shipped per batch.
    pub interm_bytes: f64,
}

/// Upper bound on `slow_frac`; the auxiliary head may push it past 1.
pub const SLOW_FRAC_CAP: f64 = 1.5;

impl SplitProfile {
    pub fn new(split_id: usize, slow_frac: f64, fast_frac: f64, interm_bytes: f64) -> Self {
        Self {
            split_id,
            slow_frac,
            fast_frac,
            interm_bytes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.split_id >= 1
            && self.slow_frac > 0.0
            && self.slow_frac <= SLOW_FRAC_CAP
            && self.fast_frac > 0.0
            && self.fast_frac <= 1.0
            && self.interm_bytes >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("bad split profile {self:?}")))
        }
    }
}

/// Split profiles available to each slow agent. Most runs share one table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SplitTable {
    shared: Vec<SplitProfile>,
    per_agent: BTreeMap<AgentId, Vec<SplitProfile>>,
}

impl SplitTable {
    pub fn shared(splits: Vec<SplitProfile>) -> Self {
        Self {
            shared: splits,
            per_agent: BTreeMap::new(),
        }
    }

    pub fn with_agent(mut self, id: AgentId, splits: Vec<SplitProfile>) -> Self {
        self.per_agent.insert(id, splits);
        self
    }

    pub fn for_agent(&self, id: AgentId) -> &[SplitProfile] {
        self.per_agent.get(&id).unwrap_or(&self.shared)
    }

    pub fn find(&self, id: AgentId, split_id: usize) -> Option<&SplitProfile> {
        self.for_agent(id).iter().find(|s| s.split_id == split_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    pub slow: AgentId,
    pub fast: AgentId,
    pub split_id: usize,
}

/// One round's offloading decisions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairingPlan {
    pub pairs: Vec<Pair>,
    pub independents: Vec<AgentId>,
}

impl PairingPlan {
    pub fn all_independent(ids: impl IntoIterator<Item = AgentId>) -> Self {
        Self {
            pairs: Vec::new(),
            independents: ids.into_iter().collect(),
        }
    }

    /// Checks that the plan partitions `agents` and that nobody both offloads and helps.
    pub fn validate(&self, agents: &[AgentId]) -> Result<()> {
        let expected: BTreeSet<AgentId> = agents.iter().copied().collect();
        if expected.len() != agents.len() {
            return Err(Error::InvalidPlan("duplicate agent ids".into()));
        }
        let mut seen = BTreeSet::new();
        let members = self
            .pairs
            .iter()
            .flat_map(|p| [p.slow, p.fast])
            .chain(self.independents.iter().copied());
        for id in members {
            if !expected.contains(&id) {
                return Err(Error::InvalidPlan(format!("unknown agent {id}")));
            }
            if !seen.insert(id) {
                return Err(Error::InvalidPlan(format!(
                    "agent {id} appears more than once"
                )));
            }
        }
        if seen.len() != expected.len() {
            let missing: Vec<_> = expected.difference(&seen).collect();
            return Err(Error::InvalidPlan(format!(
                "agents {missing:?} missing from plan"
            )));
        }
        Ok(())
    }

    pub fn pair_of(&self, id: AgentId) -> Option<&Pair> {
        self.pairs.iter().find(|p| p.slow == id || p.fast == id)
    }

    /// Canonical ordering used for tie-breaking and deterministic output.
    pub fn normalized(mut self) -> Self {
        self.pairs.sort();
        self.independents.sort_unstable();
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AgentTimes {
    pub compute_s: f64,
    pub comm_s: f64,
    pub idle_s: f64,
    pub total_s: f64,
}

/// Per-agent times for one round against the round barrier.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundReport {
    pub per_agent: BTreeMap<AgentId, AgentTimes>,
    pub makespan_s: f64,
}

impl RoundReport {
    /// Builds a report from per-agent busy totals; `busy` maps id to (compute, comm, total).
    pub fn from_busy(busy: impl IntoIterator<Item = (AgentId, f64, f64, f64)>) -> Self {
        let mut per_agent: BTreeMap<AgentId, AgentTimes> = busy
            .into_iter()
            .map(|(id, compute_s, comm_s, total_s)| {
                (
                    id,
                    AgentTimes {
                        compute_s,
                        comm_s,
                        idle_s: 0.0,
                        total_s,
                    },
                )
            })
            .collect();
        let makespan_s = per_agent.values().map(|t| t.total_s).fold(0.0, f64::max);
        for t in per_agent.values_mut() {
            t.idle_s = makespan_s - t.total_s;
        }
        Self {
            per_agent,
            makespan_s,
        }
    }

    /// Re-derives makespan and idle times after totals were edited in place.
    pub fn rebarrier(&mut self) {
        self.makespan_s = self
            .per_agent
            .values()
            .map(|t| t.total_s)
            .fold(0.0, f64::max);
        for t in self.per_agent.values_mut() {
            t.idle_s = self.makespan_s - t.total_s;
        }
    }
}
