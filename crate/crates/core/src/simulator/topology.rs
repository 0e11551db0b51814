//! Undirected agent graphs with per-edge bandwidth.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::AgentId;

/// 10, 20, 50 and 100 Mbps in bytes per second (1 Mbps = 125 000 B/s).
pub const LINK_TIERS_BPS: [f64; 4] = [1.25e6, 2.5e6, 6.25e6, 12.5e6];

pub const BYTES_PER_MBPS: f64 = 125_000.0;

#[derive(Debug, Clone, PartialEq)]
pub enum TopologyKind {
    Full,
    /// Each unordered pair is connected independently with probability `p`.
    Random {
        p: f64,
    },
    Ring,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BandwidthAssignment {
    Constant(f64),
    /// Each agent draws a NIC speed from the tiers; an edge runs at the slower endpoint.
    AgentTiers(Vec<f64>),
    /// Each edge draws its own speed from the tiers.
    EdgeTiers(Vec<f64>),
}

impl BandwidthAssignment {
    fn validate(&self) -> Result<()> {
        let bad = |v: &f64| !(*v > 0.0);
        match self {
            Self::Constant(c) if bad(c) => Err(Error::BadBandwidth(*c)),
            Self::AgentTiers(t) | Self::EdgeTiers(t) if t.is_empty() => {
                Err(Error::Config("bandwidth tier list is empty".into()))
            }
            Self::AgentTiers(t) | Self::EdgeTiers(t) => match t.iter().find(|v| bad(v)) {
                Some(v) => Err(Error::BadBandwidth(*v)),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub kind: TopologyKind,
    pub seed: u64,
    pub bandwidth: BandwidthAssignment,
}

impl Topology {
    pub fn full(bandwidth: BandwidthAssignment, seed: u64) -> Self {
        Self {
            kind: TopologyKind::Full,
            seed,
            bandwidth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let TopologyKind::Random { p } = self.kind {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "topology.edge_probability must lie in [0, 1], got {p}"
                )));
            }
        }
        self.bandwidth.validate()
    }

    pub fn realize(&self, k: usize) -> Result<Network> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut edges = BTreeSet::new();
        match self.kind {
            TopologyKind::Full => {
                for a in 0..k {
                    for b in a + 1..k {
                        edges.insert((a, b));
                    }
                }
            }
            TopologyKind::Ring => {
                if k >= 2 {
                    for a in 0..k {
                        let b = (a + 1) % k;
                        edges.insert((a.min(b), a.max(b)));
                    }
                }
            }
            TopologyKind::Random { p } => {
                for a in 0..k {
                    for b in a + 1..k {
                        if rng.random_bool(p) {
                            edges.insert((a, b));
                        }
                    }
                }
            }
        }

        let mut nic = vec![f64::INFINITY; k];
        let mut edge_bw = BTreeMap::new();
        match &self.bandwidth {
            BandwidthAssignment::Constant(c) => {
                for &e in &edges {
                    edge_bw.insert(e, *c);
                }
            }
            BandwidthAssignment::AgentTiers(tiers) => {
                for slot in nic.iter_mut() {
                    *slot = *tiers.choose(&mut rng).expect("validated non-empty");
                }
            }
            BandwidthAssignment::EdgeTiers(tiers) => {
                for &e in &edges {
                    edge_bw.insert(e, *tiers.choose(&mut rng).expect("validated non-empty"));
                }
            }
        }

        let mut neighbors = vec![BTreeSet::new(); k];
        for &(a, b) in &edges {
            neighbors[a].insert(b);
            neighbors[b].insert(a);
        }
        Ok(Network {
            neighbors,
            edge_bw,
            nic,
            per_agent: matches!(self.bandwidth, BandwidthAssignment::AgentTiers(_)),
        })
    }
}

/// A realized topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    neighbors: Vec<BTreeSet<AgentId>>,
    edge_bw: BTreeMap<(AgentId, AgentId), f64>,
    nic: Vec<f64>,
    per_agent: bool,
}

impl Network {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn degree(&self, a: AgentId) -> usize {
        self.neighbors[a].len()
    }

    pub fn neighbors(&self, a: AgentId) -> impl Iterator<Item = AgentId> + '_ {
        self.neighbors[a].iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn bandwidth(&self, a: AgentId, b: AgentId) -> Option<f64> {
        if !self.neighbors.get(a)?.contains(&b) {
            return None;
        }
        if self.per_agent {
            Some(self.nic[a].min(self.nic[b]))
        } else {
            self.edge_bw.get(&(a.min(b), a.max(b))).copied()
        }
    }

    /// Links from `a` to the members of `among`.
    pub fn links_within(&self, a: AgentId, among: &BTreeSet<AgentId>) -> BTreeMap<AgentId, f64> {
        self.neighbors(a)
            .filter(|b| among.contains(b))
            .filter_map(|b| self.bandwidth(a, b).map(|bw| (b, bw)))
            .collect()
    }

    /// NIC speed when bandwidth is assigned per agent.
    pub fn nic(&self, a: AgentId) -> Option<f64> {
        self.per_agent.then(|| self.nic[a])
    }

    pub fn set_nic(&mut self, a: AgentId, bps: f64) {
        if self.per_agent {
            self.nic[a] = bps;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_ring() {
        let full = Topology::full(BandwidthAssignment::Constant(5.0), 1)
            .realize(5)
            .unwrap();
        assert_eq!(full.edge_count(), 10);
        assert_eq!(full.bandwidth(0, 4), Some(5.0));
        assert_eq!(full.bandwidth(4, 0), Some(5.0));
        assert_eq!(full.bandwidth(2, 2), None);

        let ring = Topology {
            kind: TopologyKind::Ring,
            seed: 0,
            bandwidth: BandwidthAssignment::Constant(1.0),
        }
        .realize(5)
        .unwrap();
        assert_eq!(ring.edge_count(), 5);
        assert!((0..5).all(|a| ring.degree(a) == 2));
        assert_eq!(ring.bandwidth(0, 2), None);
    }

    #[test]
    fn random_is_seeded_and_undirected() {
        let t = Topology {
            kind: TopologyKind::Random { p: 0.2 },
            seed: 42,
            bandwidth: BandwidthAssignment::EdgeTiers(LINK_TIERS_BPS.to_vec()),
        };
        let a = t.realize(40).unwrap();
        assert_eq!(a, t.realize(40).unwrap());
        for x in 0..40 {
            for y in a.neighbors(x) {
                assert_eq!(a.bandwidth(x, y), a.bandwidth(y, x));
                assert!(LINK_TIERS_BPS.contains(&a.bandwidth(x, y).unwrap()));
            }
        }
        let frac = a.edge_count() as f64 / (40.0 * 39.0 / 2.0);
        assert!((0.12..0.28).contains(&frac), "edge fraction {frac}");
    }

    #[test]
    fn agent_tiers_take_slower_endpoint() {
        let mut n = Topology::full(BandwidthAssignment::AgentTiers(vec![1.0, 9.0]), 3)
            .realize(3)
            .unwrap();
        n.set_nic(0, 1.0);
        n.set_nic(1, 9.0);
        n.set_nic(2, 9.0);
        assert_eq!(n.bandwidth(0, 1), Some(1.0));
        assert_eq!(n.bandwidth(1, 2), Some(9.0));
    }

    #[test]
    fn rejects_bad_settings() {
        let bad_p = Topology {
            kind: TopologyKind::Random { p: 1.5 },
            seed: 0,
            bandwidth: BandwidthAssignment::Constant(1.0),
        };
        assert!(bad_p.realize(3).is_err());
        assert!(Topology::full(BandwidthAssignment::Constant(0.0), 0)
            .realize(3)
            .is_err());
        assert!(Topology::full(BandwidthAssignment::EdgeTiers(vec![]), 0)
            .realize(3)
            .is_err());
    }
}
