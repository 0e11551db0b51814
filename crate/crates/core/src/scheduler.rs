//! Greedy slowest-first pairing scheduler.
//!
//! Each agent publishes its processing speed and individual training time.
//! Agents are visited in descending order of individual time; an unpaired
//! agent estimates, for every unpaired faster neighbour and every split
//! point, the time to finish its epoch if it offloaded the suffix, and pairs
//! with the neighbour giving the smallest estimate when that beats training
//! alone.

use crate::error::{Error, Result};
use crate::time_model::individual_time;
use crate::types::{AgentId, AgentProfile, Pair, PairingPlan, SplitProfile, SplitTable};

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub est_time_s: f64,
    pub best_split: usize,
    pub per_split: Vec<(usize, f64)>,
}

/// Estimated time for `i` to finish if it offloads to `j` over a link of `bandwidth` bytes/s.
pub fn agent_training_time(
    i: &AgentProfile,
    j: &AgentProfile,
    tau_hat_j: f64,
    bandwidth: f64,
    splits: &[SplitProfile],
) -> Result<EstimateResult> {
    if splits.is_empty() {
        return Err(Error::NoSplits);
    }
    if !(bandwidth > 0.0) {
        return Err(Error::BadBandwidth(bandwidth));
    }
    let batches = i.num_batches as f64;
    let per_split: Vec<(usize, f64)> = splits
        .iter()
        .map(|s| {
            let slow_speed = i.proc_speed / s.slow_frac;
            let fast_speed = j.proc_speed / s.fast_frac;
            let slow = batches / slow_speed;
            let chain = tau_hat_j + batches * s.interm_bytes / bandwidth + batches / fast_speed;
            (s.split_id, slow.max(chain))
        })
        .collect();

    // strict `<` keeps the smaller split id on ties, provided splits are listed ascending
    let mut best = per_split[0];
    for &cand in &per_split[1..] {
        if cand.1 < best.1 || (cand.1 == best.1 && cand.0 < best.0) {
            best = cand;
        }
    }
    Ok(EstimateResult {
        est_time_s: best.1,
        best_split: best.0,
        per_split,
    })
}

/// The value agent `j` broadcasts at the start of a round.
pub fn fast_agent_time_estimate(j: &AgentProfile) -> f64 {
    individual_time(j)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairingOptions {
    /// Minimum relative reduction required to pair: pair iff `est < (1 - threshold) * own`.
    pub improvement_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairEstimate {
    pub pair: Pair,
    pub est_time_s: f64,
    pub own_time_s: f64,
}

/// Plan plus the bookkeeping the simulator and CLI report on.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub plan: PairingPlan,
    pub estimates: Vec<PairEstimate>,
    /// Visiting order (descending individual time, ties by id).
    pub order: Vec<AgentId>,
}

pub fn greedy_pair(agents: &[AgentProfile], splits: &SplitTable) -> PairingPlan {
    schedule(agents, splits, PairingOptions::default()).plan
}

pub fn schedule(agents: &[AgentProfile], splits: &SplitTable, opts: PairingOptions) -> Schedule {
    // broadcast table of (p_j, tau_j), read synchronously by every agent
    let tau: Vec<f64> = agents.iter().map(fast_agent_time_estimate).collect();

    let mut order: Vec<usize> = (0..agents.len()).collect();
    order.sort_by(|&a, &b| {
        tau[b]
            .total_cmp(&tau[a])
            .then(agents[a].id.cmp(&agents[b].id))
    });

    let mut paired = vec![false; agents.len()];
    let mut plan = PairingPlan::default();
    let mut estimates = Vec::new();

    for &i in &order {
        if paired[i] {
            continue;
        }
        let me = &agents[i];
        let table = splits.for_agent(me.id);
        let mut best: Option<(usize, EstimateResult)> = None;
        for (j, other) in agents.iter().enumerate() {
            if j == i || paired[j] || tau[j] >= tau[i] {
                continue;
            }
            let Some(bw) = me.link_to(other.id) else {
                continue;
            };
            let Ok(est) = agent_training_time(me, other, tau[j], bw, table) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((bj, b)) => {
                    est.est_time_s < b.est_time_s
                        || (est.est_time_s == b.est_time_s && other.id < agents[*bj].id)
                }
            };
            if better {
                best = Some((j, est));
            }
        }

        match best {
            Some((j, est)) if est.est_time_s < (1.0 - opts.improvement_threshold) * tau[i] => {
                paired[i] = true;
                paired[j] = true;
                let pair = Pair {
                    slow: me.id,
                    fast: agents[j].id,
                    split_id: est.best_split,
                };
                plan.pairs.push(pair);
                estimates.push(PairEstimate {
                    pair,
                    est_time_s: est.est_time_s,
                    own_time_s: tau[i],
                });
            }
            _ => {
                paired[i] = true;
                plan.independents.push(me.id);
            }
        }
    }

    Schedule {
        plan,
        estimates,
        order: order.iter().map(|&i| agents[i].id).collect(),
    }
}
