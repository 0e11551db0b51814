//! Exact min-makespan solver over 1-to-1 pairings, for small instances.
//!
//! Every directed matching (helper strictly faster, link required) is
//! enumerated. For a fixed matching the makespan is a max over independent
//! pair terms, so the optimal split of each pair is found per pair; this
//! covers the full cross product of split choices, which is what
//! `plans_examined` counts.

use crate::error::{Error, Result};
use crate::time_model::{individual_time, pair_time, plan_makespan};
use crate::types::{AgentProfile, Pair, PairingPlan, SplitTable};

pub const MAX_ORACLE_AGENTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_plan: PairingPlan,
    pub best_makespan_s: f64,
    pub plans_examined: u128,
}

struct Candidate {
    makespan: f64,
    plan: PairingPlan,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        if self.makespan != other.makespan {
            return self.makespan < other.makespan;
        }
        if self.plan.pairs.len() != other.plan.pairs.len() {
            return self.plan.pairs.len() < other.plan.pairs.len();
        }
        self.plan.pairs < other.plan.pairs
    }
}

pub fn solve_exact(agents: &[AgentProfile], splits: &SplitTable) -> Result<OracleResult> {
    if agents.len() > MAX_ORACLE_AGENTS {
        return Err(Error::TooLarge {
            agents: agents.len(),
            max: MAX_ORACLE_AGENTS,
        });
    }
    let mut sorted: Vec<&AgentProfile> = agents.iter().collect();
    sorted.sort_by_key(|a| a.id);
    let tau: Vec<f64> = sorted.iter().map(|a| individual_time(a)).collect();

    // pair_best[a][b]: best (makespan, split_list) when a offloads to b, if allowed
    let k = sorted.len();
    let mut options: Vec<Vec<Option<SplitTimes>>> = vec![vec![None; k]; k];
    for a in 0..k {
        for b in 0..k {
            if a == b || tau[b] >= tau[a] || sorted[a].link_to(sorted[b].id).is_none() {
                continue;
            }
            let mut per_split = Vec::new();
            for s in splits.for_agent(sorted[a].id) {
                let t = pair_time(sorted[a], sorted[b], s, tau[b])?;
                per_split.push((s.split_id, t.makespan()));
            }
            if !per_split.is_empty() {
                per_split.sort_by_key(|&(m, _)| m);
                options[a][b] = Some(per_split);
            }
        }
    }

    let mut search = Search {
        tau: &tau,
        options: &options,
        ids: sorted.iter().map(|a| a.id).collect(),
        used: vec![false; k],
        pairs: Vec::new(),
        best: None,
        examined: 0,
    };
    search.recurse(0);

    let best = search.best.expect("the all-independent plan always exists");
    let examined = search.examined;
    let report = plan_makespan(agents, &best.plan, splits)?;
    Ok(OracleResult {
        best_plan: best.plan,
        best_makespan_s: report.makespan_s,
        plans_examined: examined,
    })
}

/// `(split_id, pair makespan)` for every split a pair may use.
type SplitTimes = Vec<(usize, f64)>;

struct Search<'a> {
    tau: &'a [f64],
    options: &'a [Vec<Option<SplitTimes>>],
    ids: Vec<usize>,
    used: Vec<bool>,
    pairs: Vec<(usize, usize)>,
    best: Option<Candidate>,
    examined: u128,
}

impl Search<'_> {
    fn recurse(&mut self, start: usize) {
        let k = self.used.len();
        let Some(a) = (start..k).find(|&i| !self.used[i]) else {
            self.evaluate();
            return;
        };
        self.used[a] = true;
        self.recurse(a + 1);
        for b in a + 1..k {
            if self.used[b] {
                continue;
            }
            let edge = if self.options[a][b].is_some() {
                Some((a, b))
            } else if self.options[b][a].is_some() {
                Some((b, a))
            } else {
                None
            };
            if let Some(edge) = edge {
                self.used[b] = true;
                self.pairs.push(edge);
                self.recurse(a + 1);
                self.pairs.pop();
                self.used[b] = false;
            }
        }
        self.used[a] = false;
    }

    fn evaluate(&mut self) {
        let mut combos: u128 = 1;
        let mut in_pair = vec![false; self.used.len()];
        let mut makespan = 0.0f64;
        for &(s, f) in &self.pairs {
            in_pair[s] = true;
            in_pair[f] = true;
            let opts = self.options[s][f].as_ref().expect("edge exists");
            combos *= opts.len() as u128;
            let pair_best = opts.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
            makespan = makespan.max(pair_best);
        }
        for (i, t) in self.tau.iter().enumerate() {
            if !in_pair[i] {
                makespan = makespan.max(*t);
            }
        }
        self.examined += combos;

        // smallest split per pair that still meets the matching's makespan
        let mut pairs: Vec<Pair> = self
            .pairs
            .iter()
            .map(|&(s, f)| {
                let opts = self.options[s][f].as_ref().expect("edge exists");
                let m = opts
                    .iter()
                    .find(|o| o.1 <= makespan)
                    .expect("pair optimum is within makespan")
                    .0;
                Pair {
                    slow: self.ids[s],
                    fast: self.ids[f],
                    split_id: m,
                }
            })
            .collect();
        pairs.sort();
        let independents = (0..self.used.len())
            .filter(|&i| !in_pair[i])
            .map(|i| self.ids[i])
            .collect();
        let cand = Candidate {
            makespan,
            plan: PairingPlan {
                pairs,
                independents,
            },
        };
        if self.best.as_ref().is_none_or(|b| cand.beats(b)) {
            self.best = Some(cand);
        }
    }
}
