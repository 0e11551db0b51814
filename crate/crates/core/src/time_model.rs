//! Analytical per-round time model.
//!
//! An agent either trains alone, offloads the suffix of its model to one
//! faster helper, or helps one slower agent. Transfer time for the
//! intermediate activations is charged to the helper's timeline, which is
//! also where it bounds completion of the offloaded work.

use crate::error::{Error, Result};
use crate::types::{AgentProfile, PairingPlan, RoundReport, SplitProfile, SplitTable};

/// Seconds for `a` to train one epoch of the full model alone.
pub fn individual_time(a: &AgentProfile) -> f64 {
    a.num_batches as f64 / a.proc_speed
}

/// Breakdown of a slow/fast pair's round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTimes {
    pub slow_total: f64,
    pub fast_total: f64,
    /// Helper's own-task time that was passed in.
    pub fast_own_s: f64,
    /// Transfer time of the intermediate activations.
    pub comm_s: f64,
    /// Helper's compute on the offloaded suffix.
    pub offloaded_compute_s: f64,
}

impl PairTimes {
    pub fn makespan(&self) -> f64 {
        self.slow_total.max(self.fast_total)
    }
}

pub fn pair_time(
    slow: &AgentProfile,
    fast: &AgentProfile,
    split: &SplitProfile,
    fast_own_time: f64,
) -> Result<PairTimes> {
    let bandwidth = slow.link_to(fast.id).ok_or(Error::MissingLink {
        from: slow.id,
        to: fast.id,
    })?;
    let batches = slow.num_batches as f64;
    let slow_speed = slow.proc_speed / split.slow_frac;
    let fast_speed = fast.proc_speed / split.fast_frac;
    let slow_total = batches / slow_speed;
    let comm_s = batches * split.interm_bytes / bandwidth;
    let offloaded_compute_s = batches / fast_speed;
    Ok(PairTimes {
        slow_total,
        fast_total: fast_own_time + comm_s + offloaded_compute_s,
        fast_own_s: fast_own_time,
        comm_s,
        offloaded_compute_s,
    })
}

/// Evaluates the round objective (slowest agent's time) for a plan.
pub fn plan_makespan(
    agents: &[AgentProfile],
    plan: &PairingPlan,
    splits: &SplitTable,
) -> Result<RoundReport> {
    let ids: Vec<_> = agents.iter().map(|a| a.id).collect();
    plan.validate(&ids)?;
    let by_id = |id| agents.iter().find(|a| a.id == id).expect("validated");

    let mut busy = Vec::with_capacity(agents.len());
    for &id in &plan.independents {
        let t = individual_time(by_id(id));
        busy.push((id, t, 0.0, t));
    }
    for p in &plan.pairs {
        let (slow, fast) = (by_id(p.slow), by_id(p.fast));
        let split = splits.find(p.slow, p.split_id).ok_or_else(|| {
            Error::InvalidPlan(format!("agent {} has no split {}", p.slow, p.split_id))
        })?;
        let own = individual_time(fast);
        let t = pair_time(slow, fast, split, own)?;
        busy.push((p.slow, t.slow_total, 0.0, t.slow_total));
        busy.push((p.fast, own + t.offloaded_compute_s, t.comm_s, t.fast_total));
    }
    Ok(RoundReport::from_busy(busy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Pair;
    use proptest::prelude::*;

    fn agent(id: usize, batches: u64, speed: f64) -> AgentProfile {
        AgentProfile::new(id, speed, batches)
    }

    #[test]
    fn individual_time_examples() {
        assert_eq!(individual_time(&agent(0, 0, 2.0)), 0.0);
        assert_eq!(individual_time(&agent(0, 10, 2.0)), 5.0);
        assert!((individual_time(&agent(0, 500, 0.2)) - 2500.0).abs() < 1e-9);
    }

    #[test]
    fn pair_time_examples() {
        let slow = agent(0, 10, 2.0).with_link(1, 123.0);
        let fast = agent(1, 10, 2.0);
        let t = pair_time(&slow, &fast, &SplitProfile::new(1, 1.0, 1.0, 0.0), 5.0).unwrap();
        assert_eq!((t.slow_total, t.fast_total), (5.0, 10.0));

        let sp = SplitProfile::new(1, 0.5, 0.5, 1e6);
        let fast = agent(1, 0, 4.0);
        let slow = agent(0, 10, 2.0).with_link(1, 1e6);
        let t = pair_time(&slow, &fast, &sp, 1.0).unwrap();
        assert_eq!(t.slow_total, 2.5);
        assert!((t.fast_total - 12.25).abs() < 1e-12);

        let slow = agent(0, 10, 2.0).with_link(1, 1e9);
        let t = pair_time(&slow, &fast, &sp, 1.0).unwrap();
        assert_eq!(t.slow_total, 2.5);
        assert!((t.fast_total - 2.26).abs() < 1e-12);
    }

    #[test]
    fn pair_time_needs_link() {
        let err = pair_time(
            &agent(0, 1, 1.0),
            &agent(1, 1, 1.0),
            &SplitProfile::new(1, 0.5, 0.5, 0.0),
            0.0,
        )
        .unwrap_err();
        assert_eq!(err, Error::MissingLink { from: 0, to: 1 });
    }

    #[test]
    fn makespan_examples() {
        let agents = vec![agent(0, 5, 1.0), agent(1, 3, 1.0), agent(2, 1, 1.0)];
        let plan = PairingPlan::all_independent([0, 1, 2]);
        let r = plan_makespan(&agents, &plan, &SplitTable::default()).unwrap();
        assert_eq!(r.makespan_s, 5.0);

        let agents = vec![
            agent(0, 10, 2.0).with_link(1, 1e6),
            agent(1, 4, 4.0),
            agent(2, 3, 1.0),
            agent(3, 1, 1.0),
        ];
        let plan = PairingPlan {
            pairs: vec![Pair {
                slow: 0,
                fast: 1,
                split_id: 1,
            }],
            independents: vec![2, 3],
        };
        let splits = SplitTable::shared(vec![SplitProfile::new(1, 0.5, 0.5, 1e6)]);
        let r = plan_makespan(&agents, &plan, &splits).unwrap();
        let totals: Vec<f64> = r.per_agent.values().map(|t| t.total_s).collect();
        assert_eq!(totals[0], 2.5);
        assert!((totals[1] - 12.25).abs() < 1e-12);
        assert_eq!(&totals[2..], &[3.0, 1.0]);
        assert!((r.makespan_s - 12.25).abs() < 1e-12);

        let empty = plan_makespan(&[], &PairingPlan::default(), &splits).unwrap();
        assert_eq!(empty.makespan_s, 0.0);
    }

    #[test]
    fn makespan_rejects_bad_plans() {
        let agents = vec![agent(0, 5, 1.0).with_link(1, 1.0), agent(1, 3, 1.0)];
        let splits = SplitTable::shared(vec![SplitProfile::new(1, 0.5, 0.5, 0.0)]);
        let missing = PairingPlan::all_independent([0]);
        assert!(matches!(
            plan_makespan(&agents, &missing, &splits),
            Err(Error::InvalidPlan(_))
        ));
        let bad_split = PairingPlan {
            pairs: vec![Pair {
                slow: 0,
                fast: 1,
                split_id: 7,
            }],
            independents: vec![],
        };
        assert!(matches!(
            plan_makespan(&agents, &bad_split, &splits),
            Err(Error::InvalidPlan(_))
        ));
        let no_link = PairingPlan {
            pairs: vec![Pair {
                slow: 1,
                fast: 0,
                split_id: 1,
            }],
            independents: vec![],
        };
        assert!(matches!(
            plan_makespan(&agents, &no_link, &splits),
            Err(Error::MissingLink { .. })
        ));
    }

    fn split_strategy() -> impl Strategy<Value = SplitProfile> {
        (0.01f64..1.5, 0.01f64..1.0, 0.0f64..1e7)
            .prop_map(|(s, f, nu)| SplitProfile::new(1, s, f, nu))
    }

    proptest! {
        #[test]
        fn pair_time_monotone(
            sp in split_strategy(),
            n in 0u64..1000,
            p_slow in 0.1f64..50.0,
            p_fast in 0.1f64..50.0,
            c in 1e3f64..1e9,
            own in 0.0f64..100.0,
            scale in 1.0f64..10.0,
        ) {
            let fast = agent(1, 0, p_fast);
            let slow = agent(0, n, p_slow).with_link(1, c);
            let base = pair_time(&slow, &fast, &sp, own).unwrap();

            let wider = agent(0, n, p_slow).with_link(1, c * scale);
            prop_assert!(pair_time(&wider, &fast, &sp, own).unwrap().fast_total <= base.fast_total);

            let quicker_fast = agent(1, 0, p_fast * scale);
            prop_assert!(pair_time(&slow, &quicker_fast, &sp, own).unwrap().fast_total <= base.fast_total);

            let quicker_slow = agent(0, n, p_slow * scale).with_link(1, c);
            prop_assert!(pair_time(&quicker_slow, &fast, &sp, own).unwrap().slow_total <= base.slow_total);
        }

        #[test]
        fn no_split_degenerates_to_individual(n_s in 0u64..500, n_f in 0u64..500, ps in 0.1f64..10.0, pf in 0.1f64..10.0) {
            let slow = agent(0, n_s, ps).with_link(1, 1.0);
            let fast = agent(1, n_f, pf);
            let own = individual_time(&fast);
            let t = pair_time(&slow, &fast, &SplitProfile::new(1, 1.0, 1.0, 0.0), own).unwrap();
            prop_assert_eq!(t.slow_total, individual_time(&slow));
            prop_assert!((t.fast_total - (own + n_s as f64 / pf)).abs() <= 1e-9 * t.fast_total.max(1.0));
        }

        #[test]
        fn makespan_permutation_invariant(
            specs in prop::collection::vec((0u64..200, 0.1f64..10.0), 1..8),
            rot in 0usize..8,
        ) {
            let agents: Vec<_> = specs.iter().enumerate().map(|(i, &(n, p))| agent(i, n, p)).collect();
            let plan = PairingPlan::all_independent(0..agents.len());
            let expected = agents.iter().map(individual_time).fold(0.0, f64::max);
            let mut shuffled = agents.clone();
            let k = shuffled.len();
            shuffled.rotate_left(rot % k);
            shuffled.reverse();
            let a = plan_makespan(&agents, &plan, &SplitTable::default()).unwrap();
            let b = plan_makespan(&shuffled, &plan, &SplitTable::default()).unwrap();
            prop_assert_eq!(a.makespan_s, expected);
            prop_assert_eq!(a, b);
        }
    }
}
