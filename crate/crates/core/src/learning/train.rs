//! Round loop for the toy split-training engine.
//!
//! Each round the scheduler pairs agents from their timing profiles. An
//! independent agent trains its full model for one local epoch. In a pair,
//! the slow agent trains its prefix against its auxiliary head while the
//! helper, after its own epoch, trains the slow agent's suffix on the
//! forwarded activations. The slow agent's model is then reassembled from its
//! prefix and the helper-trained suffix, and all models are averaged.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::learning::aggregate::aggregate;
use crate::learning::data::{MixtureSpec, SyntheticDataset};
use crate::learning::drift::{drift_estimate, DriftEstimate, DEFAULT_DRIFT_BINS};
use crate::learning::net::{
    fast_side_step, full_loss, full_step, predict, slow_side_step, Dense, SplitNet,
};
use crate::profiler::{profile_splits, LayerSpec, ModelSpec};
use crate::scheduler::{schedule, PairingOptions};
use crate::simulator::derive_seed;
use crate::types::{AgentId, AgentProfile, Pair, SplitTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanSource {
    ComDml,
    NoOffload,
}

/// Constant rate with multiplicative decay on a loss plateau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub initial: f64,
    pub decay_factor: f64,
    /// Rounds without improvement before decaying.
    pub plateau_rounds: usize,
    pub min_improvement: f64,
}

impl Default for LrSchedule {
    fn default() -> Self {
        Self {
            initial: 0.001,
            decay_factor: 0.2,
            plateau_rounds: 10,
            min_improvement: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    /// Timing profiles; batch counts and sample counts are replaced from the data partition.
    pub agents: Vec<AgentProfile>,
    pub hidden: Vec<usize>,
    pub data: MixtureSpec,
    /// Dirichlet concentration for label skew; `None` splits i.i.d.
    pub label_skew: Option<f64>,
    pub plan_source: PlanSource,
    pub rounds: usize,
    pub lr: LrSchedule,
    pub batch_size: usize,
    pub seed: u64,
    pub uniform_average: bool,
    pub improvement_threshold: f64,
    pub drift_bins: usize,
    /// Split point reported as the headline drift value.
    pub drift_split: usize,
    pub probe_samples: usize,
}

impl TrainingConfig {
    pub fn new(agents: Vec<AgentProfile>, data: MixtureSpec) -> Self {
        Self {
            agents,
            hidden: vec![32, 32, 16],
            data,
            label_skew: None,
            plan_source: PlanSource::ComDml,
            rounds: 50,
            lr: LrSchedule::default(),
            batch_size: 100,
            seed: 0,
            uniform_average: false,
            improvement_threshold: 0.0,
            drift_bins: DEFAULT_DRIFT_BINS,
            drift_split: 1,
            probe_samples: 500,
        }
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.data.dim];
        w.extend(&self.hidden);
        w.push(self.data.classes);
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    /// 0 is the untrained model; training rounds count from 1.
    pub round: usize,
    pub loss: f64,
    pub accuracy: f64,
    pub lr: f64,
    pub pairs: Vec<Pair>,
    /// One estimate per split point, ascending.
    pub drift: Vec<DriftEstimate>,
}

impl RoundMetrics {
    pub fn drift_at(&self, split: usize) -> Option<f64> {
        self.drift
            .iter()
            .find(|d| d.split == split)
            .map(|d| d.distance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub rounds: Vec<RoundMetrics>,
    pub drift_split: usize,
}

impl TrainingReport {
    pub fn final_metrics(&self) -> &RoundMetrics {
        self.rounds.last().expect("round 0 is always present")
    }
}

/// Cost table for the dense network: cost ~ multiply-adds, activations in f64.
pub fn dense_model_spec(widths: &[usize], batch_size: usize) -> ModelSpec {
    let layers = widths
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let params = (w[0] * w[1] + w[1]) as f64;
            LayerSpec::new(
                format!("dense{}", i + 1),
                params,
                (w[1] * batch_size * 8) as f64,
                params * 8.0,
            )
        })
        .collect();
    ModelSpec {
        aux_out_classes: *widths.last().unwrap_or(&2),
        ..ModelSpec::new(layers, 0.0)
    }
}

struct AgentData {
    inputs: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

impl AgentData {
    fn batches(&self, batch_size: usize, seed: u64) -> Vec<(Vec<Vec<f64>>, Vec<usize>)> {
        let mut order: Vec<usize> = (0..self.labels.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        order
            .chunks(batch_size)
            .map(|c| {
                (
                    c.iter().map(|&i| self.inputs[i].clone()).collect(),
                    c.iter().map(|&i| self.labels[i]).collect(),
                )
            })
            .collect()
    }
}

enum Unit {
    Alone(AgentId),
    Pair(Pair),
}

struct UnitResult {
    models: Vec<(AgentId, SplitNet)>,
}

pub fn run_training(cfg: &TrainingConfig) -> Result<TrainingReport> {
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch_size must be >= 1".into()));
    }
    if cfg.agents.is_empty() {
        return Err(Error::Config("training needs at least one agent".into()));
    }
    let widths = cfg.widths();
    let depth = widths.len() - 1;
    if depth < 2 {
        return Err(Error::Config(
            "network needs at least one hidden layer to split".into(),
        ));
    }
    if cfg.drift_split == 0 || cfg.drift_split >= depth {
        return Err(Error::Config(format!(
            "drift_split must lie in 1..{depth}, got {}",
            cfg.drift_split
        )));
    }

    let dataset = SyntheticDataset::generate(&cfg.data)?;
    let k = cfg.agents.len();
    let parts = dataset.partition(k, cfg.label_skew, derive_seed(cfg.seed, 0x5041_5254))?;
    let data: Vec<AgentData> = parts
        .iter()
        .map(|idx| AgentData {
            inputs: idx.iter().map(|&i| dataset.samples[i].x.clone()).collect(),
            labels: idx.iter().map(|&i| dataset.samples[i].y).collect(),
        })
        .collect();

    // agents are addressed by position; ids in profiles become positions
    let timing: Vec<AgentProfile> = cfg
        .agents
        .iter()
        .zip(&parts)
        .map(|(a, p)| AgentProfile {
            num_batches: p.len().div_ceil(cfg.batch_size) as u64,
            dataset_size: p.len() as u64,
            ..a.clone()
        })
        .collect();
    for (pos, a) in timing.iter().enumerate() {
        if a.id != pos {
            return Err(Error::Config(format!(
                "agent at position {pos} has id {}",
                a.id
            )));
        }
        a.validate()?;
    }
    let splits = SplitTable::shared(profile_splits(&dense_model_spec(&widths, cfg.batch_size))?);
    let weights: Vec<f64> = timing
        .iter()
        .map(|a| {
            if cfg.uniform_average {
                1.0
            } else {
                a.dataset_size as f64
            }
        })
        .collect();

    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0x494E_4954));
    let mut global = SplitNet::new(&widths, 0, &mut init_rng)?;
    let mut aux: BTreeMap<(AgentId, usize), Dense> = BTreeMap::new();

    let probe: Vec<Vec<f64>> = dataset
        .samples
        .iter()
        .take(cfg.probe_samples.max(1))
        .map(|s| s.x.clone())
        .collect();
    let all_x: Vec<Vec<f64>> = dataset.samples.iter().map(|s| s.x.clone()).collect();
    let all_y: Vec<usize> = dataset.samples.iter().map(|s| s.y).collect();

    let mut lr = cfg.lr.initial;
    let mut best_loss = f64::INFINITY;
    let mut stall = 0usize;
    let mut metrics = Vec::with_capacity(cfg.rounds + 1);
    let mut probes: Vec<Vec<Vec<f64>>> = Vec::with_capacity(cfg.rounds + 1);

    let evaluate = |net: &SplitNet| -> Result<(f64, f64)> {
        let loss = full_loss(net, &all_x, &all_y)?;
        let hits = all_x
            .iter()
            .zip(&all_y)
            .filter(|(x, &y)| predict(net, x) == y)
            .count();
        Ok((loss, hits as f64 / all_x.len().max(1) as f64))
    };
    let probe_outputs = |net: &SplitNet| -> Vec<Vec<f64>> {
        (1..depth)
            .map(|m| probe.iter().map(|x| net.prefix_forward(m, x)[0]).collect())
            .collect()
    };

    let (loss0, acc0) = evaluate(&global)?;
    metrics.push(RoundMetrics {
        round: 0,
        loss: loss0,
        accuracy: acc0,
        lr,
        pairs: vec![],
        drift: vec![],
    });
    probes.push(probe_outputs(&global));

    for round in 1..=cfg.rounds {
        let plan = match cfg.plan_source {
            PlanSource::ComDml => {
                schedule(
                    &timing,
                    &splits,
                    PairingOptions {
                        improvement_threshold: cfg.improvement_threshold,
                    },
                )
                .plan
            }
            PlanSource::NoOffload => crate::types::PairingPlan::all_independent(0..k),
        };

        // fresh heads for splits this agent has not used before
        for p in &plan.pairs {
            aux.entry((p.slow, p.split_id)).or_insert_with(|| {
                let mut r = ChaCha8Rng::seed_from_u64(derive_seed(
                    derive_seed(cfg.seed, 0x4155_5800 + p.split_id as u64),
                    p.slow as u64,
                ));
                let mut n = global.clone();
                n.resplit(p.split_id, &mut r).expect("split below depth");
                n.aux_head.expect("split > 0")
            });
        }

        let units: Vec<Unit> = plan
            .independents
            .iter()
            .map(|&a| Unit::Alone(a))
            .chain(plan.pairs.iter().map(|&p| Unit::Pair(p)))
            .collect();
        let batch_seed =
            |agent: AgentId| derive_seed(derive_seed(cfg.seed, round as u64), agent as u64);

        let results: Vec<Result<UnitResult>> = units
            .par_iter()
            .map(|unit| -> Result<UnitResult> {
                match *unit {
                    Unit::Alone(a) => {
                        let mut net = global.clone();
                        for (x, y) in data[a].batches(cfg.batch_size, batch_seed(a)) {
                            full_step(&mut net, &x, &y, lr)?;
                        }
                        Ok(UnitResult {
                            models: vec![(a, net)],
                        })
                    }
                    Unit::Pair(p) => {
                        let mut helper = global.clone();
                        for (x, y) in data[p.fast].batches(cfg.batch_size, batch_seed(p.fast)) {
                            full_step(&mut helper, &x, &y, lr)?;
                        }
                        let mut slow = global.clone();
                        slow.set_split(p.split_id, Some(aux[&(p.slow, p.split_id)].clone()))?;
                        // the helper's copy of the slow agent's suffix
                        let mut suffix = global.clone();
                        suffix.split_at = p.split_id;
                        for (x, y) in data[p.slow].batches(cfg.batch_size, batch_seed(p.slow)) {
                            let z: Vec<Vec<f64>> =
                                x.iter().map(|xi| slow.slow_forward(xi)).collect();
                            slow_side_step(&mut slow, &x, &y, lr)?;
                            fast_side_step(&mut suffix, &z, &y, lr)?;
                        }
                        let m = p.split_id;
                        slow.layers[m..].clone_from_slice(&suffix.layers[m..]);
                        Ok(UnitResult {
                            models: vec![(p.slow, slow), (p.fast, helper)],
                        })
                    }
                }
            })
            .collect();

        let mut trained: BTreeMap<AgentId, SplitNet> = BTreeMap::new();
        for r in results {
            trained.extend(r?.models);
        }
        let ids: Vec<AgentId> = trained.keys().copied().collect();
        let inputs: Vec<(SplitNet, f64)> = trained
            .into_iter()
            .map(|(id, net)| (net, weights[id]))
            .collect();
        let averaged = aggregate(&inputs)?;
        for (id, net) in ids.iter().zip(&averaged) {
            if let Some(h) = &net.aux_head {
                aux.insert((*id, net.split_at), h.clone());
            }
        }
        let mut next = averaged.into_iter().next().expect("at least one agent");
        next.split_at = 0;
        next.aux_head = None;
        global = next;

        let (loss, accuracy) = evaluate(&global)?;
        metrics.push(RoundMetrics {
            round,
            loss,
            accuracy,
            lr,
            pairs: plan.pairs.clone(),
            drift: vec![],
        });
        probes.push(probe_outputs(&global));

        if loss < best_loss - cfg.lr.min_improvement {
            best_loss = loss;
            stall = 0;
        } else {
            stall += 1;
            if stall >= cfg.lr.plateau_rounds {
                lr *= cfg.lr.decay_factor;
                stall = 0;
            }
        }
    }

    let reference = probes.last().expect("round 0 recorded").clone();
    for (metric, outputs) in metrics.iter_mut().zip(&probes) {
        metric.drift = outputs
            .iter()
            .zip(&reference)
            .enumerate()
            .map(|(i, (cur, refr))| drift_estimate(metric.round, i + 1, cur, refr, cfg.drift_bins))
            .collect::<Result<_>>()?;
    }

    Ok(TrainingReport {
        rounds: metrics,
        drift_split: cfg.drift_split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profiles(speeds: &[f64], bw: f64) -> Vec<AgentProfile> {
        let k = speeds.len();
        speeds
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut a = AgentProfile::new(i, s, 0);
                for j in (0..k).filter(|&j| j != i) {
                    a.links.insert(j, bw);
                }
                a
            })
            .collect()
    }

    #[test]
    fn zero_rounds_reports_chance_on_noise() {
        let mut cfg = TrainingConfig::new(
            profiles(&[1.0, 2.0], 1e7),
            MixtureSpec {
                samples: 2000,
                mean_scale: 0.0,
                ..Default::default()
            },
        );
        cfg.rounds = 0;
        let r = run_training(&cfg).unwrap();
        assert_eq!(r.rounds.len(), 1);
        assert!(
            (r.rounds[0].accuracy - 0.5).abs() < 0.05,
            "{}",
            r.rounds[0].accuracy
        );
    }

    #[test]
    fn short_run_is_deterministic_and_pairs() {
        let mut cfg = TrainingConfig::new(
            profiles(&[40.0, 2.0, 10.0, 5.0], 1.25e7),
            MixtureSpec {
                samples: 800,
                ..Default::default()
            },
        );
        cfg.rounds = 3;
        cfg.lr.initial = 0.05;
        let a = run_training(&cfg).unwrap();
        assert!(a.rounds.iter().skip(1).all(|m| !m.pairs.is_empty()));
        assert_eq!(a, run_training(&cfg).unwrap());
        let last = a.final_metrics();
        assert_eq!(last.drift_at(1), Some(0.0));
        assert_eq!(last.drift.len(), 3);
    }

    #[test]
    fn rejects_bad_drift_split() {
        let mut cfg = TrainingConfig::new(profiles(&[1.0], 1.0), MixtureSpec::default());
        cfg.drift_split = 4;
        assert!(matches!(run_training(&cfg), Err(Error::Config(_))));
    }
}
