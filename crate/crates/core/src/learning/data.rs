//! Gaussian-mixture classification data and per-agent partitions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureSpec {
    pub classes: usize,
    pub dim: usize,
    pub samples: usize,
    /// Two classes sit at `±mean_scale * 1`; more classes get random `±mean_scale` sign vectors.
    pub mean_scale: f64,
    /// Isotropic standard deviation around each mean.
    pub std: f64,
    pub seed: u64,
}

impl Default for MixtureSpec {
    fn default() -> Self {
        Self {
            classes: 2,
            dim: 16,
            samples: 4000,
            mean_scale: 2.0,
            std: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub samples: Vec<Sample>,
    pub classes: usize,
    pub dim: usize,
}

impl SyntheticDataset {
    pub fn generate(spec: &MixtureSpec) -> Result<Self> {
        if spec.classes < 2 || spec.dim == 0 {
            return Err(Error::Config(format!(
                "mixture needs >= 2 classes and dim >= 1, got {} / {}",
                spec.classes, spec.dim
            )));
        }
        let noise =
            Normal::new(0.0, spec.std).map_err(|e| Error::Config(format!("mixture std: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let means: Vec<Vec<f64>> = if spec.classes == 2 {
            vec![
                vec![spec.mean_scale; spec.dim],
                vec![-spec.mean_scale; spec.dim],
            ]
        } else {
            (0..spec.classes)
                .map(|_| {
                    (0..spec.dim)
                        .map(|_| {
                            if rng.random_bool(0.5) {
                                spec.mean_scale
                            } else {
                                -spec.mean_scale
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let mut labels: Vec<usize> = (0..spec.samples).map(|i| i % spec.classes).collect();
        labels.shuffle(&mut rng);
        let samples = labels
            .into_iter()
            .map(|y| Sample {
                x: means[y]
                    .iter()
                    .map(|m| m + noise.sample(&mut rng))
                    .collect(),
                y,
            })
            .collect();
        Ok(Self {
            samples,
            classes: spec.classes,
            dim: spec.dim,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Splits sample indices across `agents`. With `label_skew = Some(alpha)` each
    /// class is spread by a Dirichlet(alpha) draw; otherwise shuffled round-robin.
    pub fn partition(
        &self,
        agents: usize,
        label_skew: Option<f64>,
        seed: u64,
    ) -> Result<Vec<Vec<usize>>> {
        if agents == 0 {
            return Err(Error::Config("cannot partition across 0 agents".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut parts = vec![Vec::new(); agents];
        match label_skew {
            None => {
                let mut idx: Vec<usize> = (0..self.len()).collect();
                idx.shuffle(&mut rng);
                for (n, i) in idx.into_iter().enumerate() {
                    parts[n % agents].push(i);
                }
            }
            Some(alpha) => {
                let gamma = Gamma::new(alpha, 1.0)
                    .map_err(|e| Error::Config(format!("dirichlet concentration: {e}")))?;
                for c in 0..self.classes {
                    let mut idx: Vec<usize> = (0..self.len())
                        .filter(|&i| self.samples[i].y == c)
                        .collect();
                    idx.shuffle(&mut rng);
                    let draws: Vec<f64> = (0..agents).map(|_| gamma.sample(&mut rng)).collect();
                    let total: f64 = draws.iter().sum();
                    let counts = apportion(&draws, total, idx.len());
                    let mut at = 0;
                    for (a, n) in counts.into_iter().enumerate() {
                        parts[a].extend_from_slice(&idx[at..at + n]);
                        at += n;
                    }
                }
                for p in &mut parts {
                    p.sort_unstable();
                }
            }
        }
        Ok(parts)
    }
}

/// Largest-remainder rounding of `n * w_i / total` so the counts sum to `n`.
fn apportion(weights: &[f64], total: f64, n: usize) -> Vec<usize> {
    if !(total > 0.0) {
        let mut out = vec![n / weights.len(); weights.len()];
        for slot in out.iter_mut().take(n % weights.len()) {
            *slot += 1;
        }
        return out;
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut rest = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_labels_and_shape() {
        let d = SyntheticDataset::generate(&MixtureSpec {
            samples: 100,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(d.len(), 100);
        assert_eq!(d.samples.iter().filter(|s| s.y == 0).count(), 50);
        assert!(d.samples.iter().all(|s| s.x.len() == 16 && s.y < 2));
    }

    #[test]
    fn partitions_cover_everything() {
        let d = SyntheticDataset::generate(&MixtureSpec {
            classes: 3,
            samples: 901,
            ..Default::default()
        })
        .unwrap();
        for skew in [None, Some(0.5), Some(100.0)] {
            let parts = d.partition(7, skew, 3).unwrap();
            let mut all: Vec<usize> = parts.concat();
            all.sort_unstable();
            assert_eq!(all, (0..901).collect::<Vec<_>>());
        }
    }

    #[test]
    fn dirichlet_skews_labels() {
        let d = SyntheticDataset::generate(&MixtureSpec::default()).unwrap();
        let parts = d.partition(8, Some(0.1), 4).unwrap();
        let skewed = parts.iter().filter(|p| !p.is_empty()).any(|p| {
            let ones = p.iter().filter(|&&i| d.samples[i].y == 1).count() as f64;
            let share = ones / p.len() as f64;
            !(0.3..0.7).contains(&share)
        });
        assert!(skewed);
    }

    #[test]
    fn apportion_sums() {
        assert_eq!(
            apportion(&[1.0, 1.0, 1.0], 3.0, 10).iter().sum::<usize>(),
            10
        );
        assert_eq!(apportion(&[0.0, 0.0], 0.0, 5), vec![3, 2]);
    }
}
