use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllReduceAlgorithm {
    HalvingDoubling,
    Ring,
}

/// Latency-bandwidth cost model of one AllReduce over the whole model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllReduceModel {
    pub algorithm: AllReduceAlgorithm,
    /// Per-step latency in seconds.
    pub latency_s: f64,
    /// Model size in bytes.
    pub model_bytes: f64,
}

impl AllReduceModel {
    pub fn new(algorithm: AllReduceAlgorithm, latency_s: f64, model_bytes: f64) -> Self {
        Self {
            algorithm,
            latency_s,
            model_bytes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.model_bytes > 0.0) {
            return Err(Error::Config(format!(
                "aggregation.model_bytes must be > 0, got {}",
                self.model_bytes
            )));
        }
        if !(self.latency_s >= 0.0) {
            return Err(Error::Config(format!(
                "aggregation.latency_s must be >= 0, got {}",
                self.latency_s
            )));
        }
        Ok(())
    }

    /// Communication steps for `k` participants; non-powers of two round the log up.
    pub fn steps(&self, k: usize) -> Result<u64> {
        if k < 2 {
            return Err(Error::BadK(k));
        }
        Ok(match self.algorithm {
            AllReduceAlgorithm::HalvingDoubling => 2 * ceil_log2(k),
            AllReduceAlgorithm::Ring => 2 * (k as u64 - 1),
        })
    }

    /// Bytes each participant sends (and receives); the same for both algorithms.
    pub fn volume_per_agent(&self, k: usize) -> Result<f64> {
        if k < 2 {
            return Err(Error::BadK(k));
        }
        Ok(2.0 * self.model_bytes * (k as f64 - 1.0) / k as f64)
    }

    pub fn cost(&self, k: usize, min_bandwidth: f64) -> Result<f64> {
        let steps = self.steps(k)?;
        let volume = self.volume_per_agent(k)?;
        Ok(steps as f64 * self.latency_s + volume / min_bandwidth)
    }
}

fn ceil_log2(k: usize) -> u64 {
    (usize::BITS - (k - 1).leading_zeros()) as u64
}

pub fn allreduce_cost(model: &AllReduceModel, k: usize, min_bandwidth: f64) -> Result<f64> {
    model.cost(k, min_bandwidth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_and_halving_doubling() {
        let ring = AllReduceModel::new(AllReduceAlgorithm::Ring, 0.0, 1.0);
        assert_eq!(ring.volume_per_agent(4).unwrap(), 1.5);
        assert_eq!(ring.steps(4).unwrap(), 6);
        let hd = AllReduceModel::new(AllReduceAlgorithm::HalvingDoubling, 0.0, 1.0);
        assert_eq!(hd.steps(4).unwrap(), 4);
        assert_eq!(hd.steps(5).unwrap(), 6);
        assert_eq!(hd.steps(2).unwrap(), 2);
    }

    #[test]
    fn two_agent_cost() {
        let m = AllReduceModel::new(AllReduceAlgorithm::HalvingDoubling, 0.0, 8.0);
        assert_eq!(m.volume_per_agent(2).unwrap(), 8.0);
        assert_eq!(allreduce_cost(&m, 2, 8.0).unwrap(), 1.0);
        let lat = AllReduceModel::new(AllReduceAlgorithm::Ring, 0.5, 8.0);
        assert_eq!(lat.cost(3, 1.0).unwrap(), 4.0 * 0.5 + 32.0 / 3.0);
    }

    #[test]
    fn bad_k() {
        let m = AllReduceModel::new(AllReduceAlgorithm::Ring, 0.0, 1.0);
        assert_eq!(m.cost(1, 1.0), Err(Error::BadK(1)));
        assert_eq!(m.steps(0), Err(Error::BadK(0)));
    }

    #[test]
    fn ceil_log2_small() {
        let got: Vec<_> = (2..=9).map(ceil_log2).collect();
        assert_eq!(got, vec![1, 2, 2, 3, 3, 3, 3, 4]);
    }
}
