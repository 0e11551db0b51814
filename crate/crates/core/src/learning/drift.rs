use crate::error::{Error, Result};

pub const DEFAULT_DRIFT_BINS: usize = 32;

/// Empirical L1 distance between the slow-side output distribution at a
/// round and its distribution at the reference (final) round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEstimate {
    pub round: usize,
    /// Split point whose prefix output was measured.
    pub split: usize,
    pub distance: f64,
    pub bins: usize,
}

/// L1 distance between normalized histograms of two 1-D samples over their shared range.
pub fn histogram_l1(current: &[f64], reference: &[f64], bins: usize) -> Result<f64> {
    if current.is_empty() || reference.is_empty() {
        return Err(Error::EmptySample);
    }
    let bins = bins.max(1);
    let lo = current
        .iter()
        .chain(reference)
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = current
        .iter()
        .chain(reference)
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let hist = |xs: &[f64]| {
        let mut h = vec![0.0; bins];
        for &x in xs {
            let b = if hi > lo {
                (((x - lo) / (hi - lo)) * bins as f64).floor() as usize
            } else {
                0
            };
            h[b.min(bins - 1)] += 1.0;
        }
        let n = xs.len() as f64;
        h.iter_mut().for_each(|v| *v /= n);
        h
    };
    let (p, q) = (hist(current), hist(reference));
    Ok(p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum())
}

pub fn drift_estimate(
    round: usize,
    split: usize,
    current: &[f64],
    reference: &[f64],
    bins: usize,
) -> Result<DriftEstimate> {
    Ok(DriftEstimate {
        round,
        split,
        distance: histogram_l1(current, reference, bins)?,
        bins,
    })
}
