//! Weighted model averaging.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::learning::net::SplitNet;

/// Coordinate-wise mean with weights `w_i / sum(w)`; zero total weight falls back to uniform.
pub fn weighted_mean(vectors: &[(&[f64], f64)]) -> Result<Vec<f64>> {
    let Some((first, _)) = vectors.first() else {
        return Err(Error::ShapeMismatch("nothing to average".into()));
    };
    if vectors.iter().any(|(v, _)| v.len() != first.len()) {
        return Err(Error::ShapeMismatch(
            "parameter vectors differ in length".into(),
        ));
    }
    if vectors.iter().any(|(_, w)| !(*w >= 0.0)) {
        return Err(Error::ShapeMismatch(
            "aggregation weights must be >= 0".into(),
        ));
    }
    let total: f64 = vectors.iter().map(|(_, w)| w).sum();
    let uniform = 1.0 / vectors.len() as f64;
    let mut out = vec![0.0; first.len()];
    for (v, w) in vectors {
        let share = if total > 0.0 { w / total } else { uniform };
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += share * x;
        }
    }
    Ok(out)
}

/// Averages main-path parameters across all models and auxiliary heads within
/// groups that share a split point. Agents without a head keep none.
pub fn aggregate(models: &[(SplitNet, f64)]) -> Result<Vec<SplitNet>> {
    let main: Vec<Vec<f64>> = models.iter().map(|(m, _)| m.main_params()).collect();
    let views: Vec<(&[f64], f64)> = main
        .iter()
        .zip(models)
        .map(|(p, (_, w))| (p.as_slice(), *w))
        .collect();
    let averaged = weighted_mean(&views)?;

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (m, _)) in models.iter().enumerate() {
        if m.split_at > 0 && m.aux_head.is_some() {
            groups.entry(m.split_at).or_default().push(i);
        }
    }
    let mut heads = BTreeMap::new();
    for (split, members) in &groups {
        let params: Vec<Vec<f64>> = members
            .iter()
            .map(|&i| {
                let h = models[i].0.aux_head.as_ref().expect("grouped on head");
                h.weights.iter().chain(&h.bias).copied().collect()
            })
            .collect();
        let views: Vec<(&[f64], f64)> = params
            .iter()
            .zip(members)
            .map(|(p, &i)| (p.as_slice(), models[i].1))
            .collect();
        heads.insert(*split, weighted_mean(&views)?);
    }

    models
        .iter()
        .map(|(m, _)| {
            let mut out = m.clone();
            out.set_main_params(&averaged)?;
            if let (Some(h), Some(avg)) = (out.aux_head.as_mut(), heads.get(&m.split_at)) {
                let nw = h.weights.len();
                h.weights.copy_from_slice(&avg[..nw]);
                h.bias.copy_from_slice(&avg[nw..]);
            }
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn filled(net: &SplitNet, v: f64) -> SplitNet {
        let mut n = net.clone();
        let len = n.main_params().len();
        n.set_main_params(&vec![v; len]).unwrap();
        n
    }

    fn template() -> SplitNet {
        SplitNet::new(&[3, 4, 2], 0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    #[test]
    fn idempotent_on_identical_models() {
        let net = template();
        let out = aggregate(&[(net.clone(), 1.0), (net.clone(), 7.0)]).unwrap();
        for (a, b) in out[0].main_params().iter().zip(net.main_params()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_one_three() {
        let (a, b) = (filled(&template(), 4.0), filled(&template(), 8.0));
        let out = aggregate(&[(a, 1.0), (b, 3.0)]).unwrap();
        assert!(out[0]
            .main_params()
            .iter()
            .all(|&v| v == 0.25 * 4.0 + 0.75 * 8.0));
    }

    #[test]
    fn symmetric_mean() {
        let t = template();
        let out = aggregate(&[
            (filled(&t, 1.0), 1.0),
            (filled(&t, 2.0), 1.0),
            (filled(&t, 3.0), 1.0),
        ])
        .unwrap();
        assert!(out
            .iter()
            .all(|m| m.main_params().iter().all(|&v| (v - 2.0).abs() < 1e-15)));
    }

    #[test]
    fn aux_heads_stay_within_split_group() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let a = SplitNet::new(&[3, 4, 4, 2], 1, &mut r).unwrap();
        let b = SplitNet::new(&[3, 4, 4, 2], 1, &mut r).unwrap();
        let c = SplitNet::new(&[3, 4, 4, 2], 2, &mut r).unwrap();
        let out = aggregate(&[(a.clone(), 1.0), (b.clone(), 1.0), (c.clone(), 1.0)]).unwrap();
        assert_eq!(out[0].aux_head, out[1].aux_head);
        assert_ne!(out[0].aux_head, a.aux_head);
        assert_eq!(out[2].aux_head, c.aux_head);
    }

    #[test]
    fn shape_mismatch() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let a = SplitNet::new(&[3, 4, 2], 0, &mut r).unwrap();
        let b = SplitNet::new(&[3, 5, 2], 0, &mut r).unwrap();
        assert!(matches!(
            aggregate(&[(a, 1.0), (b, 1.0)]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn affine_equivariance(
            vs in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 6), 1..6),
            ws in prop::collection::vec(0.1f64..10.0, 6),
            delta in -3.0f64..3.0,
        ) {
            let base: Vec<(&[f64], f64)> = vs.iter().zip(&ws).map(|(v, w)| (v.as_slice(), *w)).collect();
            let shifted_vecs: Vec<Vec<f64>> = vs.iter().map(|v| v.iter().map(|x| x + delta).collect()).collect();
            let shifted: Vec<(&[f64], f64)> = shifted_vecs.iter().zip(&ws).map(|(v, w)| (v.as_slice(), *w)).collect();
            let a = weighted_mean(&base).unwrap();
            let b = weighted_mean(&shifted).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x + delta - y).abs() < 1e-12);
            }
        }
    }
}
