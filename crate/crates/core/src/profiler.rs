//! Split-point profiling from a declared layer cost table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::SplitProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub name: String,
    /// Relative forward+backward cost per batch.
    pub cost: f64,
    /// Activation bytes produced per batch.
    pub out_bytes: f64,
    #[serde(default)]
    pub param_bytes: f64,
}

impl LayerSpec {
    pub fn new(name: impl Into<String>, cost: f64, out_bytes: f64, param_bytes: f64) -> Self {
        Self {
            name: name.into(),
            cost,
            out_bytes,
            param_bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub layers: Vec<LayerSpec>,
    /// Auxiliary head cost as a fraction of the whole model's cost.
    #[serde(default)]
    pub aux_cost_frac: f64,
    #[serde(default = "default_classes")]
    pub aux_out_classes: usize,
    /// Label bytes shipped alongside each batch of activations.
    #[serde(default)]
    pub label_bytes: f64,
}

fn default_classes() -> usize {
    10
}

/// Largest auxiliary fraction that keeps every `slow_frac` under the cap.
pub const MAX_AUX_COST_FRAC: f64 = 0.5;

impl ModelSpec {
    pub fn new(layers: Vec<LayerSpec>, aux_cost_frac: f64) -> Self {
        Self {
            layers,
            aux_cost_frac,
            aux_out_classes: default_classes(),
            label_bytes: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "need at least 2 layers to split, got {}",
                self.layers.len()
            )));
        }
        for l in &self.layers {
            if !(l.cost >= 0.0 && l.out_bytes >= 0.0 && l.param_bytes >= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "layer `{}` has a negative or NaN field",
                    l.name
                )));
            }
        }
        if !(self.total_cost() > 0.0) {
            return Err(Error::InvalidModel(
                "total layer cost must be positive".into(),
            ));
        }
        if !(0.0..=MAX_AUX_COST_FRAC).contains(&self.aux_cost_frac) {
            return Err(Error::InvalidModel(format!(
                "aux_cost_frac must lie in [0, {MAX_AUX_COST_FRAC}], got {}",
                self.aux_cost_frac
            )));
        }
        if !(self.label_bytes >= 0.0) {
            return Err(Error::InvalidModel("label_bytes must be >= 0".into()));
        }
        Ok(())
    }

    pub fn total_cost(&self) -> f64 {
        self.layers.iter().map(|l| l.cost).sum()
    }

    pub fn total_param_bytes(&self) -> f64 {
        self.layers.iter().map(|l| l.param_bytes).sum()
    }

    pub fn num_splits(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }
}

/// One profile per split point `m = 1..L-1`, the split falling after layer `m`.
pub fn profile_splits(model: &ModelSpec) -> Result<Vec<SplitProfile>> {
    model.validate()?;
    let total = model.total_cost();
    let mut prefix = 0.0;
    let mut out = Vec::with_capacity(model.num_splits());
    for (idx, layer) in model.layers[..model.layers.len() - 1].iter().enumerate() {
        prefix += layer.cost;
        // suffix summed directly so that slow+fast == 1 holds exactly when aux is zero
        let suffix: f64 = model.layers[idx + 1..].iter().map(|l| l.cost).sum();
        out.push(SplitProfile {
            split_id: idx + 1,
            slow_frac: prefix / total + model.aux_cost_frac,
            fast_frac: suffix / total,
            interm_bytes: layer.out_bytes + model.label_bytes,
        });
    }
    Ok(out)
}

/// Parameter bytes of the suffix handed to the helper when splitting after layer `m`.
pub fn offloaded_model_bytes(model: &ModelSpec, m: usize) -> Result<f64> {
    let layers = model.layers.len();
    if m < 1 || m >= layers {
        return Err(Error::OutOfRange { index: m, layers });
    }
    Ok(model.layers[m..].iter().map(|l| l.param_bytes).sum())
}

pub const RESNET56_LIKE: &str = "resnet56-like";

/// A 27-block, three-stage residual-style cost table (26 split points).
///
/// Every block costs 1. Activations are `channels * side * side * 4` bytes and
/// parameters are two 3x3 convolutions of `channels` filters in f32.
pub fn resnet56_like() -> ModelSpec {
    let stages = [(16usize, 32usize), (32, 16), (64, 8)];
    let mut layers = Vec::with_capacity(27);
    for (s, &(channels, side)) in stages.iter().enumerate() {
        for b in 0..9 {
            let out = (channels * side * side * 4) as f64;
            let params = (2 * channels * channels * 9 * 4) as f64;
            layers.push(LayerSpec::new(
                format!("stage{}.block{}", s + 1, b + 1),
                1.0,
                out,
                params,
            ));
        }
    }
    ModelSpec {
        layers,
        aux_cost_frac: 0.02,
        aux_out_classes: 10,
        label_bytes: 0.0,
    }
}

pub fn preset(name: &str) -> Option<ModelSpec> {
    match name {
        RESNET56_LIKE => Some(resnet56_like()),
        _ => None,
    }
}
