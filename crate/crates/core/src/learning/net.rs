//! Fully connected tanh network partitioned into a slow-side prefix with an
//! auxiliary classifier head, and a fast-side suffix.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }

    /// Derivative expressed through the activation's output.
    fn slope(self, out: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    /// Glorot-uniform weights, zero bias.
    pub fn random<R: Rng + ?Sized>(
        inputs: usize,
        outputs: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        Self {
            inputs,
            outputs,
            weights: (0..inputs * outputs)
                .map(|_| rng.random_range(-limit..limit))
                .collect(),
            bias: vec![0.0; outputs],
            activation,
        }
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                let pre = row
                    .iter()
                    .zip(x)
                    .fold(self.bias[o], |acc, (w, v)| acc + w * v);
                self.activation.apply(pre)
            })
            .collect()
    }

    fn write_params(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.weights);
        out.extend_from_slice(&self.bias);
    }

    fn read_params(&mut self, src: &[f64]) -> usize {
        let (nw, nb) = (self.weights.len(), self.bias.len());
        self.weights.copy_from_slice(&src[..nw]);
        self.bias.copy_from_slice(&src[nw..nw + nb]);
        nw + nb
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitNet {
    pub layers: Vec<Dense>,
    /// Number of prefix layers on the slow side; 0 means unsplit.
    pub split_at: usize,
    pub aux_head: Option<Dense>,
}

impl SplitNet {
    /// `widths = [input, hidden..., classes]`; hidden layers use tanh, the output is linear.
    pub fn new<R: Rng + ?Sized>(widths: &[usize], split_at: usize, rng: &mut R) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::ShapeMismatch(format!("bad layer widths {widths:?}")));
        }
        let depth = widths.len() - 1;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i + 1 == depth {
                    Activation::Identity
                } else {
                    Activation::Tanh
                };
                Dense::random(w[0], w[1], act, rng)
            })
            .collect();
        let mut net = Self {
            layers,
            split_at: 0,
            aux_head: None,
        };
        net.resplit(split_at, rng)?;
        Ok(net)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn classes(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    /// Width of the activations crossing split point `m`.
    pub fn width_at(&self, m: usize) -> usize {
        if m == 0 {
            self.input_width()
        } else {
            self.layers[m - 1].outputs
        }
    }

    /// Moves the split point and attaches a fresh auxiliary head sized for it.
    pub fn resplit<R: Rng + ?Sized>(&mut self, split_at: usize, rng: &mut R) -> Result<()> {
        if split_at >= self.depth() {
            return Err(Error::ShapeMismatch(format!(
                "split {split_at} must be below depth {}",
                self.depth()
            )));
        }
        self.split_at = split_at;
        self.aux_head = (split_at > 0).then(|| {
            Dense::random(
                self.width_at(split_at),
                self.classes(),
                Activation::Identity,
                rng,
            )
        });
        Ok(())
    }

    /// Sets the split point with a caller-supplied auxiliary head.
    pub fn set_split(&mut self, split_at: usize, aux_head: Option<Dense>) -> Result<()> {
        if split_at >= self.depth() {
            return Err(Error::ShapeMismatch(format!(
                "split {split_at} out of range"
            )));
        }
        match (&aux_head, split_at) {
            (None, 0) => {}
            (Some(h), m)
                if m > 0 && h.inputs == self.width_at(m) && h.outputs == self.classes() => {}
            _ => {
                return Err(Error::ShapeMismatch(
                    "auxiliary head does not fit split".into(),
                ))
            }
        }
        self.split_at = split_at;
        self.aux_head = aux_head;
        Ok(())
    }

    fn run(layers: &[Dense], x: &[f64]) -> Vec<f64> {
        layers.iter().fold(x.to_vec(), |a, l| l.forward(&a))
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        Self::run(&self.layers, x)
    }

    pub fn slow_forward(&self, x: &[f64]) -> Vec<f64> {
        Self::run(&self.layers[..self.split_at], x)
    }

    pub fn fast_forward(&self, z: &[f64]) -> Vec<f64> {
        Self::run(&self.layers[self.split_at..], z)
    }

    /// Output of the first `m` layers.
    pub fn prefix_forward(&self, m: usize, x: &[f64]) -> Vec<f64> {
        Self::run(&self.layers[..m], x)
    }

    fn flatten<'a>(layers: impl Iterator<Item = &'a Dense>) -> Vec<f64> {
        let mut out = Vec::new();
        for l in layers {
            l.write_params(&mut out);
        }
        out
    }

    fn unflatten<'a>(layers: impl Iterator<Item = &'a mut Dense>, src: &[f64]) -> Result<()> {
        let layers: Vec<_> = layers.collect();
        let need: usize = layers.iter().map(|l| l.num_params()).sum();
        if need != src.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {need} parameters, got {}",
                src.len()
            )));
        }
        let mut at = 0;
        for l in layers {
            at += l.read_params(&src[at..]);
        }
        Ok(())
    }

    /// All main-path parameters (no auxiliary head), layer by layer, weights then bias.
    pub fn main_params(&self) -> Vec<f64> {
        Self::flatten(self.layers.iter())
    }

    pub fn set_main_params(&mut self, src: &[f64]) -> Result<()> {
        Self::unflatten(self.layers.iter_mut(), src)
    }

    /// Slow-side prefix followed by the auxiliary head.
    pub fn slow_params(&self) -> Vec<f64> {
        Self::flatten(
            self.layers[..self.split_at]
                .iter()
                .chain(self.aux_head.iter()),
        )
    }

    pub fn set_slow_params(&mut self, src: &[f64]) -> Result<()> {
        let m = self.split_at;
        Self::unflatten(
            self.layers[..m].iter_mut().chain(self.aux_head.iter_mut()),
            src,
        )
    }

    pub fn fast_params(&self) -> Vec<f64> {
        Self::flatten(self.layers[self.split_at..].iter())
    }

    pub fn set_fast_params(&mut self, src: &[f64]) -> Result<()> {
        let m = self.split_at;
        Self::unflatten(self.layers[m..].iter_mut(), src)
    }
}

/// Mean softmax cross-entropy of a layer stack and its flattened gradient.
fn stack_gradient(
    stack: &[&Dense],
    inputs: &[Vec<f64>],
    labels: &[usize],
) -> Result<(f64, Vec<f64>)> {
    check_batch(stack, inputs, labels)?;
    let total: usize = stack.iter().map(|l| l.num_params()).sum();
    let mut grad = vec![0.0; total];
    if inputs.is_empty() {
        return Ok((0.0, grad));
    }
    let offsets: Vec<usize> = stack
        .iter()
        .scan(0, |acc, l| {
            let at = *acc;
            *acc += l.num_params();
            Some(at)
        })
        .collect();

    let mut loss = 0.0;
    for (x, &y) in inputs.iter().zip(labels) {
        let mut acts = Vec::with_capacity(stack.len() + 1);
        acts.push(x.clone());
        for l in stack {
            let next = l.forward(acts.last().expect("non-empty"));
            acts.push(next);
        }
        let logits = acts.last().expect("non-empty");
        let (sample_loss, probs) = softmax_xent(logits, y);
        loss += sample_loss;

        let last = stack.len() - 1;
        let mut delta: Vec<f64> = probs
            .iter()
            .enumerate()
            .map(|(c, p)| {
                (p - if c == y { 1.0 } else { 0.0 }) * stack[last].activation.slope(logits[c])
            })
            .collect();
        for li in (0..stack.len()).rev() {
            let layer = stack[li];
            let input = &acts[li];
            let g = &mut grad[offsets[li]..offsets[li] + layer.num_params()];
            let (gw, gb) = g.split_at_mut(layer.weights.len());
            for (o, d) in delta.iter().enumerate() {
                let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                for (gwi, xi) in row.iter_mut().zip(input) {
                    *gwi += d * xi;
                }
                gb[o] += d;
            }
            if li > 0 {
                let below = stack[li - 1].activation;
                delta = (0..layer.inputs)
                    .map(|i| {
                        let back: f64 = delta
                            .iter()
                            .enumerate()
                            .map(|(o, d)| layer.weights[o * layer.inputs + i] * d)
                            .sum();
                        back * below.slope(input[i])
                    })
                    .collect();
            }
        }
    }
    let n = inputs.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((loss / n, grad))
}

fn stack_loss(stack: &[&Dense], inputs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    check_batch(stack, inputs, labels)?;
    if inputs.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = inputs
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let logits = stack.iter().fold(x.clone(), |a, l| l.forward(&a));
            softmax_xent(&logits, y).0
        })
        .sum();
    Ok(total / inputs.len() as f64)
}

fn check_batch(stack: &[&Dense], inputs: &[Vec<f64>], labels: &[usize]) -> Result<()> {
    let (Some(first), Some(last)) = (stack.first(), stack.last()) else {
        return Err(Error::ShapeMismatch("empty layer stack".into()));
    };
    if inputs.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} inputs but {} labels",
            inputs.len(),
            labels.len()
        )));
    }
    for w in stack.windows(2) {
        if w[0].outputs != w[1].inputs {
            return Err(Error::ShapeMismatch(
                "adjacent layers disagree on width".into(),
            ));
        }
    }
    if let Some(x) = inputs.iter().find(|x| x.len() != first.inputs) {
        return Err(Error::ShapeMismatch(format!(
            "input width {} but layer expects {}",
            x.len(),
            first.inputs
        )));
    }
    if let Some(y) = labels.iter().find(|&&y| y >= last.outputs) {
        return Err(Error::ShapeMismatch(format!(
            "label {y} outside {} classes",
            last.outputs
        )));
    }
    Ok(())
}

/// Returns `(-log softmax(logits)[y], softmax(logits))`.
pub fn softmax_xent(logits: &[f64], y: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() - (logits[y] - max);
    (loss, exps.into_iter().map(|e| e / sum).collect())
}

fn apply_update(stack: &mut [&mut Dense], grad: &[f64], lr: f64) {
    let mut at = 0;
    for l in stack.iter_mut() {
        for w in l.weights.iter_mut().chain(l.bias.iter_mut()) {
            *w -= lr * grad[at];
            at += 1;
        }
    }
}

fn slow_stack(net: &SplitNet) -> Result<Vec<&Dense>> {
    let head = match (&net.aux_head, net.split_at) {
        (Some(h), m) if m > 0 => h,
        _ => {
            return Err(Error::ShapeMismatch(
                "slow side needs split_at >= 1 and an auxiliary head".into(),
            ))
        }
    };
    Ok(net.layers[..net.split_at].iter().chain([head]).collect())
}

/// Loss and gradient (ordered as [`SplitNet::slow_params`]) of the slow side through the auxiliary head.
pub fn slow_side_gradient(
    net: &SplitNet,
    inputs: &[Vec<f64>],
    labels: &[usize],
) -> Result<(f64, Vec<f64>)> {
    stack_gradient(&slow_stack(net)?, inputs, labels)
}

pub fn slow_side_loss(net: &SplitNet, inputs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    stack_loss(&slow_stack(net)?, inputs, labels)
}

/// One SGD step on the slow side and its auxiliary head. Returns the loss before the update.
pub fn slow_side_step(
    net: &mut SplitNet,
    inputs: &[Vec<f64>],
    labels: &[usize],
    lr: f64,
) -> Result<f64> {
    let (loss, grad) = slow_side_gradient(net, inputs, labels)?;
    let m = net.split_at;
    let mut stack: Vec<&mut Dense> = net.layers[..m]
        .iter_mut()
        .chain(net.aux_head.iter_mut())
        .collect();
    apply_update(&mut stack, &grad, lr);
    Ok(loss)
}

fn fast_stack(net: &SplitNet) -> Vec<&Dense> {
    net.layers[net.split_at..].iter().collect()
}

/// Loss and gradient (ordered as [`SplitNet::fast_params`]) of the suffix on received activations.
pub fn fast_side_gradient(
    net: &SplitNet,
    activations: &[Vec<f64>],
    labels: &[usize],
) -> Result<(f64, Vec<f64>)> {
    stack_gradient(&fast_stack(net), activations, labels)
}

pub fn fast_side_loss(net: &SplitNet, activations: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    stack_loss(&fast_stack(net), activations, labels)
}

/// One SGD step on the suffix only; activations are treated as constants.
pub fn fast_side_step(
    net: &mut SplitNet,
    activations: &[Vec<f64>],
    labels: &[usize],
    lr: f64,
) -> Result<f64> {
    let (loss, grad) = fast_side_gradient(net, activations, labels)?;
    let m = net.split_at;
    let mut stack: Vec<&mut Dense> = net.layers[m..].iter_mut().collect();
    apply_update(&mut stack, &grad, lr);
    Ok(loss)
}

/// One SGD step of ordinary end-to-end training on the main path.
pub fn full_step(
    net: &mut SplitNet,
    inputs: &[Vec<f64>],
    labels: &[usize],
    lr: f64,
) -> Result<f64> {
    let (loss, grad) = stack_gradient(&net.layers.iter().collect::<Vec<_>>(), inputs, labels)?;
    let mut stack: Vec<&mut Dense> = net.layers.iter_mut().collect();
    apply_update(&mut stack, &grad, lr);
    Ok(loss)
}

pub fn full_loss(net: &SplitNet, inputs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    stack_loss(&net.layers.iter().collect::<Vec<_>>(), inputs, labels)
}

pub fn predict(net: &SplitNet, x: &[f64]) -> usize {
    let logits = net.forward(x);
    logits
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (c, &v)| {
            if v > best.1 {
                (c, v)
            } else {
                best
            }
        })
        .0
}
