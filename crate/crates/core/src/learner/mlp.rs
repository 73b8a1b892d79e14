use rand::Rng;

use crate::error::{Error, Result};

/// Lower bound on per-dimension feature standard deviation.
pub const STD_FLOOR: f32 = 1e-6;

/// Dense layer, `weights` stored `outputs x inputs` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs] }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.bias)
                .map(|(row, &b)| row.iter().zip(x).map(|(&w, &v)| f64::from(w) * v).sum::<f64>() + f64::from(b)),
        );
    }
}

/// Feed-forward softmax classifier: ReLU hidden layers, linear output,
/// inputs standardized with stored per-dimension statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    layers: Vec<Layer>,
    mean: Vec<f32>,
    std: Vec<f32>,
}

/// Per-sample forward pass kept for backpropagation.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    /// `activations[0]` is the normalized input, the last entry the logits.
    pub activations: Vec<Vec<f64>>,
    /// Inverted-dropout factor applied to surviving hidden units.
    pub keep_scale: f64,
}

impl ForwardTrace {
    pub fn logits(&self) -> &[f64] {
        self.activations.last().expect("trace has logits")
    }
}

/// Gradient (or velocity) buffers shaped like a model's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Self {
            weights: model.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: model.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights).chain(self.bias.iter_mut().zip(&other.bias)) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += scale * y);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.weights.iter().chain(&self.bias).flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the largest value; ties go to the smallest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl MlpModel {
    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases,
    /// identity normalization. `sizes` is `[D, hidden.., C]`.
    pub fn new<R: Rng>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid(format!("invalid layer sizes {sizes:?}")));
        }
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (inputs, outputs) = (w[0], w[1]);
                let limit = (6.0 / (inputs + outputs) as f64).sqrt();
                let mut layer = Layer::zeros(inputs, outputs);
                layer.weights.iter_mut().for_each(|v| *v = rng.gen_range(-limit..limit) as f32);
                layer
            })
            .collect();
        let d = sizes[0];
        Ok(Self { layers, mean: vec![0.0; d], std: vec![1.0; d] })
    }

    /// Assembles a model, checking that layer shapes chain and statistics fit.
    pub fn from_parts(layers: Vec<Layer>, mean: Vec<f32>, std: Vec<f32>) -> Result<Self> {
        let first = layers.first().ok_or_else(|| Error::invalid("model needs at least one layer"))?;
        for (i, l) in layers.iter().enumerate() {
            if l.inputs == 0 || l.outputs == 0 || l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::shape(format!("layer {i} parameters do not match {}x{}", l.outputs, l.inputs)));
            }
        }
        if let Some(i) = layers.windows(2).position(|w| w[0].outputs != w[1].inputs) {
            return Err(Error::shape(format!("layer {i} output does not feed layer {}", i + 1)));
        }
        if mean.len() != first.inputs || std.len() != first.inputs {
            return Err(Error::shape("normalization statistics do not match input dimension"));
        }
        if std.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("normalization std must be positive"));
        }
        Ok(Self { layers, mean, std })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().expect("nonempty").outputs
    }

    /// `[D, hidden.., C]`.
    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim()).chain(self.layers.iter().map(|l| l.outputs)).collect()
    }

    pub fn mean(&self) -> &[f32] {
        &self.mean
    }

    pub fn std(&self) -> &[f32] {
        &self.std
    }

    /// Fits standardization statistics to `rows`, flooring std at [`STD_FLOOR`].
    pub fn fit_normalization(&mut self, rows: &[Vec<f32>]) -> Result<()> {
        let d = self.input_dim();
        if rows.is_empty() || rows.iter().any(|r| r.len() != d) {
            return Err(Error::shape("normalization rows must be nonempty with model input dimension"));
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0f64; d];
        for r in rows {
            mean.iter_mut().zip(r).for_each(|(m, &v)| *m += f64::from(v));
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0f64; d];
        for r in rows {
            var.iter_mut().zip(r.iter().zip(&mean)).for_each(|(s, (&v, m))| *s += (f64::from(v) - m).powi(2));
        }
        self.mean = mean.iter().map(|&m| m as f32).collect();
        self.std = var.iter().map(|&s| ((s / n).sqrt() as f32).max(STD_FLOOR)).collect();
        Ok(())
    }

    fn check_dim(&self, x: &[f32]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::shape(format!("feature has {} dims, model expects {}", x.len(), self.input_dim())));
        }
        Ok(())
    }

    fn normalize(&self, x: &[f32]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| (f64::from(v) - f64::from(m)) / f64::from(s))
            .collect()
    }

    /// Forward pass recording every activation. `dropout` applies inverted
    /// dropout with the given probability to hidden activations.
    pub fn forward_trace<R: Rng>(&self, x: &[f32], mut dropout: Option<(&mut R, f64)>) -> Result<ForwardTrace> {
        self.check_dim(x)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(self.normalize(x));
        let last = self.layers.len() - 1;
        let mut keep_scale = 1.0;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.apply(activations.last().expect("input pushed"), &mut out);
            if i < last {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
                if let Some((rng, p)) = dropout.as_mut() {
                    let p = *p;
                    if p > 0.0 {
                        let keep = 1.0 / (1.0 - p);
                        keep_scale = keep;
                        out.iter_mut().for_each(|v| *v = if rng.gen::<f64>() < p { 0.0 } else { *v * keep });
                    }
                }
            }
            activations.push(out);
        }
        Ok(ForwardTrace { activations, keep_scale })
    }

    pub fn logits(&self, x: &[f32]) -> Result<Vec<f64>> {
        Ok(self.forward_trace::<rand::rngs::mock::StepRng>(x, None)?.activations.pop().expect("logits"))
    }

    /// Class probabilities.
    pub fn forward(&self, x: &[f32]) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(x)?))
    }

    /// Accumulates parameter gradients given `d loss / d logits` for one traced sample.
    /// Dropped units have zero activation, so the ReLU mask covers them too.
    pub fn backward(&self, trace: &ForwardTrace, dlogits: &[f64], grads: &mut Gradients) {
        let mut delta = dlogits.to_vec();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let input = &trace.activations[i];
            let gw = &mut grads.weights[i];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                grads.bias[i][o] += d;
                let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                row.iter_mut().zip(input).for_each(|(g, &a)| *g += d * a);
            }
            if i == 0 {
                break;
            }
            let mut prev = vec![0.0f64; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                prev.iter_mut().zip(row).for_each(|(p, &w)| *p += d * f64::from(w));
            }
            let scale = trace.keep_scale;
            prev.iter_mut().zip(input).for_each(|(p, &a)| *p = if a > 0.0 { *p * scale } else { 0.0 });
            delta = prev;
        }
    }
}
