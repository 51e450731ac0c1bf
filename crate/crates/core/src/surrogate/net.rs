use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Dataset;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
}

/// Dense layer; `weights` is row-major `outputs × inputs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Fully connected network: tanh on hidden layers, linear output.
///
/// Inputs and the output pass through fixed affine scalings fitted to the
/// training data, so the weights see standardized values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetModel {
    layer_sizes: Vec<usize>,
    layers: Vec<Layer>,
    activation: Activation,
    seed: u64,
    input_shift: Vec<f64>,
    input_scale: Vec<f64>,
    output_shift: f64,
    output_scale: f64,
}

impl NetModel {
    /// Xavier-uniform weights and zero biases drawn from `seed`, identity scalings.
    pub fn new(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = layer_sizes
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let limit = (6.0 / (n_in + n_out) as f64).sqrt();
                Layer {
                    inputs: n_in,
                    outputs: n_out,
                    weights: (0..n_in * n_out)
                        .map(|_| rng.random_range(-limit..limit))
                        .collect(),
                    biases: vec![0.0; n_out],
                }
            })
            .collect();
        Ok(Self::assemble(layer_sizes, layers, seed))
    }

    /// All weights and biases zero.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let layers = layer_sizes
            .windows(2)
            .map(|w| Layer {
                inputs: w[0],
                outputs: w[1],
                weights: vec![0.0; w[0] * w[1]],
                biases: vec![0.0; w[1]],
            })
            .collect();
        Ok(Self::assemble(layer_sizes, layers, 0))
    }

    fn assemble(layer_sizes: &[usize], layers: Vec<Layer>, seed: u64) -> Self {
        Self {
            layer_sizes: layer_sizes.to_vec(),
            layers,
            activation: Activation::Tanh,
            seed,
            input_shift: vec![0.0; layer_sizes[0]],
            input_scale: vec![1.0; layer_sizes[0]],
            output_shift: 0.0,
            output_scale: 1.0,
        }
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Flattened parameters: per layer, weights then biases.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.parameter_count(), "parameter length");
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *w = it.next().expect("length checked");
            }
        }
    }

    pub fn predict(&self, input: &[f64]) -> f64 {
        let acts = self.forward(input);
        acts.last().expect("at least one layer")[0] * self.output_scale + self.output_shift
    }

    /// Activations of every layer, the standardized input first.
    fn forward(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(
            input
                .iter()
                .zip(self.input_shift.iter().zip(&self.input_scale))
                .map(|(x, (s, k))| (x - s) / k)
                .collect::<Vec<f64>>(),
        );
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let prev = acts.last().expect("nonempty");
            let out: Vec<f64> = (0..layer.outputs)
                .map(|o| {
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    let z = layer.biases[o] + row.iter().zip(prev).map(|(w, a)| w * a).sum::<f64>();
                    if li == last {
                        z
                    } else {
                        z.tanh()
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    /// Gradient of `(prediction − target)²` with respect to [`Self::parameters`],
    /// accumulated into `grad` with weight `scale`.
    fn accumulate_gradient(&self, input: &[f64], target: f64, scale: f64, grad: &mut [f64]) {
        let acts = self.forward(input);
        let out = acts.last().expect("nonempty")[0];
        let prediction = out * self.output_scale + self.output_shift;
        let mut delta = vec![2.0 * (prediction - target) * self.output_scale * scale];

        let offsets: Vec<usize> = self
            .layers
            .iter()
            .scan(0, |acc, l| {
                let start = *acc;
                *acc += l.weights.len() + l.biases.len();
                Some(start)
            })
            .collect();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let prev = &acts[li];
            let base = offsets[li];
            for o in 0..layer.outputs {
                for i in 0..layer.inputs {
                    grad[base + o * layer.inputs + i] += delta[o] * prev[i];
                }
                grad[base + layer.weights.len() + o] += delta[o];
            }
            if li > 0 {
                delta = (0..layer.inputs)
                    .map(|i| {
                        let back: f64 = (0..layer.outputs)
                            .map(|o| layer.weights[o * layer.inputs + i] * delta[o])
                            .sum();
                        back * (1.0 - prev[i] * prev[i])
                    })
                    .collect();
            }
        }
    }

    fn mse(&self, ds: &Dataset) -> f64 {
        ds.inputs()
            .iter()
            .zip(ds.targets())
            .map(|(x, &y)| (self.predict(x) - y).powi(2))
            .sum::<f64>()
            / ds.len() as f64
    }
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(invalid("a network needs input and output layer sizes"));
    }
    if layer_sizes.iter().any(|&s| s == 0) {
        return Err(invalid("layer sizes must be positive"));
    }
    if *layer_sizes.last().expect("len checked") != 1 {
        return Err(invalid("the output layer must have exactly one unit"));
    }
    Ok(())
}

/// Analytic gradient of the squared error on one sample.
pub fn loss_gradient(model: &NetModel, input: &[f64], target: f64) -> Vec<f64> {
    let mut grad = vec![0.0; model.parameter_count()];
    model.accumulate_gradient(input, target, 1.0, &mut grad);
    grad
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedNet {
    pub model: NetModel,
    /// Mean squared error on the training data, in target units.
    pub final_loss: f64,
}

/// Full-batch gradient descent on the mean squared error of the
/// standardized targets.
pub fn train_net(
    ds: &Dataset,
    layer_sizes: &[usize],
    epochs: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<TrainedNet> {
    if layer_sizes.first() != Some(&ds.input_dim()) {
        return Err(invalid(format!(
            "input layer size {:?} does not match input dimension {}",
            layer_sizes.first(),
            ds.input_dim()
        )));
    }
    if !(learning_rate > 0.0 && learning_rate.is_finite()) {
        return Err(invalid(format!("learning rate must be positive, got {learning_rate}")));
    }
    let mut model = NetModel::new(layer_sizes, seed)?;
    let dim = ds.input_dim();
    let n = ds.len() as f64;
    for d in 0..dim {
        let col: Vec<f64> = ds.inputs().iter().map(|x| x[d]).collect();
        let (m, s) = standardization(&col);
        model.input_shift[d] = m;
        model.input_scale[d] = s;
    }
    let (m, s) = standardization(ds.targets());
    model.output_shift = m;
    model.output_scale = s;

    // In standardized units the loss is MSE / s², hence the 1/s² factor.
    let scale = 1.0 / (n * s * s);
    let mut params = model.parameters();
    let mut grad = vec![0.0; params.len()];
    for _ in 0..epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (x, &y) in ds.inputs().iter().zip(ds.targets()) {
            model.accumulate_gradient(x, y, scale, &mut grad);
        }
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= learning_rate * g;
        }
        model.set_parameters(&params);
    }
    let final_loss = model.mse(ds);
    Ok(TrainedNet { model, final_loss })
}

fn standardization(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    let s = var.sqrt();
    (m, if s > 0.0 { s } else { 1.0 })
}

/// Largest relative difference between the analytic gradient of the squared
/// error and central finite differences with step `eps`, over every
/// parameter. Each difference is divided by `max(|analytic|, |numeric|, 1e-6)`.
pub fn gradient_check(model: &NetModel, sample: (&[f64], f64), eps: f64) -> f64 {
    let (input, target) = sample;
    let analytic = loss_gradient(model, input, target);
    let base = model.parameters();
    let mut probe = model.clone();
    let loss = |m: &NetModel| (m.predict(input) - target).powi(2);
    let mut worst = 0.0f64;
    for (k, &a) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[k] = base[k] + eps;
        probe.set_parameters(&p);
        let up = loss(&probe);
        p[k] = base[k] - eps;
        probe.set_parameters(&p);
        let down = loss(&probe);
        let numeric = (up - down) / (2.0 * eps);
        let denom = a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((a - numeric).abs() / denom);
    }
    worst
}
