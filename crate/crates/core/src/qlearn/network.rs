//! Dense feed-forward Q-network with hand-written backpropagation.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, z: &mut Array2<f64>) {
        match self {
            Activation::Relu => z.mapv_inplace(|x| x.max(0.0)),
            Activation::Tanh => z.mapv_inplace(f64::tanh),
            Activation::Linear => {}
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Linear => 1.0,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Linear => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Linear),
            _ => None,
        }
    }
}

/// `outputs = activation(inputs · weights + bias)`, weights shaped (inputs, outputs).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Dense { weights: Array2::zeros((inputs, outputs)), bias: Array1::zeros(outputs), activation }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = Array2::from_shape_fn((inputs, outputs), |_| rng.gen_range(-limit..limit));
        Dense { weights, bias: Array1::zeros(outputs), activation }
    }

    pub fn inputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.ncols()
    }

    fn forward(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.weights);
        z += &self.bias;
        self.activation.apply(&mut z);
        z
    }
}

/// Parameter gradients, one entry per layer.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub bias: Vec<Array1<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    pub layers: Vec<Dense>,
}

impl QNetwork {
    pub fn new(layers: Vec<Dense>) -> Self {
        for pair in layers.windows(2) {
            assert_eq!(pair[0].outputs(), pair[1].inputs(), "layer shapes must chain");
        }
        QNetwork { layers }
    }

    /// `inputs -> hidden[0] -> ... -> outputs`, ReLU hidden layers and a tanh output.
    pub fn mlp<R: Rng>(inputs: usize, hidden: &[usize], outputs: usize, rng: &mut R) -> Self {
        let mut sizes = vec![inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(outputs);
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i == last { Activation::Tanh } else { Activation::Relu };
                Dense::glorot(w[0], w[1], act, rng)
            })
            .collect();
        QNetwork::new(layers)
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map_or(0, Dense::outputs)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Q-values for one observation.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.input_len(), "observation length does not match the network input");
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row vector");
        self.forward_batch(&x).into_raw_vec_and_offset().0
    }

    pub fn forward_batch(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        let mut a = self.layers[0].forward(x);
        for layer in &self.layers[1..] {
            a = layer.forward(&a.view());
        }
        a
    }

    fn activations(&self, x: &ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_owned());
        for layer in &self.layers {
            let next = layer.forward(&acts.last().expect("input").view());
            acts.push(next);
        }
        acts
    }

    /// Mean squared error between `targets` and the Q-value of each row's taken action.
    pub fn loss(&self, states: &ArrayView2<f64>, actions: &[usize], targets: &[f64]) -> f64 {
        let q = self.forward_batch(states);
        let n = actions.len() as f64;
        actions.iter().zip(targets).enumerate().map(|(i, (&a, &y))| (q[[i, a]] - y).powi(2)).sum::<f64>() / n
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn loss_and_gradients(
        &self,
        states: &ArrayView2<f64>,
        actions: &[usize],
        targets: &[f64],
    ) -> (f64, Gradients) {
        let acts = self.activations(states);
        let output = acts.last().expect("output");
        let n = actions.len() as f64;
        let mut loss = 0.0;
        let mut delta = Array2::<f64>::zeros(output.raw_dim());
        let out_act = self.layers.last().expect("layers").activation;
        for (i, (&a, &y)) in actions.iter().zip(targets).enumerate() {
            let q = output[[i, a]];
            loss += (q - y).powi(2);
            delta[[i, a]] = 2.0 * (q - y) / n * out_act.derivative_from_output(q);
        }
        loss /= n;

        let mut weights = Vec::with_capacity(self.layers.len());
        let mut bias = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            weights.push(acts[l].t().dot(&delta));
            bias.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                let mut back = delta.dot(&self.layers[l].weights.t());
                let act = self.layers[l - 1].activation;
                back.zip_mut_with(&acts[l], |d, &a| *d *= act.derivative_from_output(a));
                delta = back;
            }
        }
        weights.reverse();
        bias.reverse();
        (loss, Gradients { weights, bias })
    }

    /// Plain gradient-descent update.
    pub fn apply_sgd(&mut self, grads: &Gradients, learning_rate: f64) {
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(grads.weights.iter().zip(&grads.bias)) {
            layer.weights.scaled_add(-learning_rate, gw);
            layer.bias.scaled_add(-learning_rate, gb);
        }
    }

    /// All parameters flattened layer by layer: weights row-major, then bias.
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for layer in &self.layers {
            out.extend(layer.weights.iter().copied());
            out.extend(layer.bias.iter().copied());
        }
        out
    }

    pub fn set_flat_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.parameter_count());
        let mut it = params.iter().copied();
        for layer in &mut self.layers {
            layer.weights.iter_mut().for_each(|w| *w = it.next().expect("length checked"));
            layer.bias.iter_mut().for_each(|b| *b = it.next().expect("length checked"));
        }
    }

    pub fn flat_gradients(grads: &Gradients) -> Vec<f64> {
        let mut out = Vec::new();
        for (gw, gb) in grads.weights.iter().zip(&grads.bias) {
            out.extend(gw.iter().copied());
            out.extend(gb.iter().copied());
        }
        out
    }
}

/// Adam moment estimates for a [`QNetwork`].
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamState {
    pub fn new(parameters: usize) -> Self {
        AdamState { m: vec![0.0; parameters], v: vec![0.0; parameters], t: 0 }
    }

    pub fn apply(&mut self, net: &mut QNetwork, grads: &Gradients, learning_rate: f64) {
        const BETA1: f64 = 0.9;
        const BETA2: f64 = 0.999;
        const EPS: f64 = 1e-7;
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        let mut k = 0;
        for (layer, (gw, gb)) in net.layers.iter_mut().zip(grads.weights.iter().zip(&grads.bias)) {
            let params = layer.weights.iter_mut().chain(layer.bias.iter_mut());
            let gs = gw.iter().chain(gb.iter());
            for (p, &g) in params.zip(gs) {
                self.m[k] = BETA1 * self.m[k] + (1.0 - BETA1) * g;
                self.v[k] = BETA2 * self.v[k] + (1.0 - BETA2) * g * g;
                *p -= learning_rate * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + EPS);
                k += 1;
            }
        }
    }
}
