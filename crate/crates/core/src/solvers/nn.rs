//! Small dense networks in `f64` with hand-written backpropagation.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn new<R: Rng>(inputs: usize, outputs: usize, gain: f64, rng: &mut R) -> Self {
        // Glorot-uniform scaled by `gain`.
        let limit = gain * (6.0 / (inputs + outputs) as f64).sqrt();
        Self {
            inputs,
            outputs,
            weights: (0..inputs * outputs).map(|_| rng.gen_range(-limit..=limit)).collect(),
            bias: vec![0.0; outputs],
        }
    }

    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let mut acc = self.bias[o];
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            out.push(acc);
        }
    }
}

/// Feed-forward network: tanh on hidden layers, linear output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations kept for backpropagation: input, then each layer's output
/// (after tanh for hidden layers).
#[derive(Debug, Clone, Default)]
pub struct Cache {
    acts: Vec<Vec<f64>>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("forward ran")
    }
}

impl Mlp {
    /// `sizes` lists input, hidden and output widths. The output layer is
    /// initialised with `output_gain`.
    pub fn new<R: Rng>(sizes: &[usize], output_gain: f64, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "need input and output sizes");
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| Dense::new(w[0], w[1], if i == last { output_gain } else { 1.0 }, rng))
            .collect();
        Self { layers }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().expect("layers").outputs
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            l.apply(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|v| *v = v.tanh());
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    pub fn forward_cached(&self, x: &[f64], cache: &mut Cache) {
        cache.acts.resize(self.layers.len() + 1, Vec::new());
        cache.acts[0].clear();
        cache.acts[0].extend_from_slice(x);
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let (done, rest) = cache.acts.split_at_mut(i + 1);
            l.apply(&done[i], &mut rest[0]);
            if i < last {
                rest[0].iter_mut().for_each(|v| *v = v.tanh());
            }
        }
    }

    /// Accumulate into `grads` the gradient of a scalar whose derivative
    /// with respect to the output is `grad_out`.
    pub fn backward(&self, cache: &Cache, grad_out: &[f64], grads: &mut Mlp) {
        let mut delta = grad_out.to_vec();
        for i in (0..self.layers.len()).rev() {
            let l = &self.layers[i];
            let g = &mut grads.layers[i];
            let input = &cache.acts[i];
            for o in 0..l.outputs {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                g.bias[o] += d;
                let row = &mut g.weights[o * l.inputs..(o + 1) * l.inputs];
                for (gw, x) in row.iter_mut().zip(input) {
                    *gw += d * x;
                }
            }
            if i == 0 {
                break;
            }
            let mut prev = vec![0.0; l.inputs];
            for o in 0..l.outputs {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += d * w;
                }
            }
            // derivative of tanh at the previous layer's output
            for (p, a) in prev.iter_mut().zip(&cache.acts[i]) {
                *p *= 1.0 - a * a;
            }
            delta = prev;
        }
    }

    pub fn params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            v.extend_from_slice(&l.weights);
            v.extend_from_slice(&l.bias);
        }
        v
    }

    pub fn for_each_param_mut(&mut self, mut f: impl FnMut(usize, &mut f64)) {
        let mut i = 0;
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                f(i, w);
                i += 1;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.for_each_param_mut(|_, v| *v *= s);
    }

    pub fn sum_squares(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
            .map(|v| v * v)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
            .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Plain gradient step `theta <- theta - lr * grad`.
    #[default]
    Sgd,
    Adam,
}

/// Optimizer state for one network.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    pub fn new(kind: OptimizerKind, lr: f64, n_params: usize) -> Self {
        let state = if kind == OptimizerKind::Adam { n_params } else { 0 };
        Self {
            kind,
            lr,
            m: vec![0.0; state],
            v: vec![0.0; state],
            t: 0,
        }
    }

    pub fn set_learning_rate(&mut self, lr: f64) {
        self.lr = lr;
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Mlp) {
        let g = grads.params();
        match self.kind {
            OptimizerKind::Sgd => {
                let lr = self.lr;
                net.for_each_param_mut(|i, p| *p -= lr * g[i]);
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let c1 = 1.0 - Self::BETA1.powi(self.t);
                let c2 = 1.0 - Self::BETA2.powi(self.t);
                let (m, v, lr) = (&mut self.m, &mut self.v, self.lr);
                net.for_each_param_mut(|i, p| {
                    m[i] = Self::BETA1 * m[i] + (1.0 - Self::BETA1) * g[i];
                    v[i] = Self::BETA2 * v[i] + (1.0 - Self::BETA2) * g[i] * g[i];
                    *p -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + Self::EPS);
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::new(&[4, 6, 5, 3], 1.0, &mut rng);
        let x = [0.3, -0.7, 0.1, 0.9];
        let w = [0.5, -1.2, 2.0];
        let f = |n: &Mlp| n.forward(&x).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let mut cache = Cache::default();
        net.forward_cached(&x, &mut cache);
        let mut g = net.zeros_like();
        net.backward(&cache, &w, &mut g);
        let analytic = g.params();
        let h = 1e-6;
        for i in 0..net.n_params() {
            let mut plus = net.clone();
            plus.for_each_param_mut(|k, p| {
                if k == i {
                    *p += h
                }
            });
            let mut minus = net.clone();
            minus.for_each_param_mut(|k, p| {
                if k == i {
                    *p -= h
                }
            });
            let numeric = (f(&plus) - f(&minus)) / (2.0 * h);
            let denom = (analytic[i].abs() + numeric.abs()).max(1e-8);
            assert!((analytic[i] - numeric).abs() / denom < 1e-5, "param {i}: {} vs {numeric}", analytic[i]);
        }
    }

    #[test]
    fn cached_forward_equals_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::new(&[3, 8, 2], 0.5, &mut rng);
        let mut cache = Cache::default();
        net.forward_cached(&[1.0, 2.0, -1.0], &mut cache);
        assert_eq!(cache.output(), net.forward(&[1.0, 2.0, -1.0]).as_slice());
    }

    #[test]
    fn sgd_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = Mlp::new(&[2, 2], 1.0, &mut rng);
        let before = net.params();
        let mut g = net.zeros_like();
        g.for_each_param_mut(|_, p| *p = 1.0);
        Optimizer::new(OptimizerKind::Sgd, 0.1, net.n_params()).step(&mut net, &g);
        for (a, b) in before.iter().zip(net.params()) {
            assert!((a - 0.1 - b).abs() < 1e-12);
        }
    }
}
