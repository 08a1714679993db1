//! Fully connected network with ELU hidden layers and a linear output layer.
//!
//! Parameters live in one flat vector, layer by layer: the `out × in`
//! row-major weight matrix followed by the `out` biases.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations kept from a forward pass for [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct Tape {
    /// Input to every layer; the last entry is the network output.
    activations: Vec<Vec<f64>>,
    /// Pre-activation of every hidden layer.
    pre: Vec<Vec<f64>>,
}

impl Tape {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("tape holds the input")
    }
}

fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

fn elu_slope(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum()
}

impl Mlp {
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Invalid("network needs at least an input and an output layer".into()));
        }
        Ok(Mlp { sizes: sizes.to_vec(), params: alloc::vec![0.0; param_count(sizes)] })
    }

    /// Weights uniform in `±1/√fan_in`, biases zero.
    pub fn init<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        let mut offset = 0;
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            let n = w[1] * (w[0] + 1);
            for p in &mut net.params[offset..offset + n] {
                *p = rng.random_range(-bound..bound);
            }
            for p in &mut net.params[offset + w[0] * w[1]..offset + n] {
                *p = 0.0;
            }
            offset += n;
        }
        Ok(net)
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let net = Self::zeros(sizes)?;
        if params.len() != net.params.len() {
            return Err(Error::Invalid(alloc::format!(
                "expected {} parameters, got {}",
                net.params.len(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Invalid("network parameters must be finite".into()));
        }
        Ok(Mlp { params, ..net })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    /// Offset of the last layer's weights; everything from here on is the
    /// output head.
    pub fn head_offset(&self) -> usize {
        let k = self.sizes.len() - 1;
        param_count(&self.sizes[..k])
    }

    pub fn zero_head(&mut self) {
        let off = self.head_offset();
        self.params[off..].iter_mut().for_each(|p| *p = 0.0);
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_tape(x).activations.pop().unwrap()
    }

    pub fn forward_tape(&self, x: &[f64]) -> Tape {
        assert_eq!(x.len(), self.input_dim(), "input dimension");
        let layers = self.sizes.len() - 1;
        let mut activations = Vec::with_capacity(layers + 1);
        let mut pre = Vec::with_capacity(layers - 1);
        activations.push(x.to_vec());
        let mut offset = 0;
        for (i, w) in self.sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let bias = &self.params[offset + n_in * n_out..offset + n_out * (n_in + 1)];
            let input = activations.last().unwrap();
            let z: Vec<f64> = (0..n_out)
                .map(|r| {
                    let row = &weights[r * n_in..(r + 1) * n_in];
                    row.iter().zip(input.iter()).fold(bias[r], |acc, (a, b)| acc + a * b)
                })
                .collect();
            if i + 1 < layers {
                activations.push(z.iter().map(|v| elu(*v)).collect());
                pre.push(z);
            } else {
                activations.push(z);
            }
            offset += n_out * (n_in + 1);
        }
        Tape { activations, pre }
    }

    /// Adds `∂L/∂params` to `grad` given `∂L/∂output`.
    pub fn backward(&self, tape: &Tape, grad_output: &[f64], grad: &mut [f64]) {
        assert_eq!(grad.len(), self.params.len());
        let layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(layers);
        let mut off = 0;
        for w in self.sizes.windows(2) {
            offsets.push(off);
            off += w[1] * (w[0] + 1);
        }
        let mut delta = grad_output.to_vec();
        for i in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[i], self.sizes[i + 1]);
            let offset = offsets[i];
            let input = &tape.activations[i];
            for r in 0..n_out {
                let d = delta[r];
                let row = &mut grad[offset + r * n_in..offset + (r + 1) * n_in];
                for (g, a) in row.iter_mut().zip(input.iter()) {
                    *g += d * a;
                }
                grad[offset + n_in * n_out + r] += d;
            }
            if i == 0 {
                break;
            }
            let weights = &self.params[offset..offset + n_in * n_out];
            let mut next = alloc::vec![0.0; n_in];
            for r in 0..n_out {
                let d = delta[r];
                for (c, w) in weights[r * n_in..(r + 1) * n_in].iter().enumerate() {
                    next[c] += w * d;
                }
            }
            for (c, v) in next.iter_mut().enumerate() {
                *v *= elu_slope(tape.pre[i - 1][c]);
            }
            delta = next;
        }
    }
}
