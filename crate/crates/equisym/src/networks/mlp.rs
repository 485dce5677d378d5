//! Plain multi-layer perceptron: x^{l+1} = sigma(W^l x^l + u^l), with the
//! final nonlinearity optionally dropped.

use rand::Rng;

use super::{init_weights, matvec, outer_accum, Activation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MlpLayer {
    pub d_in: usize,
    pub d_out: usize,
    /// Row-major d_out x d_in.
    pub w: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<MlpLayer>,
    pub activation: Activation,
    pub final_linear: bool,
}

impl MlpParams {
    pub fn new(layers: Vec<MlpLayer>, activation: Activation, final_linear: bool) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ShapeMismatch("an MLP needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].d_out != pair[1].d_in {
                return Err(Error::ShapeMismatch(format!(
                    "layer widths do not chain: {} -> {}",
                    pair[0].d_out, pair[1].d_in
                )));
            }
        }
        for l in &layers {
            if l.w.len() != l.d_out * l.d_in || l.u.len() != l.d_out {
                return Err(Error::ShapeMismatch("layer buffer sizes disagree with widths".into()));
            }
        }
        Ok(Self { layers, activation, final_linear })
    }

    /// Random parameters for the width chain `widths[0] -> ... -> widths[L]`.
    pub fn random<R: Rng>(
        widths: &[usize],
        activation: Activation,
        final_linear: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::ShapeMismatch("need at least input and output widths".into()));
        }
        let layers = widths
            .windows(2)
            .map(|w| MlpLayer {
                d_in: w[0],
                d_out: w[1],
                w: init_weights(rng, w[0], w[1], w[0] * w[1]),
                u: vec![0.0; w[1]],
            })
            .collect();
        Self::new(layers, activation, final_linear)
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.layers.iter().map(|l| l.d_in).collect();
        w.push(self.layers.last().expect("validated nonempty").d_out);
        w
    }
}

/// Activations and pre-activations recorded by the traced forward pass;
/// `acts[0]` is the input, `acts[L]` the output.
#[derive(Debug, Clone)]
pub struct MlpTrace {
    pub acts: Vec<Vec<f64>>,
    pub preacts: Vec<Vec<f64>>,
}

pub fn mlp_forward(p: &MlpParams, x: &[f64]) -> Result<Vec<f64>> {
    Ok(mlp_forward_traced(p, x)?.0)
}

pub fn mlp_forward_traced(p: &MlpParams, x: &[f64]) -> Result<(Vec<f64>, MlpTrace)> {
    if x.len() != p.layers[0].d_in {
        return Err(Error::ShapeMismatch(format!(
            "MLP expects input of length {}, got {}",
            p.layers[0].d_in,
            x.len()
        )));
    }
    let depth = p.layers.len();
    let mut acts = Vec::with_capacity(depth + 1);
    let mut preacts = Vec::with_capacity(depth);
    acts.push(x.to_vec());
    for (l, layer) in p.layers.iter().enumerate() {
        let mut z = vec![0.0; layer.d_out];
        matvec(layer.d_out, layer.d_in, &layer.w, &acts[l], &mut z);
        for (zk, uk) in z.iter_mut().zip(&layer.u) {
            *zk += uk;
        }
        let skip_sigma = p.final_linear && l + 1 == depth;
        let a: Vec<f64> = if skip_sigma {
            z.clone()
        } else {
            z.iter().map(|&v| p.activation.apply(v)).collect()
        };
        preacts.push(z);
        acts.push(a);
    }
    Ok((acts[depth].clone(), MlpTrace { acts, preacts }))
}

#[derive(Debug, Clone)]
pub struct MlpLayerGrad {
    pub w: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MlpGradients {
    pub layers: Vec<MlpLayerGrad>,
}

impl MlpGradients {
    pub fn zeros_like(p: &MlpParams) -> Self {
        Self {
            layers: p
                .layers
                .iter()
                .map(|l| MlpLayerGrad { w: vec![0.0; l.w.len()], u: vec![0.0; l.u.len()] })
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &MlpGradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.w.iter_mut().zip(&b.w) {
                *x += y;
            }
            for (x, y) in a.u.iter_mut().zip(&b.u) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        for l in &mut self.layers {
            for x in &mut l.w {
                *x *= c;
            }
            for x in &mut l.u {
                *x *= c;
            }
        }
    }
}

/// Reverse-mode parameter gradients from the recorded trace and the gradient
/// of the loss with respect to the output vector.
pub fn mlp_backward(p: &MlpParams, trace: &MlpTrace, dout: &[f64]) -> MlpGradients {
    let depth = p.layers.len();
    let mut grads = MlpGradients::zeros_like(p);
    let mut da = dout.to_vec();
    for l in (0..depth).rev() {
        let layer = &p.layers[l];
        let skip_sigma = p.final_linear && l + 1 == depth;
        let dz: Vec<f64> = if skip_sigma {
            da.clone()
        } else {
            da.iter()
                .zip(&trace.preacts[l])
                .map(|(g, &z)| g * p.activation.derivative(z))
                .collect()
        };
        outer_accum(layer.d_out, layer.d_in, &dz, &trace.acts[l], &mut grads.layers[l].w);
        for (gu, gz) in grads.layers[l].u.iter_mut().zip(&dz) {
            *gu += gz;
        }
        let mut dx = vec![0.0; layer.d_in];
        super::matvec_transpose_accum(layer.d_out, layer.d_in, &layer.w, &dz, &mut dx);
        da = dx;
    }
    grads
}
