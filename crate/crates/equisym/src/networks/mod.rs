//! Small dense networks: plain MLPs, weight-tied equivariant MLPs, symmetric
//! and anti-symmetric heads, reverse-mode gradients, a deterministic trainer,
//! and bit-exact checkpoints.

pub mod checkpoint;
pub mod emlp;
pub mod head;
pub mod mlp;
pub mod model;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use emlp::{emlp_forward, untied_emlp_layer, EmlpGradients, EmlpLayer, EmlpParams};
pub use head::{head_apply, max_pool, mean_pool, HeadSpec};
pub use mlp::{mlp_forward, MlpGradients, MlpLayer, MlpParams};
pub use model::{
    symmetrize_equivariant_approximant, symmetrize_scalar_approximant, EquivariantModel,
    ModelGradients,
};
pub use train::{train, train_mlp, Optimizer, TrainConfig};

use rand::Rng;

/// Element-wise nonlinearity between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    /// Default for approximation experiments: smooth and bounded.
    Tanh,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative at the pre-activation z (relu picks the right limit at 0).
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
        }
    }
}

/// out = M x for a row-major rows x cols matrix.
pub(crate) fn matvec(rows: usize, cols: usize, m: &[f64], x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(out.len(), rows);
    for r in 0..rows {
        let row = &m[r * cols..(r + 1) * cols];
        out[r] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// out += M^T y for a row-major rows x cols matrix.
pub(crate) fn matvec_transpose_accum(
    rows: usize,
    cols: usize,
    m: &[f64],
    y: &[f64],
    out: &mut [f64],
) {
    debug_assert_eq!(m.len(), rows * cols);
    debug_assert_eq!(y.len(), rows);
    debug_assert_eq!(out.len(), cols);
    for r in 0..rows {
        let row = &m[r * cols..(r + 1) * cols];
        for c in 0..cols {
            out[c] += row[c] * y[r];
        }
    }
}

/// grad += y x^T (outer product accumulation into a rows x cols gradient).
pub(crate) fn outer_accum(rows: usize, cols: usize, y: &[f64], x: &[f64], grad: &mut [f64]) {
    debug_assert_eq!(grad.len(), rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            grad[r * cols + c] += y[r] * x[c];
        }
    }
}

/// Symmetric uniform init, half-interval sqrt(6 / (fan_in + fan_out)).
pub(crate) fn init_weights<R: Rng>(rng: &mut R, fan_in: usize, fan_out: usize, n: usize) -> Vec<f64> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.gen_range(-a..a)).collect()
}
