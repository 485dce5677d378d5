//! Mean-squared-error training loops for equivariant models and plain MLPs.
//!
//! Both loops are fully deterministic given the config seed: sample order is
//! shuffled by a seeded generator, batch gradients are accumulated in the
//! shuffled order, and the optimizer state is updated once per batch.

use super::emlp::{EmlpGradients, EmlpParams};
use super::mlp::{mlp_backward, mlp_forward_traced, MlpGradients, MlpParams};
use super::model::EquivariantModel;
use crate::error::{Error, Result};
use crate::permutation::ParticleConfig;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// First and second Adam moments, one flat buffer per parameter array.
struct MomentState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u32,
}

fn apply_update(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    cfg: &TrainConfig,
    state: &mut Option<MomentState>,
) {
    match cfg.optimizer {
        Optimizer::Sgd => {
            for (p, g) in params.iter_mut().zip(grads) {
                for (pk, gk) in p.iter_mut().zip(*g) {
                    *pk -= cfg.learning_rate * gk;
                }
            }
        }
        Optimizer::Adam => {
            let st = state.get_or_insert_with(|| MomentState {
                m: grads.iter().map(|g| vec![0.0; g.len()]).collect(),
                v: grads.iter().map(|g| vec![0.0; g.len()]).collect(),
                t: 0,
            });
            st.t += 1;
            let bc1 = 1.0 - ADAM_BETA1.powi(st.t as i32);
            let bc2 = 1.0 - ADAM_BETA2.powi(st.t as i32);
            for (idx, (p, g)) in params.iter_mut().zip(grads).enumerate() {
                for k in 0..g.len() {
                    let m = &mut st.m[idx][k];
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g[k];
                    let v = &mut st.v[idx][k];
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g[k] * g[k];
                    p[k] -= cfg.learning_rate * (*m / bc1) / ((*v / bc2).sqrt() + ADAM_EPS);
                }
            }
        }
    }
}

fn emlp_param_slices(p: &mut EmlpParams) -> Vec<&mut [f64]> {
    p.layers
        .iter_mut()
        .flat_map(|l| [l.w.as_mut_slice(), l.v.as_mut_slice(), l.u.as_mut_slice()])
        .collect()
}

fn emlp_grad_slices(g: &EmlpGradients) -> Vec<&[f64]> {
    g.layers
        .iter()
        .flat_map(|l| [l.w.as_slice(), l.v.as_slice(), l.u.as_slice()])
        .collect()
}

fn mlp_param_slices(p: &mut MlpParams) -> Vec<&mut [f64]> {
    p.layers
        .iter_mut()
        .flat_map(|l| [l.w.as_mut_slice(), l.u.as_mut_slice()])
        .collect()
}

fn mlp_grad_slices(g: &MlpGradients) -> Vec<&[f64]> {
    g.layers.iter().flat_map(|l| [l.w.as_slice(), l.u.as_slice()]).collect()
}

fn check_config(cfg: &TrainConfig, num_samples: usize) -> Result<()> {
    if num_samples == 0 {
        return Err(Error::Training("no training samples".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Training("batch_size must be positive".into()));
    }
    if !cfg.learning_rate.is_finite() || cfg.learning_rate <= 0.0 {
        return Err(Error::Training(format!(
            "learning_rate must be positive and finite, got {}",
            cfg.learning_rate
        )));
    }
    Ok(())
}

/// Minimizes mean squared error of the model over the samples. Returns the
/// per-epoch training loss (averaged over the predictions made during that
/// epoch, before each batch update).
pub fn train(
    model: &mut EquivariantModel,
    samples: &[(ParticleConfig, f64)],
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    check_config(cfg, samples.len())?;
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut state: Option<MomentState> = None;
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_sq = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            // d(MSE)/d(pred_k) = 2 (pred_k - target_k) / batch_len.
            let scale = 2.0 / batch.len() as f64;
            let mut acc: Option<EmlpGradients> = None;
            for &idx in batch {
                let (x, target) = &samples[idx];
                let pred = model.forward(x)?;
                let residual = pred - target;
                epoch_sq += residual * residual;
                let g = model.backward(x, scale * residual)?;
                match &mut acc {
                    Some(a) => a.accumulate(&g.emlp),
                    None => acc = Some(g.emlp),
                }
            }
            let grads = acc.expect("batch is nonempty");
            let mut params = emlp_param_slices(&mut model.emlp);
            apply_update(&mut params, &emlp_grad_slices(&grads), cfg, &mut state);
        }
        let loss = epoch_sq / samples.len() as f64;
        if !loss.is_finite() {
            return Err(Error::Training(format!(
                "loss became non-finite at epoch {epoch}; try a smaller learning rate"
            )));
        }
        trace.push(loss);
    }
    Ok(trace)
}

/// Same loop for a plain MLP with scalar output and flat inputs.
pub fn train_mlp(
    params: &mut MlpParams,
    samples: &[(Vec<f64>, f64)],
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    check_config(cfg, samples.len())?;
    let widths = params.widths();
    if *widths.last().expect("validated nonempty") != 1 {
        return Err(Error::Training(format!(
            "train_mlp expects a scalar output, got width {}",
            widths.last().expect("validated nonempty")
        )));
    }
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut state: Option<MomentState> = None;
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_sq = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let scale = 2.0 / batch.len() as f64;
            let mut acc: Option<MlpGradients> = None;
            for &idx in batch {
                let (x, target) = &samples[idx];
                let (out, trace_fwd) = mlp_forward_traced(params, x)?;
                let residual = out[0] - target;
                epoch_sq += residual * residual;
                let g = mlp_backward(params, &trace_fwd, &[scale * residual]);
                match &mut acc {
                    Some(a) => a.accumulate(&g),
                    None => acc = Some(g),
                }
            }
            let grads = acc.expect("batch is nonempty");
            let mut slices = mlp_param_slices(params);
            apply_update(&mut slices, &mlp_grad_slices(&grads), cfg, &mut state);
        }
        let loss = epoch_sq / samples.len() as f64;
        if !loss.is_finite() {
            return Err(Error::Training(format!(
                "loss became non-finite at epoch {epoch}; try a smaller learning rate"
            )));
        }
        trace.push(loss);
    }
    Ok(trace)
}
