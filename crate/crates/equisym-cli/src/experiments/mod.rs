//! The experiment suites behind `equisym run`, one module each.

mod bench_bases;
mod emlp_universality;
mod ferminet_fit;
mod gsd_1d;
mod gsd_nd;
mod invariance;
mod lemma4;
mod newton;

use crate::config::ExperimentConfig;
use crate::report::Report;
use anyhow::{bail, Result};
use equisym::networks::{train, EquivariantModel, TrainConfig};
use equisym::ParticleConfig;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.experiment.as_str() {
        "invariance" => invariance::run(cfg),
        "newton" => newton::run(cfg),
        "gsd-1d" => gsd_1d::run(cfg),
        "gsd-nd" => gsd_nd::run(cfg),
        "emlp-universality" => emlp_universality::run(cfg),
        "ferminet-fit" => ferminet_fit::run(cfg),
        "bench-bases" => bench_bases::run(cfg),
        "lemma4" => lemma4::run(cfg),
        other => bail!("unknown experiment `{other}`"),
    }
}

/// Decorrelated per-case seed so cases stay deterministic under any
/// parallel schedule.
pub(crate) fn case_seed(seed: u64, case: usize) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(case as u64 + 1)
}

pub(crate) fn case_rng(seed: u64, case: usize) -> StdRng {
    StdRng::seed_from_u64(case_seed(seed, case))
}

pub(crate) fn random_config(rng: &mut StdRng, d: usize, n: usize, half_width: f64) -> ParticleConfig {
    let entries: Vec<f64> =
        (0..n * d).map(|_| rng.gen_range(-half_width..half_width)).collect();
    ParticleConfig::new(d, n, entries).expect("entry count matches by construction")
}

/// |err| relative to the value's magnitude, floored at 1 so near-zero values
/// are judged absolutely.
pub(crate) fn mixed_rel(err: f64, reference: f64) -> f64 {
    err.abs() / reference.abs().max(1.0)
}

/// Runs the optimizer in three stages at lr, lr/4, and lr/16. Mini-batch
/// Adam at a fixed step keeps bouncing around the optimum; shrinking the step
/// makes the final parameters land near it instead of on a loss spike.
pub(crate) fn train_staged(
    model: &mut EquivariantModel,
    samples: &[(ParticleConfig, f64)],
    base: &TrainConfig,
) -> equisym::Result<Vec<f64>> {
    let stages = [
        (base.epochs / 2, base.learning_rate),
        (base.epochs / 4, base.learning_rate / 4.0),
        (base.epochs - base.epochs / 2 - base.epochs / 4, base.learning_rate / 16.0),
    ];
    let mut trace = Vec::with_capacity(base.epochs);
    for (stage, (epochs, learning_rate)) in stages.into_iter().enumerate() {
        if epochs == 0 {
            continue;
        }
        let cfg = TrainConfig {
            epochs,
            learning_rate,
            seed: base.seed.wrapping_add(stage as u64),
            ..base.clone()
        };
        trace.extend(train(model, samples, &cfg)?);
    }
    Ok(trace)
}
