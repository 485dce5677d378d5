//! Symmetrization never hurts: for a symmetric target f and an arbitrary
//! approximant g, the group average ḡ is at least as close to f in sup-norm
//! as g itself. Since ḡ(X) draws on g at every permuted copy of X, the raw
//! sup must be sampled over the permutation orbits of the drawn points — on
//! the bare sample the inequality simply is not a theorem.

use crate::config::ExperimentConfig;
use crate::experiments::{case_rng, random_config};
use crate::pool::parallel_map;
use crate::report::{fmt_float, fmt_pass, Report};
use anyhow::Result;
use equisym::networks::{
    mlp_forward, symmetrize_scalar_approximant, Activation, MlpParams,
};
use equisym::permutation::{apply, enumerate};
use equisym::polynomials::{random_integer_poly, Normalization};
use equisym::{Permutation, SparsePolynomial};
use rand::rngs::StdRng;

const PAIRS: usize = 20;
const POINTS: usize = 1000;
const RESAMPLE_LIMIT: usize = 200;

fn random_symmetric_target(
    rng: &mut StdRng,
    n: usize,
    d: usize,
) -> equisym::Result<SparsePolynomial> {
    for _ in 0..RESAMPLE_LIMIT {
        let raw = random_integer_poly(rng, n * d, 4, 5);
        let sym = raw.symmetrized(n, d, Normalization::Mean)?;
        if !sym.is_zero() {
            return Ok(sym);
        }
    }
    unreachable!("symmetrization of a random polynomial is almost never zero");
}

struct PairResult {
    sup_err_raw: f64,
    sup_err_symmetrized: f64,
}

fn run_pair(cfg: &ExperimentConfig, pair: usize) -> equisym::Result<PairResult> {
    let (n, d) = (cfg.n, cfg.d);
    let mut rng = case_rng(cfg.seed, pair);
    let f = random_symmetric_target(&mut rng, n, d)?;
    let g = MlpParams::random(&[n * d, 8, 1], Activation::Tanh, true, &mut rng)?;
    let g_fn = |x: &equisym::ParticleConfig| Ok(mlp_forward(&g, x.flat())?[0]);
    let perms: Vec<Permutation> = enumerate(n)?.collect();

    let mut sup_err_raw = 0.0f64;
    let mut sup_err_symmetrized = 0.0f64;
    for _ in 0..POINTS {
        let x = random_config(&mut rng, d, n, cfg.d_box);
        let target = f.evaluate(&x)?;
        // f is symmetric, so over the orbit of x the raw error is
        // |f(x) − g(πx)| for each π.
        for pi in &perms {
            sup_err_raw = sup_err_raw.max((target - g_fn(&apply(pi, &x)?)?).abs());
        }
        let averaged = symmetrize_scalar_approximant(g_fn, &x)?;
        sup_err_symmetrized = sup_err_symmetrized.max((target - averaged).abs());
    }
    Ok(PairResult { sup_err_raw, sup_err_symmetrized })
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let results: Vec<equisym::Result<PairResult>> =
        parallel_map(PAIRS, |pair| run_pair(cfg, pair));

    let mut report = Report::new(
        &cfg.experiment,
        &["pair", "sup_err_raw", "sup_err_symmetrized", "pass"],
    );
    let mut worst_margin = f64::NEG_INFINITY;
    for (pair, result) in results.into_iter().enumerate() {
        let result = result?;
        let margin = result.sup_err_symmetrized - result.sup_err_raw;
        worst_margin = worst_margin.max(margin);
        let ok = margin <= cfg.tolerance;
        report.passed &= ok;
        report.push_row(vec![
            pair.to_string(),
            fmt_float(result.sup_err_raw),
            fmt_float(result.sup_err_symmetrized),
            fmt_pass(ok),
        ]);
    }
    report.set("pairs", PAIRS);
    report.set("points_per_pair", POINTS);
    report.set("worst_margin", worst_margin);
    Ok(report)
}
