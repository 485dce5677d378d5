//! Exhaustive permutation-invariance audit: every symmetric basis family and
//! a mean-pooled equivariant model, checked under every permutation of S_n at
//! a handful of random configurations. One report row per permutation.

use crate::config::ExperimentConfig;
use crate::experiments::random_config;
use crate::pool::parallel_map;
use crate::report::{fmt_float, fmt_pass, Report};
use anyhow::Result;
use equisym::networks::{Activation, EmlpParams, EquivariantModel, HeadSpec};
use equisym::permutation::{apply, enumerate};
use equisym::polynomials::POLY_ORBIT_MAX_N;
use equisym::{bases, BasisDescriptor, ParticleConfig, Permutation};
use rand::rngs::StdRng;
use rand::SeedableRng;

const POINTS: usize = 5;
const SYM_MONOMIAL_DEGREE: u32 = 3;

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let (n, d) = (cfg.n, cfg.d);
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let points: Vec<ParticleConfig> =
        (0..POINTS).map(|_| random_config(&mut rng, d, n, cfg.d_box)).collect();

    let mut descriptors = vec![
        BasisDescriptor::polarized_power(n, d)?,
        BasisDescriptor::elementary_symmetric(n, d)?,
    ];
    if d == 1 {
        descriptors.push(BasisDescriptor::sorting(n)?);
    }
    if n <= POLY_ORBIT_MAX_N {
        descriptors.push(BasisDescriptor::symmetrized_monomial(n, SYM_MONOMIAL_DEGREE)?);
    }
    let emlp = EmlpParams::random(&[d, 6, 1], Activation::Tanh, true, &mut rng)?;
    let model = EquivariantModel::new(n, d, emlp, HeadSpec::MeanPool)?;

    // Reference values at the unpermuted points.
    let mut reference: Vec<(Vec<Vec<f64>>, f64)> = Vec::with_capacity(points.len());
    for x in &points {
        let per_family: Vec<Vec<f64>> = descriptors
            .iter()
            .map(|desc| bases::evaluate_basis(desc, x).map(|b| b.into_values()))
            .collect::<equisym::Result<_>>()?;
        reference.push((per_family, model.forward(x)?));
    }

    let perms: Vec<Permutation> = enumerate(n)?.collect();
    let deviations: Vec<equisym::Result<f64>> = parallel_map(perms.len(), |k| {
        let pi = &perms[k];
        let mut worst = 0.0f64;
        for (x, (family_vals, model_val)) in points.iter().zip(&reference) {
            let moved = apply(pi, x)?;
            for (desc, base) in descriptors.iter().zip(family_vals) {
                let vals = bases::evaluate_basis(desc, &moved)?;
                for (a, b) in vals.values().iter().zip(base) {
                    worst = worst.max((a - b).abs());
                }
            }
            worst = worst.max((model.forward(&moved)? - model_val).abs());
        }
        Ok(worst)
    });

    let mut report = Report::new(&cfg.experiment, &["case", "permutation", "max_abs_deviation", "pass"]);
    let mut overall = 0.0f64;
    for (k, (pi, dev)) in perms.iter().zip(deviations).enumerate() {
        let dev = dev?;
        overall = overall.max(dev);
        let ok = dev <= cfg.tolerance;
        report.passed &= ok;
        let images: Vec<String> = pi.images().iter().map(|i| i.to_string()).collect();
        report.push_row(vec![
            k.to_string(),
            images.join(" "),
            fmt_float(dev),
            fmt_pass(ok),
        ]);
    }
    report.set("cases", perms.len());
    report.set("families", descriptors.len() + 1);
    report.set("points_per_case", POINTS);
    report.set("max_abs_deviation", overall);
    Ok(report)
}
