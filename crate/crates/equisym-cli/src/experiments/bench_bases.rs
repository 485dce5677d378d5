//! Wall-clock cost of basis evaluation per family and particle count.
//! Timings are reported, never asserted: the pass condition only covers the
//! structural claim that each family has C(n+d,d) − 1 components.

use crate::config::ExperimentConfig;
use crate::report::{fmt_pass, Report};
use anyhow::Result;
use equisym::bases::evaluate_basis;
use equisym::{BasisDescriptor, BasisFamily, ParticleConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::hint::black_box;
use std::time::Instant;

pub const BENCH_SIZES: [usize; 4] = [4, 8, 16, 32];
const POINTS: usize = 100;
const WARMUPS: usize = 3;
const REPS: usize = 11;

fn binomial(n: usize, k: usize) -> usize {
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

pub fn expected_len(n: usize, d: usize) -> usize {
    binomial(n + d, d) - 1
}

pub fn family_label(family: BasisFamily) -> &'static str {
    match family {
        BasisFamily::PolarizedPower => "polarized_power",
        BasisFamily::ElementarySymmetric => "elementary_symmetric",
        BasisFamily::Sorting => "sorting",
        BasisFamily::SymmetrizedMonomial => "symmetrized_monomial",
    }
}

/// Median per-evaluation time in nanoseconds over `REPS` repetitions, each
/// timing `POINTS` evaluations, after `WARMUPS` discarded repetitions.
fn time_family(desc: &BasisDescriptor, points: &[ParticleConfig]) -> equisym::Result<f64> {
    let measure = |_: usize| -> equisym::Result<f64> {
        let start = Instant::now();
        for x in points {
            let values = evaluate_basis(desc, x)?;
            black_box(values.values().last().copied());
        }
        Ok(start.elapsed().as_nanos() as f64 / points.len() as f64)
    };
    for rep in 0..WARMUPS {
        measure(rep)?;
    }
    let mut means = (0..REPS).map(measure).collect::<equisym::Result<Vec<f64>>>()?;
    means.sort_by(f64::total_cmp);
    Ok(means[REPS / 2])
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let d = cfg.d;
    let mut report = Report::new(&cfg.experiment, &["family", "n", "m", "mean_ns", "pass"]);
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    // Timed sequentially on purpose; a shared worker pool would distort the
    // per-family numbers.
    for &n in &BENCH_SIZES {
        let points: Vec<ParticleConfig> = (0..POINTS)
            .map(|_| {
                let entries = (0..n * d).map(|_| rng.gen_range(-cfg.d_box..cfg.d_box)).collect();
                ParticleConfig::new(d, n, entries).expect("sized by construction")
            })
            .collect();
        let mut descriptors = vec![
            BasisDescriptor::polarized_power(n, d)?,
            BasisDescriptor::elementary_symmetric(n, d)?,
        ];
        if d == 1 {
            descriptors.push(BasisDescriptor::sorting(n)?);
        }
        for desc in descriptors {
            let mean_ns = time_family(&desc, &points)?;
            let ok = desc.len() == expected_len(n, d);
            report.passed &= ok;
            report.push_row(vec![
                family_label(desc.family()).to_string(),
                n.to_string(),
                desc.len().to_string(),
                format!("{mean_ns:.1}"),
                fmt_pass(ok),
            ]);
        }
    }
    report.set("points_per_rep", POINTS);
    report.set("warmups", WARMUPS);
    report.set("reps", REPS);
    report.set("note", "timings are reported, not asserted");
    Ok(report)
}
