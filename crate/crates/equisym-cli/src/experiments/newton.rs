//! Newton's identities as an executable cross-check: elementary symmetric
//! values computed directly from the generating product must match the ones
//! recovered from power sums via the e-from-p recursion.

use crate::config::ExperimentConfig;
use crate::experiments::{case_rng, mixed_rel, random_config};
use crate::pool::parallel_map;
use crate::report::{fmt_float, fmt_pass, Report};
use anyhow::{ensure, Result};
use equisym::bases::{self, newton_e_from_p};
use equisym::BasisDescriptor;

const CASES: usize = 200;

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    ensure!(cfg.d == 1, "the Newton recursion relates one-dimensional bases; got d = {}", cfg.d);
    let n = cfg.n;
    let power = BasisDescriptor::polarized_power(n, 1)?;
    let elementary = BasisDescriptor::elementary_symmetric(n, 1)?;

    let errors: Vec<equisym::Result<f64>> = parallel_map(CASES, |k| {
        let mut rng = case_rng(cfg.seed, k);
        let x = random_config(&mut rng, 1, n, cfg.d_box);
        let p = bases::polarized_basis(&power, &x)?;
        let via_newton = newton_e_from_p(p.values());
        let direct = bases::elementary_symmetric(&elementary, &x)?;
        let mut worst = 0.0f64;
        for (a, b) in via_newton.iter().zip(direct.values()) {
            worst = worst.max(mixed_rel(a - b, *b));
        }
        Ok(worst)
    });

    let mut report = Report::new(&cfg.experiment, &["case", "max_rel_error", "pass"]);
    let mut overall = 0.0f64;
    for (k, err) in errors.into_iter().enumerate() {
        let err = err?;
        overall = overall.max(err);
        let ok = err <= cfg.tolerance;
        report.passed &= ok;
        report.push_row(vec![k.to_string(), fmt_float(err), fmt_pass(ok)]);
    }
    report.set("cases", CASES);
    report.set("max_rel_error", overall);
    Ok(report)
}
