//! One-dimensional generalized Slater determinant reconstruction: for
//! anti-symmetric polynomials ψ = Δ · (symmetric factor), the GSD built from
//! the symmetric quotient χ must reproduce ψ exactly, and χ must be a fixed
//! point of symmetrization.

use crate::config::ExperimentConfig;
use crate::experiments::{case_rng, mixed_rel};
use crate::pool::parallel_map;
use crate::report::{fmt_float, fmt_pass, Report};
use anyhow::Result;
use equisym::antisym::{chi_from_psi_poly, gsd_build_1d, slater_det, AsFunction};
use equisym::polynomials::{random_integer_poly, vandermonde_poly, Normalization};
use equisym::{ParticleConfig, SparsePolynomial};
use rand::rngs::StdRng;
use rand::Rng;

const CASES: usize = 10;
const POINTS: usize = 100;
const MIN_GAP: f64 = 0.1;
const CHI_FIXED_POINT_TOL: f64 = 1e-12;

fn max_abs_coeff(p: &SparsePolynomial) -> f64 {
    p.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max)
}

/// Coordinates with all pairwise gaps at least `MIN_GAP`, so the Vandermonde
/// factor is safely bounded away from zero.
fn gapped_point(rng: &mut StdRng, n: usize, half_width: f64) -> ParticleConfig {
    loop {
        let coords: Vec<f64> = (0..n).map(|_| rng.gen_range(-half_width..half_width)).collect();
        let mut sorted = coords.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|w| w[1] - w[0] >= MIN_GAP) {
            return ParticleConfig::from_coords(&coords).expect("coords are nonempty");
        }
    }
}

struct CaseResult {
    psi_terms: usize,
    chi_defect: f64,
    max_rel_error: f64,
}

fn run_case(cfg: &ExperimentConfig, case: usize) -> equisym::Result<CaseResult> {
    let n = cfg.n;
    let mut rng = case_rng(cfg.seed, case);
    let delta = vandermonde_poly(n);
    // Case 0 is the bare Vandermonde factor (χ = 1); the rest multiply in a
    // random symmetric polynomial with integer coefficients, built with the
    // plain-sum convention so every later step stays exact in f64.
    let psi = if case == 0 {
        delta
    } else {
        loop {
            let raw = random_integer_poly(&mut rng, n, 3, 3);
            let sym = raw.symmetrized(n, 1, Normalization::Sum)?;
            if !sym.is_zero() {
                break delta.mul(&sym)?;
            }
        }
    };

    let chi = chi_from_psi_poly(&psi, n)?;
    let chi_resym = chi.symmetrized(n, 1, Normalization::Mean)?;
    let chi_defect = max_abs_coeff(&chi.sub(&chi_resym)?) / max_abs_coeff(&chi).max(1.0);

    let asf = AsFunction::from_poly(n, 1, psi.clone())?;
    let mut max_rel_error = 0.0f64;
    for _ in 0..POINTS {
        let x = gapped_point(&mut rng, n, cfg.d_box);
        let det = slater_det(&gsd_build_1d(&asf, &x)?);
        let want = psi.evaluate(&x)?;
        max_rel_error = max_rel_error.max(mixed_rel(det - want, want));
    }
    Ok(CaseResult { psi_terms: psi.num_terms(), chi_defect, max_rel_error })
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let results: Vec<equisym::Result<CaseResult>> =
        parallel_map(CASES, |case| run_case(cfg, case));

    let mut report = Report::new(
        &cfg.experiment,
        &["case", "psi_terms", "chi_defect", "max_rel_error", "pass"],
    );
    let mut overall = 0.0f64;
    let mut worst_chi = 0.0f64;
    for (case, result) in results.into_iter().enumerate() {
        let result = result?;
        overall = overall.max(result.max_rel_error);
        worst_chi = worst_chi.max(result.chi_defect);
        let ok = result.max_rel_error <= cfg.tolerance
            && result.chi_defect <= CHI_FIXED_POINT_TOL;
        report.passed &= ok;
        report.push_row(vec![
            case.to_string(),
            result.psi_terms.to_string(),
            fmt_float(result.chi_defect),
            fmt_float(result.max_rel_error),
            fmt_pass(ok),
        ]);
    }
    report.set("cases", CASES);
    report.set("points_per_case", POINTS);
    report.set("max_rel_error", overall);
    report.set("max_chi_defect", worst_chi);
    Ok(report)
}
