//! Output heads mapping the EMLP's d' x n output to a scalar: symmetric
//! pooling, the Vandermonde-multiplied anti-symmetric scalar (d = 1), and the
//! generalized Slater determinant head.

use crate::antisym::{slater_det, GsdMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::permutation::ParticleConfig;
use crate::polynomials::vandermonde_product;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadSpec {
    /// Mean over channels; the scalar head requires d' = 1.
    MeanPool,
    /// Max over channels; the scalar head requires d' = 1.
    MaxPool,
    /// mean(Y) times the Vandermonde product of X; requires d = 1, d' = 1.
    VandermondeProduct,
    /// det of Phi with Phi[j][i] = feature i of channel j; requires d' = n.
    GsdHead,
}

impl HeadSpec {
    /// Checks the head against the model geometry (n particles, input d,
    /// EMLP output width d_out).
    pub fn validate(self, n: usize, d: usize, d_out: usize) -> Result<()> {
        match self {
            HeadSpec::MeanPool | HeadSpec::MaxPool => {
                if d_out != 1 {
                    return Err(Error::HeadInvariant(format!(
                        "{self:?} scalar head requires d' = 1, got {d_out}"
                    )));
                }
            }
            HeadSpec::VandermondeProduct => {
                if d != 1 || d_out != 1 {
                    return Err(Error::HeadInvariant(format!(
                        "VandermondeProduct requires d = 1 and d' = 1, got d = {d}, d' = {d_out}"
                    )));
                }
            }
            HeadSpec::GsdHead => {
                if d_out != n {
                    return Err(Error::HeadInvariant(format!(
                        "GsdHead requires d' = n = {n}, got d' = {d_out}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Mean over channels, any d': a symmetric function of the columns.
pub fn mean_pool(y: &ParticleConfig) -> Vec<f64> {
    let n = y.n() as f64;
    (0..y.d())
        .map(|k| (0..y.n()).map(|i| y.coord(i, k)).sum::<f64>() / n)
        .collect()
}

/// Component-wise max over channels, any d'.
pub fn max_pool(y: &ParticleConfig) -> Vec<f64> {
    (0..y.d())
        .map(|k| (0..y.n()).map(|i| y.coord(i, k)).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// Assemble the GSD matrix from the EMLP output: entry (particle j,
/// orbital i) = feature i of channel j.
pub fn gsd_from_output(y: &ParticleConfig) -> Result<GsdMatrix> {
    let n = y.n();
    if y.d() != n {
        return Err(Error::HeadInvariant(format!(
            "GsdHead requires d' = n = {n}, got d' = {}",
            y.d()
        )));
    }
    let mut entries = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            entries.push(y.coord(j, i));
        }
    }
    GsdMatrix::from_entries(n, entries)
}

/// Scalar head value from the EMLP output Y and the original input X.
pub fn head_apply(head: HeadSpec, y: &ParticleConfig, x: &ParticleConfig) -> Result<f64> {
    head.validate(x.n(), x.d(), y.d())?;
    if y.n() != x.n() {
        return Err(Error::ShapeMismatch(format!(
            "output has {} channels, input has {}",
            y.n(),
            x.n()
        )));
    }
    match head {
        HeadSpec::MeanPool => Ok(mean_pool(y)[0]),
        HeadSpec::MaxPool => Ok(max_pool(y)[0]),
        HeadSpec::VandermondeProduct => Ok(mean_pool(y)[0] * vandermonde_product(x.flat())),
        HeadSpec::GsdHead => Ok(slater_det(&gsd_from_output(y)?)),
    }
}

/// Diagnostics from the determinant gradient's near-singular handling.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeadDiagnostics {
    /// Condition estimate of Phi when the GSD head was differentiated.
    pub gsd_condition: Option<f64>,
    /// True when the gradient came from the regularized solve.
    pub gsd_regularized: bool,
    /// True when the gradient came from the exact cofactor expansion.
    pub gsd_cofactor: bool,
}

/// Gradient of the scalar head output with respect to every entry of Y,
/// scaled by `dout`. Returned in the Y configuration's flat layout.
pub fn head_backward(
    head: HeadSpec,
    y: &ParticleConfig,
    x: &ParticleConfig,
    dout: f64,
) -> Result<(Vec<f64>, HeadDiagnostics)> {
    head.validate(x.n(), x.d(), y.d())?;
    let n = y.n();
    let d_out = y.d();
    let mut dy = vec![0.0; n * d_out];
    let mut diag = HeadDiagnostics::default();
    match head {
        HeadSpec::MeanPool => {
            for i in 0..n {
                dy[i * d_out] = dout / n as f64;
            }
        }
        HeadSpec::MaxPool => {
            // Route the gradient to the first maximal channel.
            let mut best = 0;
            for i in 1..n {
                if y.coord(i, 0) > y.coord(best, 0) {
                    best = i;
                }
            }
            dy[best * d_out] = dout;
        }
        HeadSpec::VandermondeProduct => {
            let delta = vandermonde_product(x.flat());
            for i in 0..n {
                dy[i * d_out] = dout * delta / n as f64;
            }
        }
        HeadSpec::GsdHead => {
            let (dphi, d) = det_gradient(y)?;
            diag = d;
            // dY at (channel j, feature i) is ddet/dPhi[j][i].
            for j in 0..n {
                for i in 0..n {
                    dy[j * d_out + i] = dout * dphi[j * n + i];
                }
            }
        }
    }
    Ok((dy, diag))
}

/// ddet/dPhi as a row-major n x n buffer: det(Phi) * Phi^{-T}, with an exact
/// cofactor fallback for small near-singular matrices and a regularized
/// solve otherwise.
fn det_gradient(y: &ParticleConfig) -> Result<(Vec<f64>, HeadDiagnostics)> {
    let n = y.n();
    let mut phi = Matrix::zeros(n);
    for j in 0..n {
        for i in 0..n {
            phi.set(j, i, y.coord(j, i));
        }
    }
    let mut diag = HeadDiagnostics::default();
    let lu = phi.lu();
    let condition = lu.as_ref().map_or(f64::INFINITY, |f| f.condition_estimate());
    diag.gsd_condition = Some(condition);
    if condition <= 1e12 {
        let lu = lu.expect("finite condition implies a factorization");
        let det = lu.det();
        let inv = lu.inverse();
        let mut grad = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                grad[j * n + i] = det * inv.get(i, j);
            }
        }
        return Ok((grad, diag));
    }
    if n <= 4 {
        diag.gsd_cofactor = true;
        let mut grad = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                grad[j * n + i] = sign * minor_det(&phi, j, i);
            }
        }
        return Ok((grad, diag));
    }
    // Regularized solve: nudge the diagonal just enough to factorize.
    diag.gsd_regularized = true;
    let mut scale = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            scale = scale.max(phi.get(j, i).abs());
        }
    }
    let eps = 1e-10 * (1.0 + scale);
    let mut reg = phi.clone();
    for k in 0..n {
        reg.set(k, k, reg.get(k, k) + eps);
    }
    let lu = reg.lu().ok_or_else(|| {
        Error::Training("GSD gradient: matrix singular even after regularization".into())
    })?;
    let det = lu.det();
    let inv = lu.inverse();
    let mut grad = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            grad[j * n + i] = det * inv.get(i, j);
        }
    }
    Ok((grad, diag))
}

/// Determinant of the matrix with row `row` and column `col` removed.
fn minor_det(m: &Matrix, row: usize, col: usize) -> f64 {
    let n = m.n();
    let mut sub = Matrix::zeros(n - 1);
    let mut rr = 0;
    for j in 0..n {
        if j == row {
            continue;
        }
        let mut cc = 0;
        for i in 0..n {
            if i == col {
                continue;
            }
            sub.set(rr, cc, m.get(j, i));
            cc += 1;
        }
        rr += 1;
    }
    if n == 1 {
        1.0
    } else {
        sub.det()
    }
}
