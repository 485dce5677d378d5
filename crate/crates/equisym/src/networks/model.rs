//! The assembled scalar model: EMLP stack plus a head, with reverse-mode
//! gradients end to end, and the symmetrization operators that average an
//! arbitrary approximant over the permutation group.

use super::emlp::{emlp_backward, emlp_forward_traced, EmlpGradients, EmlpParams};
use super::head::{head_apply, head_backward, HeadDiagnostics, HeadSpec};
use crate::error::{Error, Result};
use crate::permutation::{apply, canonical_sum, enumerate, ParticleConfig};
use crate::polynomials::POLY_ORBIT_MAX_N;

/// EMLP + head for n particles in d dimensions, producing one real number.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivariantModel {
    n: usize,
    d: usize,
    pub emlp: EmlpParams,
    head: HeadSpec,
}

impl EquivariantModel {
    pub fn new(n: usize, d: usize, emlp: EmlpParams, head: HeadSpec) -> Result<Self> {
        if emlp.d_in() != d {
            return Err(Error::ShapeMismatch(format!(
                "EMLP input width {} does not match d = {d}",
                emlp.d_in()
            )));
        }
        head.validate(n, d, emlp.d_out())?;
        Ok(Self { n, d, emlp, head })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn head(&self) -> HeadSpec {
        self.head
    }

    fn check_input(&self, x: &ParticleConfig) -> Result<()> {
        if x.n() != self.n || x.d() != self.d {
            return Err(Error::ShapeMismatch(format!(
                "model expects n = {}, d = {}; configuration has n = {}, d = {}",
                self.n,
                self.d,
                x.n(),
                x.d()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &ParticleConfig) -> Result<f64> {
        self.check_input(x)?;
        let (y, _) = emlp_forward_traced(&self.emlp, x)?;
        head_apply(self.head, &y, x)
    }

    /// Gradients of `dout * output` with respect to every parameter.
    pub fn backward(&self, x: &ParticleConfig, dout: f64) -> Result<ModelGradients> {
        self.check_input(x)?;
        let (y, trace) = emlp_forward_traced(&self.emlp, x)?;
        let (dy_flat, diagnostics) = head_backward(self.head, &y, x, dout)?;
        let d_out = self.emlp.d_out();
        let dy: Vec<Vec<f64>> =
            (0..self.n).map(|i| dy_flat[i * d_out..(i + 1) * d_out].to_vec()).collect();
        let emlp = emlp_backward(&self.emlp, &trace, &dy);
        Ok(ModelGradients { emlp, head: diagnostics })
    }
}

/// Parameter gradients plus head diagnostics from one backward pass.
#[derive(Debug, Clone)]
pub struct ModelGradients {
    pub emlp: EmlpGradients,
    pub head: HeadDiagnostics,
}

fn check_orbit_size(n: usize) -> Result<()> {
    if n > POLY_ORBIT_MAX_N {
        return Err(Error::OracleSize { n, max: POLY_ORBIT_MAX_N });
    }
    Ok(())
}

/// Plain group average for scalar approximants of symmetric targets:
/// g_bar(X) = (1/n!) sum_pi g(apply(pi, X)). Averaging can only shrink the
/// sup-distance to a symmetric target.
pub fn symmetrize_scalar_approximant<F>(g: F, x: &ParticleConfig) -> Result<f64>
where
    F: Fn(&ParticleConfig) -> Result<f64>,
{
    check_orbit_size(x.n())?;
    let mut values = Vec::new();
    for pi in enumerate(x.n())? {
        values.push(g(&apply(&pi, x)?)?);
    }
    let count = values.len() as f64;
    Ok(canonical_sum(values) / count)
}

/// Permute-back group average for equivariant approximants:
/// g_bar(X) = (1/n!) sum_pi apply(pi^{-1}, g(apply(pi, X))).
pub fn symmetrize_equivariant_approximant<F>(g: F, x: &ParticleConfig) -> Result<ParticleConfig>
where
    F: Fn(&ParticleConfig) -> Result<ParticleConfig>,
{
    check_orbit_size(x.n())?;
    let mut per_entry: Vec<Vec<f64>> = Vec::new();
    let mut d_out = 0;
    let mut count = 0usize;
    for pi in enumerate(x.n())? {
        let out = apply(&pi.inverse(), &g(&apply(&pi, x)?)?)?;
        if per_entry.is_empty() {
            d_out = out.d();
            per_entry = vec![Vec::new(); out.flat().len()];
        }
        for (bucket, &v) in per_entry.iter_mut().zip(out.flat()) {
            bucket.push(v);
        }
        count += 1;
    }
    let entries: Vec<f64> =
        per_entry.into_iter().map(|vals| canonical_sum(vals) / count as f64).collect();
    ParticleConfig::new(d_out, x.n(), entries)
}
