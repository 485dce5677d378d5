//! Equivariant MLP with weight tying: every channel i is updated as
//! x_i^{l+1} = sigma(W x_i + V sum_{j != i} x_j + u) with W, V, u shared
//! across channels, which makes the stack permutation equivariant by
//! construction. The neighbor sum is computed as (sum over all j) - x_i.

use rand::Rng;

use super::{init_weights, matvec, matvec_transpose_accum, outer_accum, Activation};
use crate::error::{Error, Result};
use crate::permutation::{canonical_sum, ParticleConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct EmlpLayer {
    pub d_in: usize,
    pub d_out: usize,
    /// Self weight, row-major d_out x d_in.
    pub w: Vec<f64>,
    /// Neighbor-sum weight, row-major d_out x d_in.
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmlpParams {
    pub layers: Vec<EmlpLayer>,
    pub activation: Activation,
    pub final_linear: bool,
}

impl EmlpParams {
    pub fn new(layers: Vec<EmlpLayer>, activation: Activation, final_linear: bool) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ShapeMismatch("an EMLP needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].d_out != pair[1].d_in {
                return Err(Error::ShapeMismatch(format!(
                    "layer widths do not chain: {} -> {}",
                    pair[0].d_out, pair[1].d_in
                )));
            }
        }
        for l in &layers {
            if l.w.len() != l.d_out * l.d_in
                || l.v.len() != l.d_out * l.d_in
                || l.u.len() != l.d_out
            {
                return Err(Error::ShapeMismatch("layer buffer sizes disagree with widths".into()));
            }
        }
        Ok(Self { layers, activation, final_linear })
    }

    pub fn random<R: Rng>(
        widths: &[usize],
        activation: Activation,
        final_linear: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::ShapeMismatch("need at least input and output widths".into()));
        }
        let layers = widths
            .windows(2)
            .map(|w| EmlpLayer {
                d_in: w[0],
                d_out: w[1],
                w: init_weights(rng, w[0], w[1], w[0] * w[1]),
                v: init_weights(rng, w[0], w[1], w[0] * w[1]),
                u: vec![0.0; w[1]],
            })
            .collect();
        Self::new(layers, activation, final_linear)
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.layers.iter().map(|l| l.d_in).collect();
        w.push(self.layers.last().expect("validated nonempty").d_out);
        w
    }

    pub fn d_in(&self) -> usize {
        self.layers[0].d_in
    }

    pub fn d_out(&self) -> usize {
        self.layers.last().expect("validated nonempty").d_out
    }
}

/// Per-layer channel activations and pre-activations; `acts[0]` is the input
/// configuration's columns, `acts[L]` the output columns.
#[derive(Debug, Clone)]
pub struct EmlpTrace {
    pub acts: Vec<Vec<Vec<f64>>>,
    pub preacts: Vec<Vec<Vec<f64>>>,
    /// Channel sums per layer input, for the V-gradient.
    pub sums: Vec<Vec<f64>>,
}

pub fn emlp_forward(p: &EmlpParams, x: &ParticleConfig) -> Result<ParticleConfig> {
    Ok(emlp_forward_traced(p, x)?.0)
}

pub fn emlp_forward_traced(
    p: &EmlpParams,
    x: &ParticleConfig,
) -> Result<(ParticleConfig, EmlpTrace)> {
    if x.d() != p.d_in() {
        return Err(Error::ShapeMismatch(format!(
            "EMLP expects d = {}, configuration has d = {}",
            p.d_in(),
            x.d()
        )));
    }
    let n = x.n();
    let depth = p.layers.len();
    let mut acts: Vec<Vec<Vec<f64>>> = Vec::with_capacity(depth + 1);
    let mut preacts: Vec<Vec<Vec<f64>>> = Vec::with_capacity(depth);
    let mut sums: Vec<Vec<f64>> = Vec::with_capacity(depth);
    acts.push((0..n).map(|i| x.particle(i).to_vec()).collect());
    for (l, layer) in p.layers.iter().enumerate() {
        let cols = &acts[l];
        // Canonical per-feature summation makes the channel sum, and with it
        // the whole stack, bit-for-bit invariant under column reordering.
        let sum: Vec<f64> = (0..layer.d_in)
            .map(|k| canonical_sum(cols.iter().map(|c| c[k]).collect()))
            .collect();
        let skip_sigma = p.final_linear && l + 1 == depth;
        let mut zs = Vec::with_capacity(n);
        let mut outs = Vec::with_capacity(n);
        for col in cols {
            let mut z = vec![0.0; layer.d_out];
            matvec(layer.d_out, layer.d_in, &layer.w, col, &mut z);
            let rest: Vec<f64> = sum.iter().zip(col).map(|(s, c)| s - c).collect();
            let mut vz = vec![0.0; layer.d_out];
            matvec(layer.d_out, layer.d_in, &layer.v, &rest, &mut vz);
            for ((zk, vk), uk) in z.iter_mut().zip(&vz).zip(&layer.u) {
                *zk += vk + uk;
            }
            let out: Vec<f64> = if skip_sigma {
                z.clone()
            } else {
                z.iter().map(|&v| p.activation.apply(v)).collect()
            };
            zs.push(z);
            outs.push(out);
        }
        sums.push(sum);
        preacts.push(zs);
        acts.push(outs);
    }
    let d_out = p.d_out();
    let mut entries = Vec::with_capacity(n * d_out);
    for col in &acts[depth] {
        entries.extend_from_slice(col);
    }
    let y = ParticleConfig::new(d_out, n, entries)?;
    Ok((y, EmlpTrace { acts, preacts, sums }))
}

#[derive(Debug, Clone)]
pub struct EmlpLayerGrad {
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EmlpGradients {
    pub layers: Vec<EmlpLayerGrad>,
}

impl EmlpGradients {
    pub fn zeros_like(p: &EmlpParams) -> Self {
        Self {
            layers: p
                .layers
                .iter()
                .map(|l| EmlpLayerGrad {
                    w: vec![0.0; l.w.len()],
                    v: vec![0.0; l.v.len()],
                    u: vec![0.0; l.u.len()],
                })
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &EmlpGradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.w.iter_mut().zip(&b.w) {
                *x += y;
            }
            for (x, y) in a.v.iter_mut().zip(&b.v) {
                *x += y;
            }
            for (x, y) in a.u.iter_mut().zip(&b.u) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        for l in &mut self.layers {
            for x in &mut l.w {
                *x *= c;
            }
            for x in &mut l.v {
                *x *= c;
            }
            for x in &mut l.u {
                *x *= c;
            }
        }
    }
}

/// Reverse-mode gradients for all W, V, u. `dy` holds the loss gradient for
/// each output column. Input-side gradients use
/// dx_j = W^T dz_j + V^T (sum_i dz_i - dz_j).
pub fn emlp_backward(p: &EmlpParams, trace: &EmlpTrace, dy: &[Vec<f64>]) -> EmlpGradients {
    let depth = p.layers.len();
    let n = dy.len();
    let mut grads = EmlpGradients::zeros_like(p);
    let mut da: Vec<Vec<f64>> = dy.to_vec();
    for l in (0..depth).rev() {
        let layer = &p.layers[l];
        let skip_sigma = p.final_linear && l + 1 == depth;
        let dz: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                if skip_sigma {
                    da[i].clone()
                } else {
                    da[i]
                        .iter()
                        .zip(&trace.preacts[l][i])
                        .map(|(g, &z)| g * p.activation.derivative(z))
                        .collect()
                }
            })
            .collect();
        let mut dz_sum = vec![0.0; layer.d_out];
        for dzi in &dz {
            for (s, v) in dz_sum.iter_mut().zip(dzi) {
                *s += v;
            }
        }
        let g = &mut grads.layers[l];
        for i in 0..n {
            let col = &trace.acts[l][i];
            outer_accum(layer.d_out, layer.d_in, &dz[i], col, &mut g.w);
            let rest: Vec<f64> = trace.sums[l].iter().zip(col).map(|(s, c)| s - c).collect();
            outer_accum(layer.d_out, layer.d_in, &dz[i], &rest, &mut g.v);
            for (gu, gz) in g.u.iter_mut().zip(&dz[i]) {
                *gu += gz;
            }
        }
        let mut dx: Vec<Vec<f64>> = vec![vec![0.0; layer.d_in]; n];
        for j in 0..n {
            matvec_transpose_accum(layer.d_out, layer.d_in, &layer.w, &dz[j], &mut dx[j]);
            let others: Vec<f64> = dz_sum.iter().zip(&dz[j]).map(|(s, z)| s - z).collect();
            matvec_transpose_accum(layer.d_out, layer.d_in, &layer.v, &others, &mut dx[j]);
        }
        da = dx;
    }
    grads
}

/// Deliberately broken layer for the weight-tying necessity witness: each
/// channel gets its own W_i. With distinct W_i the map is not equivariant.
pub fn untied_emlp_layer(
    per_channel_w: &[Vec<f64>],
    v: &[f64],
    u: &[f64],
    activation: Activation,
    x: &ParticleConfig,
) -> Result<ParticleConfig> {
    let n = x.n();
    let d_in = x.d();
    let d_out = u.len();
    if per_channel_w.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "need one W per channel: {} for n = {n}",
            per_channel_w.len()
        )));
    }
    for w in per_channel_w {
        if w.len() != d_out * d_in {
            return Err(Error::ShapeMismatch("per-channel W has wrong size".into()));
        }
    }
    if v.len() != d_out * d_in {
        return Err(Error::ShapeMismatch("V has wrong size".into()));
    }
    let sum: Vec<f64> = (0..d_in)
        .map(|k| canonical_sum((0..n).map(|i| x.coord(i, k)).collect()))
        .collect();
    let mut entries = Vec::with_capacity(n * d_out);
    for i in 0..n {
        let col = x.particle(i);
        let mut z = vec![0.0; d_out];
        matvec(d_out, d_in, &per_channel_w[i], col, &mut z);
        let rest: Vec<f64> = sum.iter().zip(col).map(|(s, c)| s - c).collect();
        let mut vz = vec![0.0; d_out];
        matvec(d_out, d_in, v, &rest, &mut vz);
        for ((zk, vk), uk) in z.iter_mut().zip(&vz).zip(u) {
            entries.push(activation.apply(*zk + vk + uk));
        }
    }
    ParticleConfig::new(d_out, n, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::networks::mlp::{mlp_forward, MlpLayer, MlpParams};
    use crate::permutation::{apply, enumerate};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_config(rng: &mut StdRng, d: usize, n: usize) -> ParticleConfig {
        let entries: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        ParticleConfig::new(d, n, entries).unwrap()
    }

    #[test]
    fn zero_v_reduces_to_independent_mlps() {
        let mut rng = StdRng::seed_from_u64(31);
        let mut emlp = EmlpParams::random(&[2, 5, 3], Activation::Tanh, true, &mut rng).unwrap();
        for l in &mut emlp.layers {
            l.v.iter_mut().for_each(|v| *v = 0.0);
        }
        let mlp = MlpParams::new(
            emlp.layers
                .iter()
                .map(|l| MlpLayer { d_in: l.d_in, d_out: l.d_out, w: l.w.clone(), u: l.u.clone() })
                .collect(),
            Activation::Tanh,
            true,
        )
        .unwrap();
        let x = random_config(&mut rng, 2, 4);
        let y = emlp_forward(&emlp, &x).unwrap();
        for i in 0..4 {
            let per_column = mlp_forward(&mlp, x.particle(i)).unwrap();
            assert_eq!(y.particle(i), per_column.as_slice());
        }
    }

    #[test]
    fn equivariance_is_exact_over_all_permutations() {
        let mut rng = StdRng::seed_from_u64(37);
        let emlp = EmlpParams::random(&[2, 6, 3], Activation::Tanh, false, &mut rng).unwrap();
        let x = random_config(&mut rng, 2, 4);
        let y = emlp_forward(&emlp, &x).unwrap();
        for pi in enumerate(4).unwrap() {
            let moved = emlp_forward(&emlp, &apply(&pi, &x).unwrap()).unwrap();
            let expected = apply(&pi, &y).unwrap();
            // Canonical channel sums make equivariance bitwise, well inside
            // the 1e-12 requirement.
            assert_eq!(moved, expected);
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = StdRng::seed_from_u64(41);
        let mut p = EmlpParams::random(&[1, 4, 2], Activation::Tanh, true, &mut rng).unwrap();
        let x = random_config(&mut rng, 1, 3);
        // Scalar objective: sum of all output entries.
        let objective = |p: &EmlpParams, x: &ParticleConfig| -> f64 {
            emlp_forward(p, x).unwrap().flat().iter().sum()
        };
        let (y, trace) = emlp_forward_traced(&p, &x).unwrap();
        let dy = vec![vec![1.0; 2]; y.n()];
        let grads = emlp_backward(&p, &trace, &dy);
        let h = 1e-5;
        for l in 0..p.layers.len() {
            for (buf, gbuf) in [(0, 0), (1, 1), (2, 2)] {
                let len = match buf {
                    0 => p.layers[l].w.len(),
                    1 => p.layers[l].v.len(),
                    _ => p.layers[l].u.len(),
                };
                for k in 0..len {
                    let read = |p: &EmlpParams| match buf {
                        0 => p.layers[l].w[k],
                        1 => p.layers[l].v[k],
                        _ => p.layers[l].u[k],
                    };
                    let write = |p: &mut EmlpParams, val: f64| match buf {
                        0 => p.layers[l].w[k] = val,
                        1 => p.layers[l].v[k] = val,
                        _ => p.layers[l].u[k] = val,
                    };
                    let orig = read(&p);
                    write(&mut p, orig + h);
                    let up = objective(&p, &x);
                    write(&mut p, orig - h);
                    let down = objective(&p, &x);
                    write(&mut p, orig);
                    let fd = (up - down) / (2.0 * h);
                    let got = match gbuf {
                        0 => grads.layers[l].w[k],
                        1 => grads.layers[l].v[k],
                        _ => grads.layers[l].u[k],
                    };
                    assert!(
                        (got - fd).abs() <= 1e-6 * fd.abs().max(1.0),
                        "layer {l} buf {buf} [{k}]: {got} vs {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn tied_v_equals_w_collapses_columns() {
        let mut rng = StdRng::seed_from_u64(43);
        let mut p = EmlpParams::random(&[2, 5, 2], Activation::Tanh, false, &mut rng).unwrap();
        for l in &mut p.layers {
            l.v = l.w.clone();
        }
        let x = random_config(&mut rng, 2, 4);
        let y = emlp_forward(&p, &x).unwrap();
        for i in 1..4 {
            for k in 0..2 {
                assert!(
                    (y.coord(i, k) - y.coord(0, k)).abs() <= 1e-12,
                    "columns differ: {} vs {}",
                    y.coord(i, k),
                    y.coord(0, k)
                );
            }
        }
    }

    #[test]
    fn untied_weights_break_equivariance() {
        let mut rng = StdRng::seed_from_u64(47);
        let n = 3;
        // Distinct per-channel weights: channel i scales by i + 1.
        let per_channel: Vec<Vec<f64>> =
            (0..n).map(|i| vec![(i + 1) as f64]).collect();
        let v = vec![0.25];
        let u = vec![0.1];
        let x = random_config(&mut rng, 1, n);
        let base = untied_emlp_layer(&per_channel, &v, &u, Activation::Tanh, &x).unwrap();
        let mut worst = 0.0f64;
        for pi in enumerate(n).unwrap() {
            let moved =
                untied_emlp_layer(&per_channel, &v, &u, Activation::Tanh, &apply(&pi, &x).unwrap())
                    .unwrap();
            let expected = apply(&pi, &base).unwrap();
            for i in 0..n {
                worst = worst.max((moved.coord(i, 0) - expected.coord(i, 0)).abs());
            }
        }
        assert!(worst > 1e-3, "untied layer unexpectedly equivariant: {worst}");
    }
}
