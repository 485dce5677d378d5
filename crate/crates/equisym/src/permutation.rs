//! Exact permutation-group machinery and the brute-force (anti)symmetrization
//! oracle used as ground truth throughout the crate.
//!
//! Particle indices are 1-based in the doc comments (matching the usual
//! mathematical convention) and 0-based in the API. A permutation `p` maps
//! slot `i` to source slot `p.image(i)`: applying `p` to a configuration
//! puts column `p.image(i)` of the input into column `i` of the output.

use crate::error::{Error, Result};

/// All-permutation oracles are hard-capped here: 10! is about 3.6M terms,
/// anything beyond is intractable by design.
pub const ORACLE_MAX_N: usize = 10;

/// A permutation of {1..n}, stored as 0-based images.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from 0-based images; fails unless they form a
    /// bijection on {0..n-1}.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &im in &images {
            if im >= n || seen[im] {
                return Err(Error::Parse(format!(
                    "images {images:?} are not a bijection on 0..{n}"
                )));
            }
            seen[im] = true;
        }
        Ok(Self { images })
    }

    /// Convenience constructor from the 1-based tuples used in the math
    /// literature, e.g. `(2,3,1)`.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let shifted: Vec<usize> = images
            .iter()
            .map(|&im| im.checked_sub(1).ok_or_else(|| Error::Parse("index 0 in 1-based permutation".into())))
            .collect::<Result<_>>()?;
        Self::from_images(shifted)
    }

    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// 0-based image of slot `i`.
    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Composition `self ∘ other`: first apply `other`, then `self`, i.e.
    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch { perm_len: self.len(), config_len: other.len() });
        }
        Ok(Self { images: (0..self.len()).map(|i| self.images[other.images[i]]).collect() })
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &im) in self.images.iter().enumerate() {
            inv[im] = i;
        }
        Self { images: inv }
    }

    /// Sign of the permutation: +1 for even, -1 for odd, by cycle
    /// decomposition. A cycle of length L contributes (-1)^(L-1).
    pub fn parity(&self) -> i32 {
        let n = self.len();
        let mut visited = vec![false; n];
        let mut sign = 1i32;
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut len = 0usize;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.images[i];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        sign
    }

    /// Reorders a slice the same way `permuted` reorders particle columns.
    pub fn apply_to_slice<T: Clone>(&self, xs: &[T]) -> Result<Vec<T>> {
        if xs.len() != self.len() {
            return Err(Error::SizeMismatch { perm_len: self.len(), config_len: xs.len() });
        }
        Ok((0..self.len()).map(|i| xs[self.images[i]].clone()).collect())
    }
}

/// Yields all n! permutations exactly once, in lexicographic order on the
/// image vectors. Capped at n <= 10.
pub fn enumerate(n: usize) -> Result<PermutationIter> {
    if n > ORACLE_MAX_N {
        return Err(Error::OracleSize { n, max: ORACLE_MAX_N });
    }
    Ok(PermutationIter { next: Some((0..n).collect()) })
}

pub struct PermutationIter {
    next: Option<Vec<usize>>,
}

impl Iterator for PermutationIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let out = Permutation { images: current.clone() };
        self.next = next_lexicographic(current);
        Some(out)
    }
}

// Standard next-permutation step; None once the sequence is descending.
fn next_lexicographic(mut v: Vec<usize>) -> Option<Vec<usize>> {
    let n = v.len();
    if n < 2 {
        return None;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    Some(v)
}

/// An n-particle configuration in d dimensions: the d x n matrix whose
/// column i is the coordinate vector of particle i. Stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleConfig {
    entries: Vec<f64>,
    n: usize,
    d: usize,
}

impl ParticleConfig {
    /// Builds a configuration from column-major entries (particle 0's d
    /// coordinates first). All entries must be finite.
    pub fn new(d: usize, n: usize, entries: Vec<f64>) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::ShapeMismatch(format!("d = {d}, n = {n}; both must be >= 1")));
        }
        if entries.len() != d * n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for a {d}x{n} configuration, got {}",
                d * n,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| !e.is_finite()) {
            return Err(Error::NonFinite(format!("configuration entry {bad}")));
        }
        Ok(Self { entries, n, d })
    }

    /// 1-dimensional configuration from scalar particle coordinates.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        Self::new(1, coords.len(), coords.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Coordinate `axis` of particle `i`.
    pub fn coord(&self, i: usize, axis: usize) -> f64 {
        self.entries[i * self.d + axis]
    }

    /// Coordinate vector of particle `i`.
    pub fn particle(&self, i: usize) -> &[f64] {
        &self.entries[i * self.d..(i + 1) * self.d]
    }

    /// Flat column-major view (the polynomial modules index coordinates as
    /// particle-block-major multi-indices over exactly this layout).
    pub fn flat(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    /// Column i of the result is column `p.image(i)` of `self`; whole
    /// particle columns move, individual coordinates never split.
    pub fn permuted(&self, p: &Permutation) -> Result<Self> {
        if p.len() != self.n {
            return Err(Error::SizeMismatch { perm_len: p.len(), config_len: self.n });
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for i in 0..self.n {
            entries.extend_from_slice(self.particle(p.image(i)));
        }
        Ok(Self { entries, n: self.n, d: self.d })
    }

    /// Swaps particles `a` and `b`.
    pub fn swapped(&self, a: usize, b: usize) -> Self {
        let mut out = self.clone();
        for axis in 0..self.d {
            out.entries.swap(a * self.d + axis, b * self.d + axis);
        }
        out
    }
}

/// Permute-and-apply shorthand matching the math notation f(S_pi(X)).
pub fn apply(p: &Permutation, x: &ParticleConfig) -> Result<ParticleConfig> {
    x.permuted(p)
}

// Orbit sums are accumulated in a canonical order (sorted by value bits), so
// the result is bitwise identical for any permutation of the input: the orbit
// of apply(pi, X) is the same multiset of matrices, hence the same multiset
// of f-values, hence the same sorted sum.
pub(crate) fn canonical_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    values.iter().sum()
}

/// Brute-force symmetrization oracle: (1/n!) sum over all permutations of
/// f(S_pi(X)). Exact up to a fixed canonical summation order.
pub fn symmetrize<F: Fn(&ParticleConfig) -> f64>(f: F, x: &ParticleConfig) -> Result<f64> {
    let n = x.n();
    let mut values = Vec::new();
    for p in enumerate(n)? {
        values.push(f(&x.permuted(&p)?));
    }
    let count = values.len() as f64;
    Ok(canonical_sum(values) / count)
}

/// Brute-force anti-symmetrization oracle: (1/n!) sum of sigma(pi) f(S_pi(X)).
pub fn antisymmetrize<F: Fn(&ParticleConfig) -> f64>(f: F, x: &ParticleConfig) -> Result<f64> {
    let n = x.n();
    let mut values = Vec::new();
    for p in enumerate(n)? {
        values.push(p.parity() as f64 * f(&x.permuted(&p)?));
    }
    let count = values.len() as f64;
    Ok(canonical_sum(values) / count)
}
