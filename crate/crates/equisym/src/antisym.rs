//! Anti-symmetric representations: Vandermonde division psi = chi * Delta
//! for d = 1, generalized Slater determinant (GSD) matrices for any d via
//! lexicographic sorting, and determinant evaluation. Every builder satisfies
//! det(Phi(X)) = psi(X) by construction.

use std::fmt;
use std::sync::OnceLock;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::permutation::{apply, ParticleConfig, Permutation};
use crate::polynomials::{divide_exact, pow_u32, Normalization, SparsePolynomial};

/// Orbital matrix Phi with entry (j, i) = phi_i(x_j | x_{rest}): rows index
/// particles, columns index orbitals. Builders guarantee det Phi = psi.
#[derive(Debug, Clone, PartialEq)]
pub struct GsdMatrix {
    inner: Matrix,
}

impl GsdMatrix {
    /// Raw constructor, row-major entries; mainly for tests and display.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n || n == 0 {
            return Err(Error::ShapeMismatch(format!(
                "GSD matrix needs n*n entries, got {} for n = {n}",
                entries.len()
            )));
        }
        let mut inner = Matrix::zeros(n);
        for j in 0..n {
            for i in 0..n {
                inner.set(j, i, entries[j * n + i]);
            }
        }
        Ok(Self { inner })
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    /// Entry (particle j, orbital i).
    pub fn entry(&self, particle: usize, orbital: usize) -> f64 {
        self.inner.get(particle, orbital)
    }
}

/// Determinant of the orbital matrix via LU with partial pivoting; exactly
/// singular matrices give 0.
pub fn slater_det(m: &GsdMatrix) -> f64 {
    m.inner.det()
}

/// An anti-symmetric function psi of n particles in d dimensions, either an
/// exact polynomial oracle or an opaque evaluator. Anti-symmetry is
/// spot-checked at construction on 20 random (permutation, X) pairs.
pub struct AsFunction {
    n: usize,
    d: usize,
    kind: AsKind,
    /// Cached exact quotient chi = psi / Delta for the polynomial kind.
    chi_cache: OnceLock<SparsePolynomial>,
}

pub enum AsKind {
    OraclePoly(SparsePolynomial),
    Callable(Box<dyn Fn(&ParticleConfig) -> f64 + Send + Sync>),
}

impl fmt::Debug for AsFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            AsKind::OraclePoly(_) => "OraclePoly",
            AsKind::Callable(_) => "Callable",
        };
        write!(f, "AsFunction {{ n: {}, d: {}, kind: {kind} }}", self.n, self.d)
    }
}

impl AsFunction {
    pub fn from_poly(n: usize, d: usize, psi: SparsePolynomial) -> Result<Self> {
        if psi.arity() != n * d {
            return Err(Error::ArityMismatch { poly: psi.arity(), input: n * d });
        }
        let f = Self { n, d, kind: AsKind::OraclePoly(psi), chi_cache: OnceLock::new() };
        f.spot_check_antisymmetry()?;
        Ok(f)
    }

    pub fn from_callable(
        n: usize,
        d: usize,
        psi: impl Fn(&ParticleConfig) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let f = Self {
            n,
            d,
            kind: AsKind::Callable(Box::new(psi)),
            chi_cache: OnceLock::new(),
        };
        f.spot_check_antisymmetry()?;
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &AsKind {
        &self.kind
    }

    pub fn evaluate(&self, x: &ParticleConfig) -> Result<f64> {
        if x.n() != self.n || x.d() != self.d {
            return Err(Error::ShapeMismatch(format!(
                "psi expects n = {}, d = {}; got n = {}, d = {}",
                self.n,
                self.d,
                x.n(),
                x.d()
            )));
        }
        let v = match &self.kind {
            AsKind::OraclePoly(p) => p.evaluate(x)?,
            AsKind::Callable(f) => f(x),
        };
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("psi returned {v}")));
        }
        Ok(v)
    }

    /// psi(apply(pi, X)) = sign(pi) psi(X) on 20 seeded random pairs,
    /// relative tolerance 1e-10.
    fn spot_check_antisymmetry(&self) -> Result<()> {
        let mut rng = StdRng::seed_from_u64(0x00a5_f00d);
        for _ in 0..20 {
            let entries: Vec<f64> =
                (0..self.n * self.d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let x = ParticleConfig::new(self.d, self.n, entries)?;
            let mut images: Vec<usize> = (0..self.n).collect();
            images.shuffle(&mut rng);
            let pi = Permutation::from_images(images)?;
            let sign = pi.parity() as f64;
            let lhs = self.evaluate(&apply(&pi, &x)?)?;
            let rhs = sign * self.evaluate(&x)?;
            if (lhs - rhs).abs() > 1e-10 * rhs.abs().max(1.0) {
                return Err(Error::NotAntisymmetric(format!(
                    "psi(pi X) = {lhs} but sign(pi) psi(X) = {rhs}"
                )));
            }
        }
        Ok(())
    }
}

/// All particle pairs (i, j) with i < j in lexicographic order; the product
/// of (x_j - x_i) over them is the Vandermonde determinant.
fn pair_order(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Exact symmetric quotient chi = psi / Delta for polynomial psi, d = 1,
/// dividing out (x_j - x_i) pair by pair in fixed lexicographic order.
pub fn chi_from_psi_poly(psi: &SparsePolynomial, n: usize) -> Result<SparsePolynomial> {
    if psi.arity() != n {
        return Err(Error::ArityMismatch { poly: psi.arity(), input: n });
    }
    // Anti-symmetry pre-check: psi must be a fixed point of the oracle.
    let projected = psi.antisymmetrized(n, 1, Normalization::Mean)?;
    let diff = psi.sub(&projected)?;
    let scale: f64 = psi.terms().map(|(_, c)| c.abs()).fold(1.0, f64::max);
    if diff.terms().any(|(_, c)| c.abs() > 1e-12 * scale) {
        return Err(Error::NotAntisymmetric(
            "polynomial is not a fixed point of the anti-symmetrization oracle".into(),
        ));
    }
    let mut chi = psi.clone();
    for (i, j) in pair_order(n) {
        chi = divide_exact(&chi, i, j)?;
    }
    Ok(chi)
}

/// Numeric chi(X) = psi(X) / Delta(X) for d = 1, recursively dividing out
/// (x_j - x_i); inside the coincidence tolerance the quotient is replaced by
/// a central finite-difference derivative in x_j, which is the exact limit.
pub fn chi_from_psi_numeric(psi: &AsFunction, x: &ParticleConfig) -> Result<f64> {
    if psi.d() != 1 || x.d() != 1 {
        return Err(Error::Unsupported(
            "numeric Vandermonde division is defined for d = 1 only".into(),
        ));
    }
    if x.n() != psi.n() {
        return Err(Error::ShapeMismatch(format!(
            "psi expects n = {}, configuration has n = {}",
            psi.n(),
            x.n()
        )));
    }
    let tau = 1e-6 * (1.0 + x.max_abs());
    let pairs = pair_order(x.n());
    divide_level(psi, &pairs, pairs.len(), x, tau)
}

fn with_coord(x: &ParticleConfig, particle: usize, value: f64) -> Result<ParticleConfig> {
    let mut entries = x.flat().to_vec();
    entries[particle * x.d()] = value;
    ParticleConfig::new(x.d(), x.n(), entries)
}

fn divide_level(
    psi: &AsFunction,
    pairs: &[(usize, usize)],
    level: usize,
    x: &ParticleConfig,
    tau: f64,
) -> Result<f64> {
    if level == 0 {
        return psi.evaluate(x);
    }
    let (i, j) = pairs[level - 1];
    let gap = x.coord(j, 0) - x.coord(i, 0);
    if gap.abs() >= tau {
        Ok(divide_level(psi, pairs, level - 1, x, tau)? / gap)
    } else {
        // The numerator vanishes at the coincidence, so the quotient's limit
        // is the x_j-derivative there; approximate it centrally with step tau.
        let base = x.coord(i, 0);
        let plus = with_coord(x, j, base + tau)?;
        let minus = with_coord(x, j, base - tau)?;
        let df = divide_level(psi, pairs, level - 1, &plus, tau)?
            - divide_level(psi, pairs, level - 1, &minus, tau)?;
        Ok(df / (2.0 * tau))
    }
}

/// Vandermonde-division builder for d = 1: orbital 1 is the constant column
/// chi(X), orbital i is x_j^{i-1}, so det Phi = chi(X) * Delta(X) = psi(X).
pub fn gsd_build_1d(psi: &AsFunction, x: &ParticleConfig) -> Result<GsdMatrix> {
    if psi.d() != 1 || x.d() != 1 {
        return Err(Error::Unsupported("the Vandermonde GSD requires d = 1".into()));
    }
    if x.n() != psi.n() {
        return Err(Error::ShapeMismatch(format!(
            "psi expects n = {}, configuration has n = {}",
            psi.n(),
            x.n()
        )));
    }
    let n = x.n();
    let chi = match psi.kind() {
        AsKind::OraclePoly(p) => {
            let cached = match psi.chi_cache.get() {
                Some(c) => c.clone(),
                None => {
                    let c = chi_from_psi_poly(p, n)?;
                    let _ = psi.chi_cache.set(c.clone());
                    c
                }
            };
            cached.evaluate(x)?
        }
        AsKind::Callable(_) => chi_from_psi_numeric(psi, x)?,
    };
    let mut inner = Matrix::zeros(n);
    for j in 0..n {
        inner.set(j, 0, chi);
        for i in 1..n {
            inner.set(j, i, pow_u32(x.coord(j, 0), i as u32));
        }
    }
    Ok(GsdMatrix { inner })
}

/// Stable permutation sorting particle columns lexicographically:
/// x_{perm(1)} <= ... <= x_{perm(n)}, ties keeping original order.
pub fn lex_sort_perm(x: &ParticleConfig) -> Permutation {
    let mut order: Vec<usize> = (0..x.n()).collect();
    order.sort_by(|&a, &b| {
        let pa = x.particle(a);
        let pb = x.particle(b);
        pa.iter()
            .zip(pb)
            .map(|(u, v)| u.total_cmp(v))
            .find(|c| c.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Permutation::from_images(order).expect("sorted index list is a bijection")
}

/// Sign convention for the permuted-diagonal single-orbital GSD.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignMode {
    /// Diagonal values |psi|^(1/n) with psi's sign carried by orbital 1.
    NthRoot,
    /// Orbital 1 carries psi(sorted X), all other diagonal values are 1.
    /// Default: avoids fractional powers entirely.
    FirstColumn,
}

/// Sorting-based GSD for any d: entry (j, i) is nonzero only when
/// j = perm(i) for the lexicographic sort perm, and the diagonal values are
/// chosen so that det Phi = sign(perm)^2 psi(X) = psi(X).
pub fn gsd_build_nd(psi: &AsFunction, x: &ParticleConfig, mode: SignMode) -> Result<GsdMatrix> {
    if x.n() != psi.n() || x.d() != psi.d() {
        return Err(Error::ShapeMismatch(format!(
            "psi expects n = {}, d = {}; configuration has n = {}, d = {}",
            psi.n(),
            psi.d(),
            x.n(),
            x.d()
        )));
    }
    let n = x.n();
    let perm = lex_sort_perm(x);
    let sorted = apply(&perm, x)?;
    let psi_sorted = psi.evaluate(&sorted)?;
    let mut inner = Matrix::zeros(n);
    match mode {
        SignMode::FirstColumn => {
            inner.set(perm.image(0), 0, psi_sorted);
            for i in 1..n {
                inner.set(perm.image(i), i, 1.0);
            }
        }
        SignMode::NthRoot => {
            let magnitude = psi_sorted.abs().powf(1.0 / n as f64);
            inner.set(perm.image(0), 0, psi_sorted.signum() * magnitude);
            for i in 1..n {
                inner.set(perm.image(i), i, magnitude);
            }
        }
    }
    Ok(GsdMatrix { inner })
}

/// Continuous n = 2 construction for any d: orbital 1 evaluates psi with the
/// row's particle first, orbital 2 is the constant 1/2, so
/// det Phi = psi(x1,x2)/2 - psi(x2,x1)/2 = psi(X) and every entry inherits
/// psi's continuity class.
pub fn n2_continuous_gsd(psi: &AsFunction, x: &ParticleConfig) -> Result<GsdMatrix> {
    if psi.n() != 2 || x.n() != 2 {
        return Err(Error::Unsupported(format!(
            "the continuous construction is specific to n = 2, got n = {}",
            x.n()
        )));
    }
    if x.d() != psi.d() {
        return Err(Error::ShapeMismatch(format!(
            "psi expects d = {}, configuration has d = {}",
            psi.d(),
            x.d()
        )));
    }
    let swapped = x.swapped(0, 1);
    let mut inner = Matrix::zeros(2);
    inner.set(0, 0, psi.evaluate(x)?);
    inner.set(1, 0, psi.evaluate(&swapped)?);
    inner.set(0, 1, 0.5);
    inner.set(1, 1, 0.5);
    Ok(GsdMatrix { inner })
}
