//! Exact sparse multivariate polynomial algebra over the n*d coordinates.
//!
//! Coefficients are f64, but the symmetrization and division pipelines are
//! exercised on integer-coefficient inputs where every operation below is
//! exact, so structural checks (canonical-form equality, zero remainders)
//! are meaningful and not drowned in float noise.
//!
//! Multi-indices are particle-block-major: for a configuration with n
//! particles in d dimensions, coordinate (particle i, axis a) sits at flat
//! position `i*d + a`, matching [`ParticleConfig::flat`].

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::permutation::{enumerate, ParticleConfig, Permutation, ORACLE_MAX_N};

/// Exponent vector of one monomial over the n*d coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zeros(arity: usize) -> Self {
        Self(vec![0; arity])
    }

    /// Exponent vector with a single 1 at `pos`.
    pub fn unit(arity: usize, pos: usize) -> Self {
        let mut e = vec![0; arity];
        e[pos] = 1;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Exponent transport for m(S_pi(X)): the powers block i held move to
    /// block pi(i), since coordinate slot i of S_pi(X) reads column pi(i).
    fn permute_blocks(&self, p: &Permutation, d: usize) -> MultiIndex {
        let n = p.len();
        let mut out = vec![0u32; self.0.len()];
        for i in 0..n {
            // Exponents attached to particle i move to particle pi(i):
            // m(S_pi(X)) raises column pi(i) of X to the powers block i held.
            let dst = p.image(i);
            for a in 0..d {
                out[dst * d + a] = self.0[i * d + a];
            }
        }
        MultiIndex(out)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Whether a symmetrization divides the orbit sum by n! (the linear
/// (anti)symmetrizer) or leaves it as a plain orbit sum (the symmetrized
/// monomial convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Mean,
    Sum,
}

/// Sparse multivariate polynomial in canonical form: no stored zero
/// coefficients, terms keyed and ordered by multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePolynomial {
    terms: BTreeMap<MultiIndex, f64>,
    arity: usize,
}

impl SparsePolynomial {
    pub fn zero(arity: usize) -> Self {
        Self { terms: BTreeMap::new(), arity }
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(MultiIndex::zeros(arity), c);
        p
    }

    /// The single coordinate x_pos (0-based flat position).
    pub fn coordinate(arity: usize, pos: usize) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(MultiIndex::unit(arity, pos), 1.0);
        p
    }

    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Self {
        let mut p = Self::zero(arity);
        for (m, c) in terms {
            assert_eq!(m.arity(), arity, "term arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::total_degree).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: &MultiIndex) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    fn add_term(&mut self, m: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
        }
    }

    /// Evaluates at a configuration, deterministic term order (sorted
    /// multi-indices), powers by squaring.
    pub fn evaluate(&self, x: &ParticleConfig) -> Result<f64> {
        self.evaluate_flat(x.flat())
    }

    /// Evaluates on a flat coordinate slice in multi-index layout.
    pub fn evaluate_flat(&self, coords: &[f64]) -> Result<f64> {
        if coords.len() != self.arity {
            return Err(Error::ArityMismatch { poly: self.arity, input: coords.len() });
        }
        let mut acc = 0.0;
        for (m, &c) in &self.terms {
            let mut term = c;
            for (pos, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    term *= pow_u32(coords[pos], e);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    pub fn add(&self, other: &SparsePolynomial) -> Result<SparsePolynomial> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch { poly: self.arity, input: other.arity });
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SparsePolynomial) -> Result<SparsePolynomial> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> SparsePolynomial {
        if c == 0.0 {
            return SparsePolynomial::zero(self.arity);
        }
        let mut out = SparsePolynomial::zero(self.arity);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &SparsePolynomial) -> Result<SparsePolynomial> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch { poly: self.arity, input: other.arity });
        }
        let mut out = SparsePolynomial::zero(self.arity);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.add(mb), ca * cb);
            }
        }
        Ok(out)
    }

    /// The polynomial p(S_pi(X)) as a polynomial in X.
    pub fn permuted(&self, p: &Permutation, d: usize) -> Result<SparsePolynomial> {
        if p.len() * d != self.arity {
            return Err(Error::ArityMismatch { poly: self.arity, input: p.len() * d });
        }
        let mut out = SparsePolynomial::zero(self.arity);
        for (m, c) in &self.terms {
            out.add_term(m.permute_blocks(p, d), *c);
        }
        Ok(out)
    }

    /// Orbit sum over S_n acting on the d-wide particle blocks. `Mean`
    /// divides by n! (the linear symmetrizer); `Sum` leaves the plain orbit
    /// sum used by the symmetrized-monomial basis.
    pub fn symmetrized(&self, n: usize, d: usize, norm: Normalization) -> Result<SparsePolynomial> {
        self.orbit_sum(n, d, norm, false)
    }

    /// Parity-weighted orbit sum; `Mean` matches the linear anti-symmetrizer.
    pub fn antisymmetrized(&self, n: usize, d: usize, norm: Normalization) -> Result<SparsePolynomial> {
        self.orbit_sum(n, d, norm, true)
    }

    fn orbit_sum(&self, n: usize, d: usize, norm: Normalization, signed: bool) -> Result<SparsePolynomial> {
        if n * d != self.arity {
            return Err(Error::ArityMismatch { poly: self.arity, input: n * d });
        }
        // Term count can blow up n!-fold; tighter cap than the numeric oracle.
        if n > 8 {
            return Err(Error::OracleSize { n, max: 8 });
        }
        let mut acc = SparsePolynomial::zero(self.arity);
        let mut count = 0u64;
        for p in enumerate(n)? {
            let weight = if signed { p.parity() as f64 } else { 1.0 };
            for (m, c) in &self.terms {
                acc.add_term(m.permute_blocks(&p, d), weight * c);
            }
            count += 1;
        }
        Ok(match norm {
            Normalization::Mean => acc.scale(1.0 / count as f64),
            Normalization::Sum => acc,
        })
    }

    /// Treats `self` as univariate in coordinate `var` and substitutes the
    /// coordinate `replacement` for it.
    pub fn substitute_coord(&self, var: usize, replacement: usize) -> SparsePolynomial {
        let mut out = SparsePolynomial::zero(self.arity);
        for (m, c) in &self.terms {
            let mut e = m.exponents().to_vec();
            e[replacement] += e[var];
            e[var] = 0;
            out.add_term(MultiIndex::new(e), *c);
        }
        out
    }

    /// One term per line, `coeff k_1 k_2 ... k_nd`, sorted by multi-index.
    /// Coefficients print with Rust's shortest round-trip format, so
    /// `parse_text` reproduces the polynomial exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (m, c) in &self.terms {
            out.push_str(&format!("{c} {m}\n"));
        }
        out
    }

    pub fn parse_text(text: &str, arity: usize) -> Result<SparsePolynomial> {
        let mut p = SparsePolynomial::zero(arity);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let coeff: f64 = fields
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: empty term", lineno + 1)))?
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad coefficient: {e}", lineno + 1)))?;
            let exps: Vec<u32> = fields
                .map(|f| f.parse().map_err(|e| Error::Parse(format!("line {}: bad exponent: {e}", lineno + 1))))
                .collect::<Result<_>>()?;
            if exps.len() != arity {
                return Err(Error::ArityMismatch { poly: arity, input: exps.len() });
            }
            p.add_term(MultiIndex::new(exps), coeff);
        }
        Ok(p)
    }
}

pub(crate) fn pow_u32(base: f64, mut exp: u32) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= b;
        }
        b *= b;
        exp >>= 1;
    }
    acc
}

/// The Vandermonde factor as an exact expanded polynomial over n particles
/// (d=1): the product of (x_i - x_j) over all pairs j < i. n = 1 gives the
/// empty product 1.
pub fn vandermonde_poly(n: usize) -> SparsePolynomial {
    let mut acc = SparsePolynomial::constant(n, 1.0);
    for i in 1..n {
        for j in 0..i {
            let factor = SparsePolynomial::coordinate(n, i)
                .sub(&SparsePolynomial::coordinate(n, j))
                .expect("same arity");
            acc = acc.mul(&factor).expect("same arity");
        }
    }
    acc
}

/// Evaluates the Vandermonde product form directly (no expansion).
pub fn vandermonde_product(coords: &[f64]) -> f64 {
    let n = coords.len();
    let mut acc = 1.0;
    for i in 1..n {
        for j in 0..i {
            acc *= coords[i] - coords[j];
        }
    }
    acc
}

/// Exact division of `p` by the linear factor (x_j - x_i), i < j, over a
/// d=1 coordinate layout. Synthetic division in the variable x_j with the
/// polynomial "root" x_i; succeeds iff the remainder p(x_j <- x_i) is the
/// zero polynomial, which is exactly the hyperplane-vanishing precondition.
pub fn divide_exact(p: &SparsePolynomial, i: usize, j: usize) -> Result<SparsePolynomial> {
    assert!(i < j, "factor is x_j - x_i with i < j");
    let arity = p.arity();
    // Split into coefficient polynomials by the exponent of x_j.
    let max_deg = p
        .terms()
        .map(|(m, _)| m.exponents()[j])
        .max()
        .unwrap_or(0) as usize;
    let mut coeffs: Vec<SparsePolynomial> = vec![SparsePolynomial::zero(arity); max_deg + 1];
    for (m, c) in p.terms() {
        let k = m.exponents()[j] as usize;
        let mut e = m.exponents().to_vec();
        e[j] = 0;
        coeffs[k].add_term(MultiIndex::new(e), c);
    }
    // q_k = c_{k+1} + x_i * q_{k+1}, from the top power down.
    let mut quotient_coeffs: Vec<SparsePolynomial> = vec![SparsePolynomial::zero(arity); max_deg];
    let xi = SparsePolynomial::coordinate(arity, i);
    let mut carry = SparsePolynomial::zero(arity);
    for k in (0..max_deg).rev() {
        let q_k = coeffs[k + 1].add(&carry)?;
        carry = xi.mul(&q_k)?;
        quotient_coeffs[k] = q_k;
    }
    let remainder = coeffs[0].add(&carry)?;
    if !remainder.is_zero() {
        return Err(Error::NotDivisible { i, j });
    }
    let mut out = SparsePolynomial::zero(arity);
    for (k, q_k) in quotient_coeffs.iter().enumerate() {
        for (m, c) in q_k.terms() {
            let mut e = m.exponents().to_vec();
            e[j] += k as u32;
            out.add_term(MultiIndex::new(e), c);
        }
    }
    Ok(out)
}

/// Random polynomial with small integer coefficients, for exactness tests.
pub fn random_integer_poly<R: rand::Rng>(
    rng: &mut R,
    arity: usize,
    max_degree: u32,
    num_terms: usize,
) -> SparsePolynomial {
    let mut p = SparsePolynomial::zero(arity);
    for _ in 0..num_terms {
        let mut exps = vec![0u32; arity];
        let mut budget = max_degree;
        for e in exps.iter_mut() {
            let take = rng.gen_range(0..=budget.min(max_degree / 2 + 1));
            *e = take;
            budget -= take;
            if budget == 0 {
                break;
            }
        }
        let coeff = rng.gen_range(-4i32..=4) as f64;
        p.add_term(MultiIndex::new(exps), coeff);
    }
    p
}

// Guard shared with the numeric oracle; re-exported for callers building
// polynomial orbits.
pub const POLY_ORBIT_MAX_N: usize = 8;
const _: () = assert!(POLY_ORBIT_MAX_N <= ORACLE_MAX_N);

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn x(arity: usize, pos: usize) -> SparsePolynomial {
        SparsePolynomial::coordinate(arity, pos)
    }

    #[test]
    fn evaluate_basics() {
        let one = SparsePolynomial::constant(2, 1.0);
        let cfg = ParticleConfig::from_coords(&[5.0, -3.0]).unwrap();
        assert_eq!(one.evaluate(&cfg).unwrap(), 1.0);

        let x1x2 = x(2, 0).mul(&x(2, 1)).unwrap();
        let cfg = ParticleConfig::from_coords(&[2.0, 3.0]).unwrap();
        assert_eq!(x1x2.evaluate(&cfg).unwrap(), 6.0);
    }

    #[test]
    fn power_sum_identity_at_2_3() {
        // (x1+x2)^2 - (x1^2+x2^2) = 2 x1 x2 = 12 at (2,3).
        let s = x(2, 0).add(&x(2, 1)).unwrap();
        let sq = s.mul(&s).unwrap();
        let p2 = x(2, 0).mul(&x(2, 0)).unwrap().add(&x(2, 1).mul(&x(2, 1)).unwrap()).unwrap();
        let diff = sq.sub(&p2).unwrap();
        let cfg = ParticleConfig::from_coords(&[2.0, 3.0]).unwrap();
        assert_eq!(diff.evaluate(&cfg).unwrap(), 12.0);
    }

    #[test]
    fn arithmetic_identities() {
        let p = x(2, 0).add(&SparsePolynomial::constant(2, 2.0)).unwrap();
        assert_eq!(p.add(&SparsePolynomial::zero(2)).unwrap(), p);

        let diff = x(2, 0).sub(&x(2, 1)).unwrap();
        let sum = x(2, 0).add(&x(2, 1)).unwrap();
        let prod = diff.mul(&sum).unwrap();
        let expected = x(2, 0)
            .mul(&x(2, 0))
            .unwrap()
            .sub(&x(2, 1).mul(&x(2, 1)).unwrap())
            .unwrap();
        assert_eq!(prod, expected);
    }

    #[test]
    fn vandermonde_n3_has_six_terms_and_matches_product() {
        let delta = vandermonde_poly(3);
        assert_eq!(delta.num_terms(), 6);
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let coords: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let expanded = delta.evaluate_flat(&coords).unwrap();
            let product = vandermonde_product(&coords);
            assert!((expanded - product).abs() <= 1e-12 * product.abs().max(1.0));
        }
        // n=1 is the empty product, n=2 is x2-x1.
        assert_eq!(vandermonde_poly(1), SparsePolynomial::constant(1, 1.0));
        assert_eq!(vandermonde_poly(2), x(2, 1).sub(&x(2, 0)).unwrap());
        let cfg = vec![1.0, 2.0, 4.0];
        assert_eq!(vandermonde_poly(3).evaluate_flat(&cfg).unwrap(), 6.0);
    }

    #[test]
    fn symmetrize_poly_examples() {
        // symmetrize(x1) for n=2 -> (x1+x2)/2.
        let s = x(2, 0).symmetrized(2, 1, Normalization::Mean).unwrap();
        let expected = x(2, 0).add(&x(2, 1)).unwrap().scale(0.5);
        assert_eq!(s, expected);

        // antisymmetrize(x1 x2) = 0 (symmetric monomial).
        let m = x(2, 0).mul(&x(2, 1)).unwrap();
        assert!(m.antisymmetrized(2, 1, Normalization::Mean).unwrap().is_zero());

        // antisymmetrize(x2) -> (x2 - x1)/2.
        let a = x(2, 1).antisymmetrized(2, 1, Normalization::Mean).unwrap();
        let expected = x(2, 1).sub(&x(2, 0)).unwrap().scale(0.5);
        assert_eq!(a, expected);
    }

    #[test]
    fn orbit_guard_rejects_large_n() {
        let p = SparsePolynomial::zero(9);
        assert!(matches!(
            p.symmetrized(9, 1, Normalization::Mean),
            Err(Error::OracleSize { n: 9, max: 8 })
        ));
    }

    #[test]
    fn divide_exact_difference_of_squares() {
        // (x2^2 - x1^2) / (x2 - x1) = x1 + x2.
        let p = x(2, 1).mul(&x(2, 1)).unwrap().sub(&x(2, 0).mul(&x(2, 0)).unwrap()).unwrap();
        let q = divide_exact(&p, 0, 1).unwrap();
        assert_eq!(q, x(2, 0).add(&x(2, 1)).unwrap());
    }

    #[test]
    fn divide_exact_rejects_non_divisible() {
        let p = x(2, 0).mul(&x(2, 1)).unwrap();
        assert!(matches!(divide_exact(&p, 0, 1), Err(Error::NotDivisible { i: 0, j: 1 })));
    }

    #[test]
    fn full_vandermonde_division_pipeline() {
        // AS[x2^2 x3] divided by all three factors is symmetric.
        let m = x(3, 1).mul(&x(3, 1)).unwrap().mul(&x(3, 2)).unwrap();
        let psi = m.antisymmetrized(3, 1, Normalization::Sum).unwrap();
        assert!(!psi.is_zero());
        let mut chi = psi.clone();
        for j in 1..3 {
            for i in 0..j {
                chi = divide_exact(&chi, i, j).unwrap();
            }
        }
        assert_eq!(chi.symmetrized(3, 1, Normalization::Mean).unwrap(), chi);

        // Cross-check against psi / Delta at random non-coincident points.
        let delta = vandermonde_poly(3);
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let coords: Vec<f64> = vec![
                rng.gen_range(-2.0..-1.0),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(1.0..2.0),
            ];
            let lhs = chi.evaluate_flat(&coords).unwrap();
            let rhs = psi.evaluate_flat(&coords).unwrap() / delta.evaluate_flat(&coords).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn antisymmetrized_poly_matches_numeric_oracle() {
        let mut rng = StdRng::seed_from_u64(23);
        for n in 2..=5usize {
            let p = random_integer_poly(&mut rng, n, 4, 6);
            let ap = p.antisymmetrized(n, 1, Normalization::Mean).unwrap();
            for _ in 0..10 {
                let coords: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let cfg = ParticleConfig::from_coords(&coords).unwrap();
                let via_poly = ap.evaluate(&cfg).unwrap();
                let via_oracle =
                    crate::permutation::antisymmetrize(|c| p.evaluate(c).unwrap(), &cfg).unwrap();
                assert!(
                    (via_poly - via_oracle).abs() <= 1e-11 * via_oracle.abs().max(1.0),
                    "n={n} poly={via_poly} oracle={via_oracle}"
                );
            }
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let mut p = random_integer_poly(&mut rng, 4, 5, 8);
            // Mix in awkward float coefficients.
            p = p.scale(0.1).add(&SparsePolynomial::constant(4, std::f64::consts::PI)).unwrap();
            let text = p.to_text();
            let back = SparsePolynomial::parse_text(&text, 4).unwrap();
            assert_eq!(p, back);
        }
        // Zero polynomial round-trips through the empty string.
        let z = SparsePolynomial::zero(3);
        assert_eq!(SparsePolynomial::parse_text(&z.to_text(), 3).unwrap(), z);
    }
}
