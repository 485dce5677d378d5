//! Symmetric basis families over particle configurations: polarized powers,
//! (multivariate) elementary symmetric polynomials, the sorting basis,
//! symmetrized monomials, and the Newton-identity conversion from power sums
//! to elementary symmetrics. Every family is permutation invariant; a fitted
//! outer map `g` composed with a basis realizes a symmetric function.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{solve_normal_equations, Matrix};
use crate::permutation::{canonical_sum, enumerate, ParticleConfig};
use crate::polynomials::{pow_u32, MultiIndex, SparsePolynomial, POLY_ORBIT_MAX_N};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisFamily {
    PolarizedPower,
    ElementarySymmetric,
    Sorting,
    SymmetrizedMonomial,
}

/// A basis family instantiated for a fixed particle count and dimension,
/// carrying its ordered index set. The index order is graded lexicographic,
/// lowest degree first and lex-descending within a degree, so that d = 1
/// reduces to the classic (x, x^2, ..., x^n).
#[derive(Debug, Clone, PartialEq)]
pub struct BasisDescriptor {
    family: BasisFamily,
    n: usize,
    d: usize,
    index_set: Vec<MultiIndex>,
}

impl BasisDescriptor {
    /// Polarized power basis: m = C(n+d, d) - 1 monomial indices with
    /// 1 <= |p| <= n over the d axes.
    pub fn polarized_power(n: usize, d: usize) -> Result<Self> {
        check_dims(n, d)?;
        Ok(Self {
            family: BasisFamily::PolarizedPower,
            n,
            d,
            index_set: graded_index_set(d, n as u32),
        })
    }

    /// Elementary symmetric basis; shares the polarized index set.
    pub fn elementary_symmetric(n: usize, d: usize) -> Result<Self> {
        check_dims(n, d)?;
        Ok(Self {
            family: BasisFamily::ElementarySymmetric,
            n,
            d,
            index_set: graded_index_set(d, n as u32),
        })
    }

    /// Sorting basis (order statistics); only continuous for d = 1.
    pub fn sorting(n: usize) -> Result<Self> {
        check_dims(n, 1)?;
        let index_set = (1..=n as u32).map(|b| MultiIndex::new(vec![b])).collect();
        Ok(Self { family: BasisFamily::Sorting, n, d: 1, index_set })
    }

    /// Symmetrized monomials for d = 1: one index per sorted exponent vector
    /// (length n, nonincreasing) with 1 <= |b| <= max_degree. Evaluation sums
    /// over all n! permutations, so n is capped.
    pub fn symmetrized_monomial(n: usize, max_degree: u32) -> Result<Self> {
        check_dims(n, 1)?;
        if n > POLY_ORBIT_MAX_N {
            return Err(Error::OracleSize { n, max: POLY_ORBIT_MAX_N });
        }
        let mut index_set = Vec::new();
        for degree in 1..=max_degree {
            let mut prefix = Vec::with_capacity(n);
            push_partitions(degree, n, degree, &mut prefix, &mut index_set);
        }
        Ok(Self { family: BasisFamily::SymmetrizedMonomial, n, d: 1, index_set })
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of basis components m.
    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn index_set(&self) -> &[MultiIndex] {
        &self.index_set
    }

    /// Column labels for table emission, e.g. "p=1,0,2".
    pub fn labels(&self) -> Vec<String> {
        self.index_set
            .iter()
            .map(|m| {
                let joined: Vec<String> =
                    m.exponents().iter().map(|e| e.to_string()).collect();
                format!("p={}", joined.join(","))
            })
            .collect()
    }
}

/// Values of one basis at one configuration; length matches the descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector {
    values: Vec<f64>,
}

impl BasisVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn check_dims(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::ShapeMismatch(format!(
            "basis needs n >= 1 and d >= 1, got n = {n}, d = {d}"
        )));
    }
    Ok(())
}

fn expect_family(desc: &BasisDescriptor, expected: BasisFamily) -> Result<()> {
    if desc.family != expected {
        return Err(Error::WrongFamily { expected, found: desc.family });
    }
    Ok(())
}

fn check_config(desc: &BasisDescriptor, x: &ParticleConfig) -> Result<()> {
    if x.n() != desc.n || x.d() != desc.d {
        return Err(Error::ShapeMismatch(format!(
            "descriptor expects n = {}, d = {}; configuration has n = {}, d = {}",
            desc.n,
            desc.d,
            x.n(),
            x.d()
        )));
    }
    Ok(())
}

/// All multi-indices over `d` axes with total degree in 1..=max_degree,
/// graded (degree ascending), lex-descending within each degree.
fn graded_index_set(d: usize, max_degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for degree in 1..=max_degree {
        push_fixed_degree(d, degree, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

fn push_fixed_degree(d: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if d == 1 {
        prefix.push(degree);
        out.push(MultiIndex::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(first);
        push_fixed_degree(d - 1, degree - first, prefix, out);
        prefix.pop();
    }
}

/// Nonincreasing exponent vectors of length `slots` summing to `remaining`,
/// entries capped at `max_part`, emitted in lex-descending order.
fn push_partitions(
    remaining: u32,
    slots: usize,
    max_part: u32,
    prefix: &mut Vec<u32>,
    out: &mut Vec<MultiIndex>,
) {
    if slots == 0 {
        if remaining == 0 {
            out.push(MultiIndex::new(prefix.clone()));
        }
        return;
    }
    let hi = remaining.min(max_part);
    for v in (0..=hi).rev() {
        // Remaining slots each hold at most v, so prune unreachable sums.
        if (v as u64) * (slots as u64 - 1) < (remaining - v) as u64 {
            continue;
        }
        prefix.push(v);
        push_partitions(remaining - v, slots - 1, v, prefix, out);
        prefix.pop();
    }
}

fn eval_monomial(index: &MultiIndex, coords: &[f64]) -> f64 {
    index
        .exponents()
        .iter()
        .zip(coords)
        .fold(1.0, |acc, (&e, &c)| acc * pow_u32(c, e))
}

/// Single-particle feature map of the polarized power basis: the index-set
/// monomials evaluated at one d-vector. For d = 1 this is (x, x^2, ..., x^n).
pub fn eta(desc: &BasisDescriptor, x: &[f64]) -> Result<Vec<f64>> {
    expect_family(desc, BasisFamily::PolarizedPower)?;
    if x.len() != desc.d {
        return Err(Error::ShapeMismatch(format!(
            "eta expects a length-{} particle, got length {}",
            desc.d,
            x.len()
        )));
    }
    Ok(desc.index_set.iter().map(|m| eval_monomial(m, x)).collect())
}

/// beta(X) = sum_i eta(x_i), evaluated in O(m n d). Each component is summed
/// in canonical order, so the output is bit-for-bit permutation invariant.
pub fn polarized_basis(desc: &BasisDescriptor, x: &ParticleConfig) -> Result<BasisVector> {
    expect_family(desc, BasisFamily::PolarizedPower)?;
    check_config(desc, x)?;
    let values = desc
        .index_set
        .iter()
        .map(|m| {
            let per_particle: Vec<f64> =
                (0..x.n()).map(|i| eval_monomial(m, x.particle(i))).collect();
            canonical_sum(per_particle)
        })
        .collect();
    Ok(BasisVector { values })
}

/// Coefficients e_p(X) of prod_i (1 + lambda_1 x_i1 + ... + lambda_d x_id),
/// expanded by sequential multiplication of polynomials in the d formal
/// variables, truncated at total degree n. For d = 1 this is the classic
/// O(n^2) elementary-symmetric recurrence.
pub fn elementary_symmetric(desc: &BasisDescriptor, x: &ParticleConfig) -> Result<BasisVector> {
    expect_family(desc, BasisFamily::ElementarySymmetric)?;
    check_config(desc, x)?;
    let d = desc.d;
    // Position 0 holds the constant coefficient; 1.. mirror the index set.
    let mut position: HashMap<&[u32], usize> = HashMap::new();
    for (k, m) in desc.index_set.iter().enumerate() {
        position.insert(m.exponents(), k + 1);
    }
    let total = desc.index_set.len() + 1;
    // bump[p][a]: where coefficient p lands when multiplied by lambda_a x_ia.
    let mut bump = vec![None; total * d];
    for (k, m) in desc.index_set.iter().enumerate() {
        for a in 0..d {
            let mut key = m.exponents().to_vec();
            key[a] += 1;
            bump[(k + 1) * d + a] = position.get(key.as_slice()).copied();
        }
    }
    for a in 0..d {
        let mut key = vec![0u32; d];
        key[a] = 1;
        bump[a] = position.get(key.as_slice()).copied();
    }
    let mut coeffs = vec![0.0; total];
    coeffs[0] = 1.0;
    for i in 0..x.n() {
        let xi = x.particle(i);
        // Descending sweep keeps the update in place: a coefficient only ever
        // feeds strictly higher-degree positions.
        for p in (0..total).rev() {
            let c = coeffs[p];
            if c == 0.0 {
                continue;
            }
            for a in 0..d {
                if let Some(t) = bump[p * d + a] {
                    coeffs[t] += c * xi[a];
                }
            }
        }
    }
    Ok(BasisVector { values: coeffs.split_off(1) })
}

/// Newton's identities, d = 1: recover e_1..e_n from power sums p_1..p_n via
/// k e_k = sum_{j=1}^{k} (-1)^{j-1} e_{k-j} p_j with e_0 = 1.
pub fn newton_e_from_p(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for k in 1..=n {
        let mut acc = 0.0;
        let mut sign = 1.0;
        for j in 1..=k {
            acc += sign * e[k - j] * p[j - 1];
            sign = -sign;
        }
        e[k] = acc / k as f64;
    }
    e.split_off(1)
}

/// Order statistics x_[1] <= ... <= x_[n]; continuous and invariant for
/// d = 1. Sorting whole particle columns for d > 1 yields discontinuous
/// selections, so that case is rejected here.
pub fn sorting_basis(x: &ParticleConfig) -> Result<BasisVector> {
    if x.d() != 1 {
        return Err(Error::Unsupported(format!(
            "sorting basis requires d = 1 (got d = {}): column sorting is discontinuous in higher dimension",
            x.d()
        )));
    }
    let mut values = x.flat().to_vec();
    values.sort_by(f64::total_cmp);
    Ok(BasisVector { values })
}

/// beta_b(X) = sum over all n! permutations pi of x_{pi(1)}^{b_1} ... x_{pi(n)}^{b_n},
/// one component per sorted exponent vector. The plain sum keeps repeated-
/// exponent multiplicity, e.g. b = (1,0,...,0) gives (n-1)! (x_1 + ... + x_n).
pub fn symmetrized_monomial_basis(
    desc: &BasisDescriptor,
    x: &ParticleConfig,
) -> Result<BasisVector> {
    expect_family(desc, BasisFamily::SymmetrizedMonomial)?;
    check_config(desc, x)?;
    let perms: Vec<_> = enumerate(desc.n)?.collect();
    let values = desc
        .index_set
        .iter()
        .map(|b| {
            let exps = b.exponents();
            let terms: Vec<f64> = perms
                .iter()
                .map(|pi| {
                    (0..desc.n)
                        .fold(1.0, |acc, i| acc * pow_u32(x.coord(pi.image(i), 0), exps[i]))
                })
                .collect();
            canonical_sum(terms)
        })
        .collect();
    Ok(BasisVector { values })
}

/// Evaluate whichever family the descriptor carries.
pub fn evaluate_basis(desc: &BasisDescriptor, x: &ParticleConfig) -> Result<BasisVector> {
    match desc.family {
        BasisFamily::PolarizedPower => polarized_basis(desc, x),
        BasisFamily::ElementarySymmetric => elementary_symmetric(desc, x),
        BasisFamily::Sorting => {
            check_config(desc, x)?;
            sorting_basis(x)
        }
        BasisFamily::SymmetrizedMonomial => symmetrized_monomial_basis(desc, x),
    }
}

/// Result of fitting the outer map g: a polynomial in the m basis components
/// plus conditioning diagnostics from the normal equations.
#[derive(Debug, Clone)]
pub struct OuterFit {
    pub head: SparsePolynomial,
    pub condition: f64,
    pub rank: usize,
    pub rank_deficient: bool,
    pub max_residual: f64,
}

impl OuterFit {
    pub fn predict(&self, beta: &BasisVector) -> Result<f64> {
        self.head.evaluate_flat(beta.values())
    }
}

/// Least-squares polynomial fit of g(beta) ~ y over all monomials in the m
/// basis components up to `degree` (constant included). Rank-deficient
/// normal equations fall back to the minimum-norm solution; the retained
/// spectrum's condition number is reported either way.
pub fn fit_outer(samples: &[(BasisVector, f64)], degree: u32) -> Result<OuterFit> {
    let m = match samples.first() {
        Some((beta, _)) => beta.len(),
        None => {
            return Err(Error::ShapeMismatch("fit_outer needs at least one sample".into()))
        }
    };
    if samples.iter().any(|(beta, _)| beta.len() != m) {
        return Err(Error::ShapeMismatch(
            "fit_outer samples have inconsistent basis lengths".into(),
        ));
    }
    let mut features = vec![MultiIndex::zeros(m)];
    features.extend(graded_index_set(m, degree));
    let k = features.len();
    if samples.len() < k {
        return Err(Error::ShapeMismatch(format!(
            "fit_outer needs at least {} samples for {} coefficients, got {}",
            k,
            k,
            samples.len()
        )));
    }
    // Normal equations: gram = F^T F, rhs = F^T y over the feature matrix F.
    let mut design: Vec<f64> = Vec::with_capacity(samples.len() * k);
    for (beta, _) in samples {
        for f in &features {
            design.push(eval_monomial(f, beta.values()));
        }
    }
    let mut gram = Matrix::zeros(k);
    let mut rhs = vec![0.0; k];
    for (s, (_, y)) in samples.iter().enumerate() {
        let row = &design[s * k..(s + 1) * k];
        for a in 0..k {
            rhs[a] += row[a] * y;
            for b in a..k {
                let v = gram.get(a, b) + row[a] * row[b];
                gram.set(a, b, v);
                if a != b {
                    gram.set(b, a, v);
                }
            }
        }
    }
    let ls = solve_normal_equations(&gram, &rhs, 1e-10);
    let head = SparsePolynomial::from_terms(
        m,
        features.iter().cloned().zip(ls.solution.iter().copied()),
    );
    let mut max_residual = 0.0f64;
    for (s, (_, y)) in samples.iter().enumerate() {
        let row = &design[s * k..(s + 1) * k];
        let pred: f64 = row.iter().zip(&ls.solution).map(|(f, w)| f * w).sum();
        max_residual = max_residual.max((pred - y).abs());
    }
    Ok(OuterFit {
        head,
        condition: ls.condition,
        rank: ls.rank,
        rank_deficient: ls.rank_deficient,
        max_residual,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Basis table as CSV (LF line endings): header of index-set labels, one row
/// of basis values per configuration.
pub fn basis_csv(desc: &BasisDescriptor, samples: &[ParticleConfig]) -> Result<String> {
    let mut out = String::new();
    let labels = desc.labels();
    let header: Vec<String> = labels.iter().map(|l| csv_field(l)).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for x in samples {
        let beta = evaluate_basis(desc, x)?;
        let row: Vec<String> = beta.values().iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}
