//! Representations of permutation-symmetric, permutation-equivariant, and
//! anti-symmetric functions at desk scale: brute-force permutation oracles,
//! exact sparse polynomials, symmetric basis families, Vandermonde/Slater
//! factorizations of anti-symmetric functions, and small equivariant
//! networks, all cross-checked against each other.

pub mod antisym;
pub mod bases;
pub mod error;
pub mod linalg;
pub mod networks;
pub mod permutation;
pub mod polynomials;

pub use bases::{BasisDescriptor, BasisFamily, BasisVector};
pub use error::{Error, Result};
pub use permutation::{ParticleConfig, Permutation};
pub use polynomials::{MultiIndex, SparsePolynomial};
