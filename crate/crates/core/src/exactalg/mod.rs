//! Exact field arithmetic and dense linear algebra.
//!
//! Everything here is exact: matrices live over a large prime field (by
//! default `2^61 - 1`) or over the rationals, and rank, inversion and linear
//! solves are plain Gaussian elimination.

mod field;
mod matrix;
mod tuple;

pub use field::{is_prime_u64, parse_rational, Field, PrimeField, Rationals, MERSENNE_61};
pub use matrix::DenseMatrix;
pub use tuple::{parse_any_tuple, parse_tuple, parse_tuples, sample_tuple, AnyTuple, FieldSpec, MatrixTuple};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactAlgError {
    #[error("matrix is singular")]
    Singular,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0} is not a prime below 2^63")]
    NotPrime(u64),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Kronecker product `a ⊗ b`.
pub fn kron<F: Field>(a: &DenseMatrix<F>, b: &DenseMatrix<F>) -> DenseMatrix<F> {
    a.kron(b)
}

pub fn rank_of<F: Field>(a: &DenseMatrix<F>) -> usize {
    a.rank_of()
}

pub fn invert<F: Field>(a: &DenseMatrix<F>) -> Result<DenseMatrix<F>, ExactAlgError> {
    a.invert()
}
