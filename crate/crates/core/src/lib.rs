//! Computing with noncommutative rational functions over the free skew field.
//!
//! The crate compiles rational circuits into linear pencil realizations,
//! decides rational identities by randomized matrix evaluation, and computes
//! the noncommutative rank (with a witness tuple) of matrices whose entries
//! are given by small pencils.
//!
//! Module map:
//!
//! * [`exactalg`]: prime-field and rational matrices, Kronecker products, rank.
//! * [`freepoly`]: sparse noncommutative polynomials, used as an exact oracle.
//! * [`circuit`]: the rational circuit IR, parser, evaluation and normal forms.
//! * [`pencil`]: linear pencils, the composition construction and the circuit compiler.
//! * [`series`]: recognizable series and their truncation zero test.
//! * [`rank`]: noncommutative rank via the reduction pencil and blow-up evaluation.
//! * [`rit`]: rational identity testing, witnesses and hitting sets.

pub mod circuit;
pub mod exactalg;
pub mod freepoly;
pub mod pencil;
pub mod rank;
pub mod rit;
pub mod rng;
pub mod series;

pub use exactalg::{DenseMatrix, Field, MatrixTuple, PrimeField, Rationals};
