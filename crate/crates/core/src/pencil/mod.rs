//! Linear pencils `L = A₀ + Σ Aᵢ xᵢ` and realized entries `(L⁻¹)_{u,v}`.
//!
//! Evaluation at a `d`-dimensional tuple is `A₀ ⊗ I_d + Σ Aᵢ ⊗ pᵢ`, with block
//! `(i, j)` of the result occupying rows `i·d..(i+1)·d` and columns `j·d..(j+1)·d`.
//! Indices are 0-based in the API and 1-based in the text format.

mod compile;
mod compose;
mod io;

use thiserror::Error;

use crate::circuit::CircuitError;
use crate::exactalg::{DenseMatrix, ExactAlgError, Field, MatrixTuple};

pub use compile::{blowup_shift, blowup_var_index, compile_circuit, compile_idrrsc, from_abp};
pub use compose::{compose, hat_pencil, realize_inverse, RealizedGrid};
pub use io::{parse_pencil_file, pencil_to_text};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PencilError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pencil file error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Algebra(#[from] ExactAlgError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearPencil<F: Field> {
    field: F,
    size: usize,
    coeffs: Vec<DenseMatrix<F>>,
}

impl<F: Field> LinearPencil<F> {
    /// `coeffs[0]` is the constant term and `coeffs[i]` the coefficient of `xᵢ`.
    pub fn new(field: &F, size: usize, coeffs: Vec<DenseMatrix<F>>) -> Result<Self, PencilError> {
        if coeffs.is_empty() {
            return Err(PencilError::DimensionMismatch("a pencil needs a constant term".into()));
        }
        if let Some(bad) = coeffs.iter().find(|a| a.rows() != size || a.cols() != size) {
            return Err(PencilError::DimensionMismatch(format!(
                "coefficient is {}x{}, expected {size}x{size}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self { field: field.clone(), size, coeffs })
    }

    pub fn zeros(field: &F, size: usize, nvars: usize) -> Self {
        Self { field: field.clone(), size, coeffs: vec![DenseMatrix::zeros(field, size, size); nvars + 1] }
    }

    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn size(&self) -> usize {
        self.size
    }
    pub fn nvars(&self) -> usize {
        self.coeffs.len() - 1
    }
    pub fn coeffs(&self) -> &[DenseMatrix<F>] {
        &self.coeffs
    }
    pub fn coeff(&self, k: usize) -> &DenseMatrix<F> {
        &self.coeffs[k]
    }
    pub fn coeff_mut(&mut self, k: usize) -> &mut DenseMatrix<F> {
        &mut self.coeffs[k]
    }

    /// The same pencil regarded as one in at least `n` variables.
    pub fn with_nvars(mut self, n: usize) -> Self {
        while self.nvars() < n {
            self.coeffs.push(DenseMatrix::zeros(&self.field, self.size, self.size));
        }
        self
    }

    /// True when the constant term vanishes.
    pub fn is_homogeneous(&self) -> bool {
        self.coeffs[0].is_zero()
    }

    /// Copies every coefficient of `p` into the block at `(off, off)`.
    pub fn place(&mut self, off: usize, p: &LinearPencil<F>) {
        for (k, a) in p.coeffs.iter().enumerate() {
            self.coeffs[k].set_block(off, off, a);
        }
    }

    /// Block diagonal sum, in order.
    pub fn block_diag(field: &F, parts: &[&LinearPencil<F>]) -> Self {
        let size = parts.iter().map(|p| p.size).sum();
        let nvars = parts.iter().map(|p| p.nvars()).max().unwrap_or(0);
        let mut out = Self::zeros(field, size, nvars);
        let mut off = 0;
        for p in parts {
            out.place(off, p);
            off += p.size;
        }
        out
    }

    /// `L ⊕ I`: embeds `L` in the top-left of an identity of size `new_size`.
    pub fn padded(&self, new_size: usize) -> Self {
        assert!(new_size >= self.size);
        let mut out = Self::zeros(&self.field, new_size, self.nvars());
        out.place(0, self);
        for i in self.size..new_size {
            out.coeffs[0].set(i, i, self.field.one());
        }
        out
    }

    /// Applies row and column permutations to every coefficient:
    /// entry `(i, j)` of the result is entry `(rows[i], cols[j])` of `self`.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| {
                let mut b = DenseMatrix::zeros(&self.field, self.size, self.size);
                for i in 0..self.size {
                    for j in 0..self.size {
                        b.set(i, j, a.get(rows[i], cols[j]).clone());
                    }
                }
                b
            })
            .collect();
        Self { field: self.field.clone(), size: self.size, coeffs }
    }

    pub fn eval(&self, t: &MatrixTuple<F>) -> Result<DenseMatrix<F>, PencilError> {
        eval_pencil(self, t)
    }

    /// Number of nonzero coefficient entries across all `Aᵢ`.
    pub fn nnz(&self) -> usize {
        self.coeffs.iter().map(|a| a.nonzeros().count()).sum()
    }
}

/// `A₀ ⊗ I_d + Σ Aᵢ ⊗ pᵢ`.
pub fn eval_pencil<F: Field>(l: &LinearPencil<F>, t: &MatrixTuple<F>) -> Result<DenseMatrix<F>, PencilError> {
    if l.nvars() > t.nvars() {
        return Err(PencilError::DimensionMismatch(format!(
            "pencil has {} variables but the tuple only {}",
            l.nvars(),
            t.nvars()
        )));
    }
    let f = t.field();
    let d = t.dim();
    let mut out = DenseMatrix::zeros(f, l.size * d, l.size * d);
    for (i, j, a) in l.coeffs[0].nonzeros() {
        for r in 0..d {
            out.set(i * d + r, j * d + r, a.clone());
        }
    }
    for k in 1..=l.nvars() {
        let p = t.var(k);
        if p.is_zero() {
            continue;
        }
        for (i, j, a) in l.coeffs[k].nonzeros() {
            out.add_scaled_block(i * d, j * d, a, p);
        }
    }
    Ok(out)
}

/// A pencil together with the designated entry `(row, col)` of its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedEntry<F: Field> {
    pub pencil: LinearPencil<F>,
    pub row: usize,
    pub col: usize,
}

impl<F: Field> RealizedEntry<F> {
    pub fn new(pencil: LinearPencil<F>, row: usize, col: usize) -> Result<Self, PencilError> {
        if row >= pencil.size() || col >= pencil.size() {
            return Err(PencilError::DimensionMismatch(format!(
                "designation ({row}, {col}) outside a pencil of size {}",
                pencil.size()
            )));
        }
        Ok(Self { pencil, row, col })
    }

    pub fn size(&self) -> usize {
        self.pencil.size()
    }

    /// The `d × d` block `(row, col)` of `L(t)⁻¹`; fails with
    /// [`ExactAlgError::Singular`] when `L(t)` is not invertible.
    pub fn eval(&self, t: &MatrixTuple<F>) -> Result<DenseMatrix<F>, PencilError> {
        let lt = eval_pencil(&self.pencil, t)?;
        let d = t.dim();
        let mut rhs = DenseMatrix::zeros(t.field(), lt.rows(), d);
        rhs.set_block(self.col * d, 0, &DenseMatrix::identity(t.field(), d));
        let x = lt.solve(&rhs)?;
        Ok(x.block(self.row * d, 0, d, d))
    }

    /// Whether the pencil is invertible at `t`.
    pub fn is_invertible_at(&self, t: &MatrixTuple<F>) -> Result<bool, PencilError> {
        Ok(eval_pencil(&self.pencil, t)?.is_invertible())
    }
}
