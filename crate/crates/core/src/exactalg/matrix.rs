//! Dense exact matrices.

use std::fmt;

use super::field::Field;
use super::ExactAlgError;

/// A row-major dense matrix over a [`Field`].
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> fmt::Debug for DenseMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.field.format_elem(self.get(i, j)))
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl<F: Field> DenseMatrix<F> {
    pub fn zeros(field: &F, rows: usize, cols: usize) -> Self {
        Self {
            field: field.clone(),
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        m
    }

    /// `c · I_n`.
    pub fn scalar(field: &F, n: usize, c: &F::Elem) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn from_vec(field: &F, rows: usize, cols: usize, data: Vec<F::Elem>) -> Result<Self, ExactAlgError> {
        if data.len() != rows * cols {
            return Err(ExactAlgError::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { field: field.clone(), rows, cols, data })
    }

    /// Builds a matrix from small integer literals; mostly useful in tests and examples.
    pub fn from_i64_rows(field: &F, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged integer rows");
            data.extend(row.iter().map(|&v| field.from_i64(v)));
        }
        Self { field: field.clone(), rows: r, cols: c, data }
    }

    /// The matrix unit `E_{ij}` of size `n` (0-based indices).
    pub fn unit(field: &F, n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        m.set(i, j, field.one());
        m
    }

    pub fn random<R: rand::Rng + ?Sized>(field: &F, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| field.sample(rng)).collect();
        Self { field: field.clone(), rows, cols, data }
    }

    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
    pub fn data(&self) -> &[F::Elem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &F::Elem {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F::Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| self.field.is_zero(v))
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let v = self.get(i, j);
                    if i == j {
                        self.field.is_one(v)
                    } else {
                        self.field.is_zero(v)
                    }
                })
            })
    }

    /// Iterates over `(row, col, value)` for the nonzero entries.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, &F::Elem)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| !self.field.is_zero(v))
            .map(|(k, v)| (k / self.cols, k % self.cols, v))
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), ExactAlgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(ExactAlgError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, ExactAlgError> {
        self.check_same_shape(other)?;
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f.add(a, b)).collect();
        Ok(Self { field: f.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ExactAlgError> {
        self.check_same_shape(other)?;
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f.sub(a, b)).collect();
        Ok(Self { field: f.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        Self {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| f.neg(a)).collect(),
        }
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = &self.field;
        Self {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| f.mul(a, c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ExactAlgError> {
        if self.cols != other.rows {
            return Err(ExactAlgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let (n, m) = (self.rows, other.cols);
        let mut out = Self::zeros(f, n, m);
        for i in 0..n {
            let out_row = &mut out.data[i * m..(i + 1) * m];
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if f.is_zero(a) {
                    continue;
                }
                let b_row = &other.data[k * m..(k + 1) * m];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    if !f.is_zero(b) {
                        *o = f.add(o, &f.mul(a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn pow(&self, e: usize) -> Result<Self, ExactAlgError> {
        if !self.is_square() {
            return Err(ExactAlgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let mut acc = Self::identity(&self.field, self.rows);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Copies out the `h × w` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        assert!(r0 + h <= self.rows && c0 + w <= self.cols, "block out of range");
        let mut out = Self::zeros(&self.field, h, w);
        for i in 0..h {
            let src = &self.data[(r0 + i) * self.cols + c0..(r0 + i) * self.cols + c0 + w];
            out.data[i * w..(i + 1) * w].clone_from_slice(src);
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, m: &Self) {
        assert!(r0 + m.rows <= self.rows && c0 + m.cols <= self.cols, "block out of range");
        for i in 0..m.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + m.cols].clone_from_slice(&m.data[i * m.cols..(i + 1) * m.cols]);
        }
    }

    /// Adds `c · m` into the block at `(r0, c0)`.
    pub fn add_scaled_block(&mut self, r0: usize, c0: usize, c: &F::Elem, m: &Self) {
        assert!(r0 + m.rows <= self.rows && c0 + m.cols <= self.cols, "block out of range");
        let f = self.field.clone();
        for (i, j, v) in m.nonzeros() {
            let slot = &mut self.data[(r0 + i) * self.cols + c0 + j];
            *slot = f.add(slot, &f.mul(c, v));
        }
    }

    /// Kronecker product: block `(i, j)` of the result is `self[i, j] · other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(&self.field, self.rows * other.rows, self.cols * other.cols);
        for (i, j, a) in self.nonzeros() {
            out.add_scaled_block(i * other.rows, j * other.cols, a, other);
        }
        out
    }

    /// Row rank by Gaussian elimination.
    pub fn rank_of(&self) -> usize {
        let mut work = self.data.clone();
        forward_eliminate(&self.field, &mut work, self.rows, self.cols, self.cols)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank_of() == self.rows
    }

    /// Exact inverse. Fails with [`ExactAlgError::Singular`] when the matrix has deficient rank.
    pub fn invert(&self) -> Result<Self, ExactAlgError> {
        if !self.is_square() {
            return Err(ExactAlgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        self.solve(&Self::identity(&self.field, self.rows))
    }

    /// Solves `self · X = rhs` for square invertible `self`.
    pub fn solve(&self, rhs: &Self) -> Result<Self, ExactAlgError> {
        if !self.is_square() {
            return Err(ExactAlgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        if rhs.rows != self.rows {
            return Err(ExactAlgError::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {}",
                rhs.rows, self.rows
            )));
        }
        let n = self.rows;
        let width = n + rhs.cols;
        let mut work = Vec::with_capacity(n * width);
        for i in 0..n {
            work.extend_from_slice(&self.data[i * n..(i + 1) * n]);
            work.extend_from_slice(&rhs.data[i * rhs.cols..(i + 1) * rhs.cols]);
        }
        if !gauss_jordan(&self.field, &mut work, n, width) {
            return Err(ExactAlgError::Singular);
        }
        let mut out = Self::zeros(&self.field, n, rhs.cols);
        for i in 0..n {
            out.data[i * rhs.cols..(i + 1) * rhs.cols].clone_from_slice(&work[i * width + n..(i + 1) * width]);
        }
        Ok(out)
    }
}

/// Row-echelon reduction of a `rows × width` buffer, pivoting only in the first
/// `pivot_cols` columns. Returns the number of pivots found.
///
/// Row updates touch only the nonzero positions of the pivot row, which keeps
/// the block-sparse matrices produced by pencil evaluation cheap to reduce.
fn forward_eliminate<F: Field>(f: &F, m: &mut [F::Elem], rows: usize, width: usize, pivot_cols: usize) -> usize {
    let mut rank = 0;
    let mut support: Vec<usize> = Vec::new();
    for col in 0..pivot_cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !f.is_zero(&m[r * width + col])) else {
            continue;
        };
        if p != rank {
            for j in col..width {
                m.swap(p * width + j, rank * width + j);
            }
        }
        let inv = f.inv(&m[rank * width + col]).expect("pivot is nonzero");
        support.clear();
        for j in col..width {
            let slot = &mut m[rank * width + j];
            if !f.is_zero(slot) {
                *slot = f.mul(slot, &inv);
                support.push(j);
            }
        }
        let (head, tail) = m.split_at_mut((rank + 1) * width);
        let pivot_row = &head[rank * width..];
        for row in tail.chunks_exact_mut(width) {
            let factor = row[col].clone();
            if f.is_zero(&factor) {
                continue;
            }
            for &j in &support {
                row[j] = f.sub(&row[j], &f.mul(&factor, &pivot_row[j]));
            }
        }
        rank += 1;
    }
    rank
}

/// Reduces `[A | B]` (with `A` of size `n × n`) to `[I | A⁻¹B]`. Returns false if `A` is singular.
fn gauss_jordan<F: Field>(f: &F, m: &mut [F::Elem], n: usize, width: usize) -> bool {
    let mut support: Vec<usize> = Vec::new();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !f.is_zero(&m[r * width + col])) else {
            return false;
        };
        if p != col {
            for j in 0..width {
                m.swap(p * width + j, col * width + j);
            }
        }
        let inv = f.inv(&m[col * width + col]).expect("pivot is nonzero");
        support.clear();
        for j in col..width {
            let slot = &mut m[col * width + j];
            if !f.is_zero(slot) {
                *slot = f.mul(slot, &inv);
                support.push(j);
            }
        }
        let pivot_row: Vec<F::Elem> = m[col * width..(col + 1) * width].to_vec();
        for r in 0..n {
            if r == col {
                continue;
            }
            let row = &mut m[r * width..(r + 1) * width];
            let factor = row[col].clone();
            if f.is_zero(&factor) {
                continue;
            }
            for &j in &support {
                row[j] = f.sub(&row[j], &f.mul(&factor, &pivot_row[j]));
            }
        }
    }
    true
}
