//! Matrix tuples: the evaluation points for noncommutative expressions.

use std::fmt::Write as _;

use rand::Rng;

use super::field::{Field, PrimeField, Rationals};
use super::matrix::DenseMatrix;
use super::ExactAlgError;

/// `n` square matrices of a common dimension `d ≥ 1`.
#[derive(Clone, PartialEq, Debug)]
pub struct MatrixTuple<F: Field> {
    field: F,
    dim: usize,
    mats: Vec<DenseMatrix<F>>,
}

impl<F: Field> MatrixTuple<F> {
    pub fn new(field: &F, dim: usize, mats: Vec<DenseMatrix<F>>) -> Result<Self, ExactAlgError> {
        if dim == 0 {
            return Err(ExactAlgError::DimensionMismatch("tuple dimension must be at least 1".into()));
        }
        if let Some(bad) = mats.iter().find(|m| m.rows() != dim || m.cols() != dim) {
            return Err(ExactAlgError::DimensionMismatch(format!(
                "tuple member is {}x{}, expected {dim}x{dim}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self { field: field.clone(), dim, mats })
    }

    /// A tuple of `1 × 1` matrices.
    pub fn scalars(field: &F, values: &[F::Elem]) -> Self {
        let mats = values
            .iter()
            .map(|v| DenseMatrix::scalar(field, 1, v))
            .collect();
        Self { field: field.clone(), dim: 1, mats }
    }

    pub fn zeros(field: &F, n: usize, dim: usize) -> Self {
        Self { field: field.clone(), dim, mats: vec![DenseMatrix::zeros(field, dim, dim); n] }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.mats.len()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn mats(&self) -> &[DenseMatrix<F>] {
        &self.mats
    }
    /// The matrix substituted for variable `i` (1-based, as in `x1`).
    pub fn var(&self, i: usize) -> &DenseMatrix<F> {
        &self.mats[i - 1]
    }
    pub fn into_mats(self) -> Vec<DenseMatrix<F>> {
        self.mats
    }

    /// Multiplies every member by the scalar `c`.
    pub fn scale(&self, c: &F::Elem) -> Self {
        Self { field: self.field.clone(), dim: self.dim, mats: self.mats.iter().map(|m| m.scale(c)).collect() }
    }

    /// Entrywise sum of two tuples of equal shape.
    pub fn add(&self, other: &Self) -> Result<Self, ExactAlgError> {
        if self.nvars() != other.nvars() || self.dim != other.dim {
            return Err(ExactAlgError::DimensionMismatch("tuple shapes differ".into()));
        }
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        Ok(Self { field: self.field.clone(), dim: self.dim, mats })
    }

    /// Appends further members (used for placeholder substitution).
    pub fn extended(&self, extra: impl IntoIterator<Item = DenseMatrix<F>>) -> Result<Self, ExactAlgError> {
        let mut mats = self.mats.clone();
        mats.extend(extra);
        Self::new(&self.field, self.dim, mats)
    }

    /// Serializes in the line-oriented tuple format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "field {}", self.field.header()).unwrap();
        writeln!(s, "nvars {}", self.nvars()).unwrap();
        writeln!(s, "dim {}", self.dim).unwrap();
        for m in &self.mats {
            for i in 0..self.dim {
                let row: Vec<String> = (0..self.dim).map(|j| m.field().format_elem(m.get(i, j))).collect();
                writeln!(s, "{}", row.join(" ")).unwrap();
            }
        }
        s
    }
}

/// Samples `n` independent uniform `d × d` matrices; deterministic for a seeded `rng`.
pub fn sample_tuple<F: Field, R: Rng + ?Sized>(field: &F, n: usize, d: usize, rng: &mut R) -> MatrixTuple<F> {
    assert!(d >= 1, "tuple dimension must be at least 1");
    let mats = (0..n).map(|_| DenseMatrix::random(field, d, d, rng)).collect();
    MatrixTuple { field: field.clone(), dim: d, mats }
}

/// The field named by a `field ...` header.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FieldSpec {
    Prime(PrimeField),
    Rational,
}

impl FieldSpec {
    pub fn parse_header(line: &str) -> Result<Self, ExactAlgError> {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["field", "prime", p] => {
                let p: u64 = p
                    .parse()
                    .map_err(|_| ExactAlgError::Parse(format!("bad prime `{p}`")))?;
                Ok(FieldSpec::Prime(PrimeField::new(p)?))
            }
            ["field", "rational"] => Ok(FieldSpec::Rational),
            _ => Err(ExactAlgError::Parse(format!("expected `field prime <p>` or `field rational`, got `{line}`"))),
        }
    }
}

/// Reads one or more tuple records from text, checking each against `field`.
pub fn parse_tuples<F: Field>(field: &F, text: &str) -> Result<Vec<MatrixTuple<F>>, ExactAlgError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let mut out = Vec::new();
    while let Some(header) = lines.next() {
        if !header.starts_with("field") {
            return Err(ExactAlgError::Parse(format!("expected field header, got `{header}`")));
        }
        let body = header.trim_start_matches("field").trim();
        if body != field.header() {
            return Err(ExactAlgError::Parse(format!(
                "tuple declares field `{body}` but the working field is `{}`",
                field.header()
            )));
        }
        let n = keyed_usize(lines.next(), "nvars")?;
        let d = keyed_usize(lines.next(), "dim")?;
        let mut mats = Vec::with_capacity(n);
        for _ in 0..n {
            let mut data = Vec::with_capacity(d * d);
            for _ in 0..d {
                let row = lines
                    .next()
                    .ok_or_else(|| ExactAlgError::Parse("truncated matrix block".into()))?;
                let vals: Vec<&str> = row.split_whitespace().collect();
                if vals.len() != d {
                    return Err(ExactAlgError::Parse(format!("expected {d} entries in row `{row}`")));
                }
                for v in vals {
                    data.push(field.parse_elem(v)?);
                }
            }
            mats.push(DenseMatrix::from_vec(field, d, d, data)?);
        }
        out.push(MatrixTuple::new(field, d, mats)?);
    }
    Ok(out)
}

/// Reads exactly one tuple record.
pub fn parse_tuple<F: Field>(field: &F, text: &str) -> Result<MatrixTuple<F>, ExactAlgError> {
    let mut all = parse_tuples(field, text)?;
    if all.len() != 1 {
        return Err(ExactAlgError::Parse(format!("expected one tuple, found {}", all.len())));
    }
    Ok(all.pop().unwrap())
}

/// Reads a tuple over whatever field its header names.
pub enum AnyTuple {
    Prime(MatrixTuple<PrimeField>),
    Rational(MatrixTuple<Rationals>),
}

pub fn parse_any_tuple(text: &str) -> Result<AnyTuple, ExactAlgError> {
    let header = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| ExactAlgError::Parse("empty tuple file".into()))?;
    match FieldSpec::parse_header(header)? {
        FieldSpec::Prime(f) => Ok(AnyTuple::Prime(parse_tuple(&f, text)?)),
        FieldSpec::Rational => Ok(AnyTuple::Rational(parse_tuple(&Rationals, text)?)),
    }
}

fn keyed_usize(line: Option<&str>, key: &str) -> Result<usize, ExactAlgError> {
    let line = line.ok_or_else(|| ExactAlgError::Parse(format!("missing `{key}` line")))?;
    let mut it = line.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(k), Some(v), None) if k == key => v
            .parse()
            .map_err(|_| ExactAlgError::Parse(format!("bad value in `{line}`"))),
        _ => Err(ExactAlgError::Parse(format!("expected `{key} <n>`, got `{line}`"))),
    }
}
