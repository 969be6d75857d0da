//! Recognizable series `S = cᵗ (I − M)⁻¹ b` with `M` a homogeneous linear pencil.
//!
//! A series of size `s` is zero exactly when its truncation to degree `s − 1`
//! is, and that truncation is a polynomial tested here by random evaluation.

use rand::Rng;
use thiserror::Error;

use crate::exactalg::{sample_tuple, DenseMatrix, ExactAlgError, Field, MatrixTuple};
use crate::freepoly::NcPoly;
use crate::pencil::{LinearPencil, PencilError};
use crate::rng::trial_rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("I - M(t) is singular; the series is undefined at this point")]
    Singular,
    #[error("the transition pencil has a nonzero constant term")]
    NotHomogeneous,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("the degree-(s-1) truncation vanishes at the given point")]
    ZeroTruncation,
    #[error("no good scaling found after scanning {scanned} values")]
    FieldTooSmall { scanned: u64 },
    #[error(transparent)]
    Pencil(#[from] PencilError),
}

impl From<ExactAlgError> for SeriesError {
    fn from(e: ExactAlgError) -> Self {
        match e {
            ExactAlgError::Singular => SeriesError::Singular,
            other => SeriesError::Pencil(other.into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecognizableSeries<F: Field> {
    c: Vec<F::Elem>,
    m: LinearPencil<F>,
    b: Vec<F::Elem>,
}

impl<F: Field> RecognizableSeries<F> {
    pub fn new(c: Vec<F::Elem>, m: LinearPencil<F>, b: Vec<F::Elem>) -> Result<Self, SeriesError> {
        if !m.is_homogeneous() {
            return Err(SeriesError::NotHomogeneous);
        }
        if c.len() != m.size() || b.len() != m.size() {
            return Err(SeriesError::DimensionMismatch(format!(
                "vectors of length {} and {} for a pencil of size {}",
                c.len(),
                b.len(),
                m.size()
            )));
        }
        Ok(Self { c, m, b })
    }

    /// The series whose value is `(L⁻¹)_{u,v}` near a point where `A₀` is
    /// invertible: `M = −A₀⁻¹ Σ Aᵢ xᵢ`, `c = e_u`, `b = A₀⁻¹ e_v`.
    pub fn from_pencil_entry(l: &LinearPencil<F>, u: usize, v: usize) -> Result<Self, SeriesError> {
        let f = l.field();
        let s = l.size();
        let a0inv = l.coeff(0).invert()?;
        let mut coeffs = vec![DenseMatrix::zeros(f, s, s)];
        for k in 1..=l.nvars() {
            coeffs.push(a0inv.mul(l.coeff(k))?.neg());
        }
        let m = LinearPencil::new(f, s, coeffs)?;
        let mut c = vec![f.zero(); s];
        c[u] = f.one();
        let b = (0..s).map(|i| a0inv.get(i, v).clone()).collect();
        Self::new(c, m, b)
    }

    pub fn size(&self) -> usize {
        self.m.size()
    }
    pub fn nvars(&self) -> usize {
        self.m.nvars()
    }
    pub fn field(&self) -> &F {
        self.m.field()
    }
    pub fn transition(&self) -> &LinearPencil<F> {
        &self.m
    }
    pub fn c(&self) -> &[F::Elem] {
        &self.c
    }
    pub fn b(&self) -> &[F::Elem] {
        &self.b
    }

    /// The series with every variable scaled by `tau`.
    pub fn scaled(&self, tau: &F::Elem) -> Self {
        let f = self.field();
        let mut coeffs = vec![self.m.coeff(0).clone()];
        coeffs.extend(self.m.coeffs()[1..].iter().map(|a| a.scale(tau)));
        let m = LinearPencil::new(f, self.size(), coeffs).expect("same shape");
        Self { c: self.c.clone(), m, b: self.b.clone() }
    }

    /// `Σ_{i ≤ k} cᵗ Mⁱ b` as a polynomial.
    pub fn symbolic_truncation(&self, k: usize) -> NcPoly<F> {
        let f = self.field();
        let s = self.size();
        let mut v: Vec<NcPoly<F>> = self.b.iter().map(|x| NcPoly::constant(f, x.clone())).collect();
        let dot = |v: &[NcPoly<F>]| {
            let mut acc = NcPoly::zero(f);
            for (ci, vi) in self.c.iter().zip(v) {
                if !f.is_zero(ci) {
                    acc = acc.add(&vi.scale(ci));
                }
            }
            acc
        };
        let mut acc = dot(&v);
        for _ in 0..k {
            let mut next = vec![NcPoly::zero(f); s];
            for var in 1..=self.nvars() {
                let x = NcPoly::var(f, var);
                for (i, j, a) in self.m.coeff(var).nonzeros() {
                    if !v[j].is_zero() {
                        next[i] = next[i].add(&x.mul(&v[j]).scale(a));
                    }
                }
            }
            v = next;
            acc = acc.add(&dot(&v));
        }
        acc
    }
}

fn lift<F: Field>(field: &F, vec: &[F::Elem], d: usize) -> DenseMatrix<F> {
    let mut out = DenseMatrix::zeros(field, vec.len() * d, d);
    for (i, x) in vec.iter().enumerate() {
        if !field.is_zero(x) {
            for r in 0..d {
                out.set(i * d + r, r, x.clone());
            }
        }
    }
    out
}

fn contract<F: Field>(field: &F, c: &[F::Elem], v: &DenseMatrix<F>, d: usize) -> DenseMatrix<F> {
    let mut out = DenseMatrix::zeros(field, d, d);
    for (i, ci) in c.iter().enumerate() {
        if !field.is_zero(ci) {
            out.add_scaled_block(0, 0, ci, &v.block(i * d, 0, d, d));
        }
    }
    out
}

/// `Σ_{i ≤ k} (cᵗ ⊗ I) M(t)ⁱ (b ⊗ I)`, by iterating `v ↦ M(t) v`.
pub fn truncated_eval<F: Field>(s: &RecognizableSeries<F>, k: usize, t: &MatrixTuple<F>) -> Result<DenseMatrix<F>, SeriesError> {
    let f = t.field();
    let d = t.dim();
    let mt = s.m.eval(t)?;
    let mut v = lift(f, &s.b, d);
    let mut acc = contract(f, &s.c, &v, d);
    for _ in 0..k {
        v = mt.mul(&v)?;
        acc = acc.add(&contract(f, &s.c, &v, d))?;
    }
    Ok(acc)
}

/// `(cᵗ ⊗ I)(I − M(t))⁻¹(b ⊗ I)`.
pub fn full_eval<F: Field>(s: &RecognizableSeries<F>, t: &MatrixTuple<F>) -> Result<DenseMatrix<F>, SeriesError> {
    let f = t.field();
    let d = t.dim();
    let mt = s.m.eval(t)?;
    let system = DenseMatrix::identity(f, mt.rows()).sub(&mt)?;
    let x = system.solve(&lift(f, &s.b, d))?;
    Ok(contract(f, &s.c, &x, d))
}

#[derive(Clone, Debug, PartialEq)]
pub enum SeriesVerdict<F: Field> {
    /// Every trial gave a zero truncation. `error_bound` bounds the chance of
    /// this outcome for a nonzero series.
    Zero { dim: usize, trials: usize, error_bound: f64 },
    NonZero { witness: MatrixTuple<F>, value: DenseMatrix<F> },
}

impl<F: Field> SeriesVerdict<F> {
    pub fn is_zero(&self) -> bool {
        matches!(self, SeriesVerdict::Zero { .. })
    }
}

/// Test dimension `⌈(s+1)/2⌉`. A nonzero polynomial of degree `D` does not vanish
/// on generic matrices of dimension `⌊D/2⌋ + 1`, and this covers `D = s − 1`.
pub fn truncation_dim(s: usize) -> usize {
    (s + 1).div_ceil(2)
}

/// Tests the degree-`(s−1)` truncation at `trials` random tuples of dimension
/// [`truncation_dim`]. Each trial misses a nonzero series with probability at
/// most `(s − 1)·d / |F|`.
pub fn series_is_zero<F: Field>(s: &RecognizableSeries<F>, trials: usize, seed: u64) -> Result<SeriesVerdict<F>, SeriesError> {
    let d = truncation_dim(s.size());
    let degree = s.size().saturating_sub(1);
    for trial in 0..trials {
        let mut rng = trial_rng(seed, &[0x5e71e5, trial as u64]);
        let t = sample_tuple(s.field(), s.nvars(), d, &mut rng);
        let value = truncated_eval(s, degree, &t)?;
        if !value.is_zero() {
            return Ok(SeriesVerdict::NonZero { witness: t, value });
        }
    }
    let per_trial = (degree * d) as f64 / s.field().sample_space();
    Ok(SeriesVerdict::Zero { dim: d, trials, error_bound: per_trial.min(1.0).powi(trials as i32) })
}

/// Upper bound on the number of `τ` values the scan may need: `s²·d + 1`.
pub fn scaling_bound(s: usize, d: usize) -> u64 {
    (s * s * d) as u64 + 1
}

/// Finds the first `τ = 1, 2, …` with `S(τ·t)` defined and nonzero, given that
/// the truncation is nonzero at `t`.
///
/// At most `2·s·d` values of `τ` are bad (roots of `det(I − τM(t))` or of one
/// nonzero entry of the numerator), so the scan stops within [`scaling_bound`].
pub fn scaling_search<F: Field>(s: &RecognizableSeries<F>, t: &MatrixTuple<F>) -> Result<(u64, DenseMatrix<F>), SeriesError> {
    let f = t.field();
    if truncated_eval(s, s.size().saturating_sub(1), t)?.is_zero() {
        return Err(SeriesError::ZeroTruncation);
    }
    let mut limit = scaling_bound(s.size(), t.dim());
    if let Some(order) = f.order() {
        limit = limit.min(order - 1);
    }
    for tau in 1..=limit {
        let tv = f.from_i64(tau as i64);
        match full_eval(s, &t.scale(&tv)) {
            Ok(v) if !v.is_zero() => return Ok((tau, v)),
            Ok(_) | Err(SeriesError::Singular) => {}
            Err(e) => return Err(e),
        }
    }
    Err(SeriesError::FieldTooSmall { scanned: limit })
}

/// A random series of size `s` in `n` variables whose coefficient entries are
/// nonzero with probability `density`; sparse draws make zero series common.
pub fn random_series<F: Field, R: Rng + ?Sized>(field: &F, s: usize, n: usize, density: f64, rng: &mut R) -> RecognizableSeries<F> {
    let draw = |rng: &mut R| if rng.gen_bool(density) { field.sample(rng) } else { field.zero() };
    let c = (0..s).map(|_| draw(rng)).collect();
    let b = (0..s).map(|_| draw(rng)).collect();
    let mut m = LinearPencil::zeros(field, s, n);
    for k in 1..=n {
        for i in 0..s {
            for j in 0..s {
                let v = draw(rng);
                m.coeff_mut(k).set(i, j, v);
            }
        }
    }
    RecognizableSeries::new(c, m, b).expect("consistent shapes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::PrimeField;
    use crate::freepoly::eval_poly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geometric(f: &PrimeField) -> RecognizableSeries<PrimeField> {
        let mut m = LinearPencil::zeros(f, 1, 1);
        m.coeff_mut(1).set(0, 0, 1);
        RecognizableSeries::new(vec![1], m, vec![1]).unwrap()
    }

    #[test]
    fn geometric_series() {
        let f = PrimeField::new(7).unwrap();
        let s = geometric(&f);
        let t = MatrixTuple::scalars(&f, &[2]);
        assert_eq!(*truncated_eval(&s, 0, &t).unwrap().get(0, 0), 1);
        assert_eq!(*truncated_eval(&s, 3, &t).unwrap().get(0, 0), 15 % 7);
        assert_eq!(*full_eval(&s, &t).unwrap().get(0, 0), 6);
        let one = MatrixTuple::scalars(&f, &[1]);
        assert_eq!(full_eval(&s, &one), Err(SeriesError::Singular));
        let (tau, v) = scaling_search(&s, &one).unwrap();
        assert_eq!(tau, 2);
        assert_eq!(*v.get(0, 0), 6);
    }

    #[test]
    fn verdicts_on_trivial_series() {
        let f = PrimeField::mersenne61();
        let s = geometric(&f);
        assert!(!series_is_zero(&s, 4, 1).unwrap().is_zero());
        let zero = RecognizableSeries::new(vec![0], s.transition().clone(), vec![1]).unwrap();
        assert!(series_is_zero(&zero, 4, 1).unwrap().is_zero());
        assert_eq!(scaling_search(&zero, &MatrixTuple::scalars(&f, &[3])), Err(SeriesError::ZeroTruncation));
    }

    #[test]
    fn shape_checks() {
        let f = PrimeField::mersenne61();
        let mut m = LinearPencil::zeros(&f, 2, 1);
        assert!(RecognizableSeries::new(vec![1], m.clone(), vec![1, 0]).is_err());
        m.coeff_mut(0).set(0, 0, 1);
        assert_eq!(RecognizableSeries::new(vec![1, 0], m, vec![1, 0]), Err(SeriesError::NotHomogeneous));
    }

    #[test]
    fn truncation_matches_symbolic_and_telescopes() {
        let f = PrimeField::mersenne61();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let size = rng.gen_range(1..=3);
            let s = random_series(&f, size, 2, 0.7, &mut rng);
            let t = sample_tuple(&f, 2, 2, &mut rng);
            for k in 0..4 {
                let numeric = truncated_eval(&s, k, &t).unwrap();
                assert_eq!(numeric, eval_poly(&s.symbolic_truncation(k), &t).unwrap());
                let next = truncated_eval(&s, k + 1, &t).unwrap();
                let top = s.symbolic_truncation(k + 1).homogeneous_part(k + 1);
                assert_eq!(next.sub(&numeric).unwrap(), eval_poly(&top, &t).unwrap());
            }
        }
    }

    #[test]
    fn nilpotent_full_eval_equals_truncation() {
        let f = PrimeField::mersenne61();
        let mut m = LinearPencil::zeros(&f, 3, 2);
        m.coeff_mut(1).set(0, 1, 5);
        m.coeff_mut(2).set(1, 2, 7);
        m.coeff_mut(1).set(0, 2, 1);
        let s = RecognizableSeries::new(vec![1, 2, 3], m, vec![4, 5, 6]).unwrap();
        let t = sample_tuple(&f, 2, 2, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(full_eval(&s, &t).unwrap(), truncated_eval(&s, 6, &t).unwrap());
        let (tau, _) = scaling_search(&s, &t).unwrap();
        assert_eq!(tau, 1);
    }

    #[test]
    fn pencil_entry_series_matches_inverse() {
        let f = PrimeField::mersenne61();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coeffs = (0..3).map(|_| DenseMatrix::random(&f, 3, 3, &mut rng)).collect();
        let l = LinearPencil::new(&f, 3, coeffs).unwrap();
        let s = RecognizableSeries::from_pencil_entry(&l, 0, 2).unwrap();
        let t = sample_tuple(&f, 2, 2, &mut rng);
        let inv = l.eval(&t).unwrap().invert().unwrap();
        assert_eq!(full_eval(&s, &t).unwrap(), inv.block(0, 4, 2, 2));
    }

    #[test]
    fn scaling_search_within_bound() {
        let f = PrimeField::new(1_000_003).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut found = 0;
        for _ in 0..30 {
            let s = random_series(&f, rng.gen_range(1..=4), 2, 0.6, &mut rng);
            let t = sample_tuple(&f, 2, 2, &mut rng);
            match scaling_search(&s, &t) {
                Ok((tau, v)) => {
                    assert!(tau <= scaling_bound(s.size(), 2));
                    assert!(!v.is_zero());
                    found += 1;
                }
                Err(SeriesError::ZeroTruncation) => {}
                Err(e) => panic!("{e}"),
            }
        }
        assert!(found > 0);
    }
}
