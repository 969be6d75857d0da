//! Sparse noncommutative polynomials over the free monoid of words.
//!
//! These are an exact oracle: series truncations, branching programs and
//! formulas can all be expanded into [`NcPoly`] and compared coefficientwise.

use std::collections::BTreeMap;
use std::fmt;

use crate::exactalg::{DenseMatrix, ExactAlgError, Field, MatrixTuple};

/// A monomial: a finite sequence of 1-based variable indices. The empty word is `1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }
    pub fn letter(i: usize) -> Self {
        Word(vec![i])
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|i| format!("x{i}")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// An element of the free algebra: a finite map from words to nonzero coefficients.
#[derive(Clone, PartialEq)]
pub struct NcPoly<F: Field> {
    field: F,
    terms: BTreeMap<Word, F::Elem>,
}

impl<F: Field> fmt::Debug for NcPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| format!("{}·{}", self.field.format_elem(c), w))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<F: Field> NcPoly<F> {
    pub fn zero(field: &F) -> Self {
        Self { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(field: &F, c: F::Elem) -> Self {
        Self::monomial(field, Word::empty(), c)
    }

    pub fn one(field: &F) -> Self {
        Self::constant(field, field.one())
    }

    pub fn var(field: &F, i: usize) -> Self {
        Self::monomial(field, Word::letter(i), field.one())
    }

    pub fn monomial(field: &F, w: Word, c: F::Elem) -> Self {
        let mut p = Self::zero(field);
        p.add_term(w, c);
        p
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &F::Elem)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Word::len).max()
    }

    /// Adds `c · w` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, w: Word, c: F::Elem) {
        if self.field.is_zero(&c) {
            return;
        }
        let f = &self.field;
        match self.terms.get_mut(&w) {
            Some(old) => {
                let s = f.add(old, &c);
                if f.is_zero(&s) {
                    self.terms.remove(&w);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&self.field.from_i64(-1)))
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let mut out = Self::zero(&self.field);
        for (w, a) in &self.terms {
            out.add_term(w.clone(), self.field.mul(a, c));
        }
        out
    }

    /// Free-algebra product: words concatenate, left factor first.
    pub fn mul(&self, other: &Self) -> Self {
        let f = &self.field;
        let mut out = Self::zero(f);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), f.mul(c1, c2));
            }
        }
        out
    }

    /// The homogeneous component of degree `k`.
    pub fn homogeneous_part(&self, k: usize) -> Self {
        Self {
            field: self.field.clone(),
            terms: self.terms.iter().filter(|(w, _)| w.len() == k).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    /// Drops every term of degree above `k`.
    pub fn truncate(&self, k: usize) -> Self {
        Self {
            field: self.field.clone(),
            terms: self.terms.iter().filter(|(w, _)| w.len() <= k).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    pub fn max_var(&self) -> usize {
        self.terms.keys().flat_map(|w| w.0.iter().copied()).max().unwrap_or(0)
    }
}

/// Dispatch form of the three ring operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Mul,
    Scale,
}

/// Right operand of [`poly_arith`].
pub enum Operand<'a, F: Field> {
    Poly(&'a NcPoly<F>),
    Scalar(&'a F::Elem),
}

/// Exact free-algebra arithmetic. `Scale` takes a scalar operand; the others take a polynomial.
pub fn poly_arith<F: Field>(op: PolyOp, a: &NcPoly<F>, b: Operand<'_, F>) -> NcPoly<F> {
    match (op, b) {
        (PolyOp::Add, Operand::Poly(b)) => a.add(b),
        (PolyOp::Mul, Operand::Poly(b)) => a.mul(b),
        (PolyOp::Scale, Operand::Scalar(c)) => a.scale(c),
        (PolyOp::Mul, Operand::Scalar(c)) => a.scale(c),
        (PolyOp::Add, Operand::Scalar(c)) => a.add(&NcPoly::constant(a.field(), c.clone())),
        (PolyOp::Scale, Operand::Poly(b)) => a.mul(b),
    }
}

/// Stored coefficient of `w`, or zero.
pub fn coeff_of<F: Field>(f: &NcPoly<F>, w: &Word) -> F::Elem {
    f.terms.get(w).cloned().unwrap_or_else(|| f.field.zero())
}

/// Substitutes `x_i ↦ t.mats[i]`; words multiply left to right.
pub fn eval_poly<F: Field>(f: &NcPoly<F>, t: &MatrixTuple<F>) -> Result<DenseMatrix<F>, ExactAlgError> {
    if f.max_var() > t.nvars() {
        return Err(ExactAlgError::DimensionMismatch(format!(
            "polynomial uses x{} but the tuple has {} members",
            f.max_var(),
            t.nvars()
        )));
    }
    let field = t.field();
    let d = t.dim();
    let mut acc = DenseMatrix::zeros(field, d, d);
    for (w, c) in &f.terms {
        let mut m = DenseMatrix::scalar(field, d, c);
        for &i in &w.0 {
            m = m.mul(t.var(i))?;
        }
        acc = acc.add(&m)?;
    }
    Ok(acc)
}

/// The standard polynomial `s_k = Σ_σ sgn(σ) x_{σ(1)} ⋯ x_{σ(k)}`.
pub fn standard_polynomial<F: Field>(field: &F, k: usize) -> NcPoly<F> {
    let mut perm: Vec<usize> = (1..=k).collect();
    let mut out = NcPoly::zero(field);
    permute(&mut perm, 0, &mut |p| {
        let inversions = (0..p.len())
            .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count();
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        out.add_term(Word(p.to_vec()), field.from_i64(sign));
    });
    out
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{sample_tuple, PrimeField};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn commutator(f: &PrimeField) -> NcPoly<PrimeField> {
        let x1 = NcPoly::var(f, 1);
        let x2 = NcPoly::var(f, 2);
        x1.mul(&x2).sub(&x2.mul(&x1))
    }

    #[test]
    fn commutator_terms() {
        let f = PrimeField::mersenne61();
        let c = commutator(&f);
        assert_eq!(c.num_terms(), 2);
        assert_eq!(coeff_of(&c, &Word(vec![1, 2])), 1);
        assert_eq!(coeff_of(&c, &Word(vec![2, 1])), f.from_i64(-1));
        assert_eq!(coeff_of(&c, &Word::empty()), 0);
    }

    #[test]
    fn add_negation_cancels() {
        let f = PrimeField::mersenne61();
        let c = commutator(&f).add(&NcPoly::constant(&f, 5));
        let minus = poly_arith(PolyOp::Scale, &c, Operand::Scalar(&f.from_i64(-1)));
        assert!(poly_arith(PolyOp::Add, &c, Operand::Poly(&minus)).is_zero());
        assert_eq!(coeff_of(&c, &Word::empty()), 5);
    }

    #[test]
    fn s4_has_24_terms() {
        let f = PrimeField::mersenne61();
        assert_eq!(standard_polynomial(&f, 4).num_terms(), 24);
    }

    #[test]
    fn commutator_at_units() {
        let f = PrimeField::mersenne61();
        let c = commutator(&f);
        let scalars = MatrixTuple::scalars(&f, &[3, 11]);
        assert!(eval_poly(&c, &scalars).unwrap().is_zero());
        let t = MatrixTuple::new(&f, 2, vec![DenseMatrix::unit(&f, 2, 0, 1), DenseMatrix::unit(&f, 2, 1, 0)]).unwrap();
        let v = eval_poly(&c, &t).unwrap();
        assert_eq!(v, DenseMatrix::from_i64_rows(&f, &[&[1, 0], &[0, -1]]));
    }

    #[test]
    fn amitsur_levitzki_behaviour() {
        let f = PrimeField::mersenne61();
        let s4 = standard_polynomial(&f, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let t = sample_tuple(&f, 4, 2, &mut rng);
            assert!(eval_poly(&s4, &t).unwrap().is_zero());
        }
        let nonzero_at_3 = (0..10).any(|_| !eval_poly(&s4, &sample_tuple(&f, 4, 3, &mut rng)).unwrap().is_zero());
        assert!(nonzero_at_3);
    }

    #[test]
    fn eval_rejects_short_tuple() {
        let f = PrimeField::mersenne61();
        let t = MatrixTuple::scalars(&f, &[1]);
        assert!(eval_poly(&commutator(&f), &t).is_err());
    }

    fn small_poly(f: PrimeField) -> impl Strategy<Value = NcPoly<PrimeField>> {
        proptest::collection::vec((proptest::collection::vec(1usize..=3, 0..4), 0u64..101), 0..6).prop_map(move |ts| {
            let mut p = NcPoly::zero(&f);
            for (w, c) in ts {
                p.add_term(Word(w), c);
            }
            p
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn evaluation_is_a_ring_homomorphism(
            a in small_poly(PrimeField::new(101).unwrap()),
            b in small_poly(PrimeField::new(101).unwrap()),
            seed in any::<u64>(),
        ) {
            let f = PrimeField::new(101).unwrap();
            let t = sample_tuple(&f, 3, 2, &mut ChaCha8Rng::seed_from_u64(seed));
            let (ea, eb) = (eval_poly(&a, &t).unwrap(), eval_poly(&b, &t).unwrap());
            prop_assert_eq!(eval_poly(&a.mul(&b), &t).unwrap(), ea.mul(&eb).unwrap());
            prop_assert_eq!(eval_poly(&a.add(&b), &t).unwrap(), ea.add(&eb).unwrap());
        }
    }
}
