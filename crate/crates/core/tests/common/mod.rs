//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use ncrat::exactalg::{DenseMatrix, Field, PrimeField};
use ncrat::pencil::{LinearPencil, RealizedEntry};
use ncrat::rank::zero_entry;
use rand::Rng;

/// A dense random pencil of the given size with every coefficient drawn uniformly.
pub fn random_pencil<R: Rng>(f: &PrimeField, size: usize, nvars: usize, rng: &mut R) -> LinearPencil<PrimeField> {
    let coeffs = (0..=nvars).map(|_| DenseMatrix::random(f, size, size, rng)).collect();
    LinearPencil::new(f, size, coeffs).unwrap()
}

pub fn random_entry<R: Rng>(f: &PrimeField, size: usize, nvars: usize, rng: &mut R) -> RealizedEntry<PrimeField> {
    let p = random_pencil(f, size, nvars, rng);
    RealizedEntry::new(p, rng.gen_range(0..size), rng.gen_range(0..size)).unwrap()
}

/// The same pencil realizing `c · e` (row `col` scaled by `c⁻¹`), or the zero entry for `c = 0`.
pub fn scaled_entry(e: &RealizedEntry<PrimeField>, c: u64) -> RealizedEntry<PrimeField> {
    let f = *e.pencil.field();
    if c == 0 {
        return zero_entry(&f, e.pencil.nvars());
    }
    let ci = f.inv(&c).unwrap();
    let mut p = e.pencil.clone();
    for k in 0..=p.nvars() {
        for j in 0..p.size() {
            let v = f.mul(p.coeff(k).get(e.col, j), &ci);
            p.coeff_mut(k).set(e.col, j, v);
        }
    }
    RealizedEntry::new(p, e.row, e.col).unwrap()
}

/// `P·K·Q` with `K` a random `r × r` pencil and `P`, `Q` scalar, so the rank is at most `r`.
pub fn low_rank_pencil<R: Rng>(f: &PrimeField, size: usize, r: usize, nvars: usize, rng: &mut R) -> LinearPencil<PrimeField> {
    let p = DenseMatrix::random(f, size, r, rng);
    let q = DenseMatrix::random(f, r, size, rng);
    let coeffs = (0..=nvars)
        .map(|_| p.mul(&DenseMatrix::random(f, r, r, rng)).unwrap().mul(&q).unwrap())
        .collect();
    LinearPencil::new(f, size, coeffs).unwrap()
}

/// The 3 × 3 skew-symmetric pencil in three variables (rank 2 on scalars, 3 over the skew field).
pub fn skew3(f: &PrimeField) -> LinearPencil<PrimeField> {
    let mut l = LinearPencil::zeros(f, 3, 3);
    for (k, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        l.coeff_mut(k + 1).set(i, j, 1);
        l.coeff_mut(k + 1).set(j, i, f.neg(&1));
    }
    l
}
