//! From branching programs and circuits to pencils, and generic blow-up.

use crate::circuit::{to_idrrsc, Abp, CircuitError, IdrCircuit, IdrOptions, RationalCircuit};
use crate::exactalg::{DenseMatrix, Field, MatrixTuple};

use super::compose::compose;
use super::{LinearPencil, PencilError, RealizedEntry};

/// Block bidiagonal pencil with identity diagonal blocks and `−M_l` on the
/// superdiagonal; its top-right inverse entry is the ABP value.
///
/// The pencil has one row per ABP node and is unit upper triangular, so it is
/// invertible at every tuple.
pub fn from_abp<F: Field>(abp: &Abp<F>) -> RealizedEntry<F> {
    let f = &abp.field;
    let widths = abp.layer_widths();
    let n: usize = widths.iter().sum();
    let mut p = LinearPencil::zeros(f, n, abp.nvars);
    for i in 0..n {
        p.coeff_mut(0).set(i, i, f.one());
    }
    let mut off = 0;
    for (l, layer) in abp.layers.iter().enumerate() {
        let next = off + widths[l];
        for a in 0..layer.rows {
            for b in 0..layer.cols {
                let form = layer.get(a, b);
                if form.is_zero(f) {
                    continue;
                }
                let (r, c) = (off + a, next + b);
                p.coeff_mut(0).set(r, c, f.neg(&form.constant));
                for (i, coef) in &form.terms {
                    p.coeff_mut(*i).set(r, c, f.neg(coef));
                }
            }
        }
        off = next;
    }
    RealizedEntry { pencil: p, row: 0, col: n - 1 }
}

/// Compiles an inversely disjoint skewed circuit level by level: the top
/// branching program becomes a pencil and the compiled subcircuits are
/// substituted into its placeholders with [`compose`].
///
/// The border in [`realize_inverse`](super::realize_inverse) only detects
/// invertibility of `g` where the pencil of `g` is itself invertible. A
/// compiled pencil has the determinant of its `Ĥ` block times that of its
/// guard blocks, so for each subcircuit with inverses that product (its
/// guard) is appended once as a decoupled diagonal block. The realized entry
/// is unchanged and the result is invertible exactly where the circuit is
/// defined.
pub fn compile_idrrsc<F: Field>(c: &IdrCircuit<F>) -> RealizedEntry<F> {
    compile_guarded(c).0
}

/// The compiled entry and a pencil with the same invertibility locus (`None` when always invertible).
fn compile_guarded<F: Field>(c: &IdrCircuit<F>) -> (RealizedEntry<F>, Option<LinearPencil<F>>) {
    let top = from_abp(&c.top);
    if c.subs.is_empty() {
        return (top, None);
    }
    let (subs, guards): (Vec<RealizedEntry<F>>, Vec<Option<LinearPencil<F>>>) = c.subs.iter().map(compile_guarded).unzip();
    let grid = compose(&top.pencil, &subs, c.nvars).expect("placeholder count matches by construction");
    let s = top.size();
    let hat = principal(&grid.pencil, s * s, grid.offset - 2 * s * s);
    let guards: Vec<LinearPencil<F>> = guards.into_iter().flatten().map(|g| g.with_nvars(c.nvars)).collect();
    let f = grid.pencil.field().clone();
    let mut parts = vec![&grid.pencil];
    parts.extend(guards.iter());
    let pencil = LinearPencil::block_diag(&f, &parts);
    let mut guard_parts = vec![&hat];
    guard_parts.extend(guards.iter());
    let guard = LinearPencil::block_diag(&f, &guard_parts);
    (RealizedEntry { pencil, row: grid.offset + top.row, col: grid.offset + top.col }, Some(guard))
}

fn principal<F: Field>(l: &LinearPencil<F>, off: usize, len: usize) -> LinearPencil<F> {
    let coeffs = l.coeffs().iter().map(|a| a.block(off, off, len, len)).collect();
    LinearPencil::new(l.field(), len, coeffs).expect("square blocks")
}

/// Decomposes and compiles a rational circuit.
pub fn compile_circuit<F: Field>(c: &RationalCircuit, field: &F, opts: IdrOptions) -> Result<RealizedEntry<F>, CircuitError> {
    Ok(compile_idrrsc(&to_idrrsc(c, field, opts)?))
}

/// Index (1-based) of the blow-up variable `z⁽ⁱ⁾_{jk}`, with `i` 1-based and `j, k` 0-based.
pub fn blowup_var_index(m: usize, i: usize, j: usize, k: usize) -> usize {
    (i - 1) * m * m + j * m + k + 1
}

/// Substitutes `xᵢ ↦ pᵢ + Z⁽ⁱ⁾` with `Z⁽ⁱ⁾` a generic `m × m` matrix of fresh
/// variables: the result has size `s·m`, constant term `A₀ ⊗ I + Σ Aᵢ ⊗ pᵢ` and
/// coefficient `Aᵢ ⊗ E_{jk}` for `z⁽ⁱ⁾_{jk}` (see [`blowup_var_index`]).
pub fn blowup_shift<F: Field>(l: &LinearPencil<F>, m: usize, shift: &MatrixTuple<F>) -> Result<LinearPencil<F>, PencilError> {
    if shift.dim() != m || shift.nvars() != l.nvars() {
        return Err(PencilError::DimensionMismatch(format!(
            "shift must be {} matrices of dimension {m}, got {} of dimension {}",
            l.nvars(),
            shift.nvars(),
            shift.dim()
        )));
    }
    let f = l.field();
    let n = l.nvars();
    let s = l.size();
    let mut coeffs = Vec::with_capacity(1 + n * m * m);
    coeffs.push(l.eval(shift)?);
    for i in 1..=n {
        for j in 0..m {
            for k in 0..m {
                coeffs.push(l.coeff(i).kron(&DenseMatrix::unit(f, m, j, k)));
            }
        }
    }
    LinearPencil::new(f, s * m, coeffs)
}
