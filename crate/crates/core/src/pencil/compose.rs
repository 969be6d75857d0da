//! Substituting inverses of realized entries into the `y` variables of a pencil.

use crate::exactalg::Field;

use super::{LinearPencil, PencilError, RealizedEntry};

/// `[[L, e_v], [−e_uᵗ, 0]]`, realizing `g⁻¹` at the bottom-right corner.
///
/// The Schur complement of `L` is `(L⁻¹)_{u,v} = g`, so the pencil is invertible
/// at `t` exactly when `L(t)` and `g(t)` are.
pub fn realize_inverse<F: Field>(g: &RealizedEntry<F>) -> RealizedEntry<F> {
    let s = g.size();
    let f = g.pencil.field();
    let mut p = LinearPencil::zeros(f, s + 1, g.pencil.nvars());
    p.place(0, &g.pencil);
    p.coeff_mut(0).set(g.col, s, f.one());
    p.coeff_mut(0).set(s, g.row, f.neg(&f.one()));
    RealizedEntry { pencil: p, row: s, col: s }
}

/// Block diagonal of the [`realize_inverse`] blocks. Returns the pencil and,
/// for each input, the (diagonal) position realizing `g_k⁻¹`.
pub fn hat_pencil<F: Field>(field: &F, gs: &[RealizedEntry<F>]) -> (LinearPencil<F>, Vec<usize>) {
    let blocks: Vec<RealizedEntry<F>> = gs.iter().map(realize_inverse).collect();
    let refs: Vec<&LinearPencil<F>> = blocks.iter().map(|b| &b.pencil).collect();
    let hat = LinearPencil::block_diag(field, &refs);
    let mut positions = Vec::with_capacity(gs.len());
    let mut off = 0;
    for b in &blocks {
        positions.push(off + b.row);
        off += b.size();
    }
    (hat, positions)
}

/// A pencil whose inverse contains an `size × size` grid of realized entries
/// at rows and columns `offset..offset + size`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedGrid<F: Field> {
    pub pencil: LinearPencil<F>,
    pub offset: usize,
    pub size: usize,
}

impl<F: Field> RealizedGrid<F> {
    pub fn entry(&self, i: usize, j: usize) -> RealizedEntry<F> {
        RealizedEntry { pencil: self.pencil.clone(), row: self.offset + i, col: self.offset + j }
    }
}

/// Builds a pencil `L̃` over `x₁…x_n` with `(L̃⁻¹)_{off+i, off+j} = L(x, g₁⁻¹, …, g_m⁻¹)⁻¹_{i,j}`.
///
/// `L` has size `s` and `n + m` variables, `y_k` being variable `n + k`. Write
/// `L = L′(x) + Σ β_k y_k`. The result has blocks `[I_{s²} | Ĥ | I_{s²} | L′]`
/// along the diagonal, where `Ĥ` holds one [`realize_inverse`] copy of `g_k`
/// per nonzero entry `(a, b)` of `β_k` (a single copy when `β_k = 0`). The
/// constant connectors route the pair index `(a, b)` through that copy, so
/// the Schur complement onto the last block is `L′ + Σ β_k ⊙ g_k⁻¹`.
///
/// Its size is `ŝ + 2s² + s` with `ŝ` the size of `Ĥ`; when every `y_k` sits in
/// one entry of `L` (as it does for branching-program pencils) this is
/// `Σ size(g_k) + m + 2s² + s`.
pub fn compose<F: Field>(l: &LinearPencil<F>, gs: &[RealizedEntry<F>], nvars_x: usize) -> Result<RealizedGrid<F>, PencilError> {
    let m = gs.len();
    let s = l.size();
    if l.nvars() != nvars_x + m {
        return Err(PencilError::DimensionMismatch(format!(
            "pencil has {} variables, expected {nvars_x} inputs plus {m} placeholders",
            l.nvars()
        )));
    }
    if let Some(g) = gs.iter().find(|g| g.pencil.nvars() > nvars_x) {
        return Err(PencilError::DimensionMismatch(format!(
            "substituted entry uses {} variables, only {nvars_x} inputs available",
            g.pencil.nvars()
        )));
    }
    if m == 0 {
        return Ok(RealizedGrid { pencil: l.clone(), offset: 0, size: s });
    }
    let f = l.field();
    let pair = |i: usize, j: usize| i * s + j;

    // One copy per support entry of β_k: (k, link) with link = (a, b, β_{k,a,b}).
    let mut copies: Vec<(usize, Option<(usize, usize, F::Elem)>)> = Vec::new();
    for k in 0..m {
        let beta = l.coeff(nvars_x + 1 + k);
        let before = copies.len();
        for (a, b, v) in beta.nonzeros() {
            copies.push((k, Some((a, b, v.clone()))));
        }
        if copies.len() == before {
            copies.push((k, None));
        }
    }
    let copy_entries: Vec<RealizedEntry<F>> = copies.iter().map(|(k, _)| gs[*k].clone()).collect();
    let (hat, corners) = hat_pencil(f, &copy_entries);
    let hs = hat.size();

    let (r1, r2, r3, r4) = (0, s * s, s * s + hs, 2 * s * s + hs);
    let total = r4 + s;
    let mut out = LinearPencil::zeros(f, total, nvars_x);
    let one = f.one();
    let minus_one = f.neg(&one);
    for i in 0..s * s {
        out.coeff_mut(0).set(r1 + i, r1 + i, one.clone());
        out.coeff_mut(0).set(r3 + i, r3 + i, one.clone());
    }
    out.place(r2, &hat.with_nvars(nvars_x));
    for k in 0..=nvars_x {
        out.coeff_mut(k).set_block(r4, r4, l.coeff(k));
    }
    for ((_, link), &corner) in copies.iter().zip(&corners) {
        if let Some((a, b, beta)) = link {
            out.coeff_mut(0).set(r1 + pair(*a, *b), r2 + corner, beta.clone());
            out.coeff_mut(0).set(r2 + corner, r3 + pair(*a, *b), one.clone());
        }
    }
    for i in 0..s {
        for j in 0..s {
            out.coeff_mut(0).set(r3 + pair(i, j), r4 + j, one.clone());
            out.coeff_mut(0).set(r4 + i, r1 + pair(i, j), minus_one.clone());
        }
    }
    Ok(RealizedGrid { pencil: out, offset: r4, size: s })
}
