//! Layered algebraic branching programs with affine edge labels.

use crate::exactalg::{DenseMatrix, Field, MatrixTuple};
use crate::freepoly::NcPoly;

use super::{CircuitError, Node, NodeId, RationalCircuit};

/// An affine form `c + Σ a_i x_i`, stored sparsely with 1-based variable indices.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearForm<F: Field> {
    pub constant: F::Elem,
    pub terms: Vec<(usize, F::Elem)>,
}

impl<F: Field> LinearForm<F> {
    pub fn zero(field: &F) -> Self {
        Self { constant: field.zero(), terms: Vec::new() }
    }
    pub fn constant(c: F::Elem) -> Self {
        Self { constant: c, terms: Vec::new() }
    }
    pub fn var(field: &F, i: usize) -> Self {
        Self { constant: field.zero(), terms: vec![(i, field.one())] }
    }

    pub fn is_zero(&self, field: &F) -> bool {
        field.is_zero(&self.constant) && self.terms.is_empty()
    }

    /// Coefficient of `x_i`, zero when absent.
    pub fn coeff(&self, field: &F, i: usize) -> F::Elem {
        self.terms.iter().find(|(j, _)| *j == i).map(|(_, a)| a.clone()).unwrap_or_else(|| field.zero())
    }

    pub fn scale(&self, field: &F, c: &F::Elem) -> Self {
        if field.is_zero(c) {
            return Self::zero(field);
        }
        Self {
            constant: field.mul(c, &self.constant),
            terms: self.terms.iter().map(|(i, a)| (*i, field.mul(c, a))).collect(),
        }
    }

    pub fn add(&self, field: &F, other: &Self) -> Self {
        let mut terms: Vec<(usize, F::Elem)> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut a, mut b) = (self.terms.iter().peekable(), other.terms.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, x)), Some((j, y))) if i == j => {
                    let s = field.add(x, y);
                    if !field.is_zero(&s) {
                        terms.push((*i, s));
                    }
                    a.next();
                    b.next();
                }
                (Some((i, x)), Some((j, _))) if i < j => {
                    terms.push((*i, x.clone()));
                    a.next();
                }
                (_, Some((j, y))) => {
                    terms.push((*j, y.clone()));
                    b.next();
                }
                (Some((i, x)), None) => {
                    terms.push((*i, x.clone()));
                    a.next();
                }
                (None, None) => break,
            }
        }
        Self { constant: field.add(&self.constant, &other.constant), terms }
    }

    pub fn max_var(&self) -> usize {
        self.terms.last().map_or(0, |(i, _)| *i)
    }

    /// The `d × d` matrix `c·I + Σ a_i T_i`.
    pub fn eval(&self, t: &MatrixTuple<F>) -> DenseMatrix<F> {
        let field = t.field();
        let mut m = DenseMatrix::scalar(field, t.dim(), &self.constant);
        for (i, a) in &self.terms {
            m.add_scaled_block(0, 0, a, t.var(*i));
        }
        m
    }

    pub fn to_poly(&self, field: &F) -> NcPoly<F> {
        let mut p = NcPoly::constant(field, self.constant.clone());
        for (i, a) in &self.terms {
            p = p.add(&NcPoly::var(field, *i).scale(a));
        }
        p
    }
}

/// A rectangular matrix of affine forms (one ABP layer).
#[derive(Clone, Debug, PartialEq)]
pub struct FormMatrix<F: Field> {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<LinearForm<F>>,
}

impl<F: Field> FormMatrix<F> {
    pub fn zeros(field: &F, rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![LinearForm::zero(field); rows * cols] }
    }
    pub fn single(form: LinearForm<F>) -> Self {
        Self { rows: 1, cols: 1, entries: vec![form] }
    }
    pub fn get(&self, i: usize, j: usize) -> &LinearForm<F> {
        &self.entries[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, f: LinearForm<F>) {
        self.entries[i * self.cols + j] = f;
    }

    fn place(&mut self, r0: usize, c0: usize, m: &Self) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self.set(r0 + i, c0 + j, m.get(i, j).clone());
            }
        }
    }

    fn scaled(&self, field: &F, c: &F::Elem) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|f| f.scale(field, c)).collect() }
    }

    /// The evaluated layer as an `(rows·d) × (cols·d)` block matrix.
    pub fn eval(&self, t: &MatrixTuple<F>) -> DenseMatrix<F> {
        let d = t.dim();
        let mut m = DenseMatrix::zeros(t.field(), self.rows * d, self.cols * d);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let f = self.get(i, j);
                if !f.is_zero(t.field()) {
                    m.set_block(i * d, j * d, &f.eval(t));
                }
            }
        }
        m
    }
}

/// A layered ABP `M_1 M_2 ⋯ M_L` with `M_1` a row and `M_L` a column; its
/// value is the single entry of the product. The source and sink are the
/// unique nodes of the first and last layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Abp<F: Field> {
    pub field: F,
    pub nvars: usize,
    pub layers: Vec<FormMatrix<F>>,
}

impl<F: Field> Abp<F> {
    /// Node count of every layer, source first.
    pub fn layer_widths(&self) -> Vec<usize> {
        std::iter::once(1).chain(self.layers.iter().map(|l| l.cols)).collect()
    }

    /// Total number of nodes.
    pub fn size(&self) -> usize {
        self.layer_widths().iter().sum()
    }

    pub fn width(&self) -> usize {
        self.layer_widths().into_iter().max().unwrap_or(1)
    }

    pub fn eval(&self, t: &MatrixTuple<F>) -> Result<DenseMatrix<F>, CircuitError> {
        if self.nvars > t.nvars() {
            return Err(CircuitError::TooFewVariables { needed: self.nvars, got: t.nvars() });
        }
        let mut acc = self.layers[0].eval(t);
        for l in &self.layers[1..] {
            acc = acc.mul(&l.eval(t))?;
        }
        Ok(acc)
    }

    pub fn to_poly(&self) -> NcPoly<F> {
        let f = &self.field;
        let mut row: Vec<NcPoly<F>> = vec![NcPoly::one(f)];
        for l in &self.layers {
            let mut next = vec![NcPoly::zero(f); l.cols];
            for (i, p) in row.iter().enumerate() {
                for (j, slot) in next.iter_mut().enumerate() {
                    let e = l.get(i, j);
                    if !e.is_zero(f) {
                        *slot = slot.add(&p.mul(&e.to_poly(f)));
                    }
                }
            }
            row = next;
        }
        row.pop().expect("last layer is a column")
    }
}

/// Lowers an inverse-free circuit to an ABP, expanding shared subcircuits.
///
/// A leaf becomes a single edge, `*` concatenates layers (a constant factor is
/// folded into the first layer of the other side) and `+`/`-` place the two
/// operands in parallel after padding the shorter one with unit layers.
pub fn formula_to_abp<F: Field>(c: &RationalCircuit, field: &F) -> Result<Abp<F>, CircuitError> {
    let height = c.height();
    if height > 0 {
        return Err(CircuitError::HeightTooLarge { height, allowed: 0 });
    }
    let layers = lower(c, c.output(), field, &mut |_| unreachable!("no inverse gates"))?;
    Ok(Abp { field: field.clone(), nvars: c.nvars(), layers })
}

/// Lowers the subcircuit at `root`; each inverse gate reached is replaced by the
/// variable index returned from `on_inv` (which may recurse into it).
pub(crate) fn lower<F: Field>(
    c: &RationalCircuit,
    root: NodeId,
    field: &F,
    on_inv: &mut dyn FnMut(NodeId) -> Result<usize, CircuitError>,
) -> Result<Vec<FormMatrix<F>>, CircuitError> {
    let as_const = |id: NodeId| -> Result<Option<F::Elem>, CircuitError> {
        match c.node(id) {
            Node::Const(q) => field.from_rational(q).map(Some).ok_or(CircuitError::ConstantNotInField(id)),
            _ => Ok(None),
        }
    };
    Ok(match *c.node(root) {
        Node::Const(_) => vec![FormMatrix::single(LinearForm::constant(as_const(root)?.unwrap()))],
        Node::Var(i) => vec![FormMatrix::single(LinearForm::var(field, i))],
        Node::Inv(_) => {
            let y = on_inv(root)?;
            vec![FormMatrix::single(LinearForm::var(field, y))]
        }
        Node::Mul(l, r) => {
            if let Some(k) = as_const(l)? {
                scale_first(lower(c, r, field, on_inv)?, field, &k)
            } else if let Some(k) = as_const(r)? {
                scale_first(lower(c, l, field, on_inv)?, field, &k)
            } else {
                let mut a = lower(c, l, field, on_inv)?;
                a.extend(lower(c, r, field, on_inv)?);
                a
            }
        }
        Node::Add(l, r) | Node::Sub(l, r) => {
            let a = lower(c, l, field, on_inv)?;
            let mut b = lower(c, r, field, on_inv)?;
            if matches!(c.node(root), Node::Sub(..)) {
                b = scale_first(b, field, &field.neg(&field.one()));
            }
            parallel(field, a, b)
        }
    })
}

fn scale_first<F: Field>(mut frag: Vec<FormMatrix<F>>, field: &F, k: &F::Elem) -> Vec<FormMatrix<F>> {
    frag[0] = frag[0].scaled(field, k);
    frag
}

fn parallel<F: Field>(field: &F, mut a: Vec<FormMatrix<F>>, mut b: Vec<FormMatrix<F>>) -> Vec<FormMatrix<F>> {
    let unit = FormMatrix::single(LinearForm::constant(field.one()));
    let len = a.len().max(b.len());
    a.resize(len, unit.clone());
    b.resize(len, unit);
    if len == 1 {
        return vec![FormMatrix::single(a[0].get(0, 0).add(field, b[0].get(0, 0)))];
    }
    let mut out = Vec::with_capacity(len);
    for (l, (fa, fb)) in a.iter().zip(&b).enumerate() {
        let (rows, cols) = if l == 0 {
            (1, fa.cols + fb.cols)
        } else if l == len - 1 {
            (fa.rows + fb.rows, 1)
        } else {
            (fa.rows + fb.rows, fa.cols + fb.cols)
        };
        let mut m = FormMatrix::zeros(field, rows, cols);
        m.place(0, 0, fa);
        let (r0, c0) = if l == 0 {
            (0, fa.cols)
        } else if l == len - 1 {
            (fa.rows, 0)
        } else {
            (fa.rows, fa.cols)
        };
        m.place(r0, c0, fb);
        out.push(m);
    }
    out
}
