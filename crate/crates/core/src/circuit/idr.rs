//! Inversely disjoint skewed form: a top ABP over the inputs and placeholders,
//! each placeholder standing for the inverse of a recursively decomposed subformula.

use crate::exactalg::{DenseMatrix, ExactAlgError, Field, MatrixTuple};

use super::abp::{lower, Abp};
use super::{classify, CircuitError, Node, NodeId, RationalCircuit};

/// Default bound on (expanded tree size) / (circuit size).
pub const DEFAULT_BLOWUP_CAP: f64 = 8.0;

#[derive(Clone, Copy, Debug)]
pub struct IdrOptions {
    pub blowup_cap: f64,
}

impl Default for IdrOptions {
    fn default() -> Self {
        Self { blowup_cap: DEFAULT_BLOWUP_CAP }
    }
}

/// `top(x, y_1, …, y_m)` with `y_k = subs[k-1]^{-1}`.
///
/// In `top`, variables `1..=nvars` are the inputs and `nvars + k` is `y_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdrCircuit<F: Field> {
    pub nvars: usize,
    pub top: Abp<F>,
    pub subs: Vec<IdrCircuit<F>>,
    /// The inverse gate of the source circuit that each placeholder replaces.
    pub origins: Vec<NodeId>,
}

impl<F: Field> IdrCircuit<F> {
    pub fn height(&self) -> usize {
        self.subs.iter().map(|s| s.height() + 1).max().unwrap_or(0)
    }

    /// Number of placeholders at every level combined.
    pub fn num_inverses(&self) -> usize {
        self.subs.iter().map(|s| 1 + s.num_inverses()).sum()
    }

    /// Sum of ABP node counts at every level.
    pub fn total_abp_size(&self) -> usize {
        self.top.size() + self.subs.iter().map(IdrCircuit::total_abp_size).sum::<usize>()
    }

    /// Evaluates level by level; an inverse of a singular value reports its origin gate.
    pub fn eval(&self, t: &MatrixTuple<F>) -> Result<DenseMatrix<F>, CircuitError> {
        let mut ys = Vec::with_capacity(self.subs.len());
        for (sub, &origin) in self.subs.iter().zip(&self.origins) {
            match sub.eval(t)?.invert() {
                Ok(m) => ys.push(m),
                Err(ExactAlgError::Singular) => return Err(CircuitError::Undefined(origin)),
                Err(e) => return Err(e.into()),
            }
        }
        let base = MatrixTuple::new(t.field(), t.dim(), t.mats()[..self.nvars].to_vec())?;
        self.top.eval(&base.extended(ys)?)
    }
}

/// Decomposes a circuit into inversely disjoint skewed form.
///
/// Shared subcircuits are duplicated; when that would grow the tree size
/// beyond `blowup_cap` times the circuit size the call fails with
/// [`CircuitError::BlowupExceeded`].
pub fn to_idrrsc<F: Field>(c: &RationalCircuit, field: &F, opts: IdrOptions) -> Result<IdrCircuit<F>, CircuitError> {
    let size = classify(c).size;
    let expanded = tree_size(c);
    if expanded as f64 > opts.blowup_cap * size as f64 {
        return Err(CircuitError::BlowupExceeded { size, expanded, cap: opts.blowup_cap });
    }
    decompose(c, c.output(), field)
}

fn tree_size(c: &RationalCircuit) -> u128 {
    let mut t = vec![0u128; c.nodes().len()];
    for (id, n) in c.nodes().iter().enumerate() {
        t[id] = n.children().fold(1u128, |acc, ch| acc.saturating_add(t[ch]));
    }
    t[c.output()]
}

fn decompose<F: Field>(c: &RationalCircuit, root: NodeId, field: &F) -> Result<IdrCircuit<F>, CircuitError> {
    let n = c.nvars();
    let mut subs = Vec::new();
    let mut origins = Vec::new();
    let layers = lower(c, root, field, &mut |inv| {
        let Node::Inv(child) = *c.node(inv) else { unreachable!() };
        subs.push(decompose(c, child, field)?);
        origins.push(inv);
        Ok(n + subs.len())
    })?;
    let top = Abp { field: field.clone(), nvars: n + subs.len(), layers };
    Ok(IdrCircuit { nvars: n, top, subs, origins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{eval_circuit, parse_circuit_file, parse_expr};
    use crate::exactalg::{sample_tuple, PrimeField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const HUA: &str = "inv(x1 + x1*inv(x2)*x1) + inv(x1+x2) - inv(x1)";

    #[test]
    fn hua_decomposition_shape() {
        let f = PrimeField::mersenne61();
        let c = parse_expr(HUA).unwrap();
        let idr = to_idrrsc(&c, &f, IdrOptions::default()).unwrap();
        assert_eq!(idr.subs.len(), 3);
        assert_eq!(idr.height(), 2);
        assert_eq!(idr.num_inverses(), 4);
        // The top level is y1 + y2 - y3.
        assert_eq!(idr.top.size(), 2);
        assert_eq!(idr.top.nvars, 5);
    }

    #[test]
    fn eval_agrees_with_circuit() {
        let f = PrimeField::mersenne61();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for src in [HUA, "inv(x1*x2 - x2*x1)", "x1*inv(x2 + inv(x1))*x2 + 3", "inv(inv(x1) + inv(x2))"] {
            let c = parse_expr(src).unwrap();
            let idr = to_idrrsc(&c, &f, IdrOptions::default()).unwrap();
            for d in 1..=3 {
                let t = sample_tuple(&f, 2, d, &mut rng);
                assert_eq!(idr.eval(&t).ok(), eval_circuit(&c, &t).ok(), "{src}");
            }
        }
    }

    #[test]
    fn undefinedness_reports_origin() {
        let f = PrimeField::mersenne61();
        let c = parse_expr("inv(x1*x2 - x2*x1)").unwrap();
        let idr = to_idrrsc(&c, &f, IdrOptions::default()).unwrap();
        let t = MatrixTuple::scalars(&f, &[3, 4]);
        assert_eq!(idr.eval(&t), Err(CircuitError::Undefined(c.output())));
        assert_eq!(eval_circuit(&c, &t), Err(CircuitError::Undefined(c.output())));
    }

    #[test]
    fn blowup_cap_enforced() {
        // Repeated squaring: tree size doubles at every level.
        let mut text = String::from("0 var 1\n");
        for i in 1..=12 {
            text.push_str(&format!("{i} mul {} {}\n", i - 1, i - 1));
        }
        text.push_str("output 12\n");
        let c = parse_circuit_file(&text).unwrap();
        let f = PrimeField::mersenne61();
        assert!(matches!(to_idrrsc(&c, &f, IdrOptions::default()), Err(CircuitError::BlowupExceeded { .. })));
        let cap = IdrOptions { blowup_cap: 1e4 };
        let idr = to_idrrsc(&c, &f, cap).unwrap();
        assert_eq!(idr.top.size(), 4097);
    }
}
