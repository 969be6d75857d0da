//! Reduction to a fixed number of variables.
//!
//! Every `x_i` is replaced by `Σ_{j=0}^{h} y_{j0} y_{j1}^i y_{j0}`, which keeps
//! the inversion height and is nonzero exactly when the original circuit is.

use crate::exactalg::{DenseMatrix, ExactAlgError, Field, MatrixTuple};

use super::{CircuitError, Node, NodeId, RationalCircuit, VarNaming};

/// Variable index of `y_{j,b}`.
pub fn y_index(j: usize, b: usize) -> usize {
    2 * j + b + 1
}

/// Rewrites `c` over the `2(h+1)` variables `y_{j0}, y_{j1}`; requires `h ≥ height(c)`.
pub fn variable_reduction(c: &RationalCircuit, h: usize) -> Result<RationalCircuit, CircuitError> {
    let height = c.height();
    if height > h {
        return Err(CircuitError::HeightTooLarge { height, allowed: h });
    }
    let reach = c.reachable();
    let mut remap = vec![usize::MAX; c.nodes().len()];
    let mut nodes: Vec<Node> = Vec::new();
    let push = |nodes: &mut Vec<Node>, n: Node| -> NodeId {
        nodes.push(n);
        nodes.len() - 1
    };
    for (id, n) in c.nodes().iter().enumerate() {
        if !reach[id] {
            continue;
        }
        remap[id] = match *n {
            Node::Var(i) => {
                let mut sum = None;
                for j in 0..=h {
                    let mut acc = push(&mut nodes, Node::Var(y_index(j, 0)));
                    for _ in 0..i {
                        let y1 = push(&mut nodes, Node::Var(y_index(j, 1)));
                        acc = push(&mut nodes, Node::Mul(acc, y1));
                    }
                    let y0 = push(&mut nodes, Node::Var(y_index(j, 0)));
                    let chain = push(&mut nodes, Node::Mul(acc, y0));
                    sum = Some(match sum {
                        None => chain,
                        Some(s) => push(&mut nodes, Node::Add(s, chain)),
                    });
                }
                sum.unwrap()
            }
            Node::Const(ref q) => push(&mut nodes, Node::Const(q.clone())),
            Node::Add(l, r) => push(&mut nodes, Node::Add(remap[l], remap[r])),
            Node::Sub(l, r) => push(&mut nodes, Node::Sub(remap[l], remap[r])),
            Node::Mul(l, r) => push(&mut nodes, Node::Mul(remap[l], remap[r])),
            Node::Inv(ch) => push(&mut nodes, Node::Inv(remap[ch])),
        };
    }
    let out = remap[c.output()];
    Ok(RationalCircuit::new(nodes, out, 2 * (h + 1))?.with_naming(VarNaming::Paired))
}

/// Encodes a polynomial formula in the two variables `y0_0, y0_1`.
pub fn bivariate_encode(c: &RationalCircuit) -> Result<RationalCircuit, CircuitError> {
    variable_reduction(c, 0)
}

/// Maps a point `q` for the reduced circuit to the corresponding point
/// `p_i = Σ_j q_{j0} q_{j1}^i q_{j0}` (for `i = 1..=n`) of the original one.
pub fn transport_witness<F: Field>(q: &MatrixTuple<F>, n: usize, h: usize) -> Result<MatrixTuple<F>, ExactAlgError> {
    if q.nvars() < 2 * (h + 1) {
        return Err(ExactAlgError::DimensionMismatch(format!(
            "expected {} reduced variables, got {}",
            2 * (h + 1),
            q.nvars()
        )));
    }
    let field = q.field();
    let d = q.dim();
    let mut out = vec![DenseMatrix::zeros(field, d, d); n];
    for j in 0..=h {
        let a = q.var(y_index(j, 0));
        let b = q.var(y_index(j, 1));
        let mut pow = a.clone();
        for p in out.iter_mut() {
            pow = pow.mul(b)?;
            *p = p.add(&pow.mul(a)?)?;
        }
    }
    MatrixTuple::new(field, d, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{classify, eval_circuit, parse_expr};
    use crate::exactalg::{sample_tuple, PrimeField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_variable_h0() {
        let c = variable_reduction(&parse_expr("x1").unwrap(), 0).unwrap();
        assert_eq!(c.to_expr_string(), "y0_0*y0_1*y0_0");
        assert_eq!(c.nvars(), 2);
    }

    #[test]
    fn height_preserved_and_checked() {
        let c = parse_expr("inv(x1 + x2*inv(x3))").unwrap();
        assert!(variable_reduction(&c, 1).is_err());
        let r = variable_reduction(&c, 2).unwrap();
        let k = classify(&r);
        assert_eq!(k.height, 2);
        assert!(k.is_formula);
        assert_eq!(r.nvars(), 6);
        assert!(bivariate_encode(&c).is_err());
    }

    #[test]
    fn transport_commutes_with_evaluation() {
        let f = PrimeField::mersenne61();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = parse_expr("x1*inv(x2 + x3)*x2 - x3").unwrap();
        let r = variable_reduction(&c, 1).unwrap();
        for d in 1..=3 {
            let q = sample_tuple(&f, 4, d, &mut rng);
            let p = transport_witness(&q, 3, 1).unwrap();
            assert_eq!(eval_circuit(&r, &q).unwrap(), eval_circuit(&c, &p).unwrap());
        }
    }
}
