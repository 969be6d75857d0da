//! The rational circuit IR.
//!
//! A [`RationalCircuit`] is a DAG over constants, variables, `+`, `-`, `*`
//! and inversion, stored in topological order (children always have smaller
//! ids than their parents). Formulas are the tree-shaped circuits.
//!
//! Besides parsing and evaluation, this module lowers inverse-free formulas
//! to algebraic branching programs ([`Abp`]) and decomposes arbitrary
//! formulas into inversely disjoint skewed form ([`IdrCircuit`]), which is
//! the input of the pencil compiler.

mod abp;
mod corpus;
mod idr;
mod parse;
mod reduce;

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::exactalg::{DenseMatrix, ExactAlgError, Field, MatrixTuple};
use crate::freepoly::NcPoly;

pub use abp::{formula_to_abp, Abp, FormMatrix, LinearForm};
pub use corpus::{acceptance_corpus, parse_corpus, random_circuit, CorpusEntry, ACCEPTANCE_CORPUS};
pub use idr::{to_idrrsc, IdrCircuit, IdrOptions, DEFAULT_BLOWUP_CAP};
pub use parse::{parse_circuit_file, parse_expr};
pub use reduce::{bivariate_encode, transport_witness, variable_reduction, y_index};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Const(BigRational),
    /// 1-based variable index.
    Var(usize),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Inv(NodeId),
}

impl Node {
    pub fn children(&self) -> impl Iterator<Item = NodeId> {
        let (a, b) = match *self {
            Node::Const(_) | Node::Var(_) => (None, None),
            Node::Inv(c) => (Some(c), None),
            Node::Add(l, r) | Node::Sub(l, r) | Node::Mul(l, r) => (Some(l), Some(r)),
        };
        a.into_iter().chain(b)
    }
}

/// How variables are printed: `x1, x2, …` or, for the outputs of variable
/// reduction, `y0_0, y0_1, y1_0, …` (with `y_j_b` stored as index `2j + b + 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VarNaming {
    #[default]
    Plain,
    Paired,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error("undefined: the input of inverse gate {0} is singular")]
    Undefined(NodeId),
    #[error("constant at node {0} has no image in the working field")]
    ConstantNotInField(NodeId),
    #[error("circuit uses {needed} variables but the tuple has {got}")]
    TooFewVariables { needed: usize, got: usize },
    #[error("circuit has inversion height {height}, exceeding the allowed {allowed}")]
    HeightTooLarge { height: usize, allowed: usize },
    #[error("tree expansion grows the circuit from {size} to {expanded} nodes (cap {cap}x)")]
    BlowupExceeded { size: usize, expanded: u128, cap: f64 },
    #[error(transparent)]
    Algebra(#[from] ExactAlgError),
}

/// Structural summary of a circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub size: usize,
    pub height: usize,
    pub is_formula: bool,
    pub is_poly: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalCircuit {
    nodes: Vec<Node>,
    output: NodeId,
    nvars: usize,
    naming: VarNaming,
}

impl RationalCircuit {
    /// Validates topological order and variable indices. `nvars` is raised to the
    /// largest variable index that occurs.
    pub fn new(nodes: Vec<Node>, output: NodeId, nvars: usize) -> Result<Self, CircuitError> {
        if output >= nodes.len() {
            return Err(CircuitError::Invalid(format!("output {output} out of range")));
        }
        let mut max_var = 0;
        for (id, n) in nodes.iter().enumerate() {
            if let Some(c) = n.children().find(|&c| c >= id) {
                return Err(CircuitError::Invalid(format!("node {id} refers forward to {c}")));
            }
            if let Node::Var(i) = n {
                if *i == 0 {
                    return Err(CircuitError::Invalid("variable indices are 1-based".into()));
                }
                max_var = max_var.max(*i);
            }
        }
        Ok(Self { nodes, output, nvars: nvars.max(max_var), naming: VarNaming::Plain })
    }

    pub fn with_naming(mut self, naming: VarNaming) -> Self {
        self.naming = naming;
        self
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }
    pub fn output(&self) -> NodeId {
        self.output
    }
    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn naming(&self) -> VarNaming {
        self.naming
    }

    /// Flags for the nodes reachable from the output.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        seen[self.output] = true;
        for id in (0..=self.output).rev() {
            if seen[id] {
                for c in self.nodes[id].children() {
                    seen[c] = true;
                }
            }
        }
        seen
    }

    /// Inversion height of every node.
    pub fn heights(&self) -> Vec<usize> {
        let mut h = vec![0usize; self.nodes.len()];
        for (id, n) in self.nodes.iter().enumerate() {
            h[id] = match *n {
                Node::Const(_) | Node::Var(_) => 0,
                Node::Inv(c) => h[c] + 1,
                Node::Add(l, r) | Node::Sub(l, r) | Node::Mul(l, r) => h[l].max(h[r]),
            };
        }
        h
    }

    pub fn height(&self) -> usize {
        self.heights()[self.output]
    }

    /// The subcircuit rooted at `root`, renumbered compactly.
    pub fn subcircuit(&self, root: NodeId) -> RationalCircuit {
        let mut keep = vec![false; self.nodes.len()];
        keep[root] = true;
        for id in (0..=root).rev() {
            if keep[id] {
                for c in self.nodes[id].children() {
                    keep[c] = true;
                }
            }
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for id in 0..=root {
            if keep[id] {
                remap[id] = nodes.len();
                nodes.push(remap_node(&self.nodes[id], &remap));
            }
        }
        RationalCircuit { output: nodes.len() - 1, nodes, nvars: self.nvars, naming: self.naming }
    }

    /// Expression text; shared subcircuits are printed once per use.
    pub fn to_expr_string(&self) -> String {
        let mut s = String::new();
        self.write_expr(self.output, 0, &mut s);
        s
    }

    fn var_name(&self, i: usize) -> String {
        match self.naming {
            VarNaming::Plain => format!("x{i}"),
            VarNaming::Paired => format!("y{}_{}", (i - 1) / 2, (i - 1) % 2),
        }
    }

    // Precedence: 0 = sum context, 1 = product context, 2 = atom context.
    fn write_expr(&self, id: NodeId, prec: u8, out: &mut String) {
        match &self.nodes[id] {
            Node::Const(q) => {
                let neg = q.is_negative();
                let text = if q.denom().is_one() { q.numer().abs().to_string() } else { format!("{}/{}", q.numer().abs(), q.denom()) };
                if neg {
                    // The grammar has no unary minus; write (0 - c).
                    out.push_str(&format!("(0 - {text})"));
                } else if !q.denom().is_one() && prec >= 2 {
                    out.push_str(&format!("({text})"));
                } else {
                    out.push_str(&text);
                }
            }
            Node::Var(i) => out.push_str(&self.var_name(*i)),
            Node::Add(l, r) | Node::Sub(l, r) => {
                let op = if matches!(self.nodes[id], Node::Add(..)) { " + " } else { " - " };
                if prec > 0 {
                    out.push('(');
                }
                self.write_expr(*l, 0, out);
                out.push_str(op);
                self.write_expr(*r, 1, out);
                if prec > 0 {
                    out.push(')');
                }
            }
            Node::Mul(l, r) => {
                if prec > 1 {
                    out.push('(');
                }
                self.write_expr(*l, 1, out);
                out.push('*');
                self.write_expr(*r, 2, out);
                if prec > 1 {
                    out.push(')');
                }
            }
            Node::Inv(c) => {
                out.push_str("inv(");
                self.write_expr(*c, 0, out);
                out.push(')');
            }
        }
    }

    /// Serializes in the node-per-line circuit file format.
    pub fn to_circuit_file(&self) -> String {
        let mut s = String::new();
        for (id, n) in self.nodes.iter().enumerate() {
            let line = match n {
                Node::Const(q) => format!("{id} const {}", format_rational(q)),
                Node::Var(i) => format!("{id} var {i}"),
                Node::Add(l, r) => format!("{id} add {l} {r}"),
                Node::Sub(l, r) => format!("{id} sub {l} {r}"),
                Node::Mul(l, r) => format!("{id} mul {l} {r}"),
                Node::Inv(c) => format!("{id} inv {c}"),
            };
            s.push_str(&line);
            s.push('\n');
        }
        s.push_str(&format!("output {}\n", self.output));
        s
    }
}

impl fmt::Display for RationalCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expr_string())
    }
}

fn remap_node(n: &Node, remap: &[usize]) -> Node {
    match n {
        Node::Const(q) => Node::Const(q.clone()),
        Node::Var(i) => Node::Var(*i),
        Node::Add(l, r) => Node::Add(remap[*l], remap[*r]),
        Node::Sub(l, r) => Node::Sub(remap[*l], remap[*r]),
        Node::Mul(l, r) => Node::Mul(remap[*l], remap[*r]),
        Node::Inv(c) => Node::Inv(remap[*c]),
    }
}

pub(crate) fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Incremental construction of circuits in topological order.
#[derive(Default, Clone, Debug)]
pub struct CircuitBuilder {
    nodes: Vec<Node>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        self.nodes.len() - 1
    }
    pub fn var(&mut self, i: usize) -> NodeId {
        self.push(Node::Var(i))
    }
    pub fn constant(&mut self, c: i64) -> NodeId {
        self.push(Node::Const(BigRational::from_integer(c.into())))
    }
    pub fn add(&mut self, l: NodeId, r: NodeId) -> NodeId {
        self.push(Node::Add(l, r))
    }
    pub fn sub(&mut self, l: NodeId, r: NodeId) -> NodeId {
        self.push(Node::Sub(l, r))
    }
    pub fn mul(&mut self, l: NodeId, r: NodeId) -> NodeId {
        self.push(Node::Mul(l, r))
    }
    pub fn inv(&mut self, c: NodeId) -> NodeId {
        self.push(Node::Inv(c))
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn finish(self, output: NodeId, nvars: usize) -> Result<RationalCircuit, CircuitError> {
        RationalCircuit::new(self.nodes, output, nvars)
    }
}

/// Size, inversion height and shape of the part reachable from the output.
pub fn classify(c: &RationalCircuit) -> Classification {
    let reach = c.reachable();
    let size = reach.iter().filter(|&&r| r).count();
    let mut parents = vec![0usize; c.nodes.len()];
    for (id, n) in c.nodes.iter().enumerate() {
        if reach[id] {
            for ch in n.children() {
                parents[ch] += 1;
            }
        }
    }
    let is_formula = parents.iter().all(|&p| p <= 1);
    let height = c.height();
    Classification { size, height, is_formula, is_poly: height == 0 }
}

/// Bottom-up evaluation at a matrix tuple.
///
/// Fails with [`CircuitError::Undefined`] naming the first inverse gate whose
/// input evaluates to a singular matrix, so "outside the domain" is kept apart
/// from "evaluates to zero".
pub fn eval_circuit<F: Field>(c: &RationalCircuit, t: &MatrixTuple<F>) -> Result<DenseMatrix<F>, CircuitError> {
    let mut values = eval_all(c, t)?;
    Ok(values[c.output].take().expect("output is reachable"))
}

/// Evaluates every reachable node; unreachable slots are `None`.
pub fn eval_all<F: Field>(c: &RationalCircuit, t: &MatrixTuple<F>) -> Result<Vec<Option<DenseMatrix<F>>>, CircuitError> {
    if c.nvars > t.nvars() {
        return Err(CircuitError::TooFewVariables { needed: c.nvars, got: t.nvars() });
    }
    let field = t.field();
    let d = t.dim();
    let reach = c.reachable();
    let mut values: Vec<Option<DenseMatrix<F>>> = vec![None; c.nodes.len()];
    for (id, n) in c.nodes.iter().enumerate() {
        if !reach[id] {
            continue;
        }
        let get = |k: NodeId| values[k].as_ref().expect("children evaluated first");
        let v = match n {
            Node::Const(q) => {
                let s = field.from_rational(q).ok_or(CircuitError::ConstantNotInField(id))?;
                DenseMatrix::scalar(field, d, &s)
            }
            Node::Var(i) => t.var(*i).clone(),
            Node::Add(l, r) => get(*l).add(get(*r))?,
            Node::Sub(l, r) => get(*l).sub(get(*r))?,
            Node::Mul(l, r) => get(*l).mul(get(*r))?,
            Node::Inv(ch) => match get(*ch).invert() {
                Ok(m) => m,
                Err(ExactAlgError::Singular) => return Err(CircuitError::Undefined(id)),
                Err(e) => return Err(e.into()),
            },
        };
        values[id] = Some(v);
    }
    Ok(values)
}

/// Expands an inverse-free circuit into its noncommutative polynomial.
pub fn circuit_to_poly<F: Field>(c: &RationalCircuit, field: &F) -> Result<NcPoly<F>, CircuitError> {
    let height = c.height();
    if height > 0 {
        return Err(CircuitError::HeightTooLarge { height, allowed: 0 });
    }
    let reach = c.reachable();
    let mut values: Vec<Option<NcPoly<F>>> = vec![None; c.nodes.len()];
    for (id, n) in c.nodes.iter().enumerate() {
        if !reach[id] {
            continue;
        }
        let get = |k: NodeId| values[k].as_ref().expect("children first");
        let v = match n {
            Node::Const(q) => NcPoly::constant(field, field.from_rational(q).ok_or(CircuitError::ConstantNotInField(id))?),
            Node::Var(i) => NcPoly::var(field, *i),
            Node::Add(l, r) => get(*l).add(get(*r)),
            Node::Sub(l, r) => get(*l).sub(get(*r)),
            Node::Mul(l, r) => get(*l).mul(get(*r)),
            Node::Inv(_) => unreachable!(),
        };
        values[id] = Some(v);
    }
    Ok(values[c.output].take().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{sample_tuple, PrimeField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) const HUA: &str = "inv(x1 + x1*inv(x2)*x1) + inv(x1+x2) - inv(x1)";

    #[test]
    fn classify_small() {
        let c = parse_expr("x1*x2 - x2*x1").unwrap();
        assert_eq!(classify(&c), Classification { size: 7, height: 0, is_formula: true, is_poly: true });
        let one = parse_expr("x1").unwrap();
        assert_eq!(classify(&one).size, 1);
        let hua = parse_expr(HUA).unwrap();
        let k = classify(&hua);
        assert_eq!(k.height, 2);
        assert!(k.is_formula);
        assert!(!k.is_poly);
        assert_eq!(classify(&parse_expr("inv(inv(x1))").unwrap()).height, 2);
    }

    #[test]
    fn dag_sharing_is_not_a_formula() {
        let mut b = CircuitBuilder::new();
        let x = b.var(1);
        let s = b.mul(x, x);
        let c = b.finish(s, 1).unwrap();
        assert!(!classify(&c).is_formula);
        assert_eq!(classify(&c).size, 2);
    }

    #[test]
    fn forward_references_rejected() {
        assert!(RationalCircuit::new(vec![Node::Inv(0)], 0, 0).is_err());
        assert!(RationalCircuit::new(vec![Node::Var(0)], 0, 0).is_err());
    }

    #[test]
    fn eval_simple_and_undefined() {
        let f = PrimeField::mersenne61();
        let c = parse_expr("inv(x1) + inv(x2)").unwrap();
        let v = eval_circuit(&c, &MatrixTuple::scalars(&f, &[1, 1])).unwrap();
        assert_eq!(*v.get(0, 0), 2);
        let c = parse_expr("inv(x1)").unwrap();
        assert!(matches!(eval_circuit(&c, &MatrixTuple::scalars(&f, &[0])), Err(CircuitError::Undefined(_))));
        assert!(matches!(eval_circuit(&c, &MatrixTuple::zeros(&f, 0, 1)), Err(CircuitError::TooFewVariables { .. })));
    }

    #[test]
    fn hua_vanishes_on_its_domain() {
        let f = PrimeField::mersenne61();
        let c = parse_expr(HUA).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 1..=3 {
            for _ in 0..10 {
                let t = sample_tuple(&f, 2, d, &mut rng);
                assert!(eval_circuit(&c, &t).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn double_inverse_is_identity_semantically() {
        let f = PrimeField::mersenne61();
        let c = parse_expr("inv(inv(x1))").unwrap();
        let t = sample_tuple(&f, 1, 3, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(eval_circuit(&c, &t).unwrap(), t.var(1).clone());
    }

    #[test]
    fn print_parse_roundtrip() {
        for src in [HUA, "x1*x2 - x2*x1", "2/3*x1 - (x2 - x3)", "inv(x1*x2)*x3", "y0_0*y0_1*y0_0"] {
            let c = parse_expr(src).unwrap();
            let back = parse_expr(&c.to_expr_string()).unwrap();
            assert_eq!(back, c, "{src} printed as {}", c);
        }
    }

    #[test]
    fn subcircuit_extracts_child() {
        let c = parse_expr("inv(x1 + x2) * x1").unwrap();
        let Node::Mul(l, _) = *c.node(c.output()) else { panic!() };
        let Node::Inv(inner) = *c.node(l) else { panic!() };
        let sub = c.subcircuit(inner);
        assert_eq!(sub.to_expr_string(), "x1 + x2");
    }
}
