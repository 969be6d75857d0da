//! Expression and circuit-file readers.
//!
//! Expression grammar:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := "inv(" expr ")" | atom "^-1" | atom
//! atom   := VAR | INT | INT "/" INT | "(" expr ")"
//! VAR    := "x" INT | "y" INT "_" ("0" | "1")
//! ```
//!
//! `x` and `y` variables cannot be mixed in one expression.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{CircuitError, Node, NodeId, RationalCircuit, VarNaming};
use crate::exactalg::parse_rational;

/// Parses an expression into a formula (every subterm gets its own node).
pub fn parse_expr(src: &str) -> Result<RationalCircuit, CircuitError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, nodes: Vec::new(), naming: None };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    let naming = p.naming.unwrap_or_default();
    Ok(RationalCircuit::new(p.nodes, root, 0)?.with_naming(naming))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nodes: Vec<Node>,
    naming: Option<VarNaming>,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> CircuitError {
        CircuitError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn expr(&mut self) -> Result<NodeId, CircuitError> {
        let mut acc = self.term()?;
        loop {
            if self.eat("+") {
                let r = self.term()?;
                acc = self.push(Node::Add(acc, r));
            } else if self.peek() == Some(b'-') {
                self.pos += 1;
                let r = self.term()?;
                acc = self.push(Node::Sub(acc, r));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<NodeId, CircuitError> {
        let mut acc = self.factor()?;
        while self.eat("*") {
            let r = self.factor()?;
            acc = self.push(Node::Mul(acc, r));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<NodeId, CircuitError> {
        if self.eat("inv") {
            if !self.eat("(") {
                return Err(self.error("expected `(` after `inv`"));
            }
            let inner = self.expr()?;
            if !self.eat(")") {
                return Err(self.error("expected `)`"));
            }
            return Ok(self.push(Node::Inv(inner)));
        }
        let a = self.atom()?;
        if self.eat("^") {
            if !self.eat("-1") {
                return Err(self.error("only the exponent `^-1` is supported"));
            }
            return Ok(self.push(Node::Inv(a)));
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<NodeId, CircuitError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(")") {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                let i = self.uint()?;
                if i.is_zero() {
                    return Err(self.error("variable indices start at 1"));
                }
                self.set_naming(VarNaming::Plain)?;
                let i = to_usize(&i).ok_or_else(|| self.error("variable index too large"))?;
                Ok(self.push(Node::Var(i)))
            }
            Some(b'y') => {
                self.pos += 1;
                let j = self.uint()?;
                if self.src.get(self.pos) != Some(&b'_') {
                    return Err(self.error("expected `_` in paired variable"));
                }
                self.pos += 1;
                let b = match self.src.get(self.pos) {
                    Some(b'0') => 0,
                    Some(b'1') => 1,
                    _ => return Err(self.error("paired variable suffix must be 0 or 1")),
                };
                self.pos += 1;
                self.set_naming(VarNaming::Paired)?;
                let j = to_usize(&j).ok_or_else(|| self.error("variable index too large"))?;
                Ok(self.push(Node::Var(super::y_index(j, b))))
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.uint()?;
                let q = if self.eat("/") {
                    let den = self.uint()?;
                    if den.is_zero() {
                        return Err(self.error("zero denominator"));
                    }
                    BigRational::new(num, den)
                } else {
                    BigRational::from_integer(num)
                };
                Ok(self.push(Node::Const(q)))
            }
            Some(_) => Err(self.error("expected a variable, number, `inv(` or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn uint(&mut self) -> Result<BigInt, CircuitError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected digits"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn set_naming(&mut self, n: VarNaming) -> Result<(), CircuitError> {
        match self.naming {
            Some(m) if m != n => Err(self.error("cannot mix `x` and `y` variables")),
            _ => {
                self.naming = Some(n);
                Ok(())
            }
        }
    }
}

fn to_usize(v: &BigInt) -> Option<usize> {
    usize::try_from(v).ok()
}

/// Reads the node-per-line format: `<id> <kind> <args…>` with kinds
/// `const q`, `var i`, `add a b`, `sub a b`, `mul a b`, `inv a`, and a final
/// `output <id>`. Ids are arbitrary non-negative integers but each must be
/// defined before it is referenced. Lines starting with `#` are comments.
pub fn parse_circuit_file(text: &str) -> Result<RationalCircuit, CircuitError> {
    let mut ids: HashMap<u64, NodeId> = HashMap::new();
    let mut nodes = Vec::new();
    let mut output = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| CircuitError::Parse { pos: lineno + 1, msg };
        if output.is_some() {
            return Err(err("content after `output` line".into()));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks[0] == "output" {
            let [_, id] = toks.as_slice() else { return Err(err("expected `output <id>`".into())) };
            let id: u64 = id.parse().map_err(|_| err(format!("bad id `{id}`")))?;
            output = Some(*ids.get(&id).ok_or_else(|| err(format!("undefined node {id}")))?);
            continue;
        }
        let id: u64 = toks[0].parse().map_err(|_| err(format!("bad id `{}`", toks[0])))?;
        if ids.contains_key(&id) {
            return Err(err(format!("node {id} defined twice")));
        }
        let reference = |s: &str| -> Result<NodeId, CircuitError> {
            let k: u64 = s.parse().map_err(|_| err(format!("bad id `{s}`")))?;
            ids.get(&k).copied().ok_or_else(|| err(format!("node {k} used before definition")))
        };
        let node = match (toks.get(1).copied(), &toks[2..]) {
            (Some("const"), [q]) => Node::Const(parse_rational(q).map_err(|e| err(e.to_string()))?),
            (Some("var"), [i]) => match i.parse::<usize>() {
                Ok(i) if i >= 1 => Node::Var(i),
                _ => return Err(err(format!("bad variable index `{i}`"))),
            },
            (Some("add"), [a, b]) => Node::Add(reference(a)?, reference(b)?),
            (Some("sub"), [a, b]) => Node::Sub(reference(a)?, reference(b)?),
            (Some("mul"), [a, b]) => Node::Mul(reference(a)?, reference(b)?),
            (Some("inv"), [a]) => Node::Inv(reference(a)?),
            _ => return Err(err(format!("unrecognized node line `{line}`"))),
        };
        ids.insert(id, nodes.len());
        nodes.push(node);
    }
    let output = output.ok_or_else(|| CircuitError::Parse { pos: 0, msg: "missing `output` line".into() })?;
    RationalCircuit::new(nodes, output, 0)
}
