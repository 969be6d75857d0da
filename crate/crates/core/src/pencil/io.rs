//! The pencil text format.
//!
//! ```text
//! size 2
//! nvars 1
//! coeff 0
//! 1 1 1
//! 2 2 1
//! end
//! coeff 1
//! 1 2 -1
//! end
//! realize 1 2
//! ```
//!
//! Triplets are `row col value` with 1-based indices; omitted entries are zero.
//! The `realize u v` trailer is optional.

use std::fmt::Write as _;

use crate::exactalg::{DenseMatrix, Field};

use super::{LinearPencil, PencilError};

pub fn pencil_to_text<F: Field>(l: &LinearPencil<F>, realize: Option<(usize, usize)>) -> String {
    let f = l.field();
    let mut s = String::new();
    writeln!(s, "size {}", l.size()).unwrap();
    writeln!(s, "nvars {}", l.nvars()).unwrap();
    for (k, a) in l.coeffs().iter().enumerate() {
        writeln!(s, "coeff {k}").unwrap();
        for (i, j, v) in a.nonzeros() {
            writeln!(s, "{} {} {}", i + 1, j + 1, f.format_elem(v)).unwrap();
        }
        writeln!(s, "end").unwrap();
    }
    if let Some((u, v)) = realize {
        writeln!(s, "realize {} {}", u + 1, v + 1).unwrap();
    }
    s
}

/// Reads a pencil and its optional designation (returned 0-based).
pub fn parse_pencil_file<F: Field>(field: &F, text: &str) -> Result<(LinearPencil<F>, Option<(usize, usize)>), PencilError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let err = |line: usize, msg: String| PencilError::Parse { line, msg };
    let mut header = |key: &str| -> Result<usize, PencilError> {
        let (n, l) = lines.next().ok_or_else(|| err(0, format!("missing `{key}` line")))?;
        match l.split_whitespace().collect::<Vec<_>>().as_slice() {
            [k, v] if *k == key => v.parse().map_err(|_| err(n, format!("bad value in `{l}`"))),
            _ => Err(err(n, format!("expected `{key} <n>`, got `{l}`"))),
        }
    };
    let size = header("size")?;
    let nvars = header("nvars")?;
    if size == 0 {
        return Err(err(1, "pencil size must be positive".into()));
    }
    let mut coeffs = vec![DenseMatrix::zeros(field, size, size); nvars + 1];
    let mut seen = vec![false; nvars + 1];
    let mut realize = None;
    while let Some((n, l)) = lines.next() {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["coeff", k] => {
                let k: usize = k.parse().map_err(|_| err(n, format!("bad coefficient index `{k}`")))?;
                if k > nvars {
                    return Err(err(n, format!("coefficient {k} exceeds nvars {nvars}")));
                }
                if std::mem::replace(&mut seen[k], true) {
                    return Err(err(n, format!("coefficient {k} given twice")));
                }
                loop {
                    let (n, l) = lines.next().ok_or_else(|| err(n, "unterminated coefficient block".into()))?;
                    if l == "end" {
                        break;
                    }
                    let [i, j, v] = l.split_whitespace().collect::<Vec<_>>()[..] else {
                        return Err(err(n, format!("expected `row col value`, got `{l}`")));
                    };
                    let idx = |s: &str| -> Result<usize, PencilError> {
                        match s.parse::<usize>() {
                            Ok(x) if (1..=size).contains(&x) => Ok(x - 1),
                            _ => Err(err(n, format!("index `{s}` outside 1..={size}"))),
                        }
                    };
                    let (i, j) = (idx(i)?, idx(j)?);
                    let v = field.parse_elem(v).map_err(|e| err(n, e.to_string()))?;
                    coeffs[k].set(i, j, v);
                }
            }
            ["realize", u, v] => {
                let idx = |s: &str| -> Result<usize, PencilError> {
                    match s.parse::<usize>() {
                        Ok(x) if (1..=size).contains(&x) => Ok(x - 1),
                        _ => Err(err(n, format!("designation `{s}` outside 1..={size}"))),
                    }
                };
                realize = Some((idx(u)?, idx(v)?));
                if lines.peek().is_some() {
                    return Err(err(n, "content after `realize` trailer".into()));
                }
            }
            _ => return Err(err(n, format!("unexpected line `{l}`"))),
        }
    }
    Ok((LinearPencil::new(field, size, coeffs)?, realize))
}
