//! Expression corpora and random circuits for experiments.

use rand::Rng;

use super::{parse_expr, CircuitBuilder, CircuitError, NodeId, RationalCircuit};

/// The corpus shipped with the crate.
pub const ACCEPTANCE_CORPUS: &str = include_str!("../../data/corpus.txt");

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub source: String,
    pub circuit: RationalCircuit,
    /// `Some(true)` for a known nonzero member, `Some(false)` for a known identity.
    pub nonzero: Option<bool>,
}

/// Lines are `nonzero: <expr>`, `zero: <expr>` or a bare expression; `#` starts a comment.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, (usize, CircuitError)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (nonzero, src) = if let Some(r) = line.strip_prefix("nonzero:") {
            (Some(true), r.trim())
        } else if let Some(r) = line.strip_prefix("zero:") {
            (Some(false), r.trim())
        } else {
            (None, line)
        };
        let circuit = parse_expr(src).map_err(|e| (i + 1, e))?;
        out.push(CorpusEntry { source: src.to_string(), circuit, nonzero });
    }
    Ok(out)
}

pub fn acceptance_corpus() -> Vec<CorpusEntry> {
    parse_corpus(ACCEPTANCE_CORPUS).expect("shipped corpus parses")
}

/// A random circuit with `gates` internal gates over `n` variables. Children
/// are drawn from all earlier nodes, so subexpressions may be shared; each
/// gate is an inverse with probability `inv_prob`.
pub fn random_circuit<R: Rng + ?Sized>(n: usize, gates: usize, inv_prob: f64, rng: &mut R) -> RationalCircuit {
    let mut b = CircuitBuilder::new();
    let mut ids: Vec<NodeId> = (1..=n).map(|i| b.var(i)).collect();
    ids.push(b.constant(rng.gen_range(1..4)));
    let pick = |ids: &[NodeId], rng: &mut R| {
        // Bias towards recent nodes so the output depends on most gates.
        let k = ids.len();
        let lo = k.saturating_sub(4);
        if rng.gen_bool(0.6) {
            ids[rng.gen_range(lo..k)]
        } else {
            ids[rng.gen_range(0..k)]
        }
    };
    for _ in 0..gates {
        let id = if rng.gen_bool(inv_prob) {
            let c = pick(&ids, rng);
            b.inv(c)
        } else {
            let (l, r) = (pick(&ids, rng), pick(&ids, rng));
            match rng.gen_range(0..3) {
                0 => b.add(l, r),
                1 => b.sub(l, r),
                _ => b.mul(l, r),
            }
        };
        ids.push(id);
    }
    let out = *ids.last().unwrap();
    b.finish(out, n).expect("valid by construction")
}
