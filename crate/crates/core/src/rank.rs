//! Noncommutative rank by blow-up evaluation.
//!
//! A matrix over the free skew field is given by realized entries. Its rank
//! is read off the reduction pencil, which is block diagonal in the
//! normalized entry pencils with a border that has the matrix itself as
//! Schur complement: `ncrank(L) = m²s + ncrank(M)`. Pencil ranks are
//! estimated as `max rank L(T) / d` over random `d`-dimensional `T`.

use std::path::Path;

use thiserror::Error;

use crate::circuit::{parse_expr, CircuitError, IdrOptions, Node};
use crate::exactalg::{sample_tuple, DenseMatrix, ExactAlgError, Field, MatrixTuple};
use crate::pencil::{compile_circuit, parse_pencil_file, LinearPencil, PencilError, RealizedEntry};
use crate::rng::trial_rng;

/// Default largest blow-up dimension when no schedule is given.
pub const DEFAULT_MAX_RANK_DIM: usize = 8;
pub const DEFAULT_RANK_TRIALS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankError {
    #[error("entry ({row}, {col}) has a pencil that stayed singular up to dimension {dim}")]
    NotInvertiblePencil { row: usize, col: usize, dim: usize },
    #[error("maximum rank {max_rank} at dimension {d} is not a multiple of {d} after retrying")]
    DivisibilityAnomaly { d: usize, max_rank: usize },
    #[error("no tuple of dimension {d} attaining rank {target} with all entries defined")]
    WitnessNotFound { d: usize, target: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("top-left block is singular")]
    Singular,
    #[error("skew matrix file error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Clone, Debug)]
pub struct RankParams {
    /// Explicit list of blow-up dimensions; overrides `max_dim`.
    pub schedule: Option<Vec<usize>>,
    /// Probe `1..=max_dim`; defaults to `min(size, DEFAULT_MAX_RANK_DIM)`.
    pub max_dim: Option<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for RankParams {
    fn default() -> Self {
        Self { schedule: None, max_dim: None, trials: DEFAULT_RANK_TRIALS, seed: 0 }
    }
}

impl RankParams {
    pub fn schedule_for(&self, size: usize) -> Vec<usize> {
        match &self.schedule {
            Some(s) => s.clone(),
            None => (1..=self.max_dim.unwrap_or(size.clamp(1, DEFAULT_MAX_RANK_DIM))).collect(),
        }
    }
}

/// What happened at one scheduled dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DimStat {
    pub d: usize,
    pub max_rank: usize,
    pub trials: usize,
    /// The first batch of trials gave a maximum not divisible by `d`.
    pub anomaly: bool,
    /// The (possibly retried) maximum was divisible by `d`.
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankResult<F: Field> {
    pub r: usize,
    pub d: usize,
    pub witness: MatrixTuple<F>,
    /// Rank of the evaluated matrix at the witness; equals `r·d`.
    pub certificate: usize,
    pub dims: Vec<DimStat>,
}

impl<F: Field> RankResult<F> {
    /// `max_rank / d` at every accepted dimension, in schedule order.
    pub fn accepted_sequence(&self) -> Vec<(usize, usize)> {
        self.dims.iter().filter(|s| s.accepted).map(|s| (s.d, s.max_rank / s.d)).collect()
    }
    pub fn total_trials(&self) -> usize {
        self.dims.iter().map(|s| s.trials).sum()
    }
    pub fn anomalies(&self) -> usize {
        self.dims.iter().filter(|s| s.anomaly).count()
    }
}

/// The blow-up search shared by the pencil and direct routes. `rank_at` returns
/// `None` for a tuple outside the domain.
fn blowup_search<F: Field>(
    field: &F,
    nvars: usize,
    full: usize,
    params: &RankParams,
    tag: u64,
    mut rank_at: impl FnMut(&MatrixTuple<F>) -> Result<Option<usize>, RankError>,
) -> Result<RankResult<F>, RankError> {
    let schedule = params.schedule_for(full);
    let mut dims = Vec::new();
    let mut best: Option<(usize, usize, MatrixTuple<F>, usize)> = None;
    for (pos, &d) in schedule.iter().enumerate() {
        let last = pos + 1 == schedule.len();
        let mut max_rank = 0;
        let mut arg: Option<MatrixTuple<F>> = None;
        let mut trial = 0;
        let mut run = |count: usize, max_rank: &mut usize, arg: &mut Option<MatrixTuple<F>>| -> Result<(), RankError> {
            for _ in 0..count {
                let mut rng = trial_rng(params.seed, &[tag, d as u64, trial as u64]);
                trial += 1;
                let t = sample_tuple(field, nvars, d, &mut rng);
                if let Some(rk) = rank_at(&t)? {
                    if rk > *max_rank || arg.is_none() {
                        *max_rank = rk.max(*max_rank);
                        *arg = Some(t);
                    }
                }
                if *max_rank == full * d {
                    break;
                }
            }
            Ok(())
        };
        run(params.trials, &mut max_rank, &mut arg)?;
        let anomaly = max_rank % d != 0;
        if anomaly {
            run(params.trials, &mut max_rank, &mut arg)?;
        }
        let accepted = max_rank % d == 0 && arg.is_some();
        dims.push(DimStat { d, max_rank, trials: trial, anomaly, accepted });
        if !accepted {
            if last && arg.is_some() {
                return Err(RankError::DivisibilityAnomaly { d, max_rank });
            }
            continue;
        }
        let r = max_rank / d;
        if best.as_ref().is_none_or(|b| r > b.0) {
            best = Some((r, d, arg.unwrap(), max_rank));
        }
        if r == full {
            break;
        }
    }
    let (r, d, witness, certificate) = best.ok_or(RankError::WitnessNotFound { d: 0, target: 0 })?;
    Ok(RankResult { r, d, witness, certificate, dims })
}

/// The blow-up rank of a pencil: for each scheduled `d`, the maximum of
/// `rank L(T)` over random `T`, accepted when divisible by `d`.
///
/// A non-divisible maximum triggers one retry with as many trials again; if it
/// persists at the last scheduled dimension the call fails with
/// [`RankError::DivisibilityAnomaly`], otherwise the dimension is skipped.
/// Stops early once full rank is reached.
pub fn ncrank_pencil<F: Field>(l: &LinearPencil<F>, params: &RankParams) -> Result<RankResult<F>, RankError> {
    blowup_search(l.field(), l.nvars(), l.size(), params, 0x7a4c, |t| Ok(Some(l.eval(t)?.rank_of())))
}

/// An `m × m` matrix over the free skew field, entries in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix<F: Field> {
    m: usize,
    entries: Vec<RealizedEntry<F>>,
}

/// The pencil `[[0, 1], [1, 0]]`, invertible, with `(L⁻¹)₁₁ = 0`.
pub fn zero_entry<F: Field>(field: &F, nvars: usize) -> RealizedEntry<F> {
    let mut p = LinearPencil::zeros(field, 2, nvars);
    p.coeff_mut(0).set(0, 1, field.one());
    p.coeff_mut(0).set(1, 0, field.one());
    RealizedEntry { pencil: p, row: 0, col: 0 }
}

impl<F: Field> SkewMatrix<F> {
    pub fn new(m: usize, entries: Vec<RealizedEntry<F>>) -> Result<Self, RankError> {
        if m == 0 || entries.len() != m * m {
            return Err(RankError::DimensionMismatch(format!("expected {} entries for m = {m}", m * m)));
        }
        let n = entries.iter().map(|e| e.pencil.nvars()).max().unwrap_or(0);
        let entries = entries
            .into_iter()
            .map(|e| RealizedEntry { pencil: e.pencil.with_nvars(n), row: e.row, col: e.col })
            .collect();
        Ok(Self { m, entries })
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn nvars(&self) -> usize {
        self.entries[0].pencil.nvars()
    }
    pub fn field(&self) -> &F {
        self.entries[0].pencil.field()
    }
    pub fn entry(&self, i: usize, j: usize) -> &RealizedEntry<F> {
        &self.entries[i * self.m + j]
    }
    pub fn entries(&self) -> &[RealizedEntry<F>] {
        &self.entries
    }

    /// The `md × md` matrix of entry values at `t`; fails with a singular-matrix
    /// error when some entry is undefined there.
    pub fn eval(&self, t: &MatrixTuple<F>) -> Result<DenseMatrix<F>, PencilError> {
        let d = t.dim();
        let mut out = DenseMatrix::zeros(t.field(), self.m * d, self.m * d);
        for i in 0..self.m {
            for j in 0..self.m {
                out.set_block(i * d, j * d, &self.entry(i, j).eval(t)?);
            }
        }
        Ok(out)
    }

    /// Rank of [`SkewMatrix::eval`], or `None` when some entry is undefined at `t`.
    pub fn rank_at(&self, t: &MatrixTuple<F>) -> Result<Option<usize>, RankError> {
        match self.eval(t) {
            Ok(v) => Ok(Some(v.rank_of())),
            Err(PencilError::Algebra(ExactAlgError::Singular)) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Pads every entry pencil to a common size with designation `(0, 0)`.
    pub fn normalize(&self, params: &RankParams) -> Result<NormalizedSkew<F>, RankError> {
        let s = self.entries.iter().map(RealizedEntry::size).max().unwrap();
        let mut entries = Vec::with_capacity(self.entries.len());
        let mut certificates = Vec::with_capacity(self.entries.len());
        for (k, e) in self.entries.iter().enumerate() {
            let (i, j) = (k / self.m, k % self.m);
            let dim = invertibility_certificate(e, params, k as u64)
                .ok_or(RankError::NotInvertiblePencil { row: i, col: j, dim: probe_limit(e.size()) })?;
            entries.push(normalize_entry(e, s)?);
            certificates.push(dim);
        }
        Ok(NormalizedSkew { m: self.m, s, entries, certificates })
    }
}

fn probe_limit(size: usize) -> usize {
    size.clamp(1, DEFAULT_MAX_RANK_DIM)
}

/// Smallest probed dimension at which the entry pencil was seen invertible.
fn invertibility_certificate<F: Field>(e: &RealizedEntry<F>, params: &RankParams, tag: u64) -> Option<usize> {
    let f = e.pencil.field();
    for d in 1..=probe_limit(e.size()) {
        for trial in 0..params.trials.max(1) {
            let mut rng = trial_rng(params.seed, &[0x1e7, tag, d as u64, trial as u64]);
            let t = sample_tuple(f, e.pencil.nvars(), d, &mut rng);
            if e.pencil.eval(&t).map(|v| v.is_invertible()).unwrap_or(false) {
                return Some(d);
            }
        }
    }
    None
}

/// Pads `e` with an identity block to size `s` and moves its designation to `(0, 0)`.
///
/// Swapping rows `0 ↔ v` and columns `0 ↔ u` of `L` swaps columns `0 ↔ v` and
/// rows `0 ↔ u` of `L⁻¹`, bringing entry `(u, v)` to the corner.
pub fn normalize_entry<F: Field>(e: &RealizedEntry<F>, s: usize) -> Result<RealizedEntry<F>, RankError> {
    if e.size() > s {
        return Err(RankError::DimensionMismatch(format!("entry of size {} exceeds target {s}", e.size())));
    }
    let padded = e.pencil.padded(s);
    let swap = |k: usize| -> Vec<usize> {
        let mut p: Vec<usize> = (0..s).collect();
        p.swap(0, k);
        p
    };
    let pencil = padded.permuted(&swap(e.col), &swap(e.row));
    Ok(RealizedEntry { pencil, row: 0, col: 0 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSkew<F: Field> {
    pub m: usize,
    pub s: usize,
    pub entries: Vec<RealizedEntry<F>>,
    /// Dimension at which each entry pencil was found invertible.
    pub certificates: Vec<usize>,
}

/// Block diagonal of the `m²` entry pencils with border `B_ij` (first row `e_jᵗ`)
/// on the right and `−C_ij` (first column `e_i`) at the bottom; size `m²s + m`.
pub fn build_reduction_pencil<F: Field>(n: &NormalizedSkew<F>) -> LinearPencil<F> {
    let (m, s) = (n.m, n.s);
    let f = n.entries[0].pencil.field();
    let nvars = n.entries[0].pencil.nvars();
    let base = m * m * s;
    let mut l = LinearPencil::zeros(f, base + m, nvars);
    for i in 0..m {
        for j in 0..m {
            let off = (i * m + j) * s;
            l.place(off, &n.entries[i * m + j].pencil);
            l.coeff_mut(0).set(off, base + j, f.one());
            l.coeff_mut(0).set(base + i, off, f.neg(&f.one()));
        }
    }
    l
}

/// Rank of a skew matrix with a validated witness.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewRankResult<F: Field> {
    pub r: usize,
    pub d: usize,
    pub witness: MatrixTuple<F>,
    /// `rank M(witness)`, equal to `r·d`.
    pub certificate: usize,
    pub reduction_size: usize,
    pub reduction: RankResult<F>,
}

/// `ncrank(M) = ncrank(L) − m²s` for the reduction pencil `L`, with a witness
/// `T` at which every entry is defined and `rank M(T) = r·d`.
pub fn ncrank_skew<F: Field>(mat: &SkewMatrix<F>, params: &RankParams) -> Result<SkewRankResult<F>, RankError> {
    let norm = mat.normalize(params)?;
    let l = build_reduction_pencil(&norm);
    let res = ncrank_pencil(&l, params)?;
    let base = mat.m * mat.m * norm.s;
    let r = res.r.checked_sub(base).ok_or_else(|| {
        RankError::DimensionMismatch(format!("reduction pencil rank {} below {base}", res.r))
    })?;
    let d = res.d;
    let target = r * d;
    let mut witness = None;
    if mat.rank_at(&res.witness)? == Some(target) {
        witness = Some(res.witness.clone());
    } else {
        for trial in 0..4 * params.trials.max(1) {
            let mut rng = trial_rng(params.seed, &[0x3b17, d as u64, trial as u64]);
            let t = sample_tuple(mat.field(), mat.nvars(), d, &mut rng);
            if mat.rank_at(&t)? == Some(target) {
                witness = Some(t);
                break;
            }
        }
    }
    let witness = witness.ok_or(RankError::WitnessNotFound { d, target })?;
    Ok(SkewRankResult { r, d, witness, certificate: target, reduction_size: l.size(), reduction: res })
}

/// Blow-up rank of the assembled entry values directly (no reduction pencil).
pub fn ncrank_direct<F: Field>(mat: &SkewMatrix<F>, params: &RankParams) -> Result<RankResult<F>, RankError> {
    let size = mat.entries.iter().map(RealizedEntry::size).max().unwrap() * mat.m * mat.m + mat.m;
    let schedule = params.schedule_for(size);
    let p = RankParams { schedule: Some(schedule), ..params.clone() };
    blowup_search(mat.field(), mat.nvars(), mat.m, &p, 0xd1ec, |t| mat.rank_at(t))
}

/// For `P = [[A, B], [C, D]]` with `A` the leading `k × k` block, returns
/// `D − C A⁻¹ B` and whether `rank P = k + rank(D − C A⁻¹ B)`.
pub fn schur_step<F: Field>(p: &DenseMatrix<F>, k: usize) -> Result<(DenseMatrix<F>, bool), RankError> {
    let n = p.rows();
    if p.cols() != n || k > n {
        return Err(RankError::DimensionMismatch(format!("cannot split a {}x{} matrix at {k}", p.rows(), p.cols())));
    }
    let a = p.block(0, 0, k, k);
    let b = p.block(0, k, k, n - k);
    let c = p.block(k, 0, n - k, k);
    let d = p.block(k, k, n - k, n - k);
    let ainv_b = a.solve(&b).map_err(|e| match e {
        ExactAlgError::Singular => RankError::Singular,
        other => RankError::Pencil(other.into()),
    })?;
    let comp = d.sub(&c.mul(&ainv_b).map_err(PencilError::from)?).map_err(PencilError::from)?;
    let holds = p.rank_of() == k + comp.rank_of();
    Ok((comp, holds))
}

/// Reads the skew-matrix format: `m <m>` followed by `m²` entry lines, each
/// `expr <expression>`, `pencil <path>` (relative to `base_dir`, with a
/// `realize` trailer) or a bare expression. The literal expression `0`
/// becomes [`zero_entry`].
pub fn parse_skew_file<F: Field>(field: &F, text: &str, base_dir: &Path, opts: IdrOptions) -> Result<SkewMatrix<F>, RankError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, msg: String| RankError::Parse { line, msg };
    let (n0, header) = lines.next().ok_or_else(|| err(0, "empty file".into()))?;
    let m: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["m", v] => v.parse().map_err(|_| err(n0, format!("bad size `{v}`")))?,
        _ => return Err(err(n0, format!("expected `m <m>`, got `{header}`"))),
    };
    let mut entries = Vec::new();
    for (n, line) in lines {
        if entries.len() == m * m {
            return Err(err(n, "more entries than m²".into()));
        }
        let entry = if let Some(path) = line.strip_prefix("pencil ") {
            let full = base_dir.join(path.trim());
            let text = std::fs::read_to_string(&full).map_err(|e| err(n, format!("{}: {e}", full.display())))?;
            let (pencil, realize) = parse_pencil_file(field, &text)?;
            let (u, v) = realize.ok_or_else(|| err(n, format!("{} has no `realize` trailer", full.display())))?;
            RealizedEntry::new(pencil, u, v)?
        } else {
            let src = line.strip_prefix("expr ").unwrap_or(line);
            let c = parse_expr(src)?;
            match c.node(c.output()) {
                Node::Const(q) if q == &num_rational::BigRational::from_integer(0.into()) => zero_entry(field, 0),
                _ => compile_circuit(&c, field, opts)?,
            }
        };
        entries.push(entry);
    }
    if entries.len() != m * m {
        return Err(err(0, format!("expected {} entries, found {}", m * m, entries.len())));
    }
    SkewMatrix::new(m, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{formula_to_abp, parse_expr};
    use crate::exactalg::PrimeField;
    use crate::pencil::from_abp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f() -> PrimeField {
        PrimeField::mersenne61()
    }

    fn expr_entry(src: &str) -> RealizedEntry<PrimeField> {
        compile_circuit(&parse_expr(src).unwrap(), &f(), IdrOptions::default()).unwrap()
    }

    fn skew(m: usize, srcs: &[&str]) -> SkewMatrix<PrimeField> {
        let entries = srcs
            .iter()
            .map(|s| if *s == "0" { zero_entry(&f(), 0) } else { expr_entry(s) })
            .collect();
        SkewMatrix::new(m, entries).unwrap()
    }

    #[test]
    fn zero_entry_normalizes_to_zero_value() {
        let f = f();
        let e = normalize_entry(&zero_entry(&f, 1), 4).unwrap();
        assert_eq!(e.size(), 4);
        let t = sample_tuple(&f, 1, 2, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(e.eval(&t).unwrap().is_zero());
    }

    #[test]
    fn normalization_preserves_values_and_determinant() {
        let f = f();
        let e = from_abp(&formula_to_abp(&parse_expr("x1*x2 + x2").unwrap(), &f).unwrap());
        let n = normalize_entry(&e, 6).unwrap();
        assert_eq!((n.row, n.col), (0, 0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let t = sample_tuple(&f, 2, 2, &mut rng);
            assert_eq!(n.eval(&t).unwrap(), e.eval(&t).unwrap());
            let t1 = sample_tuple(&f, 2, 1, &mut rng);
            let a = e.pencil.padded(6).eval(&t1).unwrap();
            let b = n.pencil.eval(&t1).unwrap();
            assert_eq!(a.rank_of(), b.rank_of());
        }
    }

    #[test]
    fn single_variable_reduction_pencil() {
        let mat = skew(1, &["x1"]);
        let norm = mat.normalize(&RankParams::default()).unwrap();
        let l = build_reduction_pencil(&norm);
        assert_eq!(l.size(), 3);
        let res = ncrank_pencil(&l, &RankParams::default()).unwrap();
        assert_eq!(res.r - 2, 1);
    }

    #[test]
    fn basic_pencil_ranks() {
        let f = f();
        let id = LinearPencil::new(&f, 3, vec![DenseMatrix::identity(&f, 3)]).unwrap();
        let res = ncrank_pencil(&id, &RankParams::default()).unwrap();
        assert_eq!((res.r, res.d), (3, 1));
        let mut x = LinearPencil::zeros(&f, 1, 1);
        x.coeff_mut(1).set(0, 0, 1);
        let res = ncrank_pencil(&x, &RankParams::default()).unwrap();
        assert_eq!(res.r, 1);
        assert_ne!(*res.witness.var(1).get(0, 0), 0);
    }

    #[test]
    fn skew_symmetric_pencil_needs_dimension_two() {
        // [[0, x1, x2], [-x1, 0, x3], [-x2, -x3, 0]] has rank 2 on scalars but
        // full noncommutative rank 3.
        let f = f();
        let mut l = LinearPencil::zeros(&f, 3, 3);
        for (k, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            l.coeff_mut(k + 1).set(i, j, 1);
            l.coeff_mut(k + 1).set(j, i, f.neg(&1));
        }
        let res = ncrank_pencil(&l, &RankParams::default()).unwrap();
        assert_eq!(res.r, 3);
        assert_eq!(res.d, 2);
        assert_eq!(res.accepted_sequence(), vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn classic_skew_ranks() {
        let p = RankParams::default();
        let higman = skew(2, &["1", "x1", "x2", "x3 + x1*x2"]);
        let res = ncrank_skew(&higman, &p).unwrap();
        assert_eq!(res.r, 2);
        assert_eq!(higman.rank_at(&res.witness).unwrap(), Some(res.r * res.d));

        let dup = skew(2, &["x1", "x1", "x1", "x1"]);
        assert_eq!(ncrank_skew(&dup, &p).unwrap().r, 1);
        assert_eq!(ncrank_direct(&dup, &p).unwrap().r, 1);

        let id = skew(3, &["1", "0", "0", "0", "1", "0", "0", "0", "1"]);
        assert_eq!(ncrank_skew(&id, &p).unwrap().r, 3);

        let zero = skew(2, &["0", "0", "0", "0"]);
        let res = ncrank_skew(&zero, &p).unwrap();
        assert_eq!(res.r, 0);
    }

    #[test]
    fn singular_entry_pencil_rejected() {
        let f = f();
        let bad = RealizedEntry::new(LinearPencil::zeros(&f, 2, 1), 0, 0).unwrap();
        let mat = SkewMatrix::new(1, vec![bad]).unwrap();
        assert!(matches!(ncrank_skew(&mat, &RankParams::default()), Err(RankError::NotInvertiblePencil { .. })));
    }

    #[test]
    fn schur_step_identity() {
        let f = f();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let diag = DenseMatrix::from_i64_rows(&f, &[&[2, 0, 0], &[0, 3, 1], &[0, 1, 4]]);
        let (c, ok) = schur_step(&diag, 1).unwrap();
        assert!(ok);
        assert_eq!(c, diag.block(1, 1, 2, 2));
        for _ in 0..30 {
            let mut p = DenseMatrix::random(&f, 5, 5, &mut rng);
            // A rank-deficient tail keeps the complement interesting.
            for j in 0..5 {
                let v = f.add(p.get(3, j), p.get(2, j));
                p.set(4, j, v);
            }
            let (_, ok) = schur_step(&p, 2).unwrap();
            assert!(ok);
        }
        let sing = DenseMatrix::zeros(&f, 3, 3);
        assert_eq!(schur_step(&sing, 1).unwrap_err(), RankError::Singular);
    }

    #[test]
    fn higman_schur_complement() {
        let f = f();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let higman = skew(2, &["1", "x1", "x2", "x3 + x1*x2"]);
        let t = sample_tuple(&f, 3, 2, &mut rng);
        let p = higman.eval(&t).unwrap();
        let (c, ok) = schur_step(&p, 2).unwrap();
        assert!(ok);
        let (x, y, z) = (t.var(1), t.var(2), t.var(3));
        let expect = z.add(&x.mul(y).unwrap()).unwrap().sub(&y.mul(x).unwrap()).unwrap();
        assert_eq!(c, expect);
    }

    #[test]
    fn skew_file_parsing() {
        let f = f();
        let dir = std::env::temp_dir().join(format!("ncrat-rank-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("x.lp"), "size 2\nnvars 1\ncoeff 0\n1 1 1\n2 2 1\nend\ncoeff 1\n1 2 -1\nend\nrealize 1 2\n").unwrap();
        let text = "m 2\nexpr 1\npencil x.lp\n0\nx1*x1\n";
        let mat = parse_skew_file(&f, text, &dir, IdrOptions::default()).unwrap();
        assert_eq!(mat.m(), 2);
        assert_eq!(ncrank_skew(&mat, &RankParams::default()).unwrap().r, 2);
        assert!(parse_skew_file(&f, "m 2\nx1\n", &dir, IdrOptions::default()).is_err());
        assert!(parse_skew_file(&f, "m 1\npencil nope.lp\n", &dir, IdrOptions::default()).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
