//! Rational identity testing, strong witnesses, desk-scale hitting sets and
//! the dimension-bootstrapping experiment.
//!
//! A circuit `c` is tested through the pencil realizing `c⁻¹` (the compiled
//! pencil bordered by its designated row and column). That pencil is
//! invertible at `t` exactly when `c(t)` is defined and invertible, so it is
//! singular at every tuple if and only if `c` is the zero function.

use num_bigint::BigInt;
use num_traits::{One, Pow};
use thiserror::Error;

use crate::circuit::{
    classify, eval_circuit, to_idrrsc, transport_witness, CircuitBuilder, CircuitError, IdrOptions, Node, NodeId,
    RationalCircuit,
};
use crate::exactalg::{is_prime_u64, sample_tuple, DenseMatrix, Field, MatrixTuple, PrimeField};
use crate::pencil::{blowup_shift, blowup_var_index, compile_idrrsc, realize_inverse, PencilError, RealizedEntry};
use crate::rng::trial_rng;
use crate::series::{full_eval, scaling_bound, truncated_eval, RecognizableSeries, SeriesError};

/// Default cap on the probed dimension.
pub const DEFAULT_RIT_MAX_DIM: usize = 8;
pub const DEFAULT_RIT_TRIALS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RitError {
    #[error("compilation failed: {0}")]
    CompileFailed(CircuitError),
    #[error("no defined, invertible value found up to dimension {max_dim}")]
    WitnessNotFound { max_dim: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Debug)]
pub struct RitParams {
    /// Largest probed dimension; defaults to `min(pencil size, DEFAULT_RIT_MAX_DIM)`.
    pub max_dim: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub idr: IdrOptions,
}

impl Default for RitParams {
    fn default() -> Self {
        Self { max_dim: None, trials: DEFAULT_RIT_TRIALS, seed: 0, idr: IdrOptions::default() }
    }
}

impl RitParams {
    fn dims(&self, size: usize) -> usize {
        self.max_dim.unwrap_or(size.clamp(1, DEFAULT_RIT_MAX_DIM))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RitVerdict<F: Field> {
    /// The test pencil was singular at every sampled tuple. If `c ≠ 0` is
    /// nonzero already at dimension `max_dim`, this happens with probability
    /// at most `error_bound`.
    /// `log10_error_bound` stays finite where `error_bound` underflows.
    Zero { max_dim: usize, trials: usize, pencil_size: usize, error_bound: f64, log10_error_bound: f64 },
    NonZero {
        dim: usize,
        /// First sampled tuple at which `c` was defined.
        definedness_witness: MatrixTuple<F>,
        /// A tuple at which `c` is defined with invertible value.
        invertibility_witness: MatrixTuple<F>,
        value: DenseMatrix<F>,
    },
}

impl<F: Field> RitVerdict<F> {
    pub fn is_zero(&self) -> bool {
        matches!(self, RitVerdict::Zero { .. })
    }
}

/// The compiled pencil of `c` and the pencil realizing `c⁻¹`.
pub fn test_pencil<F: Field>(c: &RationalCircuit, field: &F, opts: IdrOptions) -> Result<(RealizedEntry<F>, RealizedEntry<F>), RitError> {
    let idr = to_idrrsc(c, field, opts).map_err(RitError::CompileFailed)?;
    let compiled = compile_idrrsc(&idr).pencil_with_nvars(c.nvars());
    let inv = realize_inverse(&compiled);
    Ok((compiled, inv))
}

trait WithNvars {
    fn pencil_with_nvars(self, n: usize) -> Self;
}

impl<F: Field> WithNvars for RealizedEntry<F> {
    fn pencil_with_nvars(self, n: usize) -> Self {
        RealizedEntry { pencil: self.pencil.with_nvars(n), row: self.row, col: self.col }
    }
}

/// Randomized identity test.
///
/// For `d = 1..=max_dim`, samples `trials` tuples and checks the test pencil for
/// invertibility. An invertible sample is re-verified by direct evaluation of
/// the circuit before a nonzero verdict is returned.
pub fn rit_test<F: Field>(c: &RationalCircuit, field: &F, params: &RitParams) -> Result<RitVerdict<F>, RitError> {
    let (_, probe) = test_pencil(c, field, params.idr)?;
    let n = c.nvars();
    let size = probe.size();
    let max_dim = params.dims(size);
    let mut defined: Option<MatrixTuple<F>> = None;
    for d in 1..=max_dim {
        for trial in 0..params.trials {
            let mut rng = trial_rng(params.seed, &[0x717, d as u64, trial as u64]);
            let t = sample_tuple(field, n, d, &mut rng);
            if !probe.pencil.eval(&t)?.is_invertible() {
                if defined.is_none() && eval_circuit(c, &t).is_ok() {
                    defined = Some(t);
                }
                continue;
            }
            match eval_circuit(c, &t) {
                Ok(v) if v.is_invertible() => {
                    return Ok(RitVerdict::NonZero {
                        dim: d,
                        definedness_witness: defined.unwrap_or_else(|| t.clone()),
                        invertibility_witness: t,
                        value: v,
                    })
                }
                // The pencil and the circuit disagree; keep sampling.
                _ => continue,
            }
        }
    }
    let per_trial = ((size * max_dim) as f64 / field.sample_space()).min(1.0);
    Ok(RitVerdict::Zero {
        max_dim,
        trials: params.trials,
        pencil_size: size,
        error_bound: per_trial.powi(params.trials as i32),
        log10_error_bound: params.trials as f64 * per_trial.log10(),
    })
}

/// Samples tuples of increasing dimension until `c` is defined and invertible.
pub fn strong_witness<F: Field>(c: &RationalCircuit, field: &F, params: &RitParams) -> Result<MatrixTuple<F>, RitError> {
    let max_dim = params.max_dim.unwrap_or((2 * classify(c).size).clamp(1, DEFAULT_RIT_MAX_DIM));
    for d in 1..=max_dim {
        for trial in 0..params.trials {
            let mut rng = trial_rng(params.seed, &[0x5770, d as u64, trial as u64]);
            let t = sample_tuple(field, c.nvars(), d, &mut rng);
            if matches!(eval_circuit(c, &t), Ok(v) if v.is_invertible()) {
                return Ok(t);
            }
        }
    }
    Err(RitError::WitnessNotFound { max_dim })
}

/// The first `n` primes.
pub fn first_primes(n: usize) -> Vec<u64> {
    (2u64..).filter(|&k| is_prime_u64(k)).take(n).collect()
}

/// Points `(q₁ʲ, …, q_nʲ)` for `j = 0..κ` with `q` the first `n` primes, as exact integers.
pub fn sparse_points(nvars: usize, kappa: usize) -> Vec<Vec<BigInt>> {
    sparse_points_with(&first_primes(nvars), kappa)
}

fn sparse_points_with(primes: &[u64], kappa: usize) -> Vec<Vec<BigInt>> {
    (0..kappa)
        .map(|j| primes.iter().map(|&q| Pow::pow(&BigInt::from(q), j as u32)).collect())
        .collect()
}

/// A set of `d`-dimensional tuples meant to hit every nonzero circuit with
/// the given parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct HittingSet<F: Field> {
    pub tuples: Vec<MatrixTuple<F>>,
    pub n: usize,
    pub s: usize,
    pub h: usize,
    pub d: usize,
    pub kappa: usize,
}

/// Default sparsity `2·s·d`.
pub fn default_kappa(s: usize, d: usize) -> usize {
    (2 * s * d).max(1)
}

/// Assigns sparse points to the `2(h+1)d²` entries of generic matrices
/// `q_{j0}, q_{j1}` and outputs `pᵢ = Σ_j q_{j0} q_{j1}ⁱ q_{j0}` for each point.
///
/// The base primes are chosen distinct modulo the field characteristic.
pub fn hitting_set_generate(field: &PrimeField, n: usize, s: usize, h: usize, d: usize, kappa: Option<usize>) -> HittingSet<PrimeField> {
    let kappa = kappa.unwrap_or_else(|| default_kappa(s, d));
    let entries = 2 * (h + 1) * d * d;
    let p = field.modulus();
    let primes: Vec<u64> = (2u64..).filter(|&k| is_prime_u64(k) && k % p != 0).take(entries).collect();
    let mut residues: Vec<u64> = primes.iter().map(|q| q % p).collect();
    residues.sort_unstable();
    residues.dedup();
    assert_eq!(residues.len(), entries, "base primes must stay distinct modulo p");
    let points = sparse_points_with(&primes, kappa);
    let tuples = points
        .iter()
        .map(|pt| {
            let vals: Vec<u64> = pt.iter().map(|v| field.from_bigint(v)).collect();
            let mats = vals
                .chunks_exact(d * d)
                .map(|c| DenseMatrix::from_vec(field, d, d, c.to_vec()).unwrap())
                .collect();
            let q = MatrixTuple::new(field, d, mats).unwrap();
            transport_witness(&q, n, h).unwrap()
        })
        .collect();
    HittingSet { tuples, n, s, h, d, kappa }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitHit {
    /// Index of the first tuple with a defined, invertible value.
    pub hit: Option<usize>,
    /// Number of tuples at which the circuit is defined.
    pub defined: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongReport {
    pub circuits: Vec<CircuitHit>,
}

impl StrongReport {
    pub fn hits(&self) -> usize {
        self.circuits.iter().filter(|c| c.hit.is_some()).count()
    }
    pub fn hit_rate(&self) -> f64 {
        if self.circuits.is_empty() {
            1.0
        } else {
            self.hits() as f64 / self.circuits.len() as f64
        }
    }
}

/// For every circuit, whether some tuple of the set gives a defined, invertible value.
pub fn verify_strong<F: Field>(set: &HittingSet<F>, corpus: &[RationalCircuit]) -> StrongReport {
    let circuits = corpus
        .iter()
        .map(|c| {
            let mut hit = None;
            let mut defined = 0;
            for (k, t) in set.tuples.iter().enumerate() {
                if c.nvars() > t.nvars() {
                    break;
                }
                if let Ok(v) = eval_circuit(c, t) {
                    defined += 1;
                    if hit.is_none() && v.is_invertible() {
                        hit = Some(k);
                    }
                }
            }
            CircuitHit { hit, defined }
        })
        .collect();
    StrongReport { circuits }
}

/// How a bootstrapping level found its invertible point.
#[derive(Clone, Debug, PartialEq)]
pub enum BootstrapRoute {
    /// Random sampling at the given dimension (level 0).
    Sampled,
    /// The point of the level below already works.
    Inherited,
    /// Blow-up at the lower point, series probe at dimension `d_prime`, scaled by `tau`.
    Series { d_prime: usize, tau: u64 },
    /// Nothing found within the schedule.
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapLevel {
    pub level: usize,
    pub circuit_size: usize,
    pub dim: Option<usize>,
    pub route: BootstrapRoute,
}

/// `c_h = c` and `c_{ℓ−1}` = product of the top-level inverse children of `c_ℓ`.
pub fn definedness_levels(c: &RationalCircuit) -> Vec<RationalCircuit> {
    let mut levels = vec![c.clone()];
    loop {
        let cur = levels.last().unwrap();
        let kids = top_inverse_children(cur);
        if kids.is_empty() {
            break;
        }
        let mut b = CircuitBuilder::new();
        let mut acc: Option<NodeId> = None;
        for k in kids {
            let sub = cur.subcircuit(k);
            let off = b.len();
            for n in sub.nodes() {
                b.push(shift_node(n, off));
            }
            let root = off + sub.output();
            acc = Some(match acc {
                None => root,
                Some(a) => b.mul(a, root),
            });
        }
        let next = b.finish(acc.unwrap(), cur.nvars()).expect("valid by construction");
        levels.push(next);
    }
    levels.reverse();
    levels
}

fn shift_node(n: &Node, off: usize) -> Node {
    match n {
        Node::Const(q) => Node::Const(q.clone()),
        Node::Var(i) => Node::Var(*i),
        Node::Add(l, r) => Node::Add(l + off, r + off),
        Node::Sub(l, r) => Node::Sub(l + off, r + off),
        Node::Mul(l, r) => Node::Mul(l + off, r + off),
        Node::Inv(c) => Node::Inv(c + off),
    }
}

/// Children of the inverse gates reachable from the output without passing another inverse.
fn top_inverse_children(c: &RationalCircuit) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut stack = vec![c.output()];
    let mut seen = vec![false; c.nodes().len()];
    while let Some(id) = stack.pop() {
        if std::mem::replace(&mut seen[id], true) {
            continue;
        }
        match *c.node(id) {
            Node::Inv(ch) => out.push(ch),
            ref n => stack.extend(n.children()),
        }
    }
    out.sort_unstable();
    out
}

/// Finds, level by level, the smallest dimension with an invertible image.
///
/// Level 0 is sampled directly. A higher level first tries the point of the
/// level below, where it is defined. Failing that, it blows the compiled pencil
/// up at that point and reads the `m × m` value block as series in the generic
/// shift. A `d′`-dimensional probe with nonzero truncation is then scaled until
/// the value is invertible, giving dimension `m·d′`.
pub fn bootstrap_dimension(c: &RationalCircuit, field: &PrimeField, schedule: &[usize], params: &RitParams) -> Result<Vec<BootstrapLevel>, RitError> {
    let levels = definedness_levels(c);
    let mut out = Vec::new();
    let mut point: Option<MatrixTuple<PrimeField>> = None;
    for (level, cl) in levels.iter().enumerate() {
        let circuit_size = classify(cl).size;
        let found = match &point {
            None => sample_level(cl, field, schedule, params).map(|t| (t, BootstrapRoute::Sampled)),
            Some(q) => match eval_circuit(cl, q) {
                Ok(v) if v.is_invertible() => Some((q.clone(), BootstrapRoute::Inherited)),
                _ => series_step(cl, field, q, schedule, params)?,
            },
        };
        match found {
            Some((t, route)) => {
                out.push(BootstrapLevel { level, circuit_size, dim: Some(t.dim()), route });
                point = Some(t);
            }
            None => {
                out.push(BootstrapLevel { level, circuit_size, dim: None, route: BootstrapRoute::Failed });
                for (l, cl) in levels.iter().enumerate().skip(level + 1) {
                    out.push(BootstrapLevel { level: l, circuit_size: classify(cl).size, dim: None, route: BootstrapRoute::Failed });
                }
                break;
            }
        }
    }
    Ok(out)
}

fn sample_level<F: Field>(c: &RationalCircuit, field: &F, schedule: &[usize], params: &RitParams) -> Option<MatrixTuple<F>> {
    for &d in schedule {
        for trial in 0..params.trials {
            let mut rng = trial_rng(params.seed, &[0xb007, d as u64, trial as u64]);
            let t = sample_tuple(field, c.nvars(), d, &mut rng);
            if matches!(eval_circuit(c, &t), Ok(v) if v.is_invertible()) {
                return Some(t);
            }
        }
    }
    None
}

/// `q ⊗ I_{d′} + Σ_{jk} E_{jk} ⊗ T_{ijk}` for a tuple `t` over the blow-up variables.
pub fn assemble_blowup_point<F: Field>(q: &MatrixTuple<F>, t: &MatrixTuple<F>) -> MatrixTuple<F> {
    let f = q.field();
    let m = q.dim();
    let dp = t.dim();
    let mats = (1..=q.nvars())
        .map(|i| {
            let mut p = q.var(i).kron(&DenseMatrix::identity(f, dp));
            for j in 0..m {
                for k in 0..m {
                    p.add_scaled_block(j * dp, k * dp, &f.one(), t.var(blowup_var_index(m, i, j, k)));
                }
            }
            p
        })
        .collect();
    MatrixTuple::new(f, m * dp, mats).expect("square blocks")
}

fn series_step(
    c: &RationalCircuit,
    field: &PrimeField,
    q: &MatrixTuple<PrimeField>,
    schedule: &[usize],
    params: &RitParams,
) -> Result<Option<(MatrixTuple<PrimeField>, BootstrapRoute)>, RitError> {
    let idr = to_idrrsc(c, field, params.idr).map_err(RitError::CompileFailed)?;
    let e = compile_idrrsc(&idr).pencil_with_nvars(c.nvars());
    let m = q.dim();
    let blown = blowup_shift(&e.pencil, m, q)?;
    let mut series = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            series.push(RecognizableSeries::from_pencil_entry(&blown, e.row * m + a, e.col * m + b)?);
        }
    }
    let degree = blown.size() - 1;
    for &dp in schedule {
        for trial in 0..params.trials {
            let mut rng = trial_rng(params.seed, &[0xb5e7, dp as u64, trial as u64]);
            let t = sample_tuple(field, blown.nvars(), dp, &mut rng);
            let mut nonzero = false;
            for s in &series {
                if !truncated_eval(s, degree, &t)?.is_zero() {
                    nonzero = true;
                    break;
                }
            }
            if !nonzero {
                continue;
            }
            for tau in 1..=scaling_bound(blown.size(), dp) {
                let scaled = t.scale(&field.from_i64(tau as i64));
                let mut block = DenseMatrix::zeros(field, m * dp, m * dp);
                let mut ok = true;
                for a in 0..m {
                    for b in 0..m {
                        match full_eval(&series[a * m + b], &scaled) {
                            Ok(v) => block.set_block(a * dp, b * dp, &v),
                            Err(SeriesError::Singular) => {
                                ok = false;
                                break;
                            }
                            Err(e) => return Err(e.into()),
                        }
                    }
                    if !ok {
                        break;
                    }
                }
                if ok && block.is_invertible() {
                    let point = assemble_blowup_point(q, &scaled);
                    if matches!(eval_circuit(c, &point), Ok(v) if v.is_invertible()) {
                        return Ok(Some((point, BootstrapRoute::Series { d_prime: dp, tau })));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// `∏ q_e^{α_e}` for an exponent vector.
pub fn monomial_value(point_base: &[u64], exps: &[u32]) -> BigInt {
    point_base
        .iter()
        .zip(exps)
        .fold(BigInt::one(), |acc, (&q, &e)| acc * Pow::pow(&BigInt::from(q), e))
}
