//! The subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use clap::{value_parser, Arg, ArgMatches, Command};
use ncrat::circuit::{classify, eval_circuit, parse_circuit_file, parse_corpus, parse_expr, IdrOptions, RationalCircuit};
use ncrat::exactalg::{parse_tuple, DenseMatrix, Field, MatrixTuple, PrimeField};
use ncrat::pencil::{compile_circuit, parse_pencil_file, pencil_to_text, RealizedEntry};
use ncrat::rank::{ncrank_pencil, ncrank_skew, parse_skew_file, DimStat, RankParams, DEFAULT_RANK_TRIALS};
use ncrat::rit::{
    bootstrap_dimension, hitting_set_generate, rit_test, verify_strong, BootstrapRoute, RitParams, RitVerdict, DEFAULT_RIT_TRIALS,
};
use ncrat::series::{scaling_bound, scaling_search, series_is_zero, RecognizableSeries, SeriesVerdict};
use serde_json::json;

use crate::{CliError, Context, Registry, Report, Subcommand};

/// Largest accepted ratio `pencil size / s²`.
pub const SIZE_BOUND_C: usize = 16;

const DEFAULT_SERIES_TRIALS: usize = 8;
const DEFAULT_BOOTSTRAP_MAX_DIM: usize = 4;

pub fn register_all(r: &mut Registry) {
    r.register(Box::new(Compile));
    r.register(Box::new(Rit));
    r.register(Box::new(Ncrank));
    r.register(Box::new(Hitgen));
    r.register(Box::new(Eval));
    r.register(Box::new(SeriesZero));
    r.register(Box::new(Bootstrap));
}

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).with_context(|| format!("reading {path}")).map_err(CliError::from)
}

fn write(path: &str, text: &str) -> Result<(), CliError> {
    fs::write(path, text).with_context(|| format!("writing {path}")).map_err(CliError::from)
}

fn circuit_args(cmd: Command) -> Command {
    cmd.arg(Arg::new("expr").help("Rational expression, e.g. \"inv(x1) + inv(x2)\""))
        .arg(Arg::new("file").long("file").conflicts_with("expr").help("Circuit file (one node per line)"))
}

/// The circuit named by the positional expression or `--file`.
fn circuit_input(m: &ArgMatches) -> Result<RationalCircuit, CliError> {
    if let Some(src) = m.get_one::<String>("expr") {
        return parse_expr(src).map_err(|e| CliError::input(format!("expression: {e}")));
    }
    if let Some(path) = m.get_one::<String>("file") {
        return parse_circuit_file(&read(path)?).map_err(|e| CliError::input(format!("{path}: {e}")));
    }
    Err(CliError::input("give an expression or --file"))
}

fn rit_params(ctx: &Context) -> RitParams {
    RitParams { max_dim: ctx.max_dim, trials: ctx.trials.unwrap_or(DEFAULT_RIT_TRIALS), seed: ctx.seed, idr: IdrOptions::default() }
}

fn matrix_lines(m: &DenseMatrix<PrimeField>) -> Vec<String> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect::<Vec<_>>().join(" "))
        .collect()
}

fn parse_schedule(s: &str) -> Result<Vec<usize>, CliError> {
    let dims: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
    match dims {
        Ok(d) if !d.is_empty() && d.iter().all(|&x| x > 0) => Ok(d),
        _ => Err(CliError::input(format!("bad --schedule `{s}`: expected positive integers separated by commas"))),
    }
}

struct Compile;

impl Subcommand for Compile {
    fn name(&self) -> &'static str {
        "compile"
    }
    fn about(&self) -> &'static str {
        "Compile a circuit into a linear pencil realization"
    }
    fn args(&self, cmd: Command) -> Command {
        circuit_args(cmd)
            .arg(Arg::new("out").long("out").help("Write the pencil file here"))
            .arg(Arg::new("blowup-cap").long("blowup-cap").value_parser(value_parser!(f64)).help("Allowed tree-expansion factor"))
    }
    fn run(&self, m: &ArgMatches, ctx: &Context) -> Result<Report, CliError> {
        let c = circuit_input(m)?;
        let mut opts = IdrOptions::default();
        if let Some(&cap) = m.get_one::<f64>("blowup-cap") {
            opts.blowup_cap = cap;
        }
        let k = classify(&c);
        let e = compile_circuit(&c, &ctx.field, opts).map_err(CliError::failed)?;
        let e = RealizedEntry { pencil: e.pencil.with_nvars(c.nvars()), row: e.row, col: e.col };
        let ratio = e.size() as f64 / (k.size * k.size) as f64;
        let mut r = Report::new();
        r.kv("circuit", c.to_expr_string())
            .num("circuit_size", k.size as u64)
            .num("height", k.height as u64)
            .num("nvars", c.nvars() as u64)
            .num("pencil_size", e.size() as u64)
            .num("pencil_nnz", e.pencil.nnz() as u64)
            .kv("realize", format!("{} {}", e.row + 1, e.col + 1))
            .kv("size_ratio", format!("{ratio:.4}"))
            .num("size_bound_c", SIZE_BOUND_C as u64);
        if let Some(path) = m.get_one::<String>("out") {
            write(path, &pencil_to_text(&e.pencil, Some((e.row, e.col))))?;
            r.kv("pencil_file", path);
        }
        if e.size() > SIZE_BOUND_C * k.size * k.size {
            return Err(CliError::failed(format!("pencil size {} exceeds {SIZE_BOUND_C}·s² = {}", e.size(), SIZE_BOUND_C * k.size * k.size)));
        }
        r.kv("size_bound_ok", true);
        Ok(r)
    }
}

struct Rit;

fn verdict_report(r: &mut Report, v: &RitVerdict<PrimeField>) {
    match v {
        RitVerdict::Zero { max_dim, pencil_size, error_bound, log10_error_bound, .. } => {
            r.kv("verdict", "ZERO")
                .num("probed_max_dim", *max_dim as u64)
                .num("test_pencil_size", *pencil_size as u64)
                .kv("error_bound", format!("{error_bound:e}"))
                .kv("log10_error_bound", format!("{log10_error_bound:.2}"));
        }
        RitVerdict::NonZero { dim, .. } => {
            r.kv("verdict", "NONZERO").num("dim", *dim as u64);
        }
    }
}

impl Subcommand for Rit {
    fn name(&self) -> &'static str {
        "rit"
    }
    fn about(&self) -> &'static str {
        "Randomized rational identity test"
    }
    fn args(&self, cmd: Command) -> Command {
        circuit_args(cmd)
            .arg(Arg::new("corpus").long("corpus").conflicts_with_all(["expr", "file"]).help("Test every expression of a corpus file"))
            .arg(Arg::new("witness").long("witness").help("Write the invertibility witness tuple here"))
    }
    fn run(&self, m: &ArgMatches, ctx: &Context) -> Result<Report, CliError> {
        let params = rit_params(ctx);
        let mut r = Report::new();
        r.num("trials", params.trials as u64).kv("max_dim", params.max_dim.map_or("auto".to_string(), |d| d.to_string()));
        if let Some(path) = m.get_one::<String>("corpus") {
            let corpus = parse_corpus(&read(path)?).map_err(|(line, e)| CliError::input(format!("{path}:{line}: {e}")))?;
            let (mut nonzero, mut mismatches) = (0u64, 0u64);
            let mut rows = Vec::new();
            for (i, e) in corpus.iter().enumerate() {
                let v = rit_test(&e.circuit, &ctx.field, &params).map_err(CliError::failed)?;
                let found = !v.is_zero();
                nonzero += u64::from(found);
                if e.nonzero.is_some_and(|want| want != found) {
                    mismatches += 1;
                }
                let dim = match &v {
                    RitVerdict::NonZero { dim, .. } => dim.to_string(),
                    RitVerdict::Zero { .. } => "-".into(),
                };
                r.text(format!("{i}\t{}\t{dim}\t{}", if found { "NONZERO" } else { "ZERO" }, e.source));
                rows.push(json!({ "source": e.source, "nonzero": found, "dim": dim }));
            }
            r.num("corpus_size", corpus.len() as u64).num("nonzero", nonzero).num("expected_mismatches", mismatches);
            r.json("entries", serde_json::Value::Array(rows));
            return Ok(r);
        }
        let c = circuit_input(m)?;
        r.kv("circuit", c.to_expr_string());
        let v = rit_test(&c, &ctx.field, &params).map_err(CliError::failed)?;
        verdict_report(&mut r, &v);
        match (&v, m.get_one::<String>("witness")) {
            (RitVerdict::NonZero { invertibility_witness, definedness_witness, .. }, Some(path)) => {
                write(path, &invertibility_witness.to_text())?;
                r.kv("witness_file", path);
                if definedness_witness != invertibility_witness {
                    let dpath = format!("{path}.defined");
                    write(&dpath, &definedness_witness.to_text())?;
                    r.kv("definedness_witness_file", dpath);
                }
            }
            (RitVerdict::Zero { .. }, Some(_)) => r.set_negative(),
            _ => {}
        }
        Ok(r)
    }
}

struct Ncrank;

fn dims_table(r: &mut Report, dims: &[DimStat]) {
    r.text("d\tmax_rank\ttrials\tanomaly\taccepted");
    for s in dims {
        r.text(format!("{}\t{}\t{}\t{}\t{}", s.d, s.max_rank, s.trials, s.anomaly, s.accepted));
    }
    let rows = dims
        .iter()
        .map(|s| json!({ "d": s.d, "max_rank": s.max_rank, "trials": s.trials, "anomaly": s.anomaly, "accepted": s.accepted }))
        .collect();
    r.json("dims", serde_json::Value::Array(rows));
}

fn default_witness_path(input: &str) -> String {
    let p = Path::new(input);
    let mut out = PathBuf::from(p);
    out.set_extension("witness");
    out.to_string_lossy().into_owned()
}

impl Subcommand for Ncrank {
    fn name(&self) -> &'static str {
        "ncrank"
    }
    fn about(&self) -> &'static str {
        "Noncommutative rank of a skew matrix or a linear pencil, with a witness"
    }
    fn args(&self, cmd: Command) -> Command {
        cmd.arg(Arg::new("file").long("file").help("Skew matrix file (m, then m² entries)"))
            .arg(Arg::new("pencil").long("pencil").conflicts_with("file").help("Linear pencil file"))
            .arg(Arg::new("schedule").long("schedule").help("Comma-separated blow-up dimensions"))
            .arg(Arg::new("out").long("out").help("Witness tuple file [default: input with .witness extension]"))
    }
    fn run(&self, m: &ArgMatches, ctx: &Context) -> Result<Report, CliError> {
        let params = RankParams {
            schedule: m.get_one::<String>("schedule").map(|s| parse_schedule(s)).transpose()?,
            max_dim: ctx.max_dim,
            trials: ctx.trials.unwrap_or(DEFAULT_RANK_TRIALS),
            seed: ctx.seed,
        };
        let mut r = Report::new();
        r.num("trials", params.trials as u64);
        let (input, witness) = if let Some(path) = m.get_one::<String>("file") {
            let base = Path::new(path).parent().unwrap_or(Path::new("."));
            let mat = parse_skew_file(&ctx.field, &read(path)?, base, IdrOptions::default()).map_err(|e| CliError::input(format!("{path}: {e}")))?;
            let res = ncrank_skew(&mat, &params).map_err(CliError::failed)?;
            r.num("m", mat.m() as u64)
                .num("rank", res.r as u64)
                .num("dim", res.d as u64)
                .num("certificate", res.certificate as u64)
                .num("reduction_size", res.reduction_size as u64);
            dims_table(&mut r, &res.reduction.dims);
            (path, res.witness)
        } else if let Some(path) = m.get_one::<String>("pencil") {
            let (l, _) = parse_pencil_file(&ctx.field, &read(path)?).map_err(|e| CliError::input(format!("{path}: {e}")))?;
            let res = ncrank_pencil(&l, &params).map_err(CliError::failed)?;
            r.num("size", l.size() as u64)
                .num("rank", res.r as u64)
                .num("dim", res.d as u64)
                .num("certificate", res.certificate as u64);
            dims_table(&mut r, &res.dims);
            (path, res.witness)
        } else {
            return Err(CliError::input("give --file or --pencil"));
        };
        let out = m.get_one::<String>("out").cloned().unwrap_or_else(|| default_witness_path(input));
        write(&out, &witness.to_text())?;
        r.kv("witness_file", out);
        Ok(r)
    }
}

struct Hitgen;

impl Subcommand for Hitgen {
    fn name(&self) -> &'static str {
        "hitgen"
    }
    fn about(&self) -> &'static str {
        "Generate a desk-scale hitting set and optionally verify it on a corpus"
    }
    fn args(&self, cmd: Command) -> Command {
        let count = |name: &'static str, help: &'static str| Arg::new(name).long(name).value_parser(value_parser!(usize)).help(help);
        cmd.arg(count("n", "Number of variables").required(true))
            .arg(count("s", "Circuit size bound").required(true))
            .arg(count("height", "Inversion height bound").default_value("1"))
            .arg(count("dim", "Matrix dimension d").required(true))
            .arg(count("kappa", "Sparse-point count [default: 2·s·d]"))
            .arg(Arg::new("corpus").long("corpus").help("Corpus file to verify against"))
            .arg(Arg::new("out").long("out").help("Write the tuples here"))
    }
    fn run(&self, m: &ArgMatches, ctx: &Context) -> Result<Report, CliError> {
        let get = |k: &str| m.get_one::<usize>(k).copied();
        let (n, s, h, d) = (get("n").unwrap(), get("s").unwrap(), get("height").unwrap(), get("dim").unwrap());
        if n == 0 || s == 0 || d == 0 {
            return Err(CliError::input("--n, --s and --dim must be positive"));
        }
        if get("kappa") == Some(0) {
            return Err(CliError::input("--kappa must be positive"));
        }
        let set = hitting_set_generate(&ctx.field, n, s, h, d, get("kappa"));
        let mut r = Report::new();
        r.num("n", n as u64).num("s", s as u64).num("height", h as u64).num("dim", d as u64).num("kappa", set.kappa as u64);
        r.num("set_size", set.tuples.len() as u64);
        if let Some(path) = m.get_one::<String>("out") {
            let text: String = set.tuples.iter().map(MatrixTuple::to_text).collect();
            write(path, &text)?;
            r.kv("tuples_file", path);
        }
        if let Some(path) = m.get_one::<String>("corpus") {
            let corpus = parse_corpus(&read(path)?).map_err(|(line, e)| CliError::input(format!("{path}:{line}: {e}")))?;
            let circuits: Vec<_> = corpus.iter().map(|e| e.circuit.clone()).collect();
            let report = verify_strong(&set, &circuits);
            let mut missed_nonzero = 0u64;
            let mut hit_identities = 0u64;
            let mut rows = Vec::new();
            for (i, (e, h)) in corpus.iter().zip(&report.circuits).enumerate() {
                match (e.nonzero, h.hit) {
                    (Some(true), None) => missed_nonzero += 1,
                    (Some(false), Some(_)) => hit_identities += 1,
                    _ => {}
                }
                let hit = h.hit.map_or("-".to_string(), |k| k.to_string());
                r.text(format!("{i}\thit={hit}\tdefined={}\t{}", h.defined, e.source));
                rows.push(json!({ "source": e.source, "hit": h.hit, "defined": h.defined }));
            }
            r.num("corpus_size", corpus.len() as u64)
                .num("hits", report.hits() as u64)
                .kv("hit_rate", format!("{:.4}", report.hit_rate()))
                .num("missed_nonzero", missed_nonzero)
                .num("hit_identities", hit_identities);
            r.json("entries", serde_json::Value::Array(rows));
        }
        Ok(r)
    }
}

struct Eval;

impl Subcommand for Eval {
    fn name(&self) -> &'static str {
        "eval"
    }
    fn about(&self) -> &'static str {
        "Evaluate a circuit or a realized pencil entry at a matrix tuple"
    }
    fn args(&self, cmd: Command) -> Command {
        circuit_args(cmd)
            .arg(Arg::new("pencil").long("pencil").conflicts_with_all(["expr", "file"]).help("Pencil file with a realize trailer"))
            .arg(Arg::new("tuple").long("tuple").required(true).help("Tuple file"))
    }
    fn run(&self, m: &ArgMatches, ctx: &Context) -> Result<Report, CliError> {
        let tpath = m.get_one::<String>("tuple").unwrap();
        let t = parse_tuple(&ctx.field, &read(tpath)?).map_err(|e| CliError::input(format!("{tpath}: {e}")))?;
        let mut r = Report::new();
        r.num("dim", t.dim() as u64);
        let value = if let Some(path) = m.get_one::<String>("pencil") {
            let (l, des) = parse_pencil_file(&ctx.field, &read(path)?).map_err(|e| CliError::input(format!("{path}: {e}")))?;
            let (u, v) = des.ok_or_else(|| CliError::input(format!("{path}: missing `realize` trailer")))?;
            if t.nvars() < l.nvars() {
                return Err(CliError::input(format!("pencil has {} variables, tuple {}", l.nvars(), t.nvars())));
            }
            let e = RealizedEntry::new(l.with_nvars(t.nvars()), u, v).map_err(CliError::input)?;
            e.eval(&t).ok()
        } else {
            let c = circuit_input(m)?;
            if t.nvars() < c.nvars() {
                return Err(CliError::input(format!("circuit has {} variables, tuple {}", c.nvars(), t.nvars())));
            }
            r.kv("circuit", c.to_expr_string());
            eval_circuit(&c, &t).ok()
        };
        match value {
            Some(v) => {
                r.kv("defined", true).kv("invertible", v.is_invertible()).num("rank", v.rank_of() as u64);
                r.json("value", json!(matrix_lines(&v)));
                for l in matrix_lines(&v) {
                    r.text(l);
                }
            }
            None => {
                r.kv("defined", false);
            }
        }
        Ok(r)
    }
}

struct SeriesZero;

impl Subcommand for SeriesZero {
    fn name(&self) -> &'static str {
        "series-zero"
    }
    fn about(&self) -> &'static str {
        "Zero test for the series c·(I − M)⁻¹·b read from a homogeneous pencil file"
    }
    fn args(&self, cmd: Command) -> Command {
        cmd.arg(Arg::new("file").long("file").required(true).help("Pencil file for M (zero constant term) with `realize u v` giving c = e_u, b = e_v"))
            .arg(Arg::new("witness").long("witness").help("Write the witness tuple here"))
    }
    fn run(&self, m: &ArgMatches, ctx: &Context) -> Result<Report, CliError> {
        let path = m.get_one::<String>("file").unwrap();
        let (l, des) = parse_pencil_file(&ctx.field, &read(path)?).map_err(|e| CliError::input(format!("{path}: {e}")))?;
        let (u, v) = des.ok_or_else(|| CliError::input(format!("{path}: missing `realize` trailer")))?;
        let size = l.size();
        let unit = |i: usize| (0..size).map(|k| if k == i { ctx.field.one() } else { ctx.field.zero() }).collect();
        let s = RecognizableSeries::new(unit(u), l, unit(v)).map_err(|e| CliError::input(format!("{path}: {e}")))?;
        let trials = ctx.trials.unwrap_or(DEFAULT_SERIES_TRIALS);
        let mut r = Report::new();
        r.num("size", s.size() as u64).num("nvars", s.nvars() as u64).num("trials", trials as u64);
        match series_is_zero(&s, trials, ctx.seed).map_err(CliError::failed)? {
            SeriesVerdict::Zero { dim, trials: _, error_bound } => {
                r.kv("verdict", "ZERO").num("dim", dim as u64).kv("error_bound", format!("{error_bound:e}"));
                if m.get_one::<String>("witness").is_some() {
                    r.set_negative();
                }
            }
            SeriesVerdict::NonZero { witness, .. } => {
                r.kv("verdict", "NONZERO").num("dim", witness.dim() as u64);
                let (tau, _) = scaling_search(&s, &witness).map_err(CliError::failed)?;
                r.num("tau", tau).num("tau_bound", scaling_bound(s.size(), witness.dim()));
                if let Some(wpath) = m.get_one::<String>("witness") {
                    write(wpath, &witness.to_text())?;
                    r.kv("witness_file", wpath);
                }
            }
        }
        Ok(r)
    }
}

struct Bootstrap;

impl Subcommand for Bootstrap {
    fn name(&self) -> &'static str {
        "bootstrap"
    }
    fn about(&self) -> &'static str {
        "Per-level smallest dimensions with an invertible image"
    }
    fn args(&self, cmd: Command) -> Command {
        circuit_args(cmd).arg(Arg::new("schedule").long("schedule").help("Comma-separated dimensions [default: 1..=max-dim]"))
    }
    fn run(&self, m: &ArgMatches, ctx: &Context) -> Result<Report, CliError> {
        let c = circuit_input(m)?;
        let schedule = match m.get_one::<String>("schedule") {
            Some(s) => parse_schedule(s)?,
            None => (1..=ctx.max_dim.unwrap_or(DEFAULT_BOOTSTRAP_MAX_DIM)).collect(),
        };
        let params = RitParams { max_dim: Some(*schedule.iter().max().unwrap()), ..rit_params(ctx) };
        let mut r = Report::new();
        r.kv("circuit", c.to_expr_string())
            .kv("schedule", schedule.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
            .num("trials", params.trials as u64);
        if rit_test(&c, &ctx.field, &params).map_err(CliError::failed)?.is_zero() {
            return Err(CliError::failed("the circuit tested as identically zero"));
        }
        let levels = bootstrap_dimension(&c, &ctx.field, &schedule, &params).map_err(CliError::failed)?;
        r.num("levels", levels.len() as u64);
        r.text("level\tcircuit_size\tdim\troute");
        let mut rows = Vec::new();
        for l in &levels {
            let route = match l.route {
                BootstrapRoute::Sampled => "sampled".to_string(),
                BootstrapRoute::Inherited => "inherited".to_string(),
                BootstrapRoute::Series { d_prime, tau } => format!("series(d'={d_prime},tau={tau})"),
                BootstrapRoute::Failed => "failed".to_string(),
            };
            let dim = l.dim.map_or("-".to_string(), |d| d.to_string());
            r.text(format!("{}\t{}\t{dim}\t{route}", l.level, l.circuit_size));
            rows.push(json!({ "level": l.level, "circuit_size": l.circuit_size, "dim": l.dim, "route": route }));
        }
        r.json("table", serde_json::Value::Array(rows));
        Ok(r)
    }
}
