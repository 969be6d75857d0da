//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::time::{Duration, Instant};

use ncrat::circuit::{
    acceptance_corpus, classify, eval_circuit, random_circuit, to_idrrsc, transport_witness, variable_reduction,
    CorpusEntry, IdrOptions,
};
use ncrat::exactalg::{sample_tuple, DenseMatrix, Field, PrimeField};
use ncrat::pencil::{compile_circuit, compile_idrrsc, compose, LinearPencil, RealizedEntry};
use ncrat::rank::{ncrank_direct, ncrank_pencil, ncrank_skew, zero_entry, RankParams, SkewMatrix};
use ncrat::rit::{hitting_set_generate, rit_test, verify_strong, RitParams, RitVerdict};
use ncrat::series::{random_series, scaling_bound, scaling_search, series_is_zero, RecognizableSeries, SeriesVerdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{low_rank_pencil, random_entry, random_pencil, scaled_entry, skew3};

const HUA: &str = "inv(x1 + x1*inv(x2)*x1) + inv(x1+x2) - inv(x1)";

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn m61() -> PrimeField {
    PrimeField::mersenne61()
}

fn corpus() -> Vec<CorpusEntry> {
    acceptance_corpus()
}

fn c1_hua() -> Outcome {
    let f = m61();
    let c = ncrat::circuit::parse_expr(HUA).unwrap();
    let start = Instant::now();
    let params = RitParams { max_dim: Some(8), trials: 200, seed: 0x4a, ..Default::default() };
    let v = rit_test(&c, &f, &params).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    match v {
        RitVerdict::Zero { max_dim, trials, pencil_size, log10_error_bound, .. } => {
            check(max_dim == 8 && trials >= 200, || format!("probed d ≤ {max_dim} with {trials} trials"))?;
            check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
            Ok(format!(
                "pencil size {pencil_size}, singular at {trials} tuples for each d in 1..=8, log10 bound {log10_error_bound:.0}, {:.2}s",
                elapsed.as_secs_f64()
            ))
        }
        v => Err(format!("expected Zero, got {v:?}")),
    }
}

fn c2_nonzero_corpus() -> Outcome {
    let f = m61();
    let corpus = corpus();
    let nonzero = corpus.iter().filter(|e| e.nonzero == Some(true)).count();
    check(nonzero >= 20, || format!("only {nonzero} nonzero members"))?;
    let mut max_dim = 0;
    for seed in 0..5u64 {
        for e in &corpus {
            let size = classify(&e.circuit).size;
            let params = RitParams { seed, ..Default::default() };
            let v = rit_test(&e.circuit, &f, &params).map_err(|err| format!("{}: {err}", e.source))?;
            match (e.nonzero, v) {
                (Some(true), RitVerdict::NonZero { dim, definedness_witness, invertibility_witness, value }) => {
                    check(dim <= 2 * size, || format!("{}: dimension {dim} > 2·{size}", e.source))?;
                    check(eval_circuit(&e.circuit, &definedness_witness).is_ok(), || format!("{}: definedness witness fails", e.source))?;
                    let direct = eval_circuit(&e.circuit, &invertibility_witness).map_err(|err| err.to_string())?;
                    check(direct == value && direct.is_invertible(), || format!("{}: invertibility witness fails", e.source))?;
                    max_dim = max_dim.max(dim);
                }
                (Some(false), RitVerdict::Zero { .. }) => {}
                (_, v) => return Err(format!("{} (seed {seed}): wrong verdict {v:?}", e.source)),
            }
        }
    }
    Ok(format!("{nonzero} nonzero members and {} identities verified across 5 seeds, max witness dimension {max_dim}", corpus.len() - nonzero))
}

/// `L` of size `s` over `n + m` variables: dense random `x` part, each `y_k` in one random entry.
fn compose_instance(f: &PrimeField, rng: &mut ChaCha8Rng) -> (LinearPencil<PrimeField>, Vec<RealizedEntry<PrimeField>>, usize) {
    let s = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=2);
    let mut l = random_pencil(f, s, n, rng).with_nvars(n + m);
    for k in 1..=m {
        let v = loop {
            let v = f.sample(rng);
            if v != 0 {
                break v;
            }
        };
        l.coeff_mut(n + k).set(rng.gen_range(0..s), rng.gen_range(0..s), v);
    }
    let gs = (0..m).map(|_| random_entry(f, rng.gen_range(1..=5), n, rng)).collect();
    (l, gs, n)
}

fn c3_composition() -> Outcome {
    let f = m61();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc3);
    let mut points = 0;
    for inst in 0..100 {
        let (l, gs, n) = compose_instance(&f, &mut rng);
        let s = l.size();
        let grid = compose(&l, &gs, n).map_err(|e| e.to_string())?;
        let expect = gs.iter().map(|g| g.size()).sum::<usize>() + gs.len() + 2 * s * s + s;
        check(grid.pencil.size() == expect, || format!("instance {inst}: size {} != {expect}", grid.pencil.size()))?;
        let mut good = 0;
        let mut tries = 0;
        while good < 20 {
            tries += 1;
            check(tries < 200, || format!("instance {inst}: no defined points"))?;
            let d = rng.gen_range(1..=2);
            let t = sample_tuple(&f, n, d, &mut rng);
            let mut ys = Vec::new();
            for g in &gs {
                match g.eval(&t).ok().and_then(|v| v.invert().ok()) {
                    Some(y) => ys.push(y),
                    None => break,
                }
            }
            if ys.len() < gs.len() {
                continue;
            }
            let Ok(direct) = l.eval(&t.extended(ys).unwrap()).unwrap().invert() else { continue };
            let inv = grid.pencil.eval(&t).unwrap().invert().map_err(|_| format!("instance {inst}: composed pencil singular at a defined point"))?;
            for i in 0..s {
                for j in 0..s {
                    let got = inv.block((grid.offset + i) * d, (grid.offset + j) * d, d, d);
                    check(got == direct.block(i * d, j * d, d, d), || format!("instance {inst}: entry ({i},{j}) differs"))?;
                }
            }
            good += 1;
            points += 1;
        }
    }
    Ok(format!("100 instances, {points} points, exact entries and sizes"))
}

fn c4_size_bound() -> Outcome {
    let f = m61();
    let mut worst: (f64, String) = (0.0, String::new());
    for e in corpus() {
        let s = classify(&e.circuit).size;
        let idr = to_idrrsc(&e.circuit, &f, IdrOptions::default()).map_err(|err| format!("{}: {err}", e.source))?;
        let size = compile_idrrsc(&idr).size();
        let ratio = size as f64 / (s * s) as f64;
        if ratio > worst.0 {
            worst = (ratio, format!("{} (size {size}, s = {s})", e.source));
        }
    }
    check(worst.0 <= 16.0, || format!("C = {:.2} at {}", worst.0, worst.1))?;
    Ok(format!("measured C = {:.3} at {}", worst.0, worst.1))
}

fn c5_correspondence() -> Outcome {
    let f = PrimeField::new(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc5);
    let (mut circuits, mut defined, mut undefined) = (0, 0, 0);
    while circuits < 50 {
        let c = random_circuit(2, rng.gen_range(3..=7), 0.35, &mut rng);
        let Ok(e) = compile_circuit(&c, &f, IdrOptions::default()) else { continue };
        let e = RealizedEntry::new(e.pencil.with_nvars(c.nvars()), e.row, e.col).unwrap();
        circuits += 1;
        for _ in 0..20 {
            let d = rng.gen_range(1..=2);
            let t = sample_tuple(&f, 2, d, &mut rng);
            let is_defined = eval_circuit(&c, &t).is_ok();
            let invertible = e.pencil.eval(&t).unwrap().is_invertible();
            check(is_defined == invertible, || format!("{} at {t:?}: defined {is_defined}, pencil invertible {invertible}", c.to_expr_string()))?;
            if is_defined {
                defined += 1;
                check(e.eval(&t).unwrap() == eval_circuit(&c, &t).unwrap(), || format!("{}: value differs", c.to_expr_string()))?;
            } else {
                undefined += 1;
            }
        }
    }
    check(defined > 0 && undefined > 0, || format!("one-sided sample: {defined} defined, {undefined} undefined"))?;
    Ok(format!("50 circuits × 20 points over F_7: {defined} defined, {undefined} undefined, all agreeing"))
}

fn random_skew(f: &PrimeField, kind: usize, rng: &mut ChaCha8Rng) -> SkewMatrix<PrimeField> {
    let m = rng.gen_range(1..=3);
    let n = 2;
    let entries = match kind {
        0 => (0..m * m)
            .map(|_| if rng.gen_bool(0.25) { zero_entry(f, n) } else { random_entry(f, rng.gen_range(1..=4), n, rng) })
            .collect(),
        1 => {
            let g = random_entry(f, rng.gen_range(1..=6), n, rng);
            let a: Vec<u64> = (0..m).map(|_| if rng.gen_bool(0.2) { 0 } else { f.sample(rng) }).collect();
            let b: Vec<u64> = (0..m).map(|_| f.sample(rng)).collect();
            (0..m * m).map(|k| scaled_entry(&g, f.mul(&a[k / m], &b[k % m]))).collect()
        }
        _ => {
            // Rank-one block plus a diagonal of random entries.
            let g = random_entry(f, 2, n, rng);
            (0..m * m)
                .map(|k| {
                    let (i, j) = (k / m, k % m);
                    if i == j && i > 0 {
                        random_entry(f, 3, n, rng)
                    } else if i == 0 || j == 0 {
                        zero_entry(f, n)
                    } else {
                        scaled_entry(&g, f.sample(rng))
                    }
                })
                .collect()
        }
    };
    SkewMatrix::new(m, entries).unwrap()
}

fn expr_skew(f: &PrimeField, m: usize, srcs: &[&str]) -> SkewMatrix<PrimeField> {
    let entries = srcs
        .iter()
        .map(|s| {
            if *s == "0" {
                zero_entry(f, 0)
            } else {
                compile_circuit(&ncrat::circuit::parse_expr(s).unwrap(), f, IdrOptions::default()).unwrap()
            }
        })
        .collect();
    SkewMatrix::new(m, entries).unwrap()
}

fn c6_rank_reduction() -> Outcome {
    let f = m61();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc6);
    let params = RankParams { max_dim: Some(4), ..Default::default() };
    let mut ranks = Vec::new();
    for i in 0..30 {
        let mat = random_skew(&f, i % 3, &mut rng);
        let red = ncrank_skew(&mat, &params).map_err(|e| format!("matrix {i}: {e}"))?;
        let dir = ncrank_direct(&mat, &params).map_err(|e| format!("matrix {i}: {e}"))?;
        check(red.r == dir.r, || format!("matrix {i}: reduction {} vs direct {}", red.r, dir.r))?;
        check(mat.rank_at(&red.witness).unwrap() == Some(red.r * red.d), || format!("matrix {i}: bad witness"))?;
        check(mat.rank_at(&dir.witness).unwrap() == Some(dir.r * dir.d), || format!("matrix {i}: bad direct witness"))?;
        ranks.push(red.r);
    }
    let p = RankParams::default();
    for (name, m, srcs, want) in [
        ("Higman", 2, vec!["1", "x1", "x2", "x3 + x1*x2"], 2),
        ("[[x,x],[x,x]]", 2, vec!["x1", "x1", "x1", "x1"], 1),
        ("identity", 3, vec!["1", "0", "0", "0", "1", "0", "0", "0", "1"], 3),
    ] {
        let mat = expr_skew(&f, m, &srcs);
        let res = ncrank_skew(&mat, &p).map_err(|e| format!("{name}: {e}"))?;
        check(res.r == want, || format!("{name}: rank {} != {want}", res.r))?;
        check(mat.rank_at(&res.witness).unwrap() == Some(res.r * res.d), || format!("{name}: bad witness"))?;
    }
    Ok(format!("30 random matrices agree (ranks {ranks:?}); Higman 2, duplicate 1, identity 3"))
}

fn c7_regularity() -> Outcome {
    let f = m61();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc7);
    let (mut trials, mut anomalies, mut probed) = (0, 0, 0);
    for i in 0..20 {
        let l = match i % 4 {
            0 => {
                let s = rng.gen_range(2..=6);
                low_rank_pencil(&f, s, rng.gen_range(1..s), rng.gen_range(1..=3), &mut rng)
            }
            1 => {
                let extra = rng.gen_range(1..=3);
                let tail = low_rank_pencil(&f, extra, extra.saturating_sub(1).max(1), 3, &mut rng);
                LinearPencil::block_diag(&f, &[&skew3(&f), &tail])
            }
            2 => skew3(&f),
            _ => random_pencil(&f, rng.gen_range(1..=6), 2, &mut rng),
        };
        let res = ncrank_pencil(&l, &RankParams { seed: i as u64, ..Default::default() }).map_err(|e| format!("pencil {i}: {e}"))?;
        for st in &res.dims {
            probed += 1;
            if st.d >= 2 && st.accepted {
                check(st.max_rank % st.d == 0, || format!("pencil {i}: max rank {} at d={}", st.max_rank, st.d))?;
            }
            check(!st.anomaly || st.accepted, || format!("pencil {i}: unresolved anomaly at d={}", st.d))?;
        }
        let seq = res.accepted_sequence();
        check(seq.windows(2).all(|w| w[0].1 <= w[1].1), || format!("pencil {i}: r_d not monotone {seq:?}"))?;
        trials += res.total_trials();
        anomalies += res.anomalies();
    }
    let rate = anomalies as f64 / trials as f64;
    check(rate < 0.01, || format!("anomaly rate {rate:.4}"))?;
    Ok(format!("{probed} dimensions over 20 pencils, {anomalies} anomalies in {trials} trials"))
}

/// A zero series: `b` lives in an `M`-invariant coordinate subspace that `c` annihilates.
fn zero_series(f: &PrimeField, rng: &mut ChaCha8Rng) -> RecognizableSeries<PrimeField> {
    let s = rng.gen_range(2..=4);
    let k = rng.gen_range(1..s);
    let nvars = 2;
    let mut m = LinearPencil::zeros(f, s, nvars);
    for v in 1..=nvars {
        for i in 0..s {
            for j in 0..s {
                if !(j < k && i >= k) {
                    m.coeff_mut(v).set(i, j, f.sample(rng));
                }
            }
        }
    }
    let b = (0..s).map(|i| if i < k { f.sample(rng) } else { 0 }).collect();
    let c = (0..s).map(|i| if i >= k { f.sample(rng) } else { 0 }).collect();
    RecognizableSeries::new(c, m, b).unwrap()
}

fn c8_series() -> Outcome {
    let f = m61();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc8);
    let (mut zeros, mut scaled) = (0, 0);
    for i in 0..50 {
        let s = if i % 3 == 0 { zero_series(&f, &mut rng) } else { random_series(&f, rng.gen_range(1..=4), 2, 0.5, &mut rng) };
        let oracle_zero = s.symbolic_truncation(s.size() - 1).is_zero();
        let v = series_is_zero(&s, 6, i).map_err(|e| e.to_string())?;
        check(v.is_zero() == oracle_zero, || format!("series {i}: verdict {} vs symbolic {oracle_zero}", v.is_zero()))?;
        match v {
            SeriesVerdict::NonZero { witness, .. } => {
                let (tau, val) = scaling_search(&s, &witness).map_err(|e| format!("series {i}: {e}"))?;
                let bound = scaling_bound(s.size(), witness.dim());
                check(tau <= bound && !val.is_zero(), || format!("series {i}: τ = {tau} > {bound}"))?;
                scaled += 1;
            }
            SeriesVerdict::Zero { .. } => zeros += 1,
        }
    }
    Ok(format!("50 series: {zeros} zero, {scaled} nonzero with scaling witnesses"))
}

fn c9_variable_reduction() -> Outcome {
    let f = m61();
    let params = RitParams { max_dim: Some(3), trials: 4, seed: 9, ..Default::default() };
    let mut transported = 0;
    let corpus = corpus();
    for e in &corpus {
        let h = e.circuit.height();
        let r = variable_reduction(&e.circuit, h).map_err(|err| err.to_string())?;
        let a = rit_test(&e.circuit, &f, &params).map_err(|err| format!("{}: {err}", e.source))?;
        let b = rit_test(&r, &f, &params).map_err(|err| format!("{} reduced: {err}", e.source))?;
        check(a.is_zero() == b.is_zero(), || format!("{}: verdicts differ", e.source))?;
        if let RitVerdict::NonZero { invertibility_witness, .. } = b {
            let p = transport_witness(&invertibility_witness, e.circuit.nvars(), h).unwrap();
            let v = eval_circuit(&e.circuit, &p).map_err(|err| format!("{}: transported point undefined: {err}", e.source))?;
            check(v.is_invertible(), || format!("{}: transported value singular", e.source))?;
            transported += 1;
        }
    }
    Ok(format!("{} circuits agree, {transported} witnesses transported", corpus.len()))
}

fn c10_hitting_set() -> Outcome {
    let f = m61();
    let start = Instant::now();
    let members: Vec<CorpusEntry> = corpus()
        .into_iter()
        .filter(|e| {
            let k = classify(&e.circuit);
            e.circuit.nvars() <= 3 && k.size <= 12 && k.height <= 1
        })
        .collect();
    let set = hitting_set_generate(&f, 3, 12, 1, 4, None);
    let circuits: Vec<_> = members.iter().map(|e| e.circuit.clone()).collect();
    let report = verify_strong(&set, &circuits);
    let elapsed = start.elapsed();
    for (e, hit) in members.iter().zip(&report.circuits) {
        match e.nonzero {
            Some(true) => check(hit.hit.is_some(), || format!("{}: no witness", e.source))?,
            Some(false) => check(hit.hit.is_none(), || format!("{}: identity has a witness", e.source))?,
            None => {}
        }
    }
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    let nz = members.iter().filter(|e| e.nonzero == Some(true)).count();
    Ok(format!(
        "{} tuples (κ = {}), {nz} nonzero members hit, {} identities missed, {:.2}s",
        set.tuples.len(),
        set.kappa,
        members.len() - nz,
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Hua's identity", c1_hua),
        ("nonzero corpus", c2_nonzero_corpus),
        ("composition oracle", c3_composition),
        ("pencil size bound", c4_size_bound),
        ("definedness correspondence", c5_correspondence),
        ("rank reduction", c6_rank_reduction),
        ("regularity and monotonicity", c7_regularity),
        ("series truncation", c8_series),
        ("variable reduction", c9_variable_reduction),
        ("desk-scale hitting set", c10_hitting_set),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs:.2}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs:.2}s]", i + 1);
            }
        }
    }
    let _ = DenseMatrix::<PrimeField>::zeros;
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
