//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! lines always reach stdout; pass criterion numbers as arguments to run a
//! subset. Criteria run one at a time so their wall-clock limits are measured
//! without contention.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subcake::designated::{condense, deposit, fairness_regime_holds, DesignatedParams};
use subcake::harness::{
    check_lemma1, generate, run_suite, AdversarialProfile, BatchSettings, GeneratorKind, GeneratorSpec,
    InstanceSource, RateCheck, SamplingLemmaParams, SuiteConfig, Theorem1Batch, Theorem2Batch,
};
use subcake::protocols::approx_fair::simplified_failure_bound;
use subcake::protocols::{approvers, dc, failure_bound};
use subcake::rational::{int, inv_e_lower, rat, to_f64, zero};
use subcake::{Instance, Interval, Oracle, PieceSet, Query, Rational, Valuation};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(
        elapsed < Duration::from_secs(limit_s),
        format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64()),
    )
}

fn lib<T>(r: subcake::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// `2 n ceil(log2 n)` with integer arithmetic only.
fn dc_bound(n: u64) -> u64 {
    let mut ceil_log = 0;
    while (1u64 << ceil_log) < n {
        ceil_log += 1;
    }
    2 * n * ceil_log
}

/// Mass of `[a, b]` summed segment by segment.
fn naive_value(v: &Valuation, a: &Rational, b: &Rational) -> Rational {
    let bp = v.breakpoints();
    let mut total = zero();
    for (i, d) in v.densities().iter().enumerate() {
        let lo = if &bp[i] > a { &bp[i] } else { a };
        let hi = if &bp[i + 1] < b { &bp[i + 1] } else { b };
        if lo < hi {
            total += d * (hi - lo);
        }
    }
    total
}

fn naive_piece(v: &Valuation, s: &PieceSet) -> Rational {
    s.fragments().iter().map(|f| naive_value(v, f.lo(), f.hi())).fold(zero(), |a, b| a + b)
}

fn dc_proportionality() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    for seed in 0..200u64 {
        let n = 2 + (seed as usize % 63);
        let spec = GeneratorSpec { kind: GeneratorKind::BlockRandom { blocks: 8, profiles: 0 }, n, seed };
        let inst = lib(generate(&spec))?;
        let players: Vec<_> = inst.players().collect();
        let cake = PieceSet::unit();
        let mut oracle = Oracle::new(&inst);
        let alloc = lib(dc(&mut oracle, &players, &cake))?;
        ensure(alloc.is_pairwise_disjoint(), format!("seed {seed}: overlapping pieces"))?;
        for p in inst.players() {
            let v = inst.valuation(p);
            let got = naive_piece(v, alloc.get(p).ok_or(format!("seed {seed}: player {p} unassigned"))?);
            ensure(
                got * int(n as i64) >= naive_piece(v, &cake),
                format!("seed {seed}: player {p} below 1/{n}"),
            )?;
            checked += 1;
        }
    }
    within(start.elapsed(), 10)?;
    Ok(format!("200 instances, {checked} player checks, 0 violations, {:.2}s", start.elapsed().as_secs_f64()))
}

fn dc_query_complexity() -> Outcome {
    let mut worst = 0.0f64;
    for e in 1..=10u32 {
        let n = 1usize << e;
        let spec = GeneratorSpec { kind: GeneratorKind::BlockRandom { blocks: 8, profiles: 0 }, n, seed: e as u64 };
        let inst = lib(generate(&spec))?;
        let players: Vec<_> = inst.players().collect();
        for k in [1usize, 2, 3, 5, 8] {
            let cake = lib(subcake::harness::trials::fragmented_cake(k))?;
            let mut oracle = Oracle::new(&inst);
            lib(dc(&mut oracle, &players, &cake))?;
            let used = oracle.ledger().total();
            let bound = k as u64 * dc_bound(n as u64);
            ensure(used <= bound, format!("n={n} k={k}: {used} > {bound}"))?;
            worst = worst.max(used as f64 / bound as f64);
        }
    }
    Ok(format!("n=2..1024, k in {{1,2,3,5,8}}: max ledger/bound = {worst:.3}"))
}

fn undesignated_sublinearity() -> Outcome {
    let mut rows = Vec::new();
    for n in [12_700usize, 127_000, 1_270_000] {
        let start = Instant::now();
        let inst = Arc::new(lib(Instance::identical(n, Valuation::uniform()))?);
        let batch = Theorem1Batch {
            source: InstanceSource::Fixed(inst),
            r: 10,
            eps: rat(1, 10),
            t: int(2),
            charge_duplicates: true,
        };
        let settings = BatchSettings { scenario: "sublinear".into(), seed: 17, trials: 1, record_wall_time: false };
        let rep = lib(batch.run(&settings))?.remove(0);
        ensure(rep.success, format!("n={n}: run failed ({})", rep.status))?;
        rows.push((n, rep.preassign_queries(), rep.other_queries(), start.elapsed().as_secs_f64()));
    }
    let pre: Vec<u64> = rows.iter().map(|r| r.1).collect();
    ensure(pre.windows(2).all(|w| w[0] == w[1]), format!("preassign counts differ: {pre:?}"))?;
    let scaled = |n: usize| n as f64 * (n as f64).log2();
    let (n0, _, c0, _) = rows[0];
    for w in rows.windows(2) {
        ensure(w[1].2 > w[0].2, format!("completion count not increasing: {} -> {}", w[0].2, w[1].2))?;
    }
    let mut ratios = Vec::new();
    for &(n, _, c, _) in &rows[1..] {
        let predicted = c0 as f64 * scaled(n) / scaled(n0);
        let ratio = c as f64 / predicted;
        ensure((0.5..=4.0).contains(&ratio), format!("n={n}: completion/(n log n scaling) = {ratio:.3}"))?;
        ratios.push(format!("{ratio:.3}"));
    }
    let detail: Vec<String> =
        rows.iter().map(|(n, p, c, s)| format!("n={n}: preassign={p} completion={c} ({s:.1}s)")).collect();
    Ok(format!("{}; growth ratios {}", detail.join(", "), ratios.join(", ")))
}

fn undesignated_statistical_floor() -> Outcome {
    let start = Instant::now();
    let spec = GeneratorSpec {
        kind: GeneratorKind::Mixture { lo: rat(9, 10), hi: int(1), fraction: rat(1, 5), blocks: 4, profiles: 0 },
        n: 12_700,
        seed: 2024,
    };
    let batch =
        Theorem1Batch { source: InstanceSource::Generated(spec), r: 10, eps: rat(1, 10), t: int(2), charge_duplicates: false };
    let settings = BatchSettings { scenario: "floor".into(), seed: 99, trials: 300, record_wall_time: false };
    let reports = lib(batch.run(&settings))?;
    for rep in &reports {
        ensure(rep.all_checks_hold(), format!("trial {}: per-trial check failed: {:?}", rep.trial, rep.checks))?;
    }
    let successes = reports.iter().filter(|r| r.success).count() as u64;
    let check = RateCheck::new(successes, 300, batch.floor());
    ensure((batch.floor() - 0.2).abs() < 1e-12, format!("floor {} != 0.2", batch.floor()))?;
    ensure(check.passed, format!("rate {:.4} below {:.4}", check.rate, check.threshold()))?;
    within(start.elapsed(), 300)?;
    Ok(format!(
        "success {successes}/300 = {:.4} >= floor 0.2 - 3 sigma = {:.4}, {:.1}s",
        check.rate,
        check.threshold(),
        start.elapsed().as_secs_f64()
    ))
}

fn sampling_checker() -> Outcome {
    let start = Instant::now();
    let params = SamplingLemmaParams { n: 127_000, eps: rat(1, 5), s: int(127), t: int(2), r: 200 };
    // 1 - s^2 / (((s-1)(t-1) - 1)^2 r) = 1 - 127^2 / (125^2 * 200)
    let expected = int(1) - rat(127 * 127, 125 * 125 * 200);
    ensure(params.bound() == expected, format!("bound {} != {}", params.bound(), expected))?;
    ensure((to_f64(&expected) - 0.99484).abs() < 5e-6, "bound does not round to 0.99484")?;
    let result = lib(check_lemma1(&params, 1000, 5))?;
    ensure(result.check.passed, format!("frequency {:.4} below {:.4}", result.check.rate, result.check.threshold()))?;
    within(start.elapsed(), 30)?;
    Ok(format!(
        "frequency {:.4} >= {:.5} - 3 sigma = {:.4}, {:.2}s",
        result.check.rate,
        to_f64(&expected),
        result.check.threshold(),
        start.elapsed().as_secs_f64()
    ))
}

fn condense_halving() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let point = |rng: &mut ChaCha8Rng| {
        let den = rng.random_range(1..=128i64);
        rat(rng.random_range(0..=den), den)
    };
    for call in 0..500 {
        let n = rng.random_range(2..=40usize);
        let spec = GeneratorSpec {
            kind: GeneratorKind::Mixture { lo: rat(3, 5), hi: rat(4, 5), fraction: rat(1, 4), blocks: 6, profiles: 0 },
            n,
            seed: rng.random(),
        };
        let inst = lib(generate(&spec))?;
        let piece = loop {
            let (a, b) = (point(&mut rng), point(&mut rng));
            if a != b {
                break lib(if a < b { Interval::new(a, b) } else { Interval::new(b, a) })?;
            }
        };
        let p = rng.random_range(0..n);
        let size = rng.random_range(1..=2 * n);
        let sampled: Vec<_> = (0..size).map(|_| rng.random_range(0..n)).collect();
        let mut oracle = Oracle::new(&inst);
        let out = lib(condense(&mut oracle, p, &sampled, &piece))?;
        let v = inst.valuation(p);
        let before = naive_value(v, piece.lo(), piece.hi());
        let after = naive_value(v, out.piece.lo(), out.piece.hi());
        ensure(after.clone() * int(2) >= before, format!("call {call}: {after} < half of {before}"))?;
        ensure(piece.contains(&out.piece), format!("call {call}: output escapes the input"))?;
        let below = out.marks.iter().filter(|(x, _)| *x <= out.median_point).count();
        let above = out.marks.iter().filter(|(x, _)| *x >= out.median_point).count();
        ensure(2 * below >= size && 2 * above >= size, format!("call {call}: split point is not a median"))?;
        ensure(
            out.marks.iter().any(|(x, q)| *q == out.median_player && *x == out.median_point),
            format!("call {call}: median does not come from a mark"),
        )?;
        for (x, q) in &out.marks {
            let w = inst.valuation(*q);
            ensure(
                naive_value(w, piece.lo(), x) * int(2) == naive_value(w, piece.lo(), piece.hi()),
                format!("call {call}: mark of {q} is not a half point"),
            )?;
        }
    }
    Ok("500 calls, value kept >= half and median split on every call".into())
}

fn politeness() -> Outcome {
    let n = 5000;
    let eps = rat(1, 5);
    let mut polite = 0;
    for trial in 0..100u64 {
        let kind = if trial % 2 == 0 {
            GeneratorKind::Uniform
        } else {
            GeneratorKind::SpikeCluster { lo: rat(9, 10), hi: int(1), fraction: rat(1, 5) }
        };
        let inst = lib(generate(&GeneratorSpec { kind, n, seed: trial }))?;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let p = rng.random_range(0..n);
        let params = lib(DesignatedParams::new(n, vec![p], eps.clone(), int(1), rat(1, 64)))?;
        ensure(params.eps_prime() == &eps, "eps' must equal eps for one designated player")?;
        let mut oracle = Oracle::new(&inst);
        let out = lib(deposit(&mut oracle, p, &params, &mut rng))?;
        let count = approvers(&inst, &eps, &PieceSet::from(out.piece.clone())).len();
        if count as u64 * 5 <= n as u64 {
            polite += 1;
        }
    }
    ensure(polite >= 90, format!("only {polite}/100 deposits polite"))?;
    Ok(format!("{polite}/100 deposits have at most eps' n approvers"))
}

fn designated_desk() -> Outcome {
    // Regime predicate as a pure function against a direct evaluation.
    for (r, eps, n) in [(1usize, rat(99, 100), 10usize), (1, rat(99, 100), 2), (3, inv_e_lower(), usize::MAX), (1, rat(1, 2), 1 << 40)] {
        let lhs = (7.0 * (r as f64 / to_f64(&eps)).ln()).powi(2);
        let expected = lhs <= (n as f64).ln();
        ensure(fairness_regime_holds(r, &eps, n) == expected, format!("regime predicate wrong at r={r} n={n}"))?;
    }
    let n = 3000;
    let kind = GeneratorKind::Adversarial { profile: AdversarialProfile::ConcentratedPrefix { count: 3 } };
    let spec = GeneratorSpec { kind, n, seed: 0 };
    let batch = Theorem2Batch {
        source: InstanceSource::Fixed(Arc::new(lib(generate(&spec))?)),
        designated: vec![0, 1, 2],
        eps: inv_e_lower(),
        t: int(1),
        scale: rat(1, 64),
    };
    let settings = BatchSettings { scenario: "designated".into(), seed: 8, trials: 100, record_wall_time: false };
    let reports = lib(batch.run(&settings))?;
    let expected_victims = (3000.0 * to_f64(&inv_e_lower())).floor() as usize;
    for rep in &reports {
        ensure(rep.checks.get("designated_disjoint") == Some(&true), format!("trial {}: overlap", rep.trial))?;
        ensure(rep.checks.get("designated_floor") == Some(&true), format!("trial {}: floor violated", rep.trial))?;
        ensure(rep.victims == expected_victims, format!("trial {}: {} victims", rep.trial, rep.victims))?;
    }
    let fair = reports.iter().filter(|r| r.success).count();
    ensure(fair >= 90, format!("survivors all fair in only {fair}/100 trials"))?;
    Ok(format!("disjoint and floor certified in 100/100, victims = {expected_victims}, survivors fair in {fair}/100"))
}

fn failure_bound_arithmetic() -> Outcome {
    let at = |c: i64| rat(8192, c * c * (c - 32)) + rat(1024, c * c * c) + rat(128, c * c);
    let b128 = failure_bound(&int(128)).ok_or("undefined at 128")?;
    let b64 = failure_bound(&int(64)).ok_or("undefined at 64")?;
    ensure(b128 == at(128) && b64 == at(64), "library disagrees with the closed form")?;
    ensure(b128 < rat(1, 64), format!("bound(128) = {b128} not below 1/64"))?;
    ensure(simplified_failure_bound(&int(64)) == rat(1, 8), "2^9/64^2 != 1/8")?;
    ensure(b64 <= rat(1, 8), format!("bound(64) = {b64} above 1/8"))?;
    ensure(failure_bound(&int(32)).is_none(), "bound must be undefined at c = 32")?;
    Ok(format!("bound(128) = {b128} < 1/64, bound(64) = {b64} <= 1/8"))
}

fn fragment_accounting() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 256, failure_persistence: None, ..Config::default() });
    let strategy = (1usize..=8, proptest::collection::vec(0u64..=8, 1..8), 0u8..3, 0i64..=16);
    let result = runner.run(&strategy, |(k, mut weights, kind, num)| {
        if weights.iter().all(|&w| w == 0) {
            weights[0] = 1;
        }
        let inst = Instance::from_valuations(vec![Valuation::from_block_weights(&weights).unwrap()]).unwrap();
        let den = 2 * k as i64;
        let piece = PieceSet::new((0..k as i64).map(|i| Interval::new(rat(2 * i, den), rat(2 * i + 1, den)).unwrap()).collect())
            .unwrap();
        prop_assert_eq!(piece.fragment_count(), k);
        let query = match kind {
            0 => Query::EvalAll,
            1 => Query::EvalPrefix { x: piece.end().unwrap() * rat(num, 16) },
            _ => Query::Cut { alpha: rat(num, 16) },
        };
        let mut oracle = Oracle::new(&inst);
        oracle.fragmented_query(&piece, 0, query).unwrap();
        prop_assert_eq!(oracle.ledger().total(), k as u64);
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    for k in 1..=8usize {
        let inst = lib(Instance::from_valuations(vec![Valuation::uniform()]))?;
        let den = 2 * k as i64;
        let piece = lib(PieceSet::new((0..k as i64).map(|i| Interval::new(rat(2 * i, den), rat(2 * i + 1, den)).unwrap()).collect()))?;
        let mut oracle = Oracle::new(&inst);
        lib(oracle.eval_piece(&piece, 0))?;
        ensure(oracle.ledger().total() == k as u64, format!("a {k}-fragment eval was not charged {k}"))?;
    }
    Ok("256 random queries plus one per k in 1..=8, each charged exactly k".into())
}

fn reproducibility() -> Outcome {
    let config: SuiteConfig = serde_json::from_str(
        r#"{"master_seed": 31337, "scenarios": [
            {"name": "t1", "kind": "theorem1", "generator": {"kind": {"type": "mixture", "lo": "9/10", "hi": "1", "fraction": "1/5", "blocks": 4}, "n": 1270, "seed": 4}, "r": 1, "eps": "1/10", "t": "2", "trials": 20},
            {"name": "t2", "kind": "theorem2", "generator": {"kind": {"type": "adversarial", "profile": {"type": "concentrated_prefix", "count": 2}}, "n": 600}, "designated": [0, 1], "eps": "1/4", "t": "1", "scale": "1/64", "trials": 10},
            {"name": "dc", "kind": "dc", "generator": {"kind": {"type": "block_random", "blocks": 8}, "n": 30, "seed": 2}, "fragments": 3, "trials": 10},
            {"name": "lemma", "kind": "lemma1", "n": 127000, "eps": "1/5", "s": "127", "t": "2", "r": 200, "trials": 100}
        ]}"#,
    )
    .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut texts = Vec::new();
    for run in 0..2 {
        let out = lib(run_suite(&config))?;
        let path = dir.path().join(format!("run{run}"));
        lib(out.write(&path, true))?;
        texts.push((
            std::fs::read(path.join("report.json")).map_err(|e| e.to_string())?,
            std::fs::read(path.join("summary.csv")).map_err(|e| e.to_string())?,
        ));
    }
    ensure(texts[0].0 == texts[1].0, "report.json differs between runs")?;
    ensure(texts[0].1 == texts[1].1, "summary.csv differs between runs")?;
    Ok(format!("two runs, {} bytes of report JSON, identical", texts[0].0.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("DC exact proportionality", dc_proportionality),
        ("DC query complexity", dc_query_complexity),
        ("undesignated preassign is n-independent", undesignated_sublinearity),
        ("undesignated statistical floor", undesignated_statistical_floor),
        ("distinct-sampling checker", sampling_checker),
        ("condense halving", condense_halving),
        ("deposit politeness (desk profile)", politeness),
        ("designated end to end (desk profile)", designated_desk),
        ("approx-fair failure bound arithmetic", failure_bound_arithmetic),
        ("fragment accounting", fragment_accounting),
        ("suite reproducibility", reproducibility),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("acceptance {id:>2} PASS {name} [{secs:.1}s]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("acceptance {id:>2} FAIL {name} [{secs:.1}s]: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
