//! Acceptance suite: one pass/fail line per criterion, non-zero exit on failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use quorum::algos::{Algo, Runner, DEFAULT_MUS};
use quorum::competition::{compare_rowscan, prepare, row_queries, run_competition, QueryFamily, DSK_BEST};
use quorum::data::{census_table, gen_synthetic, Process, SyntheticSpec};
use quorum::timing::TimingConfig;
use quorum::Repr;
use quorum_core::circuit::bitparallel::looped_threshold_counted;
use quorum_core::circuit::synth::{sideways_sum_bits, tree_adder_bits};
use quorum_core::circuit::tabulate::execute_padded;
use quorum_core::circuit::{
    build, build_geq_const, build_sideways_sum, build_sorter, build_tree_adder, compile, execute, optimize,
    CircuitBuilder, CircuitKind, Gate, OpCounter, PaddingPlan, Tabulation,
};
use quorum_core::oracle::brute_threshold;
use quorum_core::runmerge::{cdom_threshold_with, CdomConfig, CdomStats};
use quorum_core::{Bitmap, RleBitmap, UncompressedBitmap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Positions in `0..r` built from random segments of zeros, ones and noise.
fn random_set(rng: &mut ChaCha8Rng, r: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut at = 0;
    while at < r {
        let len = rng.random_range(1..=r.min(700));
        let end = (at + len).min(r);
        match rng.random_range(0..4) {
            0 => {}
            1 => out.extend(at..end),
            _ => {
                let d = rng.random_range(0.01..0.9);
                out.extend((at..end).filter(|_| rng.random_bool(d)));
            }
        }
        at = end;
    }
    out
}

fn to_u(sets: &[Vec<u32>], r: u32) -> Vec<UncompressedBitmap> {
    sets.iter().map(|s| UncompressedBitmap::from_positions(s, r).unwrap()).collect()
}

fn to_rle(sets: &[Vec<u32>], r: u32) -> Vec<RleBitmap> {
    sets.iter().map(|s| RleBitmap::from_positions(s, r).unwrap()).collect()
}

fn oracle_equivalence() -> Outcome {
    let runner = Runner::new(None);
    let algos = Algo::all(&DEFAULT_MUS);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut runs = 0u64;
    let mut capped = 0u64;
    for inst in 0..200 {
        let n = rng.random_range(2..=32usize);
        let r = rng.random_range(1..=4096u32);
        let t = rng.random_range(1..=n);
        let sets: Vec<Vec<u32>> = (0..n).map(|_| random_set(&mut rng, r)).collect();
        let want = brute_threshold(&sets, t, r).map_err(|e| e.to_string())?;
        let (u, c) = (to_u(&sets, r), to_rle(&sets, r));
        for &a in &algos {
            for repr in Repr::ALL {
                if !a.supports(repr, n, t) {
                    continue;
                }
                let got = match repr {
                    Repr::Uncompressed => runner.run(a, &u, t, r).map(|b| b.to_positions()),
                    Repr::Rle => runner.run(a, &c, t, r).map(|b| b.to_positions()),
                };
                // Sum-of-products circuits past the term cap refuse to build.
                let got = match got {
                    Err(quorum::Error::Core(quorum_core::Error::CircuitTooLarge { .. }))
                        if a == Algo::Circuit(CircuitKind::SumOfProducts) =>
                    {
                        capped += 1;
                        continue;
                    }
                    g => g.map_err(|e| format!("{a} {repr} instance {inst}: {e}"))?,
                };
                check(got == want, || format!("{a} {repr} instance {inst} (N={n}, T={t}, r={r}) differs"))?;
                runs += 1;
            }
        }
    }
    Ok(format!(
        "200 instances, {runs} runs over {} algorithms agree; {capped} sopckt runs over the term cap",
        algos.len()
    ))
}

const LARGE_ROWS: [(usize, usize, usize, usize, usize); 8] = [
    (43, 30, 272, 192, 480),
    (85, 12, 562, 398, 1216),
    (120, 105, 806, 580, 1907),
    (323, 14, 2226, 1586, 7518),
    (329, 138, 2272, 1620, 9052),
    (330, 324, 2275, 1623, 7549),
    (786, 481, 5467, 3905, 28945),
    (786, 776, 5461, 3899, 24233),
];

fn gate_counts() -> Outcome {
    let sort = |n: usize| (1..n).map(|t| build_sorter(n, t).unwrap().gate_count()).collect::<Vec<_>>();
    check(sort(4) == [3, 7, 7], || format!("sorter N=4: {:?}", sort(4)))?;
    check(sort(5) == [12, 12, 12, 12], || format!("sorter N=5: {:?}", sort(5)))?;
    let looped = |n: usize| {
        let inputs: Vec<RleBitmap> = (0..n).map(|_| RleBitmap::empty(64)).collect();
        (1..n)
            .map(|t| {
                let mut ops = OpCounter::default();
                looped_threshold_counted(&inputs, t, &mut ops).unwrap();
                ops.ops
            })
            .collect::<Vec<_>>()
    };
    check(looped(4) == [3, 9, 13], || format!("loop N=4: {:?}", looped(4)))?;
    check(looped(5) == [4, 12, 18, 22], || format!("loop N=5: {:?}", looped(5)))?;
    for (n, t, tree, ssum, sorter) in LARGE_ROWS {
        let got = (
            build_tree_adder(n, t).unwrap().gate_count(),
            build_sideways_sum(n, t).unwrap().gate_count(),
            build_sorter(n, t).unwrap().gate_count(),
        );
        check(got == (tree, ssum, sorter), || format!("N={n} T={t}: {got:?}, want {:?}", (tree, ssum, sorter)))?;
    }
    Ok("small sorter and loop rows and all eight large rows match".into())
}

fn weight_gates(f: fn(&mut CircuitBuilder, &[u32]) -> Vec<u32>, n: usize) -> usize {
    let mut b = CircuitBuilder::new(n);
    let xs = b.inputs().to_vec();
    f(&mut b, &xs);
    b.finish(0).gates().iter().filter(|g| matches!(g, Gate::Binary(..) | Gate::Not(_))).count()
}

fn weight_formulas() -> Outcome {
    let ns = [2usize, 4, 8, 16, 32];
    let c: Vec<usize> = ns.iter().map(|&n| weight_gates(tree_adder_bits, n)).collect();
    let formula: Vec<usize> = ns.iter().map(|&n| 7 * n - 5 * n.trailing_zeros() as usize - 7).collect();
    check(c == formula && c == [2, 11, 34, 85, 192], || format!("tree adder {c:?}, formula {formula:?}"))?;
    let s: Vec<usize> = ns.iter().map(|&n| weight_gates(sideways_sum_bits, n)).collect();
    check(s == [2, 9, 26, 63, 140], || format!("sideways sum {s:?}"))?;
    Ok(format!("c = {c:?}, s = {s:?}"))
}

fn looped_count() -> Outcome {
    let mut pairs = 0;
    for n in 3..=64usize {
        let inputs: Vec<RleBitmap> = (0..n).map(|_| RleBitmap::empty(64)).collect();
        for t in 2..n {
            let mut ops = OpCounter::default();
            looped_threshold_counted(&inputs, t, &mut ops).unwrap();
            let (ni, ti) = (n as i64, t as i64);
            let want = 2 * ni * ti - ni - ti * ti + ti - 1;
            check(ops.ops as i64 == want, || format!("N={n} T={t}: {} ops, want {want}", ops.ops))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (N, T) pairs"))
}

fn comparator() -> Outcome {
    let n = 10;
    let mut results = Vec::new();
    for (a, want) in [(0b0010100111u64, 8usize), (0b0111111111, 0), (0b1000000000, 2 * n - 3)] {
        let mut b = CircuitBuilder::new(n);
        let bits = b.inputs().to_vec();
        let out = build_geq_const(&mut b, &bits, a + 1);
        let c = optimize(&b.finish(out));
        let got = c.gate_count();
        check(got == want, || format!("T-1 = {a:010b}: {got} operations, want {want}"))?;
        for w in 0..1u64 << n {
            let words: Vec<u64> = (0..n).map(|i| if w >> i & 1 == 1 { !0 } else { 0 }).collect();
            let bit = c.eval_words(&words) & 1 == 1;
            check(bit == (w > a), || format!("T-1 = {a:010b} wrong at {w}"))?;
        }
        results.push(got);
    }
    Ok(format!("operation counts {results:?}"))
}

fn padding_rule() -> Outcome {
    let plan = PaddingPlan { n: 16, t: 8, zero_pads: 5, one_pads: 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for kind in CircuitKind::ALL {
        let p = Tabulation::new(kind, 16).program(16, 8).map_err(|e| e.to_string())?.clone();
        for i in 0..50 {
            let r = rng.random_range(1..=2048u32);
            let sets: Vec<Vec<u32>> = (0..10).map(|_| random_set(&mut rng, r)).collect();
            let want = brute_threshold(&sets, 7, r).unwrap();
            let u = execute_padded(&p, &plan, &to_u(&sets, r)).map_err(|e| e.to_string())?;
            let c = execute_padded(&p, &plan, &to_rle(&sets, r)).map_err(|e| e.to_string())?;
            check(u.to_positions() == want, || format!("{kind:?} uncompressed instance {i}"))?;
            check(c.to_positions() == want, || format!("{kind:?} run-length instance {i}"))?;
        }
    }
    Ok("50 instances per builder, both representations".into())
}

fn pattern(rng: &mut ChaCha8Rng, k: usize, len: u32) -> Vec<u32> {
    match k {
        0 => Vec::new(),
        1 => (0..len).collect(),
        2 => (0..len).step_by(2).collect(),
        3 => (1..len).step_by(2).collect(),
        4 => (0..len).filter(|p| p / 64 % 2 == 0).collect(),
        5 => (0..len).filter(|_| rng.random_bool(0.02)).collect(),
        6 => (0..len).filter(|_| rng.random_bool(0.97)).collect(),
        _ => random_set(rng, len),
    }
}

fn roundtrip_and_cross_representation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lens = [0u32, 1, 63, 64, 65, 127, 128, 129, 1000, 4096, 10_000];
    let mut bitmaps = 0;
    let mut specials = [0usize; 3];
    for g in 0..100 {
        let len = if g < lens.len() { lens[g] } else { rng.random_range(1..=20_000) };
        let sets: Vec<Vec<u32>> = (0..5)
            .map(|i| {
                let k = if g < 8 { (g + i) % 8 } else { rng.random_range(0..8) };
                if k < 3 {
                    specials[k] += 1;
                }
                pattern(&mut rng, k, len)
            })
            .collect();
        let u = to_u(&sets, len);
        let c: Vec<RleBitmap> = u.iter().map(RleBitmap::compress).collect();
        for (s, (ub, cb)) in sets.iter().zip(u.iter().zip(&c)) {
            check(cb.decompress() == *ub && cb.to_positions() == *s, || format!("roundtrip group {g} len {len}"))?;
            bitmaps += 1;
        }
        let kind = CircuitKind::ALL[g % 4];
        let t = rng.random_range(1..=5);
        let p = compile(&build(kind, 5, t).map_err(|e| e.to_string())?);
        let eu = execute(&p, &u).map_err(|e| e.to_string())?;
        let ec = execute(&p, &c).map_err(|e| e.to_string())?;
        check(ec.decompress() == eu, || format!("{kind:?} T={t} group {g}: representations disagree"))?;
        check(eu.to_positions() == brute_threshold(&sets, t, len).unwrap(), || format!("{kind:?} group {g}"))?;
    }
    Ok(format!("{bitmaps} bitmaps ({} all-zero, {} all-one, {} alternating)", specials[0], specials[1], specials[2]))
}

/// Fraction of repetitions in which an ordering must hold.
const REPS: usize = 5;
const NEEDED: usize = 4;

fn performance_ordering() -> Outcome {
    let timing = TimingConfig { min_ms: 250.0, ..TimingConfig::default() };
    let mut census = 0;
    let mut census_detail = Vec::new();
    for rep in 0..REPS {
        let table = census_table(10_000, 42, rep as u64 + 1);
        let qs = row_queries(&table, QueryFamily::RandomAttributes, 30, rep as u64 + 1);
        let res = compare_rowscan(&table, &qs, &timing).map_err(|e| e.to_string())?;
        let ms = |m: &str| res.iter().find(|r| r.method == m).map(|r| r.ms).unwrap();
        let rows = ms("rowscan");
        let worst = ms("scancount-uncompressed").max(ms("scancount-ewah"));
        if rows >= 1.5 * worst {
            census += 1;
        }
        census_detail.push(format!("{:.1}x", rows / worst));
    }

    let d = gen_synthetic(&SyntheticSpec::new(Process::Clustered, 1111, 30_000)).map_err(|e| e.to_string())?;
    let runner = Runner::new(None);
    let mut algos = vec![Algo::Looped];
    algos.extend(DEFAULT_MUS.iter().map(|&m| Algo::DSkip(m)));
    let mut wins = [0usize; 2];
    let mut detail = [Vec::new(), Vec::new()];
    for rep in 0..REPS {
        for (i, t) in [31usize, 3].into_iter().enumerate() {
            let p = prepare(&d, 1, 32, t, rep as u64 + 1).map_err(|e| e.to_string())?;
            let rows = run_competition::<RleBitmap>(&runner, &d, &p, t, &algos, &timing).map_err(|e| e.to_string())?;
            let ms = |a: &str| rows.iter().find(|r| r.algorithm == a).and_then(|r| r.ms_per_exec).unwrap_or(f64::MAX);
            let (looped, dsk) = (ms("looped"), ms(DSK_BEST));
            let holds = if t == 31 { dsk < looped } else { looped < dsk };
            if holds {
                wins[i] += 1;
            }
            detail[i].push(format!("{looped:.3}/{dsk:.3}"));
        }
    }
    let summary = format!(
        "rowscan/scancount {} in {census}/{REPS}; T=31 looped/dsk ms {} in {}/{REPS}; T=3 {} in {}/{REPS}",
        census_detail.join(" "),
        detail[0].join(" "),
        wins[0],
        detail[1].join(" "),
        wins[1]
    );
    check(census >= NEEDED && wins[0] >= NEEDED && wins[1] >= NEEDED, || summary.clone())?;
    Ok(summary)
}

fn cdom_segments() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = CdomConfig::default();
    let mut max_ratio = 0.0f64;
    for inst in 0..200 {
        let n = rng.random_range(2..=32usize);
        let r = rng.random_range(1..=8192u32);
        let t = rng.random_range(1..=n);
        let sets: Vec<Vec<u32>> = (0..n).map(|_| random_set(&mut rng, r)).collect();
        let inputs = to_rle(&sets, r);
        let mut st = CdomStats::default();
        let out = cdom_threshold_with(&inputs, t, &cfg, Some(&mut st)).map_err(|e| e.to_string())?;
        check(out.to_positions() == brute_threshold(&sets, t, r).unwrap(), || format!("instance {inst} wrong"))?;
        let runs: u64 = inputs.iter().map(|b| b.run_count()).sum();
        check(st.heap_pops <= runs, || format!("instance {inst}: {} pops, {runs} runs", st.heap_pops))?;
        max_ratio = max_ratio.max(st.heap_pops as f64 / runs as f64);
    }
    // Word-aligned inputs, each a run of ones then a run of zeros.
    for inst in 0..50 {
        let n = rng.random_range(2..=32usize);
        let words = rng.random_range(1..=64u32);
        let r = words * 64;
        let t = rng.random_range(1..=n);
        let sets: Vec<Vec<u32>> = (0..n).map(|_| (0..rng.random_range(0..=words) * 64).collect()).collect();
        let mut st = CdomStats::default();
        let out = cdom_threshold_with(&to_rle(&sets, r), t, &cfg, Some(&mut st)).map_err(|e| e.to_string())?;
        check(out.to_positions() == brute_threshold(&sets, t, r).unwrap(), || format!("clean instance {inst} wrong"))?;
        check(st.segments <= n as u64 + 1, || format!("clean instance {inst}: {} segments, N={n}", st.segments))?;
    }
    Ok(format!("200 instances, heap pops at most {:.2} of RunCount; 50 clean instances within N+1", max_ratio))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("gate-count tables", gate_counts),
        ("weight-circuit formulas", weight_formulas),
        ("looped operation count", looped_count),
        ("comparator example", comparator),
        ("padding rule", padding_rule),
        ("roundtrip and cross-representation", roundtrip_and_cross_representation),
        ("performance ordering", performance_ordering),
        ("cdom segment bound", cdom_segments),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {} ({name}): PASS - {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL - {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
