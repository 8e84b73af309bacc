//! Competitions: verify every algorithm on a query, then time and rank them.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use quorum_core::oracle::{brute_threshold, rowscan, Criterion};
use quorum_core::{Bitmap, RleBitmap, UncompressedBitmap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algos::{Algo, Input, Runner};
use crate::data::{Dataset, Table};
use crate::query::make_similarity;
use crate::schedule::Schedule;
use crate::timing::{time_adaptive, TimingConfig};
use crate::{Error, Repr, Result};

/// Name of the row holding the fastest DivideSkip time of a competition.
pub const DSK_BEST: &str = "dsk-best";

pub const CSV_HEADER: [&str; 10] =
    ["dataset", "algorithm", "N", "T", "seed", "reps", "total_ms", "ms_per_exec", "rank", "flags"];

/// One algorithm's outcome in one competition. A failed run (for example a
/// circuit over the size cap) has no times and the flag `dnf`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub algorithm: String,
    pub n: usize,
    pub t: usize,
    pub seed: u64,
    pub reps: u64,
    pub total_ms: Option<f64>,
    pub ms_per_exec: Option<f64>,
    pub rank: Option<usize>,
    pub flags: String,
}

/// The strongest applicable label for a time relative to the fastest:
/// `win`, `le50`, `le100`, `terrible` (at least ten times as long) or none.
pub fn flag_for(ms: f64, best: f64) -> &'static str {
    if ms <= best {
        "win"
    } else if ms <= 1.5 * best {
        "le50"
    } else if ms <= 2.0 * best {
        "le100"
    } else if ms >= 10.0 * best {
        "terrible"
    } else {
        ""
    }
}

/// Ranks (0 = fastest; ties keep input order) and flags for a list of times.
pub fn rank(times: &[f64]) -> Vec<(usize, &'static str)> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let best = order.first().map_or(0.0, |&i| times[i]);
    let mut out = vec![(0, ""); times.len()];
    for (r, &i) in order.iter().enumerate() {
        out[i] = (r, flag_for(times[i], best));
    }
    out
}

/// Seed for the query of size `n` in a run seeded with `seed`.
pub fn query_seed(seed: u64, n: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(n as u64)
}

/// The sets a competition uses, as the oracle sees them, and its answer.
pub struct Prepared {
    pub seed: u64,
    pub ids: Vec<usize>,
    pub expected: Vec<u32>,
}

pub fn prepare(d: &Dataset, rids: usize, n: usize, t: usize, seed: u64) -> Result<Prepared> {
    let q = make_similarity(d, rids, n, seed)?;
    let sets: Vec<Vec<u32>> = q.ids.iter().map(|&i| d.sets[i].clone()).collect();
    let expected = brute_threshold(&sets, t, d.r)?;
    Ok(Prepared { seed: q.seed, ids: q.ids, expected })
}

/// Runs every supported algorithm once and compares it with the oracle.
/// Returns, per algorithm, `Ok(())` or the error that stopped it; a wrong
/// answer aborts with [`Error::Mismatch`].
pub fn verify<B: Input>(
    runner: &Runner,
    d: &Dataset,
    p: &Prepared,
    t: usize,
    algos: &[Algo],
) -> Result<Vec<(Algo, std::result::Result<(), String>)>> {
    let inputs: Vec<B> = d.bitmaps(&p.ids)?;
    let mut out = Vec::new();
    for &a in algos.iter().filter(|a| a.supports(B::REPR, p.ids.len(), t)) {
        match runner.run(a, &inputs, t, d.r) {
            Ok(res) if res.to_positions() == p.expected => out.push((a, Ok(()))),
            Ok(_) => {
                return Err(Error::Mismatch {
                    algorithm: a.name(),
                    dataset: d.name.clone(),
                    n: p.ids.len(),
                    t,
                    seed: p.seed,
                })
            }
            Err(e) => out.push((a, Err(e.to_string()))),
        }
    }
    Ok(out)
}

/// One competition: verify, then time each algorithm that produced the right answer.
pub fn run_competition<B: Input>(
    runner: &Runner,
    d: &Dataset,
    p: &Prepared,
    t: usize,
    algos: &[Algo],
    timing: &TimingConfig,
) -> Result<Vec<ResultRow>> {
    let checked = verify::<B>(runner, d, p, t, algos)?;
    let inputs: Vec<B> = d.bitmaps(&p.ids)?;
    let row = |algorithm: String| ResultRow {
        dataset: d.name.clone(),
        algorithm,
        n: p.ids.len(),
        t,
        seed: p.seed,
        reps: 0,
        total_ms: None,
        ms_per_exec: None,
        rank: None,
        flags: "dnf".into(),
    };
    let mut rows = Vec::new();
    let mut best_dsk: Option<(u64, f64, f64)> = None;
    for (a, status) in checked {
        let mut r = row(a.name());
        if status.is_ok() {
            let tm = time_adaptive(timing, || runner.run(a, &inputs, t, d.r));
            r.reps = tm.reps;
            r.total_ms = Some(tm.total_ms);
            r.ms_per_exec = Some(tm.ms_per_exec());
            r.flags.clear();
            if matches!(a, Algo::DSkip(_)) && best_dsk.is_none_or(|b| tm.ms_per_exec() < b.2) {
                best_dsk = Some((tm.reps, tm.total_ms, tm.ms_per_exec()));
            }
        }
        rows.push(r);
    }
    if let Some((reps, total, per)) = best_dsk {
        let mut r = row(DSK_BEST.into());
        r.reps = reps;
        r.total_ms = Some(total);
        r.ms_per_exec = Some(per);
        r.flags = "bestof".into();
        rows.push(r);
    }
    let timed: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].ms_per_exec.is_some()).collect();
    let times: Vec<f64> = timed.iter().map(|&i| rows[i].ms_per_exec.unwrap_or(0.0)).collect();
    for (&i, (rk, flag)) in timed.iter().zip(rank(&times)) {
        let r = &mut rows[i];
        r.rank = Some(rk);
        r.flags = [flag, r.flags.as_str()].iter().filter(|s| !s.is_empty()).copied().collect::<Vec<_>>().join(";");
    }
    Ok(rows)
}

/// Every pair of `schedule` on every dataset, in order.
pub fn run_competitions(
    runner: &Runner,
    schedule: &Schedule,
    datasets: &[Dataset],
    algos: &[Algo],
    repr: Repr,
    seed: u64,
    timing: &TimingConfig,
) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for d in datasets {
        for &(n, t) in &schedule.pairs {
            let p = prepare(d, schedule.rids, n, t, query_seed(seed, n))?;
            rows.extend(match repr {
                Repr::Uncompressed => run_competition::<UncompressedBitmap>(runner, d, &p, t, algos, timing)?,
                Repr::Rle => run_competition::<RleBitmap>(runner, d, &p, t, algos, timing)?,
            });
        }
    }
    Ok(rows)
}

fn opt_f64(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.6}"))
}

pub fn write_csv(w: impl Write, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.algorithm.clone(),
            r.n.to_string(),
            r.t.to_string(),
            r.seed.to_string(),
            r.reps.to_string(),
            opt_f64(r.total_ms),
            opt_f64(r.ms_per_exec),
            r.rank.map_or(String::new(), |x| x.to_string()),
            r.flags.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(r: impl Read) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(r);
    if rd.headers()?.iter().ne(CSV_HEADER) {
        return Err(Error::Format("unexpected results header".into()));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let bad =
            |f: &str| Error::Format(format!("bad {f} field in results line {:?}", rec.position().map(|p| p.line())));
        let num = |i: usize, f: &str| rec[i].parse::<u64>().map_err(|_| bad(f));
        let opt = |i: usize, f: &str| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                rec[i].parse().map(Some).map_err(|_| bad(f))
            }
        };
        rows.push(ResultRow {
            dataset: rec[0].to_string(),
            algorithm: rec[1].to_string(),
            n: num(2, "N")? as usize,
            t: num(3, "T")? as usize,
            seed: num(4, "seed")?,
            reps: num(5, "reps")?,
            total_ms: opt(6, "total_ms")?,
            ms_per_exec: opt(7, "ms_per_exec")?,
            rank: if rec[8].is_empty() { None } else { Some(num(8, "rank")? as usize) },
            flags: rec[9].to_string(),
        });
    }
    Ok(rows)
}

/// Per-algorithm sums of time divided by the fastest algorithm's time, one
/// term per dataset. An algorithm lacking a time for some competition of a
/// dataset gets no term for it and is listed in `dnf`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Workload {
    pub totals: BTreeMap<String, f64>,
    pub dnf: Vec<(String, String)>,
}

pub fn normalized_workload(rows: &[ResultRow]) -> Result<Workload> {
    let algos: BTreeSet<&str> = rows.iter().map(|r| r.algorithm.as_str()).collect();
    let datasets: BTreeSet<&str> = rows.iter().map(|r| r.dataset.as_str()).collect();
    let mut w = Workload::default();
    for d in datasets {
        let comps: BTreeSet<(usize, usize, u64)> =
            rows.iter().filter(|r| r.dataset == d).map(|r| (r.n, r.t, r.seed)).collect();
        let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
        for &a in &algos {
            let times: Vec<f64> = comps
                .iter()
                .filter_map(|c| {
                    rows.iter()
                        .find(|r| r.dataset == d && r.algorithm == a && (r.n, r.t, r.seed) == *c)
                        .and_then(|r| r.ms_per_exec)
                })
                .collect();
            if times.len() == comps.len() {
                sums.insert(a, times.iter().sum());
            } else {
                w.dnf.push((d.to_string(), a.to_string()));
            }
        }
        let best = sums.values().copied().fold(f64::INFINITY, f64::min);
        if sums.is_empty() {
            continue;
        }
        if best.is_nan() || best <= 0.0 {
            return Err(Error::Input(format!("fastest time on {d} is not positive")));
        }
        for (a, s) in sums {
            *w.totals.entry(a.to_string()).or_default() += s / best;
        }
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueryFamily {
    /// One random value of every attribute.
    RandomAttributes,
    /// The values of one random row.
    Similarity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowQuery {
    pub family: QueryFamily,
    pub criteria: Vec<Criterion>,
    pub t: usize,
}

/// `count` queries of one family over `table`, with `T` uniform in `2..attrs`.
pub fn row_queries(table: &Table, family: QueryFamily, count: usize, seed: u64) -> Vec<RowQuery> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attrs = table.table.attrs();
    (0..count)
        .map(|_| {
            let criteria = match family {
                QueryFamily::RandomAttributes => {
                    (0..attrs).map(|a| Criterion { attr: a, value: rng.random_range(0..table.domains[a]) }).collect()
                }
                QueryFamily::Similarity => {
                    let row = table.table.row(rng.random_range(0..table.table.rows()));
                    row.iter().enumerate().map(|(a, &v)| Criterion { attr: a, value: v }).collect()
                }
            };
            RowQuery { family, criteria, t: rng.random_range(2..attrs.max(3)) }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowscanTiming {
    pub family: QueryFamily,
    pub method: &'static str,
    /// Time for the whole query set.
    pub ms: f64,
}

/// Times a table scan against ScanCount over a bitmap index on both
/// representations, after checking that all three agree. Index bitmaps are
/// built before timing starts.
pub fn compare_rowscan(table: &Table, queries: &[RowQuery], timing: &TimingConfig) -> Result<Vec<RowscanTiming>> {
    let r = table.table.rows() as u32;
    let index = |q: &RowQuery| -> Result<(Vec<UncompressedBitmap>, Vec<RleBitmap>)> {
        let u: Vec<UncompressedBitmap> =
            q.criteria.iter().map(|&c| table.table.criterion_bitmap(c)).collect::<quorum_core::Result<_>>()?;
        let c = u.iter().map(RleBitmap::compress).collect();
        Ok((u, c))
    };
    let mut out = Vec::new();
    for fam in [QueryFamily::RandomAttributes, QueryFamily::Similarity] {
        let qs: Vec<&RowQuery> = queries.iter().filter(|q| q.family == fam).collect();
        if qs.is_empty() {
            continue;
        }
        let idx: Vec<_> = qs.iter().map(|q| index(q)).collect::<Result<_>>()?;
        for (q, (u, c)) in qs.iter().zip(&idx) {
            let expect = rowscan(&table.table, &q.criteria, q.t)?;
            let su = quorum_core::counter::scan_count(u, q.t, r)?;
            let sc = quorum_core::counter::scan_count(c, q.t, r)?;
            if su.to_positions() != expect || sc.to_positions() != expect {
                return Err(Error::Mismatch {
                    algorithm: "scancount".into(),
                    dataset: "row table".into(),
                    n: q.criteria.len(),
                    t: q.t,
                    seed: 0,
                });
            }
        }
        let rows = time_adaptive(timing, || {
            qs.iter().map(|q| rowscan(&table.table, &q.criteria, q.t).map(|v| v.len()).unwrap_or(0)).sum::<usize>()
        });
        let bitset = time_adaptive(timing, || {
            qs.iter()
                .zip(&idx)
                .map(|(q, (u, _))| quorum_core::counter::scan_count(u, q.t, r).map(|b| b.cardinality()).unwrap_or(0))
                .sum::<u64>()
        });
        let ewah = time_adaptive(timing, || {
            qs.iter()
                .zip(&idx)
                .map(|(q, (_, c))| quorum_core::counter::scan_count(c, q.t, r).map(|b| b.cardinality()).unwrap_or(0))
                .sum::<u64>()
        });
        out.push(RowscanTiming { family: fam, method: "rowscan", ms: rows.ms_per_exec() });
        out.push(RowscanTiming { family: fam, method: "scancount-uncompressed", ms: bitset.ms_per_exec() });
        out.push(RowscanTiming { family: fam, method: "scancount-ewah", ms: ewah.ms_per_exec() });
    }
    Ok(out)
}
