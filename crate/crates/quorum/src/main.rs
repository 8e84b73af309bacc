use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use quorum::algos::{parse_algos, Runner, DEFAULT_MUS};
use quorum::competition::{normalized_workload, prepare, query_seed, run_competitions, verify, write_csv};
use quorum::data::{gen_synthetic, ingest_qgrams, Dataset, Process, SyntheticSpec};
use quorum::format::{read_dataset, read_program, read_sets, write_dataset, write_sets};
use quorum::schedule::{read_schedule, Schedule};
use quorum::timing::TimingConfig;
use quorum::Repr;
use quorum_core::circuit::{build, compile, CircuitKind};
use quorum_core::{RleBitmap, UncompressedBitmap};

#[derive(Parser)]
#[command(name = "quorum", version, about = "Threshold queries over bitmap indexes: data, benchmarks and circuits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset.
    Gen {
        #[arg(long, default_value = "clustered")]
        process: Process,
        #[arg(long, default_value_t = 1111)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        card: u32,
        #[arg(long, default_value_t = 30_000)]
        r: u32,
        #[arg(long, default_value_t = 200)]
        sets: usize,
        /// Clustered only: budgets at or below this become one dense run.
        #[arg(long, default_value_t = 32)]
        leaf: u32,
        /// Write a comma-separated set list instead of the binary dataset.
        #[arg(long)]
        text: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a q-gram dataset from a text file, one record per line.
    Ingest {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run competitions and write a results CSV.
    Run {
        #[command(flatten)]
        sel: Selection,
        /// Minimum milliseconds per timed batch.
        #[arg(long, default_value_t = 1000.0)]
        min_ms: f64,
        /// Results CSV (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every algorithm against the oracle without timing.
    Verify {
        #[command(flatten)]
        sel: Selection,
    },
    /// Emit or inspect compiled threshold programs.
    Circuits {
        #[command(subcommand)]
        cmd: CircuitCmd,
    },
}

#[derive(clap::Args)]
struct Selection {
    /// Dataset files (binary datasets or comma-separated set lists).
    #[arg(long = "data", required = true)]
    data: Vec<PathBuf>,
    /// small, medium, large, or a file of `N,T` lines.
    #[arg(long, default_value = "small")]
    schedule: String,
    /// Comma-separated algorithm names, `dsk`, `dsk-<mu>` or `all`.
    #[arg(long, default_value = "all")]
    algos: String,
    #[arg(long, default_value = "ewah")]
    repr: Repr,
    /// DivideSkip tuning values.
    #[arg(long, value_delimiter = ',')]
    mu: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Keep compiled programs in this directory between runs.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CircuitCmd {
    /// Print gate and program statistics, optionally as C-like source.
    Show {
        #[arg(long, default_value = "ssum")]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        source: bool,
    },
    /// Compile the tabulated library for `N` in 2, 4, ... up to `n_max` into a directory.
    Emit {
        #[arg(long, default_value = "ssum")]
        kind: String,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        dir: PathBuf,
    },
    /// Describe a serialized program file.
    Inspect { file: PathBuf },
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Gen { process, seed, card, r, sets, leaf, text, out } => {
            let spec = SyntheticSpec { process, seed, cardinality: card, r, sets, cluster_leaf: leaf };
            let d = gen_synthetic(&spec)?;
            let mut w = BufWriter::new(File::create(&out).with_context(|| format!("creating {}", out.display()))?);
            if text {
                write_sets(&mut w, &d.sets)?;
            } else {
                write_dataset(&mut w, &d)?;
            }
            w.flush()?;
            eprintln!("{}: {} sets, density {:.4}", d.name, d.sets.len(), d.density());
        }
        Cmd::Ingest { input, q, out } => {
            let f = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let stem = input.file_stem().map_or("corpus".into(), |s| s.to_string_lossy().into_owned());
            let d = ingest_qgrams(&stem, BufReader::new(f), q)?;
            let mut w = BufWriter::new(File::create(&out).with_context(|| format!("creating {}", out.display()))?);
            write_dataset(&mut w, &d)?;
            w.flush()?;
            eprintln!("{}: {} records, {} grams, density {:.2e}", d.name, d.r, d.sets.len(), d.density());
        }
        Cmd::Run { sel, min_ms, out } => {
            let (datasets, schedule, algos) = load(&sel)?;
            let runner = Runner::new(sel.cache_dir.as_deref());
            let timing = TimingConfig { min_ms, ..TimingConfig::default() };
            let rows = run_competitions(&runner, &schedule, &datasets, &algos, sel.repr, sel.seed, &timing)?;
            match out {
                Some(p) => write_csv(BufWriter::new(File::create(&p)?), &rows)?,
                None => write_csv(io::stdout().lock(), &rows)?,
            }
            let w = normalized_workload(&rows)?;
            let mut totals: Vec<_> = w.totals.into_iter().collect();
            totals.sort_by(|a, b| a.1.total_cmp(&b.1));
            eprintln!("normalized workload over {} dataset(s):", datasets.len());
            for (a, s) in totals {
                eprintln!("  {a:<12} {s:>10.2}");
            }
            for (d, a) in w.dnf {
                eprintln!("  warning: {a} did not finish every competition on {d}");
            }
        }
        Cmd::Verify { sel } => {
            let (datasets, schedule, algos) = load(&sel)?;
            let runner = Runner::new(sel.cache_dir.as_deref());
            for d in &datasets {
                for &(n, t) in &schedule.pairs {
                    let p = prepare(d, schedule.rids, n, t, query_seed(sel.seed, n))?;
                    let res = match sel.repr {
                        Repr::Uncompressed => verify::<UncompressedBitmap>(&runner, d, &p, t, &algos)?,
                        Repr::Rle => verify::<RleBitmap>(&runner, d, &p, t, &algos)?,
                    };
                    let ok = res.iter().filter(|r| r.1.is_ok()).count();
                    println!("{} N={n} T={t}: {ok}/{} agree with the oracle", d.name, res.len());
                    for (a, e) in res.iter().filter_map(|(a, r)| r.as_ref().err().map(|e| (a, e))) {
                        println!("  {a}: did not finish: {e}");
                    }
                }
            }
        }
        Cmd::Circuits { cmd } => circuits(cmd)?,
    }
    Ok(())
}

fn load(sel: &Selection) -> Result<(Vec<Dataset>, Schedule, Vec<quorum::algos::Algo>)> {
    let datasets = sel.data.iter().map(|p| load_dataset(p)).collect::<Result<Vec<_>>>()?;
    let schedule = match Schedule::by_name(&sel.schedule) {
        Some(s) => s,
        None => {
            let f = File::open(&sel.schedule).with_context(|| format!("schedule {}", sel.schedule))?;
            read_schedule(&sel.schedule, BufReader::new(f), 1)?
        }
    };
    let mus = if sel.mu.is_empty() { DEFAULT_MUS.to_vec() } else { sel.mu.clone() };
    let algos = parse_algos(&sel.algos, &mus)?;
    if algos.is_empty() {
        bail!("no algorithms selected");
    }
    Ok((datasets, schedule, algos))
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let mut bytes = Vec::new();
    File::open(path).with_context(|| format!("opening {}", path.display()))?.read_to_end(&mut bytes)?;
    if bytes.starts_with(b"QDS1") {
        return Ok(read_dataset(&mut bytes.as_slice())?);
    }
    let sets = read_sets(bytes.as_slice())?;
    let r = sets.iter().filter_map(|s| s.last()).max().map_or(0, |&m| m + 1);
    Ok(Dataset { name: path.display().to_string(), r, sets, labels: Vec::new() })
}

fn kind(name: &str) -> Result<CircuitKind> {
    CircuitKind::from_name(name).with_context(|| format!("unknown circuit kind `{name}` (sop, sorter, tree, ssum)"))
}

fn circuits(cmd: CircuitCmd) -> Result<()> {
    match cmd {
        CircuitCmd::Show { kind: k, n, t, source } => {
            let c = build(kind(&k)?, n, t)?;
            let p = compile(&c);
            println!("{k} N={n} T={t}: {} gates, {} slots, peak {} live", c.gate_count(), p.slots(), p.peak_live());
            if source {
                print!("{}", p.to_c_source(&format!("{k}_{n}_{t}")));
            }
        }
        CircuitCmd::Emit { kind: k, n_max, dir } => {
            let cache = quorum::cache::ProgramCache::new(kind(&k)?, n_max, Some(&dir));
            let lib = quorum_core::circuit::Tabulation::new(kind(&k)?, n_max).library();
            for &(n, t) in &lib {
                if let Err(e) = cache.program(n, t) {
                    eprintln!("skipping ({n}, {t}): {e}");
                }
            }
            eprintln!("{} programs in {}", lib.len(), dir.display());
        }
        CircuitCmd::Inspect { file } => {
            let p = read_program(&mut BufReader::new(File::open(&file)?))?;
            println!(
                "arity {}, {} slots, result in slot {}, {} operations, peak {} live",
                p.arity(),
                p.slots(),
                p.result(),
                p.op_count(),
                p.peak_live()
            );
        }
    }
    Ok(())
}
