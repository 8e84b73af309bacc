use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use quorum::algos::{parse_algos, Algo, Runner, DEFAULT_MUS};
use quorum::competition::{prepare, query_seed, read_csv, run_competitions, write_csv, DSK_BEST};
use quorum::data::{gen_synthetic, ingest_qgrams, Dataset, Process, SyntheticSpec};
use quorum::format::{read_dataset, read_program, write_dataset, write_program};
use quorum::schedule::Schedule;
use quorum::timing::TimingConfig;
use quorum::Repr;
use quorum_core::circuit::{build, compile, execute, CircuitKind};
use quorum_core::{Bitmap, RleBitmap, UncompressedBitmap};

fn sample() -> Dataset {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/gettysburg.txt");
    ingest_qgrams("gettysburg", BufReader::new(File::open(path).unwrap()), 2).unwrap()
}

fn quick() -> TimingConfig {
    TimingConfig { min_ms: 0.0, max_reps: 1 }
}

#[test]
fn ingest_bundled_sample() {
    let d = sample();
    assert_eq!(d.name, "gettysburg-2gr");
    assert_eq!(d.r, 21);
    assert_eq!(d.sets.len(), d.labels.len());
    let th = d.labels.iter().position(|l| l == "th").unwrap();
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/gettysburg.txt")).unwrap();
    let with_th: Vec<u32> = text.lines().enumerate().filter(|(_, l)| l.contains("th")).map(|(i, _)| i as u32).collect();
    assert_eq!(d.sets[th], with_th);
    assert!(d.sets.iter().all(|s| s.windows(2).all(|w| w[0] < w[1]) && s.iter().all(|&p| p < d.r)));
}

#[test]
fn dataset_and_program_files() {
    let d = sample();
    let mut buf = Vec::new();
    write_dataset(&mut buf, &d).unwrap();
    assert_eq!(read_dataset(&mut buf.as_slice()).unwrap(), d);

    let p = compile(&build(CircuitKind::SidewaysSum, 12, 5).unwrap());
    let mut buf = Vec::new();
    write_program(&mut buf, &p).unwrap();
    let q = read_program(&mut buf.as_slice()).unwrap();
    let inputs: Vec<RleBitmap> = d.bitmaps(&(0..12).collect::<Vec<_>>()).unwrap();
    assert_eq!(execute(&q, &inputs).unwrap(), execute(&p, &inputs).unwrap());
    buf.truncate(buf.len() - 1);
    assert!(read_program(&mut buf.as_slice()).is_err());
}

#[test]
fn small_schedule_one_row_per_pair() {
    let datasets = vec![sample(), gen_synthetic(&SyntheticSpec::new(Process::Uniform, 3, 20_000)).unwrap()];
    let runner = Runner::new(None);
    let schedule = Schedule::small();
    let algos = parse_algos("scancount", &DEFAULT_MUS).unwrap();
    let rows = run_competitions(&runner, &schedule, &datasets, &algos, Repr::Rle, 1, &quick()).unwrap();
    assert_eq!(rows.len(), 25 * datasets.len());
    assert!(rows.iter().all(|r| r.rank == Some(0) && r.flags == "win"));

    let mut csv = Vec::new();
    write_csv(&mut csv, &rows).unwrap();
    let back = read_csv(csv.as_slice()).unwrap();
    assert_eq!(back.len(), rows.len());
    assert_eq!(
        back.iter().map(|r| (r.n, r.t)).collect::<Vec<_>>(),
        rows.iter().map(|r| (r.n, r.t)).collect::<Vec<_>>()
    );
}

#[test]
fn best_of_row_and_determinism() {
    let d = gen_synthetic(&SyntheticSpec::new(Process::Clustered, 1111, 30_000)).unwrap();
    let runner = Runner::new(None);
    let schedule = Schedule { name: "two".into(), pairs: vec![(8, 3), (16, 15)], rids: 1 };
    let algos = vec![Algo::MgSkip, Algo::DSkip(0.02), Algo::DSkip(0.1)];
    let rows = run_competitions(&runner, &schedule, std::slice::from_ref(&d), &algos, Repr::Uncompressed, 4, &quick())
        .unwrap();
    assert_eq!(rows.len(), 2 * 4);
    let best: Vec<_> = rows.iter().filter(|r| r.algorithm == DSK_BEST).collect();
    assert_eq!(best.len(), 2);
    assert!(best.iter().all(|r| r.flags.ends_with("bestof")));

    let a = prepare(&d, 1, 16, 15, query_seed(4, 16)).unwrap();
    let b = prepare(&d, 1, 16, 15, query_seed(4, 16)).unwrap();
    assert_eq!((a.seed, &a.ids, &a.expected), (b.seed, &b.ids, &b.expected));
    let inputs: Vec<UncompressedBitmap> = d.bitmaps(&a.ids).unwrap();
    assert_eq!(runner.run(Algo::Looped, &inputs, 15, d.r).unwrap().to_positions(), a.expected);
}
