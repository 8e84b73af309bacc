use std::path::Path;
use std::process::{Command, Output};

fn quorum(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_quorum")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_verify_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("clustered.qds");
    let text = dir.path().join("uniform.txt");
    let csv = dir.path().join("out.csv");
    let sched = dir.path().join("sched.txt");
    std::fs::write(&sched, "# N,T\n4,2\n8,7\n").unwrap();

    quorum(&["gen", "--r", "20000", "--card", "3000", "--sets", "60", "--out", path(&data)]);
    quorum(&[
        "gen",
        "--process",
        "uniform",
        "--r",
        "5000",
        "--card",
        "800",
        "--sets",
        "40",
        "--text",
        "--out",
        path(&text),
    ]);

    let out = quorum(&[
        "verify",
        "--data",
        path(&data),
        "--data",
        path(&text),
        "--schedule",
        path(&sched),
        "--repr",
        "uncompressed",
    ]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.contains("agree with the oracle")).count(), 4);

    quorum(&[
        "run",
        "--data",
        path(&data),
        "--schedule",
        path(&sched),
        "--algos",
        "mgsk,dsk,looped",
        "--mu",
        "0.02,0.1",
        "--min-ms",
        "0",
        "--seed",
        "9",
        "--out",
        path(&csv),
    ]);
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next().unwrap(), "dataset,algorithm,N,T,seed,reps,total_ms,ms_per_exec,rank,flags");
    assert_eq!(lines.count(), 2 * 5);
    assert!(body.contains(",dsk-best,") && body.contains(",dsk-0.02,"));
}

#[test]
fn ingest_and_circuits() {
    let dir = tempfile::tempdir().unwrap();
    let sample = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/gettysburg.txt");
    let qds = dir.path().join("g.qds");
    quorum(&["ingest", path(&sample), "--q", "3", "--out", path(&qds)]);
    let out = quorum(&["run", "--data", path(&qds), "--algos", "scancount", "--min-ms", "0"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 25);

    let show = quorum(&["circuits", "show", "--kind", "ssum", "--n", "43", "--t", "30"]);
    assert!(String::from_utf8(show.stdout).unwrap().starts_with("ssum N=43 T=30: 192 gates"));

    let lib = dir.path().join("lib");
    quorum(&["circuits", "emit", "--kind", "sorter", "--n-max", "8", "--dir", path(&lib)]);
    let file = lib.join("sorter-8-5.qbp");
    let inspect = quorum(&["circuits", "inspect", path(&file)]);
    assert!(String::from_utf8(inspect.stdout).unwrap().starts_with("arity 8,"));

    let bad = Command::new(env!("CARGO_BIN_EXE_quorum"))
        .args(["run", "--data", path(&qds), "--algos", "nope"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
