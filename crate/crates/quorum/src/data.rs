//! Datasets: synthetic sets, q-gram indexes over text, and a census-shaped table.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use quorum_core::oracle::RowTable;
use quorum_core::Bitmap;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// A collection of sets over `0..r`, stored as ascending positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub name: String,
    pub r: u32,
    pub sets: Vec<Vec<u32>>,
    /// Optional per-set labels (the q-gram for ingested text); empty otherwise.
    pub labels: Vec<String>,
}

impl Dataset {
    /// The sets at `ids`, in that order, as bitmaps over `0..r`.
    pub fn bitmaps<B: Bitmap>(&self, ids: &[usize]) -> Result<Vec<B>> {
        ids.iter().map(|&i| Ok(B::from_positions(&self.sets[i], self.r)?)).collect()
    }

    pub fn ones(&self) -> u64 {
        self.sets.iter().map(|s| s.len() as u64).sum()
    }

    /// Fraction of set bits over all sets.
    pub fn density(&self) -> f64 {
        if self.sets.is_empty() || self.r == 0 {
            return 0.0;
        }
        self.ones() as f64 / (self.sets.len() as f64 * self.r as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Process {
    Uniform,
    Clustered,
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Process::Uniform => "Uniform",
            Process::Clustered => "Clustered",
        })
    }
}

impl FromStr for Process {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Process::Uniform),
            "clustered" => Ok(Process::Clustered),
            _ => Err(Error::Input(format!("unknown process `{s}`"))),
        }
    }
}

/// Parameters of a synthetic dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub process: Process,
    pub seed: u64,
    pub cardinality: u32,
    pub r: u32,
    pub sets: usize,
    /// Clustered only: budgets at or below this become one dense run.
    pub cluster_leaf: u32,
}

impl SyntheticSpec {
    pub fn new(process: Process, seed: u64, r: u32) -> Self {
        SyntheticSpec { process, seed, cardinality: 10_000, r, sets: 200, cluster_leaf: 32 }
    }

    /// `[Process;seed;cardinality;r]`.
    pub fn name(&self) -> String {
        format!("[{};{};{};{}]", self.process, self.seed, self.cardinality, self.r)
    }
}

/// Generates `spec.sets` sets of exactly `spec.cardinality` elements.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.cardinality > spec.r {
        return Err(Error::Input(format!("cardinality {} exceeds universe {}", spec.cardinality, spec.r)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sets = (0..spec.sets)
        .map(|_| match spec.process {
            Process::Uniform => uniform_set(&mut rng, spec.cardinality, spec.r),
            Process::Clustered => {
                let mut out = Vec::with_capacity(spec.cardinality as usize);
                clustered(&mut rng, 0, spec.r, spec.cardinality, spec.cluster_leaf.max(1), &mut out);
                out
            }
        })
        .collect();
    Ok(Dataset { name: spec.name(), r: spec.r, sets, labels: Vec::new() })
}

fn uniform_set(rng: &mut ChaCha8Rng, k: u32, r: u32) -> Vec<u32> {
    let mut v: Vec<u32> = index::sample(rng, r as usize, k as usize).into_iter().map(|i| i as u32).collect();
    v.sort_unstable();
    v
}

/// Places `k` elements in `lo..hi`: split the interval at a random point and
/// the budget at a random ratio (within what each side can hold), down to
/// leaves that hold a single dense run.
fn clustered(rng: &mut ChaCha8Rng, lo: u32, hi: u32, k: u32, leaf: u32, out: &mut Vec<u32>) {
    let width = hi - lo;
    if k == 0 {
        return;
    }
    if k == width {
        out.extend(lo..hi);
        return;
    }
    if k <= leaf || width < 2 {
        let start = rng.random_range(lo..=hi - k);
        out.extend(start..start + k);
        return;
    }
    let mid = rng.random_range(lo + 1..hi);
    let k_lo = rng.random_range(k.saturating_sub(hi - mid)..=k.min(mid - lo));
    clustered(rng, lo, mid, k_lo, leaf, out);
    clustered(rng, mid, hi, k - k_lo, leaf, out);
}

/// One set per distinct q-gram (by characters, case-sensitive); record `p`
/// is in the set of every gram it contains. Sets are ordered by gram.
pub fn ingest_qgrams(name: &str, lines: impl BufRead, q: usize) -> Result<Dataset> {
    if !(2..=3).contains(&q) {
        return Err(Error::Input(format!("q must be 2 or 3, got {q}")));
    }
    let mut grams: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    let mut rows = 0u32;
    for line in lines.lines() {
        let line = line?;
        let chars: Vec<char> = line.chars().collect();
        for w in chars.windows(q) {
            let g: String = w.iter().collect();
            let set = grams.entry(g).or_default();
            if set.last() != Some(&rows) {
                set.push(rows);
            }
        }
        rows = rows.checked_add(1).ok_or_else(|| Error::Input("more than 2^32 records".into()))?;
    }
    let (labels, sets) = grams.into_iter().unzip();
    Ok(Dataset { name: format!("{name}-{q}gr"), r: rows, sets, labels })
}

/// A row table with the per-attribute domain sizes it was drawn from.
#[derive(Clone, Debug)]
pub struct Table {
    pub table: RowTable,
    pub domains: Vec<u32>,
}

/// A table shaped like a census extract: mostly small domains, a few large
/// ones, and skewed value frequencies within each attribute.
pub fn census_table(rows: usize, attrs: usize, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domains: Vec<u32> = (0..attrs)
        .map(|a| match a % 7 {
            _ if a == 6 => 1000,
            0 => rng.random_range(40..100),
            1 | 2 => rng.random_range(2..6),
            _ => rng.random_range(6..50),
        })
        .collect();
    let mut table = RowTable::new(attrs);
    let mut row = vec![0u32; attrs];
    for _ in 0..rows {
        for (v, &d) in row.iter_mut().zip(&domains) {
            let u: f64 = rng.random();
            *v = ((u * u * d as f64) as u32).min(d - 1);
        }
        table.push_row(&row).expect("row has one value per attribute");
    }
    Table { table, domains }
}
