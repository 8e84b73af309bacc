//! The algorithms under comparison, by name.

use std::fmt;
use std::path::Path;

use quorum_core::circuit::{csv_threshold, looped_threshold, CircuitKind};
use quorum_core::counter::{hash_count, scan_count, w2ct, w_sort, W2ctVariant};
use quorum_core::heap::{d_skip, divide_skip, mg_opt, mg_skip, w_heap, SortedList};
use quorum_core::runmerge::cdom_threshold;
use quorum_core::{BitmapBuilder, RleBitmap, UncompressedBitmap};

use crate::cache::{ProgramCache, DEFAULT_N_MAX};
use crate::format::Stored;
use crate::{Error, Repr, Result};

/// The DivideSkip tuning values run by default.
pub const DEFAULT_MUS: [f64; 4] = [0.005, 0.02, 0.05, 0.1];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Algo {
    ScanCount,
    HashCnt,
    WSort,
    W2ct(W2ctVariant),
    WHeap,
    MgOpt,
    MgSkip,
    /// MergeSkip over inputs first decoded to integer arrays.
    WMgSkip,
    DSkip(f64),
    Cdom,
    Looped,
    CsvCkt,
    Circuit(CircuitKind),
}

impl Algo {
    /// Every algorithm, with one DivideSkip entry per value in `mus`.
    pub fn all(mus: &[f64]) -> Vec<Algo> {
        let mut v = vec![
            Algo::ScanCount,
            Algo::HashCnt,
            Algo::WSort,
            Algo::W2ct(W2ctVariant::N),
            Algo::W2ct(W2ctVariant::A),
            Algo::W2ct(W2ctVariant::I),
            Algo::WHeap,
            Algo::MgOpt,
            Algo::MgSkip,
            Algo::WMgSkip,
        ];
        v.extend(mus.iter().map(|&m| Algo::DSkip(m)));
        v.extend([Algo::Cdom, Algo::Looped, Algo::CsvCkt]);
        v.extend(CircuitKind::ALL.map(Algo::Circuit));
        v
    }

    pub fn name(&self) -> String {
        match self {
            Algo::ScanCount => "scancount".into(),
            Algo::HashCnt => "hashcnt".into(),
            Algo::WSort => "wsort".into(),
            Algo::W2ct(W2ctVariant::N) => "w2ctn".into(),
            Algo::W2ct(W2ctVariant::A) => "w2cta".into(),
            Algo::W2ct(W2ctVariant::I) => "w2cti".into(),
            Algo::WHeap => "wheap".into(),
            Algo::MgOpt => "mgopt".into(),
            Algo::MgSkip => "mgsk".into(),
            Algo::WMgSkip => "wmgsk".into(),
            Algo::DSkip(mu) => format!("dsk-{mu}"),
            Algo::Cdom => "cdom".into(),
            Algo::Looped => "looped".into(),
            Algo::CsvCkt => "csvckt".into(),
            Algo::Circuit(CircuitKind::SumOfProducts) => "sopckt".into(),
            Algo::Circuit(CircuitKind::Sorter) => "srtckt".into(),
            Algo::Circuit(CircuitKind::TreeAdder) => "treeadd".into(),
            Algo::Circuit(CircuitKind::SidewaysSum) => "ssum".into(),
        }
    }

    /// Whether the algorithm is defined for this representation and threshold.
    pub fn supports(&self, repr: Repr, n: usize, t: usize) -> bool {
        match self {
            Algo::Cdom => repr == Repr::Rle,
            Algo::CsvCkt => t >= 2 && t < n,
            _ => true,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses a comma-separated list. `all` selects everything; `dsk` expands
/// to one entry per value in `mus`, and `dsk-<mu>` picks a single value.
pub fn parse_algos(list: &str, mus: &[f64]) -> Result<Vec<Algo>> {
    let every = Algo::all(mus);
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name == "all" {
            out.extend(every.iter().copied());
        } else if name == "dsk" {
            out.extend(mus.iter().map(|&m| Algo::DSkip(m)));
        } else if let Some(mu) = name.strip_prefix("dsk-") {
            let mu: f64 = mu.parse().map_err(|_| Error::Input(format!("bad mu in `{name}`")))?;
            out.push(Algo::DSkip(mu));
        } else if let Some(a) = every.iter().find(|a| a.name() == name) {
            out.push(*a);
        } else {
            return Err(Error::Input(format!("unknown algorithm `{name}`")));
        }
    }
    let mut seen = Vec::new();
    out.retain(|a| {
        let fresh = !seen.contains(a);
        seen.push(*a);
        fresh
    });
    Ok(out)
}

/// A bitmap type the algorithms can run on.
pub trait Input: Stored {
    /// The inputs as run-length bitmaps, if that is what they are.
    fn as_rle(inputs: &[Self]) -> Option<&[RleBitmap]>;
    fn from_rle(b: RleBitmap) -> Option<Self>;
}

impl Input for UncompressedBitmap {
    fn as_rle(_: &[Self]) -> Option<&[RleBitmap]> {
        None
    }

    fn from_rle(_: RleBitmap) -> Option<Self> {
        None
    }
}

impl Input for RleBitmap {
    fn as_rle(inputs: &[Self]) -> Option<&[RleBitmap]> {
        Some(inputs)
    }

    fn from_rle(b: RleBitmap) -> Option<Self> {
        Some(b)
    }
}

/// Runs algorithms, holding the tabulated circuit programs they share.
pub struct Runner {
    circuits: Vec<ProgramCache>,
}

impl Runner {
    pub fn new(cache_dir: Option<&Path>) -> Self {
        let circuits = CircuitKind::ALL.iter().map(|&k| ProgramCache::new(k, DEFAULT_N_MAX, cache_dir)).collect();
        Runner { circuits }
    }

    pub fn circuits(&self, kind: CircuitKind) -> &ProgramCache {
        self.circuits.iter().find(|c| c.kind() == kind).expect("one cache per kind")
    }

    /// Positions of `0..r` set in at least `t` of `inputs`.
    pub fn run<B: Input>(&self, algo: Algo, inputs: &[B], t: usize, r: u32) -> Result<B> {
        let out = match algo {
            Algo::ScanCount => scan_count(inputs, t, r)?,
            Algo::HashCnt => hash_count(inputs, t, r)?,
            Algo::WSort => w_sort(inputs, t, r)?,
            Algo::W2ct(v) => w2ct(inputs, t, v)?,
            Algo::WHeap => w_heap(inputs, t)?,
            Algo::MgOpt => mg_opt(inputs, t)?,
            Algo::MgSkip => mg_skip(inputs, t)?,
            Algo::WMgSkip => {
                let lists: Vec<SortedList> = inputs.iter().map(SortedList::from_bitmap).collect();
                let mut out = B::builder(r);
                divide_skip(&lists, t, 0, None, &mut |p| out.push(p))?;
                out.finish()
            }
            Algo::DSkip(mu) => d_skip(inputs, t, mu)?,
            Algo::Cdom => {
                let rle = B::as_rle(inputs).ok_or_else(|| Error::Input("cdom needs run-length inputs".into()))?;
                B::from_rle(cdom_threshold(rle, t)?).expect("run-length in, run-length out")
            }
            Algo::Looped => looped_threshold(inputs, t)?,
            Algo::CsvCkt => csv_threshold(inputs, t)?,
            Algo::Circuit(kind) => self.circuits(kind).execute(inputs, t)?,
        };
        Ok(out)
    }
}
