//! Run-merging threshold over run-length encoded inputs.
//!
//! The inputs are swept together from left to right. A min-heap holds, for
//! each input, the word index where its current marker (a fill run plus its
//! literal words) ends. Between consecutive events every input is either
//! *clean* (inside a fill) or *dirty* (inside literal words), so each such
//! segment is settled by counting the clean ones (`k`) and, only when that
//! is not decisive, combining the dirty words.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::bitmap::rle::{Markers, RleBitmap, RleBuilder};
use crate::bitmap::{max_len, wide_and, wide_or, word_count, BitmapBuilder};
use crate::{check_threshold, Result, SymmetricSpec};

/// How the dirty words of a segment are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DirtyStrategy {
    /// Pick per segment (see [`dirty_segment_solver`]).
    #[default]
    Auto,
    Or,
    And,
    ScanCount,
    Looped,
}

/// Tunables for the segment solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CdomConfig {
    pub strategy: DirtyStrategy,
    /// Effective thresholds at or above this always use 64 word-local counters.
    pub scan_count_min: usize,
    /// The bit-parallel combine is used when `factor * popcount >= dirty * t_eff`.
    pub looped_factor: u64,
}

impl Default for CdomConfig {
    fn default() -> Self {
        CdomConfig { strategy: DirtyStrategy::Auto, scan_count_min: 128, looped_factor: 2 }
    }
}

/// Instrumentation for [`cdom_threshold_with`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CdomStats {
    /// Entries popped from the run heap.
    pub heap_pops: u64,
    /// Segments settled (each is clean-only or has a fixed dirty set).
    pub segments: u64,
    pub ones: u64,
    pub zeros: u64,
    pub or: u64,
    pub and: u64,
    pub scan_count: u64,
    pub looped: u64,
}

/// Per-word threshold `t_eff` over equal-length literal blocks, written to `out`.
///
/// Returns the strategy actually used.
pub fn dirty_segment_solver(blocks: &[&[u64]], t_eff: usize, cfg: &CdomConfig, out: &mut Vec<u64>) -> DirtyStrategy {
    let d = blocks.len();
    let w = blocks.first().map_or(0, |b| b.len());
    debug_assert!(1 <= t_eff && t_eff <= d);
    debug_assert!(blocks.iter().all(|b| b.len() == w));
    let strategy = match cfg.strategy {
        DirtyStrategy::Auto if t_eff == 1 => DirtyStrategy::Or,
        DirtyStrategy::Auto if t_eff == d => DirtyStrategy::And,
        DirtyStrategy::Auto if t_eff >= cfg.scan_count_min => DirtyStrategy::ScanCount,
        DirtyStrategy::Auto => {
            let beta: u64 = blocks.iter().flat_map(|b| b.iter()).map(|x| x.count_ones() as u64).sum();
            if cfg.looped_factor * beta >= (d * t_eff) as u64 {
                DirtyStrategy::Looped
            } else {
                DirtyStrategy::ScanCount
            }
        }
        s => s,
    };
    out.clear();
    match strategy {
        DirtyStrategy::Or => out.extend((0..w).map(|j| blocks.iter().fold(0, |a, b| a | b[j]))),
        DirtyStrategy::And => out.extend((0..w).map(|j| blocks.iter().fold(!0, |a, b| a & b[j]))),
        DirtyStrategy::Looped => {
            let mut c = vec![0u64; t_eff];
            for j in 0..w {
                c.fill(0);
                for b in blocks {
                    let x = b[j];
                    for i in (1..t_eff).rev() {
                        c[i] |= c[i - 1] & x;
                    }
                    c[0] |= x;
                }
                out.push(c[t_eff - 1]);
            }
        }
        DirtyStrategy::ScanCount | DirtyStrategy::Auto => {
            out.extend((0..w).map(|j| {
                let counts = bit_counts(blocks.iter().map(|b| b[j]));
                (0..64).filter(|&i| counts[i] as usize >= t_eff).fold(0, |a, i| a | 1 << i)
            }));
        }
    }
    strategy
}

fn bit_counts(words: impl Iterator<Item = u64>) -> [u32; 64] {
    let mut counts = [0u32; 64];
    for mut x in words {
        while x != 0 {
            counts[x.trailing_zeros() as usize] += 1;
            x &= x - 1;
        }
    }
    counts
}

/// Positions set in at least `t` inputs.
pub fn cdom_threshold(inputs: &[RleBitmap], t: usize) -> Result<RleBitmap> {
    cdom_threshold_with(inputs, t, &CdomConfig::default(), None)
}

pub fn cdom_threshold_with(
    inputs: &[RleBitmap],
    t: usize,
    cfg: &CdomConfig,
    stats: Option<&mut CdomStats>,
) -> Result<RleBitmap> {
    check_threshold(t, inputs.len())?;
    if cfg.strategy == DirtyStrategy::Auto {
        if t == 1 {
            return Ok(wide_or(inputs));
        }
        if t == inputs.len() {
            return Ok(wide_and(inputs));
        }
    }
    Ok(sweep(inputs, Rule::Threshold(t), cfg, stats))
}

/// Positions whose membership count is accepted by `spec`.
pub fn cdom_symmetric(inputs: &[RleBitmap], spec: &SymmetricSpec) -> Result<RleBitmap> {
    cdom_symmetric_with(inputs, spec, None)
}

pub fn cdom_symmetric_with(
    inputs: &[RleBitmap],
    spec: &SymmetricSpec,
    stats: Option<&mut CdomStats>,
) -> Result<RleBitmap> {
    spec.check_arity(inputs.len())?;
    Ok(sweep(inputs, Rule::Symmetric(spec), &CdomConfig::default(), stats))
}

#[derive(Clone, Copy)]
enum Rule<'a> {
    Threshold(usize),
    Symmetric(&'a SymmetricSpec),
}

struct Input<'a> {
    markers: Markers<'a>,
    fill: bool,
    /// Word index where the current marker's literal words begin.
    fill_end: u64,
    lits: &'a [u64],
}

struct Sweep<'a, 'r> {
    inputs: Vec<Input<'a>>,
    rule: Rule<'r>,
    cfg: CdomConfig,
    out: RleBuilder,
    /// Clean inputs currently in a fill of ones.
    k: usize,
    /// Inputs currently inside literal words.
    dirty: Vec<usize>,
    /// Clean inputs whose marker still has literal words ahead.
    pending: Vec<usize>,
    heap: BinaryHeap<Reverse<(u64, usize)>>,
    stats: CdomStats,
    blocks: Vec<&'a [u64]>,
    buf: Vec<u64>,
}

fn sweep(inputs: &[RleBitmap], rule: Rule<'_>, cfg: &CdomConfig, stats: Option<&mut CdomStats>) -> RleBitmap {
    let len = max_len(inputs);
    let total = word_count(len) as u64;
    let mut s = Sweep {
        inputs: inputs.iter().map(|b| Input { markers: b.markers(), fill: false, fill_end: 0, lits: &[] }).collect(),
        rule,
        cfg: *cfg,
        out: RleBuilder::new(len),
        k: 0,
        dirty: Vec::new(),
        pending: Vec::new(),
        heap: BinaryHeap::with_capacity(inputs.len()),
        stats: CdomStats::default(),
        blocks: Vec::new(),
        buf: Vec::new(),
    };
    for i in 0..inputs.len() {
        s.load(i, 0);
    }
    let mut pos = 0u64;
    let mut crossing: Vec<(u64, usize)> = Vec::new();
    while pos < total {
        let end = s.heap.peek().map_or(total, |e| e.0 .0).min(total);
        // Clean inputs whose literal words start inside this stretch split it.
        crossing.clear();
        let fill_end = |i: usize| s.inputs[i].fill_end;
        s.pending.retain(|&i| {
            if fill_end(i) < end {
                crossing.push((fill_end(i), i));
                false
            } else {
                true
            }
        });
        crossing.sort_unstable();
        let mut p = pos;
        for &(fe, i) in &crossing {
            if fe > p {
                s.settle(p, fe);
                p = fe;
            }
            s.k -= s.inputs[i].fill as usize;
            s.dirty.push(i);
        }
        if end > p {
            s.settle(p, end);
        }
        pos = end;
        while let Some(&Reverse((e, i))) = s.heap.peek() {
            if e != pos {
                break;
            }
            s.heap.pop();
            s.stats.heap_pops += 1;
            if let Some(at) = s.dirty.iter().position(|&x| x == i) {
                s.dirty.swap_remove(at);
            } else {
                s.k -= s.inputs[i].fill as usize;
            }
            s.load(i, pos);
        }
    }
    if let Some(st) = stats {
        *st = s.stats;
    }
    s.out.finish()
}

impl<'a> Sweep<'a, '_> {
    /// Enters input `i`'s next marker, which starts at word `at`.
    fn load(&mut self, i: usize, at: u64) {
        let inp = &mut self.inputs[i];
        let Some((m, lits)) = inp.markers.next() else {
            // Exhausted: reads as a fill of zeros from here on.
            inp.fill = false;
            return;
        };
        inp.fill = m.fill;
        inp.fill_end = at + m.run as u64;
        inp.lits = lits;
        self.heap.push(Reverse((inp.fill_end + m.dirty as u64, i)));
        if m.run == 0 {
            self.dirty.push(i);
        } else {
            self.k += m.fill as usize;
            if m.dirty > 0 {
                self.pending.push(i);
            }
        }
    }

    /// Emits words `p..q`, during which the clean/dirty split is fixed.
    fn settle(&mut self, p: u64, q: u64) {
        self.stats.segments += 1;
        let n = (q - p) as u32;
        let (k, d) = (self.k, self.dirty.len());
        let constant = match self.rule {
            Rule::Threshold(t) if t <= k => Some(true),
            Rule::Threshold(t) if t - k > d => Some(false),
            Rule::Threshold(_) => None,
            Rule::Symmetric(spec) => {
                let acc = &spec.accept()[k..=k + d];
                acc.iter().all(|&a| a == acc[0]).then_some(acc[0])
            }
        };
        if let Some(bit) = constant {
            if bit {
                self.stats.ones += 1;
            } else {
                self.stats.zeros += 1;
            }
            self.out.push_fill(bit, n);
            return;
        }
        self.blocks.clear();
        for &i in &self.dirty {
            let inp = &self.inputs[i];
            let off = (p - inp.fill_end) as usize;
            self.blocks.push(&inp.lits[off..off + n as usize]);
        }
        match self.rule {
            Rule::Threshold(t) => {
                let used = dirty_segment_solver(&self.blocks, t - k, &self.cfg, &mut self.buf);
                match used {
                    DirtyStrategy::Or => self.stats.or += 1,
                    DirtyStrategy::And => self.stats.and += 1,
                    DirtyStrategy::Looped => self.stats.looped += 1,
                    _ => self.stats.scan_count += 1,
                }
            }
            Rule::Symmetric(spec) => {
                self.stats.scan_count += 1;
                let acc = &spec.accept()[k..];
                self.buf.clear();
                for j in 0..n as usize {
                    let counts = bit_counts(self.blocks.iter().map(|b| b[j]));
                    let w = (0..64).filter(|&b| acc[counts[b] as usize]).fold(0u64, |a, b| a | 1 << b);
                    self.buf.push(w);
                }
            }
        }
        self.out.push_literals(&self.buf);
    }
}
