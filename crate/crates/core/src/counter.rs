//! Counting algorithms: one counter per candidate position.

use alloc::vec;
use alloc::vec::Vec;

use crate::bitmap::{Bitmap, BitmapBuilder};
use crate::{check_threshold, Error, Result};

/// Caps on working memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Bytes of working arrays an algorithm may allocate.
    pub memory_budget: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { memory_budget: 1 << 30 }
    }
}

impl Limits {
    pub(crate) fn reserve(&self, bytes: u64) -> Result<()> {
        if bytes > self.memory_budget {
            return Err(Error::ResourceLimit { needed: bytes, budget: self.memory_budget });
        }
        Ok(())
    }
}

/// Work counters filled in when a caller asks for them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CountStats {
    /// Counter increments (one per set bit read).
    pub increments: u64,
    /// Hash-table slots inspected.
    pub probes: u64,
    /// For w2Ct: length of the counted list materialized by each merge step.
    pub materialized: Vec<usize>,
}

fn check_len<B: Bitmap>(inputs: &[B], r: u32) -> Result<()> {
    match inputs.iter().map(Bitmap::bit_len).max() {
        Some(len) if len > r => Err(Error::InvalidInput(alloc::format!("input of {len} bits exceeds r = {r}"))),
        _ => Ok(()),
    }
}

trait Counter: Copy + Default {
    fn bump(&mut self);
    fn get(self) -> usize;
}

macro_rules! counter {
    ($t:ty) => {
        impl Counter for $t {
            #[inline]
            fn bump(&mut self) {
                *self += 1;
            }
            #[inline]
            fn get(self) -> usize {
                self as usize
            }
        }
    };
}
counter!(u8);
counter!(u16);
counter!(u32);

/// Bytes per counter for `n` inputs.
pub fn counter_width(n: usize) -> u64 {
    if n < 1 << 7 {
        1
    } else if n < 1 << 15 {
        2
    } else {
        4
    }
}

/// One counter per position in `0..r`; a final pass emits counts `>= t`.
pub fn scan_count<B: Bitmap>(inputs: &[B], t: usize, r: u32) -> Result<B> {
    scan_count_with(inputs, t, r, &Limits::default(), None)
}

pub fn scan_count_with<B: Bitmap>(
    inputs: &[B],
    t: usize,
    r: u32,
    limits: &Limits,
    stats: Option<&mut CountStats>,
) -> Result<B> {
    check_threshold(t, inputs.len())?;
    check_len(inputs, r)?;
    let width = counter_width(inputs.len());
    limits.reserve(r as u64 * width)?;
    match width {
        1 => scan::<B, u8>(inputs, t, r, stats),
        2 => scan::<B, u16>(inputs, t, r, stats),
        _ => scan::<B, u32>(inputs, t, r, stats),
    }
}

fn scan<B: Bitmap, C: Counter>(inputs: &[B], t: usize, r: u32, stats: Option<&mut CountStats>) -> Result<B> {
    let mut counts = vec![C::default(); r as usize];
    let mut increments = 0u64;
    for b in inputs {
        b.ones().for_each(|p| {
            counts[p as usize].bump();
            increments += 1;
        });
    }
    if let Some(s) = stats {
        s.increments += increments;
    }
    let mut out = B::builder(r);
    for (i, c) in counts.iter().enumerate() {
        if c.get() >= t {
            out.push(i as u32);
        }
    }
    Ok(out.finish())
}

const EMPTY: u32 = u32::MAX;

/// Counts in an open-addressing table keyed by position, then sorts the keys
/// whose count reaches `t`.
pub fn hash_count<B: Bitmap>(inputs: &[B], t: usize, r: u32) -> Result<B> {
    hash_count_with(inputs, t, r, &Limits::default(), None)
}

pub fn hash_count_with<B: Bitmap>(
    inputs: &[B],
    t: usize,
    r: u32,
    limits: &Limits,
    stats: Option<&mut CountStats>,
) -> Result<B> {
    check_threshold(t, inputs.len())?;
    check_len(inputs, r)?;
    let total: u64 = inputs.iter().map(Bitmap::cardinality).sum();
    let distinct = total.min(r as u64);
    let slots = (distinct * 2).max(16).next_power_of_two();
    limits.reserve(slots * 8)?;
    let mask = slots as usize - 1;
    let mut keys = vec![EMPTY; slots as usize];
    let mut vals = vec![0u32; slots as usize];
    let (mut probes, mut increments) = (0u64, 0u64);
    for b in inputs {
        for p in b.ones() {
            // Fibonacci hashing spreads clustered positions.
            let mut i = (p.wrapping_mul(0x9E37_79B9) as usize) & mask;
            loop {
                probes += 1;
                if keys[i] == p {
                    vals[i] += 1;
                    break;
                }
                if keys[i] == EMPTY {
                    keys[i] = p;
                    vals[i] = 1;
                    break;
                }
                i = (i + 1) & mask;
            }
            increments += 1;
        }
    }
    if let Some(s) = stats {
        s.probes += probes;
        s.increments += increments;
    }
    let mut hits: Vec<u32> =
        keys.iter().zip(&vals).filter(|&(&k, &v)| k != EMPTY && v as usize >= t).map(|(&k, _)| k).collect();
    hits.sort_unstable();
    let mut out = B::builder(r);
    hits.into_iter().for_each(|p| out.push(p));
    Ok(out.finish())
}

/// Concatenates all positions, sorts them, and emits those repeated `t` or
/// more times.
pub fn w_sort<B: Bitmap>(inputs: &[B], t: usize, r: u32) -> Result<B> {
    w_sort_with(inputs, t, r, &Limits::default())
}

pub fn w_sort_with<B: Bitmap>(inputs: &[B], t: usize, r: u32, limits: &Limits) -> Result<B> {
    check_threshold(t, inputs.len())?;
    check_len(inputs, r)?;
    let total: u64 = inputs.iter().map(Bitmap::cardinality).sum();
    limits.reserve(total * 4)?;
    let mut all: Vec<u32> = Vec::with_capacity(total as usize);
    for b in inputs {
        all.extend(b.ones());
    }
    all.sort_unstable();
    let mut out = B::builder(r);
    for run in all.chunk_by(|a, b| a == b) {
        if run.len() >= t {
            out.push(run[0]);
        }
    }
    Ok(out.finish())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum W2ctVariant {
    /// No pruning.
    N,
    /// Prune after each merge step.
    A,
    /// Prune while merging.
    I,
}

/// Merges inputs two at a time into a sorted list of `(position, count)`,
/// smallest input first.
pub fn w2ct<B: Bitmap>(inputs: &[B], t: usize, variant: W2ctVariant) -> Result<B> {
    w2ct_with(inputs, t, variant, &Limits::default(), None)
}

pub fn w2ct_with<B: Bitmap>(
    inputs: &[B],
    t: usize,
    variant: W2ctVariant,
    limits: &Limits,
    stats: Option<&mut CountStats>,
) -> Result<B> {
    let n = inputs.len();
    check_threshold(t, n)?;
    let r = crate::bitmap::max_len(inputs);
    let total: u64 = inputs.iter().map(Bitmap::cardinality).sum();
    // Accumulator plus merge target, each holding up to `total` pairs.
    limits.reserve(total * 16)?;
    let mut order: Vec<usize> = (0..n).collect();
    let cards: Vec<u64> = inputs.iter().map(Bitmap::cardinality).collect();
    order.sort_by_key(|&i| cards[i]);

    let mut sizes = Vec::with_capacity(n);
    let mut acc: Vec<(u32, u32)> = Vec::new();
    let mut next: Vec<(u32, u32)> = Vec::new();
    for (step, &i) in order.iter().enumerate() {
        let remaining = n - step - 1;
        // Entries below `floor` can no longer reach `t`.
        let floor = t.saturating_sub(remaining) as u32;
        next.clear();
        let prune_now = variant == W2ctVariant::I;
        let mut emit = |e: (u32, u32)| {
            if !prune_now || e.1 >= floor {
                next.push(e);
            }
        };
        let mut a = acc.iter().copied().peekable();
        for p in inputs[i].ones() {
            while let Some(&(q, c)) = a.peek() {
                if q >= p {
                    break;
                }
                emit((q, c));
                a.next();
            }
            match a.peek() {
                Some(&(q, c)) if q == p => {
                    emit((p, c + 1));
                    a.next();
                }
                _ => emit((p, 1)),
            }
        }
        a.for_each(&mut emit);
        sizes.push(next.len());
        if variant == W2ctVariant::A {
            next.retain(|e| e.1 >= floor);
        }
        core::mem::swap(&mut acc, &mut next);
    }
    if let Some(s) = stats {
        s.materialized = sizes;
    }
    let mut out = B::builder(r);
    for &(p, c) in &acc {
        if c as usize >= t {
            out.push(p);
        }
    }
    Ok(out.finish())
}
