//! Heap-based merges of sorted position streams, with skipping.
//!
//! Every algorithm here consumes inputs through [`PosSource`] cursors, so it
//! runs directly on either bitmap type or on a decoded [`SortedList`].

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::bitmap::{max_len, Bitmap, BitmapBuilder, PosCursor};
use crate::{check_threshold, Error, Result, SymmetricSpec};

/// Anything that can be read as an ascending stream of positions.
pub trait PosSource {
    type Cursor<'a>: PosCursor
    where
        Self: 'a;

    fn cursor(&self) -> Self::Cursor<'_>;
    fn cardinality(&self) -> u64;
}

impl<B: Bitmap> PosSource for B {
    type Cursor<'a>
        = B::Cursor<'a>
    where
        B: 'a;

    fn cursor(&self) -> B::Cursor<'_> {
        Bitmap::cursor(self)
    }

    fn cardinality(&self) -> u64 {
        Bitmap::cardinality(self)
    }
}

/// A strictly increasing list of positions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SortedList(Vec<u32>);

impl SortedList {
    pub fn new(items: Vec<u32>) -> Result<Self> {
        crate::bitmap::validate_positions(&items, u32::MAX)?;
        Ok(SortedList(items))
    }

    pub fn from_bitmap<B: Bitmap>(b: &B) -> Self {
        SortedList(b.to_positions())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl PosSource for SortedList {
    type Cursor<'a> = ListCursor<'a>;

    fn cursor(&self) -> ListCursor<'_> {
        ListCursor { items: &self.0, idx: 0 }
    }

    fn cardinality(&self) -> u64 {
        self.0.len() as u64
    }
}

/// Cursor over a [`SortedList`] using galloping search.
#[derive(Clone, Debug)]
pub struct ListCursor<'a> {
    items: &'a [u32],
    idx: usize,
}

impl PosCursor for ListCursor<'_> {
    fn current(&self) -> Option<u32> {
        self.items.get(self.idx).copied()
    }

    fn advance_to(&mut self, target: u32) -> Option<u32> {
        let rest = &self.items[self.idx.min(self.items.len())..];
        if rest.first().is_none_or(|&v| v >= target) {
            return rest.first().copied();
        }
        // Double the step until we overshoot, then binary search the last gap.
        let mut hi = 1;
        while hi < rest.len() && rest[hi] < target {
            hi *= 2;
        }
        let lo = hi / 2;
        let hi = hi.min(rest.len());
        self.idx += lo + rest[lo..hi].partition_point(|&v| v < target);
        self.current()
    }

    fn step(&mut self) -> Option<u32> {
        self.idx += 1;
        self.current()
    }
}

/// Work counters for the heap algorithms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HeapStats {
    pub pushes: u64,
    pub pops: u64,
    /// Pops beyond the entries equal to the heap minimum (skip rounds only).
    pub extra_pops: u64,
    /// Rounds where the minimum fell short of the threshold.
    pub skip_rounds: u64,
    /// `advance_to` calls made while verifying candidates on long streams.
    pub probes: u64,
    /// Input elements the cursors jumped over without landing on them.
    pub skipped: u64,
}

/// Counts the positions a cursor actually lands on.
struct Tracked<C> {
    c: C,
    landed: u64,
}

impl<C: PosCursor> Tracked<C> {
    fn new(c: C) -> Self {
        let landed = c.current().is_some() as u64;
        Tracked { c, landed }
    }

    fn current(&self) -> Option<u32> {
        self.c.current()
    }

    fn advance_to(&mut self, target: u32) -> Option<u32> {
        let before = self.c.current();
        let r = self.c.advance_to(target);
        if r.is_some() && r != before {
            self.landed += 1;
        }
        r
    }

    fn step(&mut self) -> Option<u32> {
        let r = self.c.step();
        self.landed += r.is_some() as u64;
        r
    }
}

type MinHeap = BinaryHeap<Reverse<(u32, u32)>>;

fn collect_output<B: Bitmap>(inputs: &[B], run: impl FnOnce(&mut dyn FnMut(u32)) -> Result<()>) -> Result<B> {
    let mut out = B::builder(max_len(inputs));
    run(&mut |p| out.push(p))?;
    Ok(out.finish())
}

/// Merges all streams through an `N`-entry min-heap, emitting positions whose
/// duplicate count at the heap top reaches `t`.
pub fn w_heap<B: Bitmap>(inputs: &[B], t: usize) -> Result<B> {
    check_threshold(t, inputs.len())?;
    collect_output(inputs, |out| {
        merge_counts(inputs, None, |v, c| {
            if c >= t {
                out(v);
            }
        });
        Ok(())
    })
}

/// [`w_heap`] for an arbitrary symmetric function.
pub fn w_heap_symmetric<B: Bitmap>(inputs: &[B], spec: &SymmetricSpec) -> Result<B> {
    spec.check_arity(inputs.len())?;
    let len = max_len(inputs);
    let mut out = B::builder(len);
    let zero = spec.accepts(0);
    let mut next = 0u32;
    merge_counts(inputs, None, |v, c| {
        if zero {
            out.push_range(next, v);
        }
        if spec.accepts(c) {
            out.push(v);
        }
        next = v + 1;
    });
    if zero {
        out.push_range(next, len);
    }
    Ok(out.finish())
}

/// Calls `f(position, count)` for every distinct position across `inputs`.
fn merge_counts<S: PosSource>(inputs: &[S], stats: Option<&mut HeapStats>, mut f: impl FnMut(u32, usize)) {
    let mut cursors: Vec<_> = inputs.iter().map(|s| s.cursor()).collect();
    let mut heap: MinHeap =
        cursors.iter().enumerate().filter_map(|(i, c)| c.current().map(|v| Reverse((v, i as u32)))).collect();
    let (mut pushes, mut pops) = (heap.len() as u64, 0u64);
    let mut popped = Vec::new();
    while let Some(&Reverse((v, _))) = heap.peek() {
        while let Some(&Reverse((w, i))) = heap.peek() {
            if w != v {
                break;
            }
            heap.pop();
            popped.push(i);
        }
        pops += popped.len() as u64;
        f(v, popped.len());
        for i in popped.drain(..) {
            if let Some(w) = cursors[i as usize].step() {
                heap.push(Reverse((w, i)));
                pushes += 1;
            }
        }
    }
    if let Some(s) = stats {
        s.pushes += pushes;
        s.pops += pops;
    }
}

/// Sets aside the `t - 1` largest inputs, merges the rest, and verifies each
/// candidate by probing the large inputs.
pub fn mg_opt<B: Bitmap>(inputs: &[B], t: usize) -> Result<B> {
    check_threshold(t, inputs.len())?;
    collect_output(inputs, |out| divide_skip(inputs, t, t - 1, None, out))
}

/// MergeSkip: when the heap minimum cannot reach `t`, pops extra entries and
/// advances the popped streams straight to the new minimum.
pub fn mg_skip<B: Bitmap>(inputs: &[B], t: usize) -> Result<B> {
    check_threshold(t, inputs.len())?;
    collect_output(inputs, |out| divide_skip(inputs, t, 0, None, out))
}

/// DivideSkip: the `L` largest inputs (see [`choose_l`]) are probed, the
/// rest are merged with MergeSkip at threshold `t - L`.
pub fn d_skip<B: Bitmap>(inputs: &[B], t: usize, mu: f64) -> Result<B> {
    check_threshold(t, inputs.len())?;
    let longest = inputs.iter().map(Bitmap::cardinality).max().unwrap_or(0);
    let l = choose_l(mu, t, longest)?;
    collect_output(inputs, |out| divide_skip(inputs, t, l, None, out))
}

/// Number of long inputs DivideSkip sets aside:
/// `clamp(floor(t / (mu * log2(longest + 2) + 1)), 1, t - 1)`.
///
/// For `t = 1` there is nothing to set aside and the result is 0.
pub fn choose_l(mu: f64, t: usize, longest: u64) -> Result<usize> {
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::InvalidInput(alloc::format!("mu must be positive, got {mu}")));
    }
    if t < 2 {
        return Ok(0);
    }
    let raw = libm::floor(t as f64 / (mu * libm::log2(longest as f64 + 2.0) + 1.0));
    Ok((raw as usize).clamp(1, t - 1))
}

/// DivideSkip over any stream source with an explicit split `l`.
///
/// `l = 0` is MergeSkip and `l = t - 1` is MgOpt. Positions are passed to
/// `out` in ascending order.
pub fn divide_skip<S: PosSource>(
    inputs: &[S],
    t: usize,
    l: usize,
    stats: Option<&mut HeapStats>,
    out: &mut dyn FnMut(u32),
) -> Result<()> {
    let n = inputs.len();
    check_threshold(t, n)?;
    if l >= t {
        return Err(Error::InvalidInput(alloc::format!("L = {l} must be below T = {t}")));
    }
    let cards: Vec<u64> = inputs.iter().map(PosSource::cardinality).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Largest first; ties keep input order.
    order.sort_by_key(|&i| Reverse(cards[i]));
    let (long_ids, short_ids) = order.split_at(l);
    let mut long: Vec<Tracked<S::Cursor<'_>>> = long_ids.iter().map(|&i| Tracked::new(inputs[i].cursor())).collect();
    let mut short: Vec<Tracked<S::Cursor<'_>>> = short_ids.iter().map(|&i| Tracked::new(inputs[i].cursor())).collect();
    let ts = t - l;

    let mut st = HeapStats::default();
    let mut heap: MinHeap =
        short.iter().enumerate().filter_map(|(i, c)| c.current().map(|v| Reverse((v, i as u32)))).collect();
    st.pushes = heap.len() as u64;
    let mut popped: Vec<u32> = Vec::new();
    while let Some(&Reverse((v, _))) = heap.peek() {
        while let Some(&Reverse((w, i))) = heap.peek() {
            if w != v {
                break;
            }
            heap.pop();
            popped.push(i);
        }
        let c = popped.len();
        st.pops += c as u64;
        if c >= ts {
            if c >= t || verify(&mut long, v, t - c, &mut st.probes) {
                out(v);
            }
            for i in popped.drain(..) {
                if let Some(w) = short[i as usize].step() {
                    heap.push(Reverse((w, i)));
                    st.pushes += 1;
                }
            }
            continue;
        }
        st.skip_rounds += 1;
        for _ in 0..ts - 1 - c {
            let Some(Reverse((_, i))) = heap.pop() else { break };
            popped.push(i);
            st.pops += 1;
            st.extra_pops += 1;
        }
        // At most ts - 1 streams can hold anything below the new minimum.
        let Some(&Reverse((floor, _))) = heap.peek() else { break };
        for i in popped.drain(..) {
            if let Some(w) = short[i as usize].advance_to(floor) {
                heap.push(Reverse((w, i)));
                st.pushes += 1;
            }
        }
    }
    if let Some(s) = stats {
        let landed: u64 = long.iter().chain(&short).map(|c| c.landed).sum();
        st.skipped = cards.iter().sum::<u64>() - landed;
        *s = st;
    }
    Ok(())
}

/// Looks for `need` more occurrences of `v` among the long streams, largest
/// first, giving up once the remaining streams cannot supply them.
fn verify<C: PosCursor>(long: &mut [Tracked<C>], v: u32, need: usize, probes: &mut u64) -> bool {
    let mut hits = 0;
    let total = long.len();
    for (k, c) in long.iter_mut().enumerate() {
        if hits + (total - k) < need {
            return false;
        }
        *probes += 1;
        if c.advance_to(v) == Some(v) {
            hits += 1;
            if hits >= need {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_threshold;
    use crate::{RleBitmap, UncompressedBitmap};
    use alloc::vec;

    fn bms<B: Bitmap>(s: &[Vec<u32>], r: u32) -> Vec<B> {
        s.iter().map(|p| B::from_positions(p, r).unwrap()).collect()
    }

    fn run(inputs: &[SortedList], t: usize, l: usize) -> (Vec<u32>, HeapStats) {
        let mut st = HeapStats::default();
        let mut v = Vec::new();
        divide_skip(inputs, t, l, Some(&mut st), &mut |p| v.push(p)).unwrap();
        (v, st)
    }

    #[test]
    fn gallop() {
        let l = SortedList::new(vec![1, 4, 9, 16, 25, 36, 49, 64, 81]).unwrap();
        let mut c = l.cursor();
        assert_eq!(c.advance_to(0), Some(1));
        assert_eq!(c.advance_to(17), Some(25));
        assert_eq!(c.advance_to(25), Some(25));
        assert_eq!(c.advance_to(80), Some(81));
        assert_eq!(c.advance_to(82), None);
        assert!(SortedList::new(vec![2, 1]).is_err());
    }

    #[test]
    fn small_examples() {
        let s = vec![vec![1, 2], vec![2, 3], vec![2]];
        let e = bms::<RleBitmap>(&s, 8);
        assert_eq!(w_heap(&e, 3).unwrap().to_positions(), [2]);
        assert_eq!(mg_opt(&e, 3).unwrap().to_positions(), [2]);
        assert_eq!(mg_skip(&e, 2).unwrap().to_positions(), [2]);
        let x = bms::<UncompressedBitmap>(&[vec![1, 2], vec![2, 3]], 8);
        assert_eq!(w_heap_symmetric(&x, &SymmetricSpec::parity(2)).unwrap().to_positions(), [1, 3]);
        let none = SymmetricSpec::exactly(2, 0);
        assert_eq!(w_heap_symmetric(&x, &none).unwrap().to_positions(), [0, 4, 5, 6, 7]);
    }

    #[test]
    fn all_splits_match_oracle() {
        let s = vec![
            vec![1, 5, 9, 13, 17, 40],
            vec![5, 9, 40, 41],
            vec![2, 5, 9, 17],
            vec![5, 17, 40],
            vec![0, 9, 17, 40, 63],
        ];
        let lists: Vec<SortedList> = s.iter().map(|v| SortedList::new(v.clone()).unwrap()).collect();
        for t in 1..=5 {
            let want = brute_threshold(&s, t, 64).unwrap();
            for l in 0..t {
                assert_eq!(run(&lists, t, l).0, want, "t={t} l={l}");
            }
            for mu in [0.005, 0.02, 0.05, 0.1] {
                assert_eq!(d_skip(&bms::<RleBitmap>(&s, 64), t, mu).unwrap().to_positions(), want);
            }
        }
    }

    #[test]
    fn disjoint_rounds() {
        let s: Vec<Vec<u32>> = (0..6).map(|i| (0..20).map(|j| j * 6 + i).collect()).collect();
        let lists: Vec<SortedList> = s.iter().map(|v| SortedList::new(v.clone()).unwrap()).collect();
        let (out, st) = run(&lists, 2, 0);
        assert!(out.is_empty());
        assert_eq!(st.extra_pops, 0);
        let (_, st) = run(&lists, 4, 0);
        // Each short round removes two more entries until fewer than four streams remain.
        assert!(st.extra_pops >= 2 * (st.skip_rounds - 3));
        assert_eq!(st.skipped, 0);

        let blocks: Vec<SortedList> =
            (0..4).map(|i| SortedList::new((i * 20..i * 20 + 20).collect()).unwrap()).collect();
        let (out, st) = run(&blocks, 2, 0);
        assert!(out.is_empty());
        // Each block jumps to the next block's start; the last one is abandoned.
        assert_eq!(st.skipped, 4 * 19);
    }

    #[test]
    fn identical_inputs_waste_nothing() {
        let s = vec![vec![3, 8, 13]; 4];
        let lists: Vec<SortedList> = s.iter().map(|v| SortedList::new(v.clone()).unwrap()).collect();
        let (out, st) = run(&lists, 4, 0);
        assert_eq!(out, [3, 8, 13]);
        assert_eq!((st.skip_rounds, st.skipped), (0, 0));
    }

    #[test]
    fn choose_l_formula() {
        assert_eq!(choose_l(1e9, 16, 1 << 20).unwrap(), 1);
        assert_eq!(choose_l(1e-12, 16, 1 << 20).unwrap(), 15);
        // 0.05 * log2(2^20 + 2) is a hair above 1, so the quotient lands just under 8.
        assert_eq!(choose_l(0.05, 16, 1 << 20).unwrap(), 7);
        assert_eq!(choose_l(0.05, 16, (1 << 20) - 2).unwrap(), 8);
        assert!(choose_l(0.0, 4, 10).is_err());
        assert!(choose_l(f64::NAN, 4, 10).is_err());
    }
}
