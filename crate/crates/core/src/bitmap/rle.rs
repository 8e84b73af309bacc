//! Word-aligned run-length encoded bitmaps.
//!
//! The stream is a sequence of marker words, each followed by its literal
//! (dirty) words. A marker packs:
//!
//! | bits    | field                                  |
//! |---------|----------------------------------------|
//! | 0       | fill bit                               |
//! | 1..=32  | number of fill words                   |
//! | 33..=63 | number of literal words that follow    |
//!
//! A marker describes `run` words equal to all-zero or all-one, then `dirty`
//! literal words copied verbatim. The encoding is canonical: a literal word is
//! never `0` or `!0`, two adjacent fills of the same bit are always merged,
//! and only the first marker may have an empty fill. The stream covers exactly
//! `ceil(len / 64)` words (trailing zeros included), and a partial last word is
//! always a literal with the bits past `len` cleared. The zero-length bitmap has
//! no words at all.

use alloc::format;
use alloc::vec::Vec;

use super::uncompressed::{UncompressedBitmap, WordOnes};
use super::{tail_mask, word_count, BinaryOp, Bitmap, BitmapBuilder, Chunk, PosCursor, RunIter};
use crate::{Error, Result};

pub const MAX_RUN: u64 = u32::MAX as u64;
pub const MAX_DIRTY: u64 = (1 << 31) - 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Marker {
    pub fill: bool,
    pub run: u32,
    pub dirty: u32,
}

impl Marker {
    #[inline]
    pub fn encode(self) -> u64 {
        debug_assert!(self.dirty as u64 <= MAX_DIRTY);
        self.fill as u64 | (self.run as u64) << 1 | (self.dirty as u64) << 33
    }

    #[inline]
    pub fn decode(w: u64) -> Self {
        Marker { fill: w & 1 == 1, run: (w >> 1) as u32, dirty: (w >> 33) as u32 }
    }
}

/// A run-length encoded bitmap. See the module docs for the layout.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RleBitmap {
    words: Vec<u64>,
    len: u32,
}

impl RleBitmap {
    /// Validates a raw stream and re-encodes it canonically.
    pub fn from_raw_parts(words: &[u64], len: u32) -> Result<Self> {
        let total = word_count(len) as u64;
        let mut covered = 0u64;
        let mut i = 0;
        let mut b = RleBuilder::new(len);
        while i < words.len() {
            let m = Marker::decode(words[i]);
            let lits = words
                .get(i + 1..i + 1 + m.dirty as usize)
                .ok_or_else(|| Error::Malformed(format!("marker at word {i} overruns the stream")))?;
            covered += m.run as u64 + m.dirty as u64;
            if covered > total {
                return Err(Error::Malformed(format!(
                    "stream covers more than the {total} words of a {len}-bit bitmap"
                )));
            }
            b.push_fill(m.fill, m.run);
            b.push_literals(lits);
            i += 1 + m.dirty as usize;
        }
        if covered != total {
            return Err(Error::Malformed(format!("stream covers {covered} of {total} words")));
        }
        Ok(b.finish())
    }

    /// The encoded stream.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn markers(&self) -> Markers<'_> {
        Markers { words: &self.words, pos: 0 }
    }

    pub fn chunks(&self) -> Chunks<'_> {
        Chunks { markers: self.markers(), lits: None }
    }

    pub fn marker_count(&self) -> usize {
        self.markers().count()
    }

    pub fn runs(&self) -> RunIter<'_, Chunks<'_>> {
        RunIter::new(self.chunks(), self.len)
    }

    pub fn compress(bitmap: &UncompressedBitmap) -> Self {
        Self::from_words(bitmap.words(), bitmap.bit_len())
    }

    pub fn decompress(&self) -> UncompressedBitmap {
        let mut acc = alloc::vec![0u64; word_count(self.len)];
        self.or_into(&mut acc);
        UncompressedBitmap::from_words(&acc, self.len)
    }
}

impl Bitmap for RleBitmap {
    type Builder = RleBuilder;
    type Cursor<'a> = RleCursor<'a>;
    type Ones<'a> = RleOnes<'a>;

    fn empty(len: u32) -> Self {
        let mut b = RleBuilder::new(len);
        b.push_fill(false, word_count(len) as u32);
        b.finish()
    }

    fn full(len: u32) -> Self {
        let mut b = RleBuilder::new(len);
        b.push_fill(true, word_count(len) as u32);
        b.finish()
    }

    fn builder(len: u32) -> RleBuilder {
        RleBuilder::new(len)
    }

    fn from_words(words: &[u64], len: u32) -> Self {
        let n = word_count(len);
        let mut b = RleBuilder::new(len);
        let words = &words[..words.len().min(n)];
        b.push_literals(words);
        b.push_fill(false, (n - words.len()) as u32);
        b.finish()
    }

    fn bit_len(&self) -> u32 {
        self.len
    }

    fn cardinality(&self) -> u64 {
        self.chunks()
            .map(|c| match c {
                Chunk::Fill { bit: true, words } => words as u64 * 64,
                Chunk::Fill { .. } => 0,
                Chunk::Literals(l) => l.iter().map(|w| w.count_ones() as u64).sum(),
            })
            .sum()
    }

    fn contains(&self, pos: u32) -> bool {
        pos < self.len && self.cursor().advance_to(pos) == Some(pos)
    }

    fn ones(&self) -> RleOnes<'_> {
        RleOnes { chunks: self.chunks(), word: 0, range: 0..0, lits: WordOnes::new(&[], 0) }
    }

    fn cursor(&self) -> RleCursor<'_> {
        RleCursor::new(&self.words, self.len)
    }

    fn binary(&self, other: &Self, op: BinaryOp) -> Self {
        let len = self.len.max(other.len);
        let total = word_count(len) as u64;
        let mut out = RleBuilder::new(len);
        let (mut a, mut b) = (Reader::new(self), Reader::new(other));
        let mut done = 0u64;
        while done < total {
            let rest = total - done;
            let n = a.avail(rest).min(b.avail(rest));
            match (a.cur, b.cur) {
                (Cur::Lits(x), Cur::Lits(y)) => {
                    for i in 0..n as usize {
                        out.push_literal(op.apply(x[i], y[i]));
                    }
                }
                (Cur::Lits(x), _) => lit_fill(&mut out, op, &x[..n as usize], b.fill_bit(), false),
                (_, Cur::Lits(y)) => lit_fill(&mut out, op, &y[..n as usize], a.fill_bit(), true),
                _ => out.push_fill(op.apply_bit(a.fill_bit(), b.fill_bit()), n as u32),
            }
            a.consume(n);
            b.consume(n);
            done += n;
        }
        out.finish()
    }

    fn not(&self) -> Self {
        let mut out = RleBuilder::new(self.len);
        for c in self.chunks() {
            match c {
                Chunk::Fill { bit, words } => out.push_fill(!bit, words),
                Chunk::Literals(l) => l.iter().for_each(|&w| out.push_literal(!w)),
            }
        }
        out.finish()
    }

    fn or_into(&self, acc: &mut [u64]) {
        let mut i = 0;
        for c in self.chunks() {
            match c {
                Chunk::Fill { bit, words } => {
                    if bit {
                        acc[i..i + words as usize].fill(!0);
                    }
                    i += words as usize;
                }
                Chunk::Literals(l) => {
                    for (a, w) in acc[i..i + l.len()].iter_mut().zip(l) {
                        *a |= w;
                    }
                    i += l.len();
                }
            }
        }
    }

    fn run_count(&self) -> u64 {
        self.runs().count() as u64
    }

    fn size_in_words(&self) -> usize {
        self.words.len()
    }

    fn is_zero(&self) -> bool {
        self.markers().all(|(m, _)| m.dirty == 0 && (!m.fill || m.run == 0))
    }
}

/// Literal words combined with a fill of `fill` bits. `fill_first` says whether
/// the fill is the left operand.
fn lit_fill(out: &mut RleBuilder, op: BinaryOp, lits: &[u64], fill: bool, fill_first: bool) {
    let n = lits.len() as u32;
    let f = if fill { !0u64 } else { 0 };
    match (op, fill, fill_first) {
        (BinaryOp::And, false, _) | (BinaryOp::AndNot, false, true) | (BinaryOp::AndNot, true, false) => {
            out.push_fill(false, n)
        }
        (BinaryOp::Or, true, _) => out.push_fill(true, n),
        (BinaryOp::And, true, _)
        | (BinaryOp::Or, false, _)
        | (BinaryOp::Xor, false, _)
        | (BinaryOp::AndNot, false, false) => out.push_literals(lits),
        _ => {
            for &w in lits {
                out.push_literal(if fill_first { op.apply(f, w) } else { op.apply(w, f) });
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Cur<'a> {
    Fill(bool, u32),
    Lits(&'a [u64]),
    /// Past the end of the stream: zeros forever.
    End,
}

struct Reader<'a> {
    chunks: Chunks<'a>,
    cur: Cur<'a>,
}

impl<'a> Reader<'a> {
    fn new(b: &'a RleBitmap) -> Self {
        let mut r = Reader { chunks: b.chunks(), cur: Cur::End };
        r.load();
        r
    }

    fn load(&mut self) {
        self.cur = match self.chunks.next() {
            Some(Chunk::Fill { bit, words }) => Cur::Fill(bit, words),
            Some(Chunk::Literals(l)) => Cur::Lits(l),
            None => Cur::End,
        };
    }

    fn avail(&self, rest: u64) -> u64 {
        match self.cur {
            Cur::Fill(_, n) => n as u64,
            Cur::Lits(l) => l.len() as u64,
            Cur::End => rest,
        }
    }

    fn fill_bit(&self) -> bool {
        matches!(self.cur, Cur::Fill(true, _))
    }

    fn consume(&mut self, n: u64) {
        match &mut self.cur {
            Cur::Fill(_, k) => {
                *k -= n as u32;
                if *k == 0 {
                    self.load();
                }
            }
            Cur::Lits(l) => {
                *l = &l[n as usize..];
                if l.is_empty() {
                    self.load();
                }
            }
            Cur::End => {}
        }
    }
}

/// Markers with their literal words.
#[derive(Clone, Debug)]
pub struct Markers<'a> {
    words: &'a [u64],
    pos: usize,
}

impl<'a> Iterator for Markers<'a> {
    type Item = (Marker, &'a [u64]);

    fn next(&mut self) -> Option<Self::Item> {
        let m = Marker::decode(*self.words.get(self.pos)?);
        let start = self.pos + 1;
        self.pos = start + m.dirty as usize;
        Some((m, &self.words[start..self.pos]))
    }
}

/// Fill and literal chunks in stream order.
#[derive(Clone, Debug)]
pub struct Chunks<'a> {
    markers: Markers<'a>,
    lits: Option<&'a [u64]>,
}

impl<'a> Iterator for Chunks<'a> {
    type Item = Chunk<'a>;

    fn next(&mut self) -> Option<Chunk<'a>> {
        if let Some(l) = self.lits.take() {
            return Some(Chunk::Literals(l));
        }
        loop {
            let (m, lits) = self.markers.next()?;
            if m.run > 0 {
                if !lits.is_empty() {
                    self.lits = Some(lits);
                }
                return Some(Chunk::Fill { bit: m.fill, words: m.run });
            }
            if !lits.is_empty() {
                return Some(Chunk::Literals(lits));
            }
        }
    }
}

/// Set positions of an [`RleBitmap`].
#[derive(Clone, Debug)]
pub struct RleOnes<'a> {
    chunks: Chunks<'a>,
    word: u32,
    range: core::ops::Range<u32>,
    lits: WordOnes<'a>,
}

impl Iterator for RleOnes<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        loop {
            if let Some(p) = self.range.next() {
                return Some(p);
            }
            if let Some(p) = self.lits.next() {
                return Some(p);
            }
            match self.chunks.next()? {
                Chunk::Fill { bit, words } => {
                    if bit {
                        self.range = self.word * 64..(self.word + words) * 64;
                    }
                    self.word += words;
                }
                Chunk::Literals(l) => {
                    self.lits = WordOnes::new(l, self.word * 64);
                    self.word += l.len() as u32;
                }
            }
        }
    }

    fn fold<A, F: FnMut(A, u32) -> A>(self, init: A, mut f: F) -> A {
        let mut acc = self.range.fold(init, &mut f);
        acc = self.lits.fold(acc, &mut f);
        let mut word = self.word;
        for c in self.chunks {
            match c {
                Chunk::Fill { bit, words } => {
                    if bit {
                        acc = (word * 64..(word + words) * 64).fold(acc, &mut f);
                    }
                    word += words;
                }
                Chunk::Literals(l) => {
                    acc = WordOnes::new(l, word * 64).fold(acc, &mut f);
                    word += l.len() as u32;
                }
            }
        }
        acc
    }
}

/// Cursor over an [`RleBitmap`] that skips whole markers without decoding
/// their literals.
#[derive(Clone, Debug)]
pub struct RleCursor<'a> {
    words: &'a [u64],
    len: u32,
    /// Index of the current marker in `words`.
    mpos: usize,
    /// Word index (in the decoded bitmap) where the current marker starts.
    mstart: u64,
    m: Marker,
    cur: Option<u32>,
}

impl<'a> RleCursor<'a> {
    fn new(words: &'a [u64], len: u32) -> Self {
        let m = words.first().map_or(Marker::default(), |&w| Marker::decode(w));
        let mut c = RleCursor { words, len, mpos: 0, mstart: 0, m, cur: None };
        c.cur = c.seek(0);
        c
    }

    fn next_marker(&mut self) {
        self.mstart += self.m.run as u64 + self.m.dirty as u64;
        self.mpos += 1 + self.m.dirty as usize;
        if let Some(&w) = self.words.get(self.mpos) {
            self.m = Marker::decode(w);
        }
    }

    fn seek(&mut self, mut target: u64) -> Option<u32> {
        loop {
            if target >= self.len as u64 || self.mpos >= self.words.len() {
                return None;
            }
            let tw = target / 64;
            let fill_end = self.mstart + self.m.run as u64;
            let mend = fill_end + self.m.dirty as u64;
            if tw >= mend {
                self.next_marker();
                continue;
            }
            if tw < fill_end {
                if self.m.fill {
                    return Some(target as u32);
                }
                target = fill_end * 64;
            }
            let first = (target / 64 - fill_end) as usize;
            let base = self.mpos + 1;
            let mut mask = !0u64 << (target % 64);
            for i in first..self.m.dirty as usize {
                let w = self.words[base + i] & mask;
                if w != 0 {
                    return Some(((fill_end + i as u64) * 64 + w.trailing_zeros() as u64) as u32);
                }
                mask = !0;
            }
            target = mend * 64;
            self.next_marker();
        }
    }
}

impl PosCursor for RleCursor<'_> {
    fn current(&self) -> Option<u32> {
        self.cur
    }

    fn advance_to(&mut self, target: u32) -> Option<u32> {
        let c = self.cur?;
        if c < target {
            self.cur = self.seek(target as u64);
        }
        self.cur
    }
}

/// Builds a canonical [`RleBitmap`] from fills and literal words, or from
/// ascending positions.
#[derive(Clone, Debug)]
pub struct RleBuilder {
    words: Vec<u64>,
    len: u32,
    total: u64,
    /// Words emitted so far.
    written: u64,
    /// Index of the open marker in `words`, if any.
    marker: Option<usize>,
    m: Marker,
    /// A partially assembled word for position-level pushes.
    pending: Option<(u64, u64)>,
}

impl RleBuilder {
    pub fn new(len: u32) -> Self {
        RleBuilder {
            words: Vec::new(),
            len,
            total: word_count(len) as u64,
            written: 0,
            marker: None,
            m: Marker::default(),
            pending: None,
        }
    }

    /// Words emitted so far.
    pub fn written(&self) -> u64 {
        self.written
    }

    fn open(&mut self, m: Marker) {
        if let Some(i) = self.marker {
            self.words[i] = self.m.encode();
        }
        self.marker = Some(self.words.len());
        self.words.push(0);
        self.m = m;
    }

    fn raw_fill(&mut self, bit: bool, n: u32) {
        if n == 0 {
            return;
        }
        self.written += n as u64;
        if self.marker.is_some() && self.m.dirty == 0 && (self.m.run == 0 || self.m.fill == bit) {
            self.m.fill = bit;
            self.m.run += n;
        } else {
            self.open(Marker { fill: bit, run: n, dirty: 0 });
        }
    }

    fn raw_literal(&mut self, w: u64) {
        if self.marker.is_none() {
            self.open(Marker::default());
        }
        self.m.dirty += 1;
        self.words.push(w);
        self.written += 1;
    }

    fn flush_pending(&mut self) {
        if let Some((idx, w)) = self.pending.take() {
            self.pad_to(idx);
            self.push_literal(w);
        }
    }

    fn pad_to(&mut self, word: u64) {
        if word > self.written {
            self.raw_fill(false, (word - self.written) as u32);
        }
    }

    /// Appends `n` words that are all zero or all one.
    pub fn push_fill(&mut self, bit: bool, n: u32) {
        self.flush_pending();
        debug_assert!(self.written + n as u64 <= self.total);
        let partial = self.len % 64 != 0;
        if bit && n > 0 && partial && self.written + n as u64 == self.total {
            self.raw_fill(true, n - 1);
            self.raw_literal(tail_mask(self.len));
        } else {
            self.raw_fill(bit, n);
        }
    }

    /// Appends one word, storing it as a fill when it is `0` or `!0`.
    pub fn push_literal(&mut self, mut w: u64) {
        self.flush_pending();
        debug_assert!(self.written < self.total);
        if self.written + 1 == self.total {
            w &= tail_mask(self.len);
        }
        if w == 0 {
            self.raw_fill(false, 1);
        } else if w == !0 {
            self.raw_fill(true, 1);
        } else {
            self.raw_literal(w);
        }
    }

    pub fn push_literals(&mut self, ws: &[u64]) {
        for &w in ws {
            self.push_literal(w);
        }
    }
}

impl BitmapBuilder for RleBuilder {
    type Output = RleBitmap;

    fn push(&mut self, pos: u32) {
        debug_assert!(pos < self.len);
        let idx = (pos / 64) as u64;
        let bit = 1u64 << (pos % 64);
        match &mut self.pending {
            Some((i, w)) if *i == idx => *w |= bit,
            _ => {
                self.flush_pending();
                self.pending = Some((idx, bit));
            }
        }
    }

    fn push_range(&mut self, start: u32, end: u32) {
        debug_assert!(start <= end && end <= self.len);
        if start >= end {
            return;
        }
        let (sw, ew) = ((start / 64) as u64, ((end - 1) / 64) as u64);
        let lo = !0u64 << (start % 64);
        let hi = tail_mask(end);
        let first = if sw == ew { lo & hi } else { lo };
        match &mut self.pending {
            Some((i, w)) if *i == sw => *w |= first,
            _ => {
                self.flush_pending();
                self.pending = Some((sw, first));
            }
        }
        if sw == ew {
            return;
        }
        self.flush_pending();
        if ew > sw + 1 {
            self.push_fill(true, (ew - sw - 1) as u32);
        }
        self.pending = Some((ew, hi));
    }

    fn finish(mut self) -> RleBitmap {
        self.flush_pending();
        self.pad_to(self.total);
        if let Some(i) = self.marker {
            self.words[i] = self.m.encode();
        }
        RleBitmap { words: self.words, len: self.len }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rle(pos: &[u32], len: u32) -> RleBitmap {
        RleBitmap::from_positions(pos, len).unwrap()
    }

    #[test]
    fn marker_roundtrip() {
        let m = Marker { fill: true, run: u32::MAX, dirty: MAX_DIRTY as u32 };
        assert_eq!(Marker::decode(m.encode()), m);
    }

    #[test]
    fn zero_fill_is_one_marker() {
        let z = RleBitmap::empty(128);
        assert_eq!(z.words(), [Marker { fill: false, run: 2, dirty: 0 }.encode()]);
        assert_eq!(RleBitmap::empty(0).words(), &[] as &[u64]);
        assert!(z.is_zero());
    }

    #[test]
    fn partial_tail_is_literal() {
        let f = RleBitmap::full(100);
        let ms: Vec<_> = f.markers().map(|(m, l)| (m, l.to_vec())).collect();
        assert_eq!(ms, vec![(Marker { fill: true, run: 1, dirty: 1 }, vec![(1u64 << 36) - 1])]);
        assert_eq!(f.cardinality(), 100);
        assert_eq!(f.not(), RleBitmap::empty(100));
    }

    #[test]
    fn builder_merges_fills() {
        let mut b = RleBuilder::new(64 * 6);
        b.push_fill(false, 1);
        b.push_literal(0);
        b.push_literal(5);
        b.push_literal(!0);
        b.push_fill(true, 2);
        let r = b.finish();
        let ms: Vec<_> = r.markers().map(|(m, _)| m).collect();
        assert_eq!(ms, [Marker { fill: false, run: 2, dirty: 1 }, Marker { fill: true, run: 3, dirty: 0 }]);
    }

    #[test]
    fn ranges() {
        let mut b = RleBitmap::builder(1000);
        b.push(3);
        b.push_range(10, 500);
        b.push(501);
        b.push_range(640, 704);
        let r = b.finish();
        let mut want: Vec<u32> = vec![3];
        want.extend(10..500);
        want.push(501);
        want.extend(640..704);
        assert_eq!(r.to_positions(), want);
        assert_eq!(r.decompress().to_positions(), want);
    }

    #[test]
    fn ops_against_uncompressed() {
        let a = [0u32, 1, 2, 64, 65, 190, 191, 192, 300, 301];
        let b = [1u32, 64, 100, 191, 250, 310];
        for op in [BinaryOp::And, BinaryOp::Or, BinaryOp::Xor, BinaryOp::AndNot] {
            let r = rle(&a, 320).binary(&rle(&b, 311), op);
            let u = UncompressedBitmap::from_positions(&a, 320)
                .unwrap()
                .binary(&UncompressedBitmap::from_positions(&b, 311).unwrap(), op);
            assert_eq!(r.to_positions(), u.to_positions(), "{op:?}");
            assert_eq!(r.bit_len(), 320);
        }
    }

    #[test]
    fn cursor_jumps_markers() {
        let mut b = RleBitmap::builder(64 * 100);
        b.push(7);
        b.push_range(64 * 10, 64 * 20);
        b.push(64 * 50 + 3);
        let r = b.finish();
        let mut c = r.cursor();
        assert_eq!(c.current(), Some(7));
        assert_eq!(c.advance_to(8), Some(640));
        assert_eq!(c.advance_to(700), Some(700));
        assert_eq!(c.advance_to(64 * 20), Some(64 * 50 + 3));
        assert_eq!(c.step(), None);
        assert!(r.contains(64 * 15));
        assert!(!r.contains(64 * 20));
    }

    #[test]
    fn raw_parts_validation() {
        let r = rle(&[5, 900], 1000);
        assert_eq!(RleBitmap::from_raw_parts(r.words(), 1000).unwrap(), r);
        assert!(RleBitmap::from_raw_parts(r.words(), 2000).is_err());
        let overrun = [Marker { fill: false, run: 0, dirty: 3 }.encode(), 1];
        assert!(RleBitmap::from_raw_parts(&overrun, 192).is_err());
        // Non-canonical input is accepted and normalized.
        let loose = [Marker { fill: false, run: 1, dirty: 1 }.encode(), 0];
        assert_eq!(RleBitmap::from_raw_parts(&loose, 128).unwrap(), RleBitmap::empty(128));
    }
}
