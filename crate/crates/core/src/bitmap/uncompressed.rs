//! Plain word-array bitmaps.

use alloc::vec;
use alloc::vec::Vec;

use super::{tail_mask, word_count, BinaryOp, Bitmap, BitmapBuilder, Chunk, PosCursor, RunIter};

/// A bitmap stored as 64-bit words.
///
/// Trailing all-zero words are not stored, so two bitmaps with equal length
/// and equal bits compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct UncompressedBitmap {
    words: Vec<u64>,
    len: u32,
}

impl UncompressedBitmap {
    fn normalized(mut words: Vec<u64>, len: u32) -> Self {
        words.truncate(word_count(len));
        if words.len() == word_count(len) {
            if let Some(last) = words.last_mut() {
                *last &= tail_mask(len);
            }
        }
        while words.last() == Some(&0) {
            words.pop();
        }
        UncompressedBitmap { words, len }
    }

    /// Stored words; words past the end of this slice are zero.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Word `i`, reading zero past the stored prefix.
    #[inline]
    pub fn word(&self, i: usize) -> u64 {
        self.words.get(i).copied().unwrap_or(0)
    }

    /// The bits as chunks, for run iteration.
    pub fn chunks(&self) -> impl Iterator<Item = Chunk<'_>> {
        let rest = (word_count(self.len) - self.words.len()) as u32;
        [Chunk::Literals(&self.words), Chunk::Fill { bit: false, words: rest }].into_iter()
    }

    pub fn runs(&self) -> RunIter<'_, impl Iterator<Item = Chunk<'_>>> {
        RunIter::new(self.chunks(), self.len)
    }

    /// Sets bit `pos`, growing the length if needed.
    pub fn insert(&mut self, pos: u32) {
        let w = (pos / 64) as usize;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (pos % 64);
        self.len = self.len.max(pos + 1);
    }
}

impl Bitmap for UncompressedBitmap {
    type Builder = UncompressedBuilder;
    type Cursor<'a> = WordCursor<'a>;
    type Ones<'a> = WordOnes<'a>;

    fn empty(len: u32) -> Self {
        UncompressedBitmap { words: Vec::new(), len }
    }

    fn full(len: u32) -> Self {
        Self::normalized(vec![!0; word_count(len)], len)
    }

    fn builder(len: u32) -> UncompressedBuilder {
        UncompressedBuilder { words: vec![0; word_count(len)], len }
    }

    fn from_words(words: &[u64], len: u32) -> Self {
        Self::normalized(words.to_vec(), len)
    }

    fn bit_len(&self) -> u32 {
        self.len
    }

    fn cardinality(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn contains(&self, pos: u32) -> bool {
        self.word((pos / 64) as usize) >> (pos % 64) & 1 == 1
    }

    fn ones(&self) -> WordOnes<'_> {
        WordOnes::new(&self.words, 0)
    }

    fn cursor(&self) -> WordCursor<'_> {
        WordCursor::new(&self.words)
    }

    fn binary(&self, other: &Self, op: BinaryOp) -> Self {
        let len = self.len.max(other.len);
        let n = match op {
            BinaryOp::And => self.words.len().min(other.words.len()),
            BinaryOp::AndNot => self.words.len(),
            BinaryOp::Or | BinaryOp::Xor => self.words.len().max(other.words.len()),
        };
        let words = (0..n).map(|i| op.apply(self.word(i), other.word(i))).collect();
        Self::normalized(words, len)
    }

    fn not(&self) -> Self {
        let words = (0..word_count(self.len)).map(|i| !self.word(i)).collect();
        Self::normalized(words, self.len)
    }

    fn or_into(&self, acc: &mut [u64]) {
        for (a, w) in acc.iter_mut().zip(&self.words) {
            *a |= w;
        }
    }

    fn run_count(&self) -> u64 {
        self.runs().count() as u64
    }

    fn size_in_words(&self) -> usize {
        self.words.len()
    }

    fn is_zero(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug)]
pub struct UncompressedBuilder {
    words: Vec<u64>,
    len: u32,
}

impl BitmapBuilder for UncompressedBuilder {
    type Output = UncompressedBitmap;

    fn push(&mut self, pos: u32) {
        debug_assert!(pos < self.len);
        self.words[(pos / 64) as usize] |= 1 << (pos % 64);
    }

    fn push_range(&mut self, start: u32, end: u32) {
        debug_assert!(start <= end && end <= self.len);
        if start >= end {
            return;
        }
        let (sw, ew) = ((start / 64) as usize, ((end - 1) / 64) as usize);
        let lo = !0u64 << (start % 64);
        let hi = tail_mask(end);
        if sw == ew {
            self.words[sw] |= lo & hi;
        } else {
            self.words[sw] |= lo;
            self.words[sw + 1..ew].fill(!0);
            self.words[ew] |= hi;
        }
    }

    fn finish(self) -> UncompressedBitmap {
        UncompressedBitmap::normalized(self.words, self.len)
    }
}

/// Set positions of a word slice, in ascending order.
#[derive(Clone, Debug)]
pub struct WordOnes<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
    base: u32,
}

impl<'a> WordOnes<'a> {
    /// Iterates the set bits of `words`, numbering the first word's bit 0 as `base`.
    pub fn new(words: &'a [u64], base: u32) -> Self {
        WordOnes { words, idx: 0, cur: words.first().copied().unwrap_or(0), base }
    }
}

impl Iterator for WordOnes<'_> {
    type Item = u32;

    #[inline]
    fn next(&mut self) -> Option<u32> {
        while self.cur == 0 {
            self.idx += 1;
            self.cur = *self.words.get(self.idx)?;
        }
        let bit = self.cur.trailing_zeros();
        self.cur &= self.cur - 1;
        Some(self.base + self.idx as u32 * 64 + bit)
    }

    fn fold<A, F: FnMut(A, u32) -> A>(self, init: A, mut f: F) -> A {
        let mut acc = init;
        let mut cur = self.cur;
        for i in self.idx..self.words.len() {
            if i > self.idx {
                cur = self.words[i];
            }
            let base = self.base + i as u32 * 64;
            while cur != 0 {
                acc = f(acc, base + cur.trailing_zeros());
                cur &= cur - 1;
            }
        }
        acc
    }
}

/// Cursor over an uncompressed word slice.
#[derive(Clone, Debug)]
pub struct WordCursor<'a> {
    words: &'a [u64],
    cur: Option<u32>,
}

impl<'a> WordCursor<'a> {
    pub fn new(words: &'a [u64]) -> Self {
        let mut c = WordCursor { words, cur: None };
        c.cur = c.seek(0);
        c
    }

    fn seek(&self, target: u32) -> Option<u32> {
        let mut w = (target / 64) as usize;
        let mut bits = *self.words.get(w)? & (!0u64 << (target % 64));
        while bits == 0 {
            w += 1;
            bits = *self.words.get(w)?;
        }
        Some(w as u32 * 64 + bits.trailing_zeros())
    }
}

impl PosCursor for WordCursor<'_> {
    fn current(&self) -> Option<u32> {
        self.cur
    }

    fn advance_to(&mut self, target: u32) -> Option<u32> {
        let c = self.cur?;
        if c < target {
            self.cur = self.seek(target);
        }
        self.cur
    }
}
