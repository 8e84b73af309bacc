//! Bitmap representations and whole-bitmap operations.
//!
//! Bit `i` of a bitmap lives in word `i / 64` at bit `i % 64` (least
//! significant bit first). Every bitmap carries a logical length in bits;
//! binary operations produce a result as long as the longer operand, with
//! missing bits of the shorter one read as zero.

pub mod rle;
pub mod uncompressed;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::{Error, Result};

pub const WORD_BITS: u32 = 64;

/// Number of 64-bit words needed for `len` bits.
#[inline]
pub fn word_count(len: u32) -> usize {
    (len as usize).div_ceil(WORD_BITS as usize)
}

/// Mask of the valid bits in the last word of a `len`-bit bitmap.
#[inline]
pub fn tail_mask(len: u32) -> u64 {
    match len % WORD_BITS {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    And,
    Or,
    Xor,
    /// `a & !b`.
    AndNot,
}

impl BinaryOp {
    #[inline]
    pub fn apply(self, a: u64, b: u64) -> u64 {
        match self {
            BinaryOp::And => a & b,
            BinaryOp::Or => a | b,
            BinaryOp::Xor => a ^ b,
            BinaryOp::AndNot => a & !b,
        }
    }

    #[inline]
    pub fn apply_bit(self, a: bool, b: bool) -> bool {
        self.apply(a as u64, b as u64) & 1 == 1
    }
}

/// Forward iteration over the set positions of a bitmap or sorted list.
pub trait PosCursor {
    /// The position the cursor rests on, or `None` once exhausted.
    fn current(&self) -> Option<u32>;

    /// Moves to the smallest set position `>= target` and returns it. Never
    /// moves backwards: a target at or below the current position is a no-op.
    fn advance_to(&mut self, target: u32) -> Option<u32>;

    /// Moves past the current position.
    fn step(&mut self) -> Option<u32> {
        let next = self.current()?.checked_add(1)?;
        self.advance_to(next)
    }
}

/// Incremental construction of a bitmap from ascending positions.
pub trait BitmapBuilder {
    type Output;

    /// Adds `pos`, which must exceed every position added so far and be below
    /// the builder's length.
    fn push(&mut self, pos: u32);

    /// Adds every position in `start..end`, under the same ordering rule.
    fn push_range(&mut self, start: u32, end: u32);

    fn finish(self) -> Self::Output;
}

/// Operations shared by both bitmap representations.
pub trait Bitmap: Clone + PartialEq + Debug {
    type Builder: BitmapBuilder<Output = Self>;
    type Cursor<'a>: PosCursor
    where
        Self: 'a;
    type Ones<'a>: Iterator<Item = u32>
    where
        Self: 'a;

    /// An all-zero bitmap of `len` bits.
    fn empty(len: u32) -> Self;
    /// An all-one bitmap of `len` bits.
    fn full(len: u32) -> Self;
    fn builder(len: u32) -> Self::Builder;
    /// Builds from raw words; bits at or beyond `len` are ignored.
    fn from_words(words: &[u64], len: u32) -> Self;

    fn bit_len(&self) -> u32;
    fn cardinality(&self) -> u64;
    fn contains(&self, pos: u32) -> bool;
    fn ones(&self) -> Self::Ones<'_>;
    fn cursor(&self) -> Self::Cursor<'_>;
    fn binary(&self, other: &Self, op: BinaryOp) -> Self;
    /// Complement within the bitmap's own length.
    fn not(&self) -> Self;
    /// ORs this bitmap into `acc`, which must hold at least `word_count(bit_len)` words.
    fn or_into(&self, acc: &mut [u64]);
    /// Number of maximal runs of identical bits over `0..bit_len`.
    fn run_count(&self) -> u64;
    /// Storage footprint in 64-bit words.
    fn size_in_words(&self) -> usize;

    /// Builds from strictly increasing positions below `len`.
    fn from_positions(positions: &[u32], len: u32) -> Result<Self> {
        validate_positions(positions, len)?;
        let mut b = Self::builder(len);
        for &p in positions {
            b.push(p);
        }
        Ok(b.finish())
    }

    fn to_positions(&self) -> Vec<u32> {
        self.ones().collect()
    }

    fn is_zero(&self) -> bool {
        self.ones().next().is_none()
    }

    fn and(&self, other: &Self) -> Self {
        self.binary(other, BinaryOp::And)
    }
    fn or(&self, other: &Self) -> Self {
        self.binary(other, BinaryOp::Or)
    }
    fn xor(&self, other: &Self) -> Self {
        self.binary(other, BinaryOp::Xor)
    }
    fn and_not(&self, other: &Self) -> Self {
        self.binary(other, BinaryOp::AndNot)
    }
}

pub(crate) fn validate_positions(positions: &[u32], len: u32) -> Result<()> {
    for w in positions.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::UnsortedPositions { prev: w[0], next: w[1] });
        }
    }
    if let Some(&last) = positions.last() {
        if last >= len {
            return Err(Error::PositionOutOfRange { pos: last, len });
        }
    }
    Ok(())
}

/// Largest bit length among `inputs` (0 when there are none).
pub fn max_len<B: Bitmap>(inputs: &[B]) -> u32 {
    inputs.iter().map(Bitmap::bit_len).max().unwrap_or(0)
}

/// OR of all inputs, accumulated in a single uncompressed buffer.
pub fn wide_or<B: Bitmap>(inputs: &[B]) -> B {
    let len = max_len(inputs);
    let mut acc = vec![0u64; word_count(len)];
    for b in inputs {
        b.or_into(&mut acc);
    }
    B::from_words(&acc, len)
}

/// AND of all inputs, smallest first, stopping early once the result is empty.
///
/// With no inputs this returns an empty zero-length bitmap.
pub fn wide_and<B: Bitmap>(inputs: &[B]) -> B {
    let len = max_len(inputs);
    let mut order: Vec<&B> = inputs.iter().collect();
    order.sort_by_key(|b| b.size_in_words());
    let Some((first, rest)) = order.split_first() else {
        return B::empty(0);
    };
    let mut acc = (*first).clone();
    for b in rest {
        if acc.is_zero() {
            break;
        }
        acc = acc.and(b);
    }
    if acc.bit_len() < len {
        acc = acc.or(&B::empty(len));
    }
    acc
}

/// A maximal run of identical bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Run {
    pub start: u32,
    pub len: u32,
    pub value: bool,
}

/// A stretch of words in a bitmap: either a clean fill or literal words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chunk<'a> {
    Fill { bit: bool, words: u32 },
    Literals(&'a [u64]),
}

/// Iterates the bit runs described by a sequence of chunks covering `len` bits.
#[derive(Clone, Debug)]
pub struct RunIter<'a, I: Iterator<Item = Chunk<'a>>> {
    chunks: I,
    len: u32,
    pos: u32,
    lits: &'a [u64],
    word: u64,
    word_bits: u32,
    pending: Option<(bool, u32)>,
}

impl<'a, I: Iterator<Item = Chunk<'a>>> RunIter<'a, I> {
    pub fn new(chunks: I, len: u32) -> Self {
        RunIter { chunks, len, pos: 0, lits: &[], word: 0, word_bits: 0, pending: None }
    }

    /// Next homogeneous piece `(value, bits)`, not necessarily maximal.
    fn piece(&mut self) -> Option<(bool, u32)> {
        if let Some(p) = self.pending.take() {
            return Some(p);
        }
        loop {
            if self.pos >= self.len {
                return None;
            }
            if self.word_bits > 0 {
                let v = self.word & 1 == 1;
                let k = if v { self.word.trailing_ones() } else { self.word.trailing_zeros() };
                let k = k.min(self.word_bits);
                self.word = if k >= 64 { 0 } else { self.word >> k };
                self.word_bits -= k;
                self.pos += k;
                return Some((v, k));
            }
            if let Some((&w, rest)) = self.lits.split_first() {
                self.lits = rest;
                self.word = w;
                self.word_bits = WORD_BITS.min(self.len - self.pos);
                continue;
            }
            match self.chunks.next() {
                Some(Chunk::Fill { bit, words }) => {
                    let bits = (words as u64 * WORD_BITS as u64).min((self.len - self.pos) as u64) as u32;
                    if bits == 0 {
                        continue;
                    }
                    self.pos += bits;
                    return Some((bit, bits));
                }
                Some(Chunk::Literals(l)) => self.lits = l,
                None => {
                    // Anything not covered by chunks reads as zero.
                    let bits = self.len - self.pos;
                    self.pos = self.len;
                    return Some((false, bits));
                }
            }
        }
    }
}

impl<'a, I: Iterator<Item = Chunk<'a>>> Iterator for RunIter<'a, I> {
    type Item = Run;

    fn next(&mut self) -> Option<Run> {
        let (value, mut len) = self.piece()?;
        let start = self.pos - len;
        while let Some((v, k)) = self.piece() {
            if v != value {
                self.pending = Some((v, k));
                break;
            }
            len += k;
        }
        Some(Run { start, len, value })
    }
}
