//! Threshold and symmetric Boolean functions over bitmaps.
//!
//! Given `N` bitmaps and a threshold `T`, the threshold function sets bit `i`
//! of the output when at least `T` of the inputs have bit `i` set. Symmetric
//! functions generalize this to any predicate of the per-position count.
//!
//! Bitmaps come in two representations sharing the [`Bitmap`] trait:
//! [`UncompressedBitmap`] (plain 64-bit words) and [`RleBitmap`] (a word-aligned
//! run-length encoding with clean fill runs and dirty literal words).
//!
//! Algorithm families:
//! - [`counter`]: per-position counting (ScanCount, HashCnt, wSort, w2CtN/A/I).
//! - [`heap`]: priority-queue merges with skipping (wHeap, MgOpt, MergeSkip, DivideSkip).
//! - [`runmerge`]: a run-level merge of compressed inputs.
//! - [`circuit`]: Boolean circuits evaluated with whole-bitmap operations,
//!   plus the Looped and carry-save (CSvCkt) bit-parallel algorithms.
//! - [`oracle`]: brute-force references used for verification.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bitmap;
pub mod circuit;
pub mod counter;
mod error;
pub mod heap;
pub mod oracle;
pub mod runmerge;

pub use bitmap::{rle::RleBitmap, uncompressed::UncompressedBitmap, BinaryOp, Bitmap, BitmapBuilder, PosCursor};
pub use error::{Error, Result};

/// Validates `1 <= t <= n`.
pub(crate) fn check_threshold(t: usize, n: usize) -> Result<()> {
    if t == 0 || t > n {
        return Err(Error::InvalidThreshold { t, n });
    }
    Ok(())
}

/// The accepted-count vector of a symmetric Boolean function on `N` inputs.
///
/// `accept[k]` tells whether a position set in exactly `k` inputs is in the
/// output. The vector has `N + 1` entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymmetricSpec {
    accept: alloc::vec::Vec<bool>,
}

impl SymmetricSpec {
    pub fn new(accept: alloc::vec::Vec<bool>) -> Result<Self> {
        if accept.is_empty() {
            return Err(Error::InvalidInput("accept vector must have N + 1 entries".into()));
        }
        Ok(SymmetricSpec { accept })
    }

    /// The spec of the threshold function `count >= t`.
    pub fn threshold(n: usize, t: usize) -> Self {
        SymmetricSpec { accept: (0..=n).map(|k| k >= t).collect() }
    }

    /// Odd parity.
    pub fn parity(n: usize) -> Self {
        SymmetricSpec { accept: (0..=n).map(|k| k % 2 == 1).collect() }
    }

    /// Exactly `k` inputs set.
    pub fn exactly(n: usize, k: usize) -> Self {
        SymmetricSpec { accept: (0..=n).map(|c| c == k).collect() }
    }

    /// Number of inputs `N`.
    pub fn arity(&self) -> usize {
        self.accept.len() - 1
    }

    pub fn accepts(&self, count: usize) -> bool {
        self.accept[count]
    }

    pub fn accept(&self) -> &[bool] {
        &self.accept
    }

    pub(crate) fn check_arity(&self, n: usize) -> Result<()> {
        if self.arity() != n {
            return Err(Error::ArityMismatch { expected: self.arity(), got: n });
        }
        Ok(())
    }
}
