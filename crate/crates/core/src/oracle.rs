//! Brute-force reference implementations.
//!
//! These operate on plain position lists and share no code with the
//! optimized algorithms, so they can serve as ground truth.

use alloc::vec;
use alloc::vec::Vec;

use crate::bitmap::{validate_positions, Bitmap, BitmapBuilder};
use crate::{check_threshold, Error, Result, SymmetricSpec};

fn counts(sets: &[Vec<u32>], r: u32) -> Result<Vec<u32>> {
    let mut c = vec![0u32; r as usize];
    for s in sets {
        validate_positions(s, r)?;
        for &p in s {
            c[p as usize] += 1;
        }
    }
    Ok(c)
}

/// Positions in `0..r` present in at least `t` of `sets`.
pub fn brute_threshold(sets: &[Vec<u32>], t: usize, r: u32) -> Result<Vec<u32>> {
    check_threshold(t, sets.len())?;
    let c = counts(sets, r)?;
    Ok((0..r).filter(|&i| c[i as usize] as usize >= t).collect())
}

/// Positions in `0..r` whose membership count is accepted by `spec`.
pub fn brute_symmetric(sets: &[Vec<u32>], spec: &SymmetricSpec, r: u32) -> Result<Vec<u32>> {
    spec.check_arity(sets.len())?;
    let c = counts(sets, r)?;
    Ok((0..r).filter(|&i| spec.accepts(c[i as usize] as usize)).collect())
}

/// A row-major table of small integer attribute values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowTable {
    attrs: usize,
    cells: Vec<u32>,
}

/// An equality test `row[attr] == value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Criterion {
    pub attr: usize,
    pub value: u32,
}

impl RowTable {
    pub fn new(attrs: usize) -> Self {
        RowTable { attrs, cells: Vec::new() }
    }

    pub fn push_row(&mut self, row: &[u32]) -> Result<()> {
        if row.len() != self.attrs {
            return Err(Error::ArityMismatch { expected: self.attrs, got: row.len() });
        }
        self.cells.extend_from_slice(row);
        Ok(())
    }

    pub fn attrs(&self) -> usize {
        self.attrs
    }

    pub fn rows(&self) -> usize {
        self.cells.len().checked_div(self.attrs).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.cells[i * self.attrs..(i + 1) * self.attrs]
    }

    /// The bitmap of rows satisfying `c`.
    pub fn criterion_bitmap<B: Bitmap>(&self, c: Criterion) -> Result<B> {
        self.check(c)?;
        let mut b = B::builder(self.rows() as u32);
        for i in 0..self.rows() {
            if self.cells[i * self.attrs + c.attr] == c.value {
                b.push(i as u32);
            }
        }
        Ok(b.finish())
    }

    fn check(&self, c: Criterion) -> Result<()> {
        if c.attr >= self.attrs {
            return Err(Error::InvalidInput(alloc::format!(
                "attribute {} out of range for {} attributes",
                c.attr,
                self.attrs
            )));
        }
        Ok(())
    }
}

/// Rows satisfying at least `t` of `criteria`, found by a full scan.
pub fn rowscan(table: &RowTable, criteria: &[Criterion], t: usize) -> Result<Vec<u32>> {
    check_threshold(t, criteria.len())?;
    for &c in criteria {
        table.check(c)?;
    }
    let mut out = Vec::new();
    for (i, row) in table.cells.chunks_exact(table.attrs.max(1)).enumerate() {
        let hits = criteria.iter().filter(|c| row[c.attr] == c.value).count();
        if hits >= t {
            out.push(i as u32);
        }
    }
    Ok(out)
}
