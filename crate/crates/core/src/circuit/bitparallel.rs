//! Bit-parallel threshold algorithms built from whole-bitmap operations.

use alloc::vec::Vec;

use crate::bitmap::{max_len, BinaryOp, Bitmap};
use crate::{check_threshold, Error, Result};

/// Counts binary bitmap operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub ops: u64,
}

impl OpCounter {
    fn op<B: Bitmap>(&mut self, a: &B, b: &B, op: BinaryOp) -> B {
        self.ops += 1;
        a.binary(b, op)
    }
}

/// `C_j` holds the positions seen in at least `j` of the inputs so far; each
/// new input `B` updates `C_j |= C_{j-1} & B` for `j` from high to low.
///
/// Uses exactly `2NT - N - T^2 + T - 1` binary operations.
pub fn looped_threshold<B: Bitmap>(inputs: &[B], t: usize) -> Result<B> {
    looped_threshold_counted(inputs, t, &mut OpCounter::default())
}

pub fn looped_threshold_counted<B: Bitmap>(inputs: &[B], t: usize, ops: &mut OpCounter) -> Result<B> {
    check_threshold(t, inputs.len())?;
    let len = max_len(inputs);
    let mut c: Vec<B> = (0..t).map(|_| B::empty(len)).collect();
    c[0] = inputs[0].clone();
    for (i, b) in inputs.iter().enumerate().skip(1) {
        for j in (1..t.min(i + 1)).rev() {
            let carry = ops.op(&c[j - 1], b, BinaryOp::And);
            c[j] = ops.op(&c[j], &carry, BinaryOp::Or);
        }
        c[0] = ops.op(&c[0], b, BinaryOp::Or);
    }
    let out = c.swap_remove(t - 1);
    Ok(if out.bit_len() < len { out.or(&B::empty(len)) } else { out })
}

/// Closed form for the operation count of [`looped_threshold`].
pub fn looped_op_count(n: usize, t: usize) -> u64 {
    let (n, t) = (n as i64, t as i64);
    (2 * n * t - n - t * t + t - 1) as u64
}

type Slot<B> = Option<B>;

fn xor_o<B: Bitmap>(ops: &mut OpCounter, a: &Slot<B>, b: &Slot<B>) -> Slot<B> {
    match (a, b) {
        (Some(x), Some(y)) => Some(ops.op(x, y, BinaryOp::Xor)),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    }
}

fn or_o<B: Bitmap>(ops: &mut OpCounter, a: Slot<B>, b: Slot<B>) -> Slot<B> {
    match (a, b) {
        (Some(x), Some(y)) => Some(ops.op(&x, &y, BinaryOp::Or)),
        (x, None) | (None, x) => x,
    }
}

fn and_o<B: Bitmap>(ops: &mut OpCounter, a: &Slot<B>, b: &Slot<B>) -> Slot<B> {
    match (a, b) {
        (Some(x), Some(y)) => Some(ops.op(x, y, BinaryOp::And)),
        _ => None,
    }
}

/// Counts with carry-save digits, then tests `count >= t` through the carry
/// out of `count + (2^m - t)`.
///
/// Digit `p` is a pair of bitmaps whose bits sum to 0, 1 or 2 at each
/// position; increment number `k` propagates through the `tz(k)` lowest
/// digits only. `None` stands for a bitmap known to be empty.
pub fn csv_threshold<B: Bitmap>(inputs: &[B], t: usize) -> Result<B> {
    csv_threshold_counted(inputs, t, &mut OpCounter::default())
}

pub fn csv_threshold_counted<B: Bitmap>(inputs: &[B], t: usize, ops: &mut OpCounter) -> Result<B> {
    let n = inputs.len();
    if t < 2 || t >= n {
        return Err(Error::InvalidThreshold { t, n });
    }
    let len = max_len(inputs);
    let m = super::synth::weight_width(n);
    let mut c1: Vec<Slot<B>> = (0..=m).map(|_| None).collect();
    let mut c2: Vec<Slot<B>> = (0..=m).map(|_| None).collect();
    // The first two inputs form the first digit directly.
    c1[0] = Some(inputs[0].clone());
    c2[0] = Some(inputs[1].clone());
    let mut k = 1u64;
    for b in &inputs[2..] {
        k += 1;
        let x = k.trailing_zeros() as usize;
        let mut carry: Slot<B> = Some(b.clone());
        for p in 0..x {
            let a = c1[p].take();
            let bb = c2[p].take();
            let s = xor_o(ops, &a, &bb);
            c2[p] = xor_o(ops, &s, &carry);
            let ab = and_o(ops, &a, &bb);
            let cs = and_o(ops, &carry, &s);
            carry = or_o(ops, ab, cs);
        }
        debug_assert!(c1[x].is_none());
        c1[x] = carry;
    }
    // Ripple-add the two rows into the binary count, then run the carry
    // chain of count + (2^m - t); bit i of that constant is !bit i of (t - 1).
    let a = (t - 1) as u64;
    let mut add_carry: Slot<B> = None;
    let mut cmp: Slot<B> = None;
    for i in 0..m {
        let (x, y) = (c1[i].take(), c2[i].take());
        let s = xor_o(ops, &x, &y);
        let v = xor_o(ops, &s, &add_carry);
        if i + 1 < m {
            let xy = and_o(ops, &x, &y);
            let cs = and_o(ops, &add_carry, &s);
            add_carry = or_o(ops, xy, cs);
        }
        cmp = if a >> i & 1 == 0 { or_o(ops, v, cmp) } else { and_o(ops, &v, &cmp) };
    }
    Ok(match cmp {
        Some(out) if out.bit_len() < len => out.or(&B::empty(len)),
        Some(out) => out,
        None => B::empty(len),
    })
}
