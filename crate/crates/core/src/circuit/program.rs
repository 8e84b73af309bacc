//! Straight-line programs over bitmap slots, and their interpreter.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{Circuit, Gate};
use crate::bitmap::{max_len, word_count, BinaryOp, Bitmap};
use crate::{Error, Result, UncompressedBitmap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instr {
    Binary {
        op: BinaryOp,
        a: u32,
        b: u32,
        dst: u32,
    },
    Not {
        a: u32,
        dst: u32,
    },
    Const {
        value: bool,
        dst: u32,
    },
    /// The slot's value is not read again.
    Reclaim {
        slot: u32,
    },
}

/// A compiled circuit. Slots `0..arity` hold the inputs; the others hold
/// intermediate values and are reused once reclaimed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitProgram {
    arity: u32,
    slots: u32,
    result: u32,
    instrs: Vec<Instr>,
}

impl BitProgram {
    /// Assembles a program, checking that every slot is written before it is
    /// read and that the result slot is live at the end.
    pub fn new(arity: u32, slots: u32, result: u32, instrs: Vec<Instr>) -> Result<Self> {
        let bad = |m: &str| Err(Error::Malformed(m.into()));
        if arity > slots || result >= slots.max(1) {
            return bad("slot count too small");
        }
        let mut live = vec![false; slots as usize];
        live[..arity as usize].fill(true);
        let read = |live: &[bool], s: u32| live.get(s as usize).copied().unwrap_or(false);
        for ins in &instrs {
            match *ins {
                Instr::Binary { a, b, dst, .. } => {
                    if !read(&live, a) || !read(&live, b) || dst >= slots {
                        return bad("binary instruction reads a dead slot");
                    }
                    live[dst as usize] = true;
                }
                Instr::Not { a, dst } => {
                    if !read(&live, a) || dst >= slots {
                        return bad("not instruction reads a dead slot");
                    }
                    live[dst as usize] = true;
                }
                Instr::Const { dst, .. } => {
                    if dst >= slots {
                        return bad("const instruction writes past the slots");
                    }
                    live[dst as usize] = true;
                }
                Instr::Reclaim { slot } => {
                    if !read(&live, slot) {
                        return bad("reclaim of a dead slot");
                    }
                    live[slot as usize] = false;
                }
            }
        }
        if arity == 0 && slots == 0 || !read(&live, result) {
            return bad("result slot is not live at the end");
        }
        Ok(BitProgram { arity, slots, result, instrs })
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    /// Total slots, inputs included.
    pub fn slots(&self) -> usize {
        self.slots as usize
    }

    pub fn result(&self) -> u32 {
        self.result
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    /// Number of bitmap operations (reclaims excluded).
    pub fn op_count(&self) -> usize {
        self.instrs.iter().filter(|i| !matches!(i, Instr::Reclaim { .. })).count()
    }

    /// Largest number of intermediate values live at once.
    pub fn peak_live(&self) -> usize {
        let mut live = vec![false; self.slots as usize];
        let (mut cur, mut peak) = (0usize, 0usize);
        for ins in &self.instrs {
            match *ins {
                Instr::Binary { dst, .. } | Instr::Not { dst, .. } | Instr::Const { dst, .. } => {
                    if dst >= self.arity && !live[dst as usize] {
                        live[dst as usize] = true;
                        cur += 1;
                        peak = peak.max(cur);
                    }
                }
                Instr::Reclaim { slot } => {
                    if slot >= self.arity && live[slot as usize] {
                        live[slot as usize] = false;
                        cur -= 1;
                    }
                }
            }
        }
        peak
    }

    /// Human-readable C-like source that evaluates the program one word at a time.
    pub fn to_c_source(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "void {name}(const uint64_t **inputs, size_t words, uint64_t *output) {{");
        let _ = writeln!(s, "  for (size_t i = 0; i < words; ++i) {{");
        let _ = writeln!(s, "    uint64_t s[{}];", self.slots.max(1));
        for k in 0..self.arity {
            let _ = writeln!(s, "    s[{k}] = inputs[{k}][i];");
        }
        for ins in &self.instrs {
            let _ = match *ins {
                Instr::Binary { op, a, b, dst } => {
                    let e = match op {
                        BinaryOp::And => alloc::format!("s[{a}] & s[{b}]"),
                        BinaryOp::Or => alloc::format!("s[{a}] | s[{b}]"),
                        BinaryOp::Xor => alloc::format!("s[{a}] ^ s[{b}]"),
                        BinaryOp::AndNot => alloc::format!("s[{a}] & ~s[{b}]"),
                    };
                    writeln!(s, "    s[{dst}] = {e};")
                }
                Instr::Not { a, dst } => writeln!(s, "    s[{dst}] = ~s[{a}];"),
                Instr::Const { value, dst } => {
                    writeln!(s, "    s[{dst}] = {};", if value { "~0ULL" } else { "0" })
                }
                Instr::Reclaim { slot } => writeln!(s, "    /* s[{slot}] dead */"),
            };
        }
        let _ = writeln!(s, "    output[i] = s[{}];", self.result);
        let _ = writeln!(s, "  }}");
        let _ = writeln!(s, "}}");
        s
    }
}

/// Lowers a circuit to a program, reclaiming each value right after its last use.
pub fn compile(c: &Circuit) -> BitProgram {
    let arity = c.arity() as u32;
    let seen = c.reachable();
    let gates = c.gates();
    let mut last_use = vec![usize::MAX; gates.len()];
    for (i, g) in gates.iter().enumerate() {
        if !seen[i] {
            continue;
        }
        match *g {
            Gate::Binary(_, a, b) => {
                last_use[a as usize] = i;
                last_use[b as usize] = i;
            }
            Gate::Not(a) => last_use[a as usize] = i,
            _ => {}
        }
    }
    let output = c.output() as usize;
    let mut slot = vec![u32::MAX; gates.len()];
    for (k, &id) in c.inputs().iter().enumerate() {
        slot[id as usize] = k as u32;
    }
    let mut instrs = Vec::new();
    for (k, &id) in c.inputs().iter().enumerate() {
        if last_use[id as usize] == usize::MAX && id as usize != output {
            instrs.push(Instr::Reclaim { slot: k as u32 });
        }
    }
    let mut free: Vec<u32> = Vec::new();
    let mut next = arity;
    for (i, g) in gates.iter().enumerate() {
        if !seen[i] || matches!(g, Gate::Input(_)) {
            continue;
        }
        let dst = free.pop().unwrap_or_else(|| {
            next += 1;
            next - 1
        });
        slot[i] = dst;
        let operands: &[u32] = match *g {
            Gate::Binary(op, a, b) => {
                instrs.push(Instr::Binary { op, a: slot[a as usize], b: slot[b as usize], dst });
                &[a, b]
            }
            Gate::Not(a) => {
                instrs.push(Instr::Not { a: slot[a as usize], dst });
                &[a]
            }
            Gate::Const(value) => {
                instrs.push(Instr::Const { value, dst });
                &[]
            }
            Gate::Input(_) => unreachable!(),
        };
        for (j, &x) in operands.iter().enumerate() {
            let x = x as usize;
            if last_use[x] == i && x != output && !operands[..j].contains(&(x as u32)) {
                instrs.push(Instr::Reclaim { slot: slot[x] });
                if slot[x] >= arity {
                    free.push(slot[x]);
                }
            }
        }
    }
    BitProgram { arity, slots: next, result: slot[output], instrs }
}

enum Val<'a, B> {
    Dead,
    Input(&'a B),
    Owned(B),
}

impl<B> Val<'_, B> {
    fn get(&self) -> &B {
        match self {
            Val::Input(b) => b,
            Val::Owned(b) => b,
            Val::Dead => unreachable!("validated programs never read dead slots"),
        }
    }
}

fn check_arity(p: &BitProgram, n: usize) -> Result<()> {
    if p.arity() != n {
        return Err(Error::ArityMismatch { expected: p.arity(), got: n });
    }
    Ok(())
}

/// Runs the program one whole-bitmap operation at a time.
///
/// The result is as long as the longest input.
pub fn execute<B: Bitmap>(p: &BitProgram, inputs: &[B]) -> Result<B> {
    check_arity(p, inputs.len())?;
    let len = max_len(inputs);
    let mut slots: Vec<Val<'_, B>> = (0..p.slots).map(|_| Val::Dead).collect();
    for (s, b) in slots.iter_mut().zip(inputs) {
        *s = Val::Input(b);
    }
    for ins in &p.instrs {
        match *ins {
            Instr::Binary { op, a, b, dst } => {
                let v = slots[a as usize].get().binary(slots[b as usize].get(), op);
                slots[dst as usize] = Val::Owned(v);
            }
            Instr::Not { a, dst } => {
                let x = slots[a as usize].get();
                let v = if x.bit_len() == len { x.not() } else { B::full(len).and_not(x) };
                slots[dst as usize] = Val::Owned(v);
            }
            Instr::Const { value, dst } => {
                slots[dst as usize] = Val::Owned(if value { B::full(len) } else { B::empty(len) });
            }
            Instr::Reclaim { slot } => slots[slot as usize] = Val::Dead,
        }
    }
    let out = match core::mem::replace(&mut slots[p.result as usize], Val::Dead) {
        Val::Owned(b) => b,
        Val::Input(b) => b.clone(),
        Val::Dead => unreachable!(),
    };
    Ok(if out.bit_len() < len { out.or(&B::empty(len)) } else { out })
}

const BATCH: usize = 32;

/// Runs the program over uncompressed inputs a batch of words at a time,
/// keeping every intermediate value in a small word buffer.
pub fn execute_horizontal(p: &BitProgram, inputs: &[UncompressedBitmap]) -> Result<UncompressedBitmap> {
    check_arity(p, inputs.len())?;
    let len = max_len(inputs);
    let total = word_count(len);
    let mut regs = vec![[0u64; BATCH]; p.slots()];
    let mut out = vec![0u64; total];
    let mut base = 0;
    while base < total {
        let n = BATCH.min(total - base);
        for (r, b) in regs.iter_mut().zip(inputs) {
            for (j, w) in r[..n].iter_mut().enumerate() {
                *w = b.word(base + j);
            }
        }
        for ins in &p.instrs {
            match *ins {
                Instr::Binary { op, a, b, dst } => {
                    let (x, y) = (regs[a as usize], regs[b as usize]);
                    let d = &mut regs[dst as usize];
                    match op {
                        BinaryOp::And => (0..BATCH).for_each(|j| d[j] = x[j] & y[j]),
                        BinaryOp::Or => (0..BATCH).for_each(|j| d[j] = x[j] | y[j]),
                        BinaryOp::Xor => (0..BATCH).for_each(|j| d[j] = x[j] ^ y[j]),
                        BinaryOp::AndNot => (0..BATCH).for_each(|j| d[j] = x[j] & !y[j]),
                    }
                }
                Instr::Not { a, dst } => {
                    let x = regs[a as usize];
                    regs[dst as usize] = x.map(|w| !w);
                }
                Instr::Const { value, dst } => regs[dst as usize] = [if value { !0 } else { 0 }; BATCH],
                Instr::Reclaim { .. } => {}
            }
        }
        out[base..base + n].copy_from_slice(&regs[p.result as usize][..n]);
        base += n;
    }
    Ok(UncompressedBitmap::from_words(&out, len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_sideways_sum, CircuitBuilder};
    use crate::RleBitmap;

    #[test]
    fn ssum_5_2_listing() {
        let c = build_sideways_sum(5, 2).unwrap();
        let p = compile(&c);
        assert_eq!(p.op_count(), 12);
        let ops: Vec<(BinaryOp, u32, u32)> = p
            .instrs()
            .iter()
            .filter_map(|i| match *i {
                Instr::Binary { op, a, b, .. } => Some((op, a, b)),
                _ => None,
            })
            .collect();
        use BinaryOp::*;
        let kinds: Vec<BinaryOp> = ops.iter().map(|o| o.0).collect();
        assert_eq!(kinds, [Xor, Xor, And, And, Or, Xor, And, And, Or, And, Xor, Or]);
        // The first adder reads inputs 0, 1, 2; the second reads 3 and 4.
        assert_eq!((ops[0].1, ops[0].2), (0, 1));
        assert_eq!(ops[2].2, 2);
        assert_eq!(ops[5].2, 3);
        assert_eq!(ops[6].2, 4);
        // Input 2 dies after the third operation, along with the first XOR.
        let pos = p.instrs().iter().position(|i| matches!(i, Instr::Binary { op: And, a: 5, b: 2, .. })).unwrap();
        let mut freed = [p.instrs()[pos + 1], p.instrs()[pos + 2]];
        freed.sort_by_key(|i| matches!(i, Instr::Reclaim { slot: 5 }));
        assert_eq!(freed, [Instr::Reclaim { slot: 2 }, Instr::Reclaim { slot: 5 }]);
        assert!(p.peak_live() <= c.gate_count());
        let src = p.to_c_source("compiled");
        assert!(src.contains("output[i] = s["));
    }

    #[test]
    fn identity_program() {
        let b = CircuitBuilder::new(1);
        let x = b.input(0);
        let p = compile(&b.finish(x));
        assert_eq!(p.op_count(), 0);
        assert_eq!(p.result(), 0);
        let a = RleBitmap::from_positions(&[1, 500], 600).unwrap();
        assert_eq!(execute(&p, core::slice::from_ref(&a)).unwrap(), a);
    }

    #[test]
    fn validation() {
        assert!(BitProgram::new(2, 3, 2, alloc::vec![Instr::Binary { op: BinaryOp::And, a: 0, b: 1, dst: 2 }]).is_ok());
        assert!(BitProgram::new(2, 3, 2, alloc::vec![Instr::Binary { op: BinaryOp::And, a: 0, b: 2, dst: 2 }]).is_err());
        assert!(BitProgram::new(2, 3, 2, alloc::vec![]).is_err());
        let reclaimed = alloc::vec![Instr::Not { a: 0, dst: 2 }, Instr::Reclaim { slot: 2 }];
        assert!(BitProgram::new(2, 3, 2, reclaimed).is_err());
    }

    #[test]
    fn arity_mismatch() {
        let p = compile(&build_sideways_sum(5, 2).unwrap());
        let one = [UncompressedBitmap::empty(64)];
        assert!(matches!(execute(&p, &one), Err(Error::ArityMismatch { expected: 5, got: 1 })));
        assert!(execute_horizontal(&p, &one).is_err());
    }
}
