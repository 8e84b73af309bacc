//! Boolean circuits over whole bitmaps.
//!
//! A [`Circuit`] is a DAG of two-input gates (plus `NOT`) over `N` inputs.
//! Builders in [`synth`] produce threshold and symmetric circuits; they are
//! then simplified with [`optimize`], lowered to a straight-line
//! [`BitProgram`] by [`compile`], and run by the interpreter in [`program`].
//! [`bitparallel`] holds the Looped and carry-save algorithms, which work the
//! same way but are not expressed as fixed circuits.

pub mod bitparallel;
pub mod program;
pub mod synth;
pub mod tabulate;

use alloc::vec;
use alloc::vec::Vec;

use crate::bitmap::BinaryOp;

pub use bitparallel::{csv_threshold, looped_threshold, OpCounter};
pub use program::{compile, execute, execute_horizontal, BitProgram, Instr};
pub use synth::{
    build, build_geq_const, build_sideways_sum, build_sop, build_sorter, build_symmetric, build_tree_adder,
    CircuitKind, SymmetricStrategy,
};
pub use tabulate::{plan_padding, PaddingPlan, Tabulation};

pub type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Input(u32),
    Const(bool),
    Binary(BinaryOp, NodeId, NodeId),
    Not(NodeId),
}

/// A gate DAG. Every gate refers only to earlier gates, so index order is a
/// topological order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    gates: Vec<Gate>,
    inputs: Vec<NodeId>,
    output: NodeId,
}

impl Circuit {
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    pub fn output(&self) -> NodeId {
        self.output
    }

    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    /// Marks gates the output depends on.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.gates.len()];
        seen[self.output as usize] = true;
        for i in (0..self.gates.len()).rev() {
            if !seen[i] {
                continue;
            }
            match self.gates[i] {
                Gate::Binary(_, a, b) => {
                    seen[a as usize] = true;
                    seen[b as usize] = true;
                }
                Gate::Not(a) => seen[a as usize] = true,
                Gate::Input(_) | Gate::Const(_) => {}
            }
        }
        seen
    }

    /// Reachable logic gates, not counting inputs or constants.
    pub fn gate_count(&self) -> usize {
        let seen = self.reachable();
        self.gates.iter().zip(&seen).filter(|(g, &s)| s && matches!(g, Gate::Binary(..) | Gate::Not(_))).count()
    }

    /// Evaluates 64 independent assignments at once: bit `j` of `inputs[i]`
    /// is input `i` of assignment `j`.
    pub fn eval_words(&self, inputs: &[u64]) -> u64 {
        let mut v = vec![0u64; self.gates.len()];
        for (i, g) in self.gates.iter().enumerate() {
            v[i] = match *g {
                Gate::Input(k) => inputs[k as usize],
                Gate::Const(c) => {
                    if c {
                        !0
                    } else {
                        0
                    }
                }
                Gate::Binary(op, a, b) => op.apply(v[a as usize], v[b as usize]),
                Gate::Not(a) => !v[a as usize],
            };
        }
        v[self.output as usize]
    }

    pub fn eval(&self, inputs: &[bool]) -> bool {
        let words: Vec<u64> = inputs.iter().map(|&b| b as u64).collect();
        self.eval_words(&words) & 1 == 1
    }
}

/// Incremental circuit construction with on-the-fly constant folding.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    gates: Vec<Gate>,
    inputs: Vec<NodeId>,
    consts: [Option<NodeId>; 2],
}

impl CircuitBuilder {
    /// A builder with inputs `0..n` already created.
    pub fn new(n: usize) -> Self {
        let mut b = CircuitBuilder { gates: Vec::new(), inputs: Vec::with_capacity(n), consts: [None; 2] };
        for i in 0..n {
            let id = b.push(Gate::Input(i as u32));
            b.inputs.push(id);
        }
        b
    }

    pub fn input(&self, i: usize) -> NodeId {
        self.inputs[i]
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    fn push(&mut self, g: Gate) -> NodeId {
        self.gates.push(g);
        (self.gates.len() - 1) as NodeId
    }

    pub fn constant(&mut self, c: bool) -> NodeId {
        if let Some(id) = self.consts[c as usize] {
            return id;
        }
        let id = self.push(Gate::Const(c));
        self.consts[c as usize] = Some(id);
        id
    }

    fn const_of(&self, x: NodeId) -> Option<bool> {
        match self.gates[x as usize] {
            Gate::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn binary(&mut self, op: BinaryOp, a: NodeId, b: NodeId) -> NodeId {
        let (ca, cb) = (self.const_of(a), self.const_of(b));
        if let (Some(x), Some(y)) = (ca, cb) {
            return self.constant(op.apply_bit(x, y));
        }
        match (op, ca, cb) {
            (BinaryOp::And, Some(false), _) | (BinaryOp::And, _, Some(false)) => self.constant(false),
            (BinaryOp::And, Some(true), _) => b,
            (BinaryOp::And, _, Some(true)) => a,
            (BinaryOp::Or, Some(true), _) | (BinaryOp::Or, _, Some(true)) => self.constant(true),
            (BinaryOp::Or, Some(false), _) => b,
            (BinaryOp::Or, _, Some(false)) => a,
            (BinaryOp::Xor, Some(false), _) => b,
            (BinaryOp::Xor, _, Some(false)) => a,
            (BinaryOp::Xor, Some(true), _) => self.not(b),
            (BinaryOp::Xor, _, Some(true)) => self.not(a),
            (BinaryOp::AndNot, Some(false), _) | (BinaryOp::AndNot, _, Some(true)) => self.constant(false),
            (BinaryOp::AndNot, Some(true), _) => self.not(b),
            (BinaryOp::AndNot, _, Some(false)) => a,
            _ => self.push(Gate::Binary(op, a, b)),
        }
    }

    pub fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::And, a, b)
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::Or, a, b)
    }

    pub fn xor(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::Xor, a, b)
    }

    pub fn and_not(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::AndNot, a, b)
    }

    pub fn not(&mut self, a: NodeId) -> NodeId {
        match self.gates[a as usize] {
            Gate::Const(c) => self.constant(!c),
            Gate::Not(x) => x,
            _ => self.push(Gate::Not(a)),
        }
    }

    /// A wide gate as a balanced tree of two-input gates; one operand is
    /// returned as is, none gives the identity constant.
    pub fn wide(&mut self, op: BinaryOp, items: &[NodeId]) -> NodeId {
        debug_assert!(matches!(op, BinaryOp::And | BinaryOp::Or | BinaryOp::Xor));
        match items {
            [] => self.constant(op == BinaryOp::And),
            [x] => *x,
            _ => {
                let (l, r) = items.split_at(items.len() / 2);
                let a = self.wide(op, l);
                let b = self.wide(op, r);
                self.binary(op, a, b)
            }
        }
    }

    pub fn finish(self, output: NodeId) -> Circuit {
        Circuit { gates: self.gates, inputs: self.inputs, output }
    }
}

/// Folds constants and drops gates the output does not depend on.
///
/// Inputs are always kept, so the arity is unchanged. Applying it twice gives
/// the same circuit as applying it once.
pub fn optimize(c: &Circuit) -> Circuit {
    let seen = c.reachable();
    let mut b = CircuitBuilder::new(c.arity());
    let mut map = vec![0 as NodeId; c.gates.len()];
    for (i, g) in c.gates.iter().enumerate() {
        if !seen[i] {
            continue;
        }
        map[i] = match *g {
            Gate::Input(k) => b.input(k as usize),
            Gate::Const(v) => b.constant(v),
            Gate::Binary(op, x, y) => b.binary(op, map[x as usize], map[y as usize]),
            Gate::Not(x) => b.not(map[x as usize]),
        };
    }
    let folded = b.finish(map[c.output as usize]);
    compact(&folded)
}

/// Keeps inputs and reachable gates, preserving their relative order.
fn compact(c: &Circuit) -> Circuit {
    let seen = c.reachable();
    let mut gates = Vec::new();
    let mut map = vec![0 as NodeId; c.gates.len()];
    for (i, g) in c.gates.iter().enumerate() {
        if !seen[i] && !matches!(g, Gate::Input(_)) {
            continue;
        }
        map[i] = gates.len() as NodeId;
        gates.push(match *g {
            Gate::Binary(op, x, y) => Gate::Binary(op, map[x as usize], map[y as usize]),
            Gate::Not(x) => Gate::Not(map[x as usize]),
            other => other,
        });
    }
    let inputs = c.inputs.iter().map(|&i| map[i as usize]).collect();
    Circuit { gates, inputs, output: map[c.output as usize] }
}
