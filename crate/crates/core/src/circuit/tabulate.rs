//! A library of precompiled threshold programs, reused for smaller
//! requests by padding with constant inputs.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{build, compile, execute, BitProgram, CircuitKind};
use crate::bitmap::{max_len, Bitmap};
use crate::{check_threshold, Error, Result};

/// How to answer an `(n', t')` request with the `(n, t)` program: append
/// `zero_pads` empty and `one_pads` full inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PaddingPlan {
    pub n: usize,
    pub t: usize,
    pub zero_pads: usize,
    pub one_pads: usize,
}

/// Whether `(n, t)` can answer `(rn, rt)`: `rn <= n` and `t - (n - rn) <= rt <= t`.
pub fn covers(n: usize, t: usize, rn: usize, rt: usize) -> bool {
    rn <= n && rt <= t && rt + (n - rn) >= t
}

/// Picks the covering entry with the smallest `n`, then the smallest `|t - rt|`.
pub fn plan_padding(rn: usize, rt: usize, library: &[(usize, usize)]) -> Result<PaddingPlan> {
    check_threshold(rt, rn)?;
    library
        .iter()
        .filter(|&&(n, t)| covers(n, t, rn, rt))
        .min_by_key(|&&(n, t)| (n, t.abs_diff(rt)))
        .map(|&(n, t)| PaddingPlan { n, t, one_pads: t - rt, zero_pads: n - rn - (t - rt) })
        .ok_or(Error::NoCoveringCircuit { n: rn, t: rt })
}

/// Programs for every `t` at `n` in `{2, 4, 8, ...}` up to `n_max`, plus
/// `n_max` itself, compiled on first use.
#[derive(Clone, Debug)]
pub struct Tabulation {
    kind: CircuitKind,
    n_max: usize,
    programs: BTreeMap<(usize, usize), BitProgram>,
}

impl Tabulation {
    pub fn new(kind: CircuitKind, n_max: usize) -> Self {
        Tabulation { kind, n_max, programs: BTreeMap::new() }
    }

    pub fn kind(&self) -> CircuitKind {
        self.kind
    }

    pub fn library(&self) -> Vec<(usize, usize)> {
        let mut ns: Vec<usize> =
            core::iter::successors(Some(2usize), |&n| n.checked_mul(2)).take_while(|&n| n <= self.n_max).collect();
        if self.n_max >= 1 && ns.last() != Some(&self.n_max) {
            ns.push(self.n_max);
        }
        ns.into_iter().flat_map(|n| (1..=n).map(move |t| (n, t))).collect()
    }

    pub fn plan(&self, n: usize, t: usize) -> Result<PaddingPlan> {
        plan_padding(n, t, &self.library())
    }

    /// Supplies a program, e.g. one loaded from a cache.
    pub fn insert(&mut self, n: usize, t: usize, p: BitProgram) {
        self.programs.insert((n, t), p);
    }

    pub fn contains(&self, n: usize, t: usize) -> bool {
        self.programs.contains_key(&(n, t))
    }

    pub fn program(&mut self, n: usize, t: usize) -> Result<&BitProgram> {
        if !self.programs.contains_key(&(n, t)) {
            let p = compile(&build(self.kind, n, t)?);
            self.programs.insert((n, t), p);
        }
        Ok(&self.programs[&(n, t)])
    }

    /// Threshold `t` over `inputs` using a padded library program.
    pub fn execute<B: Bitmap>(&mut self, inputs: &[B], t: usize) -> Result<B> {
        let plan = self.plan(inputs.len(), t)?;
        let p = self.program(plan.n, plan.t)?;
        execute_padded(p, &plan, inputs)
    }
}

/// Runs `p` on `inputs` followed by the pads of `plan`.
pub fn execute_padded<B: Bitmap>(p: &BitProgram, plan: &PaddingPlan, inputs: &[B]) -> Result<B> {
    let len = max_len(inputs);
    let mut all: Vec<B> = inputs.to_vec();
    all.extend((0..plan.zero_pads).map(|_| B::empty(len)));
    all.extend((0..plan.one_pads).map(|_| B::full(len)));
    execute(p, &all)
}
