//! Circuit builders for threshold and symmetric functions.

use alloc::vec::Vec;

use super::{optimize, Circuit, CircuitBuilder, NodeId};
use crate::bitmap::BinaryOp;
use crate::{check_threshold, Error, Result, SymmetricSpec};

/// The threshold circuit families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CircuitKind {
    SumOfProducts,
    Sorter,
    TreeAdder,
    SidewaysSum,
}

impl CircuitKind {
    pub const ALL: [CircuitKind; 4] =
        [CircuitKind::SumOfProducts, CircuitKind::Sorter, CircuitKind::TreeAdder, CircuitKind::SidewaysSum];

    pub fn name(self) -> &'static str {
        match self {
            CircuitKind::SumOfProducts => "sop",
            CircuitKind::Sorter => "sorter",
            CircuitKind::TreeAdder => "tree",
            CircuitKind::SidewaysSum => "ssum",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Default cap on the number of product terms in [`build_sop`].
pub const SOP_TERM_CAP: u64 = 1 << 16;

/// Builds and optimizes the `(n, t)` threshold circuit of the given family.
pub fn build(kind: CircuitKind, n: usize, t: usize) -> Result<Circuit> {
    match kind {
        CircuitKind::SumOfProducts => build_sop(n, t, SOP_TERM_CAP),
        CircuitKind::Sorter => build_sorter(n, t),
        CircuitKind::TreeAdder => build_tree_adder(n, t),
        CircuitKind::SidewaysSum => build_sideways_sum(n, t),
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n.saturating_sub(k));
    let mut r: u64 = 1;
    for i in 0..k {
        r = match r.checked_mul(n - i) {
            Some(x) => x / (i + 1),
            None => return u64::MAX,
        };
    }
    r
}

/// OR over every `t`-subset of the inputs of the AND of that subset.
pub fn build_sop(n: usize, t: usize, max_terms: u64) -> Result<Circuit> {
    check_threshold(t, n)?;
    let terms = binomial(n as u64, t as u64);
    if terms > max_terms {
        return Err(Error::CircuitTooLarge { needed: terms, cap: max_terms });
    }
    let mut b = CircuitBuilder::new(n);
    let mut products = Vec::with_capacity(terms as usize);
    let mut subset: Vec<usize> = (0..t).collect();
    loop {
        let lits: Vec<NodeId> = subset.iter().map(|&i| b.input(i)).collect();
        products.push(b.wide(BinaryOp::And, &lits));
        // Next subset in lexicographic order.
        let Some(i) = (0..t).rev().find(|&i| subset[i] < n - t + i) else { break };
        subset[i] += 1;
        for j in i + 1..t {
            subset[j] = subset[j - 1] + 1;
        }
    }
    let out = b.wide(BinaryOp::Or, &products);
    Ok(optimize(&b.finish(out)))
}

/// Comparator pairs `(i, j)`, `i < j`, of the merge-exchange sorting network
/// for `n` inputs.
pub fn merge_exchange(n: usize) -> Vec<(usize, usize)> {
    let mut comps = Vec::new();
    if n < 2 {
        return comps;
    }
    let t = (usize::BITS - (n - 1).leading_zeros()) as usize;
    let mut p = 1usize << (t - 1);
    while p > 0 {
        let (mut q, mut r, mut d) = (1usize << (t - 1), 0usize, p);
        loop {
            for i in 0..n - d {
                if i & p == r {
                    comps.push((i, i + d));
                }
            }
            if q == p {
                break;
            }
            d = q - p;
            q /= 2;
            r = p;
        }
        p /= 2;
    }
    comps
}

/// Sorts the inputs ascending with AND/OR comparators; returns the wires.
fn sort_wires(b: &mut CircuitBuilder) -> Vec<NodeId> {
    let mut w: Vec<NodeId> = b.inputs().to_vec();
    for (i, j) in merge_exchange(w.len()) {
        let lo = b.and(w[i], w[j]);
        let hi = b.or(w[i], w[j]);
        w[i] = lo;
        w[j] = hi;
    }
    w
}

/// A sorting network whose `t`-th largest output is kept.
pub fn build_sorter(n: usize, t: usize) -> Result<Circuit> {
    check_threshold(t, n)?;
    let mut b = CircuitBuilder::new(n);
    let w = sort_wires(&mut b);
    Ok(optimize(&b.finish(w[n - t])))
}

/// Number of weight bits kept for `n` inputs: `floor(log2(2n))`.
pub fn weight_width(n: usize) -> usize {
    (usize::BITS - (2 * n).leading_zeros() - 1) as usize
}

fn half_adder(b: &mut CircuitBuilder, x: NodeId, y: NodeId) -> (NodeId, NodeId) {
    let carry = b.and(x, y);
    let sum = b.xor(x, y);
    (sum, carry)
}

fn full_adder(b: &mut CircuitBuilder, x: NodeId, y: NodeId, cin: NodeId) -> (NodeId, NodeId) {
    let s = b.xor(x, y);
    let sum = b.xor(s, cin);
    let t1 = b.and(s, cin);
    let t2 = b.and(x, y);
    (sum, b.or(t1, t2))
}

/// Hamming weight by a balanced tree of ripple-carry adders, least
/// significant bit first.
pub fn tree_adder_bits(b: &mut CircuitBuilder, xs: &[NodeId]) -> Vec<NodeId> {
    let width = xs.len().next_power_of_two();
    let zero = b.constant(false);
    let mut nums: Vec<Vec<NodeId>> = xs.iter().map(|&x| alloc::vec![x]).collect();
    nums.resize(width, alloc::vec![zero]);
    while nums.len() > 1 {
        nums = nums
            .chunks(2)
            .map(|p| {
                let (x, y) = (&p[0], &p[1]);
                let mut out = Vec::with_capacity(x.len() + 1);
                let (s, mut carry) = half_adder(b, x[0], y[0]);
                out.push(s);
                for i in 1..x.len() {
                    let (s, c) = full_adder(b, x[i], y[i], carry);
                    out.push(s);
                    carry = c;
                }
                out.push(carry);
                out
            })
            .collect();
    }
    nums.pop().unwrap_or_default()
}

/// Hamming weight by the layered sideways-sum construction: each level
/// chains one adder's sum into the next and passes the carries up a level.
pub fn sideways_sum_bits(b: &mut CircuitBuilder, xs: &[NodeId]) -> Vec<NodeId> {
    let mut z = Vec::new();
    let mut cur = xs.to_vec();
    while !cur.is_empty() {
        if cur.len() == 1 {
            z.push(cur[0]);
            break;
        }
        let mut carries = Vec::with_capacity(cur.len() / 2);
        let (mut s, c, mut i) = if cur.len() >= 3 {
            let (s, c) = full_adder(b, cur[0], cur[1], cur[2]);
            (s, c, 3)
        } else {
            let (s, c) = half_adder(b, cur[0], cur[1]);
            (s, c, 2)
        };
        carries.push(c);
        while i < cur.len() {
            let c;
            if i + 1 < cur.len() {
                (s, c) = full_adder(b, s, cur[i], cur[i + 1]);
                i += 2;
            } else {
                (s, c) = half_adder(b, s, cur[i]);
                i += 1;
            }
            carries.push(c);
        }
        z.push(s);
        cur = carries;
    }
    z
}

/// Tests `weight >= t` for a weight given as bits (least significant first).
///
/// Scanning from the top bit of `a = t - 1`, the weight exceeds `a` exactly
/// when some bit is 1 where `a` has 0 and all higher bits match `a`'s ones.
/// The running AND over `a`'s one bits is shared between those tests.
pub fn build_geq_const(b: &mut CircuitBuilder, bits: &[NodeId], t: u64) -> NodeId {
    let n = bits.len();
    if t == 0 {
        return b.constant(true);
    }
    let a = t - 1;
    if n < 64 && a >= (1u64 << n) - 1 {
        return b.constant(false);
    }
    let mut prefix: Option<NodeId> = None;
    let mut items = Vec::new();
    for j in (0..n).rev() {
        let term = match prefix {
            None => bits[j],
            Some(p) => b.and(p, bits[j]),
        };
        if a >> j & 1 == 1 {
            prefix = Some(term);
        } else {
            items.push(term);
        }
    }
    // Pairwise OR rounds keep the tree balanced.
    while items.len() > 1 {
        items = items.chunks(2).map(|p| if p.len() == 2 { b.or(p[0], p[1]) } else { p[0] }).collect();
    }
    items.pop().unwrap_or_else(|| b.constant(false))
}

fn weight_threshold(n: usize, t: usize, bits_of: fn(&mut CircuitBuilder, &[NodeId]) -> Vec<NodeId>) -> Result<Circuit> {
    check_threshold(t, n)?;
    let mut b = CircuitBuilder::new(n);
    let xs = b.inputs().to_vec();
    let bits = weight_bits(&mut b, &xs, bits_of);
    let out = build_geq_const(&mut b, &bits, t as u64);
    Ok(optimize(&b.finish(out)))
}

fn weight_bits(
    b: &mut CircuitBuilder,
    xs: &[NodeId],
    bits_of: fn(&mut CircuitBuilder, &[NodeId]) -> Vec<NodeId>,
) -> Vec<NodeId> {
    let width = weight_width(xs.len());
    let mut bits = bits_of(b, xs);
    let zero = b.constant(false);
    bits.resize(width, zero);
    bits
}

/// Tree-of-adders weight followed by a comparison with `t`.
pub fn build_tree_adder(n: usize, t: usize) -> Result<Circuit> {
    weight_threshold(n, t, tree_adder_bits)
}

/// Sideways-sum weight followed by a comparison with `t`.
pub fn build_sideways_sum(n: usize, t: usize) -> Result<Circuit> {
    weight_threshold(n, t, sideways_sum_bits)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetricStrategy {
    /// ORs `ge(a) AND NOT ge(b + 1)` over the accepted weight intervals `[a, b]`.
    Sorter,
    /// A sum of products over the sideways-sum weight bits, with weights
    /// above `N` treated as don't-cares.
    Adder,
}

/// A circuit for an arbitrary symmetric function.
pub fn build_symmetric(spec: &SymmetricSpec, strategy: SymmetricStrategy) -> Result<Circuit> {
    let n = spec.arity();
    if n == 0 {
        return Err(Error::InvalidInput("a symmetric circuit needs at least one input".into()));
    }
    let mut b = CircuitBuilder::new(n);
    let out = match strategy {
        SymmetricStrategy::Sorter => {
            let w = sort_wires(&mut b);
            let acc = spec.accept();
            let mut terms = Vec::new();
            let mut k = 0;
            while k <= n {
                if !acc[k] {
                    k += 1;
                    continue;
                }
                let lo = k;
                while k < n && acc[k + 1] {
                    k += 1;
                }
                // ge(j) is the j-th largest wire; ge(0) = 1 and ge(n + 1) = 0.
                let ge_lo = if lo == 0 { b.constant(true) } else { w[n - lo] };
                let ge_hi = if k == n { b.constant(false) } else { w[n - k - 1] };
                terms.push(b.and_not(ge_lo, ge_hi));
                k += 1;
            }
            b.wide(BinaryOp::Or, &terms)
        }
        SymmetricStrategy::Adder => {
            let xs = b.inputs().to_vec();
            let bits = weight_bits(&mut b, &xs, sideways_sum_bits);
            let cubes = cover(spec, bits.len());
            let mut terms = Vec::new();
            for cube in cubes {
                let pos: Vec<NodeId> = cube.iter().filter(|l| l.1).map(|l| bits[l.0]).collect();
                let neg: Vec<NodeId> = cube.iter().filter(|l| !l.1).map(|l| bits[l.0]).collect();
                let term = if pos.is_empty() {
                    let any = b.wide(BinaryOp::Or, &neg);
                    b.not(any)
                } else {
                    let mut acc = b.wide(BinaryOp::And, &pos);
                    for x in neg {
                        acc = b.and_not(acc, x);
                    }
                    acc
                };
                terms.push(term);
            }
            b.wide(BinaryOp::Or, &terms)
        }
    };
    Ok(optimize(&b.finish(out)))
}

/// A cube is a list of `(bit, value)` literals over the weight bits.
type Cube = Vec<(usize, bool)>;

fn covers(cube: &Cube, w: usize) -> bool {
    cube.iter().all(|&(j, v)| (w >> j & 1 == 1) == v)
}

/// Greedy cover of the accepted weights: each cube starts as a minterm and
/// drops literals from the top bit down while it still avoids every rejected
/// weight in `0..=N`.
fn cover(spec: &SymmetricSpec, width: usize) -> Vec<Cube> {
    let n = spec.arity();
    let rejected: Vec<usize> = (0..=n).filter(|&w| !spec.accepts(w)).collect();
    let mut cubes: Vec<Cube> = Vec::new();
    for w in (0..=n).filter(|&w| spec.accepts(w)) {
        if cubes.iter().any(|c| covers(c, w)) {
            continue;
        }
        let mut cube: Cube = (0..width).rev().map(|j| (j, w >> j & 1 == 1)).collect();
        let mut i = 0;
        while i < cube.len() {
            let lit = cube.remove(i);
            if rejected.iter().any(|&r| covers(&cube, r)) {
                cube.insert(i, lit);
                i += 1;
            }
        }
        cubes.push(cube);
    }
    cubes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(f: fn(usize, usize) -> Result<Circuit>, n: usize) -> Vec<usize> {
        (1..=n).map(|t| f(n, t).unwrap().gate_count()).collect()
    }

    fn weight_part(bits_of: fn(&mut CircuitBuilder, &[NodeId]) -> Vec<NodeId>, n: usize) -> usize {
        let mut b = CircuitBuilder::new(n);
        let xs = b.inputs().to_vec();
        bits_of(&mut b, &xs);
        b.finish(0).gates().iter().filter(|g| matches!(g, super::super::Gate::Binary(..))).count()
    }

    #[test]
    fn sop_counts() {
        assert_eq!(build_sop(4, 1, SOP_TERM_CAP).unwrap().gate_count(), 3);
        assert_eq!(build_sop(4, 2, SOP_TERM_CAP).unwrap().gate_count(), 11);
        assert_eq!(build_sop(5, 5, SOP_TERM_CAP).unwrap().gate_count(), 4);
        assert!(matches!(build_sop(40, 20, SOP_TERM_CAP), Err(Error::CircuitTooLarge { .. })));
    }

    #[test]
    fn small_sorters() {
        assert_eq!(merge_exchange(4).len(), 5);
        assert_eq!(counts(build_sorter, 4), [3, 7, 7, 3]);
        assert_eq!(counts(build_sorter, 5), [12, 12, 12, 12, 4]);
    }

    #[test]
    fn weight_parts() {
        let c: Vec<usize> = [2, 4, 8, 16, 32].iter().map(|&n| weight_part(tree_adder_bits, n)).collect();
        let s: Vec<usize> = [2, 4, 8, 16, 32].iter().map(|&n| weight_part(sideways_sum_bits, n)).collect();
        assert_eq!(c, [2, 11, 34, 85, 192]);
        assert_eq!(s, [2, 9, 26, 63, 140]);
        assert_eq!(build_tree_adder(2, 2).unwrap().gate_count(), 1);
    }

    #[test]
    fn geq_extremes() {
        for (a, ops) in [(0b0010100111u64, 8), (0b0111111111, 0), (0b1000000000, 17)] {
            let mut b = CircuitBuilder::new(10);
            let bits = b.inputs().to_vec();
            let out = build_geq_const(&mut b, &bits, a + 1);
            let c = optimize(&b.finish(out));
            assert_eq!(c.gate_count(), ops, "a={a:b}");
            for w in [0u64, a, a + 1, 1023] {
                let inputs: Vec<bool> = (0..10).map(|j| w >> j & 1 == 1).collect();
                assert_eq!(c.eval(&inputs), w > a);
            }
        }
    }

    #[test]
    fn xor_pair_is_one_gate() {
        let c = build_symmetric(&SymmetricSpec::parity(2), SymmetricStrategy::Adder).unwrap();
        assert_eq!(c.gate_count(), 1);
        assert!(matches!(c.gates()[c.output() as usize], super::super::Gate::Binary(BinaryOp::Xor, _, _)));
    }

    #[test]
    fn symmetric_truth_tables() {
        let n = 9;
        let interval = SymmetricSpec::new((0..=n).map(|k| (5..=8).contains(&k)).collect()).unwrap();
        for spec in [interval, SymmetricSpec::parity(n), SymmetricSpec::exactly(n, 0), SymmetricSpec::threshold(n, 4)] {
            for strategy in [SymmetricStrategy::Sorter, SymmetricStrategy::Adder] {
                let c = build_symmetric(&spec, strategy).unwrap();
                for m in 0u32..1 << n {
                    let bits: Vec<bool> = (0..n).map(|j| m >> j & 1 == 1).collect();
                    assert_eq!(c.eval(&bits), spec.accepts(m.count_ones() as usize));
                }
            }
        }
    }
}
