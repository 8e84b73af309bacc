use proptest::prelude::*;
use quorum_core::bitmap::{BinaryOp, Bitmap, PosCursor};
use quorum_core::oracle::brute_threshold;
use quorum_core::runmerge::{cdom_threshold_with, CdomConfig, CdomStats, DirtyStrategy};
use quorum_core::{RleBitmap, UncompressedBitmap};

// Runs of random length, each either a constant fill or random noise, so both
// long fills and dirty words show up.
fn positions() -> impl Strategy<Value = (Vec<u32>, u32)> {
    prop::collection::vec((0u8..3, 1u32..400, any::<u64>()), 0..12).prop_map(|segs| {
        let mut out = Vec::new();
        let mut at = 0u32;
        for (kind, len, seed) in segs {
            let mut s = seed | 1;
            for p in at..at + len {
                let set = match kind {
                    0 => false,
                    1 => true,
                    _ => {
                        s ^= s << 13;
                        s ^= s >> 7;
                        s ^= s << 17;
                        s & 1 == 1
                    }
                };
                if set {
                    out.push(p);
                }
            }
            at += len;
        }
        (out, at)
    })
}

fn bit_runs(positions: &[u32], len: u32) -> u64 {
    let mut runs = 0;
    let mut prev = None;
    let mut i = 0;
    for p in 0..len {
        let bit = i < positions.len() && positions[i] == p;
        if bit {
            i += 1;
        }
        if prev != Some(bit) {
            runs += 1;
            prev = Some(bit);
        }
    }
    runs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn roundtrip_and_runs((pos, len) in positions()) {
        let u = UncompressedBitmap::from_positions(&pos, len).unwrap();
        let c = RleBitmap::compress(&u);
        prop_assert_eq!(c.decompress(), u.clone());
        prop_assert_eq!(c.to_positions(), pos.clone());
        prop_assert_eq!(RleBitmap::from_positions(&pos, len).unwrap(), c.clone());
        prop_assert_eq!(c.run_count(), bit_runs(&pos, len));
        prop_assert_eq!(u.run_count(), bit_runs(&pos, len));
        prop_assert_eq!(c.not().not(), c.clone());
        prop_assert_eq!(c.not().cardinality(), len as u64 - pos.len() as u64);
        prop_assert_eq!(RleBitmap::from_raw_parts(c.words(), len).unwrap(), c);
    }

    #[test]
    fn internal_iteration_matches_next((pos, len) in positions(), skip in 0usize..50) {
        let u = UncompressedBitmap::from_positions(&pos, len).unwrap();
        let c = RleBitmap::compress(&u);
        let tail: Vec<u32> = pos.iter().copied().skip(skip).collect();
        let mut it = u.ones();
        for _ in 0..skip {
            it.next();
        }
        prop_assert_eq!(it.fold(Vec::new(), |mut v, p| { v.push(p); v }), tail.clone());
        let mut it = c.ones();
        for _ in 0..skip {
            it.next();
        }
        prop_assert_eq!(it.fold(Vec::new(), |mut v, p| { v.push(p); v }), tail);
    }

    #[test]
    fn ops_agree_across_representations((a, la) in positions(), (b, lb) in positions()) {
        let (ua, ub) = (
            UncompressedBitmap::from_positions(&a, la).unwrap(),
            UncompressedBitmap::from_positions(&b, lb).unwrap(),
        );
        let (ca, cb) = (RleBitmap::compress(&ua), RleBitmap::compress(&ub));
        for op in [BinaryOp::And, BinaryOp::Or, BinaryOp::Xor, BinaryOp::AndNot] {
            let u = ua.binary(&ub, op);
            let c = ca.binary(&cb, op);
            prop_assert_eq!(c.decompress(), u.clone());
            let expect: Vec<u32> = (0..la.max(lb))
                .filter(|&p| op.apply_bit(a.binary_search(&p).is_ok(), b.binary_search(&p).is_ok()))
                .collect();
            prop_assert_eq!(u.to_positions(), expect);
        }
        prop_assert_eq!(
            ua.or(&ub).cardinality() + ua.and(&ub).cardinality(),
            ua.cardinality() + ub.cardinality()
        );
    }

    #[test]
    fn advance_to_matches_linear_scan((pos, len) in positions(), targets in prop::collection::vec(0u32..5000, 1..40)) {
        let u = UncompressedBitmap::from_positions(&pos, len).unwrap();
        let c = RleBitmap::compress(&u);
        let mut targets = targets;
        targets.sort_unstable();
        let mut cu = u.cursor();
        let mut cc = c.cursor();
        for t in targets {
            let expect = pos.iter().copied().find(|&p| p >= t);
            // Cursors never move back, so the answer is at least the previous one.
            let expect = match (cu.current(), expect) {
                (Some(cur), Some(e)) if cur > e => Some(cur),
                (_, e) => e,
            };
            prop_assert_eq!(cu.advance_to(t), expect);
            prop_assert_eq!(cc.advance_to(t), expect);
        }
    }

    #[test]
    fn cdom_bounds(sets in prop::collection::vec(positions(), 2..12), t_frac in 0.0f64..1.0) {
        let len = sets.iter().map(|s| s.1).max().unwrap();
        let pos: Vec<Vec<u32>> = sets.iter().map(|s| s.0.clone()).collect();
        let inputs: Vec<RleBitmap> = sets.iter().map(|(p, l)| RleBitmap::from_positions(p, *l).unwrap()).collect();
        let n = inputs.len();
        let t = 1 + ((n - 1) as f64 * t_frac) as usize;
        let cfg = CdomConfig { strategy: DirtyStrategy::ScanCount, ..CdomConfig::default() };
        let mut stats = CdomStats::default();
        let out = cdom_threshold_with(&inputs, t, &cfg, Some(&mut stats)).unwrap();
        prop_assert_eq!(out.to_positions(), brute_threshold(&pos, t, len).unwrap());
        prop_assert_eq!(out.bit_len(), len);
        let run_total: u64 = inputs.iter().map(|b| b.run_count()).sum();
        prop_assert!(stats.heap_pops <= run_total);
        prop_assert!(out.run_count() <= run_total.max(1));
    }
}
