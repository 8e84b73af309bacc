//! Competition schedules: lists of `(N, T)` pairs.

use std::io::BufRead;

use crate::{Error, Result};

/// The small collection of 25 pairs.
pub const SMALL: [(usize, usize); 25] = [
    (4, 3),
    (8, 3),
    (8, 4),
    (8, 6),
    (8, 7),
    (16, 3),
    (16, 4),
    (16, 5),
    (16, 6),
    (16, 9),
    (16, 12),
    (16, 13),
    (16, 14),
    (16, 15),
    (32, 3),
    (32, 4),
    (32, 6),
    (32, 9),
    (32, 13),
    (32, 15),
    (32, 19),
    (32, 21),
    (32, 28),
    (32, 30),
    (32, 31),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub name: String,
    pub pairs: Vec<(usize, usize)>,
    /// Prototype rows per similarity query.
    pub rids: usize,
}

impl Schedule {
    pub fn small() -> Self {
        Schedule { name: "small".into(), pairs: SMALL.to_vec(), rids: 1 }
    }

    pub fn medium() -> Self {
        Schedule { name: "medium".into(), pairs: generated(128), rids: 10 }
    }

    pub fn large() -> Self {
        Schedule { name: "large".into(), pairs: generated(512), rids: 100 }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "small" => Some(Self::small()),
            "medium" => Some(Self::medium()),
            "large" => Some(Self::large()),
            _ => None,
        }
    }
}

/// `3, 4, 6, 9, 13, ...`: each term is the floor of 1.5 times the previous,
/// up to `limit`.
pub fn t_primes(limit: usize) -> Vec<usize> {
    std::iter::successors(Some(3usize), |&t| Some(t * 3 / 2)).take_while(|&t| t <= limit).collect()
}

/// For `N = 4, 8, ..., n_max`, every `T` in `2..N` that equals some `T' < N` or `N + 2 - T'`.
pub fn generated(n_max: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut n = 4;
    while n <= n_max {
        let mut ts: Vec<usize> =
            t_primes(n - 1).into_iter().flat_map(|tp| [tp, n + 2 - tp]).filter(|&t| (2..n).contains(&t)).collect();
        ts.sort_unstable();
        ts.dedup();
        out.extend(ts.into_iter().map(|t| (n, t)));
        n *= 2;
    }
    out
}

/// Reads `N,T` pairs, one per line; `#` starts a comment.
pub fn read_schedule(name: &str, r: impl BufRead, rids: usize) -> Result<Schedule> {
    let mut pairs = Vec::new();
    for (no, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Input(format!("schedule line {}: expected `N,T`, got `{line}`", no + 1));
        let (n, t) = line.split_once(',').ok_or_else(bad)?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        let t: usize = t.trim().parse().map_err(|_| bad())?;
        if t == 0 || t > n {
            return Err(bad());
        }
        pairs.push((n, t));
    }
    Ok(Schedule { name: name.into(), pairs, rids })
}
