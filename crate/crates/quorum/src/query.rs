//! Similarity queries: pick the sets containing random prototype rows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::{Error, Result};

/// Attempts made with successive seeds before giving up.
pub const MAX_RETRIES: u64 = 100;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimilarityQuery {
    /// The seed that produced this query (the requested one, or a later one
    /// after retries).
    pub seed: u64,
    pub prototypes: Vec<u32>,
    /// Sets containing some prototype, in dataset order, before truncation or replication.
    pub matched: Vec<usize>,
    /// Exactly `n` set ids, replicated if fewer than `n` matched.
    pub ids: Vec<usize>,
}

/// Chooses `rids` random rows; the query uses every set containing one of
/// them. With more than `n` such sets the first `n` are kept; with `n' < n`
/// each set is repeated `floor(n/n')` or `ceil(n/n')` times, the larger
/// counts going to the earlier sets.
pub fn make_similarity(d: &Dataset, rids: usize, n: usize, seed: u64) -> Result<SimilarityQuery> {
    if d.sets.is_empty() || d.r == 0 {
        return Err(Error::Input(format!("dataset {} is empty", d.name)));
    }
    if n == 0 || rids == 0 {
        return Err(Error::Input("a query needs at least one row and one set".into()));
    }
    for attempt in 0..MAX_RETRIES {
        let s = seed.wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let prototypes: Vec<u32> = (0..rids).map(|_| rng.random_range(0..d.r)).collect();
        let matched: Vec<usize> = d
            .sets
            .iter()
            .enumerate()
            .filter(|(_, set)| prototypes.iter().any(|p| set.binary_search(p).is_ok()))
            .map(|(i, _)| i)
            .collect();
        if matched.is_empty() {
            continue;
        }
        let ids = replicate(&matched, n);
        return Ok(SimilarityQuery { seed: s, prototypes, matched, ids });
    }
    Err(Error::Input(format!("no set of {} contains the chosen rows after {MAX_RETRIES} seeds", d.name)))
}

/// The first `n` of `ids`, or each id repeated to make `n` in total.
pub fn replicate(ids: &[usize], n: usize) -> Vec<usize> {
    if ids.len() >= n {
        return ids[..n].to_vec();
    }
    let (q, extra) = (n / ids.len(), n % ids.len());
    ids.iter().enumerate().flat_map(|(k, &i)| std::iter::repeat_n(i, q + (k < extra) as usize)).collect()
}
