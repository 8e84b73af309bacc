//! Tabulated threshold programs, compiled on first use and optionally kept on disk.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use quorum_core::circuit::tabulate::execute_padded;
use quorum_core::circuit::{BitProgram, CircuitKind, PaddingPlan, Tabulation};
use quorum_core::Bitmap;

use crate::format::{read_program, write_program};
use crate::Result;

/// Default largest tabulated `N`.
pub const DEFAULT_N_MAX: usize = 1024;

/// A [`Tabulation`] shared behind a lock. Programs found in `dir` are loaded
/// instead of compiled, and newly compiled ones are written there.
pub struct ProgramCache {
    dir: Option<PathBuf>,
    inner: Mutex<Inner>,
}

struct Inner {
    tab: Tabulation,
    programs: HashMap<(usize, usize), Arc<BitProgram>>,
}

impl ProgramCache {
    pub fn new(kind: CircuitKind, n_max: usize, dir: Option<&Path>) -> Self {
        ProgramCache {
            dir: dir.map(Path::to_path_buf),
            inner: Mutex::new(Inner { tab: Tabulation::new(kind, n_max), programs: HashMap::new() }),
        }
    }

    pub fn kind(&self) -> CircuitKind {
        self.lock().tab.kind()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn file(&self, kind: CircuitKind, n: usize, t: usize) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{}-{n}-{t}.qbp", kind.name())))
    }

    pub fn plan(&self, n: usize, t: usize) -> Result<PaddingPlan> {
        Ok(self.lock().tab.plan(n, t)?)
    }

    /// The library program for `(n, t)` itself (no padding).
    pub fn program(&self, n: usize, t: usize) -> Result<Arc<BitProgram>> {
        let mut g = self.lock();
        if let Some(p) = g.programs.get(&(n, t)) {
            return Ok(p.clone());
        }
        let kind = g.tab.kind();
        let path = self.file(kind, n, t);
        let loaded = match &path {
            Some(p) if p.exists() => Some(read_program(&mut BufReader::new(File::open(p)?))?),
            _ => None,
        };
        let p = match loaded {
            Some(p) => p,
            None => {
                let p = g.tab.program(n, t)?.clone();
                if let Some(path) = &path {
                    store(path, &p)?;
                }
                p
            }
        };
        let p = Arc::new(p);
        g.programs.insert((n, t), p.clone());
        Ok(p)
    }

    /// Threshold `t` over `inputs` with the covering library program.
    pub fn execute<B: Bitmap>(&self, inputs: &[B], t: usize) -> Result<B> {
        let plan = self.plan(inputs.len(), t)?;
        let p = self.program(plan.n, plan.t)?;
        Ok(execute_padded(&p, &plan, inputs)?)
    }
}

fn store(path: &Path, p: &BitProgram) -> Result<()> {
    if let Some(d) = path.parent() {
        fs::create_dir_all(d)?;
    }
    // Write to a temporary name first so a reader never sees a partial file.
    let tmp = path.with_extension("tmp");
    let mut w = BufWriter::new(File::create(&tmp)?);
    write_program(&mut w, p)?;
    w.flush()?;
    drop(w);
    fs::rename(tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use quorum_core::oracle::brute_threshold;
    use quorum_core::UncompressedBitmap;

    #[test]
    fn disk_cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let a = ProgramCache::new(CircuitKind::SidewaysSum, 64, Some(dir.path()));
        let p = a.program(16, 8).unwrap();
        assert!(dir.path().join("ssum-16-8.qbp").exists());
        let b = ProgramCache::new(CircuitKind::SidewaysSum, 64, Some(dir.path()));
        assert_eq!(*b.program(16, 8).unwrap(), *p);
    }

    #[test]
    fn padded_execution() {
        let c = ProgramCache::new(CircuitKind::Sorter, 16, None);
        let sets: Vec<Vec<u32>> =
            (0..10u32).map(|i| (0..200).filter(|p| (p * 7 + i * 13) % (i + 3) < 2).collect()).collect();
        let inputs: Vec<UncompressedBitmap> =
            sets.iter().map(|s| UncompressedBitmap::from_positions(s, 200).unwrap()).collect();
        assert_eq!(c.plan(10, 7).unwrap(), PaddingPlan { n: 16, t: 7, zero_pads: 6, one_pads: 0 });
        for t in 1..=10 {
            assert_eq!(c.execute(&inputs, t).unwrap().to_positions(), brute_threshold(&sets, t, 200).unwrap());
        }
    }
}
