//! Adaptive repetition timing.

use std::hint::black_box;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingConfig {
    /// A measurement stops once one batch takes at least this long.
    pub min_ms: f64,
    /// Upper bound on the batch size, so near-free tasks terminate.
    pub max_reps: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig { min_ms: 1000.0, max_reps: 1 << 20 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timing {
    /// Executions in the reported batch.
    pub reps: u64,
    /// Wall time of the reported batch.
    pub total_ms: f64,
}

impl Timing {
    pub fn ms_per_exec(&self) -> f64 {
        self.total_ms / self.reps as f64
    }
}

/// Runs `task` once; while the batch took less than `cfg.min_ms`, reruns it
/// in a batch twice as large. Reports the last batch.
pub fn time_adaptive<R>(cfg: &TimingConfig, mut task: impl FnMut() -> R) -> Timing {
    let mut reps = 1u64;
    loop {
        let start = Instant::now();
        for _ in 0..reps {
            black_box(task());
        }
        let total_ms = start.elapsed().as_secs_f64() * 1e3;
        if total_ms >= cfg.min_ms || reps >= cfg.max_reps {
            return Timing { reps, total_ms };
        }
        reps = (reps * 2).min(cfg.max_reps);
    }
}
