use std::hint::black_box;
use std::time::{Duration, Instant};

use serde::Serialize;

/// Summary of one timed cell, in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub trials: usize,
    pub mean_ms: f64,
    /// Sample standard deviation; zero for a single trial.
    pub stddev_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl Stats {
    pub fn from_samples(samples: &[Duration]) -> Self {
        assert!(!samples.is_empty(), "at least one sample");
        let ms: Vec<f64> = samples.iter().map(|d| d.as_secs_f64() * 1e3).collect();
        let n = ms.len() as f64;
        let mean = ms.iter().sum::<f64>() / n;
        let var = if ms.len() > 1 {
            ms.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Stats {
            trials: ms.len(),
            mean_ms: mean,
            stddev_ms: var.sqrt(),
            min_ms: ms.iter().copied().fold(f64::INFINITY, f64::min),
            max_ms: ms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Times `f` on fresh inputs from `setup`. Setup runs outside the timed
/// region and the first `warmup` runs are discarded.
pub fn measure<S, T>(
    warmup: usize,
    trials: usize,
    mut setup: impl FnMut() -> S,
    mut f: impl FnMut(S) -> T,
) -> Stats {
    for _ in 0..warmup {
        black_box(f(setup()));
    }
    let samples: Vec<Duration> = (0..trials)
        .map(|_| {
            let input = setup();
            let start = Instant::now();
            black_box(f(input));
            start.elapsed()
        })
        .collect();
    Stats::from_samples(&samples)
}
