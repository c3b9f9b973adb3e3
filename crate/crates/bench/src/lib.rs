//! Measurement harness behind the `ibrs` command-line tool.
//!
//! Four benchmarks are available, each producing a [`BenchReport`]:
//!
//! * `ops`: primitive costs (pairing, target-group exponentiation, G1 scalar
//!   multiplication, hash to G1) plus signing and verification;
//! * `verify-vs-ringsize`: single verification time as the ring grows;
//! * `batch-curve`: verifying η envelopes one by one and as one batch;
//! * `sizes`: serialized byte counts, also for size-only curve profiles.
//!
//! Timings exclude warm-up runs and per-trial input generation and are taken
//! with the monotonic clock.

mod machine;
mod report;
mod sizes;
mod stats;
mod suite;

use ibrs::pairing::{Bls12_381, Bn254, CurveProfile, PairingCurve};
use thiserror::Error;

pub use machine::Machine;
pub use report::{BenchReport, Table};
pub use sizes::{measured_sizes, sizes_from_profile, SizeRow};
pub use stats::{measure, Stats};
pub use suite::{
    batch_curve, ops, verify_vs_ringsize, BatchRow, Mode, OpRow, RingRow, RunConfig, Workload,
};

/// Fewer trials than this per cell are refused.
pub const MIN_TRIALS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchKind {
    Ops,
    VerifyVsRingsize,
    BatchCurve,
    Sizes,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("curve profile {0} has no arithmetic backend; only `sizes` supports it")]
    NotRunnable(&'static str),
    #[error("at least {MIN_TRIALS} trials per cell are required, got {0}")]
    TooFewTrials(usize),
    #[error("serialized sizes disagree with the profile formula for ring size {0}")]
    SizeMismatch(usize),
}

impl BenchKind {
    /// Whether the benchmark needs curve arithmetic rather than lengths only.
    pub fn needs_backend(self) -> bool {
        self != BenchKind::Sizes
    }
}

/// Runs one benchmark on `profile`.
pub fn run(
    kind: BenchKind,
    profile: &'static CurveProfile,
    cfg: &RunConfig,
    machine: Machine,
) -> Result<BenchReport, BenchError> {
    let mut report = BenchReport {
        machine,
        curve: profile.id.to_owned(),
        seed: cfg.seed,
        trials: cfg.trials,
        warmup: cfg.warmup,
        ops: vec![],
        ring_sizes: vec![],
        batch: vec![],
        sizes: vec![],
    };
    if kind.needs_backend() && cfg.trials < MIN_TRIALS {
        return Err(BenchError::TooFewTrials(cfg.trials));
    }
    match profile.id {
        "bls12-381" => run_on::<Bls12_381>(kind, cfg, &mut report)?,
        "bn254" => run_on::<Bn254>(kind, cfg, &mut report)?,
        _ if kind == BenchKind::Sizes => {
            report.sizes = cfg
                .ring_sizes
                .iter()
                .map(|&n| sizes_from_profile(profile, n, cfg.message_len))
                .collect();
        }
        _ => return Err(BenchError::NotRunnable(profile.id)),
    }
    Ok(report)
}

fn run_on<E: PairingCurve>(
    kind: BenchKind,
    cfg: &RunConfig,
    report: &mut BenchReport,
) -> Result<(), BenchError> {
    match kind {
        BenchKind::Ops => report.ops = ops::<E>(cfg),
        BenchKind::VerifyVsRingsize => report.ring_sizes = verify_vs_ringsize::<E>(cfg),
        BenchKind::BatchCurve => report.batch = batch_curve::<E>(cfg),
        BenchKind::Sizes => {
            for &n in &cfg.ring_sizes {
                let formula = sizes_from_profile(E::profile(), n, cfg.message_len);
                if measured_sizes::<E>(cfg.seed, n, cfg.message_len) != formula {
                    return Err(BenchError::SizeMismatch(n));
                }
                report.sizes.push(formula);
            }
        }
    }
    Ok(())
}

impl BenchReport {
    /// The table belonging to `kind`.
    pub fn table(&self, kind: BenchKind) -> Table {
        match kind {
            BenchKind::Ops => self.ops_table(),
            BenchKind::VerifyVsRingsize => self.ring_table(),
            BenchKind::BatchCurve => self.batch_table(),
            BenchKind::Sizes => self.sizes_table(),
        }
    }
}
