//! Measurement routines, generic over the pairing backend.

use ibrs::pairing::{
    count_pairings_in, g1_generator, g2_generator, hash_to_g1, pair, random_nonzero_scalar, Gt,
    PairingCurve, G1, G2,
};
use ibrs::scheme::{
    keygen_vehicle, setup, sign_envelope, verify_batch, verify_single, BatchConfig,
    BroadcastEnvelope, PublicParams, SignerRing, VehicleCredential,
};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::stats::{measure, Stats};

/// Shared knobs of every timed subcommand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub trials: usize,
    pub warmup: usize,
    pub seed: u64,
    pub ring_sizes: Vec<usize>,
    pub etas: Vec<usize>,
    pub message_len: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trials: 1000,
            warmup: 10,
            seed: 1,
            ring_sizes: vec![2],
            etas: vec![1, 10, 50, 100, 500],
            message_len: 32,
        }
    }
}

impl RunConfig {
    /// Ring size for commands that take a single one.
    pub fn ring_size(&self) -> usize {
        self.ring_sizes.first().copied().unwrap_or(2)
    }
}

/// Registered vehicles and public parameters to sign with.
pub struct Workload<E: PairingCurve> {
    pub pp: PublicParams<E>,
    pub creds: Vec<VehicleCredential<E>>,
    pub rng: ChaCha20Rng,
}

impl<E: PairingCurve> Workload<E> {
    pub fn new(seed: u64, vehicles: usize) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (pp, master, _) = setup::<E, _>(&mut rng);
        let creds = (0..vehicles.max(2))
            .map(|i| keygen_vehicle(&master, &format!("veh-{i}")).expect("non-empty identity"))
            .collect();
        Workload { pp, creds, rng }
    }

    pub fn random_message(&mut self, len: usize) -> Vec<u8> {
        let mut m = vec![0u8; len];
        self.rng.fill_bytes(&mut m);
        m
    }

    /// An honest envelope from a random signer over a random ring of `n`.
    pub fn envelope(&mut self, n: usize, message_len: usize) -> BroadcastEnvelope<E> {
        assert!(n <= self.creds.len(), "ring larger than the registered population");
        let chosen: Vec<usize> =
            rand::seq::index::sample(&mut self.rng, self.creds.len(), n).into_vec();
        let signer = *chosen.choose(&mut self.rng).expect("ring is non-empty");
        let ring = SignerRing::new(chosen.iter().map(|&i| *self.creds[i].pid()).collect())
            .expect("distinct registered pseudonyms");
        let m = self.random_message(message_len);
        let t = self.rng.gen_range(1_600_000_000..1_900_000_000);
        sign_envelope(&self.pp, &self.creds[signer], ring, &m, t, &mut self.rng)
            .expect("signer is in the ring")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpRow {
    pub op: &'static str,
    /// Name of the matching cost symbol in the original evaluation.
    pub analog: &'static str,
    pub stats: Stats,
    pub pairings: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingRow {
    pub ring_size: usize,
    pub stats: Stats,
    pub pairings: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Single,
    Batch,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Batch => "batch",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchRow {
    pub mode: Mode,
    pub eta: usize,
    pub ring_size: usize,
    /// Time to verify all `eta` envelopes.
    pub stats: Stats,
    pub pairings: u64,
}

/// Primitive and end-to-end operation timings.
pub fn ops<E: PairingCurve>(cfg: &RunConfig) -> Vec<OpRow> {
    let n = cfg.ring_size();
    let mut w = Workload::<E>::new(cfg.seed, n);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x6f70);
    let p = g1_generator::<E>();
    let q = g2_generator::<E>();
    let g = pair::<E>(&p, &q);
    let (trials, warmup) = (cfg.trials, cfg.warmup);
    let mut rows = Vec::new();
    let mut row = |op, analog, stats, pairings| {
        rows.push(OpRow {
            op,
            analog,
            stats,
            pairings,
        })
    };

    let mut points = || -> (G1<E>, G2<E>) {
        let a = random_nonzero_scalar::<E, _>(&mut rng);
        let b = random_nonzero_scalar::<E, _>(&mut rng);
        ((p * a).into(), (q * b).into())
    };
    let stats = measure(warmup, trials, &mut points, |(a, b)| pair::<E>(&a, &b));
    row("pairing", "T_bp", stats, 1);

    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x6570);
    let stats = measure(
        warmup,
        trials,
        || random_nonzero_scalar::<E, _>(&mut rng),
        |s| -> Gt<E> { g * s },
    );
    row("gt_exp", "T_ep", stats, 0);

    let stats = measure(
        warmup,
        trials,
        || random_nonzero_scalar::<E, _>(&mut rng),
        |s| -> G1<E> { (p * s).into() },
    );
    row("g1_mul", "T_em", stats, 0);

    let stats = measure(
        warmup,
        trials,
        || {
            let mut m = [0u8; 32];
            rng.fill_bytes(&mut m);
            m
        },
        |m| hash_to_g1::<E>(&m),
    );
    row("hash_to_g1", "T_mph", stats, 0);

    let signer = 0;
    let ring = SignerRing::new(w.creds[..n].iter().map(|c| *c.pid()).collect())
        .expect("distinct pseudonyms");
    let len = cfg.message_len;
    let mut sign_rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x7369);
    let mut msg_rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x6d73);
    let stats = measure(
        warmup,
        trials,
        || {
            let mut m = vec![0u8; len];
            msg_rng.fill_bytes(&mut m);
            (ring.clone(), m)
        },
        |(ring, m)| sign_envelope(&w.pp, &w.creds[signer], ring, &m, 1, &mut sign_rng),
    );
    row("sign", "", stats, 1);

    let envs: Vec<_> = (0..16).map(|_| w.envelope(n, len)).collect();
    let mut next = envs.iter().cycle();
    let (_, pairings) = count_pairings_in(|| verify_single(&w.pp, &envs[0]));
    let stats = measure(
        warmup,
        trials,
        || next.next().expect("cycle is endless"),
        |env| verify_single(&w.pp, env).expect("honest envelope verifies"),
    );
    row("verify", "", stats, pairings);
    rows
}

/// Single verification time for each ring size.
pub fn verify_vs_ringsize<E: PairingCurve>(cfg: &RunConfig) -> Vec<RingRow> {
    let max = cfg.ring_sizes.iter().copied().max().unwrap_or(2);
    let mut w = Workload::<E>::new(cfg.seed, max);
    cfg.ring_sizes
        .iter()
        .map(|&n| {
            let envs: Vec<_> = (0..8).map(|_| w.envelope(n, cfg.message_len)).collect();
            let (_, pairings) = count_pairings_in(|| verify_single(&w.pp, &envs[0]));
            let mut next = envs.iter().cycle();
            let stats = measure(
                cfg.warmup,
                cfg.trials,
                || next.next().expect("cycle is endless"),
                |env| verify_single(&w.pp, env).expect("honest envelope verifies"),
            );
            RingRow {
                ring_size: n,
                stats,
                pairings,
            }
        })
        .collect()
}

/// Verifying `eta` envelopes one at a time versus in one batch.
pub fn batch_curve<E: PairingCurve>(cfg: &RunConfig) -> Vec<BatchRow> {
    let n = cfg.ring_size();
    let max_eta = cfg.etas.iter().copied().max().unwrap_or(1);
    let mut w = Workload::<E>::new(cfg.seed, n.max(8));
    let pool: Vec<_> = (0..max_eta).map(|_| w.envelope(n, cfg.message_len)).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x6261);
    let config = BatchConfig::default();
    let mut rows = Vec::new();
    for &eta in &cfg.etas {
        let envs = &pool[..eta];
        let single = |envs: &[BroadcastEnvelope<E>]| {
            for env in envs {
                verify_single(&w.pp, env).expect("honest envelope verifies");
            }
        };
        let (_, pairings) = count_pairings_in(|| single(envs));
        let stats = measure(cfg.warmup, cfg.trials, || envs, single);
        rows.push(BatchRow {
            mode: Mode::Single,
            eta,
            ring_size: n,
            stats,
            pairings,
        });

        let (_, pairings) =
            count_pairings_in(|| verify_batch(&w.pp, envs, config, &mut rng));
        let stats = measure(
            cfg.warmup,
            cfg.trials,
            || envs,
            |envs| verify_batch(&w.pp, envs, config, &mut rng).expect("honest batch verifies"),
        );
        rows.push(BatchRow {
            mode: Mode::Batch,
            eta,
            ring_size: n,
            stats,
            pairings,
        });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use ibrs::pairing::Bn254;

    fn quick() -> RunConfig {
        RunConfig {
            trials: 3,
            warmup: 1,
            ring_sizes: vec![2, 3],
            etas: vec![1, 4],
            ..RunConfig::default()
        }
    }

    #[test]
    fn ops_cover_the_cost_symbols() {
        let rows = ops::<Bn254>(&quick());
        let analogs: Vec<_> = rows.iter().map(|r| r.analog).filter(|a| !a.is_empty()).collect();
        assert_eq!(analogs, ["T_bp", "T_ep", "T_em", "T_mph"]);
        let verify = rows.iter().find(|r| r.op == "verify").unwrap();
        assert_eq!(verify.pairings, 2);
        assert!(rows.iter().all(|r| r.stats.trials == 3));
    }

    #[test]
    fn ring_rows_follow_the_requested_sizes() {
        let rows = verify_vs_ringsize::<Bn254>(&quick());
        assert_eq!(rows.iter().map(|r| r.ring_size).collect::<Vec<_>>(), [2, 3]);
        assert!(rows.iter().all(|r| r.pairings == 2));
    }

    #[test]
    fn batch_rows_count_pairings_per_mode() {
        let rows = batch_curve::<Bn254>(&quick());
        assert_eq!(rows.len(), 4);
        for r in rows {
            let expected = match r.mode {
                Mode::Single => 2 * r.eta as u64,
                Mode::Batch => 2,
            };
            assert_eq!(r.pairings, expected, "{r:?}");
        }
    }

    #[test]
    fn workload_envelopes_verify() {
        let mut w = Workload::<Bn254>::new(9, 5);
        for n in 2..=5 {
            let env = w.envelope(n, 10);
            assert_eq!(env.ring.len(), n);
            assert!(verify_single(&w.pp, &env).is_ok());
        }
    }
}
