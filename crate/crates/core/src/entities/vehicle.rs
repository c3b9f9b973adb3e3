use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::{open_ring_list, ChannelError, RingList, SealedRingList, SymmetricKey};
use crate::pairing::{PairingCurve, G1, G2};
use crate::scheme::{
    derive_shared_key_vehicle, ibe_encrypt, sign_envelope, verify_batch, verify_single,
    BatchConfig, BatchError, BroadcastEnvelope, IbeCiphertext, PublicParams, RingError,
    SignerRing, VehicleCredential, VerifyError, MIN_RING_SIZE,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum VehicleError {
    #[error("no ring list held")]
    NoRingList,
    #[error("ring list expired at {expires_at}, now {now}")]
    ListExpired { expires_at: u64, now: u64 },
    #[error("ring size {needed} needs {} other pseudonyms, list offers {available}", .needed - 1)]
    InsufficientList { available: usize, needed: usize },
    #[error("ring size must be at least {MIN_RING_SIZE}")]
    RingTooSmall,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Why an incoming envelope was dropped.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Rejection {
    #[error("timestamp {timestamp} outside freshness window at {now}")]
    Stale { timestamp: u64, now: u64 },
    #[error("envelope already accepted")]
    Replay,
    #[error(transparent)]
    Invalid(#[from] VerifyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VehicleConfig {
    /// Freshness window Δ in seconds.
    pub freshness_window: u64,
    /// Default ring size n'.
    pub ring_size: usize,
    pub batch: BatchConfig,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        VehicleConfig {
            freshness_window: 5,
            ring_size: 2,
            batch: BatchConfig::default(),
        }
    }
}

/// Outcome of [`Vehicle::receive_batch`]. `filtered` lists envelopes dropped
/// before verification; `verified` lists the indices that went into the batch
/// and `decision` is the batch verdict on them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchReceipt {
    pub filtered: Vec<(usize, Rejection)>,
    pub verified: Vec<usize>,
    pub decision: Result<(), BatchError>,
}

impl BatchReceipt {
    pub fn accepted(&self) -> &[usize] {
        match self.decision {
            Ok(()) => &self.verified,
            Err(_) => &[],
        }
    }
}

/// Key material and the operations that use it. Nothing in here is readable
/// from outside: the vehicle can ask it to sign or to open a list, no more.
struct Hsm<E: PairingCurve> {
    cred: VehicleCredential<E>,
    keys: HashMap<G2<E>, SymmetricKey>,
}

impl<E: PairingCurve> Hsm<E> {
    fn open_list(&mut self, rid: &G2<E>, sealed: &SealedRingList) -> Result<RingList<E>, ChannelError> {
        let cred = &self.cred;
        let key = self
            .keys
            .entry(*rid)
            .or_insert_with(|| derive_shared_key_vehicle(cred, rid));
        open_ring_list::<E>(key, sealed)
    }

    fn sign<R: RngCore + CryptoRng + ?Sized>(
        &self,
        pp: &PublicParams<E>,
        ring: SignerRing<E>,
        message: &[u8],
        t: u64,
        rng: &mut R,
    ) -> Result<BroadcastEnvelope<E>, RingError> {
        sign_envelope(pp, &self.cred, ring, message, t, rng)
    }
}

pub struct Vehicle<E: PairingCurve> {
    hsm: Hsm<E>,
    pp: PublicParams<E>,
    config: VehicleConfig,
    ring: Option<RingList<E>>,
    seen: HashMap<[u8; 32], u64>,
}

impl<E: PairingCurve> Vehicle<E> {
    pub fn new(pp: PublicParams<E>, cred: VehicleCredential<E>, config: VehicleConfig) -> Self {
        Vehicle {
            hsm: Hsm {
                cred,
                keys: HashMap::new(),
            },
            pp,
            config,
            ring: None,
            seen: HashMap::new(),
        }
    }

    pub fn vid(&self) -> &str {
        self.hsm.cred.vid()
    }

    pub fn pid(&self) -> &G1<E> {
        self.hsm.cred.pid()
    }

    pub fn config(&self) -> &VehicleConfig {
        &self.config
    }

    pub fn ring_list(&self) -> Option<&RingList<E>> {
        self.ring.as_ref()
    }

    /// The IBE-encrypted pseudonym sent in reply to an RSU beacon.
    pub fn request_ring<R: RngCore + CryptoRng + ?Sized>(
        &self,
        rid: &G2<E>,
        rng: &mut R,
    ) -> IbeCiphertext<E> {
        ibe_encrypt(&self.pp, rid, self.pid(), rng)
    }

    /// Checks and stores a sealed list from the RSU behind `rid`. On any
    /// failure the previously held list is kept.
    pub fn accept_ring(&mut self, rid: &G2<E>, sealed: &SealedRingList, now: u64) -> Result<(), VehicleError> {
        let list = self.hsm.open_list(rid, sealed)?;
        if now > list.expires_at {
            return Err(VehicleError::ListExpired {
                expires_at: list.expires_at,
                now,
            });
        }
        self.ring = Some(list);
        Ok(())
    }

    /// Signs `message` at time `now` with the configured ring size.
    pub fn broadcast<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        message: &[u8],
        now: u64,
        rng: &mut R,
    ) -> Result<BroadcastEnvelope<E>, VehicleError> {
        self.broadcast_with_ring_size(message, now, self.config.ring_size, rng)
    }

    /// Own pseudonym plus `n - 1` distinct random picks from the held list,
    /// in random order. The envelope goes into the replay cache so an echo
    /// of it is not accepted back.
    pub fn broadcast_with_ring_size<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        message: &[u8],
        now: u64,
        n: usize,
        rng: &mut R,
    ) -> Result<BroadcastEnvelope<E>, VehicleError> {
        if n < MIN_RING_SIZE {
            return Err(VehicleError::RingTooSmall);
        }
        let list = self.ring.as_ref().ok_or(VehicleError::NoRingList)?;
        if now > list.expires_at {
            return Err(VehicleError::ListExpired {
                expires_at: list.expires_at,
                now,
            });
        }
        let own = *self.pid();
        let others: Vec<G1<E>> = list.pids.iter().filter(|p| **p != own).copied().collect();
        if others.len() < n - 1 {
            return Err(VehicleError::InsufficientList {
                available: others.len(),
                needed: n,
            });
        }
        let mut members: Vec<G1<E>> = others.choose_multiple(rng, n - 1).copied().collect();
        members.push(own);
        members.shuffle(rng);
        let ring = SignerRing::new(members)?;
        let env = self.hsm.sign(&self.pp, ring, message, now, rng)?;
        self.evict(now);
        self.seen.insert(Self::fingerprint(&env), now);
        Ok(env)
    }

    fn is_fresh(&self, t: u64, now: u64) -> bool {
        now.abs_diff(t) <= self.config.freshness_window
    }

    fn evict(&mut self, now: u64) {
        let window = self.config.freshness_window;
        self.seen.retain(|_, t| now.abs_diff(*t) <= window);
    }

    fn fingerprint(env: &BroadcastEnvelope<E>) -> [u8; 32] {
        Sha256::digest(env.to_bytes()).into()
    }

    fn screen(&self, env: &BroadcastEnvelope<E>, now: u64) -> Result<[u8; 32], Rejection> {
        if !self.is_fresh(env.timestamp, now) {
            return Err(Rejection::Stale {
                timestamp: env.timestamp,
                now,
            });
        }
        let fp = Self::fingerprint(env);
        if self.seen.contains_key(&fp) {
            return Err(Rejection::Replay);
        }
        Ok(fp)
    }

    /// Freshness, then replay, then the signature. Only the last step
    /// costs pairings.
    pub fn receive(&mut self, env: &BroadcastEnvelope<E>, now: u64) -> Result<(), Rejection> {
        self.evict(now);
        let fp = self.screen(env, now)?;
        verify_single(&self.pp, env)?;
        self.seen.insert(fp, env.timestamp);
        Ok(())
    }

    /// Screens each envelope, then batch-verifies the survivors. Duplicates
    /// within one batch count as replays of the first copy.
    pub fn receive_batch<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        envs: &[BroadcastEnvelope<E>],
        now: u64,
        rng: &mut R,
    ) -> BatchReceipt {
        self.evict(now);
        let mut filtered = Vec::new();
        let mut verified = Vec::new();
        let mut fps: Vec<([u8; 32], u64)> = Vec::new();
        for (i, env) in envs.iter().enumerate() {
            match self.screen(env, now) {
                Ok(fp) if fps.iter().any(|(f, _)| *f == fp) => filtered.push((i, Rejection::Replay)),
                Ok(fp) => {
                    fps.push((fp, env.timestamp));
                    verified.push(i);
                }
                Err(r) => filtered.push((i, r)),
            }
        }
        let decision = if verified.is_empty() {
            Err(BatchError::Empty)
        } else {
            let batch: Vec<BroadcastEnvelope<E>> = verified.iter().map(|&i| envs[i].clone()).collect();
            verify_batch(&self.pp, &batch, self.config.batch, rng)
        };
        if decision.is_ok() {
            self.seen.extend(fps);
        }
        BatchReceipt {
            filtered,
            verified,
            decision,
        }
    }
}
