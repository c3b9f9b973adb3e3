use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use super::trc::{Prl, Trc};
use crate::channel::{seal_ring_list, RingList, SealedRingList, SymmetricKey};
use crate::pairing::{PairingCurve, G1, G2};
use crate::scheme::{derive_shared_key_rsu, ibe_decrypt, IbeCiphertext, IbeError, RsuCredential};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RsuError {
    #[error("ring request does not decrypt: {0}")]
    Decrypt(#[from] IbeError),
    #[error("requesting pseudonym is revoked")]
    Revoked,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RsuConfig {
    /// Ring lists are padded with decoys up to this many pseudonyms.
    pub list_floor: usize,
    /// Seconds a ring list stays valid; also the epoch length.
    pub list_lifetime: u64,
    /// Seconds between PRL fetches from the TRC.
    pub prl_refresh: u64,
}

impl Default for RsuConfig {
    fn default() -> Self {
        RsuConfig {
            list_floor: 32,
            list_lifetime: 300,
            prl_refresh: 60,
        }
    }
}

pub struct Rsu<E: PairingCurve> {
    cred: RsuCredential<E>,
    config: RsuConfig,
    prl: Prl<E>,
    prl_fetched_at: Option<u64>,
    decoys: Vec<G1<E>>,
    keys: HashMap<G1<E>, SymmetricKey>,
    epoch_end: u64,
    requesters: Vec<G1<E>>,
}

impl<E: PairingCurve> Rsu<E> {
    pub fn new(cred: RsuCredential<E>, config: RsuConfig) -> Self {
        Rsu {
            cred,
            config,
            prl: Prl::default(),
            prl_fetched_at: None,
            decoys: Vec::new(),
            keys: HashMap::new(),
            epoch_end: 0,
            requesters: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        self.cred.id()
    }

    /// The RID beacon.
    pub fn beacon(&self) -> G2<E> {
        *self.cred.rid()
    }

    pub fn config(&self) -> &RsuConfig {
        &self.config
    }

    pub fn needs_refresh(&self, now: u64) -> bool {
        match self.prl_fetched_at {
            None => true,
            Some(at) => now.saturating_sub(at) >= self.config.prl_refresh,
        }
    }

    /// Pulls the PRL and decoy pool from the TRC and drops any cached state
    /// for pseudonyms that are now revoked.
    pub fn refresh(&mut self, trc: &Trc<E>, now: u64) {
        self.prl = trc.prl().clone();
        self.prl_fetched_at = Some(now);
        self.decoys = trc.decoy_pool();
        let prl = &self.prl;
        self.keys.retain(|pid, _| !prl.contains(pid));
        self.requesters.retain(|pid| !prl.contains(pid));
    }

    pub fn prl_version(&self) -> u64 {
        self.prl.version()
    }

    pub fn cached_keys(&self) -> usize {
        self.keys.len()
    }

    pub fn is_key_cached(&self, pid: &G1<E>) -> bool {
        self.keys.contains_key(pid)
    }

    pub fn handle_ring_request<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        request: &IbeCiphertext<E>,
        now: u64,
        rng: &mut R,
    ) -> Result<SealedRingList, RsuError> {
        let pid = ibe_decrypt(&self.cred, request)?;
        if self.prl.contains(&pid) {
            return Err(RsuError::Revoked);
        }
        if now >= self.epoch_end {
            self.epoch_end = now + self.config.list_lifetime;
            self.requesters.clear();
        }
        if !self.requesters.contains(&pid) {
            self.requesters.push(pid);
        }
        let key = self
            .keys
            .entry(pid)
            .or_insert_with(|| derive_shared_key_rsu(&self.cred, &pid))
            .clone();
        let list = RingList::<E> {
            pids: self.build_list(rng),
            expires_at: self.epoch_end,
        };
        Ok(seal_ring_list(&key, &list, rng))
    }

    /// This epoch's requesters, then random decoys up to the floor. Nothing
    /// on the PRL is ever included.
    fn build_list<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<G1<E>> {
        let mut pids: Vec<G1<E>> = self
            .requesters
            .iter()
            .filter(|p| !self.prl.contains(p))
            .copied()
            .collect();
        let mut present: HashSet<G1<E>> = pids.iter().copied().collect();
        let mut pool: Vec<&G1<E>> = self
            .decoys
            .iter()
            .filter(|p| !self.prl.contains(p) && !present.contains(p))
            .collect();
        pool.shuffle(rng);
        for p in pool {
            if pids.len() >= self.config.list_floor {
                break;
            }
            if present.insert(*p) {
                pids.push(*p);
            }
        }
        pids.shuffle(rng);
        pids
    }
}
