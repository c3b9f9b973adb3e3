use std::collections::{HashMap, HashSet};

use rand::{CryptoRng, RngCore};
use thiserror::Error;

use super::frame::{TraceRequest, TraceResponse};
use super::lea::Lea;
use crate::pairing::{PairingCurve, G1};
use crate::scheme::{
    keygen_rsu, keygen_vehicle, setup, trace_candidates, IdentityRegistry, KeyError, MasterSecret,
    PublicParams, RsuCredential, TraceError, VehicleCredential,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("identity {0:?} is already registered")]
    Duplicate(String),
    #[error("identity {0:?} is not registered")]
    Unknown(String),
    #[error(transparent)]
    Key(#[from] KeyError),
}

/// Pseudonym revocation list. Grows monotonically; `version` counts
/// insertions so a holder can tell whether its copy is current.
#[derive(Clone, Debug)]
pub struct Prl<E: PairingCurve> {
    order: Vec<G1<E>>,
    set: HashSet<G1<E>>,
}

impl<E: PairingCurve> Default for Prl<E> {
    fn default() -> Self {
        Prl {
            order: Vec::new(),
            set: HashSet::new(),
        }
    }
}

impl<E: PairingCurve> Prl<E> {
    pub fn contains(&self, pid: &G1<E>) -> bool {
        self.set.contains(pid)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn version(&self) -> u64 {
        self.order.len() as u64
    }

    /// Revoked pseudonyms in revocation order.
    pub fn iter(&self) -> impl Iterator<Item = &G1<E>> {
        self.order.iter()
    }

    fn insert(&mut self, pid: G1<E>) -> bool {
        if self.set.insert(pid) {
            self.order.push(pid);
            true
        } else {
            false
        }
    }
}

/// The trusted registration authority: holds the master secret, the
/// VID to PID registry and the revocation list.
pub struct Trc<E: PairingCurve> {
    pp: PublicParams<E>,
    master: MasterSecret<E>,
    vehicles: Vec<G1<E>>,
    vid_by_pid: HashMap<G1<E>, String>,
    pid_by_vid: HashMap<String, G1<E>>,
    rsus: HashSet<String>,
    prl: Prl<E>,
}

impl<E: PairingCurve> Trc<E> {
    /// System setup. The trace secret goes straight to the returned LEA.
    pub fn setup<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> (Self, Lea<E>) {
        let (pp, master, trace) = setup::<E, _>(rng);
        let lea = Lea::new(pp.clone(), trace);
        let trc = Trc {
            pp,
            master,
            vehicles: Vec::new(),
            vid_by_pid: HashMap::new(),
            pid_by_vid: HashMap::new(),
            rsus: HashSet::new(),
            prl: Prl::default(),
        };
        (trc, lea)
    }

    pub fn public_params(&self) -> &PublicParams<E> {
        &self.pp
    }

    pub fn register_vehicle(&mut self, vid: &str) -> Result<VehicleCredential<E>, RegistryError> {
        if self.pid_by_vid.contains_key(vid) {
            return Err(RegistryError::Duplicate(vid.to_owned()));
        }
        let cred = keygen_vehicle(&self.master, vid)?;
        let pid = *cred.pid();
        if self.vid_by_pid.contains_key(&pid) {
            // Two identities hashing to one pseudonym would break the bijection.
            return Err(RegistryError::Duplicate(vid.to_owned()));
        }
        self.vehicles.push(pid);
        self.vid_by_pid.insert(pid, vid.to_owned());
        self.pid_by_vid.insert(vid.to_owned(), pid);
        Ok(cred)
    }

    pub fn register_rsu(&mut self, id: &str) -> Result<RsuCredential<E>, RegistryError> {
        if self.rsus.contains(id) {
            return Err(RegistryError::Duplicate(id.to_owned()));
        }
        let cred = keygen_rsu(&self.master, id)?;
        self.rsus.insert(id.to_owned());
        Ok(cred)
    }

    /// Adds the vehicle's pseudonym to the PRL. Revoking twice is a no-op.
    pub fn revoke(&mut self, vid: &str) -> Result<&Prl<E>, RegistryError> {
        let pid = *self
            .pid_by_vid
            .get(vid)
            .ok_or_else(|| RegistryError::Unknown(vid.to_owned()))?;
        self.prl.insert(pid);
        Ok(&self.prl)
    }

    pub fn prl(&self) -> &Prl<E> {
        &self.prl
    }

    pub fn pid_of(&self, vid: &str) -> Option<&G1<E>> {
        self.pid_by_vid.get(vid)
    }

    /// Registered, non-revoked pseudonyms in registration order, offered to
    /// RSUs for padding ring lists.
    pub fn decoy_pool(&self) -> Vec<G1<E>> {
        self.vehicles
            .iter()
            .filter(|p| !self.prl.contains(p))
            .copied()
            .collect()
    }

    pub fn vehicle_count(&self) -> usize {
        self.vehicles.len()
    }

    /// `e(H1(VID_i ‖ t), Q)` for every member of the ring under investigation.
    pub fn handle_trace_request(
        &self,
        req: &TraceRequest<E>,
    ) -> Result<TraceResponse<E>, TraceError> {
        let candidates = trace_candidates(&self.pp, self, &req.ring, req.timestamp)?;
        Ok(TraceResponse {
            candidates: candidates.into_iter().map(|(_, c)| c).collect(),
        })
    }

    /// Reveals the identity behind a pseudonym the LEA has matched.
    pub fn resolve(&self, pid: &G1<E>) -> Option<&str> {
        self.vid_by_pid.get(pid).map(String::as_str)
    }
}

impl<E: PairingCurve> IdentityRegistry<E> for Trc<E> {
    fn vid_of(&self, pid: &G1<E>) -> Option<&str> {
        self.resolve(pid)
    }
}
