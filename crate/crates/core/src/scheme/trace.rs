//! Conditional tracing.
//!
//! The trace authority opens a tag to `e(H1(VID ‖ t), Q)` with its secret and
//! compares it with the same value computed for every ring member's identity.

use ark_ff::Field;
use thiserror::Error;

use super::keys::{PublicParams, TraceSecret};
use super::ring::{identity_time_input, BroadcastEnvelope, SignerRing, TraceTag};
use crate::pairing::{hash_to_g1, pair_prepared, Gt, PairingCurve, G1};

/// Lookup from pseudonym to real identity, held by the trusted authority.
pub trait IdentityRegistry<E: PairingCurve> {
    fn vid_of(&self, pid: &G1<E>) -> Option<&str>;
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("ring member {0} is not a registered pseudonym")]
    UnknownPseudonym(usize),
    #[error("tag matches more than one ring member")]
    Ambiguous,
}

/// `tag^(1/s_trac)`
pub fn trace_open<E: PairingCurve>(trace: &TraceSecret<E>, tag: &TraceTag<E>) -> Gt<E> {
    let inv = trace
        .scalar()
        .inverse()
        .expect("trace secret is nonzero");
    tag.0 * inv
}

/// `e(H1(VID_i ‖ t), Q)` for every ring member, in ring order.
pub fn trace_candidates<E: PairingCurve, R: IdentityRegistry<E> + ?Sized>(
    pp: &PublicParams<E>,
    registry: &R,
    ring: &SignerRing<E>,
    t: u64,
) -> Result<Vec<(String, Gt<E>)>, TraceError> {
    ring.members()
        .iter()
        .enumerate()
        .map(|(i, pid)| {
            let vid = registry.vid_of(pid).ok_or(TraceError::UnknownPseudonym(i))?;
            let base = hash_to_g1::<E>(&identity_time_input(vid, t));
            Ok((vid.to_owned(), pair_prepared::<E>(&base, pp.q_prepared())))
        })
        .collect()
}

/// Identity whose candidate equals `opened`, `None` if none does.
pub fn match_candidates<E: PairingCurve>(
    opened: &Gt<E>,
    candidates: &[(String, Gt<E>)],
) -> Result<Option<String>, TraceError> {
    let mut hits = candidates.iter().filter(|(_, c)| c == opened);
    match (hits.next(), hits.next()) {
        (None, _) => Ok(None),
        (Some((vid, _)), None) => Ok(Some(vid.clone())),
        (Some(_), Some(_)) => Err(TraceError::Ambiguous),
    }
}

/// Opens the envelope's tag and resolves it against the ring.
pub fn trace_match<E: PairingCurve, R: IdentityRegistry<E> + ?Sized>(
    pp: &PublicParams<E>,
    trace: &TraceSecret<E>,
    registry: &R,
    env: &BroadcastEnvelope<E>,
) -> Result<Option<String>, TraceError> {
    let opened = trace_open(trace, &env.tag);
    let candidates = trace_candidates(pp, registry, &env.ring, env.timestamp)?;
    match_candidates(&opened, &candidates)
}
