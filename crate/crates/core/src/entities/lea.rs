use thiserror::Error;

use super::frame::{TraceRequest, TraceResponse};
use super::trc::Trc;
use crate::pairing::{Gt, PairingCurve, G2};
use crate::scheme::{trace_open, BroadcastEnvelope, PublicParams, TraceError, TraceSecret, TraceTag};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LeaError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("TRC returned {got} candidates for a ring of {expected}")]
    ResponseLength { expected: usize, got: usize },
}

/// The law enforcement authority. It alone holds `s_trac`.
pub struct Lea<E: PairingCurve> {
    pp: PublicParams<E>,
    trace: TraceSecret<E>,
}

impl<E: PairingCurve> Lea<E> {
    pub fn new(pp: PublicParams<E>, trace: TraceSecret<E>) -> Self {
        Lea { pp, trace }
    }

    pub fn pk_trac(&self) -> &G2<E> {
        self.pp.pk_trac()
    }

    /// `PK_trac == s_trac · Q`
    pub fn is_consistent(&self) -> bool {
        self.trace.public_key() == *self.pp.pk_trac()
    }

    /// First message: what to ask the TRC for.
    pub fn trace_request(&self, env: &BroadcastEnvelope<E>) -> TraceRequest<E> {
        TraceRequest {
            ring: env.ring.clone(),
            timestamp: env.timestamp,
        }
    }

    pub fn open(&self, tag: &TraceTag<E>) -> Gt<E> {
        trace_open(&self.trace, tag)
    }

    /// Ring slot whose candidate matches the opened tag.
    pub fn match_response(
        &self,
        env: &BroadcastEnvelope<E>,
        resp: &TraceResponse<E>,
    ) -> Result<Option<usize>, LeaError> {
        if resp.candidates.len() != env.ring.len() {
            return Err(LeaError::ResponseLength {
                expected: env.ring.len(),
                got: resp.candidates.len(),
            });
        }
        let opened = self.open(&env.tag);
        let mut hits = resp.candidates.iter().enumerate().filter(|(_, c)| **c == opened);
        match (hits.next(), hits.next()) {
            (None, _) => Ok(None),
            (Some((i, _)), None) => Ok(Some(i)),
            _ => Err(TraceError::Ambiguous.into()),
        }
    }
}

/// Two-message tracing: the LEA sends `{L_s, t}`, the TRC answers with one
/// candidate per ring member, the LEA matches the opened tag and the TRC
/// resolves the matching pseudonym.
pub fn lea_trace<E: PairingCurve>(
    lea: &Lea<E>,
    trc: &Trc<E>,
    env: &BroadcastEnvelope<E>,
) -> Result<Option<String>, LeaError> {
    let req = lea.trace_request(env);
    let resp = trc.handle_trace_request(&req)?;
    Ok(lea
        .match_response(env, &resp)?
        .and_then(|i| trc.resolve(&env.ring.members()[i]))
        .map(str::to_owned))
}
