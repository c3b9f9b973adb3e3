//! Ring construction, the trace tag, signing, and the broadcast envelope.

use ark_ec::{AffineRepr, CurveGroup, VariableBaseMSM};
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use super::keys::{PublicParams, VehicleCredential};
use super::wire::{put_bytes_u32, Reader, WireError, MAX_MESSAGE_LEN};
use crate::pairing::{
    decode_g1, decode_gt, encode_g1, encode_gt, hash_to_g1, hash_to_scalar, pair_prepared, random_g1_batch,
    random_nonzero_scalar, G1Projective, Gt, PairingCurve, Scalar, G1,
};

pub const MIN_RING_SIZE: usize = 2;
/// Rings are count-prefixed with a `u16`.
pub const MAX_RING_SIZE: usize = u16::MAX as usize;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("ring has {0} members, need at least {MIN_RING_SIZE}")]
    TooSmall(usize),
    #[error("ring has {0} members, more than the encodable maximum")]
    TooLarge(usize),
    #[error("ring members {first} and {second} are the same pseudonym")]
    Duplicate { first: usize, second: usize },
    #[error("signer index {index} out of range for ring of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("ring slot {0} does not hold the signer's pseudonym")]
    SignerMismatch(usize),
}

/// The ordered pseudonym list `L_s` bound into a signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignerRing<E: PairingCurve> {
    members: Vec<G1<E>>,
}

impl<E: PairingCurve> SignerRing<E> {
    pub fn new(members: Vec<G1<E>>) -> Result<Self, RingError> {
        if members.len() < MIN_RING_SIZE {
            return Err(RingError::TooSmall(members.len()));
        }
        if members.len() > MAX_RING_SIZE {
            return Err(RingError::TooLarge(members.len()));
        }
        for (i, a) in members.iter().enumerate() {
            if let Some(j) = members[i + 1..].iter().position(|b| a == b) {
                return Err(RingError::Duplicate {
                    first: i,
                    second: i + 1 + j,
                });
            }
        }
        Ok(SignerRing { members })
    }

    pub fn members(&self) -> &[G1<E>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, pid: &G1<E>) -> Option<usize> {
        self.members.iter().position(|m| m == pid)
    }

    /// Ordered concatenation of compressed pseudonyms.
    pub fn concat_encoding(&self) -> Vec<u8> {
        self.members.iter().flat_map(encode_g1::<E>).collect()
    }

    /// `u16 n ‖ n × G1`
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.members.len() as u16).to_be_bytes());
        out.extend(self.concat_encoding());
    }

    pub(crate) fn decode_from(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let n = r.u16()? as usize;
        let len = E::profile().g1_len;
        let members = (0..n)
            .map(|_| Ok(decode_g1::<E>(r.take(len)?)?))
            .collect::<Result<Vec<_>, WireError>>()?;
        Ok(Self::new(members)?)
    }
}

/// `σ = ({U_i}, V)`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingSignature<E: PairingCurve> {
    pub u: Vec<G1<E>>,
    pub v: G1<E>,
}

impl<E: PairingCurve> RingSignature<E> {
    /// `u16 n ‖ n × G1 ‖ G1`
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.u.len() as u16).to_be_bytes());
        for u in &self.u {
            out.extend(encode_g1::<E>(u));
        }
        out.extend(encode_g1::<E>(&self.v));
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }

    pub(crate) fn decode_from(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let n = r.u16()? as usize;
        let len = E::profile().g1_len;
        let u = (0..n)
            .map(|_| Ok(decode_g1::<E>(r.take(len)?)?))
            .collect::<Result<Vec<_>, WireError>>()?;
        let v = decode_g1::<E>(r.take(len)?)?;
        Ok(RingSignature { u, v })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(bytes);
        let sig = Self::decode_from(&mut r)?;
        r.finish()?;
        Ok(sig)
    }
}

/// `tag = e(H1(VID ‖ t), PK_trac)`
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceTag<E: PairingCurve>(pub Gt<E>);

/// The hash input standing for `VID ‖ t`: `u32 len ‖ VID ‖ u64 t`.
pub(crate) fn identity_time_input(vid: &str, t: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(vid.len() + 12);
    put_bytes_u32(&mut out, vid.as_bytes());
    out.extend_from_slice(&t.to_be_bytes());
    out
}

pub fn make_tag<E: PairingCurve>(pp: &PublicParams<E>, vid: &str, t: u64) -> TraceTag<E> {
    let base = hash_to_g1::<E>(&identity_time_input(vid, t));
    TraceTag(pair_prepared::<E>(&base, pp.pk_trac_prepared()))
}

/// `(m, σ, L_s, t, tag)` as broadcast by a signer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BroadcastEnvelope<E: PairingCurve> {
    pub message: Vec<u8>,
    pub signature: RingSignature<E>,
    pub ring: SignerRing<E>,
    pub timestamp: u64,
    pub tag: TraceTag<E>,
}

impl<E: PairingCurve> BroadcastEnvelope<E> {
    /// `u32 |m| ‖ m ‖ ring ‖ signature ‖ u64 t ‖ tag`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        put_bytes_u32(&mut out, &self.message);
        self.ring.encode_into(&mut out);
        self.signature.encode_into(&mut out);
        out.extend_from_slice(&self.timestamp.to_be_bytes());
        out.extend(encode_gt::<E>(&self.tag.0));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(bytes);
        let message = r.bytes_u32(MAX_MESSAGE_LEN)?.to_vec();
        let ring = SignerRing::decode_from(&mut r)?;
        let signature = RingSignature::decode_from(&mut r)?;
        let timestamp = r.u64()?;
        let tag = TraceTag(decode_gt::<E>(r.take(E::profile().gt_len)?)?);
        r.finish()?;
        Ok(BroadcastEnvelope {
            message,
            signature,
            ring,
            timestamp,
            tag,
        })
    }

    pub fn encoded_len(&self) -> usize {
        envelope_len(
            E::profile().g1_len,
            E::profile().gt_len,
            self.message.len(),
            self.ring.len(),
        )
    }
}

/// Byte length of an encoded signature over a ring of `n`.
pub fn signature_len(g1_len: usize, n: usize) -> usize {
    2 + (n + 1) * g1_len
}

/// Byte length of an encoded envelope: message, ring, signature, timestamp
/// and tag plus 8 bytes of length/count prefixes.
pub fn envelope_len(g1_len: usize, gt_len: usize, message_len: usize, n: usize) -> usize {
    4 + message_len + 2 + n * g1_len + signature_len(g1_len, n) + 8 + gt_len
}

/// Common prefix of every `h_i` preimage: each of `m`, `tag`, `t` and `L_s`
/// is length-prefixed, and `L_s` is the ordered concatenation of compressed
/// pseudonyms.
pub(crate) fn challenge_prefix<E: PairingCurve>(
    message: &[u8],
    tag: &TraceTag<E>,
    t: u64,
    ring: &SignerRing<E>,
) -> Vec<u8> {
    let mut out = Vec::new();
    put_bytes_u32(&mut out, message);
    put_bytes_u32(&mut out, &encode_gt::<E>(&tag.0));
    put_bytes_u32(&mut out, &t.to_be_bytes());
    put_bytes_u32(&mut out, &ring.concat_encoding());
    out
}

/// `h_i = H(m ‖ tag ‖ t ‖ L_s ‖ U_i)`
pub(crate) fn challenge<E: PairingCurve>(prefix: &[u8], u: &G1<E>) -> Scalar<E> {
    let encoded = encode_g1::<E>(u);
    let mut input = Vec::with_capacity(prefix.len() + 4 + encoded.len());
    input.extend_from_slice(prefix);
    put_bytes_u32(&mut input, &encoded);
    hash_to_scalar::<E>(&input)
}

#[allow(clippy::too_many_arguments)]
pub fn ring_sign<E: PairingCurve, R: RngCore + CryptoRng + ?Sized>(
    cred: &VehicleCredential<E>,
    ring: &SignerRing<E>,
    k: usize,
    message: &[u8],
    t: u64,
    tag: &TraceTag<E>,
    rng: &mut R,
) -> Result<RingSignature<E>, RingError> {
    if k >= ring.len() {
        return Err(RingError::IndexOutOfRange {
            index: k,
            len: ring.len(),
        });
    }
    if ring.members()[k] != *cred.pid() {
        return Err(RingError::SignerMismatch(k));
    }
    let prefix = challenge_prefix(message, tag, t, ring);
    loop {
        let fillers = random_g1_batch::<E, _>(ring.len() - 1, rng);
        let r_prime = random_nonzero_scalar::<E, _>(rng);
        if let Some(sig) = sign_with(cred, ring, k, &prefix, &fillers, r_prime) {
            return Ok(sig);
        }
    }
}

/// The deterministic core of signing: `fillers` are the `U_i` for `i != k` in
/// ring order. Returns `None` when `U_k` lands on the identity.
pub(crate) fn sign_with<E: PairingCurve>(
    cred: &VehicleCredential<E>,
    ring: &SignerRing<E>,
    k: usize,
    prefix: &[u8],
    fillers: &[G1<E>],
    r_prime: Scalar<E>,
) -> Option<RingSignature<E>> {
    let members = ring.members();
    // U_k = r'·PID_k − Σ_{i≠k} (U_i + h_i·PID_i), as one multi-scalar product.
    let mut bases = Vec::with_capacity(2 * members.len() - 1);
    let mut scalars = Vec::with_capacity(2 * members.len() - 1);
    let mut filler = fillers.iter();
    let mut u: Vec<G1<E>> = Vec::with_capacity(members.len());
    for (i, pid) in members.iter().enumerate() {
        if i == k {
            u.push(G1::<E>::zero());
            continue;
        }
        let ui = *filler.next().expect("one filler per non-signer slot");
        bases.extend([ui, *pid]);
        scalars.extend([-Scalar::<E>::from(1u64), -challenge::<E>(prefix, &ui)]);
        u.push(ui);
    }
    bases.push(members[k]);
    scalars.push(r_prime);
    let uk = G1Projective::<E>::msm_unchecked(&bases, &scalars).into_affine();
    if uk.is_zero() {
        return None;
    }
    u[k] = uk;
    let hk = challenge::<E>(prefix, &uk);
    let v = (*cred.psk() * (hk + r_prime)).into_affine();
    Some(RingSignature { u, v })
}

/// Builds the tag, signs, and packages the envelope.
pub fn sign_envelope<E: PairingCurve, R: RngCore + CryptoRng + ?Sized>(
    pp: &PublicParams<E>,
    cred: &VehicleCredential<E>,
    ring: SignerRing<E>,
    message: &[u8],
    t: u64,
    rng: &mut R,
) -> Result<BroadcastEnvelope<E>, RingError> {
    let k = ring
        .position(cred.pid())
        .ok_or(RingError::SignerMismatch(ring.len()))?;
    let tag = make_tag(pp, cred.vid(), t);
    let signature = ring_sign(cred, &ring, k, message, t, &tag, rng)?;
    Ok(BroadcastEnvelope {
        message: message.to_vec(),
        signature,
        ring,
        timestamp: t,
        tag,
    })
}
