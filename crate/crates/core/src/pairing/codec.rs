//! Canonical byte encodings.
//!
//! Group elements use the backend's compressed form. Decoding is strict: the
//! input length must match the profile, the point must lie on the curve and
//! in the prime-order subgroup, and re-encoding must reproduce the input.

use ark_ec::short_weierstrass::{Affine, SWCurveConfig};
use ark_ec::AffineRepr;
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize, Compress, Valid, Validate};
use thiserror::Error;

use super::{Gt, PairingCurve, Scalar, G1, G2};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("expected {expected} bytes, got {actual}")]
    WrongLength { expected: usize, actual: usize },
    #[error("encoding does not describe a curve point")]
    OffCurve,
    #[error("point is not in the prime-order subgroup")]
    NotInSubgroup,
    #[error("encoding is not canonical")]
    NonCanonical,
    #[error("identity element is not a valid protocol value")]
    Identity,
}

fn encode<T: CanonicalSerialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::with_capacity(value.compressed_size());
    value
        .serialize_compressed(&mut out)
        .expect("writing to a Vec cannot fail");
    out
}

fn check_len(bytes: &[u8], expected: usize) -> Result<(), DecodeError> {
    if bytes.len() != expected {
        return Err(DecodeError::WrongLength {
            expected,
            actual: bytes.len(),
        });
    }
    Ok(())
}

fn decode_point<P: SWCurveConfig>(bytes: &[u8], expected: usize) -> Result<Affine<P>, DecodeError> {
    check_len(bytes, expected)?;
    let point = Affine::<P>::deserialize_with_mode(bytes, Compress::Yes, Validate::No)
        .map_err(|_| DecodeError::OffCurve)?;
    if !point.is_on_curve() {
        return Err(DecodeError::OffCurve);
    }
    if !point.is_in_correct_subgroup_assuming_on_curve() {
        return Err(DecodeError::NotInSubgroup);
    }
    if encode(&point) != bytes {
        return Err(DecodeError::NonCanonical);
    }
    Ok(point)
}

pub fn encode_g1<E: PairingCurve>(p: &G1<E>) -> Vec<u8> {
    encode(p)
}

pub fn encode_g2<E: PairingCurve>(p: &G2<E>) -> Vec<u8> {
    encode(p)
}

pub fn encode_gt<E: PairingCurve>(g: &Gt<E>) -> Vec<u8> {
    encode(g)
}

pub fn encode_scalar<E: PairingCurve>(s: &Scalar<E>) -> Vec<u8> {
    encode(s)
}

/// Decodes a compressed G1 element. The identity is rejected: no protocol
/// value is ever the identity.
pub fn decode_g1<E: PairingCurve>(bytes: &[u8]) -> Result<G1<E>, DecodeError> {
    let p = decode_point::<E::G1Config>(bytes, E::profile().g1_len)?;
    if p.is_zero() {
        return Err(DecodeError::Identity);
    }
    Ok(p)
}

pub fn decode_g2<E: PairingCurve>(bytes: &[u8]) -> Result<G2<E>, DecodeError> {
    let p = decode_point::<E::G2Config>(bytes, E::profile().g2_len)?;
    if p.is_zero() {
        return Err(DecodeError::Identity);
    }
    Ok(p)
}

pub fn decode_gt<E: PairingCurve>(bytes: &[u8]) -> Result<Gt<E>, DecodeError> {
    check_len(bytes, E::profile().gt_len)?;
    let g = Gt::<E>::deserialize_with_mode(bytes, Compress::Yes, Validate::No)
        .map_err(|_| DecodeError::NonCanonical)?;
    g.check().map_err(|_| DecodeError::NotInSubgroup)?;
    if encode(&g) != bytes {
        return Err(DecodeError::NonCanonical);
    }
    Ok(g)
}

pub fn decode_scalar<E: PairingCurve>(bytes: &[u8]) -> Result<Scalar<E>, DecodeError> {
    check_len(bytes, E::profile().scalar_len)?;
    let s = Scalar::<E>::deserialize_compressed(bytes).map_err(|_| DecodeError::NonCanonical)?;
    if encode(&s) != bytes {
        return Err(DecodeError::NonCanonical);
    }
    Ok(s)
}
