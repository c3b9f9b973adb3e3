//! Identity-based encryption of a pseudonym to an RSU.
//!
//! `C = (rP, compress(PID) ⊕ kdf(e(PK1, RID)^r))`; the RSU strips the mask
//! with `e(rP, RSK)`.

use ark_ec::CurveGroup;
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use super::keys::{PublicParams, RsuCredential};
use super::wire::{Reader, WireError};
use crate::pairing::{
    decode_g1, encode_g1, kdf, pair, random_nonzero_scalar, Gt, PairingCurve, G1, G2,
};

const MASK_LABEL: &[u8] = b"ibe-pseudonym-mask";

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum IbeError {
    #[error("unmasked bytes are not a valid pseudonym")]
    DecryptionFailed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IbeCiphertext<E: PairingCurve> {
    pub u: G1<E>,
    pub v: Vec<u8>,
}

fn mask<E: PairingCurve>(g: &Gt<E>) -> Vec<u8> {
    kdf::<E>(g, MASK_LABEL, E::profile().g1_len)
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn ibe_encrypt<E: PairingCurve, R: RngCore + CryptoRng + ?Sized>(
    pp: &PublicParams<E>,
    rid: &G2<E>,
    pid: &G1<E>,
    rng: &mut R,
) -> IbeCiphertext<E> {
    let r = random_nonzero_scalar::<E, _>(rng);
    let g = pair::<E>(pp.pk1(), rid);
    IbeCiphertext {
        u: (*pp.p() * r).into_affine(),
        v: xor(&encode_g1::<E>(pid), &mask::<E>(&(g * r))),
    }
}

pub fn ibe_decrypt<E: PairingCurve>(
    rsu: &RsuCredential<E>,
    c: &IbeCiphertext<E>,
) -> Result<G1<E>, IbeError> {
    if c.v.len() != E::profile().g1_len {
        return Err(IbeError::DecryptionFailed);
    }
    let g = pair::<E>(&c.u, rsu.rsk());
    decode_g1::<E>(&xor(&c.v, &mask::<E>(&g))).map_err(|_| IbeError::DecryptionFailed)
}

impl<E: PairingCurve> IbeCiphertext<E> {
    /// `U ‖ V`, both fixed at the compressed G1 length.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = encode_g1::<E>(&self.u);
        out.extend_from_slice(&self.v);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let len = E::profile().g1_len;
        let mut r = Reader::new(bytes);
        let u = decode_g1::<E>(r.take(len)?)?;
        let v = r.take(len)?.to_vec();
        r.finish()?;
        Ok(IbeCiphertext { u, v })
    }
}
