//! Authenticated delivery of pseudonym lists from an RSU to a vehicle.
//!
//! Both ends derive the same 32-byte key from a pairing. Lists are encrypted
//! with AES-256-CTR and authenticated with HMAC-SHA256 (encrypt-then-MAC,
//! independent subkeys via HKDF). The tag covers the header, the ciphertext
//! and the expiry time, and is checked before any decryption.

use std::cell::Cell;
use std::fmt;

use aes::cipher::{KeyIvInit, StreamCipher};
use hkdf::Hkdf;
use hmac::{Hmac, Mac};
use rand::{CryptoRng, RngCore};
use sha2::Sha256;
use subtle::ConstantTimeEq;
use thiserror::Error;

use crate::pairing::{decode_g1, encode_g1, kdf, Gt, PairingCurve, G1};
use crate::scheme::wire::{put_bytes_u16, put_bytes_u32, Reader, WireError};

type Aes256Ctr = ctr::Ctr128BE<aes::Aes256>;
type HmacSha256 = Hmac<Sha256>;

pub const CHANNEL_VERSION: u8 = 1;
pub const ENC_AES256_CTR: u8 = 1;
pub const MAC_HMAC_SHA256: u8 = 1;
pub const NONCE_LEN: usize = 16;
pub const TAG_LEN: usize = 32;
const HEADER_LEN: usize = 3 + NONCE_LEN;
/// Lists longer than this are refused on decode.
pub const MAX_LIST_LEN: usize = 1 << 16;

const SHARED_KEY_LABEL: &[u8] = b"shared-key";
const ENC_INFO: &[u8] = b"ring-list-enc";
const MAC_INFO: &[u8] = b"ring-list-mac";

thread_local! {
    static DECRYPT_ATTEMPTS: Cell<u64> = const { Cell::new(0) };
}

/// Number of list decryptions started on this thread.
pub fn decrypt_attempts() -> u64 {
    DECRYPT_ATTEMPTS.with(Cell::get)
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ChannelError {
    #[error("authentication tag mismatch")]
    MacFailure,
    #[error("decrypted list is malformed")]
    DecryptFailure,
    #[error("sealed list is malformed: {0}")]
    Malformed(#[from] WireError),
    #[error("unsupported channel version or algorithm ({version}, {enc}, {mac})")]
    UnsupportedAlgorithm { version: u8, enc: u8, mac: u8 },
}

/// A key shared by one vehicle and one RSU. The bytes never leave this type.
#[derive(Clone)]
pub struct SymmetricKey([u8; 32]);

impl SymmetricKey {
    pub fn from_shared_secret<E: PairingCurve>(g: &Gt<E>) -> Self {
        let bytes = kdf::<E>(g, SHARED_KEY_LABEL, 32);
        SymmetricKey(bytes.try_into().expect("kdf returns requested length"))
    }

    #[cfg(test)]
    pub(crate) fn from_bytes(bytes: [u8; 32]) -> Self {
        SymmetricKey(bytes)
    }

    fn subkeys(&self) -> ([u8; 32], [u8; 32]) {
        let hk = Hkdf::<Sha256>::from_prk(&self.0).expect("32-byte PRK");
        let mut enc = [0u8; 32];
        let mut mac = [0u8; 32];
        hk.expand(ENC_INFO, &mut enc).expect("valid length");
        hk.expand(MAC_INFO, &mut mac).expect("valid length");
        (enc, mac)
    }
}

impl PartialEq for SymmetricKey {
    fn eq(&self, other: &Self) -> bool {
        self.0.ct_eq(&other.0).into()
    }
}

impl Eq for SymmetricKey {}

impl fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymmetricKey(..)")
    }
}

/// A pseudonym list and the time after which it must not be used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingList<E: PairingCurve> {
    pub pids: Vec<G1<E>>,
    pub expires_at: u64,
}

impl<E: PairingCurve> RingList<E> {
    fn plaintext(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.pids.len() * E::profile().g1_len);
        out.extend_from_slice(&(self.pids.len() as u32).to_be_bytes());
        for pid in &self.pids {
            out.extend(encode_g1::<E>(pid));
        }
        out.extend_from_slice(&self.expires_at.to_be_bytes());
        out
    }

    fn from_plaintext(bytes: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(bytes);
        let n = r.u32()? as usize;
        if n > MAX_LIST_LEN {
            return Err(WireError::TooLarge(n));
        }
        let len = E::profile().g1_len;
        let pids = (0..n)
            .map(|_| Ok(decode_g1::<E>(r.take(len)?)?))
            .collect::<Result<Vec<_>, WireError>>()?;
        let expires_at = r.u64()?;
        r.finish()?;
        Ok(RingList { pids, expires_at })
    }
}

/// `(header, C*, Σ, t_d)` on the wire.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SealedRingList {
    pub version: u8,
    pub enc_alg: u8,
    pub mac_alg: u8,
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
    pub tag: Vec<u8>,
    pub expires_at: u64,
}

impl SealedRingList {
    fn header(&self) -> Vec<u8> {
        let mut h = Vec::with_capacity(HEADER_LEN);
        h.extend_from_slice(&[self.version, self.enc_alg, self.mac_alg]);
        h.extend_from_slice(&self.nonce);
        h
    }

    fn mac_input(&self) -> Vec<u8> {
        let mut m = self.header();
        put_bytes_u32(&mut m, &self.ciphertext);
        m.extend_from_slice(&self.expires_at.to_be_bytes());
        m
    }

    /// `u16 hlen ‖ header ‖ u32 clen ‖ C* ‖ u16 tlen ‖ Σ ‖ u64 t_d`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_bytes_u16(&mut out, &self.header());
        put_bytes_u32(&mut out, &self.ciphertext);
        put_bytes_u16(&mut out, &self.tag);
        out.extend_from_slice(&self.expires_at.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(bytes);
        let header = r.bytes_u16()?;
        if header.len() != HEADER_LEN {
            return Err(WireError::Malformed("channel header length"));
        }
        let ciphertext = r.bytes_u32(MAX_LIST_LEN * 128 + 12)?.to_vec();
        let tag = r.bytes_u16()?.to_vec();
        let expires_at = r.u64()?;
        r.finish()?;
        Ok(SealedRingList {
            version: header[0],
            enc_alg: header[1],
            mac_alg: header[2],
            nonce: header[3..].try_into().unwrap(),
            ciphertext,
            tag,
            expires_at,
        })
    }
}

fn mac_of(key: &[u8; 32], data: &[u8]) -> HmacSha256 {
    let mut mac = HmacSha256::new_from_slice(key).expect("any key length");
    mac.update(data);
    mac
}

pub fn seal_ring_list<E: PairingCurve, R: RngCore + CryptoRng + ?Sized>(
    key: &SymmetricKey,
    list: &RingList<E>,
    rng: &mut R,
) -> SealedRingList {
    let (enc_key, mac_key) = key.subkeys();
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let mut ciphertext = list.plaintext();
    Aes256Ctr::new(&enc_key.into(), &nonce.into()).apply_keystream(&mut ciphertext);
    let mut sealed = SealedRingList {
        version: CHANNEL_VERSION,
        enc_alg: ENC_AES256_CTR,
        mac_alg: MAC_HMAC_SHA256,
        nonce,
        ciphertext,
        tag: Vec::new(),
        expires_at: list.expires_at,
    };
    sealed.tag = mac_of(&mac_key, &sealed.mac_input())
        .finalize()
        .into_bytes()
        .to_vec();
    sealed
}

/// Checks the tag, then decrypts. Expiry is left to the caller, who knows the
/// current time.
pub fn open_ring_list<E: PairingCurve>(
    key: &SymmetricKey,
    sealed: &SealedRingList,
) -> Result<RingList<E>, ChannelError> {
    if (sealed.version, sealed.enc_alg, sealed.mac_alg)
        != (CHANNEL_VERSION, ENC_AES256_CTR, MAC_HMAC_SHA256)
    {
        return Err(ChannelError::UnsupportedAlgorithm {
            version: sealed.version,
            enc: sealed.enc_alg,
            mac: sealed.mac_alg,
        });
    }
    let (enc_key, mac_key) = key.subkeys();
    mac_of(&mac_key, &sealed.mac_input())
        .verify_slice(&sealed.tag)
        .map_err(|_| ChannelError::MacFailure)?;
    DECRYPT_ATTEMPTS.with(|c| c.set(c.get() + 1));
    let mut plain = sealed.ciphertext.clone();
    Aes256Ctr::new(&enc_key.into(), &sealed.nonce.into()).apply_keystream(&mut plain);
    let list = RingList::<E>::from_plaintext(&plain).map_err(|_| ChannelError::DecryptFailure)?;
    if list.expires_at != sealed.expires_at {
        return Err(ChannelError::DecryptFailure);
    }
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{random_g1, Bls12_381};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    type E = Bls12_381;

    fn list(rng: &mut ChaCha20Rng, n: usize) -> RingList<E> {
        RingList {
            pids: (0..n).map(|_| random_g1::<E, _>(rng)).collect(),
            expires_at: 1_000_000,
        }
    }

    #[test]
    fn seal_open_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let key = SymmetricKey::from_bytes([7; 32]);
        for n in [0, 1, 5, 40] {
            let l = list(&mut rng, n);
            let sealed = seal_ring_list(&key, &l, &mut rng);
            let wire = SealedRingList::from_bytes(&sealed.to_bytes()).unwrap();
            assert_eq!(wire, sealed);
            assert_eq!(open_ring_list::<E>(&key, &wire).unwrap(), l);
        }
    }

    #[test]
    fn nonces_are_fresh() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let key = SymmetricKey::from_bytes([1; 32]);
        let l = list(&mut rng, 3);
        let a = seal_ring_list(&key, &l, &mut rng);
        let b = seal_ring_list(&key, &l, &mut rng);
        assert_ne!(a.nonce, b.nonce);
        assert_ne!(a.ciphertext, b.ciphertext);
    }

    #[test]
    fn wrong_key_is_mac_failure_without_decrypting() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let sealed = seal_ring_list(&SymmetricKey::from_bytes([1; 32]), &list(&mut rng, 4), &mut rng);
        let before = decrypt_attempts();
        assert_eq!(
            open_ring_list::<E>(&SymmetricKey::from_bytes([2; 32]), &sealed),
            Err(ChannelError::MacFailure)
        );
        assert_eq!(decrypt_attempts(), before);
    }

    #[test]
    fn expiry_and_header_are_authenticated() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let key = SymmetricKey::from_bytes([9; 32]);
        let sealed = seal_ring_list(&key, &list(&mut rng, 2), &mut rng);
        let mut later = sealed.clone();
        later.expires_at += 1;
        assert_eq!(open_ring_list::<E>(&key, &later), Err(ChannelError::MacFailure));
        let mut renonced = sealed.clone();
        renonced.nonce[0] ^= 1;
        assert_eq!(open_ring_list::<E>(&key, &renonced), Err(ChannelError::MacFailure));
        let mut alg = sealed;
        alg.enc_alg = 2;
        assert!(matches!(
            open_ring_list::<E>(&key, &alg),
            Err(ChannelError::UnsupportedAlgorithm { .. })
        ));
    }

    #[test]
    fn key_debug_is_redacted() {
        assert_eq!(format!("{:?}", SymmetricKey::from_bytes([0xab; 32])), "SymmetricKey(..)");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Any single bit flip in the encoded list is rejected before decryption.
        #[test]
        fn bit_flips_never_decrypt(seed in any::<u64>(), bit in any::<prop::sample::Index>()) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let key = SymmetricKey::from_bytes([5; 32]);
            let bytes = seal_ring_list(&key, &list(&mut rng, 3), &mut rng).to_bytes();
            let i = bit.index(bytes.len() * 8);
            let mut t = bytes.clone();
            t[i / 8] ^= 1 << (i % 8);
            let before = decrypt_attempts();
            if let Ok(s) = SealedRingList::from_bytes(&t) {
                prop_assert!(open_ring_list::<E>(&key, &s).is_err());
            }
            prop_assert_eq!(decrypt_attempts(), before);
        }
    }
}
