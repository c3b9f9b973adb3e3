//! Hashing into the pairing groups and the scalar field.
//!
//! G1 and G2 use try-and-increment: a SHA-512 derived x-coordinate is lifted
//! to the curve when possible and the result is multiplied into the
//! prime-order subgroup. Each hash carries its own domain separation tag,
//! which also names the curve.

use ark_ec::short_weierstrass::{Affine, SWCurveConfig};
use ark_ec::AffineRepr;
use ark_ff::{Field, PrimeField, Zero};
use hkdf::Hkdf;
use sha2::{Digest, Sha256, Sha512};

use super::{encode_gt, Gt, PairingCurve, Scalar, G1, G2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// `H1: {0,1}* -> G1`
    G1,
    /// `H2: {0,1}* -> G2`
    G2,
    /// `H: {0,1}* -> Z_q^*`
    Scalar,
    /// Byte-string derivation from target group elements.
    Kdf,
}

impl Domain {
    pub fn tag(self, curve_id: &str) -> String {
        let name = match self {
            Domain::G1 => "H1-G1-TAI",
            Domain::G2 => "H2-G2-TAI",
            Domain::Scalar => "H-SCALAR",
            Domain::Kdf => "KDF-HKDF-SHA256",
        };
        format!("IBRS-V1-{}-{}", curve_id.to_ascii_uppercase(), name)
    }
}

fn tagged_sha512(dst: &str, counter: u32, extra: u8, data: &[u8]) -> [u8; 64] {
    let mut h = Sha512::new();
    h.update((dst.len() as u8).to_be_bytes());
    h.update(dst.as_bytes());
    h.update(counter.to_be_bytes());
    h.update([extra]);
    h.update(data);
    h.finalize().into()
}

fn hash_to_base_field<F: Field>(dst: &str, counter: u32, data: &[u8]) -> F {
    let degree = F::extension_degree() as usize;
    let coords = (0..degree).map(|i| {
        let digest = tagged_sha512(dst, counter, i as u8, data);
        F::BasePrimeField::from_be_bytes_mod_order(&digest)
    });
    F::from_base_prime_field_elems(coords).expect("coordinate count equals extension degree")
}

fn try_and_increment<P: SWCurveConfig>(dst: &str, data: &[u8]) -> Affine<P> {
    for counter in 0u32.. {
        let x = hash_to_base_field::<P::BaseField>(dst, counter, data);
        let greatest = tagged_sha512(dst, counter, 0xff, data)[0] & 1 == 1;
        if let Some(point) = Affine::<P>::get_point_from_x_unchecked(x, greatest) {
            let point = point.clear_cofactor();
            if !point.is_zero() {
                return point;
            }
        }
    }
    unreachable!("half of all x-coordinates lie on the curve")
}

pub fn hash_to_g1<E: PairingCurve>(data: &[u8]) -> G1<E> {
    try_and_increment::<E::G1Config>(&Domain::G1.tag(E::profile().id), data)
}

pub fn hash_to_g2<E: PairingCurve>(data: &[u8]) -> G2<E> {
    try_and_increment::<E::G2Config>(&Domain::G2.tag(E::profile().id), data)
}

/// Hashes into `Z_q^*`, re-deriving with the next counter on a zero output.
pub fn hash_to_scalar<E: PairingCurve>(data: &[u8]) -> Scalar<E> {
    let dst = Domain::Scalar.tag(E::profile().id);
    for counter in 0u32.. {
        let s = Scalar::<E>::from_be_bytes_mod_order(&tagged_sha512(&dst, counter, 0, data));
        if !s.is_zero() {
            return s;
        }
    }
    unreachable!()
}

/// Derives `out_len` bytes from a target group element. `label` separates
/// independent uses of the same element.
pub fn kdf<E: PairingCurve>(g: &Gt<E>, label: &[u8], out_len: usize) -> Vec<u8> {
    let salt = Sha256::digest(Domain::Kdf.tag(E::profile().id).as_bytes());
    let hk = Hkdf::<Sha256>::new(Some(&salt), &encode_gt::<E>(g));
    let mut out = vec![0u8; out_len];
    hk.expand(label, &mut out)
        .expect("kdf output length within HKDF-SHA256 limit");
    out
}
