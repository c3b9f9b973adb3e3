use ibrs::pairing::{encode_g1, encode_gt, CurveProfile, PairingCurve};
use ibrs::scheme::{envelope_len, signature_len};
use serde::Serialize;

use crate::suite::Workload;

/// Serialized byte counts for one ring size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SizeRow {
    pub ring_size: usize,
    pub message_len: usize,
    pub pseudonym: usize,
    /// Group elements in the signature: one `U_i` per slot plus `V`.
    pub signature_elements: usize,
    /// Signature bytes without the count prefix.
    pub signature_body: usize,
    pub signature: usize,
    pub ring: usize,
    pub tag: usize,
    pub envelope: usize,
}

const COUNT_PREFIX: usize = 2;

/// Byte counts implied by a profile's element lengths.
pub fn sizes_from_profile(p: &CurveProfile, ring_size: usize, message_len: usize) -> SizeRow {
    let n = ring_size;
    SizeRow {
        ring_size: n,
        message_len,
        pseudonym: p.g1_len,
        signature_elements: n + 1,
        signature_body: (n + 1) * p.g1_len,
        signature: signature_len(p.g1_len, n),
        ring: COUNT_PREFIX + n * p.g1_len,
        tag: p.gt_len,
        envelope: envelope_len(p.g1_len, p.gt_len, message_len, n),
    }
}

/// Byte counts read off a freshly signed envelope.
pub fn measured_sizes<E: PairingCurve>(seed: u64, ring_size: usize, message_len: usize) -> SizeRow {
    let mut w = Workload::<E>::new(seed, ring_size);
    let env = w.envelope(ring_size, message_len);
    let signature = env.signature.to_bytes();
    let mut ring = Vec::new();
    env.ring.encode_into(&mut ring);
    let elements = env.signature.u.len() + 1;
    SizeRow {
        ring_size,
        message_len,
        pseudonym: encode_g1::<E>(&env.ring.members()[0]).len(),
        signature_elements: elements,
        signature_body: signature.len() - COUNT_PREFIX,
        signature: signature.len(),
        ring: ring.len(),
        tag: encode_gt::<E>(&env.tag.0).len(),
        envelope: env.to_bytes().len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ibrs::pairing::{Bls12_381, Bn254, BLS12_381, BN254, MNT159_REFERENCE};

    #[test]
    fn reference_curve_gives_thirty_and_ninety() {
        let row = sizes_from_profile(&MNT159_REFERENCE, 2, 0);
        assert_eq!((row.pseudonym, row.signature_body), (30, 90));
        assert_eq!(row.signature, 92);
    }

    #[test]
    fn formula_matches_real_encodings() {
        for n in [2, 3, 7] {
            assert_eq!(measured_sizes::<Bls12_381>(1, n, 17), sizes_from_profile(&BLS12_381, n, 17));
            assert_eq!(measured_sizes::<Bn254>(1, n, 0), sizes_from_profile(&BN254, n, 0));
        }
    }

    #[test]
    fn envelope_is_the_sum_of_its_parts() {
        let r = sizes_from_profile(&BLS12_381, 5, 100);
        // u32 message length, message, ring, signature, u64 timestamp, tag.
        assert_eq!(r.envelope, 4 + 100 + r.ring + r.signature + 8 + r.tag);
    }
}
