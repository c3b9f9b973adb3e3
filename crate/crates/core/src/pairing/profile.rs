use std::fmt;

/// Byte lengths and nominal security of one pairing-friendly curve.
///
/// The registry holds every profile the crate knows about. Profiles marked
/// `runnable` have a backing arithmetic implementation; the rest are size
/// references only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurveProfile {
    pub id: &'static str,
    /// Compressed G1 encoding.
    pub g1_len: usize,
    /// Compressed G2 encoding.
    pub g2_len: usize,
    pub gt_len: usize,
    pub scalar_len: usize,
    pub security_bits: u32,
    pub runnable: bool,
}

pub const BLS12_381: CurveProfile = CurveProfile {
    id: "bls12-381",
    g1_len: 48,
    g2_len: 96,
    gt_len: 576,
    scalar_len: 32,
    security_bits: 117,
    runnable: true,
};

pub const BN254: CurveProfile = CurveProfile {
    id: "bn254",
    g1_len: 32,
    g2_len: 64,
    gt_len: 384,
    scalar_len: 32,
    security_bits: 100,
    runnable: true,
};

/// MNT159 as measured by the original evaluation: 30-byte serialized
/// pseudonyms, G2/Gt sized from their 477/945-bit representations.
/// Not runnable; used for communication-cost comparisons.
pub const MNT159_REFERENCE: CurveProfile = CurveProfile {
    id: "mnt159-ref",
    g1_len: 30,
    g2_len: 60,
    gt_len: 119,
    scalar_len: 20,
    security_bits: 70,
    runnable: false,
};

static REGISTRY: [CurveProfile; 3] = [BLS12_381, BN254, MNT159_REFERENCE];

/// The default runnable profile.
pub const DEFAULT_PROFILE: &CurveProfile = &BLS12_381;

pub fn profiles() -> &'static [CurveProfile] {
    &REGISTRY
}

pub fn profile_by_id(id: &str) -> Option<&'static CurveProfile> {
    REGISTRY.iter().find(|p| p.id.eq_ignore_ascii_case(id))
}

impl fmt::Display for CurveProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id)
    }
}
