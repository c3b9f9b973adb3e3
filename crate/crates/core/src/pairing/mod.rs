//! Type-3 pairing engine.
//!
//! Everything curve-specific lives behind [`PairingCurve`]. The rest of the
//! crate is written against the aliases below and the free functions in this
//! module, so a new curve only needs a trait impl and a [`CurveProfile`].
//!
//! Every pairing evaluation goes through [`pair`] or [`pairing_product_is_identity`],
//! which bump a per-thread counter readable with [`pairing_count`].

mod codec;
mod hash;
mod profile;

use std::any::{Any, TypeId};
use std::cell::Cell;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::scalar_mul::BatchMulPreprocessing;
use ark_ec::short_weierstrass::{Affine, Projective, SWCurveConfig};
use ark_ec::AffineRepr;
use ark_ff::{Field, UniformRand, Zero};
use rand::{CryptoRng, RngCore};

pub use codec::{
    decode_g1, decode_g2, decode_gt, decode_scalar, encode_g1, encode_g2, encode_gt,
    encode_scalar, DecodeError,
};
pub use hash::{hash_to_g1, hash_to_g2, hash_to_scalar, kdf, Domain};
pub use profile::{
    profile_by_id, profiles, CurveProfile, BLS12_381, BN254, DEFAULT_PROFILE, MNT159_REFERENCE,
};

/// A type-3 pairing with short Weierstrass source groups.
pub trait PairingCurve:
    Pairing<
    G1Affine = Affine<Self::G1Config>,
    G1 = Projective<Self::G1Config>,
    G2Affine = Affine<Self::G2Config>,
    G2 = Projective<Self::G2Config>,
>
{
    type G1Config: SWCurveConfig<ScalarField = Self::ScalarField>;
    type G2Config: SWCurveConfig<ScalarField = Self::ScalarField>;

    fn profile() -> &'static CurveProfile;
}

impl PairingCurve for ark_bls12_381::Bls12_381 {
    type G1Config = ark_bls12_381::g1::Config;
    type G2Config = ark_bls12_381::g2::Config;

    fn profile() -> &'static CurveProfile {
        &BLS12_381
    }
}

impl PairingCurve for ark_bn254::Bn254 {
    type G1Config = ark_bn254::g1::Config;
    type G2Config = ark_bn254::g2::Config;

    fn profile() -> &'static CurveProfile {
        &BN254
    }
}

pub use ark_bls12_381::Bls12_381;
pub use ark_bn254::Bn254;

pub type Scalar<E> = <E as Pairing>::ScalarField;
pub type G1<E> = <E as Pairing>::G1Affine;
pub type G2<E> = <E as Pairing>::G2Affine;
pub type G1Projective<E> = <E as Pairing>::G1;
pub type G2Projective<E> = <E as Pairing>::G2;
pub type G2Prepared<E> = <E as Pairing>::G2Prepared;
pub type Gt<E> = PairingOutput<E>;

thread_local! {
    static PAIRINGS: Cell<u64> = const { Cell::new(0) };
}

/// Number of pairing evaluations performed on this thread so far.
pub fn pairing_count() -> u64 {
    PAIRINGS.with(Cell::get)
}

fn count_pairings(n: usize) {
    PAIRINGS.with(|c| c.set(c.get() + n as u64));
}

/// Runs `f` and returns its result with the number of pairings it evaluated.
pub fn count_pairings_in<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let before = pairing_count();
    let out = f();
    (out, pairing_count() - before)
}

pub fn pair<E: PairingCurve>(a: &G1<E>, b: &G2<E>) -> Gt<E> {
    count_pairings(1);
    E::pairing(*a, *b)
}

/// `e(a, b)` against a G2 argument whose line functions are precomputed.
pub fn pair_prepared<E: PairingCurve>(a: &G1<E>, b: &G2Prepared<E>) -> Gt<E> {
    count_pairings(1);
    E::multi_pairing([*a], [b.clone()])
}

/// Checks `prod_i e(a_i, b_i) == 1` with a shared final exponentiation.
/// Counts one pairing per input pair.
pub fn pairing_product_is_identity<E: PairingCurve>(
    a: impl IntoIterator<Item = G1<E>>,
    b: impl IntoIterator<Item = G2Prepared<E>>,
) -> bool {
    let a: Vec<_> = a.into_iter().collect();
    count_pairings(a.len());
    E::multi_pairing(a, b) == Gt::<E>::default()
}

/// Rejection-samples a scalar from `Z_q^*`.
pub fn random_nonzero_scalar<E: PairingCurve, R: RngCore + CryptoRng + ?Sized>(
    rng: &mut R,
) -> Scalar<E> {
    loop {
        let s = Scalar::<E>::rand(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

pub fn g1_generator<E: PairingCurve>() -> G1<E> {
    <E::G1Config as SWCurveConfig>::GENERATOR
}

pub fn g2_generator<E: PairingCurve>() -> G2<E> {
    <E::G2Config as SWCurveConfig>::GENERATOR
}

/// Uniformly random element of G1, drawn as `r·P`.
pub fn random_g1<E: PairingCurve, R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> G1<E> {
    (g1_generator::<E>() * random_nonzero_scalar::<E, _>(rng)).into()
}

type GeneratorTable<E> = BatchMulPreprocessing<G1Projective<E>>;

/// Fixed-base table for the G1 generator, built once per curve. Sized for
/// 4096 scalars, which gives 8-bit windows.
fn generator_table<E: PairingCurve>() -> Arc<GeneratorTable<E>> {
    type Registry = HashMap<TypeId, Arc<dyn Any + Send + Sync>>;
    static TABLES: OnceLock<Mutex<Registry>> = OnceLock::new();
    let mut tables = TABLES
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    tables
        .entry(TypeId::of::<E>())
        .or_insert_with(|| {
            Arc::new(GeneratorTable::<E>::new(g1_generator::<E>().into_group(), 4096))
        })
        .clone()
        .downcast::<GeneratorTable<E>>()
        .expect("registry is keyed by curve type")
}

/// `count` independent uniform elements of G1, drawn as `r_i·P` through the
/// fixed-base table.
pub fn random_g1_batch<E: PairingCurve, R: RngCore + CryptoRng + ?Sized>(
    count: usize,
    rng: &mut R,
) -> Vec<G1<E>> {
    if count == 0 {
        return Vec::new();
    }
    let scalars: Vec<_> = (0..count)
        .map(|_| random_nonzero_scalar::<E, _>(rng))
        .collect();
    generator_table::<E>().batch_mul(&scalars)
}

/// `g^{1/s}` in the target group.
pub fn gt_pow_inverse<E: PairingCurve>(g: &Gt<E>, s: &Scalar<E>) -> Option<Gt<E>> {
    s.inverse().map(|inv| *g * inv)
}
