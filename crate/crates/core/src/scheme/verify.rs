//! Single and batch verification.
//!
//! Both paths reduce to one two-pairing product check:
//! `e(X, PK2) · e(-Y, Q) == 1`. Single verification uses
//! `X = Σ (U_i + h_i PID_i)`, `Y = V`. Batch verification weights envelope `i`
//! by a random `δ_i ∈ [1, 2^λ)` before summing, so a set of invalid
//! signatures cannot cancel each other out.

use ark_ec::{CurveGroup, VariableBaseMSM};
use rand::{CryptoRng, Rng, RngCore};
use thiserror::Error;

use super::keys::PublicParams;
use super::ring::{challenge, challenge_prefix, BroadcastEnvelope};
use super::wire::WireError;
use crate::pairing::{pairing_product_is_identity, G1Projective, PairingCurve, Scalar, G1};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum StructuralError {
    #[error("signature has {signature} U-values for a ring of {ring}")]
    LengthMismatch { signature: usize, ring: usize },
    #[error("undecodable envelope: {0}")]
    Wire(#[from] WireError),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("structurally invalid: {0}")]
    Structural(#[from] StructuralError),
    #[error("verification equation does not hold")]
    EquationFailed,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum BatchError {
    #[error("empty batch")]
    Empty,
    #[error("envelope {index} is structurally invalid: {error}")]
    Structural {
        index: usize,
        error: StructuralError,
    },
    #[error("batch verification equation does not hold")]
    EquationFailed,
}

/// Batch verification settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BatchConfig {
    /// Bit length of the random multipliers; soundness error `2^-λ`.
    pub lambda: u32,
    /// `false` sums signatures unweighted. That variant accepts batches in
    /// which invalid signatures cancel and exists only for cost comparison.
    pub small_exponents: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            lambda: 64,
            small_exponents: true,
        }
    }
}

impl BatchConfig {
    pub fn unweighted() -> Self {
        BatchConfig {
            lambda: 0,
            small_exponents: false,
        }
    }
}

fn check_structure<E: PairingCurve>(env: &BroadcastEnvelope<E>) -> Result<(), StructuralError> {
    if env.signature.u.len() != env.ring.len() {
        return Err(StructuralError::LengthMismatch {
            signature: env.signature.u.len(),
            ring: env.ring.len(),
        });
    }
    Ok(())
}

/// Appends the bases and scalars of `weight · Σ (U_i + h_i PID_i)`.
fn push_terms<E: PairingCurve>(
    env: &BroadcastEnvelope<E>,
    weight: Scalar<E>,
    bases: &mut Vec<G1<E>>,
    scalars: &mut Vec<Scalar<E>>,
) {
    let prefix = challenge_prefix(&env.message, &env.tag, env.timestamp, &env.ring);
    for (u, pid) in env.signature.u.iter().zip(env.ring.members()) {
        let h = challenge::<E>(&prefix, u);
        bases.push(*u);
        scalars.push(weight);
        bases.push(*pid);
        scalars.push(weight * h);
    }
}

fn msm<E: PairingCurve>(bases: &[G1<E>], scalars: &[Scalar<E>]) -> G1<E> {
    G1Projective::<E>::msm_unchecked(bases, scalars).into_affine()
}

fn final_check<E: PairingCurve>(pp: &PublicParams<E>, lhs: G1<E>, rhs: G1<E>) -> bool {
    pairing_product_is_identity::<E>(
        [lhs, -rhs],
        [pp.pk2_prepared().clone(), pp.q_prepared().clone()],
    )
}

/// `e(Σ (U_i + h_i PID_i), PK2) == e(V, Q)`, two pairings for any ring size.
pub fn verify_single<E: PairingCurve>(
    pp: &PublicParams<E>,
    env: &BroadcastEnvelope<E>,
) -> Result<(), VerifyError> {
    check_structure(env)?;
    // With unit weight the U_i are plain additions; only the h_i·PID_i
    // terms need a multi-scalar product.
    let prefix = challenge_prefix(&env.message, &env.tag, env.timestamp, &env.ring);
    let hashes: Vec<Scalar<E>> = env
        .signature
        .u
        .iter()
        .map(|u| challenge::<E>(&prefix, u))
        .collect();
    let u_sum: G1Projective<E> = env.signature.u.iter().sum();
    let lhs = u_sum + G1Projective::<E>::msm_unchecked(env.ring.members(), &hashes);
    if final_check(pp, lhs.into_affine(), env.signature.v) {
        Ok(())
    } else {
        Err(VerifyError::EquationFailed)
    }
}

/// Decodes and verifies a wire-format envelope.
pub fn verify_encoded<E: PairingCurve>(pp: &PublicParams<E>, bytes: &[u8]) -> Result<(), VerifyError> {
    let env = BroadcastEnvelope::<E>::from_bytes(bytes).map_err(StructuralError::from)?;
    verify_single(pp, &env)
}

fn sample_multiplier<E: PairingCurve, R: RngCore + ?Sized>(rng: &mut R, lambda: u32) -> Scalar<E> {
    assert!((1..=128).contains(&lambda), "lambda must be in 1..=128");
    let mask = if lambda == 128 {
        u128::MAX
    } else {
        (1u128 << lambda) - 1
    };
    loop {
        let d = rng.gen::<u128>() & mask;
        if d != 0 {
            return Scalar::<E>::from(d);
        }
    }
}

/// Small-exponent batch verification, two pairings for any batch size.
///
/// Structural errors name the offending envelope; an equation failure only
/// says that at least one envelope is invalid.
pub fn verify_batch<E: PairingCurve, R: RngCore + CryptoRng + ?Sized>(
    pp: &PublicParams<E>,
    envs: &[BroadcastEnvelope<E>],
    config: BatchConfig,
    rng: &mut R,
) -> Result<(), BatchError> {
    if envs.is_empty() {
        return Err(BatchError::Empty);
    }
    for (index, env) in envs.iter().enumerate() {
        check_structure(env).map_err(|error| BatchError::Structural { index, error })?;
    }
    let total: usize = envs.iter().map(|e| e.ring.len()).sum();
    let mut bases = Vec::with_capacity(2 * total);
    let mut scalars = Vec::with_capacity(2 * total);
    let mut v_bases = Vec::with_capacity(envs.len());
    let mut v_scalars = Vec::with_capacity(envs.len());
    for env in envs {
        let delta = if config.small_exponents {
            sample_multiplier::<E, _>(rng, config.lambda)
        } else {
            Scalar::<E>::from(1u64)
        };
        push_terms(env, delta, &mut bases, &mut scalars);
        v_bases.push(env.signature.v);
        v_scalars.push(delta);
    }
    let lhs = msm::<E>(&bases, &scalars);
    let rhs = msm::<E>(&v_bases, &v_scalars);
    if final_check(pp, lhs, rhs) {
        Ok(())
    } else {
        Err(BatchError::EquationFailed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{count_pairings_in, random_g1, Bls12_381};
    use crate::scheme::{keygen_vehicle, setup, sign_envelope, SignerRing, VehicleCredential};
    use ark_ec::AffineRepr;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    type E = Bls12_381;

    struct Fixture {
        pp: PublicParams<E>,
        creds: Vec<VehicleCredential<E>>,
        rng: ChaCha20Rng,
    }

    fn fixture(seed: u64, vehicles: usize) -> Fixture {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (pp, master, _) = setup::<E, _>(&mut rng);
        let creds = (0..vehicles)
            .map(|i| keygen_vehicle(&master, &format!("veh-{i}")).unwrap())
            .collect();
        Fixture { pp, creds, rng }
    }

    impl Fixture {
        fn envelope(&mut self, n: usize, msg: &[u8]) -> BroadcastEnvelope<E> {
            let mut idx: Vec<usize> = (0..self.creds.len()).collect();
            idx.shuffle(&mut self.rng);
            let ring = SignerRing::new(idx[..n].iter().map(|&i| *self.creds[i].pid()).collect()).unwrap();
            let signer = idx[self.rng.gen_range(0..n)];
            sign_envelope(&self.pp, &self.creds[signer], ring, msg, 1_000, &mut self.rng).unwrap()
        }
    }

    #[test]
    fn honest_envelopes_verify_for_all_sizes() {
        let mut f = fixture(1, 12);
        for n in 2..=10 {
            let env = f.envelope(n, b"brake warning");
            assert_eq!(verify_single(&f.pp, &env), Ok(()));
            assert_eq!(verify_encoded(&f.pp, &env.to_bytes()), Ok(()));
        }
    }

    #[test]
    fn every_signer_position_verifies() {
        let mut f = fixture(2, 5);
        let ring = SignerRing::new(f.creds.iter().map(|c| *c.pid()).collect()).unwrap();
        for c in &f.creds {
            let env = sign_envelope(&f.pp, c, ring.clone(), b"same", 9, &mut f.rng).unwrap();
            assert_eq!(verify_single(&f.pp, &env), Ok(()));
            assert_eq!(env.signature.u.len(), ring.len());
        }
    }

    #[test]
    fn message_bit_flip_rejected() {
        let mut f = fixture(3, 4);
        let mut env = f.envelope(3, b"icy road");
        env.message[0] ^= 1;
        assert_eq!(verify_single(&f.pp, &env), Err(VerifyError::EquationFailed));
    }

    #[test]
    fn wrong_private_key_rejected() {
        let mut f = fixture(4, 4);
        let (a, b) = (&f.creds[0], &f.creds[1]);
        let forged = VehicleCredential::<E>::with_key(a.vid(), *a.pid(), *b.psk());
        let ring = SignerRing::new(vec![*a.pid(), *b.pid()]).unwrap();
        let env = sign_envelope(&f.pp, &forged, ring, b"m", 3, &mut f.rng).unwrap();
        assert_eq!(verify_single(&f.pp, &env), Err(VerifyError::EquationFailed));
    }

    #[test]
    fn random_u_replacement_never_accepted() {
        let mut f = fixture(5, 6);
        let base = f.envelope(3, b"m");
        for trial in 0..1000 {
            let mut env = base.clone();
            let i = trial % env.signature.u.len();
            env.signature.u[i] = random_g1::<E, _>(&mut f.rng);
            assert!(verify_single(&f.pp, &env).is_err());
        }
    }

    #[test]
    fn length_mismatch_is_structural() {
        let mut f = fixture(6, 4);
        let mut env = f.envelope(3, b"m");
        env.signature.u.pop();
        assert_eq!(
            verify_single(&f.pp, &env),
            Err(VerifyError::Structural(StructuralError::LengthMismatch {
                signature: 2,
                ring: 3
            }))
        );
    }

    #[test]
    fn undecodable_bytes_are_structural() {
        let mut f = fixture(7, 4);
        let mut bytes = f.envelope(2, b"m").to_bytes();
        bytes.truncate(bytes.len() - 1);
        assert!(matches!(
            verify_encoded(&f.pp, &bytes),
            Err(VerifyError::Structural(StructuralError::Wire(_)))
        ));
    }

    #[test]
    fn two_pairings_regardless_of_size() {
        let mut f = fixture(8, 16);
        for n in [2, 8, 16] {
            let env = f.envelope(n, b"m");
            let (res, count) = count_pairings_in(|| verify_single(&f.pp, &env));
            assert!(res.is_ok());
            assert_eq!(count, 2);
        }
        let envs: Vec<_> = (0..20).map(|_| f.envelope(4, b"batch")).collect();
        let (res, count) = count_pairings_in(|| {
            verify_batch(&f.pp, &envs, BatchConfig::default(), &mut f.rng)
        });
        assert!(res.is_ok());
        assert_eq!(count, 2);
    }

    #[test]
    fn batch_accepts_honest_and_rejects_corrupted() {
        let mut f = fixture(9, 8);
        let mut envs: Vec<_> = (0..10).map(|i| f.envelope(2 + i % 3, &[i as u8])).collect();
        assert_eq!(verify_batch(&f.pp, &envs, BatchConfig::default(), &mut f.rng), Ok(()));
        assert_eq!(verify_batch(&f.pp, &envs[..1], BatchConfig::default(), &mut f.rng), Ok(()));
        envs[4].message.push(0);
        assert_eq!(
            verify_batch(&f.pp, &envs, BatchConfig::default(), &mut f.rng),
            Err(BatchError::EquationFailed)
        );
    }

    #[test]
    fn batch_structural_error_names_index() {
        let mut f = fixture(10, 6);
        let mut envs: Vec<_> = (0..4).map(|_| f.envelope(2, b"m")).collect();
        envs[2].signature.u.push(random_g1::<E, _>(&mut f.rng));
        assert!(matches!(
            verify_batch(&f.pp, &envs, BatchConfig::default(), &mut f.rng),
            Err(BatchError::Structural { index: 2, .. })
        ));
        assert_eq!(
            verify_batch::<E, _>(&f.pp, &[], BatchConfig::default(), &mut f.rng),
            Err(BatchError::Empty)
        );
    }

    /// Shifting `V` by `+X` in one envelope and `-X` in another passes an
    /// unweighted sum but not the weighted batch.
    #[test]
    fn cancellation_forgery_needs_weights() {
        let mut f = fixture(11, 6);
        let mut envs: Vec<_> = (0..3).map(|_| f.envelope(2, b"m")).collect();
        let x = random_g1::<E, _>(&mut f.rng);
        envs[0].signature.v = (envs[0].signature.v + x).into_affine();
        envs[1].signature.v = (envs[1].signature.v.into_group() - x).into_affine();
        assert!(verify_single(&f.pp, &envs[0]).is_err());
        assert!(verify_single(&f.pp, &envs[1]).is_err());
        assert_eq!(verify_batch(&f.pp, &envs, BatchConfig::unweighted(), &mut f.rng), Ok(()));
        assert_eq!(
            verify_batch(&f.pp, &envs, BatchConfig::default(), &mut f.rng),
            Err(BatchError::EquationFailed)
        );
    }

    #[test]
    fn multipliers_respect_lambda() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        for lambda in [1u32, 8, 64, 128] {
            for _ in 0..200 {
                let d = sample_multiplier::<E, _>(&mut rng, lambda);
                assert!(d != Scalar::<E>::from(0u64));
                if lambda < 128 {
                    let bound = Scalar::<E>::from(1u128 << lambda);
                    use ark_ff::PrimeField;
                    assert!(d.into_bigint() < bound.into_bigint());
                }
            }
        }
    }
}
