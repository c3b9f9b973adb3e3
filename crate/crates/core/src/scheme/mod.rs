//! The identity-based ring signature scheme: setup, key extraction,
//! pseudonym encryption, signing, verification and tracing.

mod ibe;
mod keys;
mod ring;
mod trace;
mod verify;
pub mod wire;

pub use ibe::{ibe_decrypt, ibe_encrypt, IbeCiphertext, IbeError};
pub use keys::{
    derive_shared_key_rsu, derive_shared_key_vehicle, keygen_rsu, keygen_vehicle, pseudonym_of,
    rsu_public_key_of, setup, KeyError, MasterSecret, PublicParams, RsuCredential, TraceSecret,
    VehicleCredential,
};
pub use ring::{
    envelope_len, make_tag, ring_sign, sign_envelope, signature_len, BroadcastEnvelope,
    RingError, RingSignature, SignerRing, TraceTag, MAX_RING_SIZE, MIN_RING_SIZE,
};
pub use trace::{
    match_candidates, trace_candidates, trace_match, trace_open, IdentityRegistry, TraceError,
};
pub use verify::{
    verify_batch, verify_encoded, verify_single, BatchConfig, BatchError, StructuralError,
    VerifyError,
};
pub use wire::WireError;
