//! Conditional privacy-preserving authentication for vehicular networks
//! built on identity-based ring signatures.
//!
//! * [`pairing`] wraps a type-3 pairing backend: hashing to groups, canonical
//!   encodings and an instrumented pairing counter.
//! * [`scheme`] holds the cryptographic algorithms: setup, identity key
//!   generation, pseudonym encryption, ring signing with a trace tag, single
//!   and batch verification, and tracing.
//! * [`channel`] is the Encrypt-then-MAC channel RSUs use to hand ring lists
//!   to vehicles.
//! * [`entities`] models the TRC, RSUs, vehicles and the LEA as state
//!   machines exchanging framed messages.

pub mod channel;
pub mod entities;
pub mod pairing;
pub mod scheme;
