//! Protocol participants as state machines.
//!
//! * [`Trc`] registers vehicles and RSUs, keeps the revocation list and
//!   answers trace requests.
//! * [`Rsu`] beacons its public key, decrypts ring requests and hands out
//!   sealed ring lists to non-revoked vehicles.
//! * [`Vehicle`] acquires ring lists, signs broadcasts and screens incoming
//!   envelopes for freshness and replays before verifying them.
//! * [`Lea`] opens trace tags together with the TRC.
//!
//! Entities never share state; they exchange [`Frame`]s. All times are
//! whole seconds.

mod frame;
mod lea;
mod rsu;
mod trc;
mod vehicle;

pub use frame::{Frame, FrameType, TraceRequest, TraceResponse, MAX_FRAME_LEN};
pub use lea::{lea_trace, Lea, LeaError};
pub use rsu::{Rsu, RsuConfig, RsuError};
pub use trc::{Prl, RegistryError, Trc};
pub use vehicle::{BatchReceipt, Rejection, Vehicle, VehicleConfig, VehicleError};
