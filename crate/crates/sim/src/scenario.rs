//! Scenario files.
//!
//! ```toml
//! seed = 7
//!
//! [topology]
//! rsus = 1
//! vehicles = 4
//! curve = "bls12-381"
//!
//! [params]
//! latency_ms = 20
//!
//! [[events]]
//! at_ms = 0
//! kind = "enter"
//! vehicle = 0
//! rsu = 0
//! ```
//!
//! Vehicles and RSUs are referred to by index and named `veh-<i>` and
//! `rsu-<i>` in logs.

use std::path::Path;

use ibrs::pairing::profile_by_id;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown or non-runnable curve {0:?}")]
    Curve(String),
    #[error("event {index}: {reason}")]
    Event { index: usize, reason: String },
    #[error("invalid parameter: {0}")]
    Param(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub seed: u64,
    pub topology: Topology,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub events: Vec<ScheduledEvent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub rsus: usize,
    pub vehicles: usize,
    #[serde(default = "default_curve")]
    pub curve: String,
}

fn default_curve() -> String {
    "bls12-381".to_owned()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Freshness window Δ.
    pub freshness_window_s: u64,
    pub prl_refresh_s: u64,
    /// Ring list validity, also the RSU epoch length.
    pub list_lifetime_s: u64,
    pub list_floor: usize,
    /// Default n'.
    pub ring_size: usize,
    /// One-way delay of every link.
    pub latency_ms: u64,
    /// Independent drop probability per delivery.
    pub loss: f64,
    /// Vehicles batch-verify envelopes that arrive at the same instant.
    pub batch: bool,
    pub batch_lambda: u32,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            freshness_window_s: 5,
            prl_refresh_s: 60,
            list_lifetime_s: 300,
            list_floor: 32,
            ring_size: 2,
            latency_ms: 20,
            loss: 0.0,
            batch: false,
            batch_lambda: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduledEvent {
    pub at_ms: u64,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    /// Vehicle enters an RSU's region and runs the ring-list handshake.
    Enter { vehicle: usize, rsu: usize },
    /// Vehicle signs and broadcasts to every other vehicle.
    Broadcast {
        vehicle: usize,
        #[serde(default)]
        message: Option<String>,
        #[serde(default)]
        ring_size: Option<usize>,
    },
    Revoke { vehicle: usize },
    /// LEA traces the vehicle's most recent broadcast.
    Trace { vehicle: usize },
    /// Adversary re-sends the most recent honest envelope unchanged.
    Replay,
    /// A vehicle signs with a timestamp `skew_s` in the past.
    Stale { vehicle: usize, skew_s: u64 },
    /// Adversary sends envelopes with random signature components over a
    /// ring of registered pseudonyms.
    Forge {
        #[serde(default = "one")]
        count: usize,
        #[serde(default)]
        ring_size: Option<usize>,
    },
    /// Adversary advertises a malformed pseudonym inside an envelope.
    InvalidPubkey,
    /// A revoked vehicle asks an RSU for a ring list.
    RevokedRequest { vehicle: usize, rsu: usize },
    /// Handshake whose sealed list is modified in flight.
    Tamper { vehicle: usize, rsu: usize },
}

fn one() -> usize {
    1
}

impl Scenario {
    pub fn from_toml(s: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(s)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        match profile_by_id(&self.topology.curve) {
            Some(p) if p.runnable => {}
            _ => return Err(ScenarioError::Curve(self.topology.curve.clone())),
        }
        let p = &self.params;
        if !(0.0..1.0).contains(&p.loss) {
            return Err(ScenarioError::Param(format!("loss {} not in [0, 1)", p.loss)));
        }
        if p.ring_size < 2 {
            return Err(ScenarioError::Param("ring_size below 2".into()));
        }
        if p.prl_refresh_s == 0 || p.list_lifetime_s == 0 {
            return Err(ScenarioError::Param("periods must be positive".into()));
        }
        if !(1..=128).contains(&p.batch_lambda) {
            return Err(ScenarioError::Param("batch_lambda not in 1..=128".into()));
        }
        let (nv, nr) = (self.topology.vehicles, self.topology.rsus);
        for (index, ev) in self.events.iter().enumerate() {
            let bad = |reason: String| Err(ScenarioError::Event { index, reason });
            let vehicle_ok = |v: usize| v < nv;
            let rsu_ok = |r: usize| r < nr;
            match &ev.action {
                Action::Enter { vehicle, rsu }
                | Action::RevokedRequest { vehicle, rsu }
                | Action::Tamper { vehicle, rsu } => {
                    if !vehicle_ok(*vehicle) {
                        return bad(format!("unknown vehicle {vehicle}"));
                    }
                    if !rsu_ok(*rsu) {
                        return bad(format!("unknown rsu {rsu}"));
                    }
                }
                Action::Broadcast {
                    vehicle, ring_size, ..
                } => {
                    if !vehicle_ok(*vehicle) {
                        return bad(format!("unknown vehicle {vehicle}"));
                    }
                    if ring_size.is_some_and(|n| n < 2) {
                        return bad("ring_size below 2".into());
                    }
                }
                Action::Revoke { vehicle }
                | Action::Trace { vehicle }
                | Action::Stale { vehicle, .. } => {
                    if !vehicle_ok(*vehicle) {
                        return bad(format!("unknown vehicle {vehicle}"));
                    }
                }
                Action::Forge { ring_size, .. } => {
                    if ring_size.is_some_and(|n| n < 2) {
                        return bad("ring_size below 2".into());
                    }
                }
                Action::Replay | Action::InvalidPubkey => {}
            }
        }
        Ok(())
    }
}
