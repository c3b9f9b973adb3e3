//! The event loop.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use ibrs::entities::{
    lea_trace, Frame, Lea, Rejection, Rsu, RsuConfig, RsuError, Trc, Vehicle, VehicleConfig, VehicleError,
};
use ibrs::channel::ChannelError;
use ibrs::pairing::{
    count_pairings_in, decode_g1, encode_g1, profile_by_id, random_g1, Bls12_381, Bn254, PairingCurve, G2,
};
use ibrs::scheme::{make_tag, BatchConfig, BroadcastEnvelope, RingSignature, SignerRing, VerifyError};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::log::{EventLog, Origin};
use crate::scenario::{Action, Params, Scenario, ScenarioError};

/// Runs a scenario to completion. The same scenario always yields the same
/// log.
pub fn run_scenario(scenario: &Scenario) -> Result<EventLog, ScenarioError> {
    scenario.validate()?;
    let curve = &scenario.topology.curve;
    let profile = profile_by_id(curve).ok_or_else(|| ScenarioError::Curve(curve.clone()))?;
    if profile == Bls12_381::profile() {
        Ok(Sim::<Bls12_381>::new(scenario).run())
    } else if profile == Bn254::profile() {
        Ok(Sim::<Bn254>::new(scenario).run())
    } else {
        Err(ScenarioError::Curve(curve.clone()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Node {
    Vehicle(usize),
    Rsu(usize),
}

enum Item {
    Action(Action),
    Refresh(usize),
    Deliver {
        from: Node,
        to: Node,
        frame: Vec<u8>,
        origin: Origin,
        tamper: bool,
    },
    Flush(usize),
}

struct Queued {
    time: u64,
    seq: u64,
    item: Item,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // Min-heap on (time, seq).
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

fn vname(i: usize) -> String {
    format!("veh-{i}")
}

fn rname(i: usize) -> String {
    format!("rsu-{i}")
}

const ADVERSARY: &str = "adversary";

fn rejection_label(r: &Rejection) -> &'static str {
    match r {
        Rejection::Stale { .. } => "reject:stale",
        Rejection::Replay => "reject:replay",
        Rejection::Invalid(VerifyError::EquationFailed) => "reject:invalid",
        Rejection::Invalid(VerifyError::Structural(_)) => "reject:structure",
    }
}

struct Sim<E: PairingCurve> {
    params: Params,
    rng: ChaCha20Rng,
    now_ms: u64,
    seq: u64,
    queue: BinaryHeap<Queued>,
    horizon_ms: u64,
    trc: Trc<E>,
    lea: Lea<E>,
    rsus: Vec<Rsu<E>>,
    vehicles: Vec<Vehicle<E>>,
    serving_rsu: Vec<Option<G2<E>>>,
    last_sent: Vec<Option<BroadcastEnvelope<E>>>,
    last_honest_frame: Option<Vec<u8>>,
    inbox: Vec<Vec<(Vec<u8>, Origin)>>,
    flush_pending: Vec<bool>,
    log: EventLog,
}

impl<E: PairingCurve> Sim<E> {
    fn new(s: &Scenario) -> Self {
        let p = s.params.clone();
        let mut rng = ChaCha20Rng::seed_from_u64(s.seed);
        let (mut trc, lea) = Trc::<E>::setup(&mut rng);
        let pp = trc.public_params().clone();
        let vconf = VehicleConfig {
            freshness_window: p.freshness_window_s,
            ring_size: p.ring_size,
            batch: BatchConfig {
                lambda: p.batch_lambda,
                small_exponents: true,
            },
        };
        let rconf = RsuConfig {
            list_floor: p.list_floor,
            list_lifetime: p.list_lifetime_s,
            prl_refresh: p.prl_refresh_s,
        };
        let nv = s.topology.vehicles;
        let vehicles = (0..nv)
            .map(|i| {
                let cred = trc.register_vehicle(&vname(i)).expect("fresh identity");
                Vehicle::new(pp.clone(), cred, vconf)
            })
            .collect();
        let rsus = (0..s.topology.rsus)
            .map(|i| Rsu::new(trc.register_rsu(&rname(i)).expect("fresh identity"), rconf))
            .collect();
        let mut sim = Sim {
            params: p,
            rng,
            now_ms: 0,
            seq: 0,
            queue: BinaryHeap::new(),
            horizon_ms: s.events.iter().map(|e| e.at_ms).max().unwrap_or(0),
            trc,
            lea,
            rsus,
            vehicles,
            serving_rsu: vec![None; nv],
            last_sent: vec![None; nv],
            last_honest_frame: None,
            inbox: vec![Vec::new(); nv],
            flush_pending: vec![false; nv],
            log: EventLog::default(),
        };
        if !s.events.is_empty() {
            for r in 0..s.topology.rsus {
                sim.schedule(0, Item::Refresh(r));
            }
        }
        let mut events = s.events.clone();
        events.sort_by_key(|e| e.at_ms);
        for e in events {
            sim.schedule(e.at_ms, Item::Action(e.action));
        }
        sim
    }

    fn schedule(&mut self, time: u64, item: Item) {
        self.queue.push(Queued {
            time,
            seq: self.seq,
            item,
        });
        self.seq += 1;
    }

    fn now_s(&self) -> u64 {
        self.now_ms / 1000
    }

    fn record(&mut self, entity: impl Into<String>, event: &str, outcome: impl Into<String>, origin: Origin, data: &[u8], pairings: u64) {
        self.log
            .push(self.now_ms, entity, event, outcome, origin, data, pairings);
    }

    fn send(&mut self, from: Node, to: Node, frame: Vec<u8>, origin: Origin, tamper: bool) {
        let at = self.now_ms + self.params.latency_ms;
        self.schedule(
            at,
            Item::Deliver {
                from,
                to,
                frame,
                origin,
                tamper,
            },
        );
    }

    /// Sends an envelope frame to every vehicle except `except`.
    fn broadcast_frame(&mut self, frame: &[u8], origin: Origin, except: Option<usize>) {
        for v in 0..self.vehicles.len() {
            if Some(v) != except {
                self.send(Node::Vehicle(usize::MAX), Node::Vehicle(v), frame.to_vec(), origin, false);
            }
        }
    }

    fn run(mut self) -> EventLog {
        while let Some(q) = self.queue.pop() {
            self.now_ms = q.time;
            match q.item {
                Item::Action(a) => self.act(a),
                Item::Refresh(r) => self.refresh(r),
                Item::Deliver {
                    from,
                    to,
                    frame,
                    origin,
                    tamper,
                } => self.deliver(from, to, frame, origin, tamper),
                Item::Flush(v) => self.flush(v),
            }
        }
        self.log
    }

    fn refresh(&mut self, r: usize) {
        let now = self.now_s();
        self.rsus[r].refresh(&self.trc, now);
        let version = self.rsus[r].prl_version();
        self.record(rname(r), "prl_refresh", format!("v{version}"), Origin::System, &[], 0);
        let next = self.now_ms + self.params.prl_refresh_s * 1000;
        if next <= self.horizon_ms {
            self.schedule(next, Item::Refresh(r));
        }
    }

    fn is_revoked(&self, v: usize) -> bool {
        self.trc.prl().contains(self.vehicles[v].pid())
    }

    fn start_handshake(&mut self, v: usize, r: usize, tamper: bool) {
        let frame = Frame::<E>::RidBroadcast(self.rsus[r].beacon()).to_bytes();
        self.record(rname(r), "beacon", "sent", Origin::System, &frame, 0);
        self.send(Node::Rsu(r), Node::Vehicle(v), frame, Origin::System, tamper);
    }

    fn act(&mut self, action: Action) {
        match action {
            Action::Enter { vehicle, rsu } => self.start_handshake(vehicle, rsu, false),
            Action::Tamper { vehicle, rsu } => self.start_handshake(vehicle, rsu, true),
            Action::RevokedRequest { vehicle, rsu } => {
                if self.is_revoked(vehicle) {
                    self.start_handshake(vehicle, rsu, false);
                } else {
                    self.record(vname(vehicle), "revoked_request", "skipped:not_revoked", Origin::Adversary, &[], 0);
                }
            }
            Action::Broadcast {
                vehicle,
                message,
                ring_size,
            } => {
                let msg = message.unwrap_or_else(|| format!("{} status at {}", vname(vehicle), self.now_ms));
                let n = ring_size.unwrap_or(self.params.ring_size);
                let now = self.now_s();
                self.sign_and_send(vehicle, msg.as_bytes(), now, n, Origin::Honest);
            }
            Action::Stale { vehicle, skew_s } => {
                let t = self.now_s().saturating_sub(skew_s);
                let msg = format!("{} stale", vname(vehicle));
                let n = self.params.ring_size;
                self.sign_and_send(vehicle, msg.as_bytes(), t, n, Origin::Adversary);
            }
            Action::Revoke { vehicle } => {
                let len = self
                    .trc
                    .revoke(&vname(vehicle))
                    .expect("registered vehicle")
                    .len();
                self.record("trc", "revoke", format!("prl:{len}"), Origin::System, &[], 0);
            }
            Action::Trace { vehicle } => self.trace(vehicle),
            Action::Replay => match self.last_honest_frame.clone() {
                Some(frame) => {
                    self.record(ADVERSARY, "replay", "sent", Origin::Adversary, &frame, 0);
                    self.broadcast_frame(&frame, Origin::Adversary, None);
                }
                None => self.record(ADVERSARY, "replay", "skipped:nothing_captured", Origin::Adversary, &[], 0),
            },
            Action::Forge { count, ring_size } => {
                let n = ring_size.unwrap_or(self.params.ring_size);
                for _ in 0..count {
                    match self.forged_envelope(n) {
                        Some(env) => {
                            let frame = Frame::Envelope(env).to_bytes();
                            self.record(ADVERSARY, "forge", "sent", Origin::Adversary, &frame, 0);
                            self.broadcast_frame(&frame, Origin::Adversary, None);
                        }
                        None => self.record(ADVERSARY, "forge", "skipped:pool_too_small", Origin::Adversary, &[], 0),
                    }
                }
            }
            Action::InvalidPubkey => match self.forged_envelope(2) {
                Some(env) => {
                    let frame = self.corrupt_first_member(&env);
                    self.record(ADVERSARY, "invalid_pubkey", "sent", Origin::Adversary, &frame, 0);
                    self.broadcast_frame(&frame, Origin::Adversary, None);
                }
                None => self.record(ADVERSARY, "invalid_pubkey", "skipped:pool_too_small", Origin::Adversary, &[], 0),
            },
        }
    }

    fn sign_and_send(&mut self, v: usize, msg: &[u8], t: u64, n: usize, origin: Origin) {
        let event = match origin {
            Origin::Adversary => "stale_broadcast",
            _ => "broadcast",
        };
        let (res, pairings) = count_pairings_in(|| {
            self.vehicles[v].broadcast_with_ring_size(msg, t, n, &mut self.rng)
        });
        match res {
            Ok(env) => {
                let frame = Frame::Envelope(env.clone()).to_bytes();
                self.record(vname(v), event, "sent", origin, &frame, pairings);
                if origin == Origin::Honest {
                    self.last_sent[v] = Some(env);
                    self.last_honest_frame = Some(frame.clone());
                }
                self.broadcast_frame(&frame, origin, Some(v));
            }
            Err(e) => {
                let label = match e {
                    VehicleError::NoRingList => "error:no_ring_list",
                    VehicleError::ListExpired { .. } => "error:list_expired",
                    VehicleError::InsufficientList { .. } => "error:list_too_small",
                    _ => "error:ring",
                };
                self.record(vname(v), event, label, origin, &[], pairings);
            }
        }
    }

    /// Random signature components over `n` registered pseudonyms, with a
    /// well-formed tag and a fresh timestamp.
    fn forged_envelope(&mut self, n: usize) -> Option<BroadcastEnvelope<E>> {
        let pool = self.trc.decoy_pool();
        if pool.len() < n {
            return None;
        }
        let members: Vec<_> = pool.choose_multiple(&mut self.rng, n).copied().collect();
        let ring = SignerRing::new(members).ok()?;
        let signature = RingSignature {
            u: (0..n).map(|_| random_g1::<E, _>(&mut self.rng)).collect(),
            v: random_g1::<E, _>(&mut self.rng),
        };
        let mut message = vec![0u8; 32];
        self.rng.fill_bytes(&mut message);
        let t = self.now_s();
        let label = format!("forger-{}", self.rng.gen::<u32>());
        let tag = make_tag(self.trc.public_params(), &label, t);
        Some(BroadcastEnvelope {
            message,
            signature,
            ring,
            timestamp: t,
            tag,
        })
    }

    /// Encodes the envelope, then overwrites the first ring member with
    /// bytes that do not decode to a group element.
    fn corrupt_first_member(&self, env: &BroadcastEnvelope<E>) -> Vec<u8> {
        let mut frame = Frame::Envelope(env.clone()).to_bytes();
        let offset = 1 + 4 + 4 + env.message.len() + 2;
        let len = E::profile().g1_len;
        let mut bad = encode_g1::<E>(&env.ring.members()[0]);
        while decode_g1::<E>(&bad).is_ok() {
            bad[len - 1] = bad[len - 1].wrapping_add(1);
        }
        frame[offset..offset + len].copy_from_slice(&bad);
        frame
    }

    fn trace(&mut self, v: usize) {
        let Some(env) = self.last_sent[v].clone() else {
            self.record("lea", "trace", "skipped:no_broadcast", Origin::System, &[], 0);
            return;
        };
        let (res, pairings) = count_pairings_in(|| lea_trace(&self.lea, &self.trc, &env));
        let expected = vname(v);
        let outcome = match res {
            Ok(Some(vid)) if vid == expected => format!("match:{vid}"),
            Ok(Some(vid)) => format!("mismatch:{vid}"),
            Ok(None) => "none".to_owned(),
            Err(e) => format!("error:{e}"),
        };
        self.record("lea", "trace", outcome, Origin::System, &[], pairings);
    }

    fn deliver(&mut self, from: Node, to: Node, mut frame: Vec<u8>, origin: Origin, tamper: bool) {
        let entity = match to {
            Node::Vehicle(v) => vname(v),
            Node::Rsu(r) => rname(r),
        };
        if self.params.loss > 0.0 && self.rng.gen_bool(self.params.loss) {
            self.record(entity, "deliver", "dropped", origin, &frame, 0);
            return;
        }
        match to {
            Node::Vehicle(v) => self.vehicle_rx(v, from, frame, origin, tamper),
            Node::Rsu(r) => {
                let Node::Vehicle(v) = from else { return };
                let origin = if self.is_revoked(v) {
                    Origin::Adversary
                } else {
                    Origin::Honest
                };
                let req = match Frame::<E>::from_bytes(&frame) {
                    Ok(Frame::RingRequest(c)) => c,
                    _ => {
                        self.record(entity, "ring_issue", "reject:decode", origin, &frame, 0);
                        return;
                    }
                };
                let now = self.now_s();
                let (res, pairings) =
                    count_pairings_in(|| self.rsus[r].handle_ring_request(&req, now, &mut self.rng));
                match res {
                    Ok(sealed) => {
                        self.record(entity, "ring_issue", "accept", origin, &frame, pairings);
                        frame = Frame::<E>::SealedList(sealed).to_bytes();
                        if tamper {
                            let last = frame.len() - 1;
                            frame[last] ^= 0x01;
                        }
                        self.send(Node::Rsu(r), Node::Vehicle(v), frame, Origin::Honest, tamper);
                    }
                    Err(RsuError::Revoked) => {
                        self.record(entity, "ring_issue", "reject:revoked", origin, &frame, pairings)
                    }
                    Err(RsuError::Decrypt(_)) => {
                        self.record(entity, "ring_issue", "reject:decrypt", origin, &frame, pairings)
                    }
                }
            }
        }
    }

    fn vehicle_rx(&mut self, v: usize, from: Node, frame: Vec<u8>, origin: Origin, tamper: bool) {
        let decoded = Frame::<E>::from_bytes(&frame);
        match decoded {
            Ok(Frame::RidBroadcast(rid)) => {
                let Node::Rsu(r) = from else { return };
                self.serving_rsu[v] = Some(rid);
                let (c, pairings) = count_pairings_in(|| self.vehicles[v].request_ring(&rid, &mut self.rng));
                let req = Frame::RingRequest(c).to_bytes();
                self.record(vname(v), "ring_request", "sent", Origin::System, &req, pairings);
                self.send(Node::Vehicle(v), Node::Rsu(r), req, Origin::Honest, tamper);
            }
            Ok(Frame::SealedList(sealed)) => {
                let origin = if tamper { Origin::Adversary } else { Origin::Honest };
                let Some(rid) = self.serving_rsu[v] else {
                    self.record(vname(v), "ring_accept", "reject:unsolicited", origin, &frame, 0);
                    return;
                };
                let now = self.now_s();
                let (res, pairings) = count_pairings_in(|| self.vehicles[v].accept_ring(&rid, &sealed, now));
                let outcome = match res {
                    Ok(()) => "accept",
                    Err(VehicleError::Channel(ChannelError::MacFailure)) => "reject:mac",
                    Err(VehicleError::ListExpired { .. }) => "reject:expired",
                    Err(_) => "reject:channel",
                };
                self.record(vname(v), "ring_accept", outcome, origin, &frame, pairings);
            }
            Ok(Frame::Envelope(env)) => {
                if self.params.batch {
                    self.inbox[v].push((frame, origin));
                    if !self.flush_pending[v] {
                        self.flush_pending[v] = true;
                        self.schedule(self.now_ms, Item::Flush(v));
                    }
                    return;
                }
                let now = self.now_s();
                let (res, pairings) = count_pairings_in(|| self.vehicles[v].receive(&env, now));
                let outcome = match &res {
                    Ok(()) => "accept",
                    Err(r) => rejection_label(r),
                };
                self.record(vname(v), "receive", outcome, origin, &frame, pairings);
            }
            Ok(_) => self.record(vname(v), "receive", "reject:unexpected_frame", origin, &frame, 0),
            Err(_) => self.record(vname(v), "receive", "reject:decode", origin, &frame, 0),
        }
    }

    /// Batch-verifies everything that reached vehicle `v` at this instant.
    /// If the batch fails, each envelope is re-checked on its own so honest
    /// traffic is not dropped alongside a forgery.
    fn flush(&mut self, v: usize) {
        self.flush_pending[v] = false;
        let pending = std::mem::take(&mut self.inbox[v]);
        let mut envs = Vec::new();
        let mut meta = Vec::new();
        for (frame, origin) in pending {
            match Frame::<E>::from_bytes(&frame) {
                Ok(Frame::Envelope(env)) => {
                    envs.push(env);
                    meta.push((frame, origin));
                }
                _ => self.record(vname(v), "receive", "reject:decode", origin, &frame, 0),
            }
        }
        if envs.is_empty() {
            return;
        }
        let now = self.now_s();
        let (receipt, pairings) =
            count_pairings_in(|| self.vehicles[v].receive_batch(&envs, now, &mut self.rng));
        let all: Vec<u8> = meta.iter().flat_map(|m| m.0.iter().copied()).collect();
        let verdict = match receipt.decision {
            Ok(()) => "accept".to_owned(),
            Err(ref e) => format!("failed:{e}"),
        };
        self.record(vname(v), "batch_verify", verdict, Origin::System, &all, pairings);
        for (i, r) in &receipt.filtered {
            let (frame, origin) = meta[*i].clone();
            self.record(vname(v), "receive", rejection_label(r), origin, &frame, 0);
        }
        for &i in &receipt.verified {
            let (frame, origin) = meta[i].clone();
            if receipt.decision.is_ok() {
                self.record(vname(v), "receive", "accept", origin, &frame, 0);
            } else {
                let (res, pairings) = count_pairings_in(|| self.vehicles[v].receive(&envs[i], now));
                let outcome = match &res {
                    Ok(()) => "accept",
                    Err(r) => rejection_label(r),
                };
                self.record(vname(v), "receive", outcome, origin, &frame, pairings);
            }
        }
    }
}
