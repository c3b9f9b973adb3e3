//! Type-tagged message frames: `u8 type ‖ u32 len ‖ payload`.

use crate::channel::SealedRingList;
use crate::pairing::{decode_g2, decode_gt, encode_g2, encode_gt, Gt, PairingCurve, G2};
use crate::scheme::wire::{put_bytes_u32, Reader, WireError};
use crate::scheme::{BroadcastEnvelope, IbeCiphertext, SignerRing};

/// Frames larger than this are refused.
pub const MAX_FRAME_LEN: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum FrameType {
    RidBroadcast = 0x01,
    RingRequest = 0x02,
    SealedList = 0x03,
    Envelope = 0x04,
    TraceRequest = 0x05,
    TraceResponse = 0x06,
}

impl TryFrom<u8> for FrameType {
    type Error = WireError;

    fn try_from(b: u8) -> Result<Self, WireError> {
        Ok(match b {
            0x01 => FrameType::RidBroadcast,
            0x02 => FrameType::RingRequest,
            0x03 => FrameType::SealedList,
            0x04 => FrameType::Envelope,
            0x05 => FrameType::TraceRequest,
            0x06 => FrameType::TraceResponse,
            other => return Err(WireError::UnknownFrameType(other)),
        })
    }
}

/// LEA to TRC: the ring and timestamp of an envelope under investigation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRequest<E: PairingCurve> {
    pub ring: SignerRing<E>,
    pub timestamp: u64,
}

/// TRC to LEA: one candidate per ring slot, in ring order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceResponse<E: PairingCurve> {
    pub candidates: Vec<Gt<E>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame<E: PairingCurve> {
    RidBroadcast(G2<E>),
    RingRequest(IbeCiphertext<E>),
    SealedList(SealedRingList),
    Envelope(BroadcastEnvelope<E>),
    TraceRequest(TraceRequest<E>),
    TraceResponse(TraceResponse<E>),
}

impl<E: PairingCurve> Frame<E> {
    pub fn frame_type(&self) -> FrameType {
        match self {
            Frame::RidBroadcast(_) => FrameType::RidBroadcast,
            Frame::RingRequest(_) => FrameType::RingRequest,
            Frame::SealedList(_) => FrameType::SealedList,
            Frame::Envelope(_) => FrameType::Envelope,
            Frame::TraceRequest(_) => FrameType::TraceRequest,
            Frame::TraceResponse(_) => FrameType::TraceResponse,
        }
    }

    fn payload(&self) -> Vec<u8> {
        match self {
            Frame::RidBroadcast(rid) => encode_g2::<E>(rid),
            Frame::RingRequest(c) => c.to_bytes(),
            Frame::SealedList(s) => s.to_bytes(),
            Frame::Envelope(env) => env.to_bytes(),
            Frame::TraceRequest(req) => {
                let mut out = Vec::new();
                req.ring.encode_into(&mut out);
                out.extend_from_slice(&req.timestamp.to_be_bytes());
                out
            }
            Frame::TraceResponse(resp) => {
                let mut out = Vec::new();
                out.extend_from_slice(&(resp.candidates.len() as u16).to_be_bytes());
                for c in &resp.candidates {
                    out.extend(encode_gt::<E>(c));
                }
                out
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.frame_type() as u8];
        put_bytes_u32(&mut out, &self.payload());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(bytes);
        let kind = FrameType::try_from(r.u8()?)?;
        let payload = r.bytes_u32(MAX_FRAME_LEN)?;
        r.finish()?;
        Ok(match kind {
            FrameType::RidBroadcast => {
                let mut p = Reader::new(payload);
                let rid = decode_g2::<E>(p.take(E::profile().g2_len)?)?;
                p.finish()?;
                Frame::RidBroadcast(rid)
            }
            FrameType::RingRequest => Frame::RingRequest(IbeCiphertext::from_bytes(payload)?),
            FrameType::SealedList => Frame::SealedList(SealedRingList::from_bytes(payload)?),
            FrameType::Envelope => Frame::Envelope(BroadcastEnvelope::from_bytes(payload)?),
            FrameType::TraceRequest => {
                let mut p = Reader::new(payload);
                let ring = SignerRing::decode_from(&mut p)?;
                let timestamp = p.u64()?;
                p.finish()?;
                Frame::TraceRequest(TraceRequest { ring, timestamp })
            }
            FrameType::TraceResponse => {
                let mut p = Reader::new(payload);
                let n = p.u16()? as usize;
                let candidates = (0..n)
                    .map(|_| Ok(decode_gt::<E>(p.take(E::profile().gt_len)?)?))
                    .collect::<Result<Vec<_>, WireError>>()?;
                p.finish()?;
                Frame::TraceResponse(TraceResponse { candidates })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{seal_ring_list, RingList, SymmetricKey};
    use crate::pairing::{g1_generator, g2_generator, pair, random_g1, Bls12_381};
    use crate::scheme::{ibe_encrypt, keygen_vehicle, setup, sign_envelope};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    type E = Bls12_381;

    #[test]
    fn every_frame_type_roundtrips() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (pp, master, _) = setup::<E, _>(&mut rng);
        let a = keygen_vehicle(&master, "a").unwrap();
        let b = keygen_vehicle(&master, "b").unwrap();
        let ring = SignerRing::new(vec![*a.pid(), *b.pid()]).unwrap();
        let env = sign_envelope(&pp, &a, ring.clone(), b"hi", 10, &mut rng).unwrap();
        let list = RingList::<E> {
            pids: vec![*a.pid(), *b.pid()],
            expires_at: 99,
        };
        let key = SymmetricKey::from_bytes([3; 32]);
        let g = pair::<E>(&g1_generator::<E>(), &g2_generator::<E>());
        let frames = vec![
            Frame::RidBroadcast(g2_generator::<E>()),
            Frame::RingRequest(ibe_encrypt(&pp, &g2_generator::<E>(), &random_g1::<E, _>(&mut rng), &mut rng)),
            Frame::SealedList(seal_ring_list(&key, &list, &mut rng)),
            Frame::Envelope(env),
            Frame::TraceRequest(TraceRequest { ring, timestamp: 10 }),
            Frame::TraceResponse(TraceResponse {
                candidates: vec![g, g + g],
            }),
        ];
        for f in frames {
            let bytes = f.to_bytes();
            assert_eq!(bytes[0], f.frame_type() as u8);
            assert_eq!(Frame::<E>::from_bytes(&bytes).unwrap(), f);
        }
    }

    #[test]
    fn unknown_type_and_trailing_bytes_rejected() {
        let f = Frame::<E>::RidBroadcast(g2_generator::<E>());
        let mut bytes = f.to_bytes();
        bytes[0] = 0x7f;
        assert_eq!(Frame::<E>::from_bytes(&bytes), Err(WireError::UnknownFrameType(0x7f)));
        let mut bytes = f.to_bytes();
        bytes.push(0);
        assert_eq!(Frame::<E>::from_bytes(&bytes), Err(WireError::TrailingBytes(1)));
    }
}
