use std::fmt;

use ark_ec::CurveGroup;
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use super::wire::{Reader, WireError};
use crate::channel::SymmetricKey;
use crate::pairing::{
    decode_g1, decode_g2, encode_g1, encode_g2, g1_generator, g2_generator, hash_to_g1,
    hash_to_g2, pair, random_nonzero_scalar, Domain, G2Prepared, PairingCurve, Scalar, G1, G2,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum KeyError {
    #[error("identity string is empty")]
    EmptyIdentity,
}

/// System-wide public parameters.
#[derive(Clone)]
pub struct PublicParams<E: PairingCurve> {
    p: G1<E>,
    q: G2<E>,
    pk1: G1<E>,
    pk2: G2<E>,
    pk_trac: G2<E>,
    q_prepared: G2Prepared<E>,
    pk2_prepared: G2Prepared<E>,
    pk_trac_prepared: G2Prepared<E>,
}

/// TRC master secret `s`.
pub struct MasterSecret<E: PairingCurve> {
    s: Scalar<E>,
}

/// LEA tracing secret `s_trac`.
pub struct TraceSecret<E: PairingCurve> {
    s: Scalar<E>,
}

/// Runs system setup: samples `s` and `s_trac` and derives the public keys.
pub fn setup<E: PairingCurve, R: RngCore + CryptoRng + ?Sized>(
    rng: &mut R,
) -> (PublicParams<E>, MasterSecret<E>, TraceSecret<E>) {
    let master = MasterSecret {
        s: random_nonzero_scalar::<E, _>(rng),
    };
    let trace = TraceSecret::generate(rng);
    (PublicParams::from_secrets(&master, &trace), master, trace)
}

impl<E: PairingCurve> PublicParams<E> {
    pub fn from_secrets(master: &MasterSecret<E>, trace: &TraceSecret<E>) -> Self {
        let p = g1_generator::<E>();
        let q = g2_generator::<E>();
        Self::assemble(
            p,
            q,
            (p * master.s).into_affine(),
            (q * master.s).into_affine(),
            trace.public_key(),
        )
    }

    fn assemble(p: G1<E>, q: G2<E>, pk1: G1<E>, pk2: G2<E>, pk_trac: G2<E>) -> Self {
        PublicParams {
            p,
            q,
            pk1,
            pk2,
            pk_trac,
            q_prepared: q.into(),
            pk2_prepared: pk2.into(),
            pk_trac_prepared: pk_trac.into(),
        }
    }

    pub fn p(&self) -> &G1<E> {
        &self.p
    }

    pub fn q(&self) -> &G2<E> {
        &self.q
    }

    pub fn pk1(&self) -> &G1<E> {
        &self.pk1
    }

    pub fn pk2(&self) -> &G2<E> {
        &self.pk2
    }

    pub fn pk_trac(&self) -> &G2<E> {
        &self.pk_trac
    }

    pub(crate) fn q_prepared(&self) -> &G2Prepared<E> {
        &self.q_prepared
    }

    pub(crate) fn pk2_prepared(&self) -> &G2Prepared<E> {
        &self.pk2_prepared
    }

    pub(crate) fn pk_trac_prepared(&self) -> &G2Prepared<E> {
        &self.pk_trac_prepared
    }

    /// Domain separation tags of `H1`, `H2` and `H` for this curve.
    pub fn hash_suite(&self) -> [String; 3] {
        let id = E::profile().id;
        [Domain::G1.tag(id), Domain::G2.tag(id), Domain::Scalar.tag(id)]
    }

    /// `e(PK1, Q) == e(P, PK2)`.
    pub fn is_consistent(&self) -> bool {
        pair::<E>(&self.pk1, &self.q) == pair::<E>(&self.p, &self.pk2)
    }

    /// `u16 id_len ‖ profile id ‖ P ‖ Q ‖ PK1 ‖ PK2 ‖ PK_trac`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        super::wire::put_bytes_u16(&mut out, E::profile().id.as_bytes());
        out.extend(encode_g1::<E>(&self.p));
        out.extend(encode_g2::<E>(&self.q));
        out.extend(encode_g1::<E>(&self.pk1));
        out.extend(encode_g2::<E>(&self.pk2));
        out.extend(encode_g2::<E>(&self.pk_trac));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let profile = E::profile();
        let mut r = Reader::new(bytes);
        let id = r.bytes_u16()?;
        if id != profile.id.as_bytes() {
            return Err(WireError::ProfileMismatch(
                String::from_utf8_lossy(id).into_owned(),
            ));
        }
        let p = decode_g1::<E>(r.take(profile.g1_len)?)?;
        let q = decode_g2::<E>(r.take(profile.g2_len)?)?;
        let pk1 = decode_g1::<E>(r.take(profile.g1_len)?)?;
        let pk2 = decode_g2::<E>(r.take(profile.g2_len)?)?;
        let pk_trac = decode_g2::<E>(r.take(profile.g2_len)?)?;
        r.finish()?;
        let pp = Self::assemble(p, q, pk1, pk2, pk_trac);
        if !pp.is_consistent() {
            return Err(WireError::Malformed("PK1 and PK2 disagree"));
        }
        Ok(pp)
    }
}

impl<E: PairingCurve> fmt::Debug for PublicParams<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PublicParams")
            .field("curve", &E::profile().id)
            .field("pk1", &self.pk1)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
impl<E: PairingCurve> MasterSecret<E> {
    pub(crate) fn scalar(&self) -> &Scalar<E> {
        &self.s
    }
}

impl<E: PairingCurve> fmt::Debug for MasterSecret<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MasterSecret(..)")
    }
}

impl<E: PairingCurve> TraceSecret<E> {
    pub fn generate<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        TraceSecret {
            s: random_nonzero_scalar::<E, _>(rng),
        }
    }

    /// `PK_trac = s_trac · Q`
    pub fn public_key(&self) -> G2<E> {
        (g2_generator::<E>() * self.s).into_affine()
    }

    pub(crate) fn scalar(&self) -> &Scalar<E> {
        &self.s
    }
}

impl<E: PairingCurve> fmt::Debug for TraceSecret<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TraceSecret(..)")
    }
}

/// A vehicle's identity, pseudonym `PID = H1(VID)` and private key
/// `PSK = s · PID`. The private key is not readable outside the crate.
pub struct VehicleCredential<E: PairingCurve> {
    vid: String,
    pid: G1<E>,
    psk: G1<E>,
}

/// An RSU's identity, public key `RID = H2(id)` and private key `RSK = s · RID`.
pub struct RsuCredential<E: PairingCurve> {
    id: String,
    rid: G2<E>,
    rsk: G2<E>,
}

/// The pseudonym a vehicle identity maps to.
pub fn pseudonym_of<E: PairingCurve>(vid: &str) -> G1<E> {
    hash_to_g1::<E>(vid.as_bytes())
}

/// The public key an RSU identity maps to.
pub fn rsu_public_key_of<E: PairingCurve>(id: &str) -> G2<E> {
    hash_to_g2::<E>(id.as_bytes())
}

pub fn keygen_vehicle<E: PairingCurve>(
    master: &MasterSecret<E>,
    vid: &str,
) -> Result<VehicleCredential<E>, KeyError> {
    if vid.is_empty() {
        return Err(KeyError::EmptyIdentity);
    }
    let pid = pseudonym_of::<E>(vid);
    Ok(VehicleCredential {
        vid: vid.to_owned(),
        pid,
        psk: (pid * master.s).into_affine(),
    })
}

pub fn keygen_rsu<E: PairingCurve>(
    master: &MasterSecret<E>,
    id: &str,
) -> Result<RsuCredential<E>, KeyError> {
    if id.is_empty() {
        return Err(KeyError::EmptyIdentity);
    }
    let rid = rsu_public_key_of::<E>(id);
    Ok(RsuCredential {
        id: id.to_owned(),
        rid,
        rsk: (rid * master.s).into_affine(),
    })
}

impl<E: PairingCurve> VehicleCredential<E> {
    pub fn vid(&self) -> &str {
        &self.vid
    }

    pub fn pid(&self) -> &G1<E> {
        &self.pid
    }

    pub(crate) fn psk(&self) -> &G1<E> {
        &self.psk
    }

    /// `e(PSK, Q) == e(PID, PK2)`.
    pub fn is_consistent(&self, pp: &PublicParams<E>) -> bool {
        pair::<E>(&self.psk, pp.q()) == pair::<E>(&self.pid, pp.pk2())
    }

    #[cfg(test)]
    pub(crate) fn with_key(vid: &str, pid: G1<E>, psk: G1<E>) -> Self {
        VehicleCredential {
            vid: vid.to_owned(),
            pid,
            psk,
        }
    }
}

impl<E: PairingCurve> fmt::Debug for VehicleCredential<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VehicleCredential")
            .field("vid", &self.vid)
            .field("pid", &self.pid)
            .finish_non_exhaustive()
    }
}

impl<E: PairingCurve> RsuCredential<E> {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn rid(&self) -> &G2<E> {
        &self.rid
    }

    pub(crate) fn rsk(&self) -> &G2<E> {
        &self.rsk
    }

    /// `e(P, RSK) == e(PK1, RID)`.
    pub fn is_consistent(&self, pp: &PublicParams<E>) -> bool {
        pair::<E>(pp.p(), &self.rsk) == pair::<E>(pp.pk1(), &self.rid)
    }
}

impl<E: PairingCurve> fmt::Debug for RsuCredential<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RsuCredential")
            .field("id", &self.id)
            .field("rid", &self.rid)
            .finish_non_exhaustive()
    }
}

/// RSU side: `K = kdf(e(PID, RSK))`.
pub fn derive_shared_key_rsu<E: PairingCurve>(rsu: &RsuCredential<E>, pid: &G1<E>) -> SymmetricKey {
    SymmetricKey::from_shared_secret::<E>(&pair::<E>(pid, rsu.rsk()))
}

/// Vehicle side: `K = kdf(e(PSK, RID))`.
pub fn derive_shared_key_vehicle<E: PairingCurve>(
    vehicle: &VehicleCredential<E>,
    rid: &G2<E>,
) -> SymmetricKey {
    SymmetricKey::from_shared_secret::<E>(&pair::<E>(vehicle.psk(), rid))
}
