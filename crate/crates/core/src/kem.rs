//! Niederreiter encapsulation and decapsulation.
//!
//! Encapsulation samples a weight-`t` error vector `e`, sends the syndrome
//! `s = [M_l | I] e^T` and keeps `KDF(e)`. Decapsulation computes the private
//! syndrome `L_{n0-1} s`, runs the Q-decoder, and accepts the result only if
//! the decoded vector has weight exactly `t`. Any other outcome yields a
//! secret derived from a per-key failure secret and the received syndrome, so
//! the caller cannot tell a failure from a success by the return value.

use std::fmt;

use crate::decoder::{DecodeResult, QDecoder, Workspace};
use crate::error::{Error, Result};
use crate::keygen::{PrivateKey, PublicKey};
use crate::params::ParamSet;
use crate::ring::RingElement;
use crate::rng::{kdf_parts, sample_error, Drbg};
use crate::vector::ErrorVector;

const SUCCESS_PREFIX: u8 = 0x01;
const FAILURE_PREFIX: u8 = 0x00;

/// A `p`-bit syndrome.
#[derive(Clone, PartialEq, Eq)]
pub struct Ciphertext {
    syndrome: RingElement,
}

impl Ciphertext {
    pub fn new(syndrome: RingElement) -> Self {
        Self { syndrome }
    }

    pub fn syndrome(&self) -> &RingElement {
        &self.syndrome
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.syndrome.to_le_bytes()
    }

    /// Parses `ceil(p/64) * 8` bytes. Padding bits above `p` are ignored, so
    /// every byte string of the right length is a ciphertext.
    pub fn from_bytes(ps: &ParamSet, bytes: &[u8]) -> Result<Self> {
        Ok(Self { syndrome: RingElement::from_le_bytes(ps.p, bytes, false)? })
    }
}

impl fmt::Debug for Ciphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ciphertext(p={})", self.syndrome.p())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SharedSecret(Vec<u8>);

impl SharedSecret {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        match bytes.len() {
            32 | 48 | 64 => Ok(Self(bytes.to_vec())),
            n => Err(Error::format(format!("shared secret must be 32, 48 or 64 bytes, got {n}"))),
        }
    }
}

impl fmt::Debug for SharedSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SharedSecret({} bytes)", self.0.len())
    }
}

/// `s = sum_{j < n0-1} M_j^T e_j + e_{n0-1}`: the syndrome of `e` under
/// `[M_l | I]`, with column vectors mapped to polynomials coefficient-wise.
pub fn public_syndrome(pk: &PublicKey, e: &ErrorVector) -> RingElement {
    let ps = pk.params();
    let n0 = ps.n0;
    let mut s = e.block(n0 - 1).to_dense();
    for (j, mj) in pk.blocks().iter().enumerate() {
        let ej = e.block(j);
        if !ej.is_zero() {
            s.add_assign(&ej.mul_dense(&mj.transpose()).unwrap()).unwrap();
        }
    }
    s
}

fn success_secret(ps: &ParamSet, e: &ErrorVector) -> SharedSecret {
    SharedSecret(kdf_parts(&[&[SUCCESS_PREFIX], &e.to_bytes()], ps.secret_bytes()))
}

fn failure_secret(sk: &PrivateKey, ct: &Ciphertext) -> SharedSecret {
    let ps = sk.params();
    SharedSecret(kdf_parts(&[&[FAILURE_PREFIX], sk.failure_secret(), &ct.to_bytes()], ps.secret_bytes()))
}

/// Encapsulates a caller-chosen error vector.
pub fn encapsulate_error(pk: &PublicKey, e: &ErrorVector) -> (Ciphertext, SharedSecret) {
    let ct = Ciphertext::new(public_syndrome(pk, e));
    (ct, success_secret(pk.params(), e))
}

/// Samples `e` from `entropy` and encapsulates it.
pub fn encapsulate(pk: &PublicKey, entropy: &mut Drbg) -> (Ciphertext, SharedSecret) {
    let ps = pk.params();
    let e = sample_error(entropy, ps.n0, ps.p, ps.t);
    encapsulate_error(pk, &e)
}

/// What happened inside a decapsulation. Only for diagnostics; the secret
/// alone carries no failure signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecapOutcome {
    Decoded { iterations: usize },
    DecodingFailure,
    WeightMismatch { weight: usize },
}

impl DecapOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, DecapOutcome::Decoded { .. })
    }
}

#[derive(Debug)]
pub struct Decapsulation {
    pub secret: SharedSecret,
    pub outcome: DecapOutcome,
}

/// The private syndrome `s' = L_{n0-1} s`.
pub fn private_syndrome(sk: &PrivateKey, ct: &Ciphertext) -> RingElement {
    sk.l()[sk.params().n0 - 1].transpose().mul_dense(ct.syndrome()).unwrap()
}

/// Decapsulation with an explicit decoder and workspace, reporting what
/// happened.
pub fn decapsulate_with(sk: &PrivateKey, ct: &Ciphertext, decoder: &QDecoder, ws: &mut Workspace) -> Decapsulation {
    let ps = sk.params();
    let s_private = private_syndrome(sk, ct);
    let decoded: DecodeResult = decoder.decode(&s_private, sk, ws);

    // Both candidate secrets are always computed.
    let fallback = failure_secret(sk, ct);
    let (candidate, outcome) = match decoded {
        Ok(d) if d.error.weight() == ps.t => {
            (success_secret(ps, &d.error), DecapOutcome::Decoded { iterations: d.iterations })
        }
        Ok(d) => (success_secret(ps, &d.error), DecapOutcome::WeightMismatch { weight: d.error.weight() }),
        Err(_) => (success_secret(ps, &ErrorVector::zero(ps.n0, ps.p)), DecapOutcome::DecodingFailure),
    };
    let accept = outcome.is_success();
    let mask = 0u8.wrapping_sub(accept as u8);
    let secret = candidate.0.iter().zip(&fallback.0).map(|(a, b)| (a & mask) | (b & !mask)).collect();
    Decapsulation { secret: SharedSecret(secret), outcome }
}

/// Recovers the shared secret. Never fails: malformed or undecodable
/// ciphertexts produce a pseudorandom secret bound to the key.
pub fn decapsulate(sk: &PrivateKey, ct: &Ciphertext) -> SharedSecret {
    let decoder = QDecoder::new(sk.params());
    let mut ws = Workspace::new(sk.params());
    decapsulate_with(sk, ct, &decoder, &mut ws).secret
}

/// Decapsulates raw ciphertext bytes; only a wrong length is an error.
pub fn decapsulate_bytes(sk: &PrivateKey, bytes: &[u8]) -> Result<SharedSecret> {
    let ct = Ciphertext::from_bytes(sk.params(), bytes)?;
    Ok(decapsulate(sk, &ct))
}
