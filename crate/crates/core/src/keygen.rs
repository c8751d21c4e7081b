//! Key generation: secret `H`, `Q` from a seed, public `M_l = L_{n0-1}^{-1} L`.

use std::fmt;

use crate::error::{Error, Result};
use crate::params::ParamSet;
use crate::ring::{RingElement, SparseRingElement};
use crate::rng::{sample_sparse, Drbg, Seed};
use crate::vector::ErrorVector;

/// Fresh `H`/`Q` draws allowed before giving up on an invertible `L_{n0-1}`.
pub const MAX_KEYGEN_ATTEMPTS: usize = 16;

const KEYGEN_DOMAIN: &[u8] = b"ledakem/keygen";
const FAILURE_DOMAIN: &[u8] = b"ledakem/failure-secret";

/// Expanded private key.
///
/// Only the seed is ever serialized; everything else is recomputed from it.
#[derive(Clone)]
pub struct PrivateKey {
    params: ParamSet,
    seed: Seed,
    h: Vec<SparseRingElement>,
    q: Vec<Vec<SparseRingElement>>,
    l: Vec<SparseRingElement>,
    l_last: RingElement,
    l_last_inverse: RingElement,
    failure_secret: Vec<u8>,
    attempts: usize,
}

#[derive(Clone, PartialEq)]
pub struct PublicKey {
    params: ParamSet,
    blocks: Vec<RingElement>,
}

/// Derives the full private key from its seed.
pub fn expand_private(ps: &ParamSet, seed: &Seed) -> Result<PrivateKey> {
    ps.validate().map_err(Error::InvalidParams)?;
    if seed.as_bytes().len() != ps.seed_bytes() {
        return Err(Error::SeedLength { expected: ps.seed_bytes(), actual: seed.as_bytes().len() });
    }
    let (p, n0) = (ps.p, ps.n0);
    let w = ps.weight_matrix();
    let mut drbg = Drbg::with_domain(KEYGEN_DOMAIN, seed.as_bytes());

    for attempt in 1..=MAX_KEYGEN_ATTEMPTS {
        let h: Vec<_> = (0..n0).map(|_| sample_sparse(&mut drbg, p, ps.dv)).collect();
        let q: Vec<Vec<_>> =
            (0..n0).map(|i| (0..n0).map(|j| sample_sparse(&mut drbg, p, w.get(i, j))).collect()).collect();
        let l: Vec<_> = (0..n0)
            .map(|j| {
                (0..n0).fold(SparseRingElement::zero(p), |acc, i| {
                    acc.add(&h[i].mul_sparse(&q[i][j]).unwrap()).unwrap()
                })
            })
            .collect();
        let l_last = l[n0 - 1].to_dense();
        let l_last_inverse = match l_last.inverse() {
            Ok(inv) => inv,
            Err(Error::NotInvertible) => continue,
            Err(e) => return Err(e),
        };
        let mut failure_secret = vec![0u8; ps.secret_bytes()];
        Drbg::with_domain(FAILURE_DOMAIN, seed.as_bytes()).fill_bytes(&mut failure_secret);
        return Ok(PrivateKey {
            params: ps.clone(),
            seed: seed.clone(),
            h,
            q,
            l,
            l_last,
            l_last_inverse,
            failure_secret,
            attempts: attempt,
        });
    }
    Err(Error::KeyGeneration { attempts: MAX_KEYGEN_ATTEMPTS })
}

/// Generates the keypair determined by `seed`.
pub fn gen_keypair(ps: &ParamSet, seed: &Seed) -> Result<(PrivateKey, PublicKey)> {
    let sk = expand_private(ps, seed)?;
    let pk = sk.public_key();
    Ok((sk, pk))
}

impl PrivateKey {
    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    /// Blocks `H_0 .. H_{n0-1}`.
    pub fn h(&self) -> &[SparseRingElement] {
        &self.h
    }

    /// Block `Q_{i,j}`.
    pub fn q(&self, i: usize, j: usize) -> &SparseRingElement {
        &self.q[i][j]
    }

    /// Blocks of `L = HQ`.
    pub fn l(&self) -> &[SparseRingElement] {
        &self.l
    }

    pub fn l_last(&self) -> &RingElement {
        &self.l_last
    }

    pub fn l_last_inverse(&self) -> &RingElement {
        &self.l_last_inverse
    }

    pub(crate) fn failure_secret(&self) -> &[u8] {
        &self.failure_secret
    }

    /// How many `H`/`Q` draws expansion needed (almost always 1).
    pub fn attempts(&self) -> usize {
        self.attempts
    }

    pub fn public_key(&self) -> PublicKey {
        let n0 = self.params.n0;
        let blocks = self.l[..n0 - 1].iter().map(|lj| lj.mul_dense(&self.l_last_inverse).unwrap()).collect();
        PublicKey { params: self.params.clone(), blocks }
    }

    /// The private syndrome `H Q e^T` of an error vector.
    pub fn private_syndrome(&self, e: &ErrorVector) -> RingElement {
        let p = self.params.p;
        let mut acc = RingElement::zero(p);
        for (j, lj) in self.l.iter().enumerate() {
            let ej = e.block(j);
            if ej.is_zero() {
                continue;
            }
            acc.add_assign(&lj.transpose().mul_sparse(&ej).unwrap().to_dense()).unwrap();
        }
        acc
    }
}

impl fmt::Debug for PrivateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrivateKey").field("params", &self.params.id()).finish_non_exhaustive()
    }
}

impl PublicKey {
    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    /// Blocks `M_0 .. M_{n0-2}`; the identity block is implicit.
    pub fn blocks(&self) -> &[RingElement] {
        &self.blocks
    }

    /// Concatenated blocks, each padded to whole 64-bit words.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.blocks.iter().flat_map(|b| b.to_le_bytes()).collect()
    }

    pub fn from_bytes(ps: &ParamSet, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != ps.public_key_bytes() {
            return Err(Error::format(format!(
                "public key must be {} bytes, got {}",
                ps.public_key_bytes(),
                bytes.len()
            )));
        }
        let blocks = bytes
            .chunks_exact(ps.block_bytes())
            .map(|c| RingElement::from_le_bytes(ps.p, c, true))
            .collect::<Result<_>>()?;
        Ok(Self { params: ps.clone(), blocks })
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PublicKey").field("params", &self.params.id()).field("blocks", &self.blocks.len()).finish()
    }
}

/// Byte length of [`PublicKey::to_bytes`].
pub fn public_key_bytes(pk: &PublicKey) -> Vec<u8> {
    pk.to_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{registry, toy29, toy_params};

    fn seed(ps: &ParamSet, tag: u8) -> Seed {
        Seed::for_params(ps, &vec![tag; ps.seed_bytes()]).unwrap()
    }

    #[test]
    fn toy_key_relations() {
        let ps = toy29();
        for tag in 0..50 {
            let (sk, pk) = gen_keypair(&ps, &seed(&ps, tag)).unwrap();
            let n0 = ps.n0;
            assert!(sk.l_last().mul(sk.l_last_inverse()).unwrap().is_one());
            for j in 0..n0 - 1 {
                let back = sk.l_last().mul(&pk.blocks()[j]).unwrap();
                assert_eq!(back, sk.l()[j].to_dense());
            }
            for (j, lj) in sk.l().iter().enumerate() {
                assert!(lj.weight() <= ps.m() * ps.dv);
                let recomputed = (0..n0).fold(RingElement::zero(ps.p), |acc, i| {
                    acc.add(&sk.h()[i].to_dense().mul(&sk.q(i, j).to_dense()).unwrap()).unwrap()
                });
                assert_eq!(recomputed, lj.to_dense());
            }
            assert_eq!(sk.l_last().weight() % 2, 1);
        }
    }

    #[test]
    fn block_weights_follow_weight_matrix() {
        let ps = toy_params(83, 3, 3, &[2, 2, 1], 3).unwrap();
        let (sk, _) = gen_keypair(&ps, &seed(&ps, 9)).unwrap();
        let w = ps.weight_matrix();
        for i in 0..3 {
            assert_eq!(sk.h()[i].weight(), ps.dv);
            for j in 0..3 {
                assert_eq!(sk.q(i, j).weight(), w.get(i, j));
            }
            assert_eq!((0..3).map(|j| sk.q(i, j).weight()).sum::<usize>(), ps.m());
            assert_eq!((0..3).map(|j| sk.q(j, i).weight()).sum::<usize>(), ps.m());
        }
    }

    #[test]
    fn determinism() {
        let ps = toy29();
        let (a, pa) = gen_keypair(&ps, &seed(&ps, 1)).unwrap();
        let (b, pb) = gen_keypair(&ps, &seed(&ps, 1)).unwrap();
        assert_eq!(pa, pb);
        assert_eq!(a.h(), b.h());
        assert_eq!(a.failure_secret(), b.failure_secret());
        let (_, pc) = gen_keypair(&ps, &seed(&ps, 2)).unwrap();
        assert_ne!(pa, pc);
    }

    #[test]
    fn seed_length_is_checked() {
        let ps = toy29();
        let bad = Seed::new(crate::params::Category::TwoThree, &[0; 32]).unwrap();
        assert!(matches!(expand_private(&ps, &bad), Err(Error::SeedLength { .. })));
    }

    #[test]
    fn public_key_sizes() {
        let expected = [3480, 4688, 6408, 7200, 10384, 13152, 12384, 18016, 22704];
        for (ps, want) in registry().iter().zip(expected) {
            assert_eq!(ps.public_key_bytes(), want, "{}", ps.id());
        }
    }

    #[test]
    fn public_key_bytes_round_trip() {
        let ps = toy_params(67, 3, 3, &[2, 2, 1], 3).unwrap();
        let (_, pk) = gen_keypair(&ps, &seed(&ps, 4)).unwrap();
        let bytes = public_key_bytes(&pk);
        assert_eq!(bytes.len(), 2 * 16);
        assert_eq!(PublicKey::from_bytes(&ps, &bytes).unwrap(), pk);
        assert!(PublicKey::from_bytes(&ps, &bytes[1..]).is_err());
        let mut dirty = bytes.clone();
        dirty[15] |= 0x80;
        assert!(PublicKey::from_bytes(&ps, &dirty).is_err());
    }

    #[test]
    fn private_syndrome_matches_h_q_product() {
        let ps = toy29();
        let (sk, _) = gen_keypair(&ps, &seed(&ps, 3)).unwrap();
        let e = ErrorVector::new(2, 29, vec![4, 33, 50]).unwrap();
        // H Q e^T, computed through e' = e Q^T then H e'^T.
        let mut s = RingElement::zero(29);
        for i in 0..2 {
            let mut ei = RingElement::zero(29);
            for j in 0..2 {
                ei.add_assign(&sk.q(i, j).to_dense().transpose().mul(&e.block(j).to_dense()).unwrap()).unwrap();
            }
            s.add_assign(&sk.h()[i].to_dense().transpose().mul(&ei).unwrap()).unwrap();
        }
        assert_eq!(sk.private_syndrome(&e), s);
    }

    /// Rank over GF(2) of rows packed into `u128`s.
    fn rank(mut rows: Vec<u128>) -> usize {
        let mut rank = 0;
        for bit in 0..128 {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else { continue };
            rows.swap(rank, pivot);
            let pr = rows[rank];
            for r in 0..rows.len() {
                if r != rank && rows[r] >> bit & 1 == 1 {
                    rows[r] ^= pr;
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn q_has_full_rank_at_toy_scale() {
        let ps = toy29();
        let (p, n0) = (ps.p, ps.n0);
        for tag in 0..100u8 {
            let sk = expand_private(&ps, &Seed::derive(ps.category, b"rank", &[tag])).unwrap();
            // Row r of block (i, j) is q_ij shifted right by r.
            let mut rows = vec![0u128; n0 * p];
            for i in 0..n0 {
                for j in 0..n0 {
                    for &k in sk.q(i, j).positions() {
                        for r in 0..p {
                            rows[i * p + r] ^= 1u128 << (j * p + (k as usize + r) % p);
                        }
                    }
                }
            }
            assert_eq!(rank(rows), n0 * p, "seed tag {tag}");
        }
    }

    #[test]
    fn expanded_key_size() {
        let ps = crate::params::lookup(crate::params::Category::One, 2).unwrap();
        assert_eq!(ps.expanded_private_key_bits(), 720);
    }
}
