//! Seed-driven randomness and key derivation.
//!
//! The DRBG is SHAKE256 over a domain label and the seed, read as a bit
//! stream: bit `i` of the stream is bit `i % 8` of output byte `i / 8`.
//! Fixed-weight sampling draws `ceil(log2 bound)`-bit integers from that
//! stream and rejects values out of range or already chosen.

use std::fmt;

use sha3::digest::{Digest, ExtendableOutput, Update, XofReader};
use sha3::{Sha3_256, Sha3_384, Sha3_512, Shake256, Shake256Reader};

use crate::error::{Error, Result};
use crate::params::{ceil_log2, Category, ParamSet};
use crate::ring::SparseRingElement;
use crate::vector::ErrorVector;

/// Private-key seed. Its length is fixed by the security category.
#[derive(Clone, PartialEq, Eq)]
pub struct Seed {
    bytes: Vec<u8>,
}

impl Seed {
    pub fn new(category: Category, bytes: &[u8]) -> Result<Self> {
        let expected = category.seed_bytes();
        if bytes.len() != expected {
            return Err(Error::SeedLength { expected, actual: bytes.len() });
        }
        Ok(Self { bytes: bytes.to_vec() })
    }

    pub fn for_params(ps: &ParamSet, bytes: &[u8]) -> Result<Self> {
        Self::new(ps.category, bytes)
    }

    /// Deterministically derives a seed of the right length from arbitrary
    /// material, e.g. a master seed and a trial counter.
    pub fn derive(category: Category, label: &[u8], material: &[u8]) -> Self {
        let mut bytes = vec![0u8; category.seed_bytes()];
        Drbg::with_domain(label, material).fill_bytes(&mut bytes);
        Self { bytes }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({} bytes)", self.bytes.len())
    }
}

const RATE: usize = 136;

/// Deterministic bit generator.
pub struct Drbg {
    reader: Shake256Reader,
    block: [u8; RATE],
    pos: usize,
    acc: u128,
    acc_bits: u32,
}

impl Drbg {
    pub fn new(seed: &[u8]) -> Self {
        let mut h = Shake256::default();
        h.update(seed);
        Self::from_hasher(h)
    }

    /// Stream bound to a purpose label: SHAKE256(len(label) || label || material).
    pub fn with_domain(label: &[u8], material: &[u8]) -> Self {
        assert!(label.len() < 256);
        let mut h = Shake256::default();
        h.update(&[label.len() as u8]);
        h.update(label);
        h.update(material);
        Self::from_hasher(h)
    }

    fn from_hasher(h: Shake256) -> Self {
        Self { reader: h.finalize_xof(), block: [0; RATE], pos: RATE, acc: 0, acc_bits: 0 }
    }

    fn next_byte(&mut self) -> u8 {
        if self.pos == RATE {
            self.reader.read(&mut self.block);
            self.pos = 0;
        }
        let b = self.block[self.pos];
        self.pos += 1;
        b
    }

    /// Next `k <= 64` bits of the stream; the first bit read is bit 0 of the
    /// result.
    pub fn next_bits(&mut self, k: u32) -> u64 {
        assert!(k <= 64);
        if k == 0 {
            return 0;
        }
        while self.acc_bits < k {
            self.acc |= (self.next_byte() as u128) << self.acc_bits;
            self.acc_bits += 8;
        }
        let out = (self.acc & ((1u128 << k) - 1)) as u64;
        self.acc >>= k;
        self.acc_bits -= k;
        out
    }

    /// Fills `out` with the next `8 * out.len()` bits.
    pub fn fill_bytes(&mut self, out: &mut [u8]) {
        for b in out {
            *b = self.next_bits(8) as u8;
        }
    }

    /// Uniform integer in `[0, bound)` by rejection on `ceil(log2 bound)` bits.
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        if bound == 1 {
            return 0;
        }
        let bits = ceil_log2(bound) as u32;
        loop {
            let x = self.next_bits(bits) as usize;
            if x < bound {
                return x;
            }
        }
    }

    /// `w` distinct values in `[0, bound)`, sorted.
    fn distinct(&mut self, bound: usize, w: usize) -> Vec<u32> {
        assert!(w < bound || (w == 0 && bound == 0), "weight {w} must be below {bound}");
        let mut chosen: Vec<u32> = Vec::with_capacity(w);
        while chosen.len() < w {
            let x = self.below(bound) as u32;
            if let Err(at) = chosen.binary_search(&x) {
                chosen.insert(at, x);
            }
        }
        chosen
    }
}

/// Uniformly random ring element of weight exactly `w` (requires `w < p`).
pub fn sample_sparse(drbg: &mut Drbg, p: usize, w: usize) -> SparseRingElement {
    SparseRingElement::new(p, drbg.distinct(p, w)).expect("sorted distinct positions")
}

/// Uniformly random error vector of length `n0 * p` and weight `t`.
pub fn sample_error(drbg: &mut Drbg, n0: usize, p: usize, t: usize) -> ErrorVector {
    ErrorVector::new(n0, p, drbg.distinct(n0 * p, t)).expect("sorted distinct positions")
}

/// SHA-3 digest of `input` with a `out_len`-byte output (32, 48 or 64).
pub fn kdf(input: &[u8], out_len: usize) -> Vec<u8> {
    kdf_parts(&[input], out_len)
}

pub(crate) fn kdf_parts(parts: &[&[u8]], out_len: usize) -> Vec<u8> {
    fn run<D: Digest>(parts: &[&[u8]]) -> Vec<u8> {
        let mut d = D::new();
        for p in parts {
            Digest::update(&mut d, p);
        }
        d.finalize().to_vec()
    }
    match out_len {
        32 => run::<Sha3_256>(parts),
        48 => run::<Sha3_384>(parts),
        64 => run::<Sha3_512>(parts),
        _ => panic!("unsupported KDF output length {out_len}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lengths() {
        assert!(Seed::new(Category::One, &[0; 24]).is_ok());
        assert!(matches!(
            Seed::new(Category::TwoThree, &[0; 24]),
            Err(Error::SeedLength { expected: 32, actual: 24 })
        ));
        assert_eq!(Seed::derive(Category::FourFive, b"x", b"y").as_bytes().len(), 40);
        assert_eq!(format!("{:?}", Seed::new(Category::One, &[7; 24]).unwrap()), "Seed(24 bytes)");
    }

    #[test]
    fn deterministic_stream() {
        let mut a = Drbg::new(b"seed");
        let mut b = Drbg::new(b"seed");
        let mut x = [0u8; 128];
        let mut y = [0u8; 128];
        a.fill_bytes(&mut x);
        b.fill_bytes(&mut y);
        assert_eq!(x, y);
    }

    #[test]
    fn different_seeds_differ() {
        let mut diff = 0;
        for i in 0..64u8 {
            let a = Drbg::new(&[i, 0]).next_bits(64);
            let b = Drbg::new(&[i, 1]).next_bits(64);
            diff += (a ^ b).count_ones();
        }
        // 4096 independent fair bits: mean 2048, sd 32.
        assert!((1848..2248).contains(&diff), "{diff}");
    }

    #[test]
    fn slices_are_position_consistent() {
        let mut a = Drbg::new(b"abc");
        let lo = a.next_bits(64) as u128;
        let hi = a.next_bits(64) as u128;
        let mut b = Drbg::new(b"abc");
        let mut bytes = [0u8; 16];
        b.fill_bytes(&mut bytes);
        assert_eq!(lo | (hi << 64), u128::from_le_bytes(bytes));

        let mut c = Drbg::new(b"abc");
        let mut acc = 0u128;
        let mut at = 0;
        for k in [3, 13, 1, 29, 64, 18] {
            acc |= (c.next_bits(k) as u128) << at;
            at += k;
        }
        assert_eq!(acc, lo | (hi << 64));
    }

    #[test]
    fn xof_matches_standard_shake256() {
        // SHAKE256("") first 8 bytes.
        let mut d = Drbg::new(b"");
        let mut out = [0u8; 8];
        d.fill_bytes(&mut out);
        assert_eq!(hex::encode(out), "46b9dd2b0ba88d13");
    }

    #[test]
    fn sparse_sampling_edges() {
        let mut d = Drbg::new(b"edges");
        assert!(sample_sparse(&mut d, 29, 0).is_zero());
        let nearly = sample_sparse(&mut d, 29, 28);
        assert_eq!(nearly.weight(), 28);
        let e = sample_error(&mut d, 2, 29, 2);
        assert_eq!(e.weight(), 2);
        assert_eq!(sample_error(&mut d, 2, 29, 0).weight(), 0);
    }

    #[test]
    fn sparse_sampling_is_uniform() {
        // Chi-square over position counts, 10^4 draws of weight 3 at p = 29.
        let mut d = Drbg::new(b"chi2");
        let mut hist = [0u64; 29];
        for _ in 0..10_000 {
            for &k in sample_sparse(&mut d, 29, 3).positions() {
                hist[k as usize] += 1;
            }
        }
        let expected = 30_000.0 / 29.0;
        let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        // 28 degrees of freedom; 0.999 quantile is 56.9.
        assert!(chi2 < 56.9, "chi2 = {chi2}");
    }

    #[test]
    fn error_sampling_is_uniform() {
        let mut d = Drbg::new(b"chi2-e");
        let mut hist = [0u64; 58];
        for _ in 0..10_000 {
            for &k in sample_error(&mut d, 2, 29, 2).positions() {
                hist[k as usize] += 1;
            }
        }
        let expected = 20_000.0 / 58.0;
        let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        // 57 degrees of freedom; 0.999 quantile is 93.2.
        assert!(chi2 < 93.2, "chi2 = {chi2}");
    }

    #[test]
    fn sampling_never_repeats() {
        let mut d = Drbg::new(b"dups");
        for _ in 0..100_000 {
            let s = sample_sparse(&mut d, 31, 5);
            assert!(s.positions().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(s.weight(), 5);
        }
    }

    #[test]
    fn kdf_standard_vectors() {
        assert_eq!(
            hex::encode(kdf(b"", 32)),
            "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a"
        );
        assert_eq!(
            hex::encode(kdf(b"", 48)),
            "0c63a75b845e4f7d01107d852e4c2485c51a50aaaa94fc61995e71bbee983a2ac3713831264adb47fb6bd1e058d5f004"
        );
        assert_eq!(
            hex::encode(kdf(b"", 64)),
            "a69f73cca23a9ac5c8b567dc185a756e97c982164fe25859e0d1dcc1475c80a615b2123af1f5f94c11e3e9402c3ac558f500199d95b6d3e301758586281dcd26"
        );
        assert_eq!(kdf(b"abc", 32), kdf(b"abc", 32));
        assert_eq!(kdf_parts(&[b"a", b"bc"], 48), kdf(b"abc", 48));
    }

    #[test]
    fn kdf_avalanche() {
        let mut d = Drbg::new(b"avalanche");
        let mut total = 0u32;
        for _ in 0..100 {
            let e = sample_error(&mut d, 2, 29, 2);
            let mut bytes = e.to_bytes();
            let a = kdf(&bytes, 32);
            let bit = d.below(58);
            bytes[bit / 8] ^= 1 << (bit % 8);
            let b = kdf(&bytes, 32);
            total += a.iter().zip(&b).map(|(x, y)| (x ^ y).count_ones()).sum::<u32>();
        }
        // 25600 bits, mean 12800, sd 80.
        let mean = total as f64 / 100.0;
        assert!((120.0..136.0).contains(&mean), "{mean}");
    }
}
