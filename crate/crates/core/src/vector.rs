use std::fmt;

use crate::error::{Error, Result};
use crate::ring::SparseRingElement;

/// Binary vector of length `n0 * p`, stored as its sorted support.
///
/// Position `j * p + i` is coefficient `i` of block `j`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ErrorVector {
    n0: usize,
    p: usize,
    positions: Vec<u32>,
}

impl ErrorVector {
    pub fn new(n0: usize, p: usize, positions: Vec<u32>) -> Result<Self> {
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSparse("positions not strictly increasing"));
        }
        if positions.last().is_some_and(|&x| x as usize >= n0 * p) {
            return Err(Error::InvalidSparse("position out of range"));
        }
        Ok(Self { n0, p, positions })
    }

    pub fn zero(n0: usize, p: usize) -> Self {
        Self { n0, p, positions: Vec::new() }
    }

    /// From a dense 0/1 byte-per-bit vector of length `n0 * p`.
    pub fn from_bits(n0: usize, p: usize, bits: &[u8]) -> Self {
        debug_assert_eq!(bits.len(), n0 * p);
        let positions = bits.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, _)| i as u32).collect();
        Self { n0, p, positions }
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    pub fn weight(&self) -> usize {
        self.positions.len()
    }

    pub fn len(&self) -> usize {
        self.n0 * self.p
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// The `j`-th length-`p` block as a ring element.
    pub fn block(&self, j: usize) -> SparseRingElement {
        let (lo, hi) = ((j * self.p) as u32, ((j + 1) * self.p) as u32);
        let positions = self.positions.iter().filter(|&&x| x >= lo && x < hi).map(|&x| x - lo).collect();
        SparseRingElement::new(self.p, positions).expect("block positions are sorted")
    }

    pub fn from_blocks(blocks: &[SparseRingElement]) -> Self {
        let p = blocks[0].p();
        let positions = blocks
            .iter()
            .enumerate()
            .flat_map(|(j, b)| b.positions().iter().map(move |&x| x + (j * p) as u32))
            .collect();
        Self { n0: blocks.len(), p, positions }
    }

    /// Canonical serialization: `n0 * p` bits, bit `i` at bit `i % 8` of byte
    /// `i / 8`, zero-padded to whole bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for &x in &self.positions {
            out[x as usize / 8] |= 1 << (x % 8);
        }
        out
    }

    /// Symmetric difference with another vector of the same shape.
    pub fn xor(&self, other: &ErrorVector) -> ErrorVector {
        let blocks: Vec<_> = (0..self.n0).map(|j| self.block(j).add(&other.block(j)).unwrap()).collect();
        Self::from_blocks(&blocks)
    }
}

impl fmt::Debug for ErrorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ErrorVector(n={}, weight={})", self.len(), self.weight())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_and_bytes() {
        let e = ErrorVector::new(2, 29, vec![0, 9, 28, 29, 57]).unwrap();
        assert_eq!(e.block(0).positions(), &[0, 9, 28]);
        assert_eq!(e.block(1).positions(), &[0, 28]);
        assert_eq!(ErrorVector::from_blocks(&[e.block(0), e.block(1)]), e);
        let bytes = e.to_bytes();
        assert_eq!(bytes.len(), 8);
        assert_eq!(bytes[0], 0b0000_0001);
        assert_eq!(bytes[1], 0b0000_0010);
        assert_eq!(bytes[7], 0b0000_0010);
        assert!(ErrorVector::new(2, 29, vec![58]).is_err());
        assert!(ErrorVector::new(2, 29, vec![3, 3]).is_err());
    }

    #[test]
    fn xor_cancels() {
        let a = ErrorVector::new(2, 29, vec![1, 40]).unwrap();
        let b = ErrorVector::new(2, 29, vec![1, 41]).unwrap();
        assert_eq!(a.xor(&b).positions(), &[40, 41]);
        assert!(a.xor(&a).is_empty());
    }
}
