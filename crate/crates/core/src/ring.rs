//! Arithmetic in `F2[x] / (x^p + 1)`.
//!
//! Every `p x p` binary circulant matrix is identified with the polynomial
//! whose coefficients are the entries of its first row. Dense elements keep
//! the coefficient of `x^i` at bit `i % 64` of word `i / 64`; the bits above
//! `p` in the last word are always zero. Sparse elements keep the sorted list
//! of exponents with a nonzero coefficient.

use std::fmt;

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// `dst ^= src << shift`, dropping whatever falls off the end of `dst`.
pub(crate) fn xor_shl(dst: &mut [u64], src: &[u64], shift: usize) {
    let ws = shift / WORD_BITS;
    let bs = shift % WORD_BITS;
    if ws >= dst.len() {
        return;
    }
    let dst = &mut dst[ws..];
    let n = src.len().min(dst.len());
    if bs == 0 {
        for (d, s) in dst.iter_mut().zip(&src[..n]) {
            *d ^= *s;
        }
        return;
    }
    let mut carry = 0u64;
    for i in 0..n {
        let s = src[i];
        dst[i] ^= (s << bs) | carry;
        carry = s >> (WORD_BITS - bs);
    }
    if n < dst.len() {
        dst[n] ^= carry;
    }
}

/// `dst ^= src >> shift`, treating `src` as zero beyond its end.
pub(crate) fn xor_shr(dst: &mut [u64], src: &[u64], shift: usize) {
    let ws = shift / WORD_BITS;
    let bs = shift % WORD_BITS;
    if ws >= src.len() {
        return;
    }
    let src = &src[ws..];
    let n = src.len().min(dst.len());
    if bs == 0 {
        for (d, s) in dst.iter_mut().zip(&src[..n]) {
            *d ^= *s;
        }
        return;
    }
    for i in 0..n {
        let hi = if i + 1 < src.len() { src[i + 1] << (WORD_BITS - bs) } else { 0 };
        dst[i] ^= (src[i] >> bs) | hi;
    }
}

fn top_mask(p: usize) -> u64 {
    match p % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Degree of the polynomial in `w`, searching downwards from word `hint`.
fn degree_from(w: &[u64], hint: usize) -> Option<usize> {
    let mut i = hint.min(w.len().saturating_sub(1)) + 1;
    while i > 0 {
        i -= 1;
        if w[i] != 0 {
            return Some(i * WORD_BITS + (WORD_BITS - 1 - w[i].leading_zeros() as usize));
        }
    }
    None
}

fn check_same(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::RingMismatch { left: a, right: b })
    }
}

/// Bit-packed element of `F2[x] / (x^p + 1)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    p: usize,
    words: Vec<u64>,
}

impl RingElement {
    pub fn zero(p: usize) -> Self {
        assert!(p > 0, "ring size must be positive");
        Self { p, words: vec![0; words_for(p)] }
    }

    pub fn one(p: usize) -> Self {
        Self::monomial(p, 0)
    }

    /// `x^k`, with `k` reduced mod `p`.
    pub fn monomial(p: usize, k: usize) -> Self {
        let mut e = Self::zero(p);
        e.toggle(k % p);
        e
    }

    /// All-ones element `1 + x + ... + x^(p-1)`.
    pub fn all_ones(p: usize) -> Self {
        let mut e = Self { p, words: vec![u64::MAX; words_for(p)] };
        e.clear_padding();
        e
    }

    /// Sum of the monomials `x^k` for each `k` (reduced mod `p`); repeated
    /// exponents cancel.
    pub fn from_exponents<I: IntoIterator<Item = usize>>(p: usize, exps: I) -> Self {
        let mut e = Self::zero(p);
        for k in exps {
            e.toggle(k % p);
        }
        e
    }

    /// Builds an element from little-endian words. Padding bits must be zero.
    pub fn from_words(p: usize, words: Vec<u64>) -> Result<Self> {
        if words.len() != words_for(p) {
            return Err(Error::format(format!(
                "expected {} words for p = {p}, got {}",
                words_for(p),
                words.len()
            )));
        }
        let e = Self { p, words };
        if e.words[e.words.len() - 1] & !top_mask(p) != 0 {
            return Err(Error::format("nonzero padding bits"));
        }
        Ok(e)
    }

    /// Number of bytes in the serialized form: whole 64-bit words.
    pub fn byte_len(p: usize) -> usize {
        words_for(p) * 8
    }

    /// Parses the padded little-endian byte form. With `strict`, nonzero
    /// padding bits are rejected; otherwise they are discarded.
    pub fn from_le_bytes(p: usize, bytes: &[u8], strict: bool) -> Result<Self> {
        if bytes.len() != Self::byte_len(p) {
            return Err(Error::format(format!(
                "expected {} bytes for p = {p}, got {}",
                Self::byte_len(p),
                bytes.len()
            )));
        }
        let words = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut e = Self { p, words };
        let last = e.words.len() - 1;
        if e.words[last] & !top_mask(p) != 0 {
            if strict {
                return Err(Error::format("nonzero padding bits"));
            }
            e.clear_padding();
        }
        Ok(e)
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.words.iter().flat_map(|w| w.to_le_bytes()).collect()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn coefficient(&self, i: usize) -> bool {
        debug_assert!(i < self.p);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.p);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_one(&self) -> bool {
        self.words[0] == 1 && self.words[1..].iter().all(|&w| w == 0)
    }

    /// Exponents with a nonzero coefficient, in increasing order.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + b)
            })
        })
    }

    pub fn to_sparse(&self) -> SparseRingElement {
        SparseRingElement { p: self.p, positions: self.support().map(|i| i as u32).collect() }
    }

    fn clear_padding(&mut self) {
        let last = self.words.len() - 1;
        self.words[last] &= top_mask(self.p);
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &RingElement) -> Result<()> {
        check_same(self.p, other.p)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
        Ok(())
    }

    /// XORs `self * x^k` into `acc`.
    pub(crate) fn xor_rotated_into(&self, k: usize, acc: &mut [u64]) {
        debug_assert!(k < self.p);
        xor_shl(acc, &self.words, k);
        if k > 0 {
            xor_shr(acc, &self.words, self.p - k);
        }
    }

    /// `self * x^k`.
    pub fn rotate(&self, k: usize) -> RingElement {
        let mut out = RingElement::zero(self.p);
        self.xor_rotated_into(k % self.p, &mut out.words);
        out.clear_padding();
        out
    }

    /// Schoolbook shift-and-add product, reduced mod `x^p + 1`.
    pub fn mul(&self, other: &RingElement) -> Result<RingElement> {
        check_same(self.p, other.p)?;
        let p = self.p;
        let nw = self.words.len();
        let mut prod = vec![0u64; 2 * nw + 1];
        let mut shifted = vec![0u64; nw + 1];
        for bit in 0..WORD_BITS {
            if self.words.iter().all(|w| (w >> bit) & 1 == 0) {
                continue;
            }
            shifted.iter_mut().for_each(|w| *w = 0);
            xor_shl(&mut shifted, &other.words, bit);
            for (wi, w) in self.words.iter().enumerate() {
                if (w >> bit) & 1 == 1 {
                    for (d, s) in prod[wi..].iter_mut().zip(&shifted) {
                        *d ^= *s;
                    }
                }
            }
        }
        let mut out = RingElement { p, words: prod[..nw].to_vec() };
        out.clear_padding();
        xor_shr(&mut out.words, &prod, p);
        out.clear_padding();
        Ok(out)
    }

    /// Circulant transpose: the coefficient of `x^i` moves to `x^(p-i)`.
    pub fn transpose(&self) -> RingElement {
        let p = self.p;
        let mut out = RingElement::zero(p);
        for i in self.support() {
            out.toggle((p - i) % p);
        }
        out
    }

    /// Multiplicative inverse by the extended Euclidean algorithm against
    /// `x^p + 1`.
    pub fn inverse(&self) -> Result<RingElement> {
        let p = self.p;
        let cap = words_for(p + 1);
        let mut u = self.words.clone();
        u.resize(cap, 0);
        let mut v = vec![0u64; cap];
        v[0] = 1;
        v[p / WORD_BITS] |= 1 << (p % WORD_BITS);
        let mut g_u = vec![0u64; cap];
        g_u[0] = 1;
        let mut g_v = vec![0u64; cap];

        // Invariants: g_u * a = u and g_v * a = v (mod x^p + 1),
        // deg(g_u) + deg(v) <= p and deg(g_v) + deg(u) <= p.
        let Some(mut du) = degree_from(&u, cap - 1) else {
            return Err(Error::NotInvertible);
        };
        let mut dv = p;
        let mut dgu = 0usize;
        let mut dgv = 0usize;
        loop {
            if du == 0 {
                break;
            }
            if du < dv {
                std::mem::swap(&mut u, &mut v);
                std::mem::swap(&mut g_u, &mut g_v);
                std::mem::swap(&mut du, &mut dv);
                std::mem::swap(&mut dgu, &mut dgv);
            }
            let j = du - dv;
            xor_shl(&mut u[..du / WORD_BITS + 1], &v[..dv / WORD_BITS + 1], j);
            let g_top = (dgv + j).min(cap * WORD_BITS - 1);
            xor_shl(&mut g_u[..g_top / WORD_BITS + 1], &g_v[..dgv / WORD_BITS + 1], j);
            dgu = dgu.max(g_top);
            match degree_from(&u, du / WORD_BITS) {
                Some(d) => du = d,
                None => {
                    // u vanished: gcd is v.
                    if dv == 0 {
                        std::mem::swap(&mut g_u, &mut g_v);
                        break;
                    }
                    return Err(Error::NotInvertible);
                }
            }
        }

        // Fold the (at most one) coefficient of x^p back onto x^0.
        let mut out = RingElement { p, words: g_u[..words_for(p)].to_vec() };
        out.clear_padding();
        if (g_u[p / WORD_BITS] >> (p % WORD_BITS)) & 1 == 1 {
            out.toggle(0);
        }
        Ok(out)
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p <= 128 {
            let bits: String = (0..self.p).map(|i| if self.coefficient(i) { '1' } else { '0' }).collect();
            write!(f, "RingElement(p={}, {bits})", self.p)
        } else {
            write!(f, "RingElement(p={}, weight={})", self.p, self.weight())
        }
    }
}

/// Sparse element: strictly increasing exponents in `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseRingElement {
    p: usize,
    positions: Vec<u32>,
}

impl SparseRingElement {
    pub fn zero(p: usize) -> Self {
        Self { p, positions: Vec::new() }
    }

    pub fn one(p: usize) -> Self {
        Self { p, positions: vec![0] }
    }

    pub fn new(p: usize, positions: Vec<u32>) -> Result<Self> {
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSparse("positions not strictly increasing"));
        }
        if positions.last().is_some_and(|&x| x as usize >= p) {
            return Err(Error::InvalidSparse("position out of range"));
        }
        Ok(Self { p, positions })
    }

    /// Sum of `x^k` over the given exponents, reduced mod `p`, with
    /// pairwise cancellation of repeats.
    pub fn from_exponents<I: IntoIterator<Item = usize>>(p: usize, exps: I) -> Self {
        let mut all: Vec<u32> = exps.into_iter().map(|k| (k % p) as u32).collect();
        all.sort_unstable();
        let mut positions = Vec::with_capacity(all.len());
        let mut i = 0;
        while i < all.len() {
            let mut j = i;
            while j < all.len() && all[j] == all[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                positions.push(all[i]);
            }
            i = j;
        }
        Self { p, positions }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    pub fn weight(&self) -> usize {
        self.positions.len()
    }

    pub fn is_zero(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn to_dense(&self) -> RingElement {
        RingElement::from_exponents(self.p, self.positions.iter().map(|&k| k as usize))
    }

    pub fn transpose(&self) -> SparseRingElement {
        let p = self.p;
        let mut positions: Vec<u32> = self.positions.iter().map(|&i| ((p - i as usize) % p) as u32).collect();
        positions.sort_unstable();
        Self { p, positions }
    }

    pub fn add(&self, other: &SparseRingElement) -> Result<SparseRingElement> {
        check_same(self.p, other.p)?;
        let (a, b) = (&self.positions, &other.positions);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Ok(Self { p: self.p, positions: out })
    }

    /// Product with a dense element, as a sum of rotations of `dense`.
    pub fn mul_dense(&self, dense: &RingElement) -> Result<RingElement> {
        check_same(self.p, dense.p)?;
        let mut out = RingElement::zero(self.p);
        for &k in &self.positions {
            dense.xor_rotated_into(k as usize, &mut out.words);
        }
        out.clear_padding();
        Ok(out)
    }

    pub fn mul_sparse(&self, other: &SparseRingElement) -> Result<SparseRingElement> {
        check_same(self.p, other.p)?;
        let p = self.p;
        Ok(Self::from_exponents(
            p,
            self.positions
                .iter()
                .flat_map(|&a| other.positions.iter().map(move |&b| a as usize + b as usize)),
        ))
    }
}
