//! Parameter sets: the nine standard instances plus structural validation.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// NIST security category group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Category {
    One,
    TwoThree,
    FourFive,
}

impl Category {
    /// Shared-secret length in bytes (SHA-3 digest size).
    pub fn secret_bytes(self) -> usize {
        match self {
            Category::One => 32,
            Category::TwoThree => 48,
            Category::FourFive => 64,
        }
    }

    /// Length of the private-key seed at rest.
    pub fn seed_bytes(self) -> usize {
        match self {
            Category::One => 24,
            Category::TwoThree => 32,
            Category::FourFive => 40,
        }
    }

    /// One-byte tag used in file headers.
    pub fn tag(self) -> u8 {
        match self {
            Category::One => 1,
            Category::TwoThree => 3,
            Category::FourFive => 5,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(Category::One),
            3 => Some(Category::TwoThree),
            5 => Some(Category::FourFive),
            _ => None,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Category::One => "cat1",
            Category::TwoThree => "cat2-3",
            Category::FourFive => "cat4-5",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Informational security levels (log2 work factors) carried verbatim from
/// the published table. Never recomputed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecurityLevels {
    pub decoding_quantum: f64,
    pub key_recovery_quantum: f64,
    pub decoding_classical: f64,
    pub key_recovery_classical: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSet {
    pub category: Category,
    pub n0: usize,
    /// Circulant block size.
    pub p: usize,
    /// Column weight of each block of H.
    pub dv: usize,
    /// Block weights of the first block row of Q.
    pub m_vec: Vec<usize>,
    /// Number of intentional errors.
    pub t: usize,
    pub security: Option<SecurityLevels>,
    /// Target decoding failure rate (informational, 0 when unknown).
    pub dfr_target: f64,
    /// Decoder iteration cap.
    pub l_max: usize,
    /// Threshold margin; larger values flip fewer bits per iteration.
    pub delta: f64,
    /// Whether this set came from [`registry`].
    pub standard: bool,
}

/// Default decoder iteration cap.
pub const DEFAULT_L_MAX: usize = 5;

impl ParamSet {
    pub fn m(&self) -> usize {
        self.m_vec.iter().sum()
    }

    /// Code length `n0 * p`.
    pub fn n(&self) -> usize {
        self.n0 * self.p
    }

    pub fn secret_bytes(&self) -> usize {
        self.category.secret_bytes()
    }

    pub fn seed_bytes(&self) -> usize {
        self.category.seed_bytes()
    }

    /// Bits used to store one sparse index: `ceil(log2 p)`.
    pub fn index_bits(&self) -> usize {
        ceil_log2(self.p)
    }

    /// Size in bits of the expanded private key, `n0 (dv + m) ceil(log2 p)`.
    pub fn expanded_private_key_bits(&self) -> usize {
        self.n0 * (self.dv + self.m()) * self.index_bits()
    }

    /// Bytes of one serialized circulant block (whole 64-bit words).
    pub fn block_bytes(&self) -> usize {
        crate::ring::RingElement::byte_len(self.p)
    }

    pub fn public_key_bytes(&self) -> usize {
        (self.n0 - 1) * self.block_bytes()
    }

    pub fn ciphertext_bytes(&self) -> usize {
        self.block_bytes()
    }

    /// The circulant block-weight matrix of Q: row `i` is `m_vec` rotated
    /// right by `i`.
    pub fn weight_matrix(&self) -> WeightMatrix {
        WeightMatrix::circulant(&self.m_vec)
    }

    pub fn id(&self) -> String {
        if self.standard {
            format!("{}-n{}", self.category, self.n0)
        } else {
            format!("toy-p{}-n{}", self.p, self.n0)
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_l_max(mut self, l_max: usize) -> Self {
        self.l_max = l_max;
        self
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        if !(2..=4).contains(&self.n0) {
            v.push(Violation::BlockCount);
        }
        if self.m_vec.len() != self.n0 || self.m_vec.contains(&0) {
            v.push(Violation::WeightVector);
        }
        if self.p <= 2 || !is_prime(self.p as u64) {
            v.push(Violation::Primality);
        } else if multiplicative_order(2, self.p as u64) != self.p as u64 - 1 {
            v.push(Violation::OrderOfTwo);
        }
        if self.dv.is_multiple_of(2) {
            v.push(Violation::ColumnWeightParity);
        }
        let m = self.m();
        if m.is_multiple_of(2) {
            v.push(Violation::QWeightParity);
        }
        if m * self.dv >= self.p {
            v.push(Violation::LWeightBound);
        }
        if self.m_vec.len() == self.n0 && (1..=4).contains(&self.n0) {
            let perm = self.weight_matrix().permanent();
            if perm.is_multiple_of(2) {
                v.push(Violation::PermanentParity);
            }
            if perm >= self.p as u64 {
                v.push(Violation::PermanentBound);
            }
        }
        if self.t == 0 || self.t >= self.n() {
            v.push(Violation::ErrorWeight);
        }
        if self.l_max == 0 {
            v.push(Violation::IterationCap);
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            v.push(Violation::Margin);
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }
}

/// A rule that a parameter set breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    BlockCount,
    WeightVector,
    Primality,
    OrderOfTwo,
    ColumnWeightParity,
    QWeightParity,
    LWeightBound,
    PermanentParity,
    PermanentBound,
    ErrorWeight,
    IterationCap,
    Margin,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::BlockCount => "n0 must be 2, 3 or 4",
            Violation::WeightVector => "m_vec must have n0 positive entries",
            Violation::Primality => "p must be an odd prime",
            Violation::OrderOfTwo => "ord_p(2) must equal p - 1",
            Violation::ColumnWeightParity => "dv must be odd",
            Violation::QWeightParity => "m must be odd",
            Violation::LWeightBound => "m * dv must be below p",
            Violation::PermanentParity => "permanent of w(Q) must be odd",
            Violation::PermanentBound => "permanent of w(Q) must be below p",
            Violation::ErrorWeight => "t must satisfy 0 < t < n0 * p",
            Violation::IterationCap => "l_max must be positive",
            Violation::Margin => "delta must be finite and non-negative",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightMatrix {
    rows: Vec<Vec<usize>>,
}

impl WeightMatrix {
    pub fn circulant(first_row: &[usize]) -> Self {
        let n = first_row.len();
        let rows = (0..n).map(|i| (0..n).map(|j| first_row[(j + n - i) % n]).collect()).collect();
        Self { rows }
    }

    pub fn from_rows(rows: Vec<Vec<usize>>) -> Self {
        assert!(rows.iter().all(|r| r.len() == rows.len()), "weight matrix must be square");
        Self { rows }
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.rows[i][j]
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Permanent by full expansion over all permutations (n <= 4).
    pub fn permanent(&self) -> u64 {
        let n = self.rows.len();
        assert!(n <= 4, "permanent expansion limited to 4x4");
        let mut cols: Vec<usize> = (0..n).collect();
        let mut total = 0u64;
        permute(&mut cols, 0, &mut |perm| {
            total += perm.iter().enumerate().map(|(i, &j)| self.rows[i][j] as u64).product::<u64>();
        });
        total
    }
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

pub(crate) fn ceil_log2(x: usize) -> usize {
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u64 % modulus;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (acc as u128 * base as u128 % modulus as u128) as u64;
        }
        base = (base as u128 * base as u128 % modulus as u128) as u64;
        exp >>= 1;
    }
    acc
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Multiplicative order of `a` modulo the prime `p`.
pub fn multiplicative_order(a: u64, p: u64) -> u64 {
    let mut order = p - 1;
    for q in prime_factors(p - 1) {
        while order.is_multiple_of(q) && pow_mod(a, order / q, p) == 1 {
            order /= q;
        }
    }
    order
}

struct Row {
    category: Category,
    n0: usize,
    p: usize,
    dv: usize,
    m_vec: &'static [usize],
    t: usize,
    sl: [f64; 4],
    dfr: f64,
    delta: f64,
}

// Threshold margins: for each set, the largest value in {0, 10, 20, 30} whose
// trial runs showed no failure and at most about 1% of decodes needing
// `l_max` iterations.
const TABLE: [Row; 9] = [
    Row { category: Category::One, n0: 2, p: 27779, dv: 17, m_vec: &[4, 3], t: 224, sl: [135.43, 134.84, 217.45, 223.66], dfr: 8.3e-9, delta: 30.0 },
    Row { category: Category::One, n0: 3, p: 18701, dv: 19, m_vec: &[3, 2, 2], t: 141, sl: [135.63, 133.06, 216.42, 219.84], dfr: 1e-9, delta: 10.0 },
    Row { category: Category::One, n0: 4, p: 17027, dv: 21, m_vec: &[4, 1, 1, 1], t: 112, sl: [136.11, 139.29, 216.86, 230.61], dfr: 1e-9, delta: 30.0 },
    Row { category: Category::TwoThree, n0: 2, p: 57557, dv: 17, m_vec: &[6, 5], t: 349, sl: [200.47, 204.84, 341.52, 358.16], dfr: 1e-8, delta: 0.0 },
    Row { category: Category::TwoThree, n0: 3, p: 41507, dv: 19, m_vec: &[3, 4, 4], t: 220, sl: [200.44, 200.95, 341.61, 351.57], dfr: 1e-8, delta: 20.0 },
    Row { category: Category::TwoThree, n0: 4, p: 35027, dv: 17, m_vec: &[4, 3, 3, 3], t: 175, sl: [200.41, 201.40, 343.36, 351.96], dfr: 1e-8, delta: 30.0 },
    Row { category: Category::FourFive, n0: 2, p: 99053, dv: 19, m_vec: &[7, 6], t: 474, sl: [265.38, 267.00, 467.24, 478.67], dfr: 1e-8, delta: 10.0 },
    Row { category: Category::FourFive, n0: 3, p: 72019, dv: 19, m_vec: &[7, 4, 4], t: 301, sl: [265.70, 270.18, 471.67, 484.48], dfr: 1e-8, delta: 20.0 },
    Row { category: Category::FourFive, n0: 4, p: 60509, dv: 23, m_vec: &[4, 3, 3, 3], t: 239, sl: [265.48, 268.03, 473.38, 480.73], dfr: 1e-8, delta: 20.0 },
];

/// The nine standard parameter sets, in table order.
pub fn registry() -> Vec<ParamSet> {
    TABLE
        .iter()
        .map(|r| ParamSet {
            category: r.category,
            n0: r.n0,
            p: r.p,
            dv: r.dv,
            m_vec: r.m_vec.to_vec(),
            t: r.t,
            security: Some(SecurityLevels {
                decoding_quantum: r.sl[0],
                key_recovery_quantum: r.sl[1],
                decoding_classical: r.sl[2],
                key_recovery_classical: r.sl[3],
            }),
            dfr_target: r.dfr,
            l_max: DEFAULT_L_MAX,
            delta: r.delta,
            standard: true,
        })
        .collect()
}

/// Looks up a standard set by `(category, n0)`.
pub fn lookup(category: Category, n0: usize) -> Option<ParamSet> {
    registry().into_iter().find(|ps| ps.category == category && ps.n0 == n0)
}

impl FromStr for ParamSet {
    type Err = Error;

    /// Accepts `cat1-n2`, `cat2-3-n4`, `cat4-5-n3` and the short forms
    /// `cat3-nX` / `cat5-nX`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownParams(s.to_string());
        let lower = s.trim().to_ascii_lowercase();
        let (cat, n0) = lower.rsplit_once("-n").ok_or_else(unknown)?;
        let n0: usize = n0.parse().map_err(|_| unknown())?;
        let category = match cat {
            "cat1" => Category::One,
            "cat2-3" | "cat3" | "cat2" => Category::TwoThree,
            "cat4-5" | "cat5" | "cat4" => Category::FourFive,
            _ => return Err(unknown()),
        };
        lookup(category, n0).ok_or_else(unknown)
    }
}

/// A small, non-standard parameter set for desk-scale testing.
///
/// Uses category 1 sizes for seeds and secrets. Fails if any structural rule
/// is violated.
pub fn toy_params(p: usize, n0: usize, dv: usize, m_vec: &[usize], t: usize) -> Result<ParamSet> {
    let ps = ParamSet {
        category: Category::One,
        n0,
        p,
        dv,
        m_vec: m_vec.to_vec(),
        t,
        security: None,
        dfr_target: 0.0,
        l_max: DEFAULT_L_MAX,
        delta: 0.0,
        standard: false,
    };
    ps.validate().map_err(Error::InvalidParams)?;
    Ok(ps)
}

/// The `p = 29` toy set used throughout the tests.
pub fn toy29() -> ParamSet {
    toy_params(29, 2, 3, &[2, 1], 2).expect("toy set is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_rows() {
        let reg = registry();
        assert_eq!(reg.len(), 9);
        let c1 = lookup(Category::One, 2).unwrap();
        assert_eq!((c1.p, c1.dv, c1.m_vec.as_slice(), c1.t), (27779, 17, &[4, 3][..], 224));
        let c3 = lookup(Category::TwoThree, 4).unwrap();
        assert_eq!((c3.p, c3.dv, c3.m_vec.as_slice(), c3.t), (35027, 17, &[4, 3, 3, 3][..], 175));
        let c5 = lookup(Category::FourFive, 2).unwrap();
        assert_eq!((c5.p, c5.dv, c5.m_vec.as_slice(), c5.t), (99053, 19, &[7, 6][..], 474));
        assert_eq!(c1.security.unwrap().decoding_quantum, 135.43);
        assert_eq!(c5.security.unwrap().key_recovery_classical, 478.67);
    }

    #[test]
    fn every_registry_entry_validates() {
        for ps in registry() {
            assert_eq!(ps.validate(), Ok(()), "{}", ps.id());
            let perm = ps.weight_matrix().permanent();
            assert!(perm % 2 == 1 && perm < ps.p as u64);
            assert!(ps.m() * ps.dv % 2 == 1 && ps.m() * ps.dv < ps.p);
            assert_eq!(ps.secret_bytes(), [32, 48, 64][ps.category.tag() as usize / 2]);
        }
    }

    #[test]
    fn permanents() {
        assert_eq!(WeightMatrix::from_rows(vec![vec![1, 0], vec![0, 1]]).permanent(), 1);
        assert_eq!(WeightMatrix::circulant(&[4, 3]).permanent(), 25);
        assert_eq!(WeightMatrix::circulant(&[3, 2, 2]).permanent(), 27 + 8 + 8 + 3 * 3 * 2 * 2);
    }

    #[test]
    fn weight_matrix_rows_and_columns_sum_to_m() {
        for ps in registry() {
            let w = ps.weight_matrix();
            for i in 0..ps.n0 {
                assert_eq!((0..ps.n0).map(|j| w.get(i, j)).sum::<usize>(), ps.m());
                assert_eq!((0..ps.n0).map(|j| w.get(j, i)).sum::<usize>(), ps.m());
            }
            assert_eq!(w.rows()[1][0], *ps.m_vec.last().unwrap());
        }
    }

    #[test]
    fn orders() {
        assert_eq!(multiplicative_order(2, 29), 28);
        assert_eq!(multiplicative_order(2, 13), 12);
        assert_eq!(multiplicative_order(2, 31), 5);
        assert_eq!(multiplicative_order(2, 7), 3);
    }

    #[test]
    fn toy_sets() {
        let t = toy29();
        assert_eq!(t.validate(), Ok(()));
        assert_eq!(t.m(), 3);
        assert!(toy_params(13, 2, 3, &[2, 1], 2).is_ok());
        let err = toy_params(31, 2, 3, &[2, 1], 2).unwrap_err();
        assert!(matches!(err, Error::InvalidParams(ref v) if v == &[Violation::OrderOfTwo]));
    }

    #[test]
    fn violations_are_named() {
        let mut ps = lookup(Category::One, 2).unwrap();
        ps.p = 27780;
        assert!(ps.validate().unwrap_err().contains(&Violation::Primality));
        let mut ps = toy29();
        ps.dv = 4;
        ps.m_vec = vec![2, 2];
        let v = ps.validate().unwrap_err();
        assert!(v.contains(&Violation::ColumnWeightParity));
        assert!(v.contains(&Violation::QWeightParity));
        assert!(v.contains(&Violation::PermanentParity));
        let mut ps = toy29();
        ps.dv = 11;
        assert_eq!(ps.validate().unwrap_err(), vec![Violation::LWeightBound]);
        let mut ps = toy29();
        ps.t = 58;
        assert_eq!(ps.validate().unwrap_err(), vec![Violation::ErrorWeight]);
    }

    #[test]
    fn parse_ids() {
        for ps in registry() {
            assert_eq!(ps.id().parse::<ParamSet>().unwrap(), ps);
        }
        assert_eq!("cat5-n3".parse::<ParamSet>().unwrap().p, 72019);
        assert_eq!("CAT3-N2".parse::<ParamSet>().unwrap().p, 57557);
        assert!("cat1-n5".parse::<ParamSet>().is_err());
        assert!("bogus".parse::<ParamSet>().is_err());
    }

    #[test]
    fn derived_sizes() {
        let ps = lookup(Category::One, 2).unwrap();
        assert_eq!(ps.index_bits(), 15);
        assert_eq!(ps.expanded_private_key_bits(), 720);
        assert_eq!(ps.public_key_bytes(), 3480);
        assert_eq!(ceil_log2(29), 5);
        assert_eq!(ceil_log2(32), 5);
        assert_eq!(ceil_log2(33), 6);
    }
}
