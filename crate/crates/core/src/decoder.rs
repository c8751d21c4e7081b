//! Bit-flipping decoders.
//!
//! [`QDecoder`] works on the private code: it counts unsatisfied checks
//! through `H`, correlates the counts with the columns of `Q`, and flips
//! bits of the original error vector directly. [`classic_bf_decode`] is the
//! textbook decoder over the public parity-check matrix `L = HQ`, kept as a
//! reference for comparison.
//!
//! Both keep the syndrome unpacked one byte per bit and duplicated over
//! `2p` entries so that every cyclic shift is a contiguous slice.

use std::sync::Arc;

use serde::Serialize;

use crate::keygen::PrivateKey;
use crate::params::ParamSet;
use crate::ring::{RingElement, SparseRingElement};
use crate::threshold::ThresholdTable;
use crate::vector::ErrorVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FailureKind {
    /// Iteration cap reached with a nonzero syndrome.
    IterationCap,
    /// No position reached the threshold.
    Stalled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodingFailure {
    pub kind: FailureKind,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub error: ErrorVector,
    /// Iteration after which the syndrome vanished (0 for a zero syndrome).
    pub iterations: usize,
}

pub type DecodeResult = Result<Decoded, DecodingFailure>;

/// State after one decoder iteration, handed to observers.
pub struct IterationTrace<'a> {
    /// 1-based iteration index.
    pub iteration: usize,
    /// Syndrome weight the threshold was chosen from.
    pub weight_before: usize,
    pub threshold: u32,
    /// Size of the flip set.
    pub flipped: usize,
    pub weight_after: usize,
    /// Updated syndrome, one byte per bit.
    pub syndrome: &'a [u8],
    /// Current error estimate, one byte per bit.
    pub error_estimate: &'a [u8],
    /// Per-position correlations (Q-decoder) or check counts (classic BF).
    pub counters: &'a [u16],
}

/// Reusable scratch space, sized for one parameter set.
#[derive(Clone, Debug)]
pub struct Workspace {
    p: usize,
    n0: usize,
    syndrome: Vec<u8>,
    sigma: Vec<u8>,
    rho: Vec<u16>,
    scratch: Vec<u16>,
    e_hat: Vec<u8>,
}

impl Workspace {
    pub fn new(ps: &ParamSet) -> Self {
        let (p, n0) = (ps.p, ps.n0);
        Self {
            p,
            n0,
            syndrome: vec![0; 2 * p],
            sigma: vec![0; n0 * 2 * p],
            rho: vec![0; n0 * p],
            scratch: vec![0; p],
            e_hat: vec![0; n0 * p],
        }
    }

    fn fits(&self, ps: &ParamSet) -> bool {
        self.p == ps.p && self.n0 == ps.n0
    }

    fn load(&mut self, s: &RingElement) -> usize {
        let p = self.p;
        self.syndrome.iter_mut().for_each(|b| *b = 0);
        self.e_hat.iter_mut().for_each(|b| *b = 0);
        let mut weight = 0;
        for i in s.support() {
            self.syndrome[i] = 1;
            self.syndrome[i + p] = 1;
            weight += 1;
        }
        weight
    }

    /// Toggles every syndrome bit covered by column `c` of the circulant
    /// with first row `block` and returns the new syndrome weight.
    fn flip_column(&mut self, block: &SparseRingElement, c: usize, mut weight: usize) -> usize {
        let p = self.p;
        for &k in block.positions() {
            let r = (c + p - k as usize) % p;
            let bit = self.syndrome[r] ^ 1;
            self.syndrome[r] = bit;
            self.syndrome[r + p] = bit;
            if bit == 1 {
                weight += 1;
            } else {
                weight -= 1;
            }
        }
        weight
    }

    fn error_vector(&self) -> ErrorVector {
        ErrorVector::from_bits(self.n0, self.p, &self.e_hat)
    }
}

/// `out[c] += sum_{k in block} src[c + p - k]` for `c < p`, where `src` is a
/// duplicated length-`2p` vector.
#[inline]
fn accumulate_shifts<T: Copy + Into<u16>>(out: &mut [u16], src: &[T], block: &SparseRingElement, p: usize) {
    for &k in block.positions() {
        let start = p - k as usize;
        for (o, &s) in out.iter_mut().zip(&src[start..start + p]) {
            *o += s.into();
        }
    }
}

/// How the Q-decoder picks its per-iteration threshold.
#[derive(Clone, Debug)]
pub enum ThresholdPolicy {
    Table(Arc<ThresholdTable>),
    /// `b = max rho`: test mode only.
    MaxCorrelation,
}

#[derive(Clone, Debug)]
pub struct QDecoder {
    policy: ThresholdPolicy,
    l_max: usize,
    constant_iterations: bool,
}

impl QDecoder {
    pub fn new(ps: &ParamSet) -> Self {
        Self {
            policy: ThresholdPolicy::Table(ThresholdTable::cached(ps)),
            l_max: ps.l_max,
            constant_iterations: false,
        }
    }

    pub fn with_table(table: Arc<ThresholdTable>, l_max: usize) -> Self {
        Self { policy: ThresholdPolicy::Table(table), l_max, constant_iterations: false }
    }

    pub fn with_policy(mut self, policy: ThresholdPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Always run `l_max` iterations; the result is unchanged.
    pub fn constant_iterations(mut self, on: bool) -> Self {
        self.constant_iterations = on;
        self
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn decode(&self, syndrome: &RingElement, sk: &PrivateKey, ws: &mut Workspace) -> DecodeResult {
        self.decode_observed(syndrome, sk, ws, |_| {})
    }

    /// Decodes the private syndrome `s' = H Q e^T`, reporting every
    /// iteration to `observe`.
    pub fn decode_observed(
        &self,
        syndrome: &RingElement,
        sk: &PrivateKey,
        ws: &mut Workspace,
        mut observe: impl FnMut(&IterationTrace),
    ) -> DecodeResult {
        let ps = sk.params();
        assert!(ws.fits(ps), "workspace sized for another parameter set");
        let (p, n0) = (ps.p, ps.n0);
        let mut weight = ws.load(syndrome);
        if weight == 0 {
            return Ok(Decoded { error: ErrorVector::zero(n0, p), iterations: 0 });
        }

        let mut done_at = None;
        let mut failure = None;
        for l in 1..=self.l_max {
            let active = done_at.is_none() && failure.is_none();
            if !active && !self.constant_iterations {
                break;
            }

            // Unsatisfied check counts through H: sigma_(i,c) = sum_{k in h_i} s[c - k].
            for i in 0..n0 {
                ws.scratch.iter_mut().for_each(|x| *x = 0);
                accumulate_shifts(&mut ws.scratch, &ws.syndrome, &sk.h()[i], p);
                let sig = &mut ws.sigma[i * 2 * p..(i + 1) * 2 * p];
                for (c, &x) in ws.scratch.iter().enumerate() {
                    sig[c] = x as u8;
                    sig[c + p] = x as u8;
                }
            }
            // Correlation with the columns of Q: rho_(j,c) = sum_i sum_{k in q_ij} sigma_(i, c - k).
            ws.rho.iter_mut().for_each(|r| *r = 0);
            for j in 0..n0 {
                let out = &mut ws.rho[j * p..(j + 1) * p];
                for i in 0..n0 {
                    accumulate_shifts(out, &ws.sigma[i * 2 * p..(i + 1) * 2 * p], sk.q(i, j), p);
                }
            }

            let threshold = match &self.policy {
                ThresholdPolicy::Table(t) => t.lookup(weight),
                ThresholdPolicy::MaxCorrelation => ws.rho.iter().copied().max().unwrap_or(0) as u32,
            };
            let before = weight;
            let mut flipped = 0;
            if active {
                for v in 0..n0 * p {
                    if ws.rho[v] as u32 >= threshold {
                        ws.e_hat[v] ^= 1;
                        weight = ws.flip_column(&sk.l()[v / p], v % p, weight);
                        flipped += 1;
                    }
                }
            }
            observe(&IterationTrace {
                iteration: l,
                weight_before: before,
                threshold,
                flipped,
                weight_after: weight,
                syndrome: &ws.syndrome[..p],
                error_estimate: &ws.e_hat,
                counters: &ws.rho,
            });
            if active {
                if weight == 0 {
                    done_at = Some(l);
                } else if flipped == 0 {
                    failure = Some(DecodingFailure { kind: FailureKind::Stalled, iterations: l });
                }
            }
        }

        match (done_at, failure) {
            (Some(iterations), _) => Ok(Decoded { error: ws.error_vector(), iterations }),
            (None, Some(f)) => Err(f),
            (None, None) => Err(DecodingFailure { kind: FailureKind::IterationCap, iterations: self.l_max }),
        }
    }
}

/// Q-decoder over `s'` with the table for `sk`'s parameters.
pub fn decode(syndrome: &RingElement, sk: &PrivateKey, table: Arc<ThresholdTable>, l_max: usize) -> DecodeResult {
    let mut ws = Workspace::new(sk.params());
    QDecoder::with_table(table, l_max).decode(syndrome, sk, &mut ws)
}

/// Threshold rule for the classic decoder.
#[derive(Clone, Debug)]
pub enum BfThreshold {
    /// Flip the positions with the most unsatisfied checks.
    MaxCount,
    Fixed(u32),
    /// Same syndrome-weight lookup as the Q-decoder.
    Table(Arc<ThresholdTable>),
}

/// Bit flipping over the public matrix `L`, for the same private syndrome
/// `s' = L e^T`.
pub fn classic_bf_decode(
    syndrome: &RingElement,
    l_blocks: &[SparseRingElement],
    threshold: &BfThreshold,
    l_max: usize,
    ws: &mut Workspace,
    mut observe: impl FnMut(&IterationTrace),
) -> DecodeResult {
    let (p, n0) = (ws.p, ws.n0);
    assert_eq!(l_blocks.len(), n0);
    let mut weight = ws.load(syndrome);
    if weight == 0 {
        return Ok(Decoded { error: ErrorVector::zero(n0, p), iterations: 0 });
    }
    for l in 1..=l_max {
        ws.rho.iter_mut().for_each(|r| *r = 0);
        for (j, lj) in l_blocks.iter().enumerate() {
            accumulate_shifts(&mut ws.rho[j * p..(j + 1) * p], &ws.syndrome, lj, p);
        }
        let b = match threshold {
            BfThreshold::MaxCount => ws.rho.iter().copied().max().unwrap_or(0) as u32,
            BfThreshold::Fixed(b) => *b,
            BfThreshold::Table(t) => t.lookup(weight),
        };
        let before = weight;
        let mut flipped = 0;
        for v in 0..n0 * p {
            if ws.rho[v] as u32 >= b && b > 0 {
                ws.e_hat[v] ^= 1;
                weight = ws.flip_column(&l_blocks[v / p], v % p, weight);
                flipped += 1;
            }
        }
        observe(&IterationTrace {
            iteration: l,
            weight_before: before,
            threshold: b,
            flipped,
            weight_after: weight,
            syndrome: &ws.syndrome[..p],
            error_estimate: &ws.e_hat,
            counters: &ws.rho,
        });
        if weight == 0 {
            return Ok(Decoded { error: ws.error_vector(), iterations: l });
        }
        if flipped == 0 {
            return Err(DecodingFailure { kind: FailureKind::Stalled, iterations: l });
        }
    }
    Err(DecodingFailure { kind: FailureKind::IterationCap, iterations: l_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keygen::gen_keypair;
    use crate::params::{toy29, toy_params};
    use crate::rng::{sample_error, Drbg, Seed};

    fn keypair(ps: &ParamSet, tag: u8) -> PrivateKey {
        gen_keypair(ps, &Seed::for_params(ps, &vec![tag; ps.seed_bytes()]).unwrap()).unwrap().0
    }

    fn mid() -> ParamSet {
        toy_params(509, 2, 5, &[3, 2], 10).unwrap()
    }

    /// sigma_i[c] counted by scattering every unsatisfied check into the
    /// columns of H_i that touch it.
    fn naive_rho(sk: &PrivateKey, s: &[u8]) -> Vec<u16> {
        let ps = sk.params();
        let (p, n0) = (ps.p, ps.n0);
        let mut sigma = vec![vec![0u16; p]; n0];
        for (r, _) in s.iter().enumerate().filter(|(_, &b)| b == 1) {
            for i in 0..n0 {
                for &k in sk.h()[i].positions() {
                    sigma[i][(r + k as usize) % p] += 1;
                }
            }
        }
        let mut rho = vec![0u16; n0 * p];
        for j in 0..n0 {
            for i in 0..n0 {
                for &k in sk.q(i, j).positions() {
                    for c in 0..p {
                        rho[j * p + (c + k as usize) % p] += sigma[i][c];
                    }
                }
            }
        }
        rho
    }

    fn bits(e: &RingElement) -> Vec<u8> {
        (0..e.p()).map(|i| e.coefficient(i) as u8).collect()
    }

    #[test]
    fn zero_syndrome_decodes_to_zero() {
        let ps = toy29();
        let sk = keypair(&ps, 1);
        let mut ws = Workspace::new(&ps);
        let d = QDecoder::new(&ps).decode(&RingElement::zero(29), &sk, &mut ws).unwrap();
        assert_eq!(d.iterations, 0);
        assert!(d.error.is_empty());
    }

    #[test]
    fn first_iteration_correlations_match_naive_count() {
        let ps = mid();
        let sk = keypair(&ps, 2);
        let mut d = Drbg::new(b"rho");
        let mut ws = Workspace::new(&ps);
        for _ in 0..30 {
            let e = sample_error(&mut d, ps.n0, ps.p, ps.t);
            let s = sk.private_syndrome(&e);
            let want = naive_rho(&sk, &bits(&s));
            let mut seen = false;
            let _ = QDecoder::new(&ps).decode_observed(&s, &sk, &mut ws, |tr| {
                if tr.iteration == 1 {
                    assert_eq!(tr.counters, &want[..]);
                    seen = true;
                }
            });
            assert!(seen);
        }
    }

    #[test]
    fn syndrome_tracks_error_estimate_every_iteration() {
        for (ps, tag) in [(toy29(), 3u8), (mid(), 4)] {
            let sk = keypair(&ps, tag);
            let mut d = Drbg::new(b"track");
            let mut ws = Workspace::new(&ps);
            let bound = (ps.m() * ps.dv) as u16;
            for _ in 0..100 {
                let e = sample_error(&mut d, ps.n0, ps.p, ps.t);
                let s = sk.private_syndrome(&e);
                let res = QDecoder::new(&ps).decode_observed(&s, &sk, &mut ws, |tr| {
                    let est = ErrorVector::from_bits(ps.n0, ps.p, tr.error_estimate);
                    let expect = s.add(&sk.private_syndrome(&est)).unwrap();
                    assert_eq!(tr.syndrome, &bits(&expect)[..], "iteration {}", tr.iteration);
                    assert_eq!(tr.weight_after, expect.weight());
                    assert!(tr.counters.iter().all(|&r| r <= bound));
                });
                if let Ok(dec) = res {
                    assert_eq!(sk.private_syndrome(&dec.error), s);
                }
            }
        }
    }

    #[test]
    fn decodes_most_toy_errors() {
        let ps = mid();
        let sk = keypair(&ps, 5);
        let mut d = Drbg::new(b"rt");
        let mut ws = Workspace::new(&ps);
        let (mut ok, mut exact) = (0, 0);
        for _ in 0..1000 {
            let e = sample_error(&mut d, ps.n0, ps.p, ps.t);
            if let Ok(r) = QDecoder::new(&ps).decode(&sk.private_syndrome(&e), &sk, &mut ws) {
                ok += 1;
                exact += (r.error == e) as usize;
            }
        }
        assert!(ok >= 950, "{ok}/1000");
        // A success almost always recovers e itself, not just a vector with its syndrome.
        assert!(1000 * (ok - exact) <= ok, "{exact}/{ok}");
    }

    #[test]
    fn single_error_has_full_correlation() {
        let ps = mid();
        let sk = keypair(&ps, 6);
        let mut ws = Workspace::new(&ps);
        let full = (ps.m() * ps.dv) as u16;
        for v in [0u32, 17, 508, 509, 900] {
            let e = ErrorVector::new(ps.n0, ps.p, vec![v]).unwrap();
            let s = sk.private_syndrome(&e);
            let mut max_at = None;
            let _ = QDecoder::new(&ps).decode_observed(&s, &sk, &mut ws, |tr| {
                if tr.iteration == 1 {
                    let max = *tr.counters.iter().max().unwrap();
                    max_at = Some((max, tr.counters[v as usize]));
                }
            });
            let (max, at_v) = max_at.unwrap();
            assert_eq!(at_v, max);
            if sk.l()[v as usize / ps.p].weight() == ps.m() * ps.dv {
                assert_eq!(at_v, full);
            }
        }
    }

    #[test]
    fn constant_iterations_give_same_result() {
        let ps = mid();
        let sk = keypair(&ps, 7);
        let mut d = Drbg::new(b"ct");
        let mut ws = Workspace::new(&ps);
        let plain = QDecoder::new(&ps);
        let fixed = QDecoder::new(&ps).constant_iterations(true);
        for _ in 0..100 {
            let e = sample_error(&mut d, ps.n0, ps.p, ps.t + 2);
            let s = sk.private_syndrome(&e);
            let mut runs = 0;
            let b = fixed.decode_observed(&s, &sk, &mut ws, |_| runs += 1);
            let a = plain.decode(&s, &sk, &mut ws);
            assert_eq!(a, b);
            if !s.is_zero() {
                assert_eq!(runs, ps.l_max);
            }
        }
    }

    #[test]
    fn max_correlation_policy_flips_only_maxima() {
        let ps = mid();
        let sk = keypair(&ps, 8);
        let mut ws = Workspace::new(&ps);
        let e = sample_error(&mut Drbg::new(b"max"), ps.n0, ps.p, ps.t);
        let dec = QDecoder::new(&ps).with_policy(ThresholdPolicy::MaxCorrelation);
        let _ = dec.decode_observed(&sk.private_syndrome(&e), &sk, &mut ws, |tr| {
            let max = *tr.counters.iter().max().unwrap() as u32;
            assert_eq!(tr.threshold, max);
            assert_eq!(tr.flipped, tr.counters.iter().filter(|&&r| r as u32 == max).count());
        });
    }

    #[test]
    fn classic_bf_matches_q_decoder_without_cancellations() {
        let ps = mid();
        let full = ps.m() * ps.dv;
        let sk = (0..50u8).map(|t| keypair(&ps, t)).find(|sk| sk.l().iter().all(|l| l.weight() == full)).unwrap();
        let table = ThresholdTable::cached(&ps);
        let mut d = Drbg::new(b"bf");
        let (mut wq, mut wb) = (Workspace::new(&ps), Workspace::new(&ps));
        for _ in 0..50 {
            let e = sample_error(&mut d, ps.n0, ps.p, ps.t);
            let s = sk.private_syndrome(&e);
            let mut q_first = None;
            let q = QDecoder::new(&ps).decode_observed(&s, &sk, &mut wq, |tr| {
                if tr.iteration == 1 {
                    q_first = Some((tr.counters.to_vec(), tr.threshold, tr.error_estimate.to_vec()));
                }
            });
            let mut b_first = None;
            let b = classic_bf_decode(&s, sk.l(), &BfThreshold::Table(table.clone()), ps.l_max, &mut wb, |tr| {
                if tr.iteration == 1 {
                    b_first = Some((tr.counters.to_vec(), tr.threshold, tr.error_estimate.to_vec()));
                }
            });
            assert_eq!(q_first, b_first);
            assert_eq!(q.is_ok(), b.is_ok());
        }
    }

    #[test]
    fn classic_bf_round_trips() {
        let ps = mid();
        let sk = keypair(&ps, 9);
        let mut d = Drbg::new(b"bf2");
        let mut ws = Workspace::new(&ps);
        for _ in 0..50 {
            let e = sample_error(&mut d, ps.n0, ps.p, ps.t);
            let s = sk.private_syndrome(&e);
            if let Ok(r) = classic_bf_decode(&s, sk.l(), &BfThreshold::MaxCount, 20, &mut ws, |_| {}) {
                assert_eq!(sk.private_syndrome(&r.error), s);
            }
        }
    }
}
