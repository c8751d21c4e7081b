//! Syndrome-weight driven flip thresholds for the Q-decoder.
//!
//! For every candidate expanded error weight `t' = j m` (`j = 0..=t`) the
//! table stores the expected syndrome weight and the smallest correlation
//! value at which a bit is more likely in error than not (scaled by the
//! margin `delta`). During decoding the observed syndrome weight selects a
//! row, and so a threshold.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::params::ParamSet;

/// Which error weight feeds the per-check probabilities when deciding a
/// flip threshold for the row with `t_l = j` errors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckModel {
    /// Evaluate at the expanded weight `m * t_l`, the number of errors the
    /// private code actually sees.
    #[default]
    Expanded,
    /// Evaluate at `t_l` itself.
    Unexpanded,
}

/// Probabilities that a parity check touching a given bit is unsatisfied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckProbabilities {
    /// Bit correct, check unsatisfied.
    pub p_ci: f64,
    /// Bit in error, check unsatisfied.
    pub p_ic: f64,
    /// `1 - p_ci`, computed directly.
    pub q_ci: f64,
    /// `1 - p_ic`, computed directly.
    pub q_ic: f64,
}

/// Natural log of `C(n, k)` by direct summation (k small).
fn ln_choose_small(n: u64, k: u64) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `(P[J odd], P[J even])` for `J ~ Hypergeometric(population, marked, draws)`,
/// summed term by term in log space.
fn hypergeometric_parity(population: u64, marked: u64, draws: u64) -> (f64, f64) {
    let (n, k, d) = (population, marked, draws);
    assert!(k <= n && d <= n);
    let lo = d.saturating_sub(n - k);
    let hi = k.min(d);
    let ln_denominator: f64 = (0..k).map(|i| ((n - i) as f64).ln()).sum();
    let (mut odd, mut even) = (0.0, 0.0);
    for j in lo..=hi {
        // C(k, j) * [d! / (d-j)!] * [(n-d)! / (n-d-(k-j))!] / [n! / (n-k)!]
        let ln_term = ln_choose_small(k, j)
            + (0..j).map(|i| ((d - i) as f64).ln()).sum::<f64>()
            + (0..k - j).map(|i| ((n - d - i) as f64).ln()).sum::<f64>()
            - ln_denominator;
        let term = ln_term.exp();
        if j % 2 == 1 {
            odd += term;
        } else {
            even += term;
        }
    }
    (odd, even)
}

/// Per-check probabilities for a code of length `n` and column weight
/// `column_weight` carrying `errors` errors.
pub fn check_probabilities(n: usize, column_weight: usize, errors: usize) -> CheckProbabilities {
    let (n, k) = ((n - 1) as u64, (column_weight - 1) as u64);
    let (ci_odd, ci_even) = hypergeometric_parity(n, k, errors as u64);
    let (ic_odd, ic_even) = if errors == 0 { (1.0, 0.0) } else { hypergeometric_parity(n, k, errors as u64 - 1) };
    CheckProbabilities { p_ci: ci_odd, q_ci: ci_even, p_ic: ic_even, q_ic: ic_odd }
}

/// Expected syndrome weight with `t_prime` errors in the expanded error
/// vector: `p * [(t'/n) p_ic + (1 - t'/n) p_ci]`.
pub fn expected_syndrome_weight(ps: &ParamSet, t_prime: usize) -> f64 {
    if t_prime == 0 {
        return 0.0;
    }
    let n = ps.n();
    let pr = check_probabilities(n, ps.n0 * ps.dv, t_prime);
    let frac = t_prime as f64 / n as f64;
    ps.p as f64 * (frac * pr.p_ic + (1.0 - frac) * pr.p_ci)
}

/// Natural log of the odds ratio `P{e_i = 0 | rho} / P{e_i = 1 | rho}`.
pub fn log_odds_correct(ps: &ParamSet, t_l: usize, pr: &CheckProbabilities, rho: usize) -> f64 {
    let n = ps.n();
    let total = ps.m() * ps.dv;
    let term = |exp: usize, num: f64, den: f64| if exp == 0 { 0.0 } else { exp as f64 * (num.ln() - den.ln()) };
    ((n - t_l) as f64).ln() - (t_l as f64).ln() + term(rho, pr.p_ci, pr.p_ic) + term(total - rho, pr.q_ci, pr.q_ic)
}

/// Smallest `rho` in `[0, m dv]` with `P{e_i = 1 | rho} > (1 + delta) / (2 + delta)`,
/// or `m dv` when none qualifies.
pub fn optimal_threshold(ps: &ParamSet, t_l: usize, model: CheckModel) -> u32 {
    let total = ps.m() * ps.dv;
    if t_l == 0 {
        return total as u32;
    }
    let errors = match model {
        CheckModel::Expanded => t_l * ps.m(),
        CheckModel::Unexpanded => t_l,
    };
    let pr = check_probabilities(ps.n(), ps.n0 * ps.dv, errors);
    // P1 > (1+d)/(2+d)  <=>  P0/P1 < 1/(1+d).
    let bound = -(1.0 + ps.delta).ln();
    (0..=total)
        .find(|&rho| log_odds_correct(ps, t_l, &pr, rho) < bound)
        .unwrap_or(total) as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    /// Error weight `t_l` this row models.
    pub errors: usize,
    /// Expected syndrome weight for `t' = m * errors`.
    pub expected_weight: f64,
    /// Threshold before the post-minimum clamp.
    pub raw_threshold: u32,
    pub threshold: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    entries: Vec<ThresholdEntry>,
    model: CheckModel,
}

impl ThresholdTable {
    pub fn build(ps: &ParamSet) -> Self {
        Self::build_with(ps, CheckModel::default())
    }

    pub fn build_with(ps: &ParamSet, model: CheckModel) -> Self {
        let mut entries: Vec<ThresholdEntry> = (0..=ps.t)
            .map(|j| {
                let b = optimal_threshold(ps, j, model);
                ThresholdEntry {
                    errors: j,
                    expected_weight: expected_syndrome_weight(ps, j * ps.m()),
                    raw_threshold: b,
                    threshold: b,
                }
            })
            .collect();
        // Walking from heavy to light syndromes the thresholds fall and then
        // rise again; the rise is replaced by the minimum.
        let min = entries.iter().map(|e| e.threshold).min().unwrap();
        let last_min = entries.iter().rposition(|e| e.threshold == min).unwrap();
        for e in &mut entries[..last_min] {
            e.threshold = min;
        }
        Self { entries, model }
    }

    /// Shared table for `ps`, built once per process.
    pub fn cached(ps: &ParamSet) -> Arc<ThresholdTable> {
        type Key = (usize, usize, usize, Vec<usize>, usize, u64);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<ThresholdTable>>>> = OnceLock::new();
        let key = (ps.p, ps.n0, ps.dv, ps.m_vec.clone(), ps.t, ps.delta.to_bits());
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().unwrap().get(&key) {
            return t.clone();
        }
        let table = Arc::new(Self::build(ps));
        cache.lock().unwrap().entry(key).or_insert(table).clone()
    }

    pub fn entries(&self) -> &[ThresholdEntry] {
        &self.entries
    }

    pub fn model(&self) -> CheckModel {
        self.model
    }

    /// Threshold of the row with the largest expected weight strictly below
    /// `syndrome_weight`; the first row when there is none.
    pub fn lookup(&self, syndrome_weight: usize) -> u32 {
        let w = syndrome_weight as f64;
        let below = self.entries.partition_point(|e| e.expected_weight < w);
        self.entries[below.saturating_sub(1)].threshold
    }
}
