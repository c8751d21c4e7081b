//! Montecarlo decoding-failure-rate runs.
//!
//! Every trial derives its key seed and encapsulation coins from the master
//! seed and its own index, so counts depend only on `(master_seed, trials)`
//! and not on scheduling or on the number of workers.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{QDecoder, Workspace};
use crate::error::{Error, Result};
use crate::kem::{decapsulate_with, encapsulate, DecapOutcome};
use crate::keygen::{expand_private, PrivateKey};
use crate::params::ParamSet;
use crate::rng::{Drbg, Seed};
use crate::threshold::{CheckModel, ThresholdTable};

const KEY_LABEL: &[u8] = b"ledakem/dfr-key";
const COINS_LABEL: &[u8] = b"ledakem/dfr-encap";

#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub trials: u64,
    pub master_seed: Vec<u8>,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    /// Reuse one keypair for every trial.
    pub fixed_key: bool,
    pub model: CheckModel,
}

impl TrialConfig {
    pub fn new(trials: u64, master_seed: &[u8]) -> Self {
        Self { trials, master_seed: master_seed.to_vec(), workers: 0, fixed_key: false, model: CheckModel::default() }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn fixed_key(mut self, on: bool) -> Self {
        self.fixed_key = on;
        self
    }

    pub fn model(mut self, model: CheckModel) -> Self {
        self.model = model;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FailureBreakdown {
    /// Decoder hit the iteration cap.
    pub iteration_cap: u64,
    /// No position reached the threshold.
    pub stalled: u64,
    /// Decoder converged to a vector of the wrong weight.
    pub weight_mismatch: u64,
    /// Decoder converged to a weight-`t` vector other than the one sent.
    pub wrong_vector: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub wall_seconds: f64,
    pub mean_trial_ms: f64,
    pub stddev_trial_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub params: String,
    pub trials: u64,
    pub failures: u64,
    pub breakdown: FailureBreakdown,
    /// `iterations[l]` counts successful decodes that finished after `l`
    /// iterations.
    pub iterations: Vec<u64>,
    pub fixed_key: bool,
    pub model: CheckModel,
    pub timing: TimingStats,
}

impl TrialReport {
    pub fn successes(&self) -> u64 {
        self.trials - self.failures
    }

    /// Empirical failure rate, or the `1/trials` resolution bound when no
    /// failure was seen.
    pub fn dfr_upper_estimate(&self) -> f64 {
        if self.trials == 0 {
            return 1.0;
        }
        self.failures.max(1) as f64 / self.trials as f64
    }

    /// Most frequent iteration count among successes.
    pub fn mode_iterations(&self) -> Option<usize> {
        let max = *self.iterations.iter().max()?;
        (max > 0).then(|| self.iterations.iter().position(|&c| c == max).unwrap())
    }

    pub fn csv_header() -> &'static str {
        "params,trials,failures,iteration_cap,stalled,weight_mismatch,wrong_vector,fixed_key,model,wall_seconds,mean_trial_ms,iterations"
    }

    pub fn csv_row(&self) -> String {
        let hist: Vec<String> = self.iterations.iter().map(|c| c.to_string()).collect();
        format!(
            "{},{},{},{},{},{},{},{},{:?},{:.3},{:.3},{}",
            self.params,
            self.trials,
            self.failures,
            self.breakdown.iteration_cap,
            self.breakdown.stalled,
            self.breakdown.weight_mismatch,
            self.breakdown.wrong_vector,
            self.fixed_key,
            self.model,
            self.timing.wall_seconds,
            self.timing.mean_trial_ms,
            hist.join(";")
        )
    }
}

#[derive(Clone, Copy)]
enum TrialOutcome {
    Success(usize),
    Failure(FailureClass),
}

#[derive(Clone, Copy)]
enum FailureClass {
    IterationCap,
    Stalled,
    WeightMismatch,
    WrongVector,
}

fn trial_material(master: &[u8], index: u64) -> Vec<u8> {
    let mut m = master.to_vec();
    m.extend_from_slice(&index.to_le_bytes());
    m
}

fn one_trial(
    ps: &ParamSet,
    cfg: &TrialConfig,
    fixed: Option<&PrivateKey>,
    decoder: &QDecoder,
    ws: &mut Workspace,
    index: u64,
) -> Result<(TrialOutcome, f64)> {
    let start = Instant::now();
    let material = trial_material(&cfg.master_seed, index);
    let owned;
    let sk = match fixed {
        Some(sk) => sk,
        None => {
            owned = expand_private(ps, &Seed::derive(ps.category, KEY_LABEL, &material))?;
            &owned
        }
    };
    let pk = sk.public_key();
    let (ct, ss) = encapsulate(&pk, &mut Drbg::with_domain(COINS_LABEL, &material));
    let dec = decapsulate_with(sk, &ct, decoder, ws);
    let outcome = match dec.outcome {
        DecapOutcome::Decoded { iterations } if dec.secret == ss => TrialOutcome::Success(iterations),
        DecapOutcome::Decoded { .. } => TrialOutcome::Failure(FailureClass::WrongVector),
        DecapOutcome::WeightMismatch { .. } => TrialOutcome::Failure(FailureClass::WeightMismatch),
        DecapOutcome::DecodingFailure => {
            // Rerun to learn the kind; failures are rare enough not to matter.
            let s = crate::kem::private_syndrome(sk, &ct);
            match decoder.decode(&s, sk, ws) {
                Err(f) if f.kind == crate::decoder::FailureKind::Stalled => TrialOutcome::Failure(FailureClass::Stalled),
                _ => TrialOutcome::Failure(FailureClass::IterationCap),
            }
        }
    };
    Ok((outcome, start.elapsed().as_secs_f64() * 1e3))
}

/// Runs `cfg.trials` keygen/encap/decap cycles.
pub fn run_trials(ps: &ParamSet, cfg: &TrialConfig) -> Result<TrialReport> {
    ps.validate().map_err(Error::InvalidParams)?;
    let table = Arc::new(ThresholdTable::build_with(ps, cfg.model));
    let decoder = QDecoder::with_table(table, ps.l_max);
    let fixed = if cfg.fixed_key {
        Some(expand_private(ps, &Seed::derive(ps.category, KEY_LABEL, &trial_material(&cfg.master_seed, u64::MAX)))?)
    } else {
        None
    };

    let start = Instant::now();
    let run = || -> Result<Vec<(TrialOutcome, f64)>> {
        (0..cfg.trials)
            .into_par_iter()
            .map_init(|| Workspace::new(ps), |ws, i| one_trial(ps, cfg, fixed.as_ref(), &decoder, ws, i))
            .collect()
    };
    let results = if cfg.workers == 0 {
        run()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::format(format!("thread pool: {e}")))?;
        pool.install(run)?
    };
    let wall = start.elapsed().as_secs_f64();

    let mut iterations = vec![0u64; ps.l_max + 1];
    let mut breakdown = FailureBreakdown::default();
    for (outcome, _) in &results {
        match *outcome {
            TrialOutcome::Success(l) => iterations[l] += 1,
            TrialOutcome::Failure(FailureClass::IterationCap) => breakdown.iteration_cap += 1,
            TrialOutcome::Failure(FailureClass::Stalled) => breakdown.stalled += 1,
            TrialOutcome::Failure(FailureClass::WeightMismatch) => breakdown.weight_mismatch += 1,
            TrialOutcome::Failure(FailureClass::WrongVector) => breakdown.wrong_vector += 1,
        }
    }
    let failures = breakdown.iteration_cap + breakdown.stalled + breakdown.weight_mismatch + breakdown.wrong_vector;
    let n = results.len().max(1) as f64;
    let mean = results.iter().map(|r| r.1).sum::<f64>() / n;
    let var = results.iter().map(|r| (r.1 - mean).powi(2)).sum::<f64>() / n;
    Ok(TrialReport {
        params: ps.id(),
        trials: cfg.trials,
        failures,
        breakdown,
        iterations,
        fixed_key: cfg.fixed_key,
        model: cfg.model,
        timing: TimingStats { wall_seconds: wall, mean_trial_ms: mean, stddev_trial_ms: var.sqrt() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::toy_params;

    fn toy() -> ParamSet {
        toy_params(83, 2, 5, &[3, 2], 4).unwrap()
    }

    #[test]
    fn report_is_well_formed_and_reproducible() {
        let ps = toy();
        let a = run_trials(&ps, &TrialConfig::new(400, b"m").workers(1)).unwrap();
        assert_eq!(a.trials, 400);
        assert!(a.failures <= a.trials);
        assert_eq!(a.iterations.iter().sum::<u64>(), a.successes());
        assert_eq!(a.iterations[0], 0);
        let b = run_trials(&ps, &TrialConfig::new(400, b"m").workers(3)).unwrap();
        assert_eq!((a.failures, &a.breakdown, &a.iterations), (b.failures, &b.breakdown, &b.iterations));
        assert_eq!(a.csv_row().split(',').count(), TrialReport::csv_header().split(',').count());
    }

    #[test]
    fn fixed_key_mode() {
        let ps = toy();
        let r = run_trials(&ps, &TrialConfig::new(100, b"f").fixed_key(true).workers(1)).unwrap();
        assert!(r.fixed_key);
        assert_eq!(r.iterations.iter().sum::<u64>(), r.successes());
    }
}
