//! Command results. Each one prints as text or JSON, and the JSON parses
//! back into the same type.

use std::fmt::Write as _;

use ledakem::dfr::TrialReport;
use ledakem::threshold::ThresholdEntry;
use ledakem::CheckModel;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsRow {
    pub id: String,
    pub p: usize,
    pub n0: usize,
    pub dv: usize,
    pub m_vec: Vec<usize>,
    pub t: usize,
    pub public_key_bytes: usize,
    pub ciphertext_bytes: usize,
    pub secret_bytes: usize,
    pub seed_bytes: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsReport {
    pub sets: Vec<ParamsRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeygenReport {
    pub params: String,
    pub private_key: String,
    pub public_key: String,
    pub public_key_bytes: usize,
    pub pk_sha3_256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncapReport {
    pub params: String,
    pub ciphertext: String,
    pub shared_secret: String,
    pub ciphertext_bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecapReport {
    pub params: String,
    pub shared_secret: String,
    pub trace: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KatReport {
    pub params: String,
    pub count: usize,
    pub out: Option<String>,
    /// The file contents, when no output path was given.
    pub kat: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KatVerifyReport {
    pub params: String,
    pub records: usize,
    pub mismatches: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpStats {
    pub mean_ms: f64,
    pub stddev_ms: f64,
}

impl OpStats {
    pub fn from_samples(ms: &[f64]) -> Self {
        let n = ms.len().max(1) as f64;
        let mean = ms.iter().sum::<f64>() / n;
        let var = ms.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Self { mean_ms: mean, stddev_ms: var.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub params: String,
    pub iterations: usize,
    pub workers: usize,
    pub keygen: OpStats,
    pub encap: OpStats,
    pub decap: OpStats,
    /// Seed-expansion attempts summed over all keygens.
    pub keygen_attempts: usize,
    /// Decoder iterations summed over all decaps.
    pub decoder_iterations: usize,
    pub decode_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsReport {
    pub params: String,
    pub model: CheckModel,
    pub delta: f64,
    pub entries: Vec<ThresholdEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfrReport {
    #[serde(flatten)]
    pub report: TrialReport,
    pub delta: f64,
    pub max_failures: Option<u64>,
    pub exceeded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Report {
    Params(ParamsReport),
    Keygen(KeygenReport),
    Encap(EncapReport),
    Decap(DecapReport),
    Kat(KatReport),
    KatVerify(KatVerifyReport),
    Bench(BenchReport),
    Thresholds(ThresholdsReport),
    Dfr(DfrReport),
}

impl Report {
    /// True when a check the caller asked for did not hold.
    pub fn check_failed(&self) -> bool {
        match self {
            Report::KatVerify(r) => !r.mismatches.is_empty(),
            Report::Dfr(r) => r.exceeded,
            _ => false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match self {
            Report::Params(r) => {
                let _ = writeln!(s, "{:<10} {:>6} {:>3} {:>3} {:<10} {:>4} {:>7} {:>7} {:>5}", "id", "p", "n0", "dv", "m", "t", "pk B", "ct B", "delta");
                for x in &r.sets {
                    let m = x.m_vec.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                    let _ = writeln!(
                        s,
                        "{:<10} {:>6} {:>3} {:>3} {:<10} {:>4} {:>7} {:>7} {:>5}",
                        x.id, x.p, x.n0, x.dv, m, x.t, x.public_key_bytes, x.ciphertext_bytes, x.delta
                    );
                }
            }
            Report::Keygen(r) => {
                let _ = writeln!(s, "params      {}", r.params);
                let _ = writeln!(s, "private key {}", r.private_key);
                let _ = writeln!(s, "public key  {} ({} bytes)", r.public_key, r.public_key_bytes);
                let _ = writeln!(s, "pk sha3-256 {}", r.pk_sha3_256);
            }
            Report::Encap(r) => {
                let _ = writeln!(s, "params        {}", r.params);
                let _ = writeln!(s, "ciphertext    {} ({} bytes)", r.ciphertext, r.ciphertext_bytes);
                let _ = writeln!(s, "shared secret {}", r.shared_secret);
            }
            Report::Decap(r) => {
                let _ = writeln!(s, "params        {}", r.params);
                let _ = writeln!(s, "shared secret {}", r.shared_secret);
                if let Some(t) = &r.trace {
                    let _ = writeln!(s, "trace         {t}");
                }
            }
            Report::Kat(r) => match (&r.out, &r.kat) {
                (_, Some(text)) => s.push_str(text),
                (Some(out), None) => {
                    let _ = writeln!(s, "wrote {} records for {} to {out}", r.count, r.params);
                }
                (None, None) => {}
            },
            Report::KatVerify(r) => {
                if r.mismatches.is_empty() {
                    let _ = writeln!(s, "{}: all {} records verified", r.params, r.records);
                } else {
                    let _ = writeln!(s, "{}: {} of {} records differ: {:?}", r.params, r.mismatches.len(), r.records, r.mismatches);
                }
            }
            Report::Bench(r) => {
                let _ = writeln!(s, "{} over {} iterations ({} workers)", r.params, r.iterations, r.workers);
                for (name, op) in [("keygen", &r.keygen), ("encap", &r.encap), ("decap", &r.decap)] {
                    let _ = writeln!(s, "  {name:<7} {:>10.3} ms  +- {:.3}", op.mean_ms, op.stddev_ms);
                }
                let _ = writeln!(
                    s,
                    "  keygen attempts {}, decoder iterations {}, decode failures {}",
                    r.keygen_attempts, r.decoder_iterations, r.decode_failures
                );
            }
            Report::Thresholds(r) => {
                let _ = writeln!(s, "# {} model={:?} delta={}", r.params, r.model, r.delta);
                let _ = writeln!(s, "{:>6} {:>14} {:>4} {:>4}", "t_l", "E[wt(s)]", "raw", "b");
                for e in &r.entries {
                    let _ = writeln!(s, "{:>6} {:>14.3} {:>4} {:>4}", e.errors, e.expected_weight, e.raw_threshold, e.threshold);
                }
            }
            Report::Dfr(r) => {
                let t = &r.report;
                let _ = writeln!(s, "params      {} (delta {}, model {:?}{})", t.params, r.delta, t.model, if t.fixed_key { ", fixed key" } else { "" });
                let _ = writeln!(s, "trials      {}", t.trials);
                let _ = writeln!(s, "failures    {} {:?}", t.failures, t.breakdown);
                let _ = writeln!(s, "dfr <=      {:.3e}", t.dfr_upper_estimate());
                let _ = writeln!(s, "iterations  {:?}", t.iterations);
                let _ = writeln!(s, "wall        {:.2} s ({:.3} ms/trial)", t.timing.wall_seconds, t.timing.mean_trial_ms);
                if let Some(b) = r.max_failures {
                    let _ = writeln!(s, "bound       {b} ({})", if r.exceeded { "exceeded" } else { "ok" });
                }
            }
        }
        s
    }
}
