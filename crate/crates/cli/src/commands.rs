use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ledakem::decoder::{QDecoder, Workspace};
use ledakem::format::{
    decode_ciphertext, decode_private_key, decode_public_key, encode_ciphertext, encode_private_key, encode_public_key,
    KatFile,
};
use ledakem::kem::{decapsulate_with, encapsulate, private_syndrome, DecapOutcome};
use ledakem::{expand_private, registry, run_trials, Drbg, ParamSet, Seed, ThresholdTable, TrialConfig};
use sha3::{Digest, Sha3_256};

use crate::args::{Command, ReportFormat};
use crate::report::*;
use crate::CliError;

const ENCAP_LABEL: &[u8] = b"ledakem/cli-encap";
const BENCH_KEY_LABEL: &[u8] = b"ledakem/bench-key";
const BENCH_COINS_LABEL: &[u8] = b"ledakem/bench-encap";

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::format(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8], force: bool) -> Result<(), CliError> {
    let mut opts = OpenOptions::new();
    opts.write(true);
    if force {
        opts.create(true).truncate(true);
    } else {
        opts.create_new(true);
    }
    let mut f = opts.open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::AlreadyExists => {
            CliError::usage(format!("{} exists; pass --force to overwrite", path.display()))
        }
        _ => CliError::format(format!("{}: {e}", path.display())),
    })?;
    f.write_all(bytes).map_err(|e| CliError::format(format!("{}: {e}", path.display())))
}

fn parse_hex(s: &str, what: &str) -> Result<Vec<u8>, CliError> {
    hex::decode(s.trim()).map_err(|e| CliError::usage(format!("{what} must be hex: {e}")))
}

fn system_bytes(n: usize) -> Result<Vec<u8>, CliError> {
    let mut buf = vec![0u8; n];
    getrandom::getrandom(&mut buf).map_err(|e| CliError::crypto(format!("system entropy: {e}")))?;
    Ok(buf)
}

/// Seed files hold exactly the seed, either raw or as hex text.
fn read_seed(ps: &ParamSet, path: &Path) -> Result<Seed, CliError> {
    let bytes = read(path)?;
    if bytes.len() == ps.seed_bytes() {
        return Ok(Seed::for_params(ps, &bytes)?);
    }
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::format("seed file is neither raw nor hex"))?;
    let raw = hex::decode(text.trim()).map_err(|_| {
        CliError::format(format!("seed file must hold {} raw bytes or their hex encoding", ps.seed_bytes()))
    })?;
    Ok(Seed::for_params(ps, &raw)?)
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn run(command: Command, json: bool) -> Result<Report, CliError> {
    match command {
        Command::Params => Ok(Report::Params(params())),
        Command::Keygen { params, seed_file, system_entropy: _, out_prefix, force } => {
            keygen(&params.params, seed_file.as_deref(), &out_prefix, force)
        }
        Command::Encap { public, out_ct, out_ss, coins_file, force } => {
            encap(&public, &out_ct, &out_ss, coins_file.as_deref(), force)
        }
        Command::Decap { private, ct, out_ss, trace_csv, force } => {
            decap(&private, &ct, &out_ss, trace_csv.as_deref(), force)
        }
        Command::Kat { params, count, seed, out, force } => {
            let master = parse_hex(&seed, "--seed")?;
            let kat = KatFile::generate(&params.params, &master, count)?;
            let text = kat.to_text();
            if let Some(out) = &out {
                write(out, text.as_bytes(), force)?;
            }
            Ok(Report::Kat(KatReport {
                params: params.params.id(),
                count,
                out: out.as_deref().map(display),
                kat: out.is_none().then_some(text),
            }))
        }
        Command::KatVerify { file } => {
            let text = String::from_utf8(read(&file)?).map_err(|_| CliError::format("KAT file is not UTF-8"))?;
            let kat = KatFile::parse(&text)?;
            let mismatches = kat.verify()?;
            Ok(Report::KatVerify(KatVerifyReport { params: kat.params.id(), records: kat.records.len(), mismatches }))
        }
        Command::Bench { params, iterations, seed, workers } => {
            let master = parse_hex(&seed, "--seed")?;
            bench(&params.params, iterations, &master, workers.max(1))
        }
        Command::Thresholds { params, model, delta } => {
            let ps = match delta {
                Some(d) => params.params.with_delta(d),
                None => params.params,
            };
            let table = ThresholdTable::build_with(&ps, model.into());
            Ok(Report::Thresholds(ThresholdsReport {
                params: ps.id(),
                model: table.model(),
                delta: ps.delta,
                entries: table.entries().to_vec(),
            }))
        }
        Command::Dfr { params, trials, seed, workers, fixed_key, model, delta, format, max_failures } => {
            let ps = match delta {
                Some(d) => params.params.with_delta(d),
                None => params.params,
            };
            let master = parse_hex(&seed, "--seed")?;
            let cfg = TrialConfig::new(trials, &master).workers(workers).fixed_key(fixed_key).model(model.into());
            let report = run_trials(&ps, &cfg)?;
            let exceeded = max_failures.is_some_and(|b| report.failures > b);
            let out = DfrReport { report, delta: ps.delta, max_failures, exceeded };
            if format == ReportFormat::Csv && !json {
                print!("{}\n{}\n", ledakem::dfr::TrialReport::csv_header(), out.report.csv_row());
                return Err(CliError::silent(exceeded));
            }
            Ok(Report::Dfr(out))
        }
    }
}

fn params() -> ParamsReport {
    let sets = registry()
        .into_iter()
        .map(|ps| ParamsRow {
            id: ps.id(),
            p: ps.p,
            n0: ps.n0,
            dv: ps.dv,
            m_vec: ps.m_vec.clone(),
            t: ps.t,
            public_key_bytes: ps.public_key_bytes(),
            ciphertext_bytes: ps.ciphertext_bytes(),
            secret_bytes: ps.secret_bytes(),
            seed_bytes: ps.seed_bytes(),
            delta: ps.delta,
        })
        .collect();
    ParamsReport { sets }
}

fn keygen(ps: &ParamSet, seed_file: Option<&Path>, prefix: &Path, force: bool) -> Result<Report, CliError> {
    let seed = match seed_file {
        Some(path) => read_seed(ps, path)?,
        None => Seed::for_params(ps, &system_bytes(ps.seed_bytes())?)?,
    };
    let sk = expand_private(ps, &seed)?;
    let pk = sk.public_key();
    let (sk_path, pk_path) = (with_ext(prefix, "sk"), with_ext(prefix, "pk"));
    if !force {
        for p in [&sk_path, &pk_path] {
            if p.exists() {
                return Err(CliError::usage(format!("{} exists; pass --force to overwrite", p.display())));
            }
        }
    }
    write(&sk_path, &encode_private_key(&sk)?, force)?;
    write(&pk_path, &encode_public_key(&pk)?, force)?;
    Ok(Report::Keygen(KeygenReport {
        params: ps.id(),
        private_key: display(&sk_path),
        public_key: display(&pk_path),
        public_key_bytes: ps.public_key_bytes(),
        pk_sha3_256: hex::encode(Sha3_256::digest(pk.to_bytes())),
    }))
}

fn encap(public: &Path, out_ct: &Path, out_ss: &Path, coins: Option<&Path>, force: bool) -> Result<Report, CliError> {
    let pk = decode_public_key(&read(public)?)?;
    let ps = pk.params().clone();
    let material = match coins {
        Some(path) => read(path)?,
        None => system_bytes(32)?,
    };
    let (ct, ss) = encapsulate(&pk, &mut Drbg::with_domain(ENCAP_LABEL, &material));
    write(out_ct, &encode_ciphertext(&ps, &ct)?, force)?;
    write(out_ss, ss.as_bytes(), force)?;
    Ok(Report::Encap(EncapReport {
        params: ps.id(),
        ciphertext: display(out_ct),
        shared_secret: display(out_ss),
        ciphertext_bytes: ps.ciphertext_bytes(),
    }))
}

fn decap(private: &Path, ct_path: &Path, out_ss: &Path, trace: Option<&Path>, force: bool) -> Result<Report, CliError> {
    let sk = decode_private_key(&read(private)?)?;
    let (ct_ps, ct) = decode_ciphertext(&read(ct_path)?)?;
    let ps = sk.params().clone();
    if ct_ps.id() != ps.id() {
        return Err(CliError::format(format!("ciphertext is for {} but the key is for {}", ct_ps.id(), ps.id())));
    }
    let decoder = QDecoder::new(&ps);
    let mut ws = Workspace::new(&ps);
    if let Some(path) = trace {
        let mut csv = String::from("iteration,syndrome_weight,threshold,flipped,syndrome_weight_after\n");
        let s = private_syndrome(&sk, &ct);
        let _ = decoder.decode_observed(&s, &sk, &mut ws, |tr| {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                tr.iteration, tr.weight_before, tr.threshold, tr.flipped, tr.weight_after
            ));
        });
        write(path, csv.as_bytes(), force)?;
    }
    let ss = decapsulate_with(&sk, &ct, &decoder, &mut ws).secret;
    write(out_ss, ss.as_bytes(), force)?;
    Ok(Report::Decap(DecapReport { params: ps.id(), shared_secret: display(out_ss), trace: trace.map(display) }))
}

struct BenchSample {
    keygen_ms: f64,
    encap_ms: f64,
    decap_ms: f64,
    attempts: usize,
    iterations: usize,
    failed: bool,
}

fn bench_one(ps: &ParamSet, master: &[u8], index: usize, decoder: &QDecoder, ws: &mut Workspace) -> Result<BenchSample, CliError> {
    let mut material = master.to_vec();
    material.extend_from_slice(&(index as u64).to_le_bytes());
    let seed = Seed::derive(ps.category, BENCH_KEY_LABEL, &material);

    let t = Instant::now();
    let sk = expand_private(ps, &seed)?;
    let pk = sk.public_key();
    let keygen_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let (ct, ss) = encapsulate(&pk, &mut Drbg::with_domain(BENCH_COINS_LABEL, &material));
    let encap_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let dec = decapsulate_with(&sk, &ct, decoder, ws);
    let decap_ms = t.elapsed().as_secs_f64() * 1e3;

    let iterations = match dec.outcome {
        DecapOutcome::Decoded { iterations } => iterations,
        _ => 0,
    };
    Ok(BenchSample {
        keygen_ms,
        encap_ms,
        decap_ms,
        attempts: sk.attempts(),
        iterations,
        failed: dec.secret != ss,
    })
}

fn bench(ps: &ParamSet, iterations: usize, master: &[u8], workers: usize) -> Result<Report, CliError> {
    let decoder = QDecoder::new(ps);
    let chunks: Vec<Result<Vec<(usize, BenchSample)>, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let decoder = &decoder;
                scope.spawn(move || {
                    let mut ws = Workspace::new(ps);
                    (w..iterations)
                        .step_by(workers)
                        .map(|i| bench_one(ps, master, i, decoder, &mut ws).map(|s| (i, s)))
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("bench worker panicked")).collect()
    });
    let mut samples = Vec::with_capacity(iterations);
    for chunk in chunks {
        samples.extend(chunk?);
    }
    samples.sort_by_key(|(i, _)| *i);
    let stats = |f: fn(&BenchSample) -> f64| OpStats::from_samples(&samples.iter().map(|(_, s)| f(s)).collect::<Vec<_>>());
    Ok(Report::Bench(BenchReport {
        params: ps.id(),
        iterations,
        workers,
        keygen: stats(|s| s.keygen_ms),
        encap: stats(|s| s.encap_ms),
        decap: stats(|s| s.decap_ms),
        keygen_attempts: samples.iter().map(|(_, s)| s.attempts).sum(),
        decoder_iterations: samples.iter().map(|(_, s)| s.iterations).sum(),
        decode_failures: samples.iter().filter(|(_, s)| s.failed).count(),
    }))
}
