use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ledakem::{CheckModel, ParamSet};

pub const PARAMS_ENV: &str = "LEDAKEM_PARAMS";

#[derive(Debug, Parser)]
#[command(name = "ledakem", version, about = "LEDAkem key encapsulation tool")]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ParamsArg {
    /// Parameter set, e.g. cat1-n2, cat3-n4, cat5-n3.
    #[arg(long = "params", env = PARAMS_ENV, default_value = "cat1-n2", value_parser = parse_params)]
    pub params: ParamSet,
}

fn parse_params(s: &str) -> Result<ParamSet, String> {
    s.parse::<ParamSet>().map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum ModelArg {
    #[default]
    Expanded,
    Unexpanded,
}

impl From<ModelArg> for CheckModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Expanded => CheckModel::Expanded,
            ModelArg::Unexpanded => CheckModel::Unexpanded,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the parameter registry.
    Params,

    /// Generate a keypair: <prefix>.sk (seed only) and <prefix>.pk.
    Keygen {
        #[command(flatten)]
        params: ParamsArg,
        /// File holding the key seed, raw or hex.
        #[arg(long, conflicts_with = "system_entropy", required_unless_present = "system_entropy")]
        seed_file: Option<PathBuf>,
        /// Draw the seed from the operating system.
        #[arg(long)]
        system_entropy: bool,
        #[arg(long)]
        out_prefix: PathBuf,
        /// Overwrite existing files.
        #[arg(long)]
        force: bool,
    },

    /// Encapsulate against a public key file.
    Encap {
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long)]
        out_ct: PathBuf,
        #[arg(long)]
        out_ss: PathBuf,
        /// Deterministic coins instead of system entropy.
        #[arg(long)]
        coins_file: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },

    /// Decapsulate a ciphertext file.
    Decap {
        #[arg(long = "priv")]
        private: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        out_ss: PathBuf,
        /// Per-iteration decoder dump (syndrome weight, threshold, flips) as CSV.
        #[arg(long)]
        trace_csv: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },

    /// Write a known-answer test file.
    Kat {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Master seed, hex.
        #[arg(long, default_value = "00")]
        seed: String,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },

    /// Recompute every record of a known-answer test file.
    KatVerify { file: PathBuf },

    /// Time keygen, encap and decap.
    Bench {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value_t = 20)]
        iterations: usize,
        /// Master seed, hex.
        #[arg(long, default_value = "00")]
        seed: String,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },

    /// Print the decoder threshold table.
    Thresholds {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, value_enum, default_value_t)]
        model: ModelArg,
        /// Override the margin of the parameter set.
        #[arg(long)]
        delta: Option<f64>,
    },

    /// Montecarlo decoding-failure-rate run.
    Dfr {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Master seed, hex.
        #[arg(long, default_value = "00")]
        seed: String,
        /// 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        fixed_key: bool,
        #[arg(long, value_enum, default_value_t)]
        model: ModelArg,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_enum, default_value_t)]
        format: ReportFormat,
        /// Exit with status 1 when failures exceed this count.
        #[arg(long)]
        max_failures: Option<u64>,
    },
}
