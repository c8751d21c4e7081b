//! Library half of the `ledakem` command-line tool: argument definitions,
//! command implementations and their reports.

pub mod args;
pub mod commands;
pub mod report;

use std::fmt;

/// Exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    /// A requested check did not hold (KAT mismatch, DFR bound exceeded).
    pub const CHECK_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const FORMAT: u8 = 3;
    pub const CRYPTO: u8 = 4;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    /// Empty when the command already wrote its output.
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: exit::USAGE, message: msg.into() }
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Self { code: exit::FORMAT, message: msg.into() }
    }

    pub fn crypto(msg: impl Into<String>) -> Self {
        Self { code: exit::CRYPTO, message: msg.into() }
    }

    /// Output already printed; only the status remains.
    pub(crate) fn silent(check_failed: bool) -> Self {
        Self { code: if check_failed { exit::CHECK_FAILED } else { exit::OK }, message: String::new() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ledakem::Error> for CliError {
    fn from(e: ledakem::Error) -> Self {
        use ledakem::Error::*;
        let code = match &e {
            UnknownParams(_) | InvalidParams(_) => exit::USAGE,
            Format(_) | SeedLength { .. } => exit::FORMAT,
            RingMismatch { .. } | NotInvertible | InvalidSparse(_) | KeyGeneration { .. } => exit::CRYPTO,
        };
        Self { code, message: e.to_string() }
    }
}
