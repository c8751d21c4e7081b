use std::process::ExitCode;

use clap::Parser;
use ledakem_cli::args::Cli;
use ledakem_cli::{commands, exit};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let json = cli.json;
    match commands::run(cli.command, json) {
        Ok(report) => {
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            ExitCode::from(if report.check_failed() { exit::CHECK_FAILED } else { exit::OK })
        }
        Err(e) => {
            if !e.message.is_empty() {
                eprintln!("error: {e}");
                if json {
                    println!("{}", serde_json::json!({ "error": e.message, "code": e.code }));
                }
            }
            ExitCode::from(e.code)
        }
    }
}
