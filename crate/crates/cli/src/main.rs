use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use rhcap_cli::{output::to_json_line, run, write_record, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli).and_then(|record| write_record(&record, cli.global.out.as_deref()));
    let elapsed = start.elapsed().as_secs_f64();
    match result {
        Ok(()) => {
            eprintln!("wall time: {elapsed:.3} s");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            let report = serde_json::json!({ "error": chain.first(), "causes": &chain[1..] });
            eprintln!("{}", to_json_line(&report).unwrap_or_else(|_| format!("error: {e:#}")));
            ExitCode::FAILURE
        }
    }
}
