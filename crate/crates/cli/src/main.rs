mod args;
mod commands;

use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context as _, Result};
use chargebid::error::{RepairError, SolveError};
use clap::Parser;
use serde_json::{json, Value as Json};

use args::{Cli, Command, Global, ModeArg};
use commands::{Outcome, Output};

fn report(argv: &[String], global: &Global, outcome: &Outcome, result: &Json, warnings: &[String], elapsed: f64) -> Json {
    let mut doc = json!({
        "command": argv,
        "input_digest": outcome.digest,
        "mode": match global.mode { ModeArg::Exact => "exact", ModeArg::Approx => "approx" },
        "eps": global.eps,
        "result": result,
        "warnings": warnings,
    });
    if global.timing {
        doc["timing_ms"] = json!(elapsed);
    }
    doc
}

fn run(cli: &Cli, argv: &[String]) -> Result<i32> {
    let start = Instant::now();
    let g = &cli.global;
    let outcome = match &cli.command {
        Command::Solve(a) => commands::solve_cmd(g, a),
        Command::Table(a) => commands::table_cmd(g, a),
        Command::Simulate(a) => commands::simulate_cmd(g, a),
        Command::Repair(a) => commands::repair_cmd(g, a),
        Command::Reduce(a) => commands::reduce_cmd(g, a),
        Command::Export(a) => commands::export_cmd(g, a),
        Command::Check(a) => commands::check_cmd(g, a),
    }?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let text = match &outcome.output {
        Output::Report { result, warnings } => {
            serde_json::to_string_pretty(&report(argv, g, &outcome, result, warnings, elapsed))? + "\n"
        }
        Output::Text(t) => t.clone(),
    };
    match &g.out {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            for (ext, body) in &outcome.side_files {
                let side = path.with_extension(ext);
                std::fs::write(&side, body).with_context(|| format!("writing {}", side.display()))?;
            }
        }
        None if outcome.stdout_line.is_none() => print!("{text}"),
        None => {}
    }
    if let Some(line) = &outcome.stdout_line {
        println!("{line}");
    }
    if g.timing && !matches!(outcome.output, Output::Report { .. }) {
        eprintln!("elapsed {elapsed:.3} ms");
    }
    Ok(outcome.exit_code)
}

/// Non-convergence exits with 2; everything else that fails exits with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        let solve = cause.downcast_ref::<SolveError>().or_else(|| match cause.downcast_ref::<RepairError>() {
            Some(RepairError::Solve(e)) => Some(e),
            _ => None,
        });
        if let Some(SolveError::NotConverged { .. }) = solve {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(&cli, &argv) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
