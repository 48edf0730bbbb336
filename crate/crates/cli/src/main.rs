mod args;
mod commands;
mod output;

use std::process::ExitCode;

use anyhow::Result;
use branchdyn::group::Tower;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command, Common};
use commands::Ctx;
use output::Report;

const EXIT_USAGE: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

fn common(command: &Command) -> &Common {
    match command {
        Command::Orders(c) | Command::Invariants(c) | Command::F(c) | Command::Hdim(c) => c,
        Command::Markov { common, .. }
        | Command::Measure { common, .. }
        | Command::Patterns { common, .. }
        | Command::Iso { common, .. }
        | Command::Sample { common, .. } => common,
    }
}

fn name(command: &Command) -> &'static str {
    match command {
        Command::Orders(_) => "orders",
        Command::Invariants(_) => "invariants",
        Command::F(_) => "f",
        Command::Hdim(_) => "hdim",
        Command::Markov { .. } => "markov",
        Command::Measure { .. } => "measure",
        Command::Patterns { .. } => "patterns",
        Command::Iso { .. } => "iso",
        Command::Sample { .. } => "sample",
    }
}

fn dispatch(command: &Command, ctx: &Ctx) -> Result<Report> {
    match command {
        Command::Orders(_) => commands::orders(ctx),
        Command::Invariants(_) => commands::invariants(ctx),
        Command::F(_) => commands::f(ctx),
        Command::Hdim(_) => commands::hdim(ctx),
        Command::Markov { k, sweep, letter, method, .. } => commands::markov(ctx, *k, sweep, *letter, *method),
        Command::Measure { depth, sweep, .. } => commands::measure(ctx, *depth, sweep),
        Command::Patterns { depth, sample_level, .. } => commands::patterns(ctx, *depth, *sample_level),
        Command::Iso { other, depth, .. } => {
            let other = Tower::new(other.source().load()?);
            commands::iso(ctx, &other, *depth)
        }
        Command::Sample { count, .. } => commands::sample(ctx, *count),
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let common = common(&cli.command);
    common.validate()?;
    let spec = common.source.load()?;
    let base = common.display_base(&spec)?;
    let ctx = Ctx {
        common,
        tower: Tower::new(spec.clone()),
        base,
    };
    let report = match dispatch(&cli.command, &ctx) {
        Ok(r) => r,
        Err(e) => match e.downcast_ref::<branchdyn::Error>() {
            Some(inner) if inner.is_check_failure() => Report::new(
                json!({ "failure": inner.to_string() }),
                vec!["failure"],
                vec![vec![inner.to_string()]],
            )
            .with_passed(false),
            _ => return Err(e),
        },
    };
    let envelope = output::envelope(name(&cli.command), common, &spec, base, &report);
    let bytes = output::render(common.format, &envelope, &report)?;
    output::emit(common, &bytes)?;
    Ok(if report.passed { 0 } else { EXIT_CHECK_FAILED })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let resource = e
                .chain()
                .filter_map(|c| c.downcast_ref::<branchdyn::Error>())
                .any(|c| c.is_resource_limit());
            ExitCode::from(if resource { EXIT_RESOURCE } else { EXIT_USAGE })
        }
    }
}
