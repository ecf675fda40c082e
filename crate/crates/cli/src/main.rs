mod args;
mod commands;
mod config;
mod report;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::Parser;
use log::info;

use crate::args::{Cli, Command, Output};
use crate::config::{ConfigEcho, RunConfig};
use crate::report::{round_numbers, JsonReport};

const THREADS_ENV: &str = "WEYLROOF_THREADS";

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging(cli.verbose);
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
}

fn resolve_threads(flag: Option<usize>) -> anyhow::Result<usize> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_ENV}={v:?} is not a thread count"))?,
            Err(_) => 1,
        },
    };
    if n == 0 {
        bail!("thread count must be at least 1");
    }
    Ok(n)
}

/// Returns the number of violations.
fn run(cli: &Cli) -> anyhow::Result<usize> {
    let threads = resolve_threads(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    info!("using {threads} thread(s)");
    pool.install(|| match &cli.command {
        Command::Replay { report, out } => replay(report, out, cli.timing, threads),
        cmd => {
            let run = config::from_command(cmd)?.expect("non-replay command");
            let echo = ConfigEcho { run, threads };
            let report = execute(echo, cmd_output(cmd), cli.timing)?;
            Ok(report.summary.violations)
        }
    })
}

fn cmd_output(cmd: &Command) -> &Output {
    match cmd {
        Command::ChannelShow { out, .. }
        | Command::VerifyBound { out, .. }
        | Command::Hhat { out, .. }
        | Command::Superadd { out, .. }
        | Command::Replay { out, .. } => out,
    }
}

/// Runs one configuration and writes every requested output.
fn execute(echo: ConfigEcho, out: &Output, timing: bool) -> anyhow::Result<JsonReport> {
    let start = Instant::now();
    let outcome = commands::execute(&echo.run)?;
    let mut summary = outcome.summary;
    if timing {
        summary.runtime_seconds = Some(start.elapsed().as_secs_f64());
    }
    let report = JsonReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_echo: echo,
        result_rows: outcome.rows,
        summary,
    };

    let json_to_stdout = out.json.as_deref() == Some(Path::new("-"));
    if json_to_stdout {
        eprint!("{}", outcome.text);
    } else {
        print!("{}", outcome.text);
        std::io::stdout().flush()?;
    }
    if let Some(path) = &out.json {
        report::write_text(path, &report.render()?)?;
    }
    if let Some(path) = &out.csv {
        outcome.table.write(path)?;
    }
    Ok(report)
}

fn replay(path: &Path, out: &Output, timing: bool, threads: usize) -> anyhow::Result<usize> {
    let original = JsonReport::read(path)?;
    let run: RunConfig = original.config_echo.run;
    let fresh = execute(ConfigEcho { run, threads }, out, timing)?;

    let mut expected = serde_json::Value::Array(original.result_rows);
    let mut actual = serde_json::Value::Array(fresh.result_rows);
    round_numbers(&mut expected);
    round_numbers(&mut actual);
    if expected != actual {
        eprintln!("replay: result rows differ from {}", path.display());
        return Ok(fresh.summary.violations.max(1));
    }
    eprintln!("replay: result rows match {}", path.display());
    Ok(fresh.summary.violations)
}
