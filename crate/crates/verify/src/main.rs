use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hypverify::suites::{lookup, SUITES};
use hypverify::{parse_param, run, Params, VerifyError};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Run a verification suite and print its report.
///
/// Exit status: 0 when every trial passes, 1 on a failed trial, 2 on a usage error.
#[derive(Parser, Debug)]
#[command(name = "hypverify", version, after_help = suite_help())]
struct Cli {
    /// Suite to run
    #[arg(long)]
    suite: String,
    /// Run seed; trial i uses a seed derived from it
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of random trials [default: 1000, pipeline 3]
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides the suite's `tol` parameter
    #[arg(long)]
    tol: Option<f64>,
    /// Suite parameter as key=value; repeatable
    #[arg(long = "param", short = 'p', value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format; csv holds the per-trial margins only
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn suite_help() -> String {
    let mut s = String::from("Suites and parameters (defaults in brackets):\n");
    for suite in &SUITES {
        s += &format!("\n  {} ({} trials): {}\n", suite.name, suite.default_trials, suite.about);
        for p in suite.params {
            s += &format!("      {} [{}]  {}\n", p.name, p.default, p.help);
        }
    }
    s
}

fn main_inner(cli: Cli) -> Result<bool, VerifyError> {
    let mut params = Params::new();
    for p in &cli.params {
        let (k, v) = parse_param(p)?;
        params.insert(k, v);
    }
    if let Some(t) = cli.tol {
        params.insert("tol".into(), t);
    }
    let trials = match cli.trials {
        Some(t) => t,
        None => lookup(&cli.suite).ok_or_else(|| VerifyError::UnknownSuite(cli.suite.clone()))?.default_trials,
    };
    let report = run(&cli.suite, &params, cli.seed, trials)?;
    let text = match cli.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv()?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| VerifyError::Io(e.to_string()))?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| VerifyError::Io(e.to_string()))?,
    }
    eprintln!(
        "{}: {} passed, {} failed, max violation {:e}",
        report.suite, report.summary.pass_count, report.summary.fail_count, report.summary.max_violation
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
