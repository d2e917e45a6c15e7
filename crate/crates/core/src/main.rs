use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use casimir_bec::config::parse_config;
use casimir_bec::scenario::{run_scenario, Command};
use casimir_bec::validate::run_validate;
use casimir_bec::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

/// Casimir-Polder band gaps in an elongated condensate and their Bragg signatures.
#[derive(Parser)]
#[command(name = "casimir-bec", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Checked for syntax only; the benchmark scenarios are built in.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lateral potential coefficients and profile.
    Potential(RunArgs),
    /// First-order gaps and band branches.
    Spectrum(RunArgs),
    /// Bloch bands and gaps by direct BdG diagonalization.
    Bdg(RunArgs),
    /// Dynamic structure factor at the probe momentum.
    Dsf(RunArgs),
    /// Momentum transfer during a Bragg pulse and its detuning sweep.
    Bragg(RunArgs),
    /// Reproduce the benchmark numbers and consistency checks.
    Validate(ValidateArgs),
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::Config(_) => ExitCode::from(EXIT_CONFIG),
        _ => ExitCode::from(EXIT_FAILURE),
    }
}

fn run(command: Command, args: RunArgs) -> ExitCode {
    let config = match parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(&Error::Config(e)),
    };
    match run_scenario(&config, command, &args.out) {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            for f in &summary.files {
                println!("wrote {} ({} rows)", args.out.join(&f.name).display(), f.rows);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn validate(args: ValidateArgs) -> ExitCode {
    if let Some(path) = &args.config {
        if let Err(e) = parse_config(path) {
            return fail(&Error::Config(e));
        }
    }
    let report = match run_validate(&args.out) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    for r in &report.rows {
        println!(
            "{} [{:>2}] {}: computed {:.6e} {}, deviation {:.3e} ({}, tolerance {:.3e})",
            if r.pass { "PASS" } else { "FAIL" },
            r.criterion,
            r.quantity,
            r.computed,
            r.unit,
            r.deviation,
            r.check.name(),
            r.tolerance
        );
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} of {} rows failed", report.failures().count(), report.rows.len());
        ExitCode::from(EXIT_FAILURE)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Potential(a) => run(Command::Potential, a),
        Cmd::Spectrum(a) => run(Command::Spectrum, a),
        Cmd::Bdg(a) => run(Command::Bdg, a),
        Cmd::Dsf(a) => run(Command::Dsf, a),
        Cmd::Bragg(a) => run(Command::Bragg, a),
        Cmd::Validate(a) => validate(a),
    }
}
