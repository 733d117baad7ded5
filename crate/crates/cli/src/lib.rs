//! Command-line front end: reads market files, runs the exact analyses and
//! writes self-verifying JSON certificates.
//!
//! Exit codes: 0 when a verdict was computed (negative verdicts included),
//! 1 for input errors, 2 when the enumeration cap is exceeded, 3 when an
//! internal consistency check fails.

pub mod cert;
pub mod checks;
pub mod error;
pub mod files;
pub mod procedures;

use cert::{emit, verify_as, Certificate, Emitted, Inputs, VerifyReport};
use clap::{Parser, Subcommand, ValueEnum};
use error::{CliError, CliResult};
use files::{
    load, parse_json, read_text, write_atomic, MarketFile, PairFile, PayoffFile, Rat, SequenceFile,
};
use procedures::hs::{pair_from_market, HsCheck, HsDualWitnessCmd, HsModulus, HsWitnessCmd};
use procedures::sequence::{
    BuildContiguous, CertifyNaa1, CertifyNaa2, ScanAa1, ScanAa2, WeakContiguity,
};
use procedures::single::{CheckNa, Ftap, MartingalePolytopeCmd, Superhedge};
use robust_ftap::large_market::{default_c_schedule, default_grid, default_target_levels};
use robust_ftap::{parse_rational, EnumerationCap, Rational};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const MAX_ENUM_ENV: &str = "ROBUST_FTAP_MAX_ENUM";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "robust-ftap",
    version,
    about = "Exact robust no-arbitrage analysis with verifiable certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Market, sequence or pair file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Largest quasi-sure support enumerated exhaustively.
    #[arg(long, global = true)]
    pub max_enum: Option<usize>,
    /// Comma-separated rationals.
    #[arg(long, global = true)]
    pub alpha_grid: Option<String>,
    /// Comma-separated rationals.
    #[arg(long, global = true)]
    pub epsilon_grid: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub epsilon: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Robust no-arbitrage check.
    CheckNa,
    /// Vertices of the martingale polytope.
    MartingalePolytope,
    /// Cross-check of NA against martingale domination of every prior.
    Ftap,
    /// Superhedging price and hedge of a payoff.
    Superhedge {
        #[arg(long)]
        payoff: PathBuf,
    },
    /// Primal and dual Halmos-Savage hypotheses at (epsilon, delta).
    HsCheck,
    /// Dominating measures from the primal theorem.
    HsWitness,
    /// Dominating measures from the dual theorem.
    HsDualWitness,
    /// Halmos-Savage modulus at epsilon.
    HsModulus {
        #[arg(long, default_value = "primal", value_parser = ["primal", "dual"])]
        kind: String,
    },
    /// Search for asymptotic arbitrage of the first kind.
    ScanAa1 {
        /// Strictly decreasing risk schedule c_k; defaults to 1/k.
        #[arg(long)]
        c_schedule: Option<String>,
    },
    /// Search for asymptotic arbitrage of the second kind.
    ScanAa2 {
        /// Nondecreasing probability levels; defaults to 1 - 1/(k+1).
        #[arg(long)]
        target_levels: Option<String>,
    },
    /// Uniform primal moduli over the sequence.
    CertifyNaa1,
    /// Uniform dual moduli over the sequence.
    CertifyNaa2,
    /// Martingale measures to which the priors are contiguous.
    BuildContiguous,
    /// Martingale measures for the weak contiguity statement at epsilon.
    WeakContiguity,
    /// Re-check a certificate without recomputing it.
    Verify {
        #[arg(long)]
        certificate: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckNa => "check-na",
            Command::MartingalePolytope => "martingale-polytope",
            Command::Ftap => "ftap",
            Command::Superhedge { .. } => "superhedge",
            Command::HsCheck => "hs-check",
            Command::HsWitness => "hs-witness",
            Command::HsDualWitness => "hs-dual-witness",
            Command::HsModulus { .. } => "hs-modulus",
            Command::ScanAa1 { .. } => "scan-aa1",
            Command::ScanAa2 { .. } => "scan-aa2",
            Command::CertifyNaa1 => "certify-naa1",
            Command::CertifyNaa2 => "certify-naa2",
            Command::BuildContiguous => "build-contiguous",
            Command::WeakContiguity => "weak-contiguity",
            Command::Verify { .. } => "verify",
        }
    }
}

/// Flag, then environment, then the library default.
pub fn resolve_cap(flag: Option<usize>) -> CliResult<usize> {
    if let Some(c) = flag {
        return Ok(c);
    }
    match std::env::var(MAX_ENUM_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::input(format!(
                "{MAX_ENUM_ENV} must be a nonnegative integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(EnumerationCap::DEFAULT.0),
    }
}

fn flag_rational(value: &Option<String>, flag: &str) -> CliResult<Option<Rat>> {
    value
        .as_deref()
        .map(|s| {
            parse_rational(s.trim())
                .map(Rat)
                .map_err(|e| CliError::input(format!("--{flag}: {e}")))
        })
        .transpose()
}

fn flag_list(value: &Option<String>, flag: &str) -> CliResult<Option<Vec<Rat>>> {
    value
        .as_deref()
        .map(|s| {
            s.split(',')
                .map(|part| {
                    parse_rational(part.trim())
                        .map(Rat)
                        .map_err(|e| CliError::input(format!("--{flag}: {e}")))
                })
                .collect()
        })
        .transpose()
}

fn required<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::input(format!("--{flag} is required for this command")))
}

fn input_path(cli: &Cli) -> CliResult<&Path> {
    cli.input
        .as_deref()
        .ok_or_else(|| CliError::input("--input is required for this command"))
}

fn or_default(v: Option<Vec<Rat>>, default: Vec<Rational>) -> Option<Vec<Rat>> {
    Some(v.unwrap_or_else(|| default.into_iter().map(Rat).collect()))
}

/// Reads the files and flags a command needs into canonical inputs.
pub fn assemble_inputs(cli: &Cli) -> CliResult<Inputs> {
    let mut inputs = Inputs {
        max_enum: resolve_cap(cli.max_enum)?,
        ..Inputs::default()
    };
    let epsilon = flag_rational(&cli.epsilon, "epsilon")?;
    let delta = flag_rational(&cli.delta, "delta")?;
    match &cli.command {
        Command::CheckNa | Command::MartingalePolytope | Command::Ftap => {
            inputs.market = Some(load(input_path(cli)?)?);
        }
        Command::Superhedge { payoff } => {
            inputs.market = Some(load(input_path(cli)?)?);
            inputs.payoff = Some(load::<PayoffFile>(payoff)?.values());
        }
        Command::HsCheck
        | Command::HsWitness
        | Command::HsDualWitness
        | Command::HsModulus { .. } => {
            let path = input_path(cli)?;
            let text = read_text(path)?;
            let origin = path.display().to_string();
            let is_pair = serde_json::from_str::<serde_json::Value>(&text)
                .map(|v| v.get("q_vertices").is_some())
                .unwrap_or(false);
            if is_pair {
                inputs.pair = Some(parse_json::<PairFile>(&text, &origin)?);
            } else {
                let mf: MarketFile = parse_json(&text, &origin)?;
                inputs.pair = Some(pair_from_market(&mf, EnumerationCap(inputs.max_enum))?);
                inputs.market = Some(mf);
            }
            inputs.epsilon = Some(required(epsilon, "epsilon")?);
            if let Command::HsModulus { kind } = &cli.command {
                inputs.kind = Some(kind.clone());
            } else {
                inputs.delta = Some(required(delta, "delta")?);
            }
        }
        Command::ScanAa1 { c_schedule } => {
            let seq: SequenceFile = load(input_path(cli)?)?;
            let n = seq.markets.len();
            inputs.sequence = Some(seq);
            inputs.alpha_grid =
                or_default(flag_list(&cli.alpha_grid, "alpha-grid")?, default_grid());
            inputs.schedule =
                or_default(flag_list(c_schedule, "c-schedule")?, default_c_schedule(n));
        }
        Command::ScanAa2 { target_levels } => {
            let seq: SequenceFile = load(input_path(cli)?)?;
            let n = seq.markets.len();
            inputs.sequence = Some(seq);
            inputs.alpha_grid =
                or_default(flag_list(&cli.alpha_grid, "alpha-grid")?, default_grid());
            inputs.schedule = or_default(
                flag_list(target_levels, "target-levels")?,
                default_target_levels(n),
            );
        }
        Command::CertifyNaa1 | Command::CertifyNaa2 => {
            inputs.sequence = Some(load(input_path(cli)?)?);
            inputs.epsilon_grid = or_default(
                flag_list(&cli.epsilon_grid, "epsilon-grid")?,
                default_grid(),
            );
        }
        Command::BuildContiguous => {
            inputs.sequence = Some(load(input_path(cli)?)?);
        }
        Command::WeakContiguity => {
            inputs.sequence = Some(load(input_path(cli)?)?);
            inputs.epsilon = Some(required(epsilon, "epsilon")?);
        }
        Command::Verify { .. } => {
            return Err(CliError::input("verify takes a certificate, not inputs"))
        }
    }
    Ok(inputs)
}

/// Runs the named command on assembled inputs.
pub fn emit_named(command: &str, inputs: &Inputs) -> CliResult<Emitted> {
    match command {
        "check-na" => emit::<CheckNa>(inputs),
        "martingale-polytope" => emit::<MartingalePolytopeCmd>(inputs),
        "ftap" => emit::<Ftap>(inputs),
        "superhedge" => emit::<Superhedge>(inputs),
        "hs-check" => emit::<HsCheck>(inputs),
        "hs-witness" => emit::<HsWitnessCmd>(inputs),
        "hs-dual-witness" => emit::<HsDualWitnessCmd>(inputs),
        "hs-modulus" => emit::<HsModulus>(inputs),
        "scan-aa1" => emit::<ScanAa1>(inputs),
        "scan-aa2" => emit::<ScanAa2>(inputs),
        "certify-naa1" => emit::<CertifyNaa1>(inputs),
        "certify-naa2" => emit::<CertifyNaa2>(inputs),
        "build-contiguous" => emit::<BuildContiguous>(inputs),
        "weak-contiguity" => emit::<WeakContiguity>(inputs),
        other => Err(CliError::input(format!("unknown command {other:?}"))),
    }
}

/// Re-checks a certificate; never recomputes a witness.
pub fn verify_certificate(cert: &Certificate) -> VerifyReport {
    match cert.command.as_str() {
        "check-na" => verify_as::<CheckNa>(cert),
        "martingale-polytope" => verify_as::<MartingalePolytopeCmd>(cert),
        "ftap" => verify_as::<Ftap>(cert),
        "superhedge" => verify_as::<Superhedge>(cert),
        "hs-check" => verify_as::<HsCheck>(cert),
        "hs-witness" => verify_as::<HsWitnessCmd>(cert),
        "hs-dual-witness" => verify_as::<HsDualWitnessCmd>(cert),
        "hs-modulus" => verify_as::<HsModulus>(cert),
        "scan-aa1" => verify_as::<ScanAa1>(cert),
        "scan-aa2" => verify_as::<ScanAa2>(cert),
        "certify-naa1" => verify_as::<CertifyNaa1>(cert),
        "certify-naa2" => verify_as::<CertifyNaa2>(cert),
        "build-contiguous" => verify_as::<BuildContiguous>(cert),
        "weak-contiguity" => verify_as::<WeakContiguity>(cert),
        other => VerifyReport {
            command: other.to_string(),
            accepted: false,
            claims_checked: 0,
            reason: Some("unknown command".into()),
        },
    }
}

/// Parses certificate JSON text and verifies it.
pub fn verify_text(text: &str) -> CliResult<VerifyReport> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::input(format!("certificate is not JSON: {e}")))?;
    Ok(match serde_json::from_value::<Certificate>(value) {
        Ok(cert) => verify_certificate(&cert),
        Err(e) => VerifyReport {
            command: String::new(),
            accepted: false,
            claims_checked: 0,
            reason: Some(format!("not a certificate: {e}")),
        },
    })
}

fn render_certificate(e: &Emitted, format: Format) -> CliResult<String> {
    let c = &e.certificate;
    Ok(match format {
        Format::Json => {
            serde_json::to_string_pretty(c).map_err(|e| CliError::Internal(e.to_string()))? + "\n"
        }
        Format::Text => {
            let mut out = format!("command: {}\n", c.command);
            if let Some(s) = &c.scope {
                out += &format!("scope: {s}\n");
            }
            out += &format!("verdict: {}\n", c.verdict);
            for n in &e.notes {
                out += &format!("{n}\n");
            }
            out += &format!("transcript: {} claims, all hold\n", c.transcript.len());
            out += &format!("inputs digest: {}\n", c.inputs_digest);
            out
        }
    })
}

fn render_report(r: &VerifyReport, format: Format) -> CliResult<String> {
    Ok(match format {
        Format::Json => {
            serde_json::to_string_pretty(r).map_err(|e| CliError::Internal(e.to_string()))? + "\n"
        }
        Format::Text if r.accepted => format!(
            "certificate accepted: {} ({} claims re-checked)\n",
            r.command, r.claims_checked
        ),
        Format::Text => format!(
            "certificate rejected: {}\n",
            r.reason.as_deref().unwrap_or("unknown reason")
        ),
    })
}

fn deliver(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.output {
        Some(path) => write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    if let Command::Verify { certificate } = &cli.command {
        let report = verify_text(&read_text(certificate)?)?;
        return deliver(cli, &render_report(&report, cli.format)?);
    }
    let inputs = assemble_inputs(cli)?;
    let emitted = emit_named(cli.command.name(), &inputs)?;
    deliver(cli, &render_certificate(&emitted, cli.format)?)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
