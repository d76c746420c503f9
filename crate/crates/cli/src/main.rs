use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use sharpeig_cli::config::{self, ExperimentConfig};
use sharpeig_cli::{run, CliError, OUT_DIR_ENV};

/// Numerical experiments on sharp principal-eigenvalue estimates.
///
/// Each subcommand reads an optional JSON config; any field can be set or
/// overridden with `--field value` (nested fields as `--domain.kind circle`).
/// The report is printed to stdout and written beside the data files.
/// Exit codes: 0 all checks pass, 1 a check fails, 2 usage error, 3 numerical error.
#[derive(Parser)]
#[command(name = "sharpeig", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// π_p and sin_p tables, Pythagorean identity and inverse checks.
    Ptrig(RunArgs),
    /// Γ-calculus report for σu'' + Xu' and a test function.
    Gamma(RunArgs),
    /// Model equation solution and the (a, δ, m) curves.
    Model(RunArgs),
    /// Principal Neumann eigenpair of the p-operator.
    Eig(RunArgs),
    /// Collapsing-tube sharpness table.
    Tube(RunArgs),
    /// Spectrum of u'' + Xu' and the model eigenvalue bound.
    Nonsym(RunArgs),
    /// Drift heat flow and the modulus-of-continuity comparison.
    Heat(RunArgs),
    /// Every subcommand at default size.
    VerifyAll(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory; takes precedence over $SHARPEIG_OUT_DIR and the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Field overrides, `--field value` or `--field=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--FIELD VALUE")]
    overrides: Vec<String>,
}

impl Command {
    fn split(self) -> (&'static str, RunArgs) {
        match self {
            Self::Ptrig(a) => ("ptrig", a),
            Self::Gamma(a) => ("gamma", a),
            Self::Model(a) => ("model", a),
            Self::Eig(a) => ("eig", a),
            Self::Tube(a) => ("tube", a),
            Self::Nonsym(a) => ("nonsym", a),
            Self::Heat(a) => ("heat", a),
            Self::VerifyAll(a) => ("verify-all", a),
        }
    }
}

fn load(args: RunArgs, command: &str) -> Result<ExperimentConfig, CliError> {
    let mut overrides = config::parse_overrides(&args.overrides)?;
    // `--config` and `--out-dir` may also trail the field overrides
    let mut config_path = args.config;
    let mut out_dir = args.out_dir;
    overrides.retain(|(k, v)| match (k.as_str(), v) {
        ("config", Value::String(s)) => {
            config_path = Some(PathBuf::from(s));
            false
        }
        ("out_dir", Value::String(s)) => {
            out_dir = Some(PathBuf::from(s));
            false
        }
        _ => true,
    });
    let base = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
            Some(
                serde_json::from_str::<Value>(&text)
                    .map_err(|e| CliError::usage(format!("config {} is not valid JSON: {e}", path.display())))?,
            )
        }
        None => None,
    };
    let mut cfg = config::build(command, base, &overrides)?;
    let env_dir = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    if let Some(dir) = out_dir.or(env_dir) {
        cfg.set_out_dir(dir);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let (command, args) = Cli::parse().command.split();
    let outcome = load(args, command).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("serializable report");
            println!("{text}");
            for v in report.verdicts.iter().filter(|v| !v.pass) {
                eprintln!("FAIL {}: {}", v.check, v.detail);
            }
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            eprintln!("sharpeig {command}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
