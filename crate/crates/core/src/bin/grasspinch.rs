//! Command-line entry point.
//!
//! Exit codes mirror the report status: 0 pass, 1 fail, 2
//! hypothesis-not-met, 3 inconclusive; 64 for malformed configuration or
//! invocation, 65 for an unknown catalog entry.

use clap::{Args, Parser, Subcommand};
use grasspinch::catalog;
use grasspinch::immersion::{load_immersion_json, Immersion};
use grasspinch::pinching::hol_samples;
use grasspinch::report::{
    catalog_csv, catalog_rows, catalog_text, hol_samples_csv, run_identities, run_integrate,
    run_verify, text_summary, to_json, um_plan_for, um_samples_csv, RunConfig,
    VerificationReport,
};
use grasspinch::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "grasspinch",
    version,
    about = "Numerical verification of the pinching/parallelism equivalence for \
             holomorphic immersions into complex Grassmannians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline on one immersion: identities, flatness gate, verdict,
    /// integration
    Verify(CommonArgs),
    /// Ambient identity battery on a Grassmannian
    Identities(IdentityArgs),
    /// List catalog members with their frozen expectations
    Catalog(CatalogArgs),
    /// Sphere-bundle integration suite on one immersion
    Integrate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Catalog descriptor `name[:params]` or path to an immersion JSON file
    #[arg(long)]
    immersion: Option<String>,
    /// JSON run configuration; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for every sampling plan
    #[arg(long)]
    seed: Option<u64>,
    /// Minimization grid nodes per real axis
    #[arg(long)]
    grid: Option<usize>,
    /// Quadrature base density per real axis
    #[arg(long)]
    integration_grid: Option<usize>,
    /// Fiber directions per base point
    #[arg(long)]
    fiber_samples: Option<usize>,
    /// Stdout rendering: json, csv, or text
    #[arg(long)]
    format: Option<String>,
    /// Also write the JSON report to this path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the CSV sample export to this path
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct IdentityArgs {
    /// Ambient dimension (battery runs on Gr_p(C^n))
    #[arg(long)]
    n: Option<usize>,
    /// Plane dimension
    #[arg(long)]
    p: Option<usize>,
    /// Random draws
    #[arg(long)]
    samples: Option<usize>,
    /// JSON run configuration; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for the draws
    #[arg(long)]
    seed: Option<u64>,
    /// Stdout rendering: json or text
    #[arg(long)]
    format: Option<String>,
    /// Also write the JSON report to this path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CatalogArgs {
    /// Stdout rendering: json, csv, or text
    #[arg(long)]
    format: Option<String>,
    /// Also write the JSON listing to this path
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for_error(&err))
        }
    }
}

fn exit_for_error(err: &Error) -> u8 {
    match err {
        Error::CatalogMiss(_) => 65,
        Error::MalformedConfig(_)
        | Error::MalformedImmersion(_)
        | Error::Json(_)
        | Error::InvalidParameter(_) => 64,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<u8> {
    init_threads()?;
    let status = match cli.command {
        Command::Verify(args) => cmd_verify(args)?,
        Command::Identities(args) => cmd_identities(args)?,
        Command::Catalog(args) => cmd_catalog(args)?,
        Command::Integrate(args) => cmd_integrate(args)?,
    };
    Ok(status)
}

/// Applies `GRASSPINCH_THREADS` to the global worker pool before any
/// parallel stage runs.
fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("GRASSPINCH_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        Error::MalformedConfig(format!(
            "GRASSPINCH_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    if threads == 0 {
        return Err(Error::MalformedConfig(
            "GRASSPINCH_THREADS must be a positive integer, got `0`".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::MalformedConfig(e.to_string()))
}

/// Loads the configuration file when given, otherwise starts from defaults;
/// the subcommand name always wins over the file's `command` field.
fn load_config(command: &str, path: &Option<PathBuf>) -> Result<RunConfig> {
    let mut config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                Error::MalformedConfig(format!("cannot read config {}: {e}", p.display()))
            })?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::new(command),
    };
    config.command = command.to_string();
    Ok(config)
}

fn apply_common(mut config: RunConfig, args: &CommonArgs) -> Result<RunConfig> {
    if let Some(v) = &args.immersion {
        config.immersion = Some(v.clone());
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.grid {
        config.grid = v;
    }
    if let Some(v) = args.integration_grid {
        config.integration_grid = Some(v);
    }
    if let Some(v) = args.fiber_samples {
        config.fiber_samples = v;
    }
    if let Some(v) = &args.format {
        config.format = v.clone();
    }
    if let Some(v) = &args.out {
        config.out = Some(v.display().to_string());
    }
    if let Some(v) = &args.csv {
        config.csv = Some(v.display().to_string());
    }
    config.validate()?;
    Ok(config)
}

/// Catalog lookup first; a descriptor that misses the catalog but names an
/// existing file is read as a user-supplied immersion JSON.
fn resolve_immersion(desc: &str) -> Result<Immersion> {
    match catalog::build(desc) {
        Ok(imm) => Ok(imm),
        Err(Error::CatalogMiss(_)) if std::path::Path::new(desc).is_file() => {
            let text = std::fs::read_to_string(desc)?;
            load_immersion_json(&text)
        }
        Err(e) => Err(e),
    }
}

fn selected_immersion(config: &RunConfig) -> Result<Immersion> {
    let desc = config.immersion.as_deref().ok_or_else(|| {
        Error::MalformedConfig(
            "no immersion selected; pass --immersion NAME[:params] or a JSON path".into(),
        )
    })?;
    resolve_immersion(desc)
}

/// Renders the report to stdout in the configured format and mirrors the
/// JSON (and optional CSV) to the configured paths.
fn emit_report(
    report: &VerificationReport,
    config: &RunConfig,
    csv: Option<&str>,
) -> Result<()> {
    let no_csv = || {
        Error::MalformedConfig(
            "this command has no CSV sample export; use --format json or text".into(),
        )
    };
    let json = to_json(report)?;
    match config.format.as_str() {
        "json" => print!("{json}"),
        "csv" => print!("{}", csv.ok_or_else(no_csv)?),
        _ => print!("{}", text_summary(report)),
    }
    if let Some(path) = &config.out {
        std::fs::write(path, json.as_bytes())?;
    }
    if let Some(path) = &config.csv {
        std::fs::write(path, csv.ok_or_else(no_csv)?.as_bytes())?;
    }
    Ok(())
}

fn cmd_verify(args: CommonArgs) -> Result<u8> {
    let config = apply_common(load_config("verify", &args.config)?, &args)?;
    let imm = selected_immersion(&config)?;
    let report = run_verify(&imm, &config)?;
    let csv = if config.format == "csv" || config.csv.is_some() {
        let samples = hol_samples(&imm, &config.search_plan(), &config.diff_config()?)?;
        Some(hol_samples_csv(&samples))
    } else {
        None
    };
    emit_report(&report, &config, csv.as_deref())?;
    Ok(report.status.exit_code() as u8)
}

fn cmd_integrate(args: CommonArgs) -> Result<u8> {
    let config = apply_common(load_config("integrate", &args.config)?, &args)?;
    let imm = selected_immersion(&config)?;
    let report = run_integrate(&imm, &config)?;
    let csv = if config.format == "csv" || config.csv.is_some() {
        Some(um_samples_csv(&um_plan_for(&imm, &config)?))
    } else {
        None
    };
    emit_report(&report, &config, csv.as_deref())?;
    Ok(report.status.exit_code() as u8)
}

/// Resolves the battery target: explicit `--n`/`--p` flags win, then a
/// `gr:n=…,p=…` immersion entry in the config file, then `Gr_2(C^4)`.
fn identity_target(config: &RunConfig, args: &IdentityArgs) -> Result<(usize, usize)> {
    let mut n = 4usize;
    let mut p = 2usize;
    if let Some(desc) = &config.immersion {
        let rest = desc.strip_prefix("gr:").ok_or_else(|| {
            Error::MalformedConfig(format!(
                "identity battery target must look like `gr:n=4,p=2`, got `{desc}`"
            ))
        })?;
        for part in rest.split(',').filter(|s| !s.is_empty()) {
            let value = |v: &str| {
                v.parse::<usize>().map_err(|_| {
                    Error::MalformedConfig(format!("bad identity battery parameter `{part}`"))
                })
            };
            match part.split_once('=') {
                Some(("n", v)) => n = value(v)?,
                Some(("p", v)) => p = value(v)?,
                _ => {
                    return Err(Error::MalformedConfig(format!(
                        "unknown identity battery parameter `{part}`"
                    )))
                }
            }
        }
    }
    if let Some(v) = args.n {
        n = v;
    }
    if let Some(v) = args.p {
        p = v;
    }
    Ok((n, p))
}

fn cmd_identities(args: IdentityArgs) -> Result<u8> {
    let mut config = load_config("identities", &args.config)?;
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.samples {
        config.identity_samples = v;
    }
    if let Some(v) = &args.format {
        config.format = v.clone();
    }
    if let Some(v) = &args.out {
        config.out = Some(v.display().to_string());
    }
    let (n, p) = identity_target(&config, &args)?;
    config.immersion = Some(format!("gr:n={n},p={p}"));
    config.validate()?;
    let report = run_identities(n, p, &config)?;
    emit_report(&report, &config, None)?;
    Ok(report.status.exit_code() as u8)
}

fn cmd_catalog(args: CatalogArgs) -> Result<u8> {
    let mut config = RunConfig::new("catalog");
    if let Some(v) = &args.format {
        config.format = v.clone();
    }
    if let Some(v) = &args.out {
        config.out = Some(v.display().to_string());
    }
    config.validate()?;
    let rows = catalog_rows()?;
    let mut json = serde_json::to_string_pretty(&rows)?;
    json.push('\n');
    match config.format.as_str() {
        "json" => print!("{json}"),
        "csv" => print!("{}", catalog_csv(&rows)),
        _ => print!("{}", catalog_text(&rows)),
    }
    if let Some(path) = &config.out {
        std::fs::write(path, json.as_bytes())?;
    }
    Ok(0)
}
