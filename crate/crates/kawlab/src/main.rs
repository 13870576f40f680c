//! `kawlab` command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kawlab::catalog;
use kawlab::run::verify_dir;
use kawlab::{ExperimentConfig, HarnessError, Result, RunOptions};
use kawlab_core::optimal::ClaimOutcome;

#[derive(Parser)]
#[command(
    name = "kawlab",
    version,
    about = "Runs self-verifying reconstruction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lists the experiments.
    List,
    /// Prints the full configuration an experiment would run with.
    Show(RunArgs),
    /// Runs an experiment and writes its artifacts.
    Run(RunArgs),
    /// Checks a run directory against its manifest and re-evaluates its claims.
    Verify { dir: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment name, e.g. `coherence` or `thm-demo lambda`.
    name: Vec<String>,
    /// Configuration file; command-line options override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, default `kawlab-out/<experiment>`.
    #[arg(long)]
    out: Option<String>,
    /// Transform: fourier, walsh, dft, haar or identity.
    #[arg(long)]
    kind: Option<String>,
    /// Number of dyadic levels; N = 2^(r-1).
    #[arg(long)]
    r: Option<usize>,
    /// Operator file for `optimal-map`.
    #[arg(long)]
    operator: Option<String>,
    /// Domain file for `optimal-map`.
    #[arg(long)]
    domain: Option<String>,
    /// Codomain mode for `optimal-map`.
    #[arg(long)]
    mode: Option<String>,
    /// Extra `section.key=value` overrides.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    sets: Vec<String>,
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })
}

fn build_config(a: &RunArgs) -> Result<ExperimentConfig> {
    let name = (!a.name.is_empty()).then(|| a.name.join(" "));
    let mut cfg = match (&a.config, &name) {
        (Some(p), n) => ExperimentConfig::from_ini(&read(p)?, n.as_deref())?,
        (None, Some(n)) => ExperimentConfig::defaults(n, 0)?,
        (None, None) => {
            return Err(HarnessError::Usage(
                "name an experiment or pass --config".into(),
            ))
        }
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(k) = &a.kind {
        cfg.set(&format!("operator.kind={k}"))?;
    }
    if let Some(r) = a.r {
        cfg.set(&format!("operator.r={r}"))?;
        cfg.sparsities.resize(r, 1);
    }
    for (key, v) in [
        ("operator", &a.operator),
        ("domain", &a.domain),
        ("mode", &a.mode),
    ] {
        if let Some(v) = v {
            cfg.set(&format!("params.{key}={v}"))?;
        }
    }
    for s in &a.sets {
        cfg.set(s)?;
    }
    if let Some(o) = &a.out {
        cfg.out = o.clone();
    }
    if cfg.out.is_empty() {
        cfg.out = format!("kawlab-out/{}", cfg.slug());
    }
    cfg.validate().map_err(HarnessError::Usage)?;
    Ok(cfg)
}

fn print_claims(claims: &[ClaimOutcome]) {
    for c in claims {
        let tag = if c.holds { "ok  " } else { "FAIL" };
        println!("[{tag}] {}: {:e} vs {:e}", c.label, c.lhs, c.rhs);
    }
}

fn check(claims: &[ClaimOutcome]) -> Result<()> {
    let failed: Vec<String> = claims
        .iter()
        .filter(|c| !c.holds)
        .map(|c| c.label.clone())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Check(failed))
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::List => {
            print!("{}", catalog::listing());
            Ok(())
        }
        Command::Show(a) => {
            print!("{}", build_config(&a)?.to_ini());
            Ok(())
        }
        Command::Run(a) => {
            let cfg = build_config(&a)?;
            let summary = kawlab::run(&cfg, &RunOptions::default())?;
            print_claims(&summary.claims);
            println!(
                "wrote {} files to {}",
                summary.files.len(),
                summary.dir.display()
            );
            check(&summary.claims)
        }
        Command::Verify { dir } => {
            let claims = verify_dir(&dir)?;
            print_claims(&claims);
            check(&claims)
        }
    }
}

/// `kawlab <experiment> ...` is shorthand for `kawlab run <experiment> ...`.
fn arguments() -> Vec<String> {
    let mut args: Vec<String> = std::env::args().collect();
    const KNOWN: &[&str] = &[
        "list",
        "show",
        "run",
        "verify",
        "help",
        "-h",
        "--help",
        "-V",
        "--version",
    ];
    if args.len() > 1 && !KNOWN.contains(&args[1].as_str()) {
        args.insert(1, "run".into());
    }
    args
}

fn main() -> ExitCode {
    let cli = Cli::parse_from(arguments());
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kawlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
