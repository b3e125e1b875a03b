use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rabicat::config::ConfigError;
use rabicat::{commands, parse_config, verify, RunConfig, RunError};

#[derive(Parser)]
#[command(
    name = "rabicat",
    version,
    about = "Spectra and cat-state diagnostics for the Rabi model family"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// key=value config file; `verify` falls back to the defaults without one
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// write output here instead of the config's `out` or stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// override the number of eigenvalues per point
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// skip the seeded sample points in `verify`
    #[arg(long, global = true)]
    seedless: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Spectrum,
    Sweep,
    BiasScan,
    Catness,
    Verify,
}

fn load(cli: &Cli) -> Result<RunConfig, RunError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| ConfigError::Range {
            line: None,
            msg: format!("cannot read {}: {e}", path.display()),
        })?,
        None if matches!(cli.command, Command::Verify) => String::new(),
        None => {
            return Err(ConfigError::Range {
                line: None,
                msg: "--config is required".into(),
            }
            .into())
        }
    };
    let mut cfg = parse_config(&text)?;
    if let Some(levels) = cli.levels {
        if levels < 2 {
            return Err(ConfigError::Range {
                line: None,
                msg: "--levels must be at least 2".into(),
            }
            .into());
        }
        cfg.levels = levels;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), RunError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, RunError> {
    let cfg = load(cli)?;
    let text = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::BiasScan => commands::bias(&cfg)?,
        Command::Catness => commands::catness(&cfg)?,
        Command::Verify => {
            let outcomes = verify::run(&cfg, cli.seedless);
            let mut report = String::new();
            for o in &outcomes {
                let tag = if o.passed { "PASS" } else { "FAIL" };
                report += &format!("{tag} {}: {}\n", o.name, o.detail);
            }
            let passed = outcomes.iter().filter(|o| o.passed).count();
            report += &format!("invariants: {passed}/{}\n", outcomes.len());
            emit(&cfg, &report)?;
            return Ok(passed == outcomes.len());
        }
    };
    emit(&cfg, &text)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("RABICAT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("rabicat: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
