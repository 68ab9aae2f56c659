use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Parser, Subcommand};

use becsense_cli::config::parse_config;
use becsense_cli::presets::presets;
use becsense_cli::runner::{
    build_scenario, exit_code, expand_config, parse_omega, run_design, run_point, run_stability,
    run_sweep,
};

/// Frequency-domain simulator and design tool for a parametrically
/// modulated hybrid optomechanical force sensor.
#[derive(Parser)]
#[command(name = "becsense", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the output spectrum over a frequency grid and write a CSV plus
    /// a `.meta` sidecar.
    Sweep {
        config: PathBuf,
        /// Output CSV path (default: `<config stem>.csv`).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Replace the configured xi_d by the exact matching solution.
        #[arg(long)]
        solve_matching: bool,
    },
    /// Convert cooperativity targets into laboratory parameters.
    Design {
        config: PathBuf,
        /// Output path (default: `<config stem>.recipe.txt`).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report the spectrum decomposition at a single frequency.
    Point {
        config: PathBuf,
        /// Frequency with unit suffix: `rads`, `hz`, or `gm` (e.g. `0.1gm`).
        #[arg(long)]
        omega: String,
        #[arg(long)]
        solve_matching: bool,
    },
    /// Eigenvalue stability report with the analytic bounds.
    Stability {
        config: PathBuf,
        #[arg(long)]
        solve_matching: bool,
    },
    /// Built-in scenario presets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    /// List preset names and what they configure.
    List,
}

fn load(path: &Path) -> anyhow::Result<becsense_cli::config::ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config `{}`", path.display()))?;
    parse_config(&text).map_err(|e| anyhow::Error::new(e).context(format!("{}", path.display())))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep {
            config,
            output,
            solve_matching,
        } => {
            let cfg = expand_config(&load(&config)?, solve_matching)?;
            let scenario = build_scenario(&cfg)?;
            let out = run_sweep(&scenario, &config.display().to_string(), unix_now())?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            let csv_path = output.unwrap_or_else(|| config.with_extension("csv").file_name_path());
            let meta_path = csv_path.with_extension("meta");
            std::fs::write(&csv_path, &out.csv)
                .with_context(|| format!("cannot write `{}`", csv_path.display()))?;
            std::fs::write(&meta_path, &out.meta)
                .with_context(|| format!("cannot write `{}`", meta_path.display()))?;
            println!("wrote {} and {}", csv_path.display(), meta_path.display());
        }
        Command::Design { config, output } => {
            let cfg = expand_config(&load(&config)?, false)?;
            let (_, text) = run_design(&cfg)?;
            let path = output.unwrap_or_else(|| {
                let mut p = config.with_extension("recipe.txt").file_name_path();
                if p.as_os_str().is_empty() {
                    p = PathBuf::from("recipe.txt");
                }
                p
            });
            std::fs::write(&path, &text)
                .with_context(|| format!("cannot write `{}`", path.display()))?;
            println!("wrote {}", path.display());
        }
        Command::Point {
            config,
            omega,
            solve_matching,
        } => {
            let cfg = expand_config(&load(&config)?, solve_matching)?;
            let scenario = build_scenario(&cfg)?;
            let omega = parse_omega(&omega, scenario.model.gamma_m)?;
            print!("{}", run_point(&scenario, omega)?);
        }
        Command::Stability {
            config,
            solve_matching,
        } => {
            let cfg = expand_config(&load(&config)?, solve_matching)?;
            let scenario = build_scenario(&cfg)?;
            print!("{}", run_stability(&scenario)?);
        }
        Command::Presets { action } => match action {
            PresetsAction::List => {
                for p in presets() {
                    println!("{:<14} {}", p.name, p.summary);
                }
            }
        },
    }
    Ok(())
}

/// Keeps generated files in the working directory rather than next to the
/// (possibly remote) config.
trait FileNamePath {
    fn file_name_path(self) -> PathBuf;
}

impl FileNamePath for PathBuf {
    fn file_name_path(self) -> PathBuf {
        self.file_name().map(PathBuf::from).unwrap_or(self)
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = exit_code(&err);
            ExitCode::from(code as u8)
        }
    }
}
