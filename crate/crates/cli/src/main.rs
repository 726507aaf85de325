//! `cavqed`: cavity reflection spectra of trapped atoms from a JSON scenario.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Settings;
use crate::config::{Scenario, ScenarioConfig};
use crate::error::CliError;
use crate::output::Format;

#[derive(Parser)]
#[command(
    name = "cavqed",
    version,
    about = "Reflection spectra of atoms coupled to a nanophotonic cavity"
)]
struct Cli {
    /// Scenario file (JSON).
    #[arg(long, global = true, conflicts_with = "scenario")]
    config: Option<PathBuf>,

    /// Name of a bundled scenario instead of a file.
    #[arg(long, global = true)]
    scenario: Option<String>,

    /// Output file; a directory for `reproduce`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides the scenario's random seed.
    #[arg(long, global = true, env = "CAVQED_SEED")]
    seed: Option<u64>,

    /// Overrides the number of Monte Carlo samples.
    #[arg(long, global = true)]
    samples: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Motion-averaged reflection spectrum.
    Spectrum,
    /// Reflectivity versus probe and relative atom detuning (two atoms).
    Map {
        /// Average of the two single-atom spectra instead of the coupled pair.
        #[arg(long)]
        control: bool,
    },
    /// Mean cooperativity as the trap moves along the cavity mode.
    Modescan,
    /// Fit coupling and motion parameters to a measured or synthetic spectrum.
    Fit {
        /// CSV with `probe_mhz,reflectivity[,stderr]`; synthetic data when absent.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Closed form against the linear-response and master-equation solutions.
    Oracle,
    /// Photon-count histograms and atom detection error.
    Detect,
    /// Regenerate the outputs of bundled figure scenarios into `--out`.
    Reproduce {
        /// Figures to build; all when empty.
        names: Vec<String>,
    },
    /// List bundled scenarios.
    Scenarios,
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    match (&cli.config, &cli.scenario) {
        (Some(path), _) => config::load(path),
        (None, Some(name)) => {
            let text = config::bundled(name).ok_or_else(|| {
                let known: Vec<_> = config::BUNDLED.iter().map(|(n, _)| *n).collect();
                CliError::Config(format!("no bundled scenario {name:?}; known: {}", known.join(", ")))
            })?;
            config::parse(text, name)
        }
        (None, None) => Err(CliError::Config(
            "a scenario is required: pass --config FILE or --scenario NAME".into(),
        )),
    }
}

fn apply_overrides(mut cfg: ScenarioConfig, cli: &Cli) -> ScenarioConfig {
    if let Some(seed) = cli.seed {
        cfg.monte_carlo.seed = seed;
    }
    if let Some(samples) = cli.samples {
        cfg.monte_carlo.samples = samples;
    }
    cfg
}

fn scenario(cli: &Cli) -> Result<Scenario, CliError> {
    apply_overrides(load_config(cli)?, cli).build()
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let settings = Settings {
        out: cli.out.clone(),
        format: cli.format,
    };
    match &cli.command {
        Command::Scenarios => {
            for (name, _) in config::BUNDLED {
                println!("{name}");
            }
            Ok(())
        }
        Command::Reproduce { names } => {
            let dir = cli
                .out
                .clone()
                .ok_or_else(|| CliError::Config("reproduce needs --out DIR".into()))?;
            let names: Vec<&str> = if names.is_empty() {
                commands::FIGURES.to_vec()
            } else {
                names.iter().map(String::as_str).collect()
            };
            for name in names {
                let text = config::bundled(name)
                    .filter(|_| commands::FIGURES.contains(&name))
                    .ok_or_else(|| {
                        CliError::Input(format!(
                            "unknown figure {name:?}; known: {}",
                            commands::FIGURES.join(", ")
                        ))
                    })?;
                let s = apply_overrides(config::parse(text, name)?, cli).build()?;
                commands::reproduce(name, &s, &dir.join(name), cli.format)?;
            }
            Ok(())
        }
        Command::Spectrum => commands::spectrum(&scenario(cli)?, &settings),
        Command::Map { control } => commands::map(&scenario(cli)?, &settings, *control),
        Command::Modescan => commands::modescan(&scenario(cli)?, &settings),
        Command::Fit { data } => commands::fit(&scenario(cli)?, &settings, data.as_deref()),
        Command::Oracle => commands::oracle(&scenario(cli)?, &settings),
        Command::Detect => commands::detect(&scenario(cli)?, &settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
