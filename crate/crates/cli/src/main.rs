//! `lmsurf`: design tables, simulations, sweeps and metric extraction for
//! liquid-metal punctured-surface channels.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lmsurf_core::config::Preset;

#[derive(Parser, Debug)]
#[command(
    name = "lmsurf",
    version,
    about = "Liquid-metal surface-wave channel simulator"
)]
struct Cli {
    /// Worker threads for the solver (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    Paper,
    Fast,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Paper => Preset::Paper,
            PresetArg::Fast => Preset::Fast,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Axis {
    #[value(name = "l_c")]
    LC,
    F,
    #[value(name = "n_layers")]
    NLayers,
}

impl Axis {
    fn key(self) -> &'static str {
        match self {
            Axis::LC => "l_c",
            Axis::F => "f",
            Axis::NLayers => "n_layers",
        }
    }

    fn unit(self) -> &'static str {
        match self {
            Axis::LC => "m",
            Axis::F => "Hz",
            Axis::NLayers => "layers",
        }
    }
}

/// Scenario selection shared by the simulation commands.
#[derive(clap::Args, Debug, Clone)]
struct ScenarioArgs {
    /// Base preset; keys in `--config` override it.
    #[arg(long, value_enum, default_value = "paper")]
    preset: PresetArg,
    /// Scenario file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cell size in metres, overriding preset and file.
    #[arg(long)]
    dx: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form surface parameters per frequency, as CSV.
    Design {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Frequencies in Hz, comma separated; empty for a header-only table.
        #[arg(long, default_value = "30e9,40e9", allow_hyphen_values = true)]
        freqs: String,
        /// Porosity override in place of the lattice value.
        #[arg(long)]
        phi: Option<f64>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scenario and export field maps, metrics and a manifest.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// One guided and one baseline run per value of a scenario parameter.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated values in SI units.
        #[arg(long)]
        values: String,
        /// Run the values concurrently.
        #[arg(long)]
        parallel: bool,
        #[arg(long, default_value = "sweep.csv")]
        csv: PathBuf,
    },
    /// Metrics from an existing field map without re-simulating.
    Analyze {
        /// Linear envelope map written by `simulate`.
        field_map: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Design {
            scenario,
            freqs,
            phi,
            out,
        } => commands::design(&scenario, &freqs, phi, out.as_deref()),
        Command::Simulate { scenario, out } => commands::simulate(&scenario, &out),
        Command::Sweep {
            scenario,
            axis,
            values,
            parallel,
            csv,
        } => commands::sweep(&scenario, axis, &values, parallel, &csv),
        Command::Analyze {
            field_map,
            scenario,
            out,
        } => commands::analyze(&field_map, &scenario, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
