// Copyright 2026 The spin-dephasing Contributors
// SPDX-License-Identifier: Apache-2.0

//! `dephase`: witness, measure and negativity series for spin ensembles.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use spin_dephasing::closed_form::ClosedForm;
use spin_dephasing::entanglement::Cut;
use spin_dephasing::verify::Fault;

use commands::{Family, Status};
use config::{Beta, GridConfig, Loaded};

#[derive(Parser, Debug)]
#[command(name = "dephase", version, about = "Pure-dephasing dynamics of spin subsystems in Ising-type ensembles")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (directory for thermal-sweep); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Time grid start:stop:points in units of 1/J, e.g. 0:2pi:1000.
    #[arg(long, global = true, value_parser = config::parse_grid)]
    grid: Option<GridConfig>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// det M_S(t) witness series and non-Markovian episodes.
    Witness {
        /// Compare with a closed form: nn1d, inf, 2d, pl or frac-asym.
        #[arg(long, value_parser = parse_closed_form)]
        closed_form: Option<ClosedForm>,
    },
    /// One witness series per inverse temperature (units of 1/J).
    ThermalSweep {
        /// Comma-separated list, numbers or `inf`.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        betas: Vec<Beta>,
    },
    /// Geometric, rate and trace-distance criteria for one system spin.
    CompareMeasures,
    /// Negativity across a cut: `global` or `system:k`.
    Negativity {
        #[arg(long, default_value = "global", value_parser = parse_cut)]
        cut: Cut,
    },
    /// ln det M_S of the infinite-range model along a sequence of sizes.
    ThermoLimit {
        /// `fixed-p:<p>` or `fraction:<r>`.
        #[arg(long)]
        family: Family,
        /// Comma-separated ensemble sizes.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        sizes: Vec<usize>,
        /// Time in units of 1/J.
        #[arg(long, default_value_t = 1.0)]
        time: f64,
    },
    /// Run the engine against the brute-force oracles; JSON report.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true, default_value = "none")]
        inject_fault: Fault,
    },
}

fn parse_closed_form(s: &str) -> Result<ClosedForm, String> {
    s.parse().map_err(|e: spin_dephasing::Error| e.to_string())
}

fn parse_cut(s: &str) -> Result<Cut, String> {
    s.parse().map_err(|e: spin_dephasing::Error| e.to_string())
}

fn load(path: Option<&Path>) -> Result<Loaded> {
    config::load(path.context("this command needs --config <path>")?)
}

fn run(cli: Cli) -> Result<Status> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    if let Command::ThermoLimit { family, sizes, time } = &cli.command {
        return commands::thermo_limit(*family, sizes, *time, cli.out.as_deref());
    }
    if let Command::Verify { seed, inject_fault } = &cli.command {
        return commands::verify(*seed, *inject_fault, cli.out.as_deref());
    }
    let loaded = load(cli.config.as_deref())?;
    let grid = cli.grid.unwrap_or(loaded.config.grid).grid()?;
    let out = cli.out.clone().or_else(|| loaded.config.out.clone());
    match cli.command {
        Command::Witness { closed_form } => commands::witness(&loaded, &grid, closed_form, out.as_deref()),
        Command::ThermalSweep { betas } => {
            let dir = out.context("thermal-sweep needs --out <directory>")?;
            commands::thermal_sweep(&loaded, &grid, &betas, &dir)
        }
        Command::CompareMeasures => commands::compare_measures(&loaded, &grid, out.as_deref()),
        Command::Negativity { cut } => commands::negativity_cmd(&loaded, &grid, cut, out.as_deref()),
        Command::ThermoLimit { .. } | Command::Verify { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
