// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cascade_entangle::scenario::{akopian_preset, run_scenario, OutputFormat, RunOptions, ScenarioConfig, Task};
use cascade_entangle::{Error, Result};

#[derive(Parser)]
#[command(name = "cascade-entangle", version, about = "Spectral filtering of two-photon cascades")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for tables, the resolved config and the report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// csv, structured or both.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One cascade, one window.
    Point,
    /// Window-width sweep.
    Sweep,
    /// Phase over a (Δ/Γ, w/Γ) grid.
    Diagram,
    /// Drift-averaged distillation.
    Ensemble,
    /// Built-in reference experiment with its uncertainty band.
    PresetAkopian,
}

impl Command {
    fn task(self) -> Task {
        match self {
            Command::Point => Task::Point,
            Command::Sweep => Task::WindowSweep,
            Command::Diagram => Task::PhaseDiagram,
            Command::Ensemble => Task::Ensemble,
            Command::PresetAkopian => Task::Experiment7,
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let (config, base) = match (&cli.config, cli.command) {
        (Some(path), _) => (ScenarioConfig::from_file(path)?, path.parent().map(Path::to_path_buf)),
        (None, Command::PresetAkopian) => (akopian_preset(), None),
        (None, _) => return Err(Error::Config("--config is required for this subcommand".into())),
    };
    let opts = RunOptions {
        task: Some(cli.command.task()),
        base_dir: base.as_deref(),
        out_dir: cli.out.as_deref(),
        format: cli.format,
    };
    let go = || run_scenario(&config, &opts);
    let report = match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("--workers: {e}")))?
            .install(go)?,
        None => go()?,
    };
    if cli.out.is_none() && config.output.dir.is_none() {
        print!("{}", report.to_json()?);
    } else {
        for line in &report.summary {
            println!("{line}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{msg}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
