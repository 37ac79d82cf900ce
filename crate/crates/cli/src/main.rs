// `!(x > 0.0)` guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdyn_cli::{parse_config_with_overrides, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "qdyn", version, about = "Split-operator dynamics on a qubit register")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario and write probabilities.csv and rms.csv.
    Run(ConfigArgs),
    /// Write the gate list of one Trotter step.
    Compile(ConfigArgs),
    /// Write the ancilla spectrum for a deviation state.
    Spectrum(ConfigArgs),
    /// Render probabilities.csv as an SVG heatmap.
    Plot {
        csv: PathBuf,
        /// Defaults to heatmap.svg next to the input.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Flags mirror the config keys and override values from `--config`.
#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    n_qubits: Option<String>,
    #[arg(long)]
    length: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    start_index: Option<String>,
    #[arg(long)]
    potential_file: Option<String>,
    #[arg(long)]
    engine: Option<String>,
    #[arg(long)]
    decay: Option<String>,
    #[arg(long)]
    t2_seconds: Option<String>,
    #[arg(long)]
    step_wall_seconds: Option<String>,
    #[arg(long)]
    momentum_convention: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    #[arg(long)]
    spectrum_state: Option<String>,
    #[arg(long)]
    all_lines: Option<String>,
}

impl ConfigArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
            None => String::new(),
        };
        let pairs = [
            ("scenario", self.scenario),
            ("n_qubits", self.n_qubits),
            ("length", self.length),
            ("dt", self.dt),
            ("steps", self.steps),
            ("start_index", self.start_index),
            ("potential_file", self.potential_file),
            ("engine", self.engine),
            ("decay", self.decay),
            ("t2_seconds", self.t2_seconds),
            ("step_wall_seconds", self.step_wall_seconds),
            ("momentum_convention", self.momentum_convention),
            ("output_dir", self.output_dir),
            ("spectrum_state", self.spectrum_state),
            ("all_lines", self.all_lines),
        ];
        let overrides: Vec<(String, String)> = pairs
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect();
        parse_config_with_overrides(&text, &overrides)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let summary = qdyn_cli::run(&config)?;
            let worst = summary.rms.iter().cloned().fold(0.0, f64::max);
            println!(
                "{} scenario, {} engine, {} steps: max rms vs exact {worst:.3e}, engine deviation {:.3e}",
                config.scenario, config.engine, config.steps, summary.engine_deviation
            );
            for f in summary.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Compile(args) => {
            let config = args.resolve()?;
            let summary = qdyn_cli::compile(&config)?;
            println!("{}", summary.counts);
            println!("wrote {}", summary.path.display());
        }
        Command::Spectrum(args) => {
            let config = args.resolve()?;
            let summary = qdyn_cli::spectrum(&config)?;
            for f in summary.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Plot { csv, output } => {
            let output = output.unwrap_or_else(|| csv.with_file_name("heatmap.svg"));
            qdyn_cli::plot(&csv, &output)?;
            println!("wrote {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
