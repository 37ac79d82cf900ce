//! The `run`, `compile` and `spectrum` subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qdyn_core::circuit::{step_circuit, GateCounts};
use qdyn_core::grid::{delta_state, GridSpec};
use qdyn_core::nmr::{
    all_lines, ancilla_spectrum, decay_model, equilibrium_deviation, experiment_pair_raw,
    format_spectrum_csv, invert_transition, pops, readout_intensities, DecayParams, SpinSystem,
};
use qdyn_core::potential::{parse_potential_column, tabulate, PotentialSpec, PotentialTable};
use qdyn_core::scalar::{identity, CMatrix};
use qdyn_core::splitop::{exact_evolution, max_probability_error, normalize_columns, rms_error, TrotterPlan};

use crate::config::{Engine, RunConfig, ScenarioChoice, SpectrumState};
use crate::error::{CliError, Result};

/// Noiseless engines must reproduce the statevector probabilities this closely.
pub const ENGINE_AGREEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub probabilities: Vec<Vec<f64>>,
    pub rms: Vec<f64>,
    /// Max deviation of the chosen engine from the statevector path.
    pub engine_deviation: f64,
    /// Raw (possibly decayed) ancilla intensities per step, nmr engine only.
    pub intensities: Vec<Vec<f64>>,
}

/// Grid and tabulated potential for a configuration.
pub fn build_potential(config: &RunConfig) -> Result<PotentialTable<f64>> {
    let grid = GridSpec::new(config.n_qubits, config.length)?;
    let spec = match config.scenario {
        ScenarioChoice::Builtin(s) => PotentialSpec::Builtin(s),
        ScenarioChoice::Custom => {
            let path = config
                .potential_file
                .as_ref()
                .ok_or_else(|| CliError::Config("custom scenario requires potential_file".into()))?;
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let values = parse_potential_column(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            PotentialSpec::Tabulated(values)
        }
    };
    tabulate(&spec, &grid).map_err(|e| match config.scenario {
        ScenarioChoice::Custom => CliError::Input(format!("potential file: {e}")),
        ScenarioChoice::Builtin(s) => CliError::Config(format!("scenario {s}: {e}")),
    })
}

pub fn build_plan(config: &RunConfig) -> Result<TrotterPlan<f64>> {
    let table = build_potential(config)?;
    Ok(TrotterPlan::with_convention(&table, config.dt, config.momentum_convention)?)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// `step,j,x,probability`, one row per step and site.
pub fn format_probabilities_csv(grid: &GridSpec<f64>, table: &[Vec<f64>]) -> String {
    let x = grid.positions();
    let mut out = String::from("step,j,x,probability\n");
    for (m, column) in table.iter().enumerate() {
        for (j, p) in column.iter().enumerate() {
            let _ = writeln!(out, "{m},{j},{:.16e},{p:.16e}", x[j]);
        }
    }
    out
}

pub fn format_rms_csv(rms: &[f64]) -> String {
    let mut out = String::from("step,rms\n");
    for (m, r) in rms.iter().enumerate() {
        let _ = writeln!(out, "{m},{r:.16e}");
    }
    out
}

/// Evolves the configured scenario with the chosen engine and writes
/// `probabilities.csv`, `rms.csv` and, for the nmr engine,
/// `spectrum_step{m}.csv`.
///
/// Files are written before the engine cross-check, so a disagreement
/// beyond [`ENGINE_AGREEMENT_TOL`] still leaves the outputs for inspection.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.check_run_limits()?;
    let plan = build_plan(config)?;
    let grid = *plan.grid();
    let psi0 = delta_state(&grid, config.start_index)?;

    let reference = plan.evolve(&psi0, config.steps)?.probability_table();
    let oracle = exact_evolution(&plan, &psi0, config.steps)?.probability_table();

    let mut intensities = Vec::new();
    let probabilities = match config.engine {
        Engine::Statevector => reference.clone(),
        Engine::ExactOracle => oracle.clone(),
        Engine::Circuit => {
            let circuit = step_circuit(&plan)?;
            let mut state = psi0.clone().into_amplitudes();
            let mut table = vec![state.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>()];
            for _ in 0..config.steps {
                circuit.apply(&mut state)?;
                table.push(state.iter().map(|a| a.norm_sqr()).collect());
            }
            table
        }
        Engine::Nmr => {
            let spec = SpinSystem::reference();
            let params = DecayParams {
                step_wall_seconds: config.decay.step_wall_seconds,
                t2_seconds: config.decay.t2_seconds,
            };
            let step = plan.step_matrix();
            let mut u: CMatrix<f64> = identity(grid.len());
            for m in 0..=config.steps {
                if m > 0 {
                    u = &step * &u;
                }
                let raw = experiment_pair_raw(&spec, &u, config.start_index)?;
                let raw = if config.decay.enabled { decay_model(&raw, m, &params)? } else { raw };
                intensities.push(raw);
            }
            normalize_columns(&intensities)?
        }
    };

    let rms = probabilities
        .iter()
        .zip(&oracle)
        .map(|(p, q)| rms_error(p, q))
        .collect::<Result<Vec<_>, _>>()?;

    ensure_dir(&config.output_dir)?;
    let mut files = Vec::new();
    let path = config.output_dir.join("probabilities.csv");
    write_file(&path, &format_probabilities_csv(&grid, &probabilities))?;
    files.push(path);
    let path = config.output_dir.join("rms.csv");
    write_file(&path, &format_rms_csv(&rms))?;
    files.push(path);
    if config.engine == Engine::Nmr {
        let spec = SpinSystem::reference();
        for (m, column) in intensities.iter().enumerate() {
            let path = config.output_dir.join(format!("spectrum_step{m}.csv"));
            write_file(&path, &format_spectrum_csv(&ancilla_spectrum(&spec, column)?))?;
            files.push(path);
        }
    }

    let engine_deviation = max_probability_error(&probabilities, &reference)?;
    if matches!(config.engine, Engine::Circuit | Engine::Nmr) && !(engine_deviation <= ENGINE_AGREEMENT_TOL) {
        return Err(CliError::Diagnostic(format!(
            "{} engine deviates from the statevector engine by {engine_deviation:e} (tolerance {ENGINE_AGREEMENT_TOL:e})",
            config.engine
        )));
    }

    Ok(RunSummary {
        files,
        probabilities,
        rms,
        engine_deviation,
        intensities,
    })
}

#[derive(Debug, Clone)]
pub struct CompileSummary {
    pub path: PathBuf,
    pub counts: GateCounts,
}

/// Writes `step_circuit.txt`: the gate list of one step plus a summary line.
pub fn compile(config: &RunConfig) -> Result<CompileSummary> {
    if config.n_qubits > qdyn_core::circuit::MAX_CIRCUIT_QUBITS {
        return Err(CliError::Config(format!(
            "compile is limited to {} qubits, got {}",
            qdyn_core::circuit::MAX_CIRCUIT_QUBITS,
            config.n_qubits
        )));
    }
    let plan = build_plan(config)?;
    let circuit = step_circuit(&plan)?;
    let counts = circuit.counts();
    let mut text = circuit.to_text();
    let _ = writeln!(text, "# summary {counts}");
    ensure_dir(&config.output_dir)?;
    let path = config.output_dir.join("step_circuit.txt");
    write_file(&path, &text)?;
    Ok(CompileSummary { path, counts })
}

#[derive(Debug, Clone)]
pub struct SpectrumSummary {
    pub files: Vec<PathBuf>,
    pub intensities: Vec<f64>,
    pub frequencies: Vec<f64>,
}

/// Writes `spectrum.csv` (16 ancilla lines) for the configured deviation
/// state and, with `all_lines`, `lines_all.csv` with all 80 transitions.
pub fn spectrum(config: &RunConfig) -> Result<SpectrumSummary> {
    let spec = SpinSystem::reference();
    let equilibrium = equilibrium_deviation(&spec);
    let start = config.start_index;
    let state = match config.spectrum_state {
        SpectrumState::Equilibrium => equilibrium,
        SpectrumState::Inverted => invert_transition(&equilibrium, start)?,
        SpectrumState::Pops => pops(&equilibrium, &invert_transition(&equilibrium, start)?),
    };
    let intensities = readout_intensities(&state);
    let lines = ancilla_spectrum(&spec, &intensities)?;

    ensure_dir(&config.output_dir)?;
    let mut files = Vec::new();
    let path = config.output_dir.join("spectrum.csv");
    write_file(&path, &format_spectrum_csv(&lines))?;
    files.push(path);
    if config.all_lines {
        let mut text = String::from("spin,state,frequency_hz\n");
        for line in all_lines(&spec) {
            let _ = writeln!(text, "{},{:04b},{:.16e}", line.spin, line.state, line.frequency_hz);
        }
        let path = config.output_dir.join("lines_all.csv");
        write_file(&path, &text)?;
        files.push(path);
    }
    Ok(SpectrumSummary {
        files,
        frequencies: lines.iter().map(|l| l.frequency_hz).collect(),
        intensities,
    })
}
