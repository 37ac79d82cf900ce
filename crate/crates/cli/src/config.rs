//! `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use qdyn_core::circuit::MAX_CIRCUIT_QUBITS;
use qdyn_core::grid::{MomentumConvention, MAX_QUBITS};
use qdyn_core::nmr::REGISTER_QUBITS;
use qdyn_core::potential::{builtin_scenario, Scenario};
use qdyn_core::splitop::MAX_ORACLE_QUBITS;

use crate::error::{CliError, Result};

pub const KEYS: &[&str] = &[
    "scenario",
    "n_qubits",
    "length",
    "dt",
    "steps",
    "start_index",
    "potential_file",
    "engine",
    "decay",
    "t2_seconds",
    "step_wall_seconds",
    "momentum_convention",
    "output_dir",
    "spectrum_state",
    "all_lines",
];

const CUSTOM_STEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioChoice {
    Builtin(Scenario),
    Custom,
}

impl fmt::Display for ScenarioChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioChoice::Builtin(s) => write!(f, "{s}"),
            ScenarioChoice::Custom => f.write_str("custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Statevector,
    Circuit,
    ExactOracle,
    Nmr,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "statevector" => Ok(Engine::Statevector),
            "circuit" => Ok(Engine::Circuit),
            "exact-oracle" => Ok(Engine::ExactOracle),
            "nmr" => Ok(Engine::Nmr),
            other => Err(format!(
                "unknown engine '{other}' (expected statevector, circuit, exact-oracle or nmr)"
            )),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Statevector => "statevector",
            Engine::Circuit => "circuit",
            Engine::ExactOracle => "exact-oracle",
            Engine::Nmr => "nmr",
        })
    }
}

/// Which deviation state the `spectrum` subcommand reads out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumState {
    Equilibrium,
    Inverted,
    Pops,
}

impl FromStr for SpectrumState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "equilibrium" => Ok(SpectrumState::Equilibrium),
            "inverted" => Ok(SpectrumState::Inverted),
            "pops" => Ok(SpectrumState::Pops),
            other => Err(format!(
                "unknown spectrum_state '{other}' (expected equilibrium, inverted or pops)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConfig {
    pub enabled: bool,
    pub t2_seconds: f64,
    pub step_wall_seconds: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        let d = qdyn_core::nmr::DecayParams::<f64>::default();
        Self {
            enabled: false,
            t2_seconds: d.t2_seconds,
            step_wall_seconds: d.step_wall_seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioChoice,
    pub n_qubits: usize,
    pub length: f64,
    pub dt: f64,
    pub steps: usize,
    pub start_index: usize,
    pub potential_file: Option<PathBuf>,
    pub engine: Engine,
    pub decay: DecayConfig,
    pub momentum_convention: MomentumConvention,
    pub output_dir: PathBuf,
    pub spectrum_state: SpectrumState,
    pub all_lines: bool,
}

impl RunConfig {
    /// Checks the limits that depend on the subcommand's engine choice.
    pub fn check_run_limits(&self) -> Result<()> {
        if self.n_qubits > MAX_ORACLE_QUBITS {
            return Err(CliError::Config(format!(
                "run compares against the exact propagator, limited to {MAX_ORACLE_QUBITS} qubits"
            )));
        }
        if self.engine == Engine::Nmr && self.n_qubits != REGISTER_QUBITS {
            return Err(CliError::Config(format!(
                "the nmr engine models a {REGISTER_QUBITS}-qubit register, got n_qubits = {}",
                self.n_qubits
            )));
        }
        if self.engine == Engine::Circuit && self.n_qubits > MAX_CIRCUIT_QUBITS {
            return Err(CliError::Config(format!(
                "the circuit engine is limited to {MAX_CIRCUIT_QUBITS} qubits"
            )));
        }
        Ok(())
    }
}

struct Entry {
    line: usize,
    value: String,
}

/// Parses `key = value` lines; `#` starts a comment. Later lines override
/// earlier ones.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with_overrides(text, &[])
}

/// Like [`parse_config`], with `overrides` applied after the file contents.
pub fn parse_config_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut raw: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value'", i + 1)))?;
        insert(&mut raw, key.trim(), value.trim(), i + 1)?;
    }
    for (key, value) in overrides {
        insert(&mut raw, key, value, 0)?;
    }
    build(&raw)
}

fn insert(raw: &mut BTreeMap<String, Entry>, key: &str, value: &str, line: usize) -> Result<()> {
    if !KEYS.contains(&key) {
        return Err(CliError::Config(format!("{}unknown key '{key}'", where_(line))));
    }
    raw.insert(key.to_string(), Entry { line, value: value.to_string() });
    Ok(())
}

fn where_(line: usize) -> String {
    if line == 0 {
        "command line: ".to_string()
    } else {
        format!("line {line}: ")
    }
}

fn get<T: FromStr>(raw: &BTreeMap<String, Entry>, key: &str, kind: &str) -> Result<Option<T>> {
    raw.get(key)
        .map(|e| {
            e.value.parse::<T>().map_err(|_| {
                CliError::Config(format!("{}{key} expects {kind}, got '{}'", where_(e.line), e.value))
            })
        })
        .transpose()
}

fn get_real(raw: &BTreeMap<String, Entry>, key: &str) -> Result<Option<f64>> {
    raw.get(key)
        .map(|e| {
            parse_real(&e.value).ok_or_else(|| {
                CliError::Config(format!("{}{key} expects a number, got '{}'", where_(e.line), e.value))
            })
        })
        .transpose()
}

fn get_bool(raw: &BTreeMap<String, Entry>, key: &str) -> Result<Option<bool>> {
    raw.get(key)
        .map(|e| match e.value.as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            other => Err(CliError::Config(format!(
                "{}{key} expects true or false, got '{other}'",
                where_(e.line)
            ))),
        })
        .transpose()
}

fn get_with<T>(
    raw: &BTreeMap<String, Entry>,
    key: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Option<T>> {
    raw.get(key)
        .map(|e| parse(&e.value).map_err(|m| CliError::Config(format!("{}{m}", where_(e.line)))))
        .transpose()
}

/// Accepts plain numbers and the forms `pi`, `pi/D`, `A*pi`, `A*pi/D`.
pub fn parse_real(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Ok(v) = text.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (numerator, denominator) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim().parse::<f64>().ok()?)),
        None => (text, None),
    };
    let factor = match numerator.split_once('*') {
        Some((a, p)) if p.trim() == "pi" => a.trim().parse::<f64>().ok()?,
        None if numerator == "pi" => 1.0,
        _ => return None,
    };
    let v = factor * std::f64::consts::PI / denominator.unwrap_or(1.0);
    v.is_finite().then_some(v)
}

fn parse_convention(s: &str) -> Result<MomentumConvention, String> {
    match s {
        "box" | "paper" => Ok(MomentumConvention::Box),
        "unitary" => Ok(MomentumConvention::Unitary),
        other => Err(format!("unknown momentum_convention '{other}' (expected box or unitary)")),
    }
}

fn build(raw: &BTreeMap<String, Entry>) -> Result<RunConfig> {
    let scenario = match raw.get("scenario").map(|e| e.value.as_str()) {
        None => ScenarioChoice::Builtin(Scenario::Free),
        Some("custom") => ScenarioChoice::Custom,
        Some(name) => ScenarioChoice::Builtin(
            name.parse::<Scenario>()
                .map_err(|_| CliError::Config(format!("unknown scenario '{name}'")))?,
        ),
    };

    let n_qubits = get::<usize>(raw, "n_qubits", "a non-negative integer")?;
    let length = get_real(raw, "length")?;
    let dt = get_real(raw, "dt")?;
    let steps = get::<usize>(raw, "steps", "a non-negative integer")?;
    let start_index = get::<usize>(raw, "start_index", "a non-negative integer")?;
    let potential_file = raw.get("potential_file").map(|e| PathBuf::from(&e.value));

    let (n_qubits, length, dt, steps, start_index) = match scenario {
        ScenarioChoice::Builtin(s) => {
            if potential_file.is_some() {
                return Err(CliError::Config(format!(
                    "builtin scenario '{s}' has a fixed potential; potential_file requires scenario = custom"
                )));
            }
            let setup = builtin_scenario::<f64>(s);
            (
                n_qubits.unwrap_or(setup.grid.n_qubits()),
                length.unwrap_or(setup.grid.length()),
                dt.unwrap_or(setup.dt),
                steps.unwrap_or(setup.default_steps),
                start_index.unwrap_or(setup.start_index),
            )
        }
        ScenarioChoice::Custom => {
            let missing: Vec<&str> = [
                ("n_qubits", n_qubits.is_none()),
                ("length", length.is_none()),
                ("dt", dt.is_none()),
                ("start_index", start_index.is_none()),
                ("potential_file", potential_file.is_none()),
            ]
            .into_iter()
            .filter_map(|(k, absent)| absent.then_some(k))
            .collect();
            if !missing.is_empty() {
                return Err(CliError::Config(format!(
                    "custom scenario requires: {}",
                    missing.join(", ")
                )));
            }
            (
                n_qubits.unwrap_or_default(),
                length.unwrap_or_default(),
                dt.unwrap_or_default(),
                steps.unwrap_or(CUSTOM_STEPS),
                start_index.unwrap_or_default(),
            )
        }
    };

    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(CliError::Config(format!("n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}")));
    }
    if !(length > 0.0) {
        return Err(CliError::Config(format!("length must be positive, got {length}")));
    }
    if !(dt > 0.0) {
        return Err(CliError::Config(format!("dt must be positive, got {dt}")));
    }
    if start_index >= 1usize << n_qubits {
        return Err(CliError::Config(format!(
            "start_index {start_index} out of range for {} sites",
            1usize << n_qubits
        )));
    }

    let defaults = DecayConfig::default();
    let decay = DecayConfig {
        enabled: get_bool(raw, "decay")?.unwrap_or(false),
        t2_seconds: get_real(raw, "t2_seconds")?.unwrap_or(defaults.t2_seconds),
        step_wall_seconds: get_real(raw, "step_wall_seconds")?.unwrap_or(defaults.step_wall_seconds),
    };
    if !(decay.t2_seconds > 0.0) {
        return Err(CliError::Config(format!("t2_seconds must be positive, got {}", decay.t2_seconds)));
    }
    if !(decay.step_wall_seconds >= 0.0) {
        return Err(CliError::Config(format!(
            "step_wall_seconds must be non-negative, got {}",
            decay.step_wall_seconds
        )));
    }

    Ok(RunConfig {
        scenario,
        n_qubits,
        length,
        dt,
        steps,
        start_index,
        potential_file,
        engine: get_with(raw, "engine", str::parse)?.unwrap_or(Engine::Statevector),
        decay,
        momentum_convention: get_with(raw, "momentum_convention", parse_convention)?.unwrap_or_default(),
        output_dir: raw
            .get("output_dir")
            .map(|e| PathBuf::from(&e.value))
            .unwrap_or_else(|| PathBuf::from("out")),
        spectrum_state: get_with(raw, "spectrum_state", str::parse)?.unwrap_or(SpectrumState::Equilibrium),
        all_lines: get_bool(raw, "all_lines")?.unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_defaults() {
        let c = parse_config("scenario = free\n").unwrap();
        assert_eq!(c.scenario, ScenarioChoice::Builtin(Scenario::Free));
        assert_eq!(c.dt, PI / 20.0);
        assert_eq!(c.steps, 3);
        assert_eq!(c.start_index, 8);
        assert_eq!(c.length, 8.0);
        assert_eq!(c.n_qubits, 4);
        assert_eq!(c.engine, Engine::Statevector);
        assert!(!c.decay.enabled);
        assert_eq!(c.momentum_convention, MomentumConvention::Box);
    }

    #[test]
    fn well_with_override_and_comments() {
        let c = parse_config("# well run\nscenario = well   # inline\nsteps = 10\n\nengine = nmr\n").unwrap();
        assert_eq!(c.scenario, ScenarioChoice::Builtin(Scenario::Well));
        assert_eq!(c.steps, 10);
        assert_eq!(c.dt, PI / 100.0);
        assert_eq!(c.engine, Engine::Nmr);
    }

    #[test]
    fn custom_requires_keys() {
        let err = parse_config("scenario = custom\nn_qubits = 3\nlength = 2\ndt = 0.1\nstart_index = 1\n")
            .unwrap_err();
        assert!(err.to_string().contains("potential_file"), "{err}");
        assert_eq!(err.exit_code(), 2);
        let ok = parse_config(
            "scenario = custom\nn_qubits = 3\nlength = 2\ndt = pi/50\nstart_index = 1\npotential_file = v.txt\n",
        )
        .unwrap();
        assert_eq!(ok.steps, CUSTOM_STEPS);
        assert_eq!(ok.dt, PI / 50.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_config("colour = blue\n").is_err());
        assert!(parse_config("steps = many\n").is_err());
        assert!(parse_config("steps = -1\n").is_err());
        assert!(parse_config("dt = 0\n").is_err());
        assert!(parse_config("scenario = well\npotential_file = v.txt\n").is_err());
        assert!(parse_config("engine = quantum\n").is_err());
        assert!(parse_config("decay = maybe\n").is_err());
        assert!(parse_config("start_index = 16\n").is_err());
        assert!(parse_config("just words\n").is_err());
        assert!(parse_config("scenario = moon\n").is_err());
    }

    #[test]
    fn overrides_win() {
        let c = parse_config_with_overrides(
            "scenario = barrier\nsteps = 4\n",
            &[("steps".into(), "7".into()), ("decay".into(), "true".into())],
        )
        .unwrap();
        assert_eq!(c.steps, 7);
        assert!(c.decay.enabled);
        assert!(parse_config_with_overrides("", &[("bogus".into(), "1".into())]).is_err());
    }

    #[test]
    fn real_expressions() {
        assert_eq!(parse_real("0.25"), Some(0.25));
        assert_eq!(parse_real("pi"), Some(PI));
        assert_eq!(parse_real("pi/20"), Some(PI / 20.0));
        assert_eq!(parse_real("2*pi/5"), Some(2.0 * PI / 5.0));
        assert_eq!(parse_real("2*pi"), Some(2.0 * PI));
        assert_eq!(parse_real("tau"), None);
        assert_eq!(parse_real("pi/0"), None);
        assert_eq!(parse_real("inf"), None);
    }

    #[test]
    fn engine_limits() {
        let c = parse_config("engine = nmr\nn_qubits = 5\n").unwrap();
        assert!(c.check_run_limits().is_err());
        let c = parse_config("n_qubits = 13\n").unwrap();
        assert!(c.check_run_limits().is_err());
        assert!(parse_config("scenario = well\nengine = circuit\n").unwrap().check_run_limits().is_ok());
    }
}
