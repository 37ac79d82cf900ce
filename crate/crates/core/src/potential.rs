//! Piecewise-constant potentials over lattice sites and the builtin scenarios.
//!
//! Potentials are specified per site index; the x-intervals quoted for the
//! builtin scenarios are derived from the site positions, not the other way
//! round. Hard walls are large finite values.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scalar::Real;

/// The three builtin scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// `V = 0` on an `L = 8` lattice.
    Free,
    /// `V = 0` on sites 6..=8, `V = 60` elsewhere, `L = 4`.
    Well,
    /// `V = 100` on sites 9..=10, `V = 0` elsewhere, `L = 4`.
    Barrier,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Free, Scenario::Well, Scenario::Barrier];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Free => "free",
            Scenario::Well => "well",
            Scenario::Barrier => "barrier",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Scenario::Free),
            "well" => Ok(Scenario::Well),
            "barrier" => Ok(Scenario::Barrier),
            other => Err(Error::Parameter(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Constant value over the inclusive site range `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub lo: usize,
    pub hi: usize,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec<T> {
    Builtin(Scenario),
    /// Disjoint segments; unlisted sites are zero.
    Custom(Vec<Segment<T>>),
    /// One value per site.
    Tabulated(Vec<T>),
}

/// `V(x_j)` for every site of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> PotentialTable<T> {
    /// Validates that `values` has one finite entry per site.
    pub fn new(grid: &GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("potential at site {j} is not finite")));
        }
        Ok(Self { grid: *grid, values })
    }

    pub fn zeros(grid: &GridSpec<T>) -> Self {
        Self {
            grid: *grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Tabulates `spec` on `grid`.
pub fn tabulate<T: Real>(spec: &PotentialSpec<T>, grid: &GridSpec<T>) -> Result<PotentialTable<T>> {
    match spec {
        PotentialSpec::Builtin(scenario) => {
            tabulate(&PotentialSpec::Custom(builtin_segments(*scenario, grid.len())?), grid)
        }
        PotentialSpec::Custom(segments) => {
            let n = grid.len();
            let mut values = vec![T::zero(); n];
            let mut assigned = vec![false; n];
            for seg in segments {
                if seg.lo > seg.hi {
                    return Err(Error::Parameter(format!(
                        "segment {}..={} is reversed",
                        seg.lo, seg.hi
                    )));
                }
                if seg.hi >= n {
                    return Err(Error::IndexOutOfRange { index: seg.hi, len: n });
                }
                for j in seg.lo..=seg.hi {
                    if assigned[j] {
                        return Err(Error::Parameter(format!("segments overlap at site {j}")));
                    }
                    assigned[j] = true;
                    values[j] = seg.value;
                }
            }
            PotentialTable::new(grid, values)
        }
        PotentialSpec::Tabulated(values) => PotentialTable::new(grid, values.clone()),
    }
}

/// Segments of a builtin scenario's potential on an `n_sites` lattice.
///
/// The well is open on sites 6..=8 and walled everywhere else, so it needs a
/// site right of the opening; the barrier occupies sites 9..=10.
pub fn builtin_segments<T: Real>(scenario: Scenario, n_sites: usize) -> Result<Vec<Segment<T>>> {
    match scenario {
        Scenario::Free => Ok(Vec::new()),
        Scenario::Well => {
            if n_sites < 10 {
                return Err(Error::IndexOutOfRange { index: 9, len: n_sites });
            }
            let wall = T::lit(60.0);
            Ok(vec![
                Segment { lo: 0, hi: 5, value: wall },
                Segment { lo: 9, hi: n_sites - 1, value: wall },
            ])
        }
        Scenario::Barrier => Ok(vec![Segment { lo: 9, hi: 10, value: T::lit(100.0) }]),
    }
}

/// Everything needed to run a builtin scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSetup<T> {
    pub scenario: Scenario,
    pub grid: GridSpec<T>,
    pub potential: PotentialSpec<T>,
    pub start_index: usize,
    pub dt: T,
    pub default_steps: usize,
}

/// Parameters of a builtin scenario: 4 register qubits, box length, start
/// site, step length and default step count.
pub fn builtin_scenario<T: Real>(scenario: Scenario) -> ScenarioSetup<T> {
    let (length, start_index, dt_divisor, default_steps) = match scenario {
        Scenario::Free => (8.0, 8, 20.0, 3),
        Scenario::Well => (4.0, 7, 100.0, 10),
        Scenario::Barrier => (4.0, 7, 100.0, 10),
    };
    let grid = GridSpec::new(4, T::lit(length)).expect("builtin grid parameters are valid");
    ScenarioSetup {
        scenario,
        grid,
        potential: PotentialSpec::Builtin(scenario),
        start_index,
        dt: T::PI() / T::lit(dt_divisor),
        default_steps,
    }
}

/// Reads a one-column text table of potential values, one per line.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_potential_column<T: Real>(text: &str) -> Result<Vec<T>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("expected a number, got '{line}'"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                message: "potential values must be finite".into(),
            });
        }
        values.push(T::lit(v));
    }
    Ok(values)
}
