//! Emulation of the ancilla-assisted NMR readout on a five-spin register.
//!
//! Spin 0 is the ancilla; spins 1..=4 hold the 4-qubit position register,
//! spin 1 being the most significant bit of the site index. A level of the
//! five-spin system is labelled `(a << 4) | s` with `a` the ancilla bit and
//! `s` the register state; bit value 0 means magnetic quantum number
//! `m = +1`.
//!
//! Only diagonal (population) dynamics are modelled: a register unitary is
//! followed by a gradient that destroys coherences, so each population moves
//! according to `|U_{js}|^2`. The ancilla line of register state `s` then
//! reads `p(0, s) - p(1, s)`.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::scalar::{unitarity_deviation, CMatrix, Real};

pub const N_SPINS: usize = 5;
pub const REGISTER_QUBITS: usize = 4;
pub const REGISTER_STATES: usize = 1 << REGISTER_QUBITS;
pub const LEVELS: usize = 1 << N_SPINS;

/// Internal-Hamiltonian parameters of the oriented five-spin system.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem<T> {
    /// Resonance offsets in Hz.
    pub nu: [T; N_SPINS],
    /// Symmetric effective couplings in Hz, zero diagonal.
    pub couplings: [[T; N_SPINS]; N_SPINS],
    /// Relative equilibrium polarizations; all equal by default.
    pub polarization: [T; N_SPINS],
    /// Longitudinal relaxation times in seconds (informational).
    pub t1_seconds: [T; N_SPINS],
    /// Effective transverse relaxation times in seconds.
    pub t2_seconds: [T; N_SPINS],
}

impl<T: Real> SpinSystem<T> {
    /// Validates a symmetric, zero-diagonal coupling table. Polarizations
    /// and relaxation times start at one.
    pub fn new(nu: [T; N_SPINS], couplings: [[T; N_SPINS]; N_SPINS]) -> Result<Self> {
        for (i, row) in couplings.iter().enumerate() {
            if row[i] != T::zero() {
                return Err(Error::Parameter(format!("coupling D[{i}][{i}] must be zero")));
            }
            for (j, value) in row.iter().enumerate().take(i) {
                if *value != couplings[j][i] {
                    return Err(Error::Parameter(format!("coupling table not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            nu,
            couplings,
            polarization: [T::one(); N_SPINS],
            t1_seconds: [T::one(); N_SPINS],
            t2_seconds: [T::one(); N_SPINS],
        })
    }

    /// The measured three-fluorine/two-proton system: offsets, dipolar
    /// couplings and relaxation constants (T2 at the middle of each
    /// range).
    pub fn reference() -> Self {
        let nu = [6029.0, -3680.0, -6743.0, 50.0, 29.0].map(T::lit);
        let upper = [
            (0, 1, 277.0),
            (0, 2, 116.0),
            (0, 3, 54.0),
            (0, 4, 1556.0),
            (1, 2, -26.0),
            (1, 3, 106.0),
            (1, 4, 1270.0),
            (2, 3, 1532.0),
            (2, 4, 55.0),
            (3, 4, -7.6),
        ];
        let mut couplings = [[T::zero(); N_SPINS]; N_SPINS];
        for (i, j, d) in upper {
            couplings[i][j] = T::lit(d);
            couplings[j][i] = T::lit(d);
        }
        let mut spec = Self::new(nu, couplings).expect("builtin coupling table is symmetric");
        spec.t1_seconds = [0.7, 0.4, 0.5, 1.4, 1.3].map(T::lit);
        spec.t2_seconds = [0.095, 0.055, 0.055, 0.150, 0.150].map(T::lit);
        spec
    }

    /// Same couplings and offsets with every coupling set to zero.
    pub fn uncoupled(&self) -> Self {
        Self {
            couplings: [[T::zero(); N_SPINS]; N_SPINS],
            ..self.clone()
        }
    }
}

/// Magnetic quantum numbers of the five spins in level `level`.
pub fn level_magnetization(level: usize) -> [i32; N_SPINS] {
    let mut m = [0; N_SPINS];
    for (k, mk) in m.iter_mut().enumerate() {
        let bit = (level >> (N_SPINS - 1 - k)) & 1;
        *mk = if bit == 0 { 1 } else { -1 };
    }
    m
}

/// Magnetic quantum numbers of register spins 1..=4 for register state `s`.
pub fn register_magnetization(s: usize) -> [i32; REGISTER_QUBITS] {
    let mut m = [0; REGISTER_QUBITS];
    for (k, mk) in m.iter_mut().enumerate() {
        let bit = (s >> (REGISTER_QUBITS - 1 - k)) & 1;
        *mk = if bit == 0 { 1 } else { -1 };
    }
    m
}

fn check_spins(m: &[i32]) -> Result<()> {
    if m.len() != N_SPINS {
        return Err(Error::LengthMismatch { expected: N_SPINS, actual: m.len() });
    }
    if let Some(bad) = m.iter().find(|&&v| v != 1 && v != -1) {
        return Err(Error::Parameter(format!("spin states must be +1 or -1, got {bad}")));
    }
    Ok(())
}

/// `E = -pi sum_i nu_i m_i + (pi/2) sum_{i<j} D_ij m_i m_j`, in rad/s.
pub fn state_energy<T: Real>(spec: &SpinSystem<T>, m: &[i32]) -> Result<T> {
    check_spins(m)?;
    let pi = T::PI();
    let mf: Vec<T> = m.iter().map(|&v| T::lit(v as f64)).collect();
    let mut zeeman = T::zero();
    let mut coupling = T::zero();
    for i in 0..N_SPINS {
        zeeman += spec.nu[i] * mf[i];
        for j in i + 1..N_SPINS {
            coupling += spec.couplings[i][j] * mf[i] * mf[j];
        }
    }
    Ok(-pi * zeeman + pi / T::lit(2.0) * coupling)
}

/// Frequency in Hz of the transition flipping spin `spin` while the other
/// four spins (in increasing spin order) have magnetizations `others`:
/// `nu_i - (1/2) sum_{j != i} D_ij m_j`.
pub fn line_frequency<T: Real>(spec: &SpinSystem<T>, spin: usize, others: &[i32]) -> Result<T> {
    if spin >= N_SPINS {
        return Err(Error::IndexOutOfRange { index: spin, len: N_SPINS });
    }
    if others.len() != N_SPINS - 1 {
        return Err(Error::LengthMismatch { expected: N_SPINS - 1, actual: others.len() });
    }
    if let Some(bad) = others.iter().find(|&&v| v != 1 && v != -1) {
        return Err(Error::Parameter(format!("spin states must be +1 or -1, got {bad}")));
    }
    let partners = (0..N_SPINS).filter(|&j| j != spin);
    let shift = partners
        .zip(others)
        .fold(T::zero(), |acc, (j, &mj)| acc + spec.couplings[spin][j] * T::lit(mj as f64));
    Ok(spec.nu[spin] - shift / T::lit(2.0))
}

/// Ancilla line for register state `s`.
pub fn ancilla_line_frequency<T: Real>(spec: &SpinSystem<T>, s: usize) -> Result<T> {
    if s >= REGISTER_STATES {
        return Err(Error::IndexOutOfRange { index: s, len: REGISTER_STATES });
    }
    line_frequency(spec, 0, &register_magnetization(s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumLine<T> {
    /// Observed spin, 0 = ancilla.
    pub spin: usize,
    /// 4-bit state of the other spins, lowest-numbered spin most significant.
    pub state: usize,
    pub frequency_hz: T,
    pub intensity: T,
}

/// All 80 single-spin transitions, 16 per spin, with zero intensity.
pub fn all_lines<T: Real>(spec: &SpinSystem<T>) -> Vec<SpectrumLine<T>> {
    let mut lines = Vec::with_capacity(N_SPINS * REGISTER_STATES);
    for spin in 0..N_SPINS {
        for state in 0..REGISTER_STATES {
            let others = register_magnetization(state);
            let frequency_hz = line_frequency(spec, spin, &others).expect("valid spin and states");
            lines.push(SpectrumLine { spin, state, frequency_hz, intensity: T::zero() });
        }
    }
    lines
}

/// The 16 ancilla lines carrying `intensities[s]`, sorted by register state.
pub fn ancilla_spectrum<T: Real>(spec: &SpinSystem<T>, intensities: &[T]) -> Result<Vec<SpectrumLine<T>>> {
    if intensities.len() != REGISTER_STATES {
        return Err(Error::LengthMismatch { expected: REGISTER_STATES, actual: intensities.len() });
    }
    (0..REGISTER_STATES)
        .map(|s| {
            Ok(SpectrumLine {
                spin: 0,
                state: s,
                frequency_hz: ancilla_line_frequency(spec, s)?,
                intensity: intensities[s],
            })
        })
        .collect()
}

/// `register_state,frequency_hz,intensity` table, states in binary.
pub fn format_spectrum_csv<T: Real>(lines: &[SpectrumLine<T>]) -> String {
    let mut sorted = lines.to_vec();
    sorted.sort_by_key(|l| (l.state, l.spin));
    let mut out = String::from("register_state,frequency_hz,intensity\n");
    for l in &sorted {
        let _ = writeln!(
            out,
            "{:04b},{:.16e},{:.16e}",
            l.state, l.frequency_hz, l.intensity
        );
    }
    out
}

/// Deviation populations of the 32 levels, indexed `(ancilla << 4) | s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationState<T> {
    pub populations: [T; LEVELS],
}

impl<T: Real> DeviationState<T> {
    pub fn zero() -> Self {
        Self { populations: [T::zero(); LEVELS] }
    }

    pub fn get(&self, ancilla: usize, s: usize) -> T {
        self.populations[(ancilla << REGISTER_QUBITS) | s]
    }

    pub fn set(&mut self, ancilla: usize, s: usize, value: T) {
        self.populations[(ancilla << REGISTER_QUBITS) | s] = value;
    }

    pub fn total(&self) -> T {
        self.populations.iter().fold(T::zero(), |acc, &p| acc + p)
    }

    /// Sum of populations within one ancilla subsystem.
    pub fn subsystem_total(&self, ancilla: usize) -> T {
        (0..REGISTER_STATES).fold(T::zero(), |acc, s| acc + self.get(ancilla, s))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { populations: self.populations.map(|p| p * factor) }
    }
}

/// High-temperature equilibrium: level deviation proportional to
/// `sum_i w_i m_i` with `w` the spin polarizations, scaled so the fully
/// aligned level is `+1`. Traceless by construction.
pub fn equilibrium_deviation<T: Real>(spec: &SpinSystem<T>) -> DeviationState<T> {
    let norm = spec.polarization.iter().fold(T::zero(), |acc, w| acc + w.abs());
    let mut dev = DeviationState::zero();
    for level in 0..LEVELS {
        let m = level_magnetization(level);
        let sum = m
            .iter()
            .zip(&spec.polarization)
            .fold(T::zero(), |acc, (&mi, &w)| acc + w * T::lit(mi as f64));
        dev.populations[level] = sum / norm;
    }
    dev
}

/// Swaps the populations of `(0, s)` and `(1, s)`: a selective inversion
/// of the ancilla transition at register state `s`.
pub fn invert_transition<T: Real>(dev: &DeviationState<T>, s: usize) -> Result<DeviationState<T>> {
    if s >= REGISTER_STATES {
        return Err(Error::IndexOutOfRange { index: s, len: REGISTER_STATES });
    }
    let mut out = *dev;
    out.populations.swap(s, REGISTER_STATES | s);
    Ok(out)
}

/// Elementwise `a - b`.
pub fn pops<T: Real>(a: &DeviationState<T>, b: &DeviationState<T>) -> DeviationState<T> {
    let mut out = *a;
    for (x, &y) in out.populations.iter_mut().zip(&b.populations) {
        *x -= y;
    }
    out
}

/// Register unitary (identity on the ancilla) followed by coherence
/// removal: `p'(a, j) = sum_s |U_js|^2 p(a, s)`.
pub fn apply_register_unitary<T: Real>(dev: &DeviationState<T>, u: &CMatrix<T>) -> Result<DeviationState<T>> {
    if u.nrows() != REGISTER_STATES || u.ncols() != REGISTER_STATES {
        return Err(Error::LengthMismatch { expected: REGISTER_STATES, actual: u.nrows() });
    }
    let deviation = unitarity_deviation(u);
    if !(deviation <= T::check_tol()) {
        return Err(Error::NotUnitary(deviation.as_f64()));
    }
    let mut out = DeviationState::zero();
    for a in 0..2 {
        for j in 0..REGISTER_STATES {
            let p = (0..REGISTER_STATES).fold(T::zero(), |acc, s| acc + u[(j, s)].norm_sqr() * dev.get(a, s));
            out.set(a, j, p);
        }
    }
    Ok(out)
}

/// Ancilla line intensities after a linear `(pi/2)` read pulse:
/// `I_s = p(0, s) - p(1, s)`.
pub fn readout_intensities<T: Real>(dev: &DeviationState<T>) -> Vec<T> {
    (0..REGISTER_STATES).map(|s| dev.get(0, s) - dev.get(1, s)).collect()
}

/// Raw intensity difference of the two experiments: one from equilibrium,
/// one after inverting the ancilla transition at `start`, both followed by
/// `u` and readout.
pub fn experiment_pair_raw<T: Real>(spec: &SpinSystem<T>, u: &CMatrix<T>, start: usize) -> Result<Vec<T>> {
    let equilibrium = equilibrium_deviation(spec);
    let inverted = invert_transition(&equilibrium, start)?;
    let first = readout_intensities(&apply_register_unitary(&equilibrium, u)?);
    let second = readout_intensities(&apply_register_unitary(&inverted, u)?);
    Ok(first.iter().zip(&second).map(|(a, b)| *a - *b).collect())
}

/// [`experiment_pair_raw`] normalized to unit sum: the estimated spatial
/// probabilities `|U_{j, start}|^2`.
pub fn experiment_pair<T: Real>(spec: &SpinSystem<T>, u: &CMatrix<T>, start: usize) -> Result<Vec<T>> {
    let raw = experiment_pair_raw(spec, u, start)?;
    let mut normalized = crate::splitop::normalize_columns(&[raw])?;
    Ok(normalized.remove(0))
}

/// Per-step decoherence scaling of line intensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams<T> {
    pub step_wall_seconds: T,
    pub t2_seconds: T,
}

impl<T: Real> Default for DecayParams<T> {
    /// 24 ms per step, 55 ms effective T2.
    fn default() -> Self {
        Self {
            step_wall_seconds: T::lit(0.024),
            t2_seconds: T::lit(0.055),
        }
    }
}

impl<T: Real> DecayParams<T> {
    /// `exp(-m t_step / T2)`.
    pub fn factor(&self, steps: usize) -> Result<T> {
        if !(self.t2_seconds > T::zero()) {
            return Err(Error::Parameter(format!("T2 must be positive, got {}", self.t2_seconds)));
        }
        if !(self.step_wall_seconds >= T::zero()) {
            return Err(Error::Parameter(format!(
                "step wall time must be non-negative, got {}",
                self.step_wall_seconds
            )));
        }
        Ok((-T::from_index(steps) * self.step_wall_seconds / self.t2_seconds).exp())
    }
}

/// Scales intensities by `exp(-m t_step / T2)`.
pub fn decay_model<T: Real>(intensities: &[T], steps: usize, params: &DecayParams<T>) -> Result<Vec<T>> {
    let factor = params.factor(steps)?;
    Ok(intensities.iter().map(|&i| i * factor).collect())
}
