//! Gate-level compilation of one split-operator step.
//!
//! Gate conventions (qubit 0 is the least significant bit of the site index):
//!
//! * `Phase(q, phi)` multiplies basis states with bit `q` set by `e^{i phi}`.
//! * `ControlledPhase(a, b, phi)` multiplies states with both bits set.
//! * `MultiZRotation(mask, theta)` is `exp(-i theta Z_mask)`, where `Z_mask`
//!   acts on `|j>` with eigenvalue `(-1)^{popcount(mask & j)}`.
//! * `GlobalPhase(phi)` multiplies the whole state by `e^{i phi}`.
//!
//! Gates apply in list order. A diagonal `diag(e^{-i theta_j})` is emitted as
//! `GlobalPhase(-w_0)` followed by `MultiZRotation(a, w_a)` for each nonzero
//! Walsh coefficient `w_a` of `theta`, which reproduces the diagonal exactly.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scalar::{cis, log2_exact, CMatrix, Complex, Real};
use crate::splitop::TrotterPlan;

/// Largest register for dense evaluation and compilation.
pub const MAX_CIRCUIT_QUBITS: usize = 12;

/// Walsh coefficients smaller than this are dropped from diagonal circuits.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate<T> {
    Hadamard { qubit: usize },
    Phase { qubit: usize, angle: T },
    ControlledPhase { control: usize, target: usize, angle: T },
    Swap { a: usize, b: usize },
    MultiZRotation { mask: u64, angle: T },
    GlobalPhase { angle: T },
}

impl<T: Real> Gate<T> {
    /// Short mnemonic used in the text format.
    pub fn mnemonic(&self) -> &'static str {
        match self {
            Gate::Hadamard { .. } => "H",
            Gate::Phase { .. } => "P",
            Gate::ControlledPhase { .. } => "CP",
            Gate::Swap { .. } => "SWAP",
            Gate::MultiZRotation { .. } => "MZR",
            Gate::GlobalPhase { .. } => "GPHASE",
        }
    }

    pub fn inverse(&self) -> Self {
        match *self {
            Gate::Hadamard { qubit } => Gate::Hadamard { qubit },
            Gate::Phase { qubit, angle } => Gate::Phase { qubit, angle: -angle },
            Gate::ControlledPhase { control, target, angle } => Gate::ControlledPhase {
                control,
                target,
                angle: -angle,
            },
            Gate::Swap { a, b } => Gate::Swap { a, b },
            Gate::MultiZRotation { mask, angle } => Gate::MultiZRotation { mask, angle: -angle },
            Gate::GlobalPhase { angle } => Gate::GlobalPhase { angle: -angle },
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q < n_qubits {
                Ok(())
            } else {
                Err(Error::QubitOutOfRange { qubit: q, n_qubits })
            }
        };
        match *self {
            Gate::Hadamard { qubit } | Gate::Phase { qubit, .. } => check(qubit),
            Gate::ControlledPhase { control, target, .. } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::Parameter("controlled phase needs two distinct qubits".into()));
                }
                Ok(())
            }
            Gate::Swap { a, b } => {
                check(a)?;
                check(b)
            }
            Gate::MultiZRotation { mask, .. } => {
                if mask == 0 {
                    return Err(Error::Parameter("multi-Z rotation mask must be nonzero".into()));
                }
                let top = 63 - mask.leading_zeros() as usize;
                check(top)
            }
            Gate::GlobalPhase { .. } => Ok(()),
        }
    }

    /// Applies the gate to a statevector of `2^n` amplitudes.
    pub fn apply(&self, state: &mut [Complex<T>]) {
        match *self {
            Gate::Hadamard { qubit } => {
                let bit = 1usize << qubit;
                let s = T::FRAC_1_SQRT_2();
                for i in 0..state.len() {
                    if i & bit == 0 {
                        let a = state[i];
                        let b = state[i | bit];
                        state[i] = (a + b) * s;
                        state[i | bit] = (a - b) * s;
                    }
                }
            }
            Gate::Phase { qubit, angle } => {
                let bit = 1usize << qubit;
                let p = cis(angle);
                for (i, a) in state.iter_mut().enumerate() {
                    if i & bit != 0 {
                        *a *= p;
                    }
                }
            }
            Gate::ControlledPhase { control, target, angle } => {
                let bits = (1usize << control) | (1usize << target);
                let p = cis(angle);
                for (i, a) in state.iter_mut().enumerate() {
                    if i & bits == bits {
                        *a *= p;
                    }
                }
            }
            Gate::Swap { a, b } => {
                if a == b {
                    return;
                }
                let (ba, bb) = (1usize << a, 1usize << b);
                for i in 0..state.len() {
                    if i & ba != 0 && i & bb == 0 {
                        state.swap(i, (i ^ ba) | bb);
                    }
                }
            }
            Gate::MultiZRotation { mask, angle } => {
                let even = cis(-angle);
                let odd = cis(angle);
                for (i, a) in state.iter_mut().enumerate() {
                    if (i as u64 & mask).count_ones() & 1 == 0 {
                        *a *= even;
                    } else {
                        *a *= odd;
                    }
                }
            }
            Gate::GlobalPhase { angle } => {
                let p = cis(angle);
                state.iter_mut().for_each(|a| *a *= p);
            }
        }
    }

    fn write_line(&self, n_qubits: usize, out: &mut String) {
        use std::fmt::Write;
        let _ = match *self {
            Gate::Hadamard { qubit } => writeln!(out, "H {qubit}"),
            Gate::Phase { qubit, angle } => writeln!(out, "P {qubit} {angle:.16e}"),
            Gate::ControlledPhase { control, target, angle } => {
                writeln!(out, "CP {control} {target} {angle:.16e}")
            }
            Gate::Swap { a, b } => writeln!(out, "SWAP {a} {b}"),
            Gate::MultiZRotation { mask, angle } => {
                writeln!(out, "MZR {mask:0width$b} {angle:.16e}", width = n_qubits.max(1))
            }
            Gate::GlobalPhase { angle } => writeln!(out, "GPHASE {angle:.16e}"),
        };
    }
}

/// Ordered gate list on `n_qubits`; the first gate acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit<T> {
    pub n_qubits: usize,
    pub gates: Vec<Gate<T>>,
}

impl<T: Real> Circuit<T> {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate<T>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends `other` after `self`.
    pub fn append(&mut self, other: &Circuit<T>) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::Parameter(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.n_qubits, self.n_qubits
            )));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.validate(self.n_qubits))
    }

    /// Reversed order, each gate inverted.
    pub fn inverse(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Runs the circuit on a statevector of length `2^n_qubits`.
    pub fn apply(&self, state: &mut [Complex<T>]) -> Result<()> {
        if state.len() != 1usize << self.n_qubits {
            return Err(Error::LengthMismatch {
                expected: 1 << self.n_qubits,
                actual: state.len(),
            });
        }
        self.validate()?;
        for gate in &self.gates {
            gate.apply(state);
        }
        Ok(())
    }

    pub fn counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for gate in &self.gates {
            match *gate {
                Gate::Hadamard { .. } => c.hadamard += 1,
                Gate::Phase { .. } => c.phase += 1,
                Gate::ControlledPhase { .. } => c.controlled_phase += 1,
                Gate::Swap { .. } => c.swap += 1,
                Gate::MultiZRotation { mask, .. } => {
                    c.multi_z += 1;
                    let weight = mask.count_ones() as usize;
                    c.lowered_cnot += 2 * (weight - 1);
                    c.lowered_z_rotation += 1;
                }
                Gate::GlobalPhase { .. } => c.global_phase += 1,
            }
        }
        c
    }

    /// Text form: a `# qubits n` header, then one gate per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("# qubits {}\n", self.n_qubits);
        for gate in &self.gates {
            gate.write_line(self.n_qubits, &mut out);
        }
        out
    }

    /// Parses [`Circuit::to_text`] output. Lines starting with `#` are
    /// comments, except `# qubits n`, which fixes the register size. Without
    /// it the size is inferred from the gates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut gates = Vec::new();
        let mut needed = 0usize;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                if words.next() == Some("qubits") {
                    let n = words
                        .next()
                        .and_then(|w| w.parse::<usize>().ok())
                        .ok_or_else(|| parse_err(line_no, "malformed qubits header"))?;
                    declared = Some(n);
                }
                continue;
            }
            let gate = parse_gate(line, line_no)?;
            needed = needed.max(match gate {
                Gate::Hadamard { qubit } | Gate::Phase { qubit, .. } => qubit + 1,
                Gate::ControlledPhase { control, target, .. } => control.max(target) + 1,
                Gate::Swap { a, b } => a.max(b) + 1,
                Gate::MultiZRotation { mask, .. } => 64 - mask.leading_zeros() as usize,
                Gate::GlobalPhase { .. } => 0,
            });
            gates.push(gate);
        }
        let circuit = Circuit {
            n_qubits: declared.unwrap_or(needed),
            gates,
        };
        circuit.validate()?;
        Ok(circuit)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_gate<T: Real>(line: &str, line_no: usize) -> Result<Gate<T>> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let qubit = |w: &str| {
        w.parse::<usize>()
            .map_err(|_| parse_err(line_no, format!("bad qubit index '{w}'")))
    };
    let angle = |w: &str| {
        w.parse::<f64>()
            .ok()
            .filter(|a| a.is_finite())
            .map(T::lit)
            .ok_or_else(|| parse_err(line_no, format!("bad angle '{w}'")))
    };
    let arity = |n: usize| {
        if words.len() == n + 1 {
            Ok(())
        } else {
            Err(parse_err(
                line_no,
                format!("{} takes {n} operands, got {}", words[0], words.len() - 1),
            ))
        }
    };
    match words[0] {
        "H" => {
            arity(1)?;
            Ok(Gate::Hadamard { qubit: qubit(words[1])? })
        }
        "P" => {
            arity(2)?;
            Ok(Gate::Phase { qubit: qubit(words[1])?, angle: angle(words[2])? })
        }
        "CP" => {
            arity(3)?;
            Ok(Gate::ControlledPhase {
                control: qubit(words[1])?,
                target: qubit(words[2])?,
                angle: angle(words[3])?,
            })
        }
        "SWAP" => {
            arity(2)?;
            Ok(Gate::Swap { a: qubit(words[1])?, b: qubit(words[2])? })
        }
        "MZR" => {
            arity(2)?;
            let mask = u64::from_str_radix(words[1], 2)
                .map_err(|_| parse_err(line_no, format!("bad mask '{}'", words[1])))?;
            Ok(Gate::MultiZRotation { mask, angle: angle(words[2])? })
        }
        "GPHASE" => {
            arity(1)?;
            Ok(Gate::GlobalPhase { angle: angle(words[1])? })
        }
        other => Err(parse_err(line_no, format!("unknown gate '{other}'"))),
    }
}

/// Gate tallies, plus the CNOT/Z-rotation cost of lowering every
/// multi-Z rotation to a parity ladder.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub hadamard: usize,
    pub phase: usize,
    pub controlled_phase: usize,
    pub swap: usize,
    pub multi_z: usize,
    pub global_phase: usize,
    pub lowered_cnot: usize,
    pub lowered_z_rotation: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.hadamard + self.phase + self.controlled_phase + self.swap + self.multi_z + self.global_phase
    }
}

impl fmt::Display for GateCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "total={} H={} P={} CP={} SWAP={} MZR={} GPHASE={} lowered_CNOT={} lowered_RZ={}",
            self.total(),
            self.hadamard,
            self.phase,
            self.controlled_phase,
            self.swap,
            self.multi_z,
            self.global_phase,
            self.lowered_cnot,
            self.lowered_z_rotation
        )
    }
}

/// Elementary gates of the parity-ladder lowering of a multi-Z rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoweredGate<T> {
    Cnot { control: usize, target: usize },
    /// `exp(-i angle Z_qubit)`.
    ZRotation { qubit: usize, angle: T },
}

/// CNOTs fold the parity of `mask` onto its highest qubit, a single Z
/// rotation acts there, and the CNOTs are undone.
pub fn lower_multi_z<T: Real>(mask: u64, angle: T) -> Vec<LoweredGate<T>> {
    if mask == 0 {
        return Vec::new();
    }
    let top = 63 - mask.leading_zeros() as usize;
    let others: Vec<usize> = (0..top).filter(|q| mask >> q & 1 == 1).collect();
    let mut gates: Vec<_> = others
        .iter()
        .map(|&q| LoweredGate::Cnot { control: q, target: top })
        .collect();
    gates.push(LoweredGate::ZRotation { qubit: top, angle });
    gates.extend(others.iter().rev().map(|&q| LoweredGate::Cnot { control: q, target: top }));
    gates
}

/// Textbook QFT: its matrix is `N^{-1/2} e^{+2 pi i jl/N}`.
///
/// Hadamard and controlled-phase ladder from the most significant qubit
/// down, then swaps reversing the qubit order. Gate count is
/// `n(n+1)/2 + floor(n/2)`.
pub fn qft_circuit<T: Real>(n: usize) -> Result<Circuit<T>> {
    if n == 0 || n > MAX_CIRCUIT_QUBITS {
        return Err(Error::Parameter(format!(
            "QFT register size must be in 1..={MAX_CIRCUIT_QUBITS}, got {n}"
        )));
    }
    let mut c = Circuit::new(n);
    for target in (0..n).rev() {
        c.gates.push(Gate::Hadamard { qubit: target });
        for control in (0..target).rev() {
            let angle = T::PI() / T::from_index(1usize << (target - control));
            c.gates.push(Gate::ControlledPhase { control, target, angle });
        }
    }
    for q in 0..n / 2 {
        c.gates.push(Gate::Swap { a: q, b: n - 1 - q });
    }
    Ok(c)
}

/// Phase layers turning the standard QFT into the centered DFT.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringConjugation<T> {
    /// Applied before the QFT: `e^{-i 2 pi c j/N}`.
    pub pre: Circuit<T>,
    /// Applied after the QFT: `e^{-i 2 pi c l/N}`.
    pub post: Circuit<T>,
    /// `2 pi c^2 / N` modulo `2 pi`.
    pub global_phase: T,
}

/// The index-linear phase `e^{-i 2 pi c j/N}` factors into one `Phase` gate
/// per qubit with angle `-2 pi c 2^q / N`.
pub fn centering_conjugation<T: Real>(grid: &GridSpec<T>) -> CenteringConjugation<T> {
    centering_for(grid.n_qubits())
}

fn centering_for<T: Real>(n: usize) -> CenteringConjugation<T> {
    let len = 1u128 << n;
    let pi = T::PI();
    let nf = T::from_index(len as usize);
    let mut layer = Circuit::new(n);
    for q in 0..n {
        // 2 pi c 2^q / N = pi (N-1) 2^q / N, reduced modulo 2N
        let r = ((len - 1) * (1u128 << q)) % (2 * len);
        let angle = -pi * T::from_index(r as usize) / nf;
        if angle != T::zero() {
            layer.gates.push(Gate::Phase { qubit: q, angle });
        }
    }
    let r = ((len - 1) * (len - 1)) % (4 * len);
    CenteringConjugation {
        pre: layer.clone(),
        post: layer,
        global_phase: pi * T::from_index(r as usize) / (T::lit(2.0) * nf),
    }
}

/// `post . QFT . pre` with the explicit global phase: the centered DFT.
pub fn centered_dft_circuit<T: Real>(n: usize) -> Result<Circuit<T>> {
    let mut c = centered_dft_body(n)?;
    let conj = centering_for::<T>(n);
    c.gates.push(Gate::GlobalPhase { angle: conj.global_phase });
    Ok(c)
}

fn centered_dft_body<T: Real>(n: usize) -> Result<Circuit<T>> {
    let qft = qft_circuit(n)?;
    let conj = centering_for::<T>(n);
    let mut c = conj.pre;
    c.append(&qft)?;
    c.append(&conj.post)?;
    Ok(c)
}

/// Normalized Walsh-Hadamard transform `w_a = (1/N) sum_j (-1)^{a.j} theta_j`.
pub fn walsh_coefficients<T: Real>(phases: &[T]) -> Result<Vec<T>> {
    log2_exact(phases.len()).ok_or(Error::NotPowerOfTwo(phases.len()))?;
    let mut w = phases.to_vec();
    fwht(&mut w);
    let scale = T::one() / T::from_index(phases.len());
    w.iter_mut().for_each(|x| *x *= scale);
    Ok(w)
}

/// `theta_j = sum_a (-1)^{a.j} w_a`.
pub fn inverse_walsh<T: Real>(coefficients: &[T]) -> Result<Vec<T>> {
    log2_exact(coefficients.len()).ok_or(Error::NotPowerOfTwo(coefficients.len()))?;
    let mut theta = coefficients.to_vec();
    fwht(&mut theta);
    Ok(theta)
}

fn fwht<T: Real>(data: &mut [T]) {
    let n = data.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (data[i], data[i + h]);
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Circuit for `diag(e^{-i theta_j})`.
pub fn diagonal_circuit<T: Real>(phases: &[T]) -> Result<Circuit<T>> {
    let n = log2_exact(phases.len()).ok_or(Error::NotPowerOfTwo(phases.len()))?;
    let coefficients = walsh_coefficients(phases)?;
    let threshold = T::lit(PRUNE_THRESHOLD);
    let mut c = Circuit::new(n);
    if coefficients[0].abs() >= threshold {
        c.gates.push(Gate::GlobalPhase { angle: -coefficients[0] });
    }
    for (mask, &w) in coefficients.iter().enumerate().skip(1) {
        if w.abs() >= threshold {
            c.gates.push(Gate::MultiZRotation { mask: mask as u64, angle: w });
        }
    }
    Ok(c)
}

/// Dense matrix of a circuit, built column by column from basis states.
pub fn circuit_to_matrix<T: Real>(circuit: &Circuit<T>) -> Result<CMatrix<T>> {
    if circuit.n_qubits > MAX_CIRCUIT_QUBITS {
        return Err(Error::Parameter(format!(
            "dense evaluation limited to {MAX_CIRCUIT_QUBITS} qubits, got {}",
            circuit.n_qubits
        )));
    }
    circuit.validate()?;
    let n = 1usize << circuit.n_qubits;
    let zero = Complex::new(T::zero(), T::zero());
    let mut m = CMatrix::from_element(n, n, zero);
    let mut column = vec![zero; n];
    for s in 0..n {
        column.iter_mut().for_each(|a| *a = zero);
        column[s] = Complex::new(T::one(), T::zero());
        for gate in &circuit.gates {
            gate.apply(&mut column);
        }
        for (r, a) in column.iter().enumerate() {
            m[(r, s)] = *a;
        }
    }
    Ok(m)
}

/// One Trotter step as gates: `diag(V dt/2)`, centered DFT, kinetic
/// diagonal, inverse centered DFT, `diag(V dt/2)`.
///
/// The global phases of the forward and inverse centered DFT cancel, so
/// neither is emitted; every `GlobalPhase` in the output comes from a
/// diagonal block with a nonzero mean phase.
pub fn step_circuit<T: Real>(plan: &TrotterPlan<T>) -> Result<Circuit<T>> {
    let grid = plan.grid();
    let n = grid.n_qubits();
    if n > MAX_CIRCUIT_QUBITS {
        return Err(Error::Parameter(format!(
            "step compilation limited to {MAX_CIRCUIT_QUBITS} qubits, got {n}"
        )));
    }
    let half = plan.dt() / T::lit(2.0);
    let potential: Vec<T> = plan.potential().values().iter().map(|&v| v * half).collect();
    let kinetic: Vec<T> = grid
        .momenta(plan.convention())
        .into_iter()
        .map(|k| k * k * half)
        .collect();
    let potential_block = diagonal_circuit(&potential)?;
    let forward = centered_dft_body::<T>(n)?;

    let mut c = Circuit::new(n);
    c.append(&potential_block)?;
    c.append(&forward)?;
    c.append(&diagonal_circuit(&kinetic)?)?;
    c.append(&forward.inverse())?;
    c.append(&potential_block)?;
    Ok(c)
}

/// `m` copies of [`step_circuit`].
pub fn evolution_circuit<T: Real>(plan: &TrotterPlan<T>, steps: usize) -> Result<Circuit<T>> {
    let step = step_circuit(plan)?;
    let mut c = Circuit::new(step.n_qubits);
    for _ in 0..steps {
        c.append(&step)?;
    }
    Ok(c)
}
