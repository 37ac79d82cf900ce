//! Symmetric split-operator propagation on the centered lattice.
//!
//! One step applies `e^{-iV dt/2}`, the centered DFT, the diagonal kinetic
//! phases `e^{-i k_l^2 dt/2}`, the inverse DFT and `e^{-iV dt/2}` again.
//! The centered DFT uses the unitary kernel
//! `N^{-1/2} exp(+2 pi i (l-c)(j-c)/N)` with `c = (N-1)/2`. With
//! `dx = L/(N-1)` and `dk = 2 pi / L` the literal plane-wave kernel
//! `exp(i k_l x_j)` is not unitary, so it is only exposed for inspection via
//! [`literal_kernel_matrix`].
//!
//! [`exact_propagator`] builds `e^{-iH dt}` for the same discretized `H` by
//! Hermitian eigendecomposition; it is the reference the Trotter path is
//! measured against.

use nalgebra::RealField;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, MomentumConvention, Wavefunction};
use crate::potential::PotentialTable;
use crate::scalar::{adjoint, cis, log2_exact, unitarity_deviation, CMatrix, Complex, Real};

/// Largest register the dense eigendecomposition oracle accepts.
pub const MAX_ORACLE_QUBITS: usize = 12;

/// Precomputed centered DFT for one register size.
///
/// The centered kernel factors as
/// `e^{i 2 pi c^2/N} D F_std D` with `D = diag(e^{-i 2 pi c j/N})`, so the
/// transform is a standard radix-2 FFT between two diagonal phase layers.
/// All phases are reduced exactly in integer arithmetic before the single
/// trigonometric evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredFourier<T> {
    len: usize,
    linear_phases: Vec<Complex<T>>,
    global_phase: Complex<T>,
    twiddles: Vec<Complex<T>>,
    scale: T,
}

impl<T: Real> CenteredFourier<T> {
    pub fn new(len: usize) -> Result<Self> {
        log2_exact(len).ok_or(Error::NotPowerOfTwo(len))?;
        let pi = T::PI();
        let nf = T::from_index(len);
        // 2 pi c j / N = pi (N-1) j / N, reduced modulo 2N
        let linear_phases = (0..len)
            .map(|j| {
                let r = ((len - 1) as u128 * j as u128 % (2 * len as u128)) as usize;
                cis(-pi * T::from_index(r) / nf)
            })
            .collect();
        // 2 pi c^2 / N = pi (N-1)^2 / (2N), reduced modulo 4N
        let r = ((len as u128 - 1).pow(2) % (4 * len as u128)) as usize;
        let global_phase = cis(pi * T::from_index(r) / (T::lit(2.0) * nf));
        let twiddles = (0..len / 2)
            .map(|k| cis(T::lit(2.0) * pi * T::from_index(k) / nf))
            .collect();
        Ok(Self {
            len,
            linear_phases,
            global_phase,
            twiddles,
            scale: T::one() / nf.sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Position to momentum basis, in place.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, false);
    }

    /// Momentum to position basis, in place.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, true);
    }

    fn transform(&self, data: &mut [Complex<T>], inverse: bool) {
        assert_eq!(data.len(), self.len, "transform length mismatch");
        let phase = |z: Complex<T>| if inverse { z.conj() } else { z };
        for (a, &p) in data.iter_mut().zip(&self.linear_phases) {
            *a *= phase(p);
        }
        fft_in_place(data, &self.twiddles, inverse);
        let global = phase(self.global_phase) * self.scale;
        for (a, &p) in data.iter_mut().zip(&self.linear_phases) {
            *a *= phase(p) * global;
        }
    }
}

/// Unnormalized radix-2 DFT with kernel `e^{+2 pi i jk/N}` (conjugated when
/// `inverse`). Butterflies run in a fixed order, so results are bit-reproducible.
fn fft_in_place<T: Real>(data: &mut [Complex<T>], twiddles: &[Complex<T>], inverse: bool) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            data.swap(i, j);
        }
    }
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let stride = n / size;
        for start in (0..n).step_by(size) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let w = if inverse { w.conj() } else { w };
                let t = data[start + k + half] * w;
                let u = data[start + k];
                data[start + k] = u + t;
                data[start + k + half] = u - t;
            }
        }
        size *= 2;
    }
}

/// Centered unitary DFT of a position-basis wavefunction.
pub fn centered_dft<T: Real>(psi: &Wavefunction<T>) -> Wavefunction<T> {
    let mut out = psi.clone();
    CenteredFourier::new(psi.grid().len())
        .expect("grid sizes are powers of two")
        .forward(out.amplitudes_mut());
    out
}

/// Inverse of [`centered_dft`].
pub fn centered_idft<T: Real>(psi: &Wavefunction<T>) -> Wavefunction<T> {
    let mut out = psi.clone();
    CenteredFourier::new(psi.grid().len())
        .expect("grid sizes are powers of two")
        .inverse(out.amplitudes_mut());
    out
}

/// Dense matrix of the centered DFT, evaluated entry by entry from the kernel.
pub fn centered_dft_matrix<T: Real>(len: usize) -> Result<CMatrix<T>> {
    log2_exact(len).ok_or(Error::NotPowerOfTwo(len))?;
    let scale = T::one() / T::from_index(len).sqrt();
    let four_n = 4 * len as i128;
    let pi = T::PI();
    let nf = T::from_index(len);
    Ok(CMatrix::from_fn(len, len, |l, j| {
        // 4 (l-c)(j-c) = (2l-N+1)(2j-N+1); angle = 2 pi (that / 4) / N
        let a = 2 * l as i128 - len as i128 + 1;
        let b = 2 * j as i128 - len as i128 + 1;
        let r = (a * b).rem_euclid(four_n);
        cis(pi * T::from_index(r as usize) / (T::lit(2.0) * nf)) * scale
    }))
}

/// The plane-wave kernel `e^{i k_l x_j}` normalized by `N^{-1/2}`, built
/// from the grid's own `dx` and `dk`. Not unitary when `dx dk N != 2 pi`.
pub fn literal_kernel_matrix<T: Real>(grid: &GridSpec<T>) -> CMatrix<T> {
    let x = grid.positions();
    let k = grid.momenta(MomentumConvention::Box);
    let scale = T::one() / T::from_index(grid.len()).sqrt();
    CMatrix::from_fn(grid.len(), grid.len(), |l, j| cis(k[l] * x[j]) * scale)
}

/// Precomputed phase layers of one Trotter step.
#[derive(Debug, Clone)]
pub struct TrotterPlan<T> {
    grid: GridSpec<T>,
    vtable: PotentialTable<T>,
    dt: T,
    convention: MomentumConvention,
    half_potential_phases: Vec<Complex<T>>,
    kinetic_phases: Vec<Complex<T>>,
    fourier: CenteredFourier<T>,
}

impl<T: Real> TrotterPlan<T> {
    /// Plan with the default momentum spacing `dk = 2 pi / L`.
    pub fn new(vtable: &PotentialTable<T>, dt: T) -> Result<Self> {
        Self::with_convention(vtable, dt, MomentumConvention::Box)
    }

    /// `dt` may be zero or negative (backward propagation); it must be finite.
    pub fn with_convention(
        vtable: &PotentialTable<T>,
        dt: T,
        convention: MomentumConvention,
    ) -> Result<Self> {
        if !dt.is_finite() {
            return Err(Error::Parameter(format!("dt must be finite, got {dt}")));
        }
        let grid = *vtable.grid();
        let half = dt / T::lit(2.0);
        let half_potential_phases = vtable.values().iter().map(|&v| cis(-v * half)).collect();
        let kinetic_phases = grid
            .momenta(convention)
            .into_iter()
            .map(|k| cis(-k * k * half))
            .collect();
        Ok(Self {
            grid,
            vtable: vtable.clone(),
            dt,
            convention,
            half_potential_phases,
            kinetic_phases,
            fourier: CenteredFourier::new(grid.len())?,
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn potential(&self) -> &PotentialTable<T> {
        &self.vtable
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn convention(&self) -> MomentumConvention {
        self.convention
    }

    /// `e^{-i V_j dt/2}`.
    pub fn half_potential_phases(&self) -> &[Complex<T>] {
        &self.half_potential_phases
    }

    /// `e^{-i k_l^2 dt/2}`.
    pub fn kinetic_phases(&self) -> &[Complex<T>] {
        &self.kinetic_phases
    }

    /// Same potential and convention, time step `-dt`.
    pub fn reversed(&self) -> Self {
        Self::with_convention(&self.vtable, -self.dt, self.convention)
            .expect("negated finite dt is valid")
    }

    fn check_grid(&self, psi: &Wavefunction<T>) -> Result<()> {
        if psi.grid() == &self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn apply_half_potential(&self, psi: &Wavefunction<T>) -> Result<Wavefunction<T>> {
        self.check_grid(psi)?;
        let mut out = psi.clone();
        multiply(out.amplitudes_mut(), &self.half_potential_phases);
        Ok(out)
    }

    /// Kinetic phases on a momentum-basis wavefunction.
    pub fn apply_kinetic(&self, psi_momentum: &Wavefunction<T>) -> Result<Wavefunction<T>> {
        self.check_grid(psi_momentum)?;
        let mut out = psi_momentum.clone();
        multiply(out.amplitudes_mut(), &self.kinetic_phases);
        Ok(out)
    }

    /// One full step on raw position-basis amplitudes.
    pub fn step_in_place(&self, amps: &mut [Complex<T>]) {
        multiply(amps, &self.half_potential_phases);
        self.fourier.forward(amps);
        multiply(amps, &self.kinetic_phases);
        self.fourier.inverse(amps);
        multiply(amps, &self.half_potential_phases);
    }

    pub fn trotter_step(&self, psi: &Wavefunction<T>) -> Result<Wavefunction<T>> {
        self.check_grid(psi)?;
        let mut out = psi.clone();
        self.step_in_place(out.amplitudes_mut());
        Ok(out)
    }

    /// Dense matrix of one step, column `s` = step applied to basis state `s`.
    pub fn step_matrix(&self) -> CMatrix<T> {
        let n = self.grid.len();
        let mut m = CMatrix::zeros(n, n);
        let mut column = vec![Complex::new(T::zero(), T::zero()); n];
        for s in 0..n {
            column.iter_mut().for_each(|a| *a = Complex::new(T::zero(), T::zero()));
            column[s] = Complex::new(T::one(), T::zero());
            self.step_in_place(&mut column);
            for (r, a) in column.iter().enumerate() {
                m[(r, s)] = *a;
            }
        }
        m
    }

    /// `m` steps with adjacent half-potential layers fused into one
    /// full-potential layer. Returns only the final state.
    pub fn propagate(&self, psi0: &Wavefunction<T>, steps: usize) -> Result<Wavefunction<T>> {
        self.check_grid(psi0)?;
        let mut out = psi0.clone();
        if steps == 0 {
            return Ok(out);
        }
        let full: Vec<_> = self.half_potential_phases.iter().map(|p| p * p).collect();
        let amps = out.amplitudes_mut();
        multiply(amps, &self.half_potential_phases);
        for m in 0..steps {
            self.fourier.forward(amps);
            multiply(amps, &self.kinetic_phases);
            self.fourier.inverse(amps);
            if m + 1 < steps {
                multiply(amps, &full);
            }
        }
        multiply(amps, &self.half_potential_phases);
        Ok(out)
    }

    /// Records `psi_0 .. psi_m`, each `psi_{i+1} = trotter_step(psi_i)`.
    pub fn evolve(&self, psi0: &Wavefunction<T>, steps: usize) -> Result<EvolutionRecord<T>> {
        self.check_grid(psi0)?;
        let mut record = EvolutionRecord::new(self.dt);
        record.push(0, psi0.clone());
        let mut psi = psi0.clone();
        for m in 1..=steps {
            self.step_in_place(psi.amplitudes_mut());
            record.push(m, psi.clone());
        }
        Ok(record)
    }
}

fn multiply<T: Real>(amps: &mut [Complex<T>], phases: &[Complex<T>]) {
    for (a, &p) in amps.iter_mut().zip(phases) {
        *a *= p;
    }
}

/// Free-function form of [`TrotterPlan::trotter_step`].
pub fn trotter_step<T: Real>(plan: &TrotterPlan<T>, psi: &Wavefunction<T>) -> Result<Wavefunction<T>> {
    plan.trotter_step(psi)
}

/// Free-function form of [`TrotterPlan::evolve`].
pub fn evolve<T: Real>(
    plan: &TrotterPlan<T>,
    psi0: &Wavefunction<T>,
    steps: usize,
) -> Result<EvolutionRecord<T>> {
    plan.evolve(psi0, steps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionStep<T> {
    pub step: usize,
    pub psi: Wavefunction<T>,
    pub probabilities: Vec<T>,
}

/// States and probabilities at `t = m dt` for `m = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord<T> {
    pub dt: T,
    pub label: String,
    pub steps: Vec<EvolutionStep<T>>,
}

impl<T: Real> EvolutionRecord<T> {
    pub fn new(dt: T) -> Self {
        Self {
            dt,
            label: String::new(),
            steps: Vec::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn push(&mut self, step: usize, psi: Wavefunction<T>) {
        let probabilities = psi.probabilities();
        self.steps.push(EvolutionStep { step, psi, probabilities });
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One probability column per recorded step.
    pub fn probability_table(&self) -> Vec<Vec<T>> {
        self.steps.iter().map(|s| s.probabilities.clone()).collect()
    }
}

/// `e^{-iH dt}` for `H = F^† diag(k^2/2) F + diag(V)` by eigendecomposition.
pub fn exact_propagator<T: Real + RealField>(
    vtable: &PotentialTable<T>,
    dt: T,
    convention: MomentumConvention,
) -> Result<CMatrix<T>> {
    let grid = vtable.grid();
    if grid.n_qubits() > MAX_ORACLE_QUBITS {
        return Err(Error::Parameter(format!(
            "exact propagator limited to {MAX_ORACLE_QUBITS} qubits, got {}",
            grid.n_qubits()
        )));
    }
    let hamiltonian = hamiltonian_matrix(vtable, convention)?;
    let zero = <T as num_traits::Zero>::zero();
    let eigen = hamiltonian
        .try_symmetric_eigen(T::lit(1e-15), 0)
        .ok_or(Error::Eigendecomposition)?;
    let n = grid.len();
    let vectors = &eigen.eigenvectors;
    let phases: Vec<Complex<T>> = eigen
        .eigenvalues
        .iter()
        .map(|&lambda| cis(zero - lambda * dt))
        .collect();
    let scaled = CMatrix::from_fn(n, n, |r, c| vectors[(r, c)] * phases[c]);
    let u = scaled * adjoint(vectors);
    let deviation = unitarity_deviation(&u);
    if !(deviation <= T::check_tol()) {
        return Err(Error::NotUnitary(deviation.as_f64()));
    }
    Ok(u)
}

/// Dense Hermitian `H` of the discretized problem, symmetrized explicitly.
pub fn hamiltonian_matrix<T: Real>(
    vtable: &PotentialTable<T>,
    convention: MomentumConvention,
) -> Result<CMatrix<T>> {
    let grid = vtable.grid();
    let n = grid.len();
    let f = centered_dft_matrix::<T>(n)?;
    let half = T::lit(0.5);
    let kinetic: Vec<T> = grid.momenta(convention).into_iter().map(|k| k * k * half).collect();
    let diag_f = CMatrix::from_fn(n, n, |l, j| f[(l, j)] * kinetic[l]);
    let mut h = adjoint(&f) * diag_f;
    for (j, &v) in vtable.values().iter().enumerate() {
        h[(j, j)] += Complex::new(v, T::zero());
    }
    let h_adj = adjoint(&h);
    Ok(CMatrix::from_fn(n, n, |r, c| (h[(r, c)] + h_adj[(r, c)]) * half))
}

/// Probabilities at `m = 0..=steps` under repeated application of `u`.
pub fn matrix_evolution<T: Real>(
    u: &CMatrix<T>,
    psi0: &Wavefunction<T>,
    steps: usize,
) -> Result<EvolutionRecord<T>> {
    let n = psi0.grid().len();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::LengthMismatch { expected: n, actual: u.nrows() });
    }
    let mut record = EvolutionRecord::new(T::zero());
    let mut psi = psi0.clone();
    record.push(0, psi.clone());
    for m in 1..=steps {
        let next: Vec<Complex<T>> = (0..n)
            .map(|r| {
                psi.amplitudes()
                    .iter()
                    .enumerate()
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (c, a)| acc + u[(r, c)] * a)
            })
            .collect();
        psi = Wavefunction::from_amplitudes(psi0.grid(), next)?;
        record.push(m, psi.clone());
    }
    Ok(record)
}

/// Oracle counterpart of [`TrotterPlan::evolve`].
pub fn exact_evolution<T: Real + RealField>(
    plan: &TrotterPlan<T>,
    psi0: &Wavefunction<T>,
    steps: usize,
) -> Result<EvolutionRecord<T>> {
    let u = exact_propagator(plan.potential(), plan.dt(), plan.convention())?;
    let mut record = matrix_evolution(&u, psi0, steps)?;
    record.dt = plan.dt();
    Ok(record)
}

/// `sqrt(mean_j (P_j - Q_j)^2)`; lies in `[0, 1]` for probability vectors.
pub fn rms_error<T: Real>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { expected: p.len(), actual: q.len() });
    }
    if p.is_empty() {
        return Ok(T::zero());
    }
    let sum = p
        .iter()
        .zip(q)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
    Ok((sum / T::from_index(p.len())).sqrt())
}

/// `max_{m,j} |P(j,m) - Q(j,m)|` over two equally shaped tables.
pub fn max_probability_error<T: Real>(p: &[Vec<T>], q: &[Vec<T>]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { expected: p.len(), actual: q.len() });
    }
    let mut worst = T::zero();
    for (a, b) in p.iter().zip(q) {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch { expected: a.len(), actual: b.len() });
        }
        for (&x, &y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

/// Scales every column (one per time step) to unit sum.
pub fn normalize_columns<T: Real>(table: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    table
        .iter()
        .enumerate()
        .map(|(column, values)| {
            let sum = values.iter().fold(T::zero(), |acc, &v| acc + v);
            if !(sum > T::zero()) || !sum.is_finite() {
                return Err(Error::NonPositiveColumn { column, sum: sum.as_f64() });
            }
            Ok(values.iter().map(|&v| v / sum).collect())
        })
        .collect()
}
