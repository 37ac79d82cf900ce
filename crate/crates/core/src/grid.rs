//! Centered position and momentum lattices, and the register wavefunction.
//!
//! Units have `hbar = mass = 1`. Site `j` of an `n`-qubit register sits at
//! `x_j = x0 + j dx` with `dx = L/(N-1)` and `x0 = -L/2`, so the two end
//! sites are exactly `-L/2` and `+L/2`. Momenta are `k_l = k0 + l dk` with
//! `dk = 2 pi / L` and `k0 = -(N-1) dk / 2`. Both grids are symmetric about
//! zero around the half-integer center `c = (N-1)/2`.

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

pub const MAX_QUBITS: usize = 24;

/// Which momentum spacing the kinetic phases use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentumConvention {
    /// `dk = 2 pi / L`.
    #[default]
    Box,
    /// `dk = 2 pi / (N dx)`, the spacing dual to the unitary centered DFT.
    Unitary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    n_qubits: usize,
    len: usize,
    length: T,
    dx: T,
    x0: T,
    dk: T,
    k0: T,
    center: T,
}

/// Builds the lattice for `n_qubits` in `1..=24` and a positive box length.
pub fn make_grid<T: Real>(n_qubits: usize, length: T) -> Result<GridSpec<T>> {
    GridSpec::new(n_qubits, length)
}

impl<T: Real> GridSpec<T> {
    pub fn new(n_qubits: usize, length: T) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Parameter(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::Parameter(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        let len = 1usize << n_qubits;
        let steps = T::from_index(len - 1);
        let two = T::lit(2.0);
        let dx = length / steps;
        let dk = two * T::PI() / length;
        Ok(Self {
            n_qubits,
            len,
            length,
            dx,
            x0: -length / two,
            dk,
            k0: -steps * dk / two,
            center: steps / two,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of sites `N = 2^n`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    pub fn dk(&self) -> T {
        self.dk
    }

    pub fn k0(&self) -> T {
        self.k0
    }

    pub fn center(&self) -> T {
        self.center
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.len })
        }
    }

    /// `x_j`. Evaluated as `(j - c) dx` so the grid is exactly antisymmetric.
    pub fn position_of(&self, j: usize) -> Result<T> {
        self.check_index(j)?;
        Ok((T::from_index(j) - self.center) * self.dx)
    }

    /// `k_l` under the default momentum spacing.
    pub fn momentum_of(&self, l: usize) -> Result<T> {
        self.momentum_with(l, MomentumConvention::Box)
    }

    pub fn momentum_with(&self, l: usize, convention: MomentumConvention) -> Result<T> {
        self.check_index(l)?;
        Ok((T::from_index(l) - self.center) * self.momentum_spacing(convention))
    }

    pub fn momentum_spacing(&self, convention: MomentumConvention) -> T {
        match convention {
            MomentumConvention::Box => self.dk,
            MomentumConvention::Unitary => T::lit(2.0) * T::PI() / (T::from_index(self.len) * self.dx),
        }
    }

    pub fn positions(&self) -> Vec<T> {
        (0..self.len)
            .map(|j| (T::from_index(j) - self.center) * self.dx)
            .collect()
    }

    pub fn momenta(&self, convention: MomentumConvention) -> Vec<T> {
        let spacing = self.momentum_spacing(convention);
        (0..self.len)
            .map(|l| (T::from_index(l) - self.center) * spacing)
            .collect()
    }
}

/// `N` complex amplitudes over the position (or momentum) basis of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction<T> {
    grid: GridSpec<T>,
    amplitudes: Vec<Complex<T>>,
}

/// Particle localized on site `j`.
pub fn delta_state<T: Real>(grid: &GridSpec<T>, j: usize) -> Result<Wavefunction<T>> {
    Wavefunction::delta(grid, j)
}

/// `P_j = |psi_j|^2`.
pub fn probabilities<T: Real>(psi: &Wavefunction<T>) -> Vec<T> {
    psi.probabilities()
}

impl<T: Real> Wavefunction<T> {
    pub fn from_amplitudes(grid: &GridSpec<T>, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: amplitudes.len(),
            });
        }
        Ok(Self { grid: *grid, amplitudes })
    }

    pub fn delta(grid: &GridSpec<T>, j: usize) -> Result<Self> {
        grid.check_index(j)?;
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        amplitudes[j] = Complex::new(T::one(), T::zero());
        Ok(Self { grid: *grid, amplitudes })
    }

    pub fn uniform(grid: &GridSpec<T>) -> Self {
        let a = T::one() / T::from_index(grid.len()).sqrt();
        Self {
            grid: *grid,
            amplitudes: vec![Complex::new(a, T::zero()); grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// Multiplies every amplitude by `e^{i phase}`.
    pub fn with_global_phase(&self, phase: T) -> Self {
        let factor = crate::scalar::cis(phase);
        Self {
            grid: self.grid,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// `<x>` treating the amplitudes as position-basis amplitudes.
    pub fn position_mean(&self) -> T {
        weighted_mean(&self.probabilities(), &self.grid.positions())
    }

    /// `<x^2> - <x>^2` in the position basis.
    pub fn position_variance(&self) -> T {
        let p = self.probabilities();
        let x = self.grid.positions();
        let mean = weighted_mean(&p, &x);
        let second = p
            .iter()
            .zip(&x)
            .fold(T::zero(), |acc, (&pj, &xj)| acc + pj * xj * xj);
        second - mean * mean
    }
}

fn weighted_mean<T: Real>(weights: &[T], values: &[T]) -> T {
    weights
        .iter()
        .zip(values)
        .fold(T::zero(), |acc, (&w, &v)| acc + w * v)
}
