//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::DMatrix;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub type Complex<T> = num_complex::Complex<T>;

/// Dense complex matrix, row index = output basis state.
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Floating-point scalar the simulator can run on (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Tolerance used for unitarity and normalization checks at this precision.
    fn check_tol() -> Self;

    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count or index.
    #[inline]
    fn from_index(i: usize) -> Self {
        Self::from_usize(i).expect("index representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn check_tol() -> Self {
        1e-4
    }
}

impl Real for f64 {
    fn check_tol() -> Self {
        1e-10
    }
}

/// `e^{i phase}`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

pub fn identity<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// Conjugate transpose.
pub fn adjoint<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    CMatrix::from_fn(m.ncols(), m.nrows(), |r, c| m[(c, r)].conj())
}

/// Largest entrywise modulus of `a - b`. Returns +inf on shape mismatch.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    if a.shape() != b.shape() {
        return T::infinity();
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(T::zero(), T::max)
}

/// `max |U^† U - 1|` entrywise.
pub fn unitarity_deviation<T: Real>(m: &CMatrix<T>) -> T {
    if m.nrows() != m.ncols() {
        return T::infinity();
    }
    let product = adjoint(m) * m;
    max_abs_diff(&product, &identity(m.nrows()))
}

/// Returns `true` when `m` equals `e^{i phi} target` for some global phase,
/// within `tol`. The phase is estimated from the largest entry of `target`.
pub fn equal_up_to_phase<T: Real>(m: &CMatrix<T>, target: &CMatrix<T>, tol: T) -> bool {
    if m.shape() != target.shape() {
        return false;
    }
    let pivot = target
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i);
    let Some(pivot) = pivot else {
        return true;
    };
    let t = target.as_slice()[pivot];
    let x = m.as_slice()[pivot];
    if t.norm() == T::zero() || x.norm() == T::zero() {
        return max_abs_diff(m, target) <= tol;
    }
    let phase = (x / t) / (x / t).norm();
    let rotated = target.map(|v| v * phase);
    max_abs_diff(m, &rotated) <= tol
}

/// `n` with `2^n == len`, or `None` when `len` is not a power of two.
pub fn log2_exact(len: usize) -> Option<usize> {
    (len.is_power_of_two()).then(|| len.trailing_zeros() as usize)
}
