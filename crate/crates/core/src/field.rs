use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::real::Real;

/// Real samples of a periodic function together with a lazily computed
/// spectrum.
///
/// Fields are immutable: every operation returns a new field, so the cached
/// spectrum can never go stale. The cache fill is idempotent and safe to race.
#[derive(Clone)]
pub struct ScalarField<T: Real> {
    grid: PeriodicGrid<T>,
    values: Vec<T>,
    spectral: OnceLock<Vec<Complex<T>>>,
}

impl<T: Real> ScalarField<T> {
    pub fn from_values(grid: &PeriodicGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch { expected: grid.n_points(), got: values.len() });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { node, x: grid.node(node).to_f64_lossy() });
        }
        Ok(Self::from_values_unchecked(grid, values))
    }

    /// Skips the finiteness check. Used on results of internal arithmetic;
    /// callers that need the invariant use [`Self::is_finite`].
    pub(crate) fn from_values_unchecked(grid: &PeriodicGrid<T>, values: Vec<T>) -> Self {
        Self { grid: grid.clone(), values, spectral: OnceLock::new() }
    }

    /// Builds a field from FFT-ordered coefficients. The imaginary part of
    /// the reconstruction is discarded, so the caller is responsible for
    /// conjugate symmetry.
    pub(crate) fn from_spectrum_unchecked(grid: &PeriodicGrid<T>, coeffs: Vec<Complex<T>>) -> Self {
        let values = grid.inverse(&coeffs);
        let spectral = OnceLock::new();
        let _ = spectral.set(coeffs);
        Self { grid: grid.clone(), values, spectral }
    }

    /// Builds a field from FFT-ordered coefficients, rejecting spectra that do
    /// not describe a real function.
    pub fn from_spectrum(grid: &PeriodicGrid<T>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        let n = grid.n_points();
        if coeffs.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: coeffs.len() });
        }
        let scale = coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()));
        let tol = T::lit(1e-12) * (T::one() + scale);
        if coeffs[0].im.abs() > tol {
            return Err(Error::NonHermitianSymbol { index: 0 });
        }
        if coeffs[n / 2].im.abs() > tol {
            return Err(Error::NonHermitianSymbol { index: n / 2 });
        }
        for j in 1..n / 2 {
            if (coeffs[n - j] - coeffs[j].conj()).norm() > tol {
                return Err(Error::NonHermitianSymbol { index: j });
            }
        }
        let f = Self::from_spectrum_unchecked(grid, coeffs);
        if let Some(node) = f.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { node, x: grid.node(node).to_f64_lossy() });
        }
        Ok(f)
    }

    pub fn zeros(grid: &PeriodicGrid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: &PeriodicGrid<T>, c: T) -> Self {
        Self::from_values_unchecked(grid, vec![c; grid.n_points()])
    }

    /// `values[j] = func(j h)`.
    pub fn sample(grid: &PeriodicGrid<T>, func: impl Fn(T) -> T) -> Result<Self> {
        let values = (0..grid.n_points()).map(|j| func(grid.node(j))).collect();
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn spectral(&self) -> &[Complex<T>] {
        self.spectral.get_or_init(|| self.grid.forward(&self.values))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_count(self.len())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Trapezoidal (equivalently, exact for trigonometric polynomials) integral.
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.grid.spacing()
    }

    /// `∫ self · other dx`.
    pub fn inner(&self, other: &Self) -> T {
        assert_same_grid(self, other);
        self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).sum::<T>() * self.grid.spacing()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Pointwise map on the grid samples (no dealiasing).
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_values_unchecked(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields (no dealiasing).
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_same_grid(self, other);
        Self::from_values_unchecked(&self.grid, self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    /// Maximum pointwise difference.
    pub fn sup_distance(&self, other: &Self) -> T {
        assert_same_grid(self, other);
        self.values.iter().zip(&other.values).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Reflection `x ↦ f(-x)`, exact on the grid.
    pub fn reflect(&self) -> Self {
        let n = self.len();
        let values = (0..n).map(|j| self.values[(n - j) % n]).collect();
        Self::from_values_unchecked(&self.grid, values)
    }
}

fn assert_same_grid<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>) {
    assert!(a.same_grid(b), "fields live on different grids");
}

impl<T: Real> std::fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField").field("grid", &self.grid).field("max_abs", &self.max_abs()).finish()
    }
}

impl<'a, T: Real> Add<&'a ScalarField<T>> for &'a ScalarField<T> {
    type Output = ScalarField<T>;
    fn add(self, rhs: &'a ScalarField<T>) -> ScalarField<T> {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<'a, T: Real> Sub<&'a ScalarField<T>> for &'a ScalarField<T> {
    type Output = ScalarField<T>;
    fn sub(self, rhs: &'a ScalarField<T>) -> ScalarField<T> {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<T: Real> Mul<T> for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn mul(self, rhs: T) -> ScalarField<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Neg for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn neg(self) -> ScalarField<T> {
        self.map(|v| -v)
    }
}
