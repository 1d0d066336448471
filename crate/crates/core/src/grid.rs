use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::real::Real;

pub const MIN_POINTS: usize = 16;

/// Uniform grid on the torus `[0, L)`.
///
/// Spectral coefficients use the amplitude normalization
/// `f(x_j) = Σ_k c_k e^{i k x_j}` with `c_k = (1/n) Σ_j f(x_j) e^{-i k x_j}`,
/// stored in FFT order: index `j ≤ n/2` carries wavenumber index `j`, the
/// rest carry `j - n`. The Nyquist index `n/2` is taken as `+n/2`.
///
/// Cloning is cheap; FFT plans are shared.
#[derive(Clone)]
pub struct PeriodicGrid<T: Real> {
    inner: Arc<GridInner<T>>,
}

struct GridInner<T: Real> {
    n: usize,
    length: T,
    wavenumbers: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    padded_n: usize,
    padded_forward: Arc<dyn Fft<T>>,
    padded_inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> PeriodicGrid<T> {
    pub fn new(n_points: usize, length: T) -> Result<Self> {
        if !n_points.is_multiple_of(2) {
            return Err(Error::OddPoints(n_points));
        }
        if n_points < MIN_POINTS {
            return Err(Error::TooFewPoints(n_points));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::BadLength(length.to_f64_lossy()));
        }
        let mut planner = FftPlanner::new();
        let padded_n = 3 * n_points / 2;
        let base = T::lit(2.0) * T::PI() / length;
        let wavenumbers = (0..n_points).map(|j| base * T::lit(mode_index(j, n_points) as f64)).collect();
        Ok(Self {
            inner: Arc::new(GridInner {
                n: n_points,
                length,
                wavenumbers,
                forward: planner.plan_fft_forward(n_points),
                inverse: planner.plan_fft_inverse(n_points),
                padded_n,
                padded_forward: planner.plan_fft_forward(padded_n),
                padded_inverse: planner.plan_fft_inverse(padded_n),
            }),
        })
    }

    pub fn n_points(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> T {
        self.inner.length
    }

    pub fn spacing(&self) -> T {
        self.inner.length / T::from_count(self.inner.n)
    }

    pub fn node(&self, j: usize) -> T {
        T::from_count(j) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.inner.n).map(|j| self.node(j)).collect()
    }

    /// Wavenumbers `k_j = 2π m_j / L` in FFT order.
    pub fn wavenumbers(&self) -> &[T] {
        &self.inner.wavenumbers
    }

    /// Signed integer mode index of FFT slot `j`.
    pub fn mode(&self, j: usize) -> i64 {
        mode_index(j, self.inner.n)
    }

    /// FFT slot holding integer mode `m`, if it is representable.
    pub fn slot(&self, m: i64) -> Option<usize> {
        let n = self.inner.n as i64;
        if m > n / 2 || m <= -n / 2 {
            return None;
        }
        Some(if m >= 0 { m as usize } else { (m + n) as usize })
    }

    pub fn nyquist(&self) -> usize {
        self.inner.n / 2
    }

    /// Largest resolved wavenumber `π n / L`.
    pub fn k_max(&self) -> T {
        self.inner.wavenumbers[self.inner.n / 2]
    }

    pub fn padded_len(&self) -> usize {
        self.inner.padded_n
    }

    pub fn scratch_len(&self) -> usize {
        self.inner.forward.get_inplace_scratch_len().max(self.inner.inverse.get_inplace_scratch_len())
    }

    pub fn forward(&self, values: &[T]) -> Vec<Complex<T>> {
        debug_assert_eq!(values.len(), self.inner.n);
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.inner.forward.process(&mut buf);
        let scale = T::one() / T::from_count(self.inner.n);
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Real part of the inverse transform.
    pub fn inverse(&self, coeffs: &[Complex<T>]) -> Vec<T> {
        debug_assert_eq!(coeffs.len(), self.inner.n);
        let mut buf = coeffs.to_vec();
        self.inner.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Unnormalized in-place inverse (matches [`Self::forward`]'s scaling).
    pub fn inverse_in_place(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.inner.inverse.process_with_scratch(buf, scratch);
    }

    pub(crate) fn padded_scratch_len(&self) -> usize {
        self.inner.padded_inverse.get_inplace_scratch_len()
    }

    /// Unnormalized in-place inverse transform on the 3/2-refined grid.
    pub(crate) fn padded_inverse_in_place(&self, buf: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.inner.padded_inverse.process_with_scratch(buf, scratch);
    }

    /// Band-limited interpolation of `coeffs` onto the 3/2-refined grid.
    ///
    /// The Nyquist coefficient is split evenly between `±n/2`.
    pub(crate) fn padded_values(&self, coeffs: &[Complex<T>]) -> Vec<T> {
        let n = self.inner.n;
        let m = self.inner.padded_n;
        let half = n / 2;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
        buf[..half].copy_from_slice(&coeffs[..half]);
        for j in half + 1..n {
            buf[m - (n - j)] = coeffs[j];
        }
        let nyq = coeffs[half] * T::lit(0.5);
        buf[half] = nyq;
        buf[m - half] = nyq;
        self.inner.padded_inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Forward transform on the refined grid, truncated back to `|m| < n/2`.
    pub(crate) fn truncate_padded(&self, values: &[T]) -> Vec<Complex<T>> {
        let n = self.inner.n;
        let m = self.inner.padded_n;
        let half = n / 2;
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.inner.padded_forward.process(&mut buf);
        let scale = T::one() / T::from_count(m);
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for j in 0..half {
            out[j] = buf[j] * scale;
        }
        for j in half + 1..n {
            out[j] = buf[m - (n - j)] * scale;
        }
        out
    }
}

fn mode_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

impl<T: Real> PartialEq for PeriodicGrid<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.length == other.inner.length)
    }
}

impl<T: Real> fmt::Debug for PeriodicGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("n_points", &self.inner.n).field("length", &self.inner.length).finish()
    }
}
