//! Fourier multipliers on periodic fields.
//!
//! A multiplier with symbol `m(k)` maps `c_k ↦ m(k) c_k`. For the output to
//! stay real the symbol must satisfy `m(-k) = conj(m(k))`; at the Nyquist
//! slot, which stands for both `±n/2`, only `Re m(k_nyq)` is applied.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::real::Real;

/// Applies `symbol` to every mode of `f`, checking conjugate symmetry.
pub fn multiplier<T: Real>(f: &ScalarField<T>, symbol: impl Fn(T) -> Complex<T>) -> Result<ScalarField<T>> {
    let grid = f.grid();
    let ks = grid.wavenumbers();
    let n = ks.len();
    let m: Vec<Complex<T>> = ks.iter().map(|&k| symbol(k)).collect();
    let scale = m.iter().fold(T::zero(), |a, c| a.max(c.norm()));
    let tol = T::lit(1e-12) * (T::one() + scale);
    if m[0].im.abs() > tol {
        return Err(Error::NonHermitianSymbol { index: 0 });
    }
    for j in 1..n / 2 {
        if (m[n - j] - m[j].conj()).norm() > tol {
            return Err(Error::NonHermitianSymbol { index: j });
        }
    }
    if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidArgument("symbol is not finite".into()));
    }
    Ok(apply_symbol(f, |j, _| m[j]))
}

/// Applies a symbol known to be conjugate-symmetric. `symbol` receives the
/// FFT slot and its wavenumber.
pub(crate) fn apply_symbol<T: Real>(f: &ScalarField<T>, symbol: impl Fn(usize, T) -> Complex<T>) -> ScalarField<T> {
    let grid = f.grid();
    let ks = grid.wavenumbers();
    let nyq = grid.nyquist();
    let coeffs = f
        .spectral()
        .iter()
        .zip(ks)
        .enumerate()
        .map(|(j, (&c, &k))| {
            let s = symbol(j, k);
            if j == nyq {
                c * s.re
            } else {
                c * s
            }
        })
        .collect();
    ScalarField::from_spectrum_unchecked(grid, coeffs)
}

/// Real-valued even symbol, e.g. `|k|^s`.
pub(crate) fn apply_real_symbol<T: Real>(f: &ScalarField<T>, symbol: impl Fn(T) -> T) -> ScalarField<T> {
    apply_symbol(f, |_, k| Complex::new(symbol(k), T::zero()))
}

/// `∂_x f` (symbol `ik`).
pub fn derivative<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    apply_symbol(f, |_, k| Complex::new(T::zero(), k))
}

/// `∂_x^order f`.
pub fn derivative_n<T: Real>(f: &ScalarField<T>, order: u32) -> ScalarField<T> {
    apply_symbol(f, |_, k| Complex::new(T::zero(), k).powu(order))
}

/// Hilbert transform, symbol `-i sgn(k)`; annihilates the mean.
pub fn hilbert<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    apply_symbol(f, |_, k| Complex::new(T::zero(), -sign(k)))
}

/// `Λ^s f` with `Λ = (-Δ)^{1/2}`, symbol `|k|^s`. The mean is removed for
/// every `s`, including `s = 0`.
pub fn frac_laplacian<T: Real>(f: &ScalarField<T>, s: T) -> ScalarField<T> {
    apply_real_symbol(f, |k| if k == T::zero() { T::zero() } else { k.abs().powf(s) })
}

/// `τ_α f(x) = f(x - α)`, exact for band-limited fields.
pub fn shift<T: Real>(f: &ScalarField<T>, alpha: T) -> ScalarField<T> {
    let length = f.grid().length();
    let reduced = reduce_shift(alpha, length);
    if reduced == T::zero() {
        return f.clone();
    }
    apply_symbol(f, |_, k| phase(k, reduced))
}

/// `α` reduced to `[-L/2, L/2]`, odd in `α`.
pub(crate) fn reduce_shift<T: Real>(alpha: T, length: T) -> T {
    alpha - length * (alpha / length).round()
}

/// `e^{-ikα}`.
#[inline]
pub(crate) fn phase<T: Real>(k: T, alpha: T) -> Complex<T> {
    let (s, c) = (k * alpha).sin_cos();
    Complex::new(c, -s)
}

#[inline]
pub(crate) fn sign<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Evaluates a pointwise nonlinear expression of several fields with 3/2
/// zero-padding; modes `|m| ≥ n/2` of the result are discarded.
pub fn dealiased<T: Real>(fields: &[&ScalarField<T>], f: impl Fn(&[T]) -> T) -> ScalarField<T> {
    assert!(!fields.is_empty());
    let grid = fields[0].grid();
    for other in &fields[1..] {
        assert!(other.same_grid(fields[0]), "fields live on different grids");
    }
    let padded: Vec<Vec<T>> = fields.iter().map(|g| grid.padded_values(g.spectral())).collect();
    let m = grid.padded_len();
    let mut args = vec![T::zero(); fields.len()];
    let values: Vec<T> = (0..m)
        .map(|i| {
            for (a, p) in args.iter_mut().zip(&padded) {
                *a = p[i];
            }
            f(&args)
        })
        .collect();
    ScalarField::from_spectrum_unchecked(grid, grid.truncate_padded(&values))
}

/// Dealiased product `a · b`.
pub fn product<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>) -> ScalarField<T> {
    dealiased(&[a, b], |v| v[0] * v[1])
}

/// `√(L Σ_k |c_k|²)`, the spectral L² norm.
pub fn spectral_l2<T: Real>(f: &ScalarField<T>) -> T {
    let sum: T = f.spectral().iter().map(|c| c.norm_sqr()).sum();
    (sum * f.grid().length()).sqrt()
}
