//! Finite-difference operators in α and their closed-form α-derivatives.
//!
//! With `τ_α f(x) = f(x - α)`:
//!
//! | kind | definition |
//! |------|------------|
//! | `Delta` | `δ_α f = f - τ_α f` |
//! | `BarDelta` | `δ̄_α f = f - τ_{-α} f` |
//! | `Slope` | `Δ_α f = δ_α f / α` |
//! | `BarSlope` | `Δ̄_α f = δ̄_α f / α` |
//! | `SSecond` | `s_α f = 2f - τ_α f - τ_{-α} f` |
//! | `DCentered` | `d_α f = τ_{-α} f - τ_α f` |
//! | `SSym` | `S_α f = Δ_α f + Δ̄_α f = s_α f / α` |
//! | `DSym` | `D_α f = Δ_α f - Δ̄_α f = d_α f / α` |
//!
//! All of them are Fourier multipliers, so they are applied as symbols. The
//! symbols of `s_α` and `d_α` are exactly even and odd in α, which makes
//! `s_{-α} = s_α` and `d_{-α} = -d_α` hold bit for bit.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::quadrature::QuadratureSpec;
use crate::real::Real;
use crate::spectral::{apply_symbol, dealiased, derivative, hilbert, reduce_shift};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiffOpKind {
    Delta,
    BarDelta,
    Slope,
    BarSlope,
    SSecond,
    DCentered,
    SSym,
    DSym,
}

impl DiffOpKind {
    pub const ALL: [DiffOpKind; 8] = [
        DiffOpKind::Delta,
        DiffOpKind::BarDelta,
        DiffOpKind::Slope,
        DiffOpKind::BarSlope,
        DiffOpKind::SSecond,
        DiffOpKind::DCentered,
        DiffOpKind::SSym,
        DiffOpKind::DSym,
    ];

    /// Whether the operator divides by α.
    pub fn is_normalized(self) -> bool {
        matches!(self, DiffOpKind::Slope | DiffOpKind::BarSlope | DiffOpKind::SSym | DiffOpKind::DSym)
    }

    /// Symbol at wavenumber `k` for the reduced shift `r` (unnormalized).
    fn raw_symbol<T: Real>(self, k: T, r: T) -> Complex<T> {
        let (s, c) = (k * r).sin_cos();
        let one = T::one();
        let two = T::lit(2.0);
        match self {
            // 1 - e^{-ikα}
            DiffOpKind::Delta | DiffOpKind::Slope => Complex::new(one - c, s),
            // 1 - e^{ikα}
            DiffOpKind::BarDelta | DiffOpKind::BarSlope => Complex::new(one - c, -s),
            DiffOpKind::SSecond | DiffOpKind::SSym => Complex::new(two - two * c, T::zero()),
            // e^{ikα} - e^{-ikα}
            DiffOpKind::DCentered | DiffOpKind::DSym => Complex::new(T::zero(), two * s),
        }
    }
}

/// Applies `kind` at shift `alpha`.
pub fn apply<T: Real>(kind: DiffOpKind, f: &ScalarField<T>, alpha: T) -> Result<ScalarField<T>> {
    if kind.is_normalized() && alpha == T::zero() {
        return Err(Error::ZeroShift);
    }
    let r = reduce_shift(alpha, f.grid().length());
    let scale = if kind.is_normalized() { T::one() / alpha } else { T::one() };
    Ok(apply_symbol(f, |_, k| kind.raw_symbol(k, r) * scale))
}

fn nonzero<T: Real>(alpha: T) -> Result<()> {
    if alpha == T::zero() {
        Err(Error::ZeroShift)
    } else {
        Ok(())
    }
}

/// Symbol of `g ↦ ∫₀^α s_η g dη`, i.e. `Σ_i w_i (2 - 2cos(k η_i))` over the
/// rule's inner Gauss–Legendre nodes, indexed by FFT slot.
pub(crate) fn inner_symbol<T: Real>(f: &ScalarField<T>, alpha: T, rule: &QuadratureSpec<T>) -> Vec<T> {
    let grid = f.grid();
    let n = grid.n_points();
    let half = n / 2;
    let k1 = grid.wavenumbers()[1];
    let (nodes, weights) = rule.inner_nodes(alpha);
    let mut acc = vec![T::zero(); half + 1];
    let wsum: T = weights.iter().copied().sum();
    for (&eta, &w) in nodes.iter().zip(&weights) {
        // cos(m k1 η) by repeated rotation; error grows like m·ε.
        let (s1, c1) = (k1 * eta).sin_cos();
        let step = Complex::new(c1, s1);
        let mut z = Complex::new(T::one(), T::zero());
        for a in acc.iter_mut().skip(1) {
            z *= step;
            *a += w * z.re;
        }
    }
    let two = T::lit(2.0);
    (0..n)
        .map(|j| {
            let m = grid.mode(j).unsigned_abs() as usize;
            if m == 0 {
                T::zero()
            } else {
                two * (wsum - acc[m])
            }
        })
        .collect()
}

/// `∫₀^α s_κ g dκ`.
pub fn kappa_integral<T: Real>(g: &ScalarField<T>, alpha: T, rule: &QuadratureSpec<T>) -> ScalarField<T> {
    let sym = inner_symbol(g, alpha, rule);
    apply_symbol(g, |j, _| Complex::new(sym[j], T::zero()))
}

/// `(1/α) ∫₀^α s_η g dη`.
pub fn eta_integral<T: Real>(g: &ScalarField<T>, alpha: T, rule: &QuadratureSpec<T>) -> Result<ScalarField<T>> {
    nonzero(alpha)?;
    let sym = inner_symbol(g, alpha, rule);
    let inv = T::one() / alpha;
    Ok(apply_symbol(g, |j, _| Complex::new(sym[j] * inv, T::zero())))
}

/// `∂_α S_α f = Δ̄_α f_x − Δ_α f_x − s_α f / α²`.
pub fn ds_dalpha_closed<T: Real>(f: &ScalarField<T>, alpha: T) -> Result<ScalarField<T>> {
    nonzero(alpha)?;
    let fx = derivative(f);
    let bar = apply(DiffOpKind::BarSlope, &fx, alpha)?;
    let slope = apply(DiffOpKind::Slope, &fx, alpha)?;
    let s = apply(DiffOpKind::SSecond, f, alpha)?;
    let a2 = alpha * alpha;
    Ok(ScalarField::from_values_unchecked(
        f.grid(),
        (0..f.len()).map(|i| bar.values()[i] - slope.values()[i] - s.values()[i] / a2).collect(),
    ))
}

/// `∂²_α S_α f = s_α f_xx/α − (∫₀^α s_κ f_xx dκ)/α² + d_α f_x/α² + 2 s_α f/α³`.
pub fn d2s_dalpha_closed<T: Real>(f: &ScalarField<T>, alpha: T, rule: &QuadratureSpec<T>) -> Result<ScalarField<T>> {
    nonzero(alpha)?;
    let fx = derivative(f);
    let fxx = derivative(&fx);
    let a = alpha;
    let t1 = apply(DiffOpKind::SSecond, &fxx, a)?;
    let t2 = kappa_integral(&fxx, a, rule);
    let t3 = apply(DiffOpKind::DCentered, &fx, a)?;
    let t4 = apply(DiffOpKind::SSecond, f, a)?;
    let two = T::lit(2.0);
    Ok(combine(
        f,
        &[(&t1, T::one() / a), (&t2, -T::one() / (a * a)), (&t3, T::one() / (a * a)), (&t4, two / (a * a * a))],
    ))
}

/// `∂_α D_α f = −s_α f_x/α + (∫₀^α s_κ f_x dκ)/α²`.
pub fn dd_dalpha_closed<T: Real>(f: &ScalarField<T>, alpha: T, rule: &QuadratureSpec<T>) -> Result<ScalarField<T>> {
    nonzero(alpha)?;
    let fx = derivative(f);
    let a = alpha;
    let t1 = apply(DiffOpKind::SSecond, &fx, a)?;
    let t2 = kappa_integral(&fx, a, rule);
    Ok(combine(f, &[(&t1, -T::one() / a), (&t2, T::one() / (a * a))]))
}

/// `∂²_α D_α f = d_α f_xx/α + 2 s_α f_x/α² − (2/α³) ∫₀^α s_η f_x dη`.
pub fn d2d_dalpha_closed<T: Real>(f: &ScalarField<T>, alpha: T, rule: &QuadratureSpec<T>) -> Result<ScalarField<T>> {
    nonzero(alpha)?;
    let fx = derivative(f);
    let fxx = derivative(&fx);
    let a = alpha;
    let two = T::lit(2.0);
    let t1 = apply(DiffOpKind::DCentered, &fxx, a)?;
    let t2 = apply(DiffOpKind::SSecond, &fx, a)?;
    let t3 = kappa_integral(&fx, a, rule);
    Ok(combine(f, &[(&t1, T::one() / a), (&t2, two / (a * a)), (&t3, -two / (a * a * a))]))
}

fn combine<T: Real>(like: &ScalarField<T>, terms: &[(&ScalarField<T>, T)]) -> ScalarField<T> {
    let mut out = vec![T::zero(); like.len()];
    for (field, c) in terms {
        for (o, &v) in out.iter_mut().zip(field.values()) {
            *o += *c * v;
        }
    }
    ScalarField::from_values_unchecked(like.grid(), out)
}

/// `H(g·h) − g·H(h)` with dealiased products.
pub fn hilbert_commutator<T: Real>(g: &ScalarField<T>, h: &ScalarField<T>) -> Result<ScalarField<T>> {
    g.check_same_grid(h)?;
    let gh = dealiased(&[g, h], |v| v[0] * v[1]);
    let hh = hilbert(h);
    let g_hh = dealiased(&[g, &hh], |v| v[0] * v[1]);
    Ok(&hilbert(&gh) - &g_hh)
}
