//! Right-hand sides of the Muskat equation with surface tension.
//!
//! Three forms are provided:
//!
//! - [`rhs_cp0`], the curvature form
//!   `(m/2π) p.v.∫ (y + f_x δ_y f)/(y² + (δ_y f)²) ∂_x τ_y(σκ(f) − gρ f) dy`,
//! - [`rhs_cp1`], the slope form
//!   `(σ/π) p.v.∫ (1 + f_x Δ_α f)/(1 + (Δ_α f)²) τ_α ∂_xκ(f) dα/α
//!    + (gρ/π) p.v.∫ ∂_x arctan(Δ_α f) dα`,
//! - [`rhs_nf`], the decomposition of the surface-tension part into a
//!   commutator, an elliptic term, an `H f_xx` term and four remainders,
//!
//! with `κ(f) = f_xx (1 + f_x²)^{-3/2}`.
//!
//! All α-integrands are formed on the 3/2-refined grid and the accumulated
//! integral is truncated back once, which dealiases every node at the cost of
//! a single projection. The part of `τ_α g / α` beyond `alpha_max` is added
//! back exactly as a Fourier multiplier (see [`far_field_symbol`]).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::difference::inner_symbol;
use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::grid::PeriodicGrid;
use crate::laplace::LaplaceMoments;
use crate::quadrature::{far_field_symbol, QuadratureSpec};
use crate::real::Real;
use crate::spectral::{apply_symbol, dealiased, derivative, frac_laplacian, hilbert, phase, reduce_shift};

/// Surface tension, gravity times density jump, and the mobility `k/μ` of
/// the curvature form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<T: Real> {
    pub sigma: T,
    /// Positive for the stable stratification (heavier fluid below). A
    /// negative value models the unstable one, where modes with
    /// `σk² < |gρ|` grow.
    pub g_rho: T,
    /// Prefactor of the curvature form is `mobility / 2π`; the default 2
    /// matches the `1/π` normalization of the slope form.
    pub mobility: T,
}

pub const DEFAULT_MOBILITY: f64 = 2.0;

impl<T: Real> PhysicalParams<T> {
    pub fn new(sigma: T, g_rho: T) -> Result<Self> {
        let p = Self { sigma, g_rho, mobility: T::lit(DEFAULT_MOBILITY) };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma", self.sigma), ("mobility", self.mobility)] {
            if !v.is_finite() || v < T::zero() {
                return invalid(format!("{name} must be finite and non-negative"));
            }
        }
        if !self.g_rho.is_finite() {
            return invalid("g_rho must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    Cp0,
    #[default]
    Cp1,
    Nf,
}

impl FromStr for Formulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cp0" => Ok(Formulation::Cp0),
            "cp1" => Ok(Formulation::Cp1),
            "nf" => Ok(Formulation::Nf),
            _ => invalid(format!("unknown formulation {s:?} (expected cp0, cp1 or nf)")),
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Cp0 => "cp0",
            Formulation::Cp1 => "cp1",
            Formulation::Nf => "nf",
        })
    }
}

/// The seven surface-tension contributions of the oscillatory-integral form.
#[derive(Debug, Clone)]
pub struct TermBreakdown<T: Real> {
    pub commutator: ScalarField<T>,
    pub elliptic: ScalarField<T>,
    pub hfxx: ScalarField<T>,
    pub rem_eta_minus: ScalarField<T>,
    pub rem_eta_plus: ScalarField<T>,
    pub rem_s_minus: ScalarField<T>,
    pub rem_s_plus: ScalarField<T>,
    pub total: ScalarField<T>,
}

impl<T: Real> TermBreakdown<T> {
    pub const NAMES: [&'static str; 7] =
        ["commutator", "elliptic", "hfxx", "rem_eta_minus", "rem_eta_plus", "rem_S_minus", "rem_S_plus"];

    pub fn terms(&self) -> [(&'static str, &ScalarField<T>); 7] {
        [
            (Self::NAMES[0], &self.commutator),
            (Self::NAMES[1], &self.elliptic),
            (Self::NAMES[2], &self.hfxx),
            (Self::NAMES[3], &self.rem_eta_minus),
            (Self::NAMES[4], &self.rem_eta_plus),
            (Self::NAMES[5], &self.rem_s_minus),
            (Self::NAMES[6], &self.rem_s_plus),
        ]
    }

    fn from_terms(terms: [ScalarField<T>; 7]) -> Self {
        let n = terms[0].len();
        let mut total = vec![T::zero(); n];
        for t in &terms {
            for (o, &v) in total.iter_mut().zip(t.values()) {
                *o += v;
            }
        }
        let total = ScalarField::from_values_unchecked(terms[0].grid(), total);
        let [commutator, elliptic, hfxx, rem_eta_minus, rem_eta_plus, rem_s_minus, rem_s_plus] = terms;
        Self { commutator, elliptic, hfxx, rem_eta_minus, rem_eta_plus, rem_s_minus, rem_s_plus, total }
    }
}

/// `f_xx / (1 + f_x²)^{3/2}`, dealiased.
pub fn curvature<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    let fx = derivative(f);
    let fxx = derivative(&fx);
    let p = T::lit(-1.5);
    dealiased(&[&fx, &fxx], |v| v[1] * (T::one() + v[0] * v[0]).powf(p))
}

/// Dispatches on the formulation. The oscillatory form covers surface
/// tension only; its gravity part is taken from the slope form.
pub fn rhs<T: Real>(
    f: &ScalarField<T>,
    params: &PhysicalParams<T>,
    rule: &QuadratureSpec<T>,
    formulation: Formulation,
) -> Result<ScalarField<T>> {
    match formulation {
        Formulation::Cp0 => rhs_cp0(f, params, rule),
        Formulation::Cp1 => rhs_cp1(f, params, rule),
        Formulation::Nf => {
            let gravity = PhysicalParams { sigma: T::zero(), ..*params };
            let mut out = rhs_cp1(f, &gravity, rule)?;
            if params.sigma > T::zero() {
                out = &out + &rhs_nf(f, params.sigma, rule)?.total;
            }
            Ok(out)
        }
    }
}

/// Curvature form.
pub fn rhs_cp0<T: Real>(
    f: &ScalarField<T>,
    params: &PhysicalParams<T>,
    rule: &QuadratureSpec<T>,
) -> Result<ScalarField<T>> {
    params.validate()?;
    let grid = f.grid();
    if params.sigma == T::zero() && params.g_rho == T::zero() {
        return Ok(ScalarField::zeros(grid));
    }
    let fx = derivative(f);
    // Q = ∂_x(σκ − gρ f)
    let q = &derivative(&curvature(f)).scale(params.sigma) - &fx.scale(params.g_rho);
    let pre = params.mobility / (T::lit(2.0) * T::PI());
    let integral = slope_kernel_integral(f, &fx, &q, rule)?;
    let tail = far_field(&q, rule.alpha_max);
    Ok(&integral.scale(pre) + &tail.scale(pre))
}

/// Slope form.
pub fn rhs_cp1<T: Real>(
    f: &ScalarField<T>,
    params: &PhysicalParams<T>,
    rule: &QuadratureSpec<T>,
) -> Result<ScalarField<T>> {
    params.validate()?;
    let grid = f.grid();
    let fx = derivative(f);
    let inv_pi = T::one() / T::PI();
    let mut out = ScalarField::zeros(grid);
    if params.sigma > T::zero() {
        let g = derivative(&curvature(f));
        let integral = slope_kernel_integral(f, &fx, &g, rule)?;
        let tail = far_field(&g, rule.alpha_max);
        out = &out + &(&integral + &tail).scale(params.sigma * inv_pi);
    }
    if params.g_rho != T::zero() {
        let integral = gravity_integral(f, &fx, rule)?;
        let tail = far_field(&fx, rule.alpha_max).scale(-T::one());
        out = &out + &(&integral + &tail).scale(params.g_rho * inv_pi);
    }
    Ok(out)
}

/// Oscillatory-integral form of the surface-tension part.
pub fn rhs_nf<T: Real>(f: &ScalarField<T>, sigma: T, rule: &QuadratureSpec<T>) -> Result<TermBreakdown<T>> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return invalid("sigma must be positive for the oscillatory form");
    }
    rule.validate()?;
    let grid = f.grid();
    let moments = LaplaceMoments::new(rule.laplace_mode)?;
    let fx = derivative(f);
    let fxx = derivative(&fx);
    let fxxx = derivative(&fxx);

    // Hilbert part: ∂_x[H, W] f_xx − W Λ³f + H f_xx ∂_x W.
    let w_fxx = dealiased(&[&fx, &fxx], |v| moments.diffusion_weight(v[0]) * v[1]);
    let h_fxx = hilbert(&fxx);
    let w_h_fxx = dealiased(&[&fx, &h_fxx], |v| moments.diffusion_weight(v[0]) * v[1]);
    let commutator = derivative(&(&hilbert(&w_fxx) - &w_h_fxx)).scale(sigma);
    let l3 = frac_laplacian(f, T::lit(3.0));
    let elliptic = dealiased(&[&fx, &l3], |v| -moments.diffusion_weight(v[0]) * v[1]).scale(sigma);
    let hfxx = dealiased(&[&fx, &fxx, &h_fxx], |v| moments.diffusion_weight_dx(v[0], v[1]) * v[2]).scale(sigma);

    // ∂_x κ expanded by the product rule.
    let g = dealiased(&[&fx, &fxx, &fxxx], |v| {
        v[2] * moments.diffusion_weight(v[0]) + v[1] * moments.diffusion_weight_dx(v[0], v[1])
    });

    let pad = Padded::new(grid);
    let m = pad.m;
    let f_pad = pad.values(f.spectral());
    let fh = f.spectral();
    let fxh = fx.spectral();
    let gh = g.spectral();
    let rule_nodes = rule.pv_rule()?;
    let c = sigma / (T::lit(4.0) * T::PI());
    let zero = Complex::new(T::zero(), T::zero());
    let acc = rule_nodes.accumulate(
        4 * m,
        || pad.scratch::<5>(),
        |a, w, s, acc| {
            let r = reduce_shift(a, grid.length());
            let eta = inner_symbol(f, a, rule);
            let inv_a = T::one() / a;
            let [tp, tm, e, gp, gm] = &mut s.fields;
            pad.pair(fh, |_, k| phase(k, r), fh, |_, k| phase(k, -r), &mut s.buf, &mut s.scratch, tp, tm);
            pad.pair(gh, |_, k| phase(k, r), gh, |_, k| phase(k, -r), &mut s.buf, &mut s.scratch, gp, gm);
            pad.pair(
                fxh,
                |j, _| Complex::new(eta[j] * inv_a, T::zero()),
                fxh,
                |_, _| zero,
                &mut s.buf,
                &mut s.scratch,
                e,
                &mut s.spare,
            );
            let fp = &f_pad;
            let (out_em, rest) = acc.split_at_mut(m);
            let (out_ep, rest) = rest.split_at_mut(m);
            let (out_sm, out_sp) = rest.split_at_mut(m);
            for i in 0..m {
                let slope = (fp[i] - tp[i]) * inv_a;
                let bar = (fp[i] - tm[i]) * inv_a;
                let ss = slope + bar;
                let mp = moments.sin_moment(slope);
                let mm = moments.sin_moment(bar);
                // common(±α) = τ_{±α} G / (±α)
                let cp = gp[i] * inv_a;
                let cm = -gm[i] * inv_a;
                // E is even in α and S odd, so the ±α pairing flips which
                // combination of cp, cm each half picks up.
                let em = w * c * e[i] * (mp - mm) * (cp + cm);
                let ep = w * c * e[i] * (mp + mm) * (cp - cm);
                let sm = -w * c * ss * (mp - mm) * (cp - cm);
                let sp = -w * c * ss * (mp + mm) * (cp + cm);
                if !(em.is_finite() && ep.is_finite() && sm.is_finite() && sp.is_finite()) {
                    return Err(Error::NonFiniteIntegrand { alpha: a.to_f64_lossy() });
                }
                out_em[i] += em;
                out_ep[i] += ep;
                out_sm[i] += sm;
                out_sp[i] += sp;
            }
            Ok(())
        },
    )?;
    let rems: Vec<ScalarField<T>> = (0..4)
        .map(|t| ScalarField::from_spectrum_unchecked(grid, grid.truncate_padded(&acc[t * m..(t + 1) * m])))
        .collect();
    let [rem_eta_minus, rem_eta_plus, rem_s_minus, rem_s_plus]: [ScalarField<T>; 4] =
        rems.try_into().map_err(|_| Error::GridMismatch)?;
    Ok(TermBreakdown::from_terms([commutator, elliptic, hfxx, rem_eta_minus, rem_eta_plus, rem_s_minus, rem_s_plus]))
}

/// `p.v.∫ (1 + f_x Δ_α f)/(1 + (Δ_α f)²) τ_α g / α dα` over `|α| ≤ alpha_max`.
fn slope_kernel_integral<T: Real>(
    f: &ScalarField<T>,
    fx: &ScalarField<T>,
    g: &ScalarField<T>,
    rule: &QuadratureSpec<T>,
) -> Result<ScalarField<T>> {
    let grid = f.grid();
    let pad = Padded::new(grid);
    let m = pad.m;
    let fxp = pad.values(fx.spectral());
    let f_pad = pad.values(f.spectral());
    let fh = f.spectral();
    let gh = g.spectral();
    let acc = rule.pv_rule()?.accumulate(
        m,
        || pad.scratch::<4>(),
        |a, w, s, acc| {
            let r = reduce_shift(a, grid.length());
            let [tp, tm, gp, gm] = &mut s.fields;
            pad.pair(fh, |_, k| phase(k, r), fh, |_, k| phase(k, -r), &mut s.buf, &mut s.scratch, tp, tm);
            pad.pair(gh, |_, k| phase(k, r), gh, |_, k| phase(k, -r), &mut s.buf, &mut s.scratch, gp, gm);
            let inv_a = T::one() / a;
            let fp = &f_pad;
            for i in 0..m {
                let dp = (fp[i] - tp[i]) * inv_a;
                let dm = (tm[i] - fp[i]) * inv_a;
                let kp = (T::one() + fxp[i] * dp) / (T::one() + dp * dp);
                let km = (T::one() + fxp[i] * dm) / (T::one() + dm * dm);
                let v = w * (kp * gp[i] - km * gm[i]) * inv_a;
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand { alpha: a.to_f64_lossy() });
                }
                acc[i] += v;
            }
            Ok(())
        },
    )?;
    Ok(ScalarField::from_spectrum_unchecked(grid, grid.truncate_padded(&acc)))
}

/// `p.v.∫ Δ_α f_x / (1 + (Δ_α f)²) dα = p.v.∫ ∂_x arctan(Δ_α f) dα`.
fn gravity_integral<T: Real>(
    f: &ScalarField<T>,
    fx: &ScalarField<T>,
    rule: &QuadratureSpec<T>,
) -> Result<ScalarField<T>> {
    let grid = f.grid();
    let pad = Padded::new(grid);
    let m = pad.m;
    let fxp = pad.values(fx.spectral());
    let f_pad = pad.values(f.spectral());
    let fh = f.spectral();
    let fxh = fx.spectral();
    let acc = rule.pv_rule()?.accumulate(
        m,
        || pad.scratch::<4>(),
        |a, w, s, acc| {
            let r = reduce_shift(a, grid.length());
            let [tp, tm, xp, xm] = &mut s.fields;
            pad.pair(fh, |_, k| phase(k, r), fh, |_, k| phase(k, -r), &mut s.buf, &mut s.scratch, tp, tm);
            pad.pair(fxh, |_, k| phase(k, r), fxh, |_, k| phase(k, -r), &mut s.buf, &mut s.scratch, xp, xm);
            let inv_a = T::one() / a;
            let fp = &f_pad;
            for i in 0..m {
                let dp = (fp[i] - tp[i]) * inv_a;
                let dm = (tm[i] - fp[i]) * inv_a;
                let vp = (fxp[i] - xp[i]) / (T::one() + dp * dp);
                let vm = (fxp[i] - xm[i]) / (T::one() + dm * dm);
                let v = w * (vp - vm) * inv_a;
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand { alpha: a.to_f64_lossy() });
                }
                acc[i] += v;
            }
            Ok(())
        },
    )?;
    Ok(ScalarField::from_spectrum_unchecked(grid, grid.truncate_padded(&acc)))
}

/// `∫_{|α| > cutoff} τ_α g / α dα`.
fn far_field<T: Real>(g: &ScalarField<T>, cutoff: T) -> ScalarField<T> {
    apply_symbol(g, |_, k| far_field_symbol(k, cutoff))
}

/// Synthesis of shifted/multiplied fields on the 3/2-refined grid.
struct Padded<'a, T: Real> {
    grid: &'a PeriodicGrid<T>,
    m: usize,
    /// (refined slot, source slot, wavenumber, Nyquist split factor)
    slots: Vec<(usize, usize, T, T)>,
}

struct Scratch<T: Real, const N: usize> {
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
    fields: [Vec<T>; N],
    spare: Vec<T>,
}

impl<'a, T: Real> Padded<'a, T> {
    fn new(grid: &'a PeriodicGrid<T>) -> Self {
        let n = grid.n_points();
        let m = grid.padded_len();
        let half = n / 2;
        let ks = grid.wavenumbers();
        let mut slots = Vec::with_capacity(n + 1);
        for (j, &k) in ks.iter().enumerate().take(n) {
            if j == half {
                let h = T::lit(0.5);
                slots.push((half, j, k, h));
                slots.push((m - half, j, -k, h));
            } else {
                let mode = grid.mode(j);
                let p = if mode >= 0 { mode as usize } else { (m as i64 + mode) as usize };
                slots.push((p, j, k, T::one()));
            }
        }
        Self { grid, m, slots }
    }

    fn scratch<const N: usize>(&self) -> Scratch<T, N> {
        let zero = Complex::new(T::zero(), T::zero());
        Scratch {
            buf: vec![zero; self.m],
            scratch: vec![zero; self.grid.padded_scratch_len()],
            fields: std::array::from_fn(|_| vec![T::zero(); self.m]),
            spare: vec![T::zero(); self.m],
        }
    }

    fn values(&self, coeffs: &[Complex<T>]) -> Vec<T> {
        self.grid.padded_values(coeffs)
    }

    /// Writes `a` with multiplier `ma` and `b` with multiplier `mb` to
    /// `out_a`/`out_b` using a single complex transform.
    #[allow(clippy::too_many_arguments)]
    fn pair(
        &self,
        a: &[Complex<T>],
        ma: impl Fn(usize, T) -> Complex<T>,
        b: &[Complex<T>],
        mb: impl Fn(usize, T) -> Complex<T>,
        buf: &mut [Complex<T>],
        scratch: &mut [Complex<T>],
        out_a: &mut [T],
        out_b: &mut [T],
    ) {
        let zero = Complex::new(T::zero(), T::zero());
        buf.fill(zero);
        for &(p, j, k, fac) in &self.slots {
            let x = a[j] * ma(j, k);
            let y = b[j] * mb(j, k);
            // x + i y
            buf[p] = Complex::new(x.re - y.im, x.im + y.re) * fac;
        }
        self.grid.padded_inverse_in_place(buf, scratch);
        for ((c, oa), ob) in buf.iter().zip(out_a.iter_mut()).zip(out_b.iter_mut()) {
            *oa = c.re;
            *ob = c.im;
        }
    }
}
