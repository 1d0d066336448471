//! Homogeneous Sobolev and Besov semi-norms, `L^p` norms and the global
//! smallness functional.

use rayon::prelude::*;

use crate::difference::{apply, DiffOpKind};
use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::grid::PeriodicGrid;
use crate::parallel::chunked_sum;
use crate::real::Real;
use crate::spectral::derivative;

pub const DEFAULT_SMALLNESS_C: f64 = 12.0;
pub const MAX_SOBOLEV_S: f64 = 4.5;

/// `‖Λ^s f‖_{L²} = (L Σ_{k≠0} |k|^{2s} |c_k|²)^{1/2}`.
pub fn sobolev<T: Real>(f: &ScalarField<T>, s: T) -> Result<T> {
    if !(s >= T::zero() && s <= T::lit(MAX_SOBOLEV_S)) {
        return invalid(format!("sobolev exponent must lie in [0, {MAX_SOBOLEV_S}] (got {s})"));
    }
    Ok(sobolev_unchecked(f, s))
}

fn sobolev_unchecked<T: Real>(f: &ScalarField<T>, s: T) -> T {
    let two_s = T::lit(2.0) * s;
    let sum: T = f
        .spectral()
        .iter()
        .zip(f.grid().wavenumbers())
        .filter(|(_, &k)| k != T::zero())
        .map(|(c, &k)| k.abs().powf(two_s) * c.norm_sqr())
        .sum();
    (sum * f.grid().length()).sqrt()
}

/// Trapezoidal `L^p` norm; `p = ∞` gives the largest sample.
pub fn lp<T: Real>(f: &ScalarField<T>, p: T) -> Result<T> {
    if !(p >= T::one()) {
        return invalid(format!("L^p exponent must be at least 1 (got {p})"));
    }
    Ok(lp_values(f.values(), p, f.grid().spacing()))
}

fn lp_values<T: Real>(values: &[T], p: T, h: T) -> T {
    if p.is_infinite() {
        return values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    }
    if p == T::lit(2.0) {
        return (values.iter().map(|&v| v * v).sum::<T>() * h).sqrt();
    }
    (values.iter().map(|v| v.abs().powf(p)).sum::<T>() * h).powf(T::one() / p)
}

/// How the α-integral of the Besov semi-norm treats `|α| > L/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesovMode {
    /// Integrate over `0 < |α| ≤ alpha_max` only.
    Truncated,
    /// Fold the whole line onto `(0, L/2]` using periodicity of the
    /// difference in α and the lattice sum of the weight.
    Periodized,
}

/// α-node layout for Besov estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovRule<T: Real> {
    pub alpha_min: T,
    pub alpha_max: T,
    pub n_alpha: usize,
    pub mode: BesovMode,
}

impl<T: Real> BesovRule<T> {
    /// `alpha_min = h/4`, `alpha_max = L/2`, 1024 nodes, truncated.
    pub fn for_grid(grid: &PeriodicGrid<T>) -> Self {
        Self {
            alpha_min: grid.spacing() / T::lit(4.0),
            alpha_max: grid.length() / T::lit(2.0),
            n_alpha: 1024,
            mode: BesovMode::Truncated,
        }
    }

    pub fn periodized(grid: &PeriodicGrid<T>) -> Self {
        Self { mode: BesovMode::Periodized, ..Self::for_grid(grid) }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha_max > T::zero()) || !self.alpha_max.is_finite() {
            return invalid("alpha_max must be positive");
        }
        if !(self.alpha_min > T::zero() && self.alpha_min < self.alpha_max) {
            return invalid("alpha_min must lie in (0, alpha_max)");
        }
        if self.n_alpha < 2 {
            return invalid("n_alpha must be at least 2");
        }
        Ok(())
    }
}

/// `‖f‖_{Ḃ^s_{p,q}} = (∫ (‖D_α f‖_{L^p} / |α|^s)^q dα/|α|)^{1/q}` with the
/// first difference for `s < 1` and the second difference `s_α` for
/// `1 ≤ s < 2`. Both signs of α are included; `q = ∞` takes the supremum
/// over the nodes.
pub fn besov<T: Real>(f: &ScalarField<T>, s: T, p: T, q: T, rule: &BesovRule<T>) -> Result<T> {
    if !(s > T::zero() && s < T::lit(2.0)) {
        return invalid(format!("besov smoothness must lie in (0, 2) (got {s})"));
    }
    if !(p >= T::one()) || !(q >= T::one()) {
        return invalid("besov exponents p and q must be at least 1");
    }
    rule.validate()?;
    let (kind, order) = if s < T::one() { (DiffOpKind::Delta, T::one()) } else { (DiffOpKind::SSecond, T::lit(2.0)) };
    let grid = f.grid();
    let h = grid.spacing();
    let alpha_max = match rule.mode {
        BesovMode::Truncated => rule.alpha_max,
        BesovMode::Periodized => rule.alpha_max.min(grid.length() / T::lit(2.0)),
    };
    let n = rule.n_alpha;
    let du = (alpha_max / rule.alpha_min).ln() / T::from_count(n - 1);
    let node = |j: usize| if j == n - 1 { alpha_max } else { rule.alpha_min * (du * T::from_count(j)).exp() };
    // ‖D_{±α} f‖_p agree (translation invariance of L^p), so one sign is
    // evaluated and counted twice.
    let norm_at = |a: T| -> Result<T> { Ok(lp_values(apply(kind, f, a)?.values(), p, h)) };

    if q.is_infinite() {
        let values = (0..n)
            .into_par_iter()
            .map(|j| {
                let a = node(j);
                Ok(norm_at(a)? / a.powf(s))
            })
            .collect::<Result<Vec<T>>>()?;
        return Ok(values.into_iter().fold(T::zero(), T::max));
    }

    let sq = s * q;
    let lattice = LatticeWeight::new(grid.length(), sq);
    let half = T::lit(0.5);
    let total = chunked_sum(
        n,
        1,
        || (),
        |j, _, acc: &mut [T]| {
            let a = node(j);
            let v = norm_at(a)?.powf(q);
            let mut w = du;
            if j == 0 || j == n - 1 {
                w *= half;
            }
            // ∫ v dα/α^{1+sq} in u = ln α is ∫ v α^{-sq} du.
            let weight = match rule.mode {
                BesovMode::Truncated => a.powf(-sq),
                BesovMode::Periodized => a * lattice.eval(a),
            };
            let mut contrib = w * v * weight;
            if j == 0 {
                // v α^{-sq} behaves like α^{β} below the first node.
                let beta = (order - s) * q;
                contrib += v * weight / beta;
            }
            acc[0] += contrib;
            Ok(())
        },
    )?;
    Ok((T::lit(2.0) * total[0]).powf(T::one() / q))
}

/// `Σ_m |α + mL|^{-1-sq}` over `|m| ≤ M`, plus a midpoint estimate of the
/// remaining tail.
struct LatticeWeight<T: Real> {
    length: T,
    exponent: T,
    tail: T,
}

const LATTICE_TERMS: usize = 256;

impl<T: Real> LatticeWeight<T> {
    fn new(length: T, sq: T) -> Self {
        let exponent = T::one() + sq;
        let m = T::from_count(LATTICE_TERMS) + T::lit(0.5);
        let tail = T::lit(2.0) * length.powf(-exponent) * m.powf(-sq) / sq;
        Self { length, exponent, tail }
    }

    fn eval(&self, a: T) -> T {
        let mut sum = a.abs().powf(-self.exponent);
        for m in 1..=LATTICE_TERMS {
            let shift = T::from_count(m) * self.length;
            sum += (a + shift).abs().powf(-self.exponent) + (a - shift).abs().powf(-self.exponent);
        }
        sum + self.tail
    }
}

/// `(C h + C h⁴ + h b)(1 + lip²)^{3/2}` with `h = ‖f‖_{Ḣ^{3/2}}`,
/// `b = ‖f‖_{Ḃ¹_{∞,1}}` and `lip = ‖f_x‖_∞`.
pub fn smallness<T: Real>(f: &ScalarField<T>, c: T, rule: &BesovRule<T>) -> Result<T> {
    if !(c > T::zero()) {
        return invalid("smallness constant C must be positive");
    }
    let h32 = sobolev_unchecked(f, T::lit(1.5));
    let b1 = besov(f, T::one(), T::infinity(), T::one(), rule)?;
    let lip = derivative(f).max_abs();
    Ok(smallness_from(c, h32, b1, lip))
}

pub fn smallness_from<T: Real>(c: T, h32: T, b1: T, lip: T) -> T {
    (c * h32 + c * h32.powi(4) + h32 * b1) * (T::one() + lip * lip).powf(T::lit(1.5))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpCheck<T: Real> {
    pub lhs: T,
    pub rhs: T,
    pub ok: bool,
}

/// `‖f‖_{Ḣ^{θ s1 + (1-θ) s2}} ≤ ‖f‖^θ_{Ḣ^{s1}} ‖f‖^{1-θ}_{Ḣ^{s2}}`.
pub fn interp_check<T: Real>(f: &ScalarField<T>, s1: T, s2: T, theta: T) -> Result<InterpCheck<T>> {
    if !(s1 < s2) {
        return invalid("interpolation needs s1 < s2");
    }
    if !(theta > T::zero() && theta < T::one()) {
        return invalid("interpolation needs theta in (0, 1)");
    }
    let s = theta * s1 + (T::one() - theta) * s2;
    let lhs = sobolev(f, s)?;
    let rhs = sobolev(f, s1)?.powf(theta) * sobolev(f, s2)?.powf(T::one() - theta);
    Ok(InterpCheck { lhs, rhs, ok: lhs <= rhs * (T::one() + T::lit(1e-12)) })
}

/// The norms recorded along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormReport<T: Real> {
    pub time: T,
    pub l2: T,
    pub h32: T,
    pub h3: T,
    pub h52: T,
    pub h4: T,
    pub b1_inf_1: T,
    pub lip: T,
    pub smallness: T,
}

impl<T: Real> NormReport<T> {
    pub fn compute(f: &ScalarField<T>, time: T, c: T, rule: &BesovRule<T>) -> Result<Self> {
        let h32 = sobolev_unchecked(f, T::lit(1.5));
        let b1 = besov(f, T::one(), T::infinity(), T::one(), rule)?;
        let lip = derivative(f).max_abs();
        Ok(Self {
            time,
            l2: lp_values(f.values(), T::lit(2.0), f.grid().spacing()),
            h32,
            h3: sobolev_unchecked(f, T::lit(3.0)),
            h52: sobolev_unchecked(f, T::lit(2.5)),
            h4: sobolev_unchecked(f, T::lit(4.0)),
            b1_inf_1: b1,
            lip,
            smallness: smallness_from(c, h32, b1, lip),
        })
    }

    pub fn is_finite(&self) -> bool {
        [self.l2, self.h32, self.h3, self.h52, self.h4, self.b1_inf_1, self.lip, self.smallness]
            .iter()
            .all(|v| v.is_finite())
    }
}
