//! Quadrature rules: the symmetric log-spaced principal-value rule over α,
//! Gauss–Legendre panels for the inner η/κ integrals and Gauss–Laguerre for
//! the numerical Laplace moments.

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::grid::PeriodicGrid;
use crate::parallel::chunked_sum;
use crate::real::Real;

pub const DEFAULT_N_ALPHA: usize = 2048;
pub const DEFAULT_INNER_ORDER: usize = 16;
pub const MIN_N_ALPHA: usize = 32;

/// How the γ/σ Laplace integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplaceMode {
    ClosedForm,
    GaussLaguerre(usize),
}

/// α-node layout and inner-integral settings.
///
/// The principal-value rule uses `n_alpha` log-spaced nodes per sign on
/// `[alpha_min, alpha_max]`, paired as `±α_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T: Real> {
    pub alpha_min: T,
    pub alpha_max: T,
    pub n_alpha: usize,
    /// Gauss–Legendre order on each inner panel.
    pub inner_order: usize,
    /// Largest inner panel width; `[0, α]` is split into `⌈α / inner_panel⌉`
    /// equal panels.
    pub inner_panel: T,
    pub laplace_mode: LaplaceMode,
}

impl<T: Real> QuadratureSpec<T> {
    /// Defaults: `alpha_min = h/4`, `alpha_max = 4L`, inner panels of `L/16`.
    pub fn for_grid(grid: &PeriodicGrid<T>) -> Self {
        Self {
            alpha_min: grid.spacing() / T::lit(4.0),
            alpha_max: T::lit(4.0) * grid.length(),
            n_alpha: DEFAULT_N_ALPHA,
            inner_order: DEFAULT_INNER_ORDER,
            inner_panel: grid.length() / T::lit(16.0),
            laplace_mode: LaplaceMode::ClosedForm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_min > T::zero()) || !self.alpha_min.is_finite() {
            return invalid("alpha_min must be positive");
        }
        if !(self.alpha_max > self.alpha_min) || !self.alpha_max.is_finite() {
            return invalid("alpha_max must exceed alpha_min");
        }
        if self.n_alpha < MIN_N_ALPHA {
            return invalid(format!("n_alpha must be at least {MIN_N_ALPHA}"));
        }
        if self.inner_order == 0 {
            return invalid("inner_order must be positive");
        }
        if !(self.inner_panel > T::zero()) || !self.inner_panel.is_finite() {
            return invalid("inner_panel must be positive");
        }
        if let LaplaceMode::GaussLaguerre(0) = self.laplace_mode {
            return invalid("laguerre order must be positive");
        }
        Ok(())
    }

    /// One refinement level: the range doubles at both ends and the node
    /// count quadruples, which halves the node spacing at `alpha_max` where
    /// the shifted fields oscillate fastest.
    pub fn refined(&self) -> Self {
        Self {
            alpha_min: self.alpha_min / T::lit(2.0),
            alpha_max: self.alpha_max * T::lit(2.0),
            n_alpha: 4 * self.n_alpha,
            ..*self
        }
    }

    /// Positive nodes and weights of the paired rule.
    ///
    /// In `u = ln α` the rule is the extended Simpson rule with end weights
    /// `3/8, 7/6, 23/24`, fourth order for smooth integrands. The paired
    /// integrand is even and regular at 0, so `[0, α_min]` is integrated
    /// exactly for the quadratic `φ₀ + φ₂α²` through the first two nodes.
    pub fn pv_rule(&self) -> Result<PvRule<T>> {
        self.validate()?;
        let n = self.n_alpha;
        let du = (self.alpha_max / self.alpha_min).ln() / T::from_count(n - 1);
        let ends = [T::lit(3.0 / 8.0), T::lit(7.0 / 6.0), T::lit(23.0 / 24.0)];
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for j in 0..n {
            // Multiplying `alpha_min` keeps the layout exactly covariant
            // under rescaling of the range.
            let a = if j == n - 1 { self.alpha_max } else { self.alpha_min * (du * T::from_count(j)).exp() };
            let edge = j.min(n - 1 - j);
            let g = if edge < 3 { ends[edge] } else { T::one() };
            nodes.push(a);
            weights.push(du * a * g);
        }
        let a0 = self.alpha_min;
        let c = T::lit(2.0 / 3.0) * a0 / (T::lit(2.0) * du).exp_m1();
        weights[0] += a0 + c;
        weights[1] -= c;
        Ok(PvRule { nodes, weights })
    }

    /// Inner Gauss–Legendre nodes and weights on `[0, alpha]` (`alpha` may
    /// be negative; weights then carry the orientation).
    pub fn inner_nodes(&self, alpha: T) -> (Vec<T>, Vec<T>) {
        composite_legendre(T::zero(), alpha, self.inner_order, self.inner_panel)
    }
}

/// Positive half of the paired principal-value rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PvRule<T: Real> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> PvRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Deterministic parallel accumulation over node indices. `add(j, α_j,
    /// w_j, scratch, acc)` adds the node's paired contribution into `acc`.
    pub fn accumulate<S, I, F>(&self, len: usize, init: I, add: F) -> Result<Vec<T>>
    where
        I: Fn() -> S + Sync,
        F: Fn(T, T, &mut S, &mut [T]) -> Result<()> + Sync,
    {
        chunked_sum(self.len(), len, init, |j, s, acc| add(self.nodes[j], self.weights[j], s, acc))
    }
}

/// `p.v.∫ integrand(α) dα ≈ Σ_j w_j (integrand(α_j) + integrand(-α_j))`.
pub fn pv_integrate<T, F>(grid: &PeriodicGrid<T>, integrand: F, spec: &QuadratureSpec<T>) -> Result<ScalarField<T>>
where
    T: Real,
    F: Fn(T) -> Result<ScalarField<T>> + Sync,
{
    let rule = spec.pv_rule()?;
    let values = rule.accumulate(
        grid.n_points(),
        || (),
        |a, w, _, acc| {
            let plus = integrand(a)?;
            let minus = integrand(-a)?;
            plus.check_same_grid(&minus)?;
            if plus.len() != acc.len() {
                return Err(Error::GridMismatch);
            }
            for (alpha, side) in [(a, &plus), (-a, &minus)] {
                if !side.is_finite() {
                    return Err(Error::NonFiniteIntegrand { alpha: alpha.to_f64_lossy() });
                }
            }
            for ((o, &p), &m) in acc.iter_mut().zip(plus.values()).zip(minus.values()) {
                *o += w * (p + m);
            }
            Ok(())
        },
    )?;
    Ok(ScalarField::from_values_unchecked(grid, values))
}

/// Symbol of `f ↦ ∫_{|α| > A} τ_α f / α dα`, i.e.
/// `∫_{|α|>A} e^{-ikα}/α dα = -2i sgn(k) (π/2 − Si(|k| A))`.
pub fn far_field_symbol<T: Real>(k: T, cutoff: T) -> Complex<T> {
    if k == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let tail = T::FRAC_PI_2() - sine_integral(k.abs() * cutoff);
    let s = if k > T::zero() { T::one() } else { -T::one() };
    Complex::new(T::zero(), T::lit(-2.0) * s * tail)
}

/// Sine integral `Si(x) = ∫₀^x sin t / t dt`.
pub fn sine_integral<T: Real>(x: T) -> T {
    T::lit(sine_integral_f64(x.to_f64_lossy()))
}

fn sine_integral_f64(x: f64) -> f64 {
    let t = x.abs();
    let si = if t < 1e-300 {
        t
    } else if t <= 4.0 {
        // Alternating series; terms peak near k ≈ 2 for t = 4, so
        // cancellation costs under two digits.
        let mut sum = 0.0;
        let mut power = t; // t^{2k+1}/(2k+1)!
        let mut k = 0u32;
        loop {
            let term = power / f64::from(2 * k + 1);
            sum += if k.is_multiple_of(2) { term } else { -term };
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
            k += 1;
            power *= t * t / f64::from((2 * k) * (2 * k + 1));
        }
        sum
    } else {
        // Continued fraction for E₁(it) evaluated by the modified Lentz method.
        let tiny = 1e-300;
        let mut b = Complex::new(1.0, t);
        let mut c = Complex::new(1.0 / tiny, 0.0);
        let mut d = Complex::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..10_000 {
            let a = -((i - 1) as f64).powi(2);
            b += Complex::new(2.0, 0.0);
            d = Complex::new(1.0, 0.0) / (d * a + b);
            c = b + Complex::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
                break;
            }
        }
        let h = Complex::new(t.cos(), -t.sin()) * h;
        std::f64::consts::FRAC_PI_2 + h.im
    };
    si.copysign(x)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre_f64(order);
    (x.into_iter().map(T::lit).collect(), w.into_iter().map(T::lit).collect())
}

fn gauss_legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre on `[a, b]` with panels no wider than `panel`.
pub fn composite_legendre<T: Real>(a: T, b: T, order: usize, panel: T) -> (Vec<T>, Vec<T>) {
    let (gx, gw) = gauss_legendre::<T>(order);
    let width = (b - a).abs();
    let panels = ((width / panel).ceil().to_f64_lossy() as usize).max(1);
    let step = (b - a) / T::from_count(panels);
    let half = step / T::lit(2.0);
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = a + step * (T::from_count(p) + T::lit(0.5));
        for (&x, &w) in gx.iter().zip(&gw) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    (nodes, weights)
}

/// Gauss–Laguerre nodes and weights for `∫₀^∞ e^{-γ} g(γ) dγ`.
pub fn gauss_laguerre<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_laguerre_f64(order);
    (x.into_iter().map(T::lit).collect(), w.into_iter().map(T::lit).collect())
}

fn gauss_laguerre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - x[i - 2])
            }
        };
        for _ in 0..200 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 - z) * p2 - j as f64 * p3;
                p1 /= (j + 1) as f64;
            }
            let pp = (nf * p1 - nf * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        // Recompute p_{n-1} at the converged root for the weight.
        let (mut p1, mut q) = (1.0, 0.0);
        for j in 0..n {
            let p3 = q;
            q = p1;
            p1 = (((2 * j + 1) as f64 - z) * q - j as f64 * p3) / (j + 1) as f64;
        }
        let p2 = q;
        let pp = (nf * p1 - nf * p2) / z;
        x[i] = z;
        w[i] = -1.0 / (pp * nf * p2);
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre::<f64>(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for p in 0..32 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "x^{p}: {q} vs {exact}");
        }
    }

    #[test]
    fn laguerre_moments() {
        for order in [8, 32, 64] {
            let (x, w) = gauss_laguerre::<f64>(order);
            // ∫ γ^m e^{-γ} = m!
            let mut fact = 1.0;
            for m in 0..12 {
                if m > 0 {
                    fact *= m as f64;
                }
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(m)).sum();
                assert!((q / fact - 1.0).abs() < 1e-11, "order {order} m {m}: {q}");
            }
        }
    }

    #[test]
    fn sine_integral_reference_values() {
        // Values from Abramowitz & Stegun table 5.1 and the large-x limit.
        let cases: [(f64, f64); 5] = [
            (0.5, 0.493107418043066),
            (1.0, 0.946083070367183),
            (4.0, 1.758203138949053),
            (10.0, 1.658347594218874),
            (20.0, 1.54824170104344),
        ];
        for (x, si) in cases {
            assert!((sine_integral(x) - si).abs() < 1e-13, "Si({x}) = {}", sine_integral(x));
            assert_eq!(sine_integral(-x), -sine_integral(x));
        }
        assert!((sine_integral(1e6_f64) - PI / 2.0).abs() < 2e-6);
    }

    #[test]
    fn sine_integral_branches_agree() {
        // Brute-force composite Gauss–Legendre at the switch point.
        let (x, w) = composite_legendre::<f64>(0.0, 4.0, 16, 0.25);
        let brute: f64 = x.iter().zip(&w).map(|(x, w)| w * x.sin() / x).sum();
        assert!((sine_integral(4.0) - brute).abs() < 1e-14);
        assert!((sine_integral(4.0 + 1e-12) - brute).abs() < 1e-11);
    }

    #[test]
    fn pv_rule_covers_interval() {
        let g = PeriodicGrid::<f64>::new(64, 2.0 * PI).unwrap();
        let spec = QuadratureSpec::for_grid(&g);
        let rule = spec.pv_rule().unwrap();
        let total: f64 = rule.weights.iter().sum();
        // The trapezoid in u = ln α integrates dα = α du exactly up to O(du²).
        assert!((total - spec.alpha_max).abs() / spec.alpha_max < 1e-5);
        assert_eq!(rule.nodes[0], spec.alpha_min);
        assert_eq!(*rule.nodes.last().unwrap(), spec.alpha_max);
    }

    #[test]
    fn pv_of_odd_integrand_vanishes() {
        let g = PeriodicGrid::<f64>::new(32, 2.0 * PI).unwrap();
        let c = ScalarField::constant(&g, 1.7);
        let spec = QuadratureSpec::for_grid(&g);
        let out = pv_integrate(&g, |a| Ok(c.scale(1.0 / a)), &spec).unwrap();
        assert!(out.max_abs() < 1e-12);
    }

    #[test]
    fn pv_gaussian_and_self_convergence() {
        let g = PeriodicGrid::<f64>::new(16, 2.0 * PI).unwrap();
        let base = ScalarField::sample(&g, |x| 1.0 + 0.5 * x.cos()).unwrap();
        let integrate = |n_alpha| {
            // A small inner cutoff isolates the log-trapezoid error from the
            // constant-extrapolation error on [0, alpha_min].
            let spec = QuadratureSpec { n_alpha, alpha_min: 1e-4, ..QuadratureSpec::for_grid(&g) };
            pv_integrate(&g, |a| Ok(base.scale((-a * a).exp())), &spec).unwrap()
        };
        let exact = base.scale(PI.sqrt());
        let coarse = integrate(32);
        let mid = integrate(64);
        let fine = integrate(128);
        assert!(fine.sup_distance(&exact) < 1e-5, "{}", fine.sup_distance(&exact));
        let r = coarse.sup_distance(&mid) / mid.sup_distance(&fine);
        assert!(r >= 4.0 * 0.95, "self-convergence ratio {r}");
    }

    #[test]
    fn pv_reports_non_finite_node() {
        let g = PeriodicGrid::<f64>::new(16, 2.0 * PI).unwrap();
        let spec = QuadratureSpec::for_grid(&g);
        let rule = spec.pv_rule().unwrap();
        let bad = rule.nodes[40];
        let err = pv_integrate(&g, |a| Ok(ScalarField::constant(&g, if a == -bad { f64::NAN } else { 1.0 })), &spec)
            .unwrap_err();
        assert_eq!(err, Error::NonFiniteIntegrand { alpha: -bad });
    }

    #[test]
    fn far_field_symbol_matches_brute_force() {
        // 2∫_A^B sin(kα)/α dα with B large, compared to the closed form.
        let (k, a) = (3.0, 2.0);
        let (x, w) = composite_legendre::<f64>(a, 4000.0, 16, 0.05);
        let brute: f64 = x.iter().zip(&w).map(|(x, w)| w * (k * x).sin() / x).sum::<f64>() * 2.0;
        let s = far_field_symbol(k, a);
        assert_eq!(s.re, 0.0);
        // Remaining tail beyond 4000 is O(1/(k·4000)).
        assert!((-s.im - brute).abs() < 2e-4, "{} vs {}", -s.im, brute);
        assert_eq!(far_field_symbol(-k, a), s.conj());
    }

    #[test]
    fn spec_validation() {
        let g = PeriodicGrid::<f64>::new(16, 1.0).unwrap();
        let ok = QuadratureSpec::for_grid(&g);
        assert!(ok.validate().is_ok());
        assert!(QuadratureSpec { n_alpha: 8, ..ok }.validate().is_err());
        assert!(QuadratureSpec { alpha_max: ok.alpha_min, ..ok }.validate().is_err());
        assert!(QuadratureSpec { alpha_min: 0.0, ..ok }.validate().is_err());
        let r = ok.refined();
        assert_eq!(r.n_alpha, 4 * ok.n_alpha);
    }
}
