//! Laplace moments `∫₀^∞ γⁿ e^{-γ} {cos, sin}(aγ) dγ` for `n ∈ {0, 1}`.

use crate::error::{invalid, Result};
use crate::quadrature::{gauss_laguerre, LaplaceMode};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// Evaluator for the moments in a fixed mode. Gauss–Laguerre nodes are
/// computed once at construction.
#[derive(Debug, Clone)]
pub struct LaplaceMoments<T: Real> {
    mode: LaplaceMode,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> LaplaceMoments<T> {
    pub fn new(mode: LaplaceMode) -> Result<Self> {
        let (nodes, weights) = match mode {
            LaplaceMode::ClosedForm => (Vec::new(), Vec::new()),
            LaplaceMode::GaussLaguerre(0) => return invalid("laguerre order must be positive"),
            LaplaceMode::GaussLaguerre(order) => gauss_laguerre(order),
        };
        Ok(Self { mode, nodes, weights })
    }

    pub fn mode(&self) -> LaplaceMode {
        self.mode
    }

    pub fn eval(&self, trig: Trig, n: u32, a: T) -> Result<T> {
        if n > 1 {
            return invalid(format!("laplace moment order must be 0 or 1 (got {n})"));
        }
        Ok(self.moment(trig, n, a))
    }

    /// Moment with `n ∈ {0, 1}` already validated by the caller.
    pub(crate) fn moment(&self, trig: Trig, n: u32, a: T) -> T {
        debug_assert!(n <= 1);
        match self.mode {
            LaplaceMode::ClosedForm => closed_form(trig, n, a),
            LaplaceMode::GaussLaguerre(_) => {
                let mut sum = T::zero();
                for (&g, &w) in self.nodes.iter().zip(&self.weights) {
                    let t = match trig {
                        Trig::Cos => (a * g).cos(),
                        Trig::Sin => (a * g).sin(),
                    };
                    sum += if n == 1 { w * g * t } else { w * t };
                }
                sum
            }
        }
    }

    /// `(1 + u²)^{-3/2}` written as `∫₀^∞ e^{-ς} cos(ς u) dς · cos(arctan u)`.
    pub fn diffusion_weight(&self, u: T) -> T {
        self.moment(Trig::Cos, 0, u) * u.atan().cos()
    }

    /// `∂_x` of [`Self::diffusion_weight`] at `u = f_x`, `u_x = f_xx`:
    /// `−u_x (∫ ς e^{-ς} sin(ς u) dς · cos(arctan u) + ∫ e^{-ς} cos(ς u) dς · u cos³(arctan u))`.
    pub fn diffusion_weight_dx(&self, u: T, ux: T) -> T {
        let c = u.atan().cos();
        -ux * (self.moment(Trig::Sin, 1, u) * c + self.moment(Trig::Cos, 0, u) * u * c * c * c)
    }

    /// `∫₀^∞ e^{-γ} sin(γ a) dγ = a / (1 + a²)`.
    pub fn sin_moment(&self, a: T) -> T {
        self.moment(Trig::Sin, 0, a)
    }
}

fn closed_form<T: Real>(trig: Trig, n: u32, a: T) -> T {
    let d = T::one() + a * a;
    match (trig, n) {
        (Trig::Cos, 0) => T::one() / d,
        (Trig::Sin, 0) => a / d,
        (Trig::Cos, _) => (T::one() - a * a) / (d * d),
        (Trig::Sin, _) => T::lit(2.0) * a / (d * d),
    }
}

/// One-off evaluation; prefer [`LaplaceMoments`] in loops.
pub fn laplace_moment<T: Real>(trig: Trig, n: u32, a: T, mode: LaplaceMode) -> Result<T> {
    LaplaceMoments::new(mode)?.eval(trig, n, a)
}
