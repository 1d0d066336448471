//! Energy functionals along trajectories and the checks built on them.

use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::norms::NormReport;
use crate::quadrature::QuadratureSpec;
use crate::real::Real;
use crate::rhs::{rhs, Formulation, PhysicalParams};
use crate::spectral::{derivative, frac_laplacian};
use crate::timestep::Trajectory;

/// `X + X² + X³ + X⁴`.
pub fn poly_p<T: Real>(x: T) -> T {
    x * (T::one() + x * (T::one() + x * (T::one() + x)))
}

/// `X + X²`.
pub fn poly_q<T: Real>(x: T) -> T {
    x * (T::one() + x)
}

/// `‖f‖²_{Ḣ³}(P(h) + h b) + Q(h) h` with `h = ‖f‖_{Ḣ^{3/2}}`, `b = ‖f‖_{Ḃ¹_{∞,1}}`.
pub fn majorant<T: Real>(h32: T, h3: T, b1: T) -> T {
    h3 * h3 * (poly_p(h32) + h32 * b1) + poly_q(h32) * h32
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyReport<T: Real> {
    /// `½‖f‖²_{Ḣ^{3/2}}`.
    pub e_h32: T,
    /// `⟨Λ^{3/2} f, Λ^{3/2} RHS(f)⟩`.
    pub ddt_e: T,
    /// `∫ |Λ³f|² (1 + f_x²)^{-3/2}`.
    pub dissip3: T,
    /// `∫ |Λ^{3/2}f|² (1 + f_x²)^{-3/2}`.
    pub dissip32: T,
    pub bound: T,
    /// Smallest `K ≥ 0` with `ddt_e + σ dissip3 ≤ K bound`.
    pub k_required: T,
}

fn weighted_square<T: Real>(g: &ScalarField<T>, weight: &[T]) -> T {
    let h = g.grid().spacing();
    g.values().iter().zip(weight).fold(T::zero(), |acc, (&v, &w)| acc + v * v * w) * h
}

/// Energy quantities from a right-hand side that has already been evaluated.
pub fn energy_report_from_rhs<T: Real>(
    f: &ScalarField<T>,
    r: &ScalarField<T>,
    params: &PhysicalParams<T>,
    norms: &NormReport<T>,
) -> EnergyReport<T> {
    let three_halves = T::lit(1.5);
    let l32f = frac_laplacian(f, three_halves);
    let l32r = frac_laplacian(r, three_halves);
    let l3f = frac_laplacian(f, T::lit(3.0));
    let weight: Vec<T> = derivative(f).values().iter().map(|&u| (T::one() + u * u).powf(-three_halves)).collect();
    let e_h32 = T::lit(0.5) * norms.h32 * norms.h32;
    let ddt_e = l32f.inner(&l32r);
    let dissip3 = weighted_square(&l3f, &weight);
    let dissip32 = weighted_square(&l32f, &weight);
    let bound = majorant(norms.h32, norms.h3, norms.b1_inf_1);
    let excess = ddt_e + params.sigma * dissip3;
    let k_required = if excess <= T::zero() {
        T::zero()
    } else if bound > T::zero() {
        excess / bound
    } else {
        T::infinity()
    };
    EnergyReport { e_h32, ddt_e, dissip3, dissip32, bound, k_required }
}

/// Evaluates the right-hand side (CP1 form) and the energy quantities of `f`.
pub fn energy_report<T: Real>(
    f: &ScalarField<T>,
    params: &PhysicalParams<T>,
    rule: &QuadratureSpec<T>,
    norms: &NormReport<T>,
) -> Result<EnergyReport<T>> {
    let r = rhs(f, params, rule, Formulation::Cp1)?;
    Ok(energy_report_from_rhs(f, &r, params, norms))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck<T: Real> {
    pub ok: bool,
    pub worst_time: T,
    /// `min_t (‖f₀‖²_{Ḣ^{3/2}} + K·RHS(t) − LHS(t))`.
    pub worst_margin: T,
    /// Smallest `K` for which every report passes.
    pub required_k: T,
}

/// Integrated Ḣ^{3/2} inequality:
///
/// ```text
/// ‖f(T)‖²_{Ḣ^{3/2}} + ∫₀^T ‖f‖²_{Ḣ²}/(1+L²)² + ∫₀^T ‖f‖²_{Ḣ³}/(1+L²)^{3/2}
///     ≤ ‖f₀‖²_{Ḣ^{3/2}} + K ∫₀^T majorant
/// ```
///
/// with `L = ‖f_x‖_∞`, trapezoid rule in time, and `‖f‖_{Ḣ²}` replaced by
/// its interpolation majorant `‖f‖^{2/3}_{Ḣ^{3/2}} ‖f‖^{1/3}_{Ḣ³}`.
pub fn check_inequality<T: Real>(reports: &[NormReport<T>], k: T) -> Result<InequalityCheck<T>> {
    if reports.is_empty() {
        return invalid("trajectory has no reports");
    }
    if !(k >= T::zero()) {
        return invalid("K must be non-negative");
    }
    let lhs_rate = |r: &NormReport<T>| {
        let w = T::one() + r.lip * r.lip;
        let h2sq = r.h32.powf(T::lit(4.0 / 3.0)) * r.h3.powf(T::lit(2.0 / 3.0));
        h2sq / (w * w) + r.h3 * r.h3 / w.powf(T::lit(1.5))
    };
    let rhs_rate = |r: &NormReport<T>| majorant(r.h32, r.h3, r.b1_inf_1);
    let e0 = reports[0].h32 * reports[0].h32;
    let half = T::lit(0.5);
    let (mut lhs_int, mut rhs_int) = (T::zero(), T::zero());
    let mut worst = (reports[0].time, T::infinity());
    let mut required = T::zero();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            let p = &reports[i - 1];
            let dt = r.time - p.time;
            lhs_int += half * dt * (lhs_rate(p) + lhs_rate(r));
            rhs_int += half * dt * (rhs_rate(p) + rhs_rate(r));
        }
        let lhs = r.h32 * r.h32 + lhs_int;
        let margin = e0 + k * rhs_int - lhs;
        if margin < worst.1 {
            worst = (r.time, margin);
        }
        let excess = lhs - e0;
        if excess > T::zero() {
            required = required.max(if rhs_int > T::zero() { excess / rhs_int } else { T::infinity() });
        }
    }
    Ok(InequalityCheck { ok: worst.1 >= T::zero(), worst_time: worst.0, worst_margin: worst.1, required_k: required })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate<T: Real> {
    pub held_throughout: bool,
    pub first_violation: Option<T>,
}

/// Scans the reported smallness functional against 1.
pub fn smallness_gate<T: Real>(reports: &[NormReport<T>]) -> Gate<T> {
    let first_violation = reports.iter().find(|r| !(r.smallness < T::one())).map(|r| r.time);
    Gate { held_throughout: first_violation.is_none(), first_violation }
}

/// First report index at which `h32` rose by more than `slack` over the
/// previous report, together with the increase.
pub fn monotone_violation<T: Real>(reports: &[NormReport<T>], slack: T) -> Option<(usize, T)> {
    reports.windows(2).enumerate().find_map(|(i, w)| {
        let rise = w[1].h32 - w[0].h32;
        (rise > slack).then_some((i + 1, rise))
    })
}

/// Convenience over a [`Trajectory`].
pub fn check_trajectory<T: Real>(traj: &Trajectory<T>, k: T) -> Result<InequalityCheck<T>> {
    check_inequality(&traj.reports, k)
}
