//! Self-checks behind the `verify-*`, `linear-symbol` and `monitor`
//! subcommands. Each returns a table plus a verdict; printing lives in the
//! binary.

use std::f64::consts::PI;

use muskat_core::difference::{
    apply, d2d_dalpha_closed, d2s_dalpha_closed, dd_dalpha_closed, ds_dalpha_closed, eta_integral, DiffOpKind,
};
use muskat_core::monitor::{check_inequality, monotone_violation, smallness_gate, InequalityCheck};
use muskat_core::norms::{interp_check, sobolev};
use muskat_core::rhs::{rhs_cp1, rhs_nf};
use muskat_core::spectral::derivative;
use muskat_core::timestep::linear_symbol;
use muskat_core::{Field, Grid, NormReport, Params, Quadrature, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named test fields for the identity suite with their highest mode.
pub fn identity_fields(grid: &Grid) -> Result<Vec<(&'static str, u32, Field)>> {
    Ok(vec![
        ("sin x", 1, Field::sample(grid, f64::sin)?),
        ("sin 2x", 2, Field::sample(grid, |x| (2.0 * x).sin())?),
        ("sin x + 0.3 sin 3x", 3, Field::sample(grid, |x| x.sin() + 0.3 * (3.0 * x).sin())?),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// `∂_α S_α f`
    Ds,
    /// `∂²_α S_α f`
    Dds,
    /// `∂_α D_α f`
    Dd,
    /// `∂²_α D_α f`
    Ddd,
    /// `2f_x − D_α f = (1/α)∫₀^α s_η f_x dη`
    Eta,
}

impl Identity {
    pub const ALL: [Identity; 5] = [Identity::Ds, Identity::Dds, Identity::Dd, Identity::Ddd, Identity::Eta];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Ds => "dS/da",
            Identity::Dds => "d2S/da2",
            Identity::Dd => "dD/da",
            Identity::Ddd => "d2D/da2",
            Identity::Eta => "2fx-D",
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdentityRow {
    pub field: &'static str,
    pub alpha: f64,
    pub identity: Identity,
    /// Sup error at step `h`, at `h/2`, and their ratio. The η identity has
    /// no α-step, so only `err_fine` is meaningful there.
    pub outcome: std::result::Result<(f64, f64, Option<f64>), String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct IdentitySettings {
    pub n: usize,
    /// Coarse α-step for a unit wavenumber; a field whose highest mode is
    /// `k` is differenced with `h / k`, so every row sees the same
    /// truncation-to-roundoff balance.
    pub h: f64,
    pub tol: f64,
    pub min_ratio: f64,
}

impl Default for IdentitySettings {
    fn default() -> Self {
        Self { n: 256, h: 8e-3, tol: 1e-5, min_ratio: 3.5 }
    }
}

fn central1(op: impl Fn(f64) -> Result<Field>, a: f64, h: f64) -> Result<Field> {
    Ok((&op(a + h)? - &op(a - h)?).scale(0.5 / h))
}

fn central2(op: impl Fn(f64) -> Result<Field>, a: f64, h: f64) -> Result<Field> {
    let mid = op(a)?.scale(2.0);
    Ok((&(&op(a + h)? - &mid) + &op(a - h)?).scale(1.0 / (h * h)))
}

fn identity_errors(f: &Field, alpha: f64, id: Identity, h: f64) -> Result<(f64, f64, Option<f64>)> {
    let quad = Quadrature::for_grid(f.grid());
    let s_op = |a: f64| apply(DiffOpKind::SSym, f, a);
    let d_op = |a: f64| apply(DiffOpKind::DSym, f, a);
    let err = |h: f64| -> Result<f64> {
        Ok(match id {
            Identity::Ds => ds_dalpha_closed(f, alpha)?.sup_distance(&central1(s_op, alpha, h)?),
            Identity::Dds => d2s_dalpha_closed(f, alpha, &quad)?.sup_distance(&central2(s_op, alpha, h)?),
            Identity::Dd => dd_dalpha_closed(f, alpha, &quad)?.sup_distance(&central1(d_op, alpha, h)?),
            Identity::Ddd => d2d_dalpha_closed(f, alpha, &quad)?.sup_distance(&central2(d_op, alpha, h)?),
            Identity::Eta => {
                let fx = derivative(f);
                let lhs = &fx.scale(2.0) - &apply(DiffOpKind::DSym, f, alpha)?;
                eta_integral(&fx, alpha, &quad)?.sup_distance(&lhs)
            }
        })
    };
    if id == Identity::Eta {
        let e = err(h)?;
        return Ok((e, e, None));
    }
    let coarse = err(h)?;
    let fine = err(h / 2.0)?;
    Ok((coarse, fine, Some(coarse / fine)))
}

/// Closed-form α-derivatives against central differences in α at two
/// steps, the second half the first. A row passes when the finer error is
/// within `tol` and the error drops by at least `min_ratio` (second order).
pub fn identities(alphas: &[f64], s: &IdentitySettings) -> Result<Vec<IdentityRow>> {
    let grid = Grid::new(s.n, 2.0 * PI)?;
    let mut rows = Vec::new();
    for (name, top, f) in identity_fields(&grid)? {
        let h = s.h / f64::from(top);
        for &alpha in alphas {
            for id in Identity::ALL {
                let outcome = identity_errors(&f, alpha, id, h).map_err(|e| e.to_string());
                let pass = match &outcome {
                    Ok((_, fine, ratio)) => *fine <= s.tol && ratio.is_none_or(|r| r >= s.min_ratio),
                    Err(_) => false,
                };
                rows.push(IdentityRow { field: name, alpha, identity: id, outcome, pass });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct Equivalence {
    /// `(n_alpha, relative L² mismatch)` per refinement level.
    pub levels: Vec<(usize, f64)>,
    /// L² size of each oscillatory-form term at the finest level.
    pub breakdown: Vec<(&'static str, f64)>,
    pub decreasing: bool,
    pub pass: bool,
}

fn l2(f: &Field) -> Result<f64> {
    sobolev(f, 0.0)
}

/// Relative mismatch between the slope form and the oscillatory form over
/// `refinements` quadrature levels. Passes when the finest mismatch is at
/// most `tol` and the sequence strictly decreases (or is identically zero).
pub fn equivalence(f: &Field, sigma: f64, refinements: usize, tol: f64) -> Result<Equivalence> {
    let params = Params::new(sigma, 0.0)?;
    let mut quad = Quadrature::for_grid(f.grid());
    let mut levels = Vec::new();
    let mut breakdown = Vec::new();
    for level in 0..refinements.max(1) {
        if level > 0 {
            quad = quad.refined();
        }
        let cp1 = rhs_cp1(f, &params, &quad)?;
        let nf = rhs_nf(f, sigma, &quad)?;
        let diff = l2(&(&nf.total - &cp1))?;
        let scale = l2(&cp1)?;
        let mismatch = if diff == 0.0 { 0.0 } else { diff / scale };
        levels.push((quad.n_alpha, mismatch));
        breakdown = nf.terms().iter().map(|(name, t)| Ok((*name, l2(t)?))).collect::<Result<_>>()?;
    }
    let all_zero = levels.iter().all(|&(_, m)| m == 0.0);
    let decreasing = all_zero || levels.windows(2).all(|w| w[1].1 < w[0].1);
    let finest = levels.last().map_or(f64::INFINITY, |l| l.1);
    Ok(Equivalence { pass: decreasing && finest <= tol, levels, breakdown, decreasing })
}

#[derive(Debug, Clone)]
pub struct InterpolationRow {
    pub s1: f64,
    pub s2: f64,
    pub theta: f64,
    pub passed: usize,
    pub total: usize,
    /// Largest `lhs / rhs − 1` over the random samples.
    pub worst_excess: f64,
    /// Largest `|lhs / rhs − 1|` over single modes, where equality holds.
    pub single_mode_gap: f64,
}

pub const INTERP_TRIPLES: [(f64, f64, f64); 3] = [(1.5, 3.0, 0.5), (1.5, 3.0, 2.0 / 3.0), (0.0, 1.5, 0.5)];

/// Tolerance on single-mode equality.
pub const SINGLE_MODE_TOL: f64 = 1e-12;

/// A trigonometric polynomial with 1–16 random modes, random amplitudes
/// spanning four decades and random phases.
pub fn random_trig_poly(grid: &Grid, rng: &mut ChaCha8Rng) -> Result<Field> {
    let modes = rng.gen_range(1..=16);
    let terms: Vec<(f64, f64, f64)> = (0..modes)
        .map(|_| {
            let k = rng.gen_range(1..=grid.n_points() as i64 / 4) as f64;
            let amp = 10f64.powf(rng.gen_range(-2.0..2.0));
            (k, amp, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    Field::sample(grid, |x| terms.iter().map(|&(k, a, p)| a * (k * x + p).sin()).sum())
}

pub fn interpolation(samples: usize, seed: u64) -> Result<Vec<InterpolationRow>> {
    let grid = Grid::new(128, 2.0 * PI)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: Vec<Field> = (0..samples).map(|_| random_trig_poly(&grid, &mut rng)).collect::<Result<_>>()?;
    let modes: Vec<Field> =
        [1.0, 2.0, 7.0, 31.0].iter().map(|&k| Field::sample(&grid, |x| 0.3 * (k * x).cos())).collect::<Result<_>>()?;
    INTERP_TRIPLES
        .iter()
        .map(|&(s1, s2, theta)| {
            let mut passed = 0;
            let mut worst_excess = f64::NEG_INFINITY;
            for f in &fields {
                let c = interp_check(f, s1, s2, theta)?;
                passed += usize::from(c.ok);
                worst_excess = worst_excess.max(c.lhs / c.rhs - 1.0);
            }
            let mut single_mode_gap: f64 = 0.0;
            for f in &modes {
                let c = interp_check(f, s1, s2, theta)?;
                single_mode_gap = single_mode_gap.max((c.lhs / c.rhs - 1.0).abs());
            }
            Ok(InterpolationRow { s1, s2, theta, passed, total: samples, worst_excess, single_mode_gap })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RateRow {
    pub k: u32,
    pub sigma: f64,
    pub g_rho: f64,
    pub fitted: f64,
    pub predicted: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone)]
pub struct LinearSymbol {
    pub rows: Vec<RateRow>,
    /// `−rate / (gρ k)` for the gravity-only runs, per k.
    pub gravity_constants: Vec<f64>,
    /// `max / min − 1` of `gravity_constants`.
    pub gravity_spread: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Least-squares growth rate of the single mode `amp·sin kx`: the projection
/// of the slope-form right-hand side onto the mode.
pub fn fitted_rate(grid: &Grid, k: u32, amp: f64, params: &Params, quad: &Quadrature) -> Result<f64> {
    let f = Field::sample(grid, |x| amp * (k as f64 * x).sin())?;
    let r = rhs_cp1(&f, params, quad)?;
    Ok(r.inner(&f) / f.inner(&f))
}

/// Rates for `k = 1..=k_max` at each surface tension, plus gravity-only
/// rates. Surface-tension rows must be within `tol` of `−σk³`; the gravity
/// constant must vary by less than `tol` across `k`.
pub fn linear_symbol_table(k_max: u32, sigmas: &[f64], amp: f64, tol: f64) -> Result<LinearSymbol> {
    let n = (4 * k_max as usize).next_power_of_two().max(64);
    let grid = Grid::new(n, 2.0 * PI)?;
    let quad = Quadrature::for_grid(&grid);
    let mut rows = Vec::new();
    for &sigma in sigmas {
        let params = Params::new(sigma, 0.0)?;
        for k in 1..=k_max {
            let fitted = fitted_rate(&grid, k, amp, &params, &quad)?;
            let predicted = linear_symbol(&params, k as f64, 1.0);
            rows.push(RateRow { k, sigma, g_rho: 0.0, fitted, predicted, rel_err: (fitted / predicted - 1.0).abs() });
        }
    }
    let gravity = Params::new(0.0, 1.0)?;
    let gravity_constants: Vec<f64> =
        (1..=k_max).map(|k| Ok(-fitted_rate(&grid, k, amp, &gravity, &quad)? / k as f64)).collect::<Result<_>>()?;
    let (lo, hi) = gravity_constants.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &c| (l.min(c), h.max(c)));
    let gravity_spread = hi / lo - 1.0;
    let pass = rows.iter().all(|r| r.rel_err <= tol) && gravity_spread <= tol;
    Ok(LinearSymbol { rows, gravity_constants, gravity_spread, tol, pass })
}

#[derive(Debug, Clone)]
pub struct MonitorVerdict {
    pub inequality: InequalityCheck<f64>,
    pub gate_held: bool,
    pub first_violation: Option<f64>,
    /// Index and size of the first rise of the Ḣ^{3/2} norm beyond the slack.
    pub rise: Option<(usize, f64)>,
    pub pass: bool,
}

/// Inequality check with constant `k` over a saved series, plus the
/// smallness gate and monotonicity of the Ḣ^{3/2} norm (both informative).
pub fn monitor(reports: &[NormReport], k: f64, slack: f64) -> Result<MonitorVerdict> {
    let inequality = check_inequality(reports, k)?;
    let gate = smallness_gate(reports);
    Ok(MonitorVerdict {
        pass: inequality.ok,
        inequality,
        gate_held: gate.held_throughout,
        first_violation: gate.first_violation,
        rise: monotone_violation(reports, slack),
    })
}
