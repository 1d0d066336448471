//! Exponential time differencing for `f_t = RHS(f)`.
//!
//! The stiff linear part `L = −σΛ³ − c_g gρ Λ` is integrated exactly; the
//! remainder `N(f) = RHS(f) − L f` is treated with the second-order
//! Cox–Matthews scheme (ETD-RK2):
//!
//! ```text
//! a     = e^{Lh} c + h φ₁(Lh) N(c)
//! c_new = a + h φ₂(Lh) (N(a) − N(c))
//! ```

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::grid::PeriodicGrid;
use crate::monitor::{energy_report_from_rhs, EnergyReport};
use crate::norms::{BesovRule, NormReport, DEFAULT_SMALLNESS_C};
use crate::quadrature::QuadratureSpec;
use crate::real::Real;
use crate::rhs::{rhs, Formulation, PhysicalParams};

/// Factor beyond the initial norms at which a run is declared blown up.
pub const BLOW_UP_FACTOR: f64 = 1e6;

/// `−σ|k|³ − c_g gρ |k|`.
pub fn linear_symbol<T: Real>(params: &PhysicalParams<T>, k: T, c_g: T) -> T {
    let a = k.abs();
    -params.sigma * a * a * a - c_g * params.g_rho * a
}

#[derive(Debug, Clone)]
pub struct SimConfig<T: Real> {
    pub params: PhysicalParams<T>,
    pub grid: PeriodicGrid<T>,
    pub quad: QuadratureSpec<T>,
    pub besov: BesovRule<T>,
    pub dt: T,
    /// Time attached to the initial data; nonzero when resuming.
    pub t_start: T,
    pub t_end: T,
    pub formulation: Formulation,
    pub report_every: usize,
    pub seed: u64,
    /// When set, `dt` must not exceed `c / (σ k_max³ + |gρ| k_max + ε)`.
    pub stability_c: Option<T>,
    /// Gravity linearization constant used by [`linear_symbol`].
    pub gravity_constant: T,
    pub smallness_c: T,
    /// Keep a copy of the field every this many steps.
    pub snapshot_every: Option<usize>,
    /// Stop when the smallness functional crosses 1 from below.
    pub halt_on_smallness: bool,
}

impl<T: Real> SimConfig<T> {
    pub fn new(grid: PeriodicGrid<T>, params: PhysicalParams<T>, dt: T, t_end: T) -> Self {
        Self {
            quad: QuadratureSpec::for_grid(&grid),
            besov: BesovRule::for_grid(&grid),
            params,
            grid,
            dt,
            t_start: T::zero(),
            t_end,
            formulation: Formulation::Cp1,
            report_every: 10,
            seed: 0,
            stability_c: None,
            gravity_constant: T::one(),
            smallness_c: T::lit(DEFAULT_SMALLNESS_C),
            snapshot_every: None,
            halt_on_smallness: true,
        }
    }

    pub fn stability_cap(&self, c: T) -> T {
        let k = self.grid.k_max();
        c / (self.params.sigma * k * k * k + self.params.g_rho.abs() * k + T::epsilon())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.quad.validate()?;
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return invalid("dt must be positive");
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return invalid("t_end must be positive");
        }
        if !(self.t_start >= T::zero() && self.t_start < self.t_end) {
            return invalid("t_start must lie in [0, t_end)");
        }
        if self.report_every == 0 {
            return invalid("report_every must be positive");
        }
        if !(self.smallness_c > T::zero()) {
            return invalid("smallness_C must be positive");
        }
        if self.snapshot_every == Some(0) {
            return invalid("snapshot_every must be positive");
        }
        if let Some(c) = self.stability_c {
            let cap = self.stability_cap(c);
            if self.dt > cap {
                return invalid(format!("dt = {} exceeds the stability cap {}", self.dt, cap));
            }
        }
        Ok(())
    }

    /// Number of steps and the effective step that lands exactly on `t_end`.
    pub fn schedule(&self) -> (usize, T) {
        let span = self.t_end - self.t_start;
        let ratio = (span / self.dt).to_f64_lossy();
        let steps = ((ratio - 1e-9).ceil() as usize).max(1);
        (steps, span / T::from_count(steps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    SmallnessCrossed,
    NormExplosion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Halt<T: Real> {
    pub step: usize,
    pub time: T,
    pub reason: HaltReason,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub reports: Vec<NormReport<T>>,
    pub energy: Vec<EnergyReport<T>>,
    pub final_field: ScalarField<T>,
    pub snapshots: Vec<(T, ScalarField<T>)>,
    pub steps: usize,
    pub halt: Option<Halt<T>>,
    /// `max_t |mean f(t) − mean f₀|` over the reports.
    pub mean_drift: T,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError<T: Real> {
    #[error("blow-up detected at t = {time} (step {step})")]
    BlowUp { step: usize, time: T, last_report: Option<NormReport<T>>, trajectory: Box<Trajectory<T>> },
    #[error(transparent)]
    Core(#[from] Error),
}

/// `φ₁(z) = (e^z − 1)/z`, `φ₂(z) = (e^z − 1 − z)/z²`.
fn phi<T: Real>(z: T) -> (T, T) {
    if z.abs() < T::lit(1e-3) {
        let z2 = z * z;
        let z3 = z2 * z;
        let phi1 = T::one() + z / T::lit(2.0) + z2 / T::lit(6.0) + z3 / T::lit(24.0);
        let phi2 = T::lit(0.5) + z / T::lit(6.0) + z2 / T::lit(24.0) + z3 / T::lit(120.0);
        (phi1, phi2)
    } else {
        let em1 = z.exp_m1();
        (em1 / z, (em1 - z) / (z * z))
    }
}

/// Mode-wise propagator coefficients for one step of length `h`.
struct Propagator<T: Real> {
    lin: Vec<T>,
    exp: Vec<T>,
    phi1: Vec<T>,
    phi2: Vec<T>,
    h: T,
}

impl<T: Real> Propagator<T> {
    fn new(grid: &PeriodicGrid<T>, params: &PhysicalParams<T>, c_g: T, h: T) -> Self {
        let lin: Vec<T> = grid.wavenumbers().iter().map(|&k| linear_symbol(params, k, c_g)).collect();
        let mut exp = Vec::with_capacity(lin.len());
        let mut phi1 = Vec::with_capacity(lin.len());
        let mut phi2 = Vec::with_capacity(lin.len());
        for &l in &lin {
            let z = l * h;
            let (p1, p2) = phi(z);
            exp.push(z.exp());
            phi1.push(p1);
            phi2.push(p2);
        }
        Self { lin, exp, phi1, phi2, h }
    }

    /// `N̂ = R̂ − L ĉ`.
    fn nonlinear(&self, c: &[Complex<T>], r: &[Complex<T>]) -> Vec<Complex<T>> {
        c.iter().zip(r).zip(&self.lin).map(|((&c, &r), &l)| r - c * l).collect()
    }

    fn step(
        &self,
        f: &ScalarField<T>,
        r_f: &ScalarField<T>,
        nonlinear_at: impl Fn(&ScalarField<T>) -> Result<ScalarField<T>>,
    ) -> Result<ScalarField<T>> {
        let grid = f.grid();
        let c = f.spectral();
        let n_c = self.nonlinear(c, r_f.spectral());
        let a: Vec<Complex<T>> = (0..c.len()).map(|j| c[j] * self.exp[j] + n_c[j] * (self.h * self.phi1[j])).collect();
        let a_field = ScalarField::from_spectrum_unchecked(grid, a);
        let r_a = nonlinear_at(&a_field)?;
        let n_a = self.nonlinear(a_field.spectral(), r_a.spectral());
        let a = a_field.spectral();
        let out: Vec<Complex<T>> = (0..c.len()).map(|j| a[j] + (n_a[j] - n_c[j]) * (self.h * self.phi2[j])).collect();
        Ok(ScalarField::from_spectrum_unchecked(grid, out))
    }
}

/// One ETD-RK2 step of length `cfg.dt`.
pub fn step<T: Real>(f: &ScalarField<T>, cfg: &SimConfig<T>) -> Result<ScalarField<T>> {
    cfg.validate()?;
    let eval = |g: &ScalarField<T>| rhs(g, &cfg.params, &cfg.quad, cfg.formulation);
    let r = eval(f)?;
    let out = Propagator::new(&cfg.grid, &cfg.params, cfg.gravity_constant, cfg.dt).step(f, &r, eval)?;
    if !out.is_finite() {
        return Err(Error::InvalidArgument("blow-up detected: non-finite state after step".into()));
    }
    Ok(out)
}

/// One step with a caller-supplied right-hand side, e.g. the bare linear
/// operator to exercise the propagator.
pub fn step_with<T: Real>(
    f: &ScalarField<T>,
    cfg: &SimConfig<T>,
    rhs_fn: impl Fn(&ScalarField<T>) -> Result<ScalarField<T>>,
) -> Result<ScalarField<T>> {
    let r = rhs_fn(f)?;
    Propagator::new(&cfg.grid, &cfg.params, cfg.gravity_constant, cfg.dt).step(f, &r, rhs_fn)
}

/// The linear part `L f` as a field.
pub fn linear_part<T: Real>(f: &ScalarField<T>, params: &PhysicalParams<T>, c_g: T) -> ScalarField<T> {
    crate::spectral::apply_real_symbol(f, |k| linear_symbol(params, k, c_g))
}

/// Integrates to `t_end`, reporting at step 0, every `report_every` steps
/// and at the end.
pub fn run<T: Real>(cfg: &SimConfig<T>, f0: &ScalarField<T>) -> std::result::Result<Trajectory<T>, RunError<T>> {
    cfg.validate()?;
    if !f0.same_grid(&ScalarField::zeros(&cfg.grid)) {
        return Err(Error::GridMismatch.into());
    }
    if !f0.is_finite() {
        return Err(Error::InvalidArgument("initial data is not finite".into()).into());
    }
    let (n_steps, h) = cfg.schedule();
    let eval = |g: &ScalarField<T>| rhs(g, &cfg.params, &cfg.quad, cfg.formulation);
    let prop = Propagator::new(&cfg.grid, &cfg.params, cfg.gravity_constant, h);
    let mean0 = f0.mean();
    let mut traj = Trajectory {
        times: Vec::new(),
        reports: Vec::new(),
        energy: Vec::new(),
        final_field: f0.clone(),
        snapshots: Vec::new(),
        steps: 0,
        halt: None,
        mean_drift: T::zero(),
    };
    let mut f = f0.clone();
    let mut initial: Option<NormReport<T>> = None;
    for i in 0..=n_steps {
        let t = cfg.t_start + T::from_count(i) * h;
        let r = eval(&f)?;
        if i % cfg.report_every == 0 || i == n_steps {
            let report = NormReport::compute(&f, t, cfg.smallness_c, &cfg.besov)?;
            let energy = energy_report_from_rhs(&f, &r, &cfg.params, &report);
            let prev_small = traj.reports.last().map(|p| p.smallness);
            traj.times.push(t);
            traj.reports.push(report);
            traj.energy.push(energy);
            traj.mean_drift = traj.mean_drift.max((f.mean() - mean0).abs());
            let init = *initial.get_or_insert(report);
            if exploded(&report, &init) {
                traj.halt = Some(Halt { step: i, time: t, reason: HaltReason::NormExplosion });
                traj.final_field = f;
                traj.steps = i;
                return Err(RunError::BlowUp {
                    step: i,
                    time: t,
                    last_report: Some(report),
                    trajectory: Box::new(traj),
                });
            }
            if cfg.halt_on_smallness && prev_small.is_some_and(|p| p < T::one()) && report.smallness >= T::one() {
                traj.halt = Some(Halt { step: i, time: t, reason: HaltReason::SmallnessCrossed });
                traj.final_field = f;
                traj.steps = i;
                return Ok(traj);
            }
        }
        if cfg.snapshot_every.is_some_and(|s| i % s == 0) {
            traj.snapshots.push((t, f.clone()));
        }
        if i == n_steps {
            break;
        }
        let next = prop.step(&f, &r, eval)?;
        if !next.is_finite() {
            let last_report = traj.reports.last().copied();
            let time = cfg.t_start + T::from_count(i + 1) * h;
            traj.halt = Some(Halt { step: i + 1, time, reason: HaltReason::NormExplosion });
            traj.final_field = f;
            traj.steps = i;
            return Err(RunError::BlowUp { step: i + 1, time, last_report, trajectory: Box::new(traj) });
        }
        f = next;
    }
    traj.final_field = f;
    traj.steps = n_steps;
    Ok(traj)
}

fn exploded<T: Real>(now: &NormReport<T>, init: &NormReport<T>) -> bool {
    if !now.is_finite() {
        return true;
    }
    let factor = T::lit(BLOW_UP_FACTOR);
    [(now.l2, init.l2), (now.h32, init.h32), (now.h3, init.h3)].iter().any(|&(v, v0)| v0 > T::zero() && v > factor * v0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::sobolev;
    use std::f64::consts::PI;

    fn grid(n: usize) -> PeriodicGrid<f64> {
        PeriodicGrid::new(n, 2.0 * PI).unwrap()
    }

    fn quick_cfg(g: &PeriodicGrid<f64>, sigma: f64, dt: f64, t_end: f64) -> SimConfig<f64> {
        let mut cfg = SimConfig::new(g.clone(), PhysicalParams::new(sigma, 0.0).unwrap(), dt, t_end);
        cfg.quad.n_alpha = 256;
        cfg.besov.n_alpha = 128;
        cfg
    }

    #[test]
    fn linear_symbol_examples() {
        let p = PhysicalParams::new(1.0, 0.0).unwrap();
        assert_eq!(linear_symbol(&p, 2.0, 1.0), -8.0);
        assert_eq!(linear_symbol(&p, 0.0, 1.0), 0.0);
        let p = PhysicalParams::new(0.5, 2.0).unwrap();
        assert_eq!(linear_symbol(&p, -2.0, 1.5), -4.0 - 6.0);
    }

    #[test]
    fn phi_functions_are_continuous() {
        for z in [-1e-3f64, 1e-3, -0.5, -40.0] {
            let (a1, a2) = phi(z);
            let (b1, b2) = phi(z * (1.0 + 1e-12));
            assert!((a1 - b1).abs() < 1e-10 && (a2 - b2).abs() < 1e-10);
        }
        let (p1, p2) = phi(-0.999e-3f64);
        let z = -0.999e-3f64;
        assert!((p1 - z.exp_m1() / z).abs() < 1e-13);
        assert!((p2 - (z.exp_m1() - z) / (z * z)).abs() < 1e-9);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let g = grid(32);
        let cfg = quick_cfg(&g, 1.0, 1e-2, 1.0);
        let z = ScalarField::zeros(&g);
        assert_eq!(step(&z, &cfg).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn linear_propagator_is_exact() {
        let g = grid(64);
        let cfg = quick_cfg(&g, 1.0, 0.05, 1.0);
        let f = ScalarField::sample(&g, |x| x.sin() + 0.3 * (2.0 * x).cos() + 0.01 * (5.0 * x).sin()).unwrap();
        let lin = |h: &ScalarField<f64>| Ok(linear_part(h, &cfg.params, 1.0));
        let mut state = f.clone();
        for _ in 0..20 {
            state = step_with(&state, &cfg, lin).unwrap();
        }
        let want = ScalarField::sample(&g, |x| {
            (-1.0f64).exp() * x.sin()
                + 0.3 * (-8.0f64).exp() * (2.0 * x).cos()
                + 0.01 * (-125.0f64).exp() * (5.0 * x).sin()
        })
        .unwrap();
        assert!(state.sup_distance(&want) < 1e-12, "{}", state.sup_distance(&want));
    }

    #[test]
    fn schedule_lands_on_t_end() {
        let g = grid(16);
        let cfg = quick_cfg(&g, 1.0, 0.3, 1.0);
        let (n, h) = cfg.schedule();
        assert_eq!(n, 4);
        assert_eq!(h, 0.25);
        let cfg = quick_cfg(&g, 1.0, 0.01, 1.0);
        assert_eq!(cfg.schedule().0, 100);
    }

    #[test]
    fn config_validation() {
        let g = grid(64);
        let mut cfg = quick_cfg(&g, 1.0, 0.0, 1.0);
        assert_eq!(cfg.validate().unwrap_err().to_string(), "dt must be positive");
        cfg.dt = 1e-2;
        cfg.stability_c = Some(1.0);
        assert!(cfg.validate().unwrap_err().to_string().contains("stability cap"));
        cfg.dt = cfg.stability_cap(1.0);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn zero_data_gives_zero_reports() {
        let g = grid(32);
        let mut cfg = quick_cfg(&g, 1.0, 0.05, 0.5);
        cfg.report_every = 2;
        let traj = run(&cfg, &ScalarField::zeros(&g)).unwrap();
        assert_eq!(traj.times.len(), 6);
        for r in &traj.reports {
            assert_eq!((r.l2, r.h32, r.h3, r.smallness), (0.0, 0.0, 0.0, 0.0));
        }
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn small_single_mode_decays_like_linear_theory() {
        let g = grid(32);
        let mut cfg = quick_cfg(&g, 1.0, 0.01, 0.5);
        cfg.report_every = 10;
        let eps = 1e-4;
        let f0 = ScalarField::sample(&g, |x| eps * x.sin()).unwrap();
        let traj = run(&cfg, &f0).unwrap();
        for r in &traj.reports {
            let want = (-r.time).exp() * eps * PI.sqrt();
            assert!((r.l2 - want).abs() < 10.0 * eps * eps, "t = {}: {} vs {}", r.time, r.l2, want);
        }
    }

    #[test]
    fn second_order_self_convergence() {
        let g = grid(32);
        let f0 = ScalarField::sample(&g, |x| 0.1 * x.sin()).unwrap();
        let solve = |dt: f64| {
            let cfg = quick_cfg(&g, 1.0, dt, 0.2);
            run(&cfg, &f0).unwrap().final_field
        };
        let a = solve(0.04);
        let b = solve(0.02);
        let c = solve(0.01);
        let order = ((sobolev(&(&a - &b), 0.0).unwrap()) / sobolev(&(&b - &c), 0.0).unwrap()).log2();
        assert!(order >= 1.9, "observed order {order}");
    }

    #[test]
    fn explosion_detector() {
        let r0 = NormReport { l2: 1.0, h32: 1.0, h3: 1.0, ..Default::default() };
        let r1 = NormReport { l2: 2e6, h32: 1.0, h3: 1.0, ..Default::default() };
        assert!(exploded(&r1, &r0));
        assert!(!exploded(&r0, &r0));
        let nan = NormReport { l2: f64::NAN, ..Default::default() };
        assert!(exploded(&nan, &r0));
    }

    #[test]
    fn resuming_continues_the_same_trajectory() {
        let g = grid(32);
        let f0 = ScalarField::sample(&g, |x| 0.1 * x.sin() + 0.02 * (3.0 * x).cos()).unwrap();
        let whole = run(&quick_cfg(&g, 1.0, 0.02, 0.4), &f0).unwrap();
        let first = run(&quick_cfg(&g, 1.0, 0.02, 0.2), &f0).unwrap();
        let mut cfg = quick_cfg(&g, 1.0, 0.02, 0.4);
        cfg.t_start = 0.2;
        let second = run(&cfg, &first.final_field).unwrap();
        assert_eq!(second.steps, 10);
        assert!((second.times[0] - 0.2).abs() < 1e-15);
        assert_eq!(second.final_field.values(), whole.final_field.values());
    }
}
