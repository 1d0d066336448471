//! The `run` subcommand: configuration in, series, snapshots and a summary
//! out.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use muskat_core::monitor::{check_inequality, smallness_gate};
use muskat_core::parallel::{with_workers, WORKERS_ENV};
use muskat_core::timestep::{run, HaltReason, RunError};
use muskat_core::{Field, NormReport, Trajectory};
use muskat_io::snapshot::SnapshotMeta;
use muskat_io::{load_config, load_snapshot, save_snapshot, write_timeseries, RunConfig};

use crate::CliError;

/// Constant used for the realized-K verdict in the summary.
pub const SUMMARY_K: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub config: PathBuf,
    pub resume: Option<PathBuf>,
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub summary: String,
    pub series: PathBuf,
    pub blew_up: bool,
}

fn usage(e: muskat_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Worker count: `MUSKAT_THREADS` wins over the config's `threads`.
fn workers(cfg: &RunConfig) -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(Some(w)),
            _ => Err(CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}"))),
        },
        Err(_) => Ok(cfg.threads),
    }
}

fn initial_field(cfg: &mut RunConfig, resume: Option<&Path>) -> Result<Field, CliError> {
    let Some(path) = resume else {
        return cfg.initial.sample(&cfg.sim.grid, cfg.sim.seed).map_err(usage);
    };
    let (field, meta) = load_snapshot(path)?;
    let grid = &cfg.sim.grid;
    if field.len() != grid.n_points() || field.grid().length() != grid.length() {
        return Err(CliError::Usage(format!(
            "snapshot {} has n = {}, L = {} but the config asks for n = {}, L = {}",
            path.display(),
            field.len(),
            field.grid().length(),
            grid.n_points(),
            grid.length()
        )));
    }
    if meta.time >= cfg.sim.t_end {
        return Err(CliError::Usage(format!("snapshot time {} is not before t_end = {}", meta.time, cfg.sim.t_end)));
    }
    cfg.sim.t_start = meta.time;
    // Re-home the samples on the config's grid so later grid checks pass.
    Field::from_values(grid, field.into_values()).map_err(usage)
}

pub fn execute(args: &RunArgs) -> Result<RunOutcome, CliError> {
    let loaded = load_config(&args.config)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let mut cfg = loaded.config;
    let f0 = initial_field(&mut cfg, args.resume.as_deref())?;
    cfg.sim.validate().map_err(usage)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Output(format!("{}: {e}", args.out.display())))?;

    let result = match workers(&cfg)? {
        Some(w) => with_workers(w, || run(&cfg.sim, &f0))?,
        None => run(&cfg.sim, &f0),
    };
    let (traj, blow_up) = match result {
        Ok(t) => (t, None),
        Err(RunError::BlowUp { step, time, trajectory, .. }) => (*trajectory, Some((step, time))),
        Err(RunError::Core(e)) => return Err(e.into()),
    };

    let series = args.out.join(format!("series.{}", cfg.output_format.extension()));
    write_timeseries(&traj, &series, cfg.output_format)?;
    let meta = |time| SnapshotMeta { time, params: cfg.sim.params };
    for (i, (t, f)) in traj.snapshots.iter().enumerate() {
        save_snapshot(f, &meta(*t), args.out.join(format!("snapshot_{i:05}.bin")))?;
    }
    let final_time = traj.times.last().copied().unwrap_or(cfg.sim.t_start);
    save_snapshot(&traj.final_field, &meta(final_time), args.out.join("final.bin"))?;

    let summary = summarize(&cfg, &traj, blow_up);
    std::fs::write(args.out.join("summary.txt"), &summary)
        .map_err(|e| CliError::Output(format!("{}: {e}", args.out.display())))?;
    Ok(RunOutcome { summary, series, blew_up: blow_up.is_some() })
}

fn norm_line(out: &mut String, label: &str, r: &NormReport) {
    let _ = writeln!(
        out,
        "{label:<8} t = {:.6}  L2 = {:.6e}  H3/2 = {:.6e}  H3 = {:.6e}  B1 = {:.6e}  lip = {:.6e}  smallness = {:.6e}",
        r.time, r.l2, r.h32, r.h3, r.b1_inf_1, r.lip, r.smallness
    );
}

pub fn summarize(cfg: &RunConfig, traj: &Trajectory, blow_up: Option<(usize, f64)>) -> String {
    let mut s = String::new();
    let sim = &cfg.sim;
    let (steps, h) = sim.schedule();
    let _ = writeln!(
        s,
        "run: n = {}, L = {}, sigma = {}, g_rho = {}, formulation = {}, dt = {h} ({steps} steps from t = {} to {})",
        sim.grid.n_points(),
        sim.grid.length(),
        sim.params.sigma,
        sim.params.g_rho,
        sim.formulation,
        sim.t_start,
        sim.t_end
    );
    match blow_up {
        Some((step, time)) => {
            let _ = writeln!(s, "status: BLOW-UP at t = {time} (step {step})");
        }
        None => match &traj.halt {
            Some(halt) if halt.reason == HaltReason::SmallnessCrossed => {
                let _ = writeln!(s, "status: halted at t = {} (smallness functional reached 1)", halt.time);
            }
            _ => {
                let _ = writeln!(s, "status: completed {} steps", traj.steps);
            }
        },
    }
    if let (Some(first), Some(last)) = (traj.reports.first(), traj.reports.last()) {
        norm_line(&mut s, "initial", first);
        norm_line(&mut s, "final", last);
    }
    let gate = smallness_gate(&traj.reports);
    match gate.first_violation {
        None => {
            let _ = writeln!(s, "smallness gate: held throughout");
        }
        Some(t) => {
            let _ = writeln!(s, "smallness gate: violated at t = {t}");
        }
    }
    let k_max = traj.energy.iter().map(|e| e.k_required).fold(0.0f64, f64::max);
    let _ = writeln!(s, "K_required (pointwise energy balance, max over reports): {k_max:.6e}");
    if let Ok(check) = check_inequality(&traj.reports, SUMMARY_K) {
        let _ = writeln!(
            s,
            "integrated inequality with K = {SUMMARY_K}: {} (realized K_required = {:.6e}, worst margin {:.6e} at t = {})",
            if check.ok { "holds" } else { "fails" },
            check.required_k,
            check.worst_margin,
            check.worst_time
        );
    }
    let _ = writeln!(s, "mean drift: {:.3e}", traj.mean_drift);
    s
}
