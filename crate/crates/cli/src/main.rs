use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use muskat_cli::driver::{self, RunArgs};
use muskat_cli::verify::{self, IdentitySettings};
use muskat_cli::{CliError, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
use muskat_core::fieldspec::FieldSpec;
use muskat_core::norms::DEFAULT_SMALLNESS_C;
use muskat_core::{BesovRule, Grid, NormReport};
use muskat_io::{load_snapshot, read_timeseries};

/// Muskat interface solver with surface tension: simulation, diagnostics and
/// self-verification.
#[derive(Debug, Parser)]
#[command(name = "muskat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a configuration and write the time series, snapshots and a
    /// summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Start from this snapshot (its time becomes the start time).
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long, default_value = "muskat-out")]
        out: PathBuf,
    },
    /// Closed-form α-derivatives of the difference operators against direct
    /// differencing in α.
    VerifyIdentities {
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.25, 0.5, 1.0])]
        alphas: Vec<f64>,
        /// Coarse α-step for unit wavenumber, divided by each field's
        /// highest mode; the fine step is half of it.
        #[arg(long, default_value_t = 8e-3)]
        h: f64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 3.5)]
        min_ratio: f64,
    },
    /// Slope form against the oscillatory-integral form under quadrature
    /// refinement.
    VerifyEquivalence {
        #[arg(long, default_value = "0.2*sin(x) + 0.05*sin(3x)")]
        field: String,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 3)]
        refinements: usize,
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Allowed relative mismatch at the finest level; raise it for steep
        /// fields.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sobolev interpolation inequalities on random trigonometric polynomials.
    VerifyInterpolation {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Growth rates of small single modes against the linear symbol.
    LinearSymbol {
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        sigma: Vec<f64>,
        #[arg(long, default_value_t = 1e-6)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
    /// Integrated critical-norm inequality over a saved time series.
    Monitor {
        #[arg(long)]
        series: PathBuf,
        #[arg(long = "K")]
        k: f64,
        /// Allowed per-report rise of the Ḣ^{3/2} norm.
        #[arg(long, default_value_t = 1e-8)]
        slack: f64,
    },
    /// Norm report of a snapshot.
    Norms {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SMALLNESS_C)]
        smallness_c: f64,
    },
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn code(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run { config, resume, out } => {
            let outcome = driver::execute(&RunArgs { config, resume, out })?;
            print!("{}", outcome.summary);
            println!("series written to {}", outcome.series.display());
            Ok(if outcome.blew_up { EXIT_FAIL } else { EXIT_OK })
        }
        Command::VerifyIdentities { n, alphas, h, tol, min_ratio } => {
            if alphas.is_empty() {
                return Err(CliError::Usage("--alphas needs at least one value".into()));
            }
            let settings = IdentitySettings { n, h, tol, min_ratio };
            let rows = verify::identities(&alphas, &settings)?;
            println!(
                "{:<20} {:>8} {:<8} {:>12} {:>12} {:>8}  verdict",
                "field", "alpha", "identity", "err(h)", "err(h/2)", "ratio"
            );
            let mut bad_rows = 0;
            for r in &rows {
                match &r.outcome {
                    Ok((coarse, fine, ratio)) => {
                        let ratio = ratio.map_or("-".to_string(), |x| format!("{x:.3}"));
                        println!(
                            "{:<20} {:>8} {:<8} {:>12.3e} {:>12.3e} {:>8}  {}",
                            r.field,
                            r.alpha,
                            r.identity.name(),
                            coarse,
                            fine,
                            ratio,
                            verdict(r.pass)
                        );
                    }
                    Err(e) => {
                        bad_rows += 1;
                        println!("{:<20} {:>8} {:<8} error: {e}", r.field, r.alpha, r.identity.name());
                    }
                }
            }
            let max_err = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).map(|o| o.1).fold(0.0f64, f64::max);
            let pass = rows.iter().all(|r| r.pass);
            println!("max error {max_err:.3e} (tolerance {tol:.1e}, minimum ratio {min_ratio}): {}", verdict(pass));
            if bad_rows > 0 {
                eprintln!("note: {bad_rows} rows could not be evaluated; every alpha must be nonzero");
                return Ok(EXIT_USAGE);
            }
            Ok(code(pass))
        }
        Command::VerifyEquivalence { field, sigma, refinements, n, tol, seed } => {
            let spec = FieldSpec::parse(&field).map_err(|e| CliError::Usage(e.to_string()))?;
            let grid = Grid::new(n, 2.0 * PI).map_err(|e| CliError::Usage(e.to_string()))?;
            let f = spec.sample(&grid, seed)?;
            let e = verify::equivalence(&f, sigma, refinements, tol)?;
            println!("{:>8} {:>14}", "n_alpha", "mismatch");
            for (n_alpha, m) in &e.levels {
                println!("{n_alpha:>8} {m:>14.6e}");
            }
            println!("term magnitudes (L2) at the finest level:");
            for (name, v) in &e.breakdown {
                println!("  {name:<14} {v:.6e}");
            }
            println!(
                "decreasing: {}, finest {:.3e} vs tolerance {tol:.1e}: {}",
                e.decreasing,
                e.levels.last().map_or(f64::NAN, |l| l.1),
                verdict(e.pass)
            );
            Ok(code(e.pass))
        }
        Command::VerifyInterpolation { samples, seed } => {
            let rows = verify::interpolation(samples, seed)?;
            println!(
                "{:>6} {:>6} {:>8} {:>10} {:>14} {:>14}  verdict",
                "s1", "s2", "theta", "passed", "worst excess", "single-mode"
            );
            let mut pass = true;
            for r in &rows {
                let ok = r.passed == r.total && r.single_mode_gap <= verify::SINGLE_MODE_TOL;
                pass &= ok;
                println!(
                    "{:>6} {:>6} {:>8.4} {:>10} {:>14.3e} {:>14.3e}  {}",
                    r.s1,
                    r.s2,
                    r.theta,
                    format!("{}/{}", r.passed, r.total),
                    r.worst_excess,
                    r.single_mode_gap,
                    verdict(ok)
                );
            }
            Ok(code(pass))
        }
        Command::LinearSymbol { k_max, sigma, amplitude, tol } => {
            if k_max == 0 || sigma.is_empty() {
                return Err(CliError::Usage("need --k-max ≥ 1 and at least one sigma".into()));
            }
            let t = verify::linear_symbol_table(k_max, &sigma, amplitude, tol)?;
            println!("{:>4} {:>6} {:>14} {:>14} {:>10}", "k", "sigma", "fitted", "-sigma k^3", "rel err");
            for r in &t.rows {
                println!("{:>4} {:>6} {:>14.6e} {:>14.6e} {:>10.2e}", r.k, r.sigma, r.fitted, r.predicted, r.rel_err);
            }
            println!("gravity-only constants c_g per k:");
            for (k, c) in t.gravity_constants.iter().enumerate() {
                println!("{:>4} {c:>14.8}", k + 1);
            }
            println!("c_g spread {:.2e}, tolerance {:.1e}: {}", t.gravity_spread, t.tol, verdict(t.pass));
            Ok(code(t.pass))
        }
        Command::Monitor { series, k, slack } => {
            let records = read_timeseries(&series)?;
            let reports: Vec<NormReport> = records.iter().map(|r| r.norm_report()).collect();
            let v = verify::monitor(&reports, k, slack).map_err(|e| CliError::Usage(e.to_string()))?;
            let i = &v.inequality;
            println!("reports: {}", reports.len());
            println!(
                "integrated inequality with K = {k}: {} (required K {:.6e}, worst margin {:.6e} at t = {})",
                verdict(i.ok),
                i.required_k,
                i.worst_margin,
                i.worst_time
            );
            match v.first_violation {
                None => println!("smallness gate: held throughout"),
                Some(t) => println!("smallness gate: violated at t = {t}"),
            }
            match v.rise {
                None => println!("H3/2 norm: non-increasing within {slack:.1e}"),
                Some((idx, rise)) => println!("H3/2 norm: rose by {rise:.3e} at report {idx}"),
            }
            Ok(code(v.pass))
        }
        Command::Norms { snapshot, smallness_c } => {
            let (f, meta) = load_snapshot(&snapshot)?;
            let rule = BesovRule::for_grid(f.grid());
            let r =
                NormReport::compute(&f, meta.time, smallness_c, &rule).map_err(|e| CliError::Usage(e.to_string()))?;
            println!("snapshot {} (n = {}, L = {}, t = {})", snapshot.display(), f.len(), f.grid().length(), meta.time);
            for (name, v) in [
                ("L2", r.l2),
                ("H3/2", r.h32),
                ("H3", r.h3),
                ("H5/2", r.h52),
                ("H4", r.h4),
                ("B1_inf_1", r.b1_inf_1),
                ("lip", r.lip),
                ("smallness", r.smallness),
                ("mean", f.mean()),
            ] {
                println!("{name:<10} {v:.16e}");
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    let status = match dispatch(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == EXIT_USAGE {
                eprintln!("run `muskat help` for usage");
            }
            e.exit_code()
        }
    };
    ExitCode::from(status as u8)
}
