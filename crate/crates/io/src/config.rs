//! Run configuration.
//!
//! A configuration is a flat TOML document (`key = value` per line, `#`
//! comments). `n`, `dt` and `t_end` are required; everything else has a
//! default. See the README for the full key table.

use std::path::Path;

use muskat_core::fieldspec::FieldSpec;
use muskat_core::norms::BesovMode;
use muskat_core::quadrature::{LaplaceMode, MIN_N_ALPHA};
use muskat_core::rhs::{Formulation, DEFAULT_MOBILITY};
use muskat_core::{BesovRule, Grid, Params, Quadrature, SimConfig};
use toml::{Table, Value};

use crate::error::{IoError, Result};
use crate::timeseries::Format;

/// Every key the loader understands.
pub const KNOWN_KEYS: &[&str] = &[
    "sigma",
    "g_rho",
    "mobility",
    "n",
    "length",
    "dt",
    "t_end",
    "formulation",
    "report_every",
    "seed",
    "initial",
    "alpha_min",
    "alpha_max",
    "n_alpha",
    "inner_order",
    "inner_panel",
    "laplace_mode",
    "laguerre_order",
    "besov_alpha_min",
    "besov_alpha_max",
    "besov_n_alpha",
    "besov_mode",
    "smallness_c",
    "stability_c",
    "gravity_constant",
    "snapshot_every",
    "halt_on_smallness",
    "output_format",
    "threads",
];

/// A simulation plus what the driver needs around it.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub initial: FieldSpec,
    pub output_format: Format,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    /// One message per unknown key or suspicious setting.
    pub warnings: Vec<String>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<LoadedConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1).unwrap_or(0);
        IoError::Parse { line, message: e.message().to_string() }
    })?;
    let mut warnings = Vec::new();
    for key in table.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            let hint = KNOWN_KEYS
                .iter()
                .find(|k| edit_distance(k, key) <= 2)
                .map(|k| format!(" (did you mean `{k}`?)"))
                .unwrap_or_default();
            warnings.push(format!("unknown key `{key}` ignored{hint}"));
        }
    }
    let keys = Keys(&table);

    let n = keys.required_count("n")?;
    if n < 4 || n % 2 != 0 {
        return Err(IoError::invalid("n", "n must be an even number of points ≥ 4"));
    }
    let length = keys.length()?.unwrap_or(2.0 * std::f64::consts::PI);
    let grid = Grid::new(n, length).map_err(|e| IoError::invalid("length", e.to_string()))?;

    let sigma = keys.non_negative("sigma")?.unwrap_or(1.0);
    let g_rho = keys.float("g_rho")?.unwrap_or(0.0);
    let mobility = keys.positive("mobility")?.unwrap_or(DEFAULT_MOBILITY);
    if sigma == 0.0 && g_rho == 0.0 {
        warnings.push("sigma and g_rho are both zero: the interface will not move".to_string());
    }
    if g_rho < 0.0 {
        warnings.push("g_rho < 0 is the unstable stratification: long waves grow".to_string());
    }
    let params = Params { sigma, g_rho, mobility };

    let dt = keys.positive("dt")?.ok_or_else(|| IoError::invalid("dt", "missing required key"))?;
    let t_end = keys.positive("t_end")?.ok_or_else(|| IoError::invalid("t_end", "missing required key"))?;

    let mut sim = SimConfig::new(grid.clone(), params, dt, t_end);
    if let Some(form) = keys.string("formulation")? {
        sim.formulation = form.parse::<Formulation>().map_err(|e| IoError::invalid("formulation", e.to_string()))?;
    }
    if let Some(r) = keys.count("report_every")? {
        if r == 0 {
            return Err(IoError::invalid("report_every", "report_every must be positive"));
        }
        sim.report_every = r;
    }
    if let Some(seed) = keys.count("seed")? {
        sim.seed = seed as u64;
    }

    sim.quad = quadrature(&keys, &grid)?;
    sim.besov = besov(&keys, &grid)?;

    if let Some(c) = keys.positive("smallness_c")? {
        sim.smallness_c = c;
    }
    sim.stability_c = keys.positive("stability_c")?;
    if let Some(c) = keys.positive("gravity_constant")? {
        sim.gravity_constant = c;
    }
    if let Some(s) = keys.count("snapshot_every")? {
        if s == 0 {
            return Err(IoError::invalid("snapshot_every", "snapshot_every must be positive"));
        }
        sim.snapshot_every = Some(s);
    }
    if let Some(h) = keys.boolean("halt_on_smallness")? {
        sim.halt_on_smallness = h;
    }
    if let Some(c) = sim.stability_c {
        let cap = sim.stability_cap(c);
        if dt > cap {
            return Err(IoError::invalid("dt", format!("dt = {dt} exceeds the stability cap {cap:.3e}")));
        }
    }
    sim.validate().map_err(|e| IoError::invalid("config", e.to_string()))?;

    let initial = match keys.string("initial")? {
        Some(s) => FieldSpec::parse(s).map_err(|e| IoError::invalid("initial", e.to_string()))?,
        None => FieldSpec::Zero,
    };
    let output_format = match keys.string("output_format")? {
        Some(s) => s.parse::<Format>().map_err(|e| IoError::invalid("output_format", e.to_string()))?,
        None => Format::Csv,
    };
    let threads = keys.count("threads")?;
    if threads == Some(0) {
        return Err(IoError::invalid("threads", "threads must be positive"));
    }
    Ok(LoadedConfig { config: RunConfig { sim, initial, output_format, threads }, warnings })
}

fn quadrature(keys: &Keys, grid: &Grid) -> Result<Quadrature> {
    let mut q = Quadrature::for_grid(grid);
    if let Some(v) = keys.positive("alpha_min")? {
        q.alpha_min = v;
    }
    if let Some(v) = keys.positive("alpha_max")? {
        q.alpha_max = v;
    }
    if q.alpha_min >= q.alpha_max {
        return Err(IoError::invalid("alpha_max", "alpha_max must exceed alpha_min"));
    }
    if let Some(v) = keys.count("n_alpha")? {
        if v < MIN_N_ALPHA {
            return Err(IoError::invalid("n_alpha", format!("n_alpha must be at least {MIN_N_ALPHA}")));
        }
        q.n_alpha = v;
    }
    if let Some(v) = keys.count("inner_order")? {
        if v == 0 {
            return Err(IoError::invalid("inner_order", "inner_order must be positive"));
        }
        q.inner_order = v;
    }
    if let Some(v) = keys.positive("inner_panel")? {
        q.inner_panel = v;
    }
    let order = keys.count("laguerre_order")?;
    q.laplace_mode = match keys.string("laplace_mode")? {
        None | Some("closed_form") => LaplaceMode::ClosedForm,
        Some("gauss_laguerre") => match order.unwrap_or(64) {
            0 => return Err(IoError::invalid("laguerre_order", "laguerre_order must be positive")),
            o => LaplaceMode::GaussLaguerre(o),
        },
        Some(other) => {
            return Err(IoError::invalid(
                "laplace_mode",
                format!("expected \"closed_form\" or \"gauss_laguerre\", got {other:?}"),
            ))
        }
    };
    Ok(q)
}

fn besov(keys: &Keys, grid: &Grid) -> Result<BesovRule> {
    let mut b = BesovRule::for_grid(grid);
    if let Some(v) = keys.positive("besov_alpha_min")? {
        b.alpha_min = v;
    }
    if let Some(v) = keys.positive("besov_alpha_max")? {
        b.alpha_max = v;
    }
    if b.alpha_min >= b.alpha_max {
        return Err(IoError::invalid("besov_alpha_max", "besov_alpha_max must exceed besov_alpha_min"));
    }
    if let Some(v) = keys.count("besov_n_alpha")? {
        if v < 2 {
            return Err(IoError::invalid("besov_n_alpha", "besov_n_alpha must be at least 2"));
        }
        b.n_alpha = v;
    }
    b.mode = match keys.string("besov_mode")? {
        None | Some("truncated") => BesovMode::Truncated,
        Some("periodized") => BesovMode::Periodized,
        Some(other) => {
            return Err(IoError::invalid(
                "besov_mode",
                format!("expected \"truncated\" or \"periodized\", got {other:?}"),
            ))
        }
    };
    Ok(b)
}

struct Keys<'a>(&'a Table);

impl Keys<'_> {
    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) if x.is_finite() => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(Value::Float(_)) => Err(IoError::invalid(key, format!("{key} must be finite"))),
            Some(other) => Err(IoError::invalid(key, format!("expected a number, got {}", other.type_str()))),
        }
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.float(key)? {
            Some(x) if x <= 0.0 => Err(IoError::invalid(key, format!("{key} must be positive"))),
            v => Ok(v),
        }
    }

    fn non_negative(&self, key: &str) -> Result<Option<f64>> {
        match self.float(key)? {
            Some(x) if x < 0.0 => Err(IoError::invalid(key, format!("{key} must be non-negative"))),
            v => Ok(v),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(Value::Integer(_)) => Err(IoError::invalid(key, format!("{key} must be non-negative"))),
            Some(other) => Err(IoError::invalid(key, format!("expected an integer, got {}", other.type_str()))),
        }
    }

    fn required_count(&self, key: &str) -> Result<usize> {
        self.count(key)?.ok_or_else(|| IoError::invalid(key, "missing required key"))
    }

    fn string(&self, key: &str) -> Result<Option<&str>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(other) => Err(IoError::invalid(key, format!("expected a string, got {}", other.type_str()))),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(other) => Err(IoError::invalid(key, format!("expected true or false, got {}", other.type_str()))),
        }
    }

    /// A number, or a string `"pi"`, `"2pi"`, `"2*pi"`, `"0.5 * pi"`.
    fn length(&self) -> Result<Option<f64>> {
        let key = "length";
        let v = match self.0.get(key) {
            Some(Value::String(s)) => {
                let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
                let coef = t
                    .strip_suffix("pi")
                    .map(|c| c.strip_suffix('*').unwrap_or(c))
                    .ok_or_else(|| IoError::invalid(key, format!("cannot read {s:?} as a length")))?;
                let c: f64 = if coef.is_empty() {
                    1.0
                } else {
                    coef.parse().map_err(|_| IoError::invalid(key, format!("cannot read {s:?} as a length")))?
                };
                Some(c * std::f64::consts::PI)
            }
            _ => self.float(key)?,
        };
        match v {
            Some(x) if x <= 0.0 || !x.is_finite() => Err(IoError::invalid(key, "length must be positive")),
            v => Ok(v),
        }
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, &cb) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(ca != cb)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}
