//! Textual initial-data descriptions.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! spec  := "zero" | "random(" int "," number ")" | sum
//! sum   := ["-"] term (("+" | "-") term)*
//! term  := number | [number "*"] ("sin" | "cos") "(" [int ["*"]] "x" ")"
//! ```
//!
//! `x` stands for the phase `2π·position/L`, so `sin(x)` is the fundamental
//! mode on any domain length. `random(m, a)` draws a trigonometric
//! polynomial with modes `1..=m` whose coefficients are uniform in `[-1, 1]`
//! and damped by `1/j²`, then rescales it to max-norm `a`; the draw is driven
//! by the run seed.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::grid::PeriodicGrid;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wave {
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coef: f64,
    /// `None` for a constant term.
    pub wave: Option<(Wave, i64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Zero,
    Sum(Vec<Term>),
    Random { modes: usize, amplitude: f64 },
}

impl FieldSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return invalid("empty field spec");
        }
        if s == "zero" || s == "0" {
            return Ok(FieldSpec::Zero);
        }
        if let Some(args) = s.strip_prefix("random(").and_then(|r| r.strip_suffix(')')) {
            let (m, a) = args
                .split_once(',')
                .ok_or_else(|| crate::Error::InvalidArgument(format!("random needs two arguments: {text:?}")))?;
            let modes: usize = m.parse().map_err(|_| bad(text, "mode count"))?;
            let amplitude: f64 = a.parse().map_err(|_| bad(text, "amplitude"))?;
            if modes == 0 || !amplitude.is_finite() || amplitude < 0.0 {
                return invalid(format!("random(modes, amp) needs modes ≥ 1 and amp ≥ 0: {text:?}"));
            }
            return Ok(FieldSpec::Random { modes, amplitude });
        }
        let mut terms = Vec::new();
        for (sign, body) in split_terms(&s) {
            if body.is_empty() {
                return Err(bad(text, "term"));
            }
            let mut t = parse_term(body).ok_or_else(|| bad(text, body))?;
            t.coef *= sign;
            terms.push(t);
        }
        Ok(FieldSpec::Sum(terms))
    }

    pub fn sample<T: Real>(&self, grid: &PeriodicGrid<T>, seed: u64) -> Result<ScalarField<T>> {
        let length = grid.length().to_f64_lossy();
        let phase = |x: T| 2.0 * std::f64::consts::PI * x.to_f64_lossy() / length;
        match self {
            FieldSpec::Zero => Ok(ScalarField::zeros(grid)),
            FieldSpec::Sum(terms) => ScalarField::sample(grid, |x| {
                let p = phase(x);
                T::lit(terms.iter().map(|t| t.eval(p)).sum())
            }),
            FieldSpec::Random { modes, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let coef: Vec<(f64, f64)> = (1..=*modes)
                    .map(|j| {
                        let d = (j * j) as f64;
                        (rng.gen_range(-1.0..1.0) / d, rng.gen_range(-1.0..1.0) / d)
                    })
                    .collect();
                let raw = ScalarField::sample(grid, |x| {
                    let p = phase(x);
                    T::lit(
                        coef.iter()
                            .enumerate()
                            .map(|(j, (a, b))| {
                                let m = (j + 1) as f64;
                                a * (m * p).cos() + b * (m * p).sin()
                            })
                            .sum(),
                    )
                })?;
                let peak = raw.max_abs();
                if peak == T::zero() {
                    return Ok(raw);
                }
                Ok(raw.scale(T::lit(*amplitude) / peak))
            }
        }
    }
}

impl Term {
    fn eval(&self, phase: f64) -> f64 {
        match self.wave {
            None => self.coef,
            Some((Wave::Sin, m)) => self.coef * (m as f64 * phase).sin(),
            Some((Wave::Cos, m)) => self.coef * (m as f64 * phase).cos(),
        }
    }
}

fn bad(text: &str, what: &str) -> crate::Error {
    crate::Error::InvalidArgument(format!("cannot parse {what:?} in field spec {text:?}"))
}

/// Splits on top-level `+`/`-` that are not part of an exponent.
fn split_terms(s: &str) -> Vec<(f64, &str)> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut start = 0;
    let mut depth = 0;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 => {
                let exponent = i >= 2
                    && matches!(bytes[i - 1], b'e' | b'E')
                    && (bytes[i - 2].is_ascii_digit() || bytes[i - 2] == b'.');
                if exponent {
                    continue;
                }
                if i > start {
                    out.push((sign, &s[start..i]));
                } else if i != 0 {
                    // "a+-b" style doubled sign
                    sign = if b == b'-' { -sign } else { sign };
                    start = i + 1;
                    continue;
                }
                sign = if b == b'-' { -1.0 } else { 1.0 };
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((sign, &s[start..]));
    out
}

fn parse_term(body: &str) -> Option<Term> {
    if let Ok(c) = body.parse::<f64>() {
        return c.is_finite().then_some(Term { coef: c, wave: None });
    }
    let (coef, rest) = match body.find('*') {
        Some(i) if !body[..i].contains('(') => (body[..i].parse::<f64>().ok()?, &body[i + 1..]),
        _ => (1.0, body),
    };
    let (wave, arg) =
        if let Some(a) = rest.strip_prefix("sin(") { (Wave::Sin, a) } else { (Wave::Cos, rest.strip_prefix("cos(")?) };
    let inner = arg.strip_suffix(')')?.strip_suffix('x')?;
    let inner = inner.strip_suffix('*').unwrap_or(inner);
    let m = if inner.is_empty() { 1 } else { inner.parse::<i64>().ok()? };
    coef.is_finite().then_some(Term { coef, wave: Some((wave, m)) })
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Zero => write!(f, "zero"),
            FieldSpec::Random { modes, amplitude } => write!(f, "random({modes}, {amplitude})"),
            FieldSpec::Sum(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    match t.wave {
                        None => write!(f, "{}", t.coef)?,
                        Some((w, m)) => {
                            let name = if w == Wave::Sin { "sin" } else { "cos" };
                            write!(f, "{}*{name}({m}x)", t.coef)?
                        }
                    }
                }
                Ok(())
            }
        }
    }
}
