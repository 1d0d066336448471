//! Per-report time series as CSV or JSON.
//!
//! Both formats carry the same thirteen keys in the same order. CSV floats
//! are written as `{:.16e}` (17 significant digits); JSON uses the shortest
//! representation that parses back to the same `f64`. Non-finite values are
//! written as `inf`, `-inf` or `NaN` in CSV and as the strings `"inf"`,
//! `"-inf"`, `"NaN"` in JSON.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use muskat_core::{EnergyReport, NormReport, Trajectory};
use serde::{Deserialize, Serialize};

use crate::error::{IoError, Result};

pub const COLUMNS: [&str; 13] = [
    "time",
    "l2",
    "h32",
    "h3",
    "h52",
    "h4",
    "b1_inf_1",
    "lip",
    "smallness",
    "ddt_e",
    "dissip3",
    "dissip32",
    "K_required",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = IoError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(IoError::Series(format!("unknown format {s:?} (expected csv or json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One row of the series.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Record {
    #[serde(with = "lenient")]
    pub time: f64,
    #[serde(with = "lenient")]
    pub l2: f64,
    #[serde(with = "lenient")]
    pub h32: f64,
    #[serde(with = "lenient")]
    pub h3: f64,
    #[serde(with = "lenient")]
    pub h52: f64,
    #[serde(with = "lenient")]
    pub h4: f64,
    #[serde(with = "lenient")]
    pub b1_inf_1: f64,
    #[serde(with = "lenient")]
    pub lip: f64,
    #[serde(with = "lenient")]
    pub smallness: f64,
    #[serde(with = "lenient")]
    pub ddt_e: f64,
    #[serde(with = "lenient")]
    pub dissip3: f64,
    #[serde(with = "lenient")]
    pub dissip32: f64,
    #[serde(rename = "K_required", with = "lenient")]
    pub k_required: f64,
}

impl Record {
    pub fn new(n: &NormReport, e: &EnergyReport) -> Self {
        Self {
            time: n.time,
            l2: n.l2,
            h32: n.h32,
            h3: n.h3,
            h52: n.h52,
            h4: n.h4,
            b1_inf_1: n.b1_inf_1,
            lip: n.lip,
            smallness: n.smallness,
            ddt_e: e.ddt_e,
            dissip3: e.dissip3,
            dissip32: e.dissip32,
            k_required: e.k_required,
        }
    }

    pub fn values(&self) -> [f64; 13] {
        [
            self.time,
            self.l2,
            self.h32,
            self.h3,
            self.h52,
            self.h4,
            self.b1_inf_1,
            self.lip,
            self.smallness,
            self.ddt_e,
            self.dissip3,
            self.dissip32,
            self.k_required,
        ]
    }

    /// The norm part, e.g. to re-run inequality checks on a saved series.
    pub fn norm_report(&self) -> NormReport {
        NormReport {
            time: self.time,
            l2: self.l2,
            h32: self.h32,
            h3: self.h3,
            h52: self.h52,
            h4: self.h4,
            b1_inf_1: self.b1_inf_1,
            lip: self.lip,
            smallness: self.smallness,
        }
    }
}

pub fn records(traj: &Trajectory) -> Vec<Record> {
    traj.reports.iter().zip(&traj.energy).map(|(n, e)| Record::new(n, e)).collect()
}

fn csv_err(e: csv::Error) -> IoError {
    IoError::Series(e.to_string())
}

pub fn write_csv<W: Write>(records: &[Record], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record(r.values().iter().map(|v| format!("{v:.16e}"))).map_err(csv_err)?;
    }
    w.flush().map_err(|e| IoError::Series(e.to_string()))
}

pub fn write_json<W: Write>(records: &[Record], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, records).map_err(|e| IoError::Series(e.to_string()))?;
    writeln!(out).map_err(|e| IoError::Series(e.to_string()))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Record>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(IoError::Series(format!("unexpected CSV header {:?}", header.iter().collect::<Vec<_>>())));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<Record>> {
    serde_json::from_reader(input).map_err(|e| IoError::Series(e.to_string()))
}

pub fn write_timeseries(traj: &Trajectory, path: impl AsRef<Path>, format: Format) -> Result<()> {
    write_records(&records(traj), path, format)
}

pub fn write_records(records: &[Record], path: impl AsRef<Path>, format: Format) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| IoError::file(path, e))?;
    let out = std::io::BufWriter::new(file);
    match format {
        Format::Csv => write_csv(records, out),
        Format::Json => write_json(records, out),
    }
}

/// Reads a series, choosing the format from the extension (`.json` or CSV).
pub fn read_timeseries(path: impl AsRef<Path>) -> Result<Vec<Record>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IoError::file(path, e))?;
    let input = std::io::BufReader::new(file);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        read_json(input)
    } else {
        read_csv(input)
    }
}

/// Finite floats as numbers, the rest as strings.
mod lenient {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = f64;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"NaN\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                v.trim().parse().map_err(|_| E::custom(format!("not a number: {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}
