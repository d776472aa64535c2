//! Result records (JSON lines) and CSV exports.
//!
//! Records carry no timestamps, so identical runs produce identical bytes.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::num::Real;
use crate::partition::OccupationSpectrum;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
    Inconclusive,
    Exploratory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub software_version: String,
    pub experiment: String,
    pub status: Status,
    pub seed: Option<u64>,
    pub params: serde_json::Value,
    pub result: serde_json::Value,
}

impl ResultRecord {
    pub fn new(experiment: &str, params: &impl Serialize, result: &impl Serialize) -> Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            software_version: crate::VERSION.to_string(),
            experiment: experiment.to_string(),
            status: Status::Ok,
            seed: None,
            params: serde_json::to_value(params)?,
            result: serde_json::to_value(result)?,
        })
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// `Ok` when `pass`, `Failed` otherwise.
    pub fn with_pass(self, pass: bool) -> Self {
        self.with_status(if pass { Status::Ok } else { Status::Failed })
    }
}

pub fn write_jsonl<W: Write>(mut w: W, records: &[ResultRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Columns `m, log_z, probability`.
pub fn write_spectrum_csv<W: Write, T: Real>(w: W, spec: &OccupationSpectrum<T>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["m", "log_z", "probability"])?;
    let probs = spec.probabilities();
    for (i, m) in spec.m_values().enumerate() {
        wr.write_record([
            m.to_string(),
            format!("{:e}", spec.log_z_by_m[i]),
            format!("{:e}", probs[i]),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Columns `n, value` with `n` starting at `first_index`.
pub fn write_series_csv<W: Write>(w: W, header: &str, first_index: i64, values: &[f64]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["n", header])?;
    for (i, v) in values.iter().enumerate() {
        wr.write_record([(first_index + i as i64).to_string(), format!("{v:e}")])?;
    }
    wr.flush()?;
    Ok(())
}

/// A numeric table with a header row.
pub fn write_table_csv<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    for row in rows {
        wr.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    wr.flush()?;
    Ok(())
}
