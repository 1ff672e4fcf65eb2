use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One GCS iteration: the candidate that was drawn and what happened to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TraceEntry<T> {
    pub iter: u64,
    pub candidate: Vec<T>,
    pub candidate_value: T,
    /// Mutation standard deviation used to draw `candidate`.
    pub sd_before: T,
    pub accepted: bool,
}

/// Outcome of a single optimizer run, shared by GCS and the baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RunResult<T> {
    pub best_point: Vec<T>,
    pub best_value: T,
    pub evaluations: u64,
    pub accepted_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry<T>>>,
    /// Seed of the random stream; `None` for deterministic methods.
    pub seed: Option<u64>,
}

/// Write a trace as CSV: `iter,x0,..,x{d-1},value,sd_before,accepted`.
pub fn write_trace_csv<T: Scalar, W: Write>(
    trace: &[TraceEntry<T>],
    dimension: usize,
    writer: W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["iter".to_string()];
    header.extend((0..dimension).map(|i| format!("x{i}")));
    header.extend(["value", "sd_before", "accepted"].map(String::from));
    out.write_record(&header)?;
    for entry in trace {
        if entry.candidate.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: entry.candidate.len(),
            });
        }
        let mut record = Vec::with_capacity(dimension + 4);
        record.push(entry.iter.to_string());
        record.extend(entry.candidate.iter().map(|x| x.to_string()));
        record.push(entry.candidate_value.to_string());
        record.push(entry.sd_before.to_string());
        record.push(entry.accepted.to_string());
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}
