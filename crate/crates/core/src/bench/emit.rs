//! Trace files. CSV floats are written as `{:.16e}` (17 significant
//! digits), so parsing them back reproduces the exact bits; missing values
//! are empty cells. JSON mirrors the same flat records.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::trace::RunTrace;

pub const CSV_HEADER: [&str; 8] = [
    "solver",
    "seed",
    "epoch",
    "data_passes",
    "error_gap",
    "lambda2_hat",
    "contraction",
    "wallclock_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

impl std::str::FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(invalid(format!("unknown trace format {other:?}"))),
        }
    }
}

/// One flat trace row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub solver: String,
    pub seed: u64,
    pub epoch: usize,
    pub data_passes: f64,
    pub error_gap: Option<f64>,
    pub lambda2_hat: Option<f64>,
    pub contraction: Option<f64>,
    pub wallclock_s: f64,
}

pub fn records(traces: &[RunTrace]) -> Vec<TraceRecord> {
    traces
        .iter()
        .flat_map(|t| {
            t.rows.iter().map(move |r| TraceRecord {
                solver: t.solver.clone(),
                seed: t.seed,
                epoch: r.epoch,
                data_passes: r.data_passes,
                error_gap: r.error_gap,
                lambda2_hat: r.lambda2_hat,
                contraction: r.contraction,
                wallclock_s: r.wallclock_s,
            })
        })
        .collect()
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv<W: Write>(recs: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in recs {
        w.write_record([
            r.solver.clone(),
            r.seed.to_string(),
            r.epoch.to_string(),
            fmt_f64(r.data_passes),
            fmt_opt(r.error_gap),
            fmt_opt(r.lambda2_hat),
            fmt_opt(r.contraction),
            fmt_f64(r.wallclock_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(invalid(format!("unexpected trace header {header:?}")));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let err = |field: &str| Error::Parse {
            line,
            message: format!("bad {field} value"),
        };
        let num = |k: usize, field: &str| -> Result<f64> { rec[k].parse().map_err(|_| err(field)) };
        let opt = |k: usize, field: &str| -> Result<Option<f64>> {
            if rec[k].is_empty() {
                Ok(None)
            } else {
                num(k, field).map(Some)
            }
        };
        out.push(TraceRecord {
            solver: rec[0].to_string(),
            seed: rec[1].parse().map_err(|_| err("seed"))?,
            epoch: rec[2].parse().map_err(|_| err("epoch"))?,
            data_passes: num(3, "data_passes")?,
            error_gap: opt(4, "error_gap")?,
            lambda2_hat: opt(5, "lambda2_hat")?,
            contraction: opt(6, "contraction")?,
            wallclock_s: num(7, "wallclock_s")?,
        });
    }
    Ok(out)
}

pub fn write_json<W: Write>(recs: &[TraceRecord], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, recs)?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    Ok(serde_json::from_reader(input)?)
}

/// Writes all rows of `traces` to `path`, via a temporary file in the same
/// directory that is renamed into place.
pub fn emit_trace(traces: &[RunTrace], format: TraceFormat, path: &Path) -> Result<()> {
    let recs = records(traces);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        match format {
            TraceFormat::Csv => write_csv(&recs, &mut w)?,
            TraceFormat::Json => write_json(&recs, &mut w)?,
        }
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Reads a trace file written by [`emit_trace`].
pub fn read_trace_file(path: &Path, format: TraceFormat) -> Result<Vec<TraceRecord>> {
    let f = File::open(path)?;
    match format {
        TraceFormat::Csv => read_csv(f),
        TraceFormat::Json => read_json(f),
    }
}
