//! CSV output. Traces start with `#` comment lines holding the schema version
//! and run metadata, then rows `k,n,error_l2,bound,wall_time_ms` in k-major
//! order. Floats use shortest round-trip formatting and empty cells mark
//! absent values.

use std::io::{BufRead, Write};

use crate::analysis::FactorGrid;
use crate::error::{Error, Result};
use crate::pit::{IterationTrace, TraceEntry};

pub const TRACE_SCHEMA: &str = "parareal-trace/1";

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("csv: {other:?}")),
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_trace<W: Write>(trace: &IterationTrace, mut out: W) -> Result<()> {
    writeln!(out, "# schema = {TRACE_SCHEMA}")?;
    for (key, value) in &trace.metadata {
        writeln!(out, "# {key} = {value}")?;
    }
    let mut entries: Vec<&TraceEntry> = trace.entries.iter().collect();
    entries.sort_by_key(|e| (e.k, e.n));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "n", "error_l2", "bound", "wall_time_ms"])
        .map_err(csv_err)?;
    for e in entries {
        w.write_record([
            e.k.to_string(),
            e.n.to_string(),
            fmt_f64(e.error_l2),
            fmt_opt(e.bound),
            fmt_opt(e.wall_time_ms),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_opt(cell: &str, line: usize) -> Result<Option<f64>> {
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse()
        .map(Some)
        .map_err(|_| Error::invalid(format!("trace row {line}: bad number `{cell}`")))
}

pub fn read_trace<R: BufRead>(input: R) -> Result<IterationTrace> {
    let mut trace = IterationTrace::default();
    let mut body = String::new();
    for line in input.lines() {
        let line = line?;
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once('=') {
                let (k, v) = (k.trim(), v.trim());
                if k == "schema" {
                    if v != TRACE_SCHEMA {
                        return Err(Error::invalid(format!("unsupported trace schema `{v}`")));
                    }
                } else {
                    trace.metadata.insert(k.to_string(), v.to_string());
                }
            }
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let mut r = csv::Reader::from_reader(body.as_bytes());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 5 {
            return Err(Error::invalid(format!("trace row {i}: expected 5 columns")));
        }
        let int = |j: usize| -> Result<usize> {
            rec[j]
                .parse()
                .map_err(|_| Error::invalid(format!("trace row {i}: bad integer `{}`", &rec[j])))
        };
        trace.push(TraceEntry {
            k: int(0)?,
            n: int(1)?,
            error_l2: parse_opt(&rec[2], i)?
                .ok_or_else(|| Error::invalid(format!("trace row {i}: missing error")))?,
            bound: parse_opt(&rec[3], i)?,
            wall_time_ms: parse_opt(&rec[4], i)?,
        })?;
    }
    Ok(trace)
}

pub fn write_factors<W: Write>(grid: &FactorGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "dT", "rho_nocoarse", "rho_coarse"])
        .map_err(csv_err)?;
    for p in &grid.points {
        w.write_record([
            p.m.to_string(),
            fmt_f64(p.slice_width),
            fmt_f64(p.rho_no_coarse),
            fmt_f64(p.rho_with_coarse),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows `x,t,u` of a space-time field.
pub struct FieldWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> FieldWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(["x", "t", "u"]).map_err(csv_err)?;
        Ok(Self { inner })
    }

    pub fn write_slice(&mut self, points: &[f64], t: f64, values: &[f64]) -> Result<()> {
        for (x, u) in points.iter().zip(values) {
            self.inner
                .write_record([fmt_f64(*x), fmt_f64(t), fmt_f64(*u)])
                .map_err(csv_err)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}
