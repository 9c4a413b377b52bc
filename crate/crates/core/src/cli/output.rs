//! CSV traces. Numbers use `.` decimals; objectives and gaps are written in
//! shortest round-trip scientific notation.

use std::io::Write;

use crate::error::Result;
use crate::solvers::{Trace, TraceRecord};

#[derive(Debug, Clone, Copy, Default)]
pub struct Columns {
    /// Add `passes_parallel` after `pass`.
    pub parallel: bool,
    /// Include wall-clock `seconds`. Off for byte-reproducible output.
    pub seconds: bool,
}

impl Columns {
    fn header(&self) -> Vec<&'static str> {
        let mut h = vec!["pass"];
        if self.parallel {
            h.push("passes_parallel");
        }
        if self.seconds {
            h.push("seconds");
        }
        h.extend(["objective", "gap"]);
        h
    }

    fn row(&self, r: &TraceRecord, f_star: Option<f64>) -> Vec<String> {
        let mut row = vec![r.effective_passes.to_string()];
        if self.parallel {
            row.push(r.passes_parallel.to_string());
        }
        if self.seconds {
            row.push(format!("{:.6}", r.wall_seconds));
        }
        row.push(format!("{:e}", r.objective));
        row.push(f_star.map_or_else(String::new, |f| format!("{:e}", r.objective - f)));
        row
    }
}

pub fn write_trace<W: Write>(
    out: W,
    trace: &Trace,
    f_star: Option<f64>,
    cols: Columns,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(cols.header())?;
    for r in &trace.records {
        w.write_record(cols.row(r, f_star))?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: one row per (solver, record) with a leading `solver` column.
pub fn write_long<W: Write>(
    out: W,
    traces: &[(String, Trace)],
    f_star: Option<f64>,
    cols: Columns,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["solver"];
    header.extend(cols.header());
    w.write_record(header)?;
    for (label, trace) in traces {
        for r in &trace.records {
            let mut row = vec![label.clone()];
            row.extend(cols.row(r, f_star));
            w.write_record(row)?;
        }
    }
    w.flush()?;
    Ok(())
}
