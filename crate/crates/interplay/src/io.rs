//! Persistence: a self-describing text format for trajectories (bit-exact
//! round trip via shortest round-trip float formatting), a flat tabular
//! export for spreadsheets, plain-text matrix input, and the JSON report.

use std::io::{BufRead, Write};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::montecarlo::MonteCarloReport;
use crate::types::{
    AppraisalMatrix, InfluenceMatrix, OpinionMatrix, Snapshot, Termination, Trajectory,
    DEFAULT_ROW_TOLERANCE,
};

const MAGIC: &str = "interplay-trajectory v1";

fn write_matrix<W: Write>(out: &mut W, label: &str, entries: &Array2<f64>) -> std::io::Result<()> {
    writeln!(out, "{label}")?;
    for row in entries.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_trajectory<W: Write>(out: &mut W, traj: &Trajectory) -> std::io::Result<()> {
    let y0 = &traj.snapshots[0].opinion;
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "n {}", y0.n())?;
    writeln!(out, "m {}", y0.m())?;
    match traj.termination {
        Termination::Converged { step } => writeln!(out, "termination converged {step}")?,
        Termination::MaxStepsReached { step } => writeln!(out, "termination max_steps {step}")?,
        Termination::DomainViolation { step, row } => {
            writeln!(out, "termination domain_violation {step} {row}")?
        }
    }
    writeln!(out, "snapshots {}", traj.snapshots.len())?;
    for snap in &traj.snapshots {
        writeln!(out, "snapshot {}", snap.t)?;
        if let Some(x) = &snap.appraisal {
            write_matrix(out, "X", x.entries())?;
        }
        if let Some(w) = &snap.influence {
            write_matrix(out, "W", w.entries())?;
        }
        write_matrix(out, "Y", snap.opinion.entries())?;
    }
    Ok(())
}

/// Flat tabular export: one `t,matrix,i,j,value` record per entry.
pub fn write_trajectory_csv<W: Write>(out: &mut W, traj: &Trajectory) -> std::io::Result<()> {
    writeln!(out, "t,matrix,i,j,value")?;
    for snap in &traj.snapshots {
        let mut emit = |label: &str, entries: &Array2<f64>| -> std::io::Result<()> {
            for ((i, j), v) in entries.indexed_iter() {
                writeln!(out, "{},{label},{i},{j},{v}", snap.t)?;
            }
            Ok(())
        };
        if let Some(x) = &snap.appraisal {
            emit("X", x.entries())?;
        }
        if let Some(w) = &snap.influence {
            emit("W", w.entries())?;
        }
        emit("Y", snap.opinion.entries())?;
    }
    Ok(())
}

struct Lines<R: BufRead> {
    reader: R,
    buf: String,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<Option<&str>> {
        self.buf.clear();
        let read = self
            .reader
            .read_line(&mut self.buf)
            .map_err(|e| Error::Parse(e.to_string()))?;
        if read == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        Ok(Some(self.buf.trim_end()))
    }

    fn expect(&mut self) -> Result<String> {
        let line_no = self.line_no;
        match self.next()? {
            Some(line) => Ok(line.to_string()),
            None => Err(Error::Parse(format!(
                "unexpected end of file after line {line_no}"
            ))),
        }
    }
}

fn parse_usize(token: &str, what: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {token:?}")))
}

fn parse_f64(token: &str) -> Result<f64> {
    token
        .parse()
        .map_err(|_| Error::Parse(format!("bad number: {token:?}")))
}

fn read_matrix<R: BufRead>(lines: &mut Lines<R>, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let mut flat = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let line = lines.expect()?;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(parse_f64)
            .collect::<Result<_>>()?;
        if values.len() != cols {
            return Err(Error::Parse(format!(
                "expected {cols} values per row, got {}",
                values.len()
            )));
        }
        flat.extend(values);
    }
    Array2::from_shape_vec((rows, cols), flat).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_trajectory<R: BufRead>(reader: R) -> Result<Trajectory> {
    let mut lines = Lines {
        reader,
        buf: String::new(),
        line_no: 0,
    };
    if lines.expect()? != MAGIC {
        return Err(Error::Parse("missing trajectory header".into()));
    }
    let header_field = |line: &str, key: &str| -> Result<String> {
        line.strip_prefix(key)
            .map(|s| s.trim().to_string())
            .ok_or_else(|| Error::Parse(format!("expected {key:?} line, got {line:?}")))
    };
    let n = parse_usize(&header_field(&lines.expect()?, "n")?, "n")?;
    let m = parse_usize(&header_field(&lines.expect()?, "m")?, "m")?;
    let term_line = header_field(&lines.expect()?, "termination")?;
    let parts: Vec<&str> = term_line.split_whitespace().collect();
    let termination = match parts.as_slice() {
        ["converged", s] => Termination::Converged {
            step: parse_usize(s, "step")?,
        },
        ["max_steps", s] => Termination::MaxStepsReached {
            step: parse_usize(s, "step")?,
        },
        ["domain_violation", s, r] => Termination::DomainViolation {
            step: parse_usize(s, "step")?,
            row: parse_usize(r, "row")?,
        },
        _ => return Err(Error::Parse(format!("bad termination line: {term_line:?}"))),
    };
    let count = parse_usize(&header_field(&lines.expect()?, "snapshots")?, "count")?;

    let mut snapshots = Vec::with_capacity(count);
    for _ in 0..count {
        let t = parse_usize(&header_field(&lines.expect()?, "snapshot")?, "t")?;
        let mut appraisal = None;
        let mut influence = None;
        let mut label = lines.expect()?.to_string();
        if label == "X" {
            appraisal = Some(AppraisalMatrix::from_raw(read_matrix(&mut lines, n, n)?));
            label = lines.expect()?.to_string();
        }
        if label == "W" {
            influence = Some(InfluenceMatrix::from_raw(read_matrix(&mut lines, n, n)?));
            label = lines.expect()?.to_string();
        }
        if label != "Y" {
            return Err(Error::Parse(format!("expected matrix label, got {label:?}")));
        }
        let y = OpinionMatrix::new(read_matrix(&mut lines, n, m)?, DEFAULT_ROW_TOLERANCE)?;
        snapshots.push(Snapshot {
            t,
            opinion: y,
            appraisal,
            influence,
        });
    }
    if snapshots.is_empty() {
        return Err(Error::Parse("trajectory has no snapshots".into()));
    }
    Ok(Trajectory {
        snapshots,
        termination,
    })
}

/// Parses an inline matrix literal: rows separated by `;`, entries by commas
/// or whitespace, e.g. `"1 2 5; -1 -2 5"`.
pub fn parse_inline_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|row| {
            row.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(parse_f64)
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Parse("empty matrix literal".into()));
    }
    Ok(rows)
}

/// Reads a whitespace-separated matrix from plain text; blank lines and lines
/// starting with `#` are skipped.
pub fn parse_matrix_text(text: &str) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(parse_f64).collect())
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::Parse("no matrix rows found".into()));
    }
    Ok(rows)
}

pub fn write_report<W: Write>(out: &mut W, report: &MonteCarloReport) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    writeln!(out, "{json}")
}

pub fn read_report<R: std::io::Read>(reader: R) -> Result<MonteCarloReport> {
    serde_json::from_reader(reader).map_err(|e| Error::Parse(e.to_string()))
}
