//! CSV output with a `#` metadata preamble, and the matching reader.
//!
//! ```text
//! # rexsim_version = 0.1.0
//! # subcommand = rabi
//! # seed = 1
//! # param.cavity.q_factor = 3900.0
//! # g0_hz = 28500000.0
//! # timestamp_unix = 1760000000
//! nbar,excited_population
//! 0.0,0.0
//! ```
//!
//! Numbers use Rust's shortest round-trip formatting. Everything except the
//! timestamp line is a pure function of the inputs.

use std::io::{self, BufRead, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::trace::{Axis, TimeTrace};

pub const TIMESTAMP_KEY: &str = "timestamp_unix";

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

/// Preamble written ahead of every table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvMeta {
    pub subcommand: String,
    pub seed: Option<u64>,
    /// Echo of the configuration and flags, written as `param.<key>`.
    pub params: Vec<(String, String)>,
    /// Extra producer-specific lines (e.g. trace metadata).
    pub extra: Vec<(String, String)>,
    /// Seconds since the epoch; `None` stamps the current time.
    pub timestamp: Option<u64>,
}

impl CsvMeta {
    pub fn new(subcommand: impl Into<String>) -> Self {
        CsvMeta { subcommand: subcommand.into(), ..CsvMeta::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_params(mut self, params: Vec<(String, String)>) -> Self {
        self.params = params;
        self
    }

    pub fn with_extra(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.extra.push((key.into(), value.to_string()));
        self
    }

    fn write<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# rexsim_version = {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "# subcommand = {}", self.subcommand)?;
        if let Some(seed) = self.seed {
            writeln!(w, "# seed = {seed}")?;
        }
        for (k, v) in &self.params {
            writeln!(w, "# param.{k} = {v}")?;
        }
        for (k, v) in &self.extra {
            writeln!(w, "# {k} = {v}")?;
        }
        let ts = self.timestamp.unwrap_or_else(|| {
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
        });
        writeln!(w, "# {TIMESTAMP_KEY} = {ts}")
    }
}

/// Writes the preamble, one header row and the rows. Cells are written
/// verbatim; callers format numbers with [`fmt_num`].
pub fn write_table<W: Write>(mut w: W, meta: &CsvMeta, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    meta.write(&mut w)?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// Two-column table of a trace; its metadata joins the preamble.
pub fn write_trace<W: Write>(w: W, meta: &CsvMeta, trace: &TimeTrace) -> io::Result<()> {
    let mut meta = meta.clone();
    meta.extra.extend(trace.metadata.iter().cloned());
    let header = [trace.abscissa.header(), trace.ordinate.header()];
    let rows: Vec<Vec<String>> = trace.points().map(|(x, y)| vec![fmt_num(x), fmt_num(y)]).collect();
    write_table(w, &meta, &[&header[0], &header[1]], &rows)
}

/// A table read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn numeric_column(&self, index: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let cell = row.get(index).ok_or_else(|| {
                    Error::validation("csv", format!("data row {} has no column {}", r + 1, index + 1))
                })?;
                cell.trim()
                    .parse()
                    .map_err(|_| Error::validation("csv", format!("data row {}: `{cell}` is not a number", r + 1)))
            })
            .collect()
    }

    /// First two columns as a trace, keeping the header names.
    pub fn to_trace(&self) -> Result<TimeTrace> {
        if self.header.len() < 2 {
            return Err(Error::validation("csv", "need at least two columns"));
        }
        let axis = |h: &str| match h.rsplit_once('_') {
            Some((n, u)) if u == "s" || u == "hz" => Axis::new(n, u),
            _ => Axis::new(h, ""),
        };
        let mut t = TimeTrace::new(axis(&self.header[0]), axis(&self.header[1]), self.numeric_column(0)?, self.numeric_column(1)?)?;
        t.metadata = self.metadata.clone();
        Ok(t)
    }
}

/// Reads a table written by [`write_table`]. Blank lines are skipped.
pub fn read_table<R: BufRead>(r: R) -> Result<CsvTable> {
    let mut metadata = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for line in r.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(m) = t.strip_prefix('#') {
            if let Some((k, v)) = m.split_once('=') {
                metadata.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        let cells: Vec<String> = t.split(',').map(|c| c.trim().to_string()).collect();
        match &header {
            None => header = Some(cells),
            Some(h) if cells.len() != h.len() => {
                return Err(Error::validation(
                    "csv",
                    format!("row {} has {} cells, header has {}", rows.len() + 1, cells.len(), h.len()),
                ))
            }
            Some(_) => rows.push(cells),
        }
    }
    let header = header.ok_or_else(|| Error::validation("csv", "no header row"))?;
    Ok(CsvTable { metadata, header, rows })
}

/// Drops the timestamp line, leaving the reproducible part of a file.
pub fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with(&format!("# {TIMESTAMP_KEY}")))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn preamble_then_header() {
        let t = TimeTrace::new(Axis::new("delay", "s"), Axis::new("signal", ""), vec![0.0, 1e-7], vec![1.0, 0.5])
            .unwrap()
            .with_meta("t2_s", 2.5e-5);
        let meta = CsvMeta::new("echo").with_seed(7).with_params(vec![("cavity.q_factor".into(), "3900.0".into())]);
        let mut buf = Vec::new();
        write_trace(&mut buf, &meta, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# rexsim_version = "));
        assert_eq!(lines[1], "# subcommand = echo");
        assert_eq!(lines[2], "# seed = 7");
        assert_eq!(lines[3], "# param.cavity.q_factor = 3900.0");
        assert_eq!(lines[4], "# t2_s = 0.000025");
        assert!(lines[5].starts_with("# timestamp_unix = "));
        assert_eq!(&lines[6..], ["delay_s,signal", "0.0,1.0", "1e-7,0.5"]);
        let back = read_table(text.as_bytes()).unwrap();
        assert_eq!(back.meta("seed"), Some("7"));
        assert_eq!(back.to_trace().unwrap().y, t.y);
        assert_eq!(back.to_trace().unwrap().x, t.x);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(read_table("a,b\n1,2\n3\n".as_bytes()).is_err());
        assert!(read_table("# only = meta\n".as_bytes()).is_err());
        let t = read_table("a,b\n1,x\n".as_bytes()).unwrap();
        assert!(t.numeric_column(1).is_err());
    }

    proptest! {
        #[test]
        fn numbers_round_trip(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
            prop_assert_eq!(fmt_num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
