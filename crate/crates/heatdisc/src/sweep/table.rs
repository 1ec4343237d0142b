use std::fs;
use std::path::Path;

use super::config::{SweepConfig, CONFIG_KEYS};
use crate::bounds::BoundReport;
use crate::error::{Error, Result};

/// Column order of a report row.
pub const CSV_COLUMNS: [&str; 10] = [
    "pe",
    "constraint",
    "upper",
    "lower",
    "exact",
    "residual_flux",
    "residual_q",
    "grad_eta",
    "flow_norm",
    "delta_star",
];

/// Outcome of one Pe value.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub pe: f64,
    /// Fourier modes of the grid this row ran on.
    pub modes: usize,
    pub report: std::result::Result<BoundReport<f64>, String>,
    /// Non-fatal remark, such as a skipped exact solve.
    pub note: Option<String>,
    /// Seconds spent on the row. Not written to CSV, so reads give 0.
    pub wall_time: f64,
}

impl SweepRow {
    /// Equality on everything that survives a CSV round trip.
    pub fn same_content(&self, other: &Self) -> bool {
        self.pe.to_bits() == other.pe.to_bits()
            && self.modes == other.modes
            && self.report == other.report
            && self.note == other.note
    }
}

/// Rows sorted by Pe plus the config they came from.
#[derive(Clone, Debug)]
pub struct SweepTable {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Successful reports in Pe order.
    pub fn reports(&self) -> impl Iterator<Item = &BoundReport<f64>> {
        self.rows.iter().filter_map(|r| r.report.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (f64, &str)> {
        self.rows.iter().filter_map(|r| r.report.as_ref().err().map(|e| (r.pe, e.as_str())))
    }

    /// CSV text: `#` metadata lines, a header, then one line per report.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::from("# heatdisc sweep\n");
        for line in self.config.to_text().lines() {
            out.push_str(&format!("# {line}\n"));
        }
        for row in &self.rows {
            out.push_str(&format!("# row pe={} modes={}\n", num(row.pe), row.modes));
            if let Some(n) = &row.note {
                out.push_str(&format!("# note pe={} {}\n", num(row.pe), one_line(n)));
            }
            if let Err(e) = &row.report {
                out.push_str(&format!("# failed pe={} {}\n", num(row.pe), one_line(e)));
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
        for rep in self.reports() {
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            w.write_record([
                num(rep.pe),
                rep.constraint.to_string(),
                num(rep.upper),
                opt(rep.lower),
                opt(rep.exact),
                num(rep.residual_flux),
                num(rep.residual_q),
                num(rep.grad_eta),
                num(rep.flow_norm),
                opt(rep.delta_star),
            ])
            .map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }

    /// Inverse of [`SweepTable::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut cfg_text = String::new();
        let mut rows: Vec<SweepRow> = Vec::new();
        let find = |rows: &mut Vec<SweepRow>, pe: f64| -> Result<usize> {
            rows.iter()
                .position(|r| r.pe.to_bits() == pe.to_bits())
                .ok_or_else(|| Error::InvalidParameter(format!("metadata for unknown row pe={pe}")))
        };
        for line in text.lines().filter_map(|l| l.strip_prefix("# ")) {
            if let Some(rest) = line.strip_prefix("row ") {
                let mut pe = None;
                let mut modes = None;
                for tok in rest.split_whitespace() {
                    match tok.split_once('=') {
                        Some(("pe", v)) => pe = Some(parse_f64(v)?),
                        Some(("modes", v)) => modes = v.parse().ok(),
                        _ => {}
                    }
                }
                let (Some(pe), Some(modes)) = (pe, modes) else {
                    return Err(Error::InvalidParameter(format!("malformed row line '{line}'")));
                };
                rows.push(SweepRow { pe, modes, report: Err(String::new()), note: None, wall_time: 0.0 });
            } else if let Some(rest) = line.strip_prefix("note ") {
                let (pe, msg) = tagged(rest)?;
                let i = find(&mut rows, pe)?;
                rows[i].note = Some(msg);
            } else if let Some(rest) = line.strip_prefix("failed ") {
                let (pe, msg) = tagged(rest)?;
                let i = find(&mut rows, pe)?;
                rows[i].report = Err(msg);
            } else if let Some((k, _)) = line.split_once('=') {
                if CONFIG_KEYS.contains(&k) {
                    cfg_text.push_str(line);
                    cfg_text.push('\n');
                }
            }
        }
        let config = SweepConfig::from_text(&cfg_text)?;
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rd.headers().map_err(csv_err)?;
        if header.iter().ne(CSV_COLUMNS) {
            return Err(Error::InvalidParameter(format!("unexpected CSV header {header:?}")));
        }
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let f = |i: usize| parse_f64(&rec[i]);
            let opt = |i: usize| if rec[i].is_empty() { Ok(None) } else { parse_f64(&rec[i]).map(Some) };
            let rep = BoundReport {
                pe: f(0)?,
                constraint: rec[1].parse()?,
                upper: f(2)?,
                lower: opt(3)?,
                exact: opt(4)?,
                residual_flux: f(5)?,
                residual_q: f(6)?,
                grad_eta: f(7)?,
                flow_norm: f(8)?,
                delta_star: opt(9)?,
            };
            let i = find(&mut rows, rep.pe)?;
            rows[i].report = Ok(rep);
        }
        Ok(Self { config, rows })
    }
}

/// Writes the table as CSV.
pub fn write_csv(t: &SweepTable, path: &Path) -> Result<()> {
    fs::write(path, t.to_csv()?).map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))
}

/// Reads a table written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<SweepTable> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    SweepTable::from_csv(&text)
}

/// 17 significant digits, enough to round-trip any f64.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad number '{s}' in CSV")))
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

/// Splits `pe=<value> <message>`.
fn tagged(rest: &str) -> Result<(f64, String)> {
    let (head, msg) = rest.split_once(' ').unwrap_or((rest, ""));
    let pe = head
        .strip_prefix("pe=")
        .ok_or_else(|| Error::InvalidParameter(format!("malformed metadata line '{rest}'")))?;
    Ok((parse_f64(pe)?, msg.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("CSV error: {e}"))
}
