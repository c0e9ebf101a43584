//! CSV tables and JSON spectrum reports.

use std::io::Write;

use caseflux_core::spectrum::SpectrumData;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// 17 significant digits, enough to round-trip any f64.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus rows of optional reals; `None` writes an empty cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.map(format_real).unwrap_or_default()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(input: impl std::io::Read) -> Result<Table> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|cell| if cell.is_empty() { Ok(None) } else { cell.parse().map(Some) })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| crate::error::Error::Config(format!("bad number in CSV: {e}")))?;
            rows.push(row);
        }
        Ok(Table { header, rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub m: i32,
    pub c: f64,
    pub eigenvalues: Vec<f64>,
    pub norms: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl From<&SpectrumData> for SpectrumReport {
    fn from(s: &SpectrumData) -> Self {
        Self {
            m: s.m,
            c: s.albedo,
            eigenvalues: s.eigenvalues.clone(),
            norms: s.norms.clone(),
            residuals: s.residuals.clone(),
        }
    }
}

pub fn write_spectrum_json(reports: &[SpectrumReport], mut out: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, reports)?;
    writeln!(out)?;
    Ok(())
}
