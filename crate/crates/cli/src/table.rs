//! Numeric tables written as CSV (12 significant digits) or JSON.

use serde::Serialize;

use crate::error::CliError;

/// Formats `x` with 12 significant digits in scientific notation.
pub fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| fmt_sig12(*x)))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
    }
}

/// Key/value/unit records, for scalar reports.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Records(pub Vec<(String, f64, &'static str)>);

impl Records {
    pub fn push(&mut self, key: impl Into<String>, value: f64, unit: &'static str) {
        self.0.push((key.into(), value, unit));
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["quantity", "value", "unit"])?;
        for (k, v, u) in &self.0 {
            w.write_record([k.as_str(), &fmt_sig12(*v), u])?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
    }
}
