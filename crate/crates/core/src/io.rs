//! Observation matrices and CSV ingestion.

use std::path::Path;

use crate::error::{Error, Result};

/// `n x v` observation matrix, row-major, with optional column names.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    v: usize,
    values: Vec<f64>,
    names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(n: usize, v: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * v {
            return Err(Error::Dimension(format!("expected {} values for {n}x{v}, got {}", n * v, values.len())));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("data matrix".into()));
        }
        Ok(Self { n, v, values, names: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let v = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != v) {
            return Err(Error::Dimension("ragged data rows".into()));
        }
        Self::new(rows.len(), v, rows.concat())
    }

    /// Single-variable data. Panics on non-finite input.
    pub fn from_column(xs: &[f64]) -> Self {
        Self::new(xs.len(), 1, xs.to_vec()).expect("finite column")
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.v {
            return Err(Error::Dimension(format!("{} names for {} columns", names.len(), self.v)));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.v..(i + 1) * self.v]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.values[i * self.v + j]).collect()
    }

    /// Parse comma-separated text. The first line is a header when any of its
    /// fields fails to parse as a number.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut names = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Invalid(format!("csv: {e}")))?;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if line == 0 => names = Some(rec.iter().map(String::from).collect()),
                Err(e) => return Err(Error::Invalid(format!("csv line {}: {e}", line + 1))),
            }
        }
        if rows.is_empty() {
            return Err(Error::Dimension("csv has no data rows".into()));
        }
        let m = Self::from_rows(&rows)?;
        match names {
            Some(n) => m.with_names(n),
            None => Ok(m),
        }
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        Self::parse_csv(&text)
    }
}
