//! Chain output and its CSV form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimating::ThetaSplit;

/// Ordered chain output. Entry `t` of every per-step list describes the
/// state after step `t`; a rejected step repeats the previous state exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub param_names: Vec<String>,
    pub states: Vec<ThetaSplit>,
    /// Names of auxiliary (e.g. Gibbs-updated) quantities; empty for plain runs.
    pub aux_names: Vec<String>,
    pub aux: Vec<Vec<f64>>,
    pub log_posts: Vec<f64>,
    pub accepted: Vec<bool>,
    /// Conditional EL maximiser at the proposed `theta1` (`None` when that trial problem was infeasible).
    pub mcele_values: Vec<Option<Vec<f64>>>,
    pub seed: u64,
    pub burn_in: usize,
    /// Individual two-step MH updates, which can be several per step.
    pub mh_attempts: usize,
    pub mh_accepts: usize,
}

impl Trace {
    pub fn new(param_names: Vec<String>, aux_names: Vec<String>, seed: u64, burn_in: usize) -> Self {
        Self {
            param_names,
            states: Vec::new(),
            aux_names,
            aux: Vec::new(),
            log_posts: Vec::new(),
            accepted: Vec::new(),
            mcele_values: Vec::new(),
            seed,
            burn_in,
            mh_attempts: 0,
            mh_accepts: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.mh_attempts == 0 {
            0.0
        } else {
            self.mh_accepts as f64 / self.mh_attempts as f64
        }
    }

    /// All column names: parameters then auxiliaries.
    pub fn column_names(&self) -> Vec<String> {
        self.param_names.iter().chain(&self.aux_names).cloned().collect()
    }

    /// Values of column `j` (parameters then auxiliaries) at every step.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let np = self.param_names.len();
        if j < np {
            self.states.iter().map(|s| {
                let p = s.theta1.len();
                if j < p {
                    s.theta1[j]
                } else {
                    s.theta2[j - p]
                }
            }).collect()
        } else {
            self.aux.iter().map(|a| a[j - np]).collect()
        }
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.column_names().iter().position(|n| n == name).map(|j| self.column(j))
    }

    /// Post-burn-in slice of a column.
    pub fn kept(&self, j: usize) -> Result<Vec<f64>> {
        if self.burn_in >= self.len() {
            return Err(Error::EmptyTrace { length: self.len(), burn_in: self.burn_in });
        }
        Ok(self.column(j)[self.burn_in..].to_vec())
    }

    pub(crate) fn push(&mut self, state: &ThetaSplit, aux: &[f64], log_post: f64, accepted: bool, mcele: Option<Vec<f64>>) {
        self.states.push(state.clone());
        if !self.aux_names.is_empty() {
            self.aux.push(aux.to_vec());
        }
        self.log_posts.push(log_post);
        self.accepted.push(accepted);
        self.mcele_values.push(mcele);
    }

    /// CSV with header `iter,accepted,log_post,<params>,<aux>`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = String::from("iter,accepted,log_post");
        for name in self.column_names() {
            header.push(',');
            header.push_str(&name);
        }
        writeln!(w, "{header}")?;
        let mut line = String::new();
        for t in 0..self.len() {
            line.clear();
            use std::fmt::Write as _;
            let _ = write!(line, "{},{},{}", t + 1, u8::from(self.accepted[t]), self.log_posts[t]);
            for v in self.states[t].theta1.iter().chain(&self.states[t].theta2) {
                let _ = write!(line, ",{v}");
            }
            if let Some(a) = self.aux.get(t) {
                for v in a {
                    let _ = write!(line, ",{v}");
                }
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Columns of a trace CSV read back for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub accepted: Vec<bool>,
    /// Move label per row when present (model-selection traces).
    pub moves: Vec<String>,
}

impl TraceTable {
    /// Reads any CSV whose numeric columns are parameters. `iter`, `accepted`,
    /// `move`, `gamma_bits` and non-numeric columns are bookkeeping and are
    /// not returned as parameters.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Invalid(format!("trace csv: {e}")))?
            .iter()
            .map(String::from)
            .collect();
        let records: Vec<csv::StringRecord> = reader
            .records()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Invalid(format!("trace csv: {e}")))?;
        let acc_col = header.iter().position(|h| h == "accepted");
        let move_col = header.iter().position(|h| h == "move");
        let mut names = Vec::new();
        let mut columns = Vec::new();
        for (j, h) in header.iter().enumerate() {
            if h == "iter" || h == "gamma_bits" || Some(j) == acc_col || Some(j) == move_col {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> = records.iter().map(|r| r[j].parse::<f64>()).collect();
            if let Ok(col) = parsed {
                names.push(h.clone());
                columns.push(col);
            }
        }
        let accepted = match acc_col {
            Some(j) => records
                .iter()
                .map(|r| match &r[j] {
                    "1" | "true" => Ok(true),
                    "0" | "false" => Ok(false),
                    other => Err(Error::Invalid(format!("bad accepted flag {other:?}"))),
                })
                .collect::<Result<_>>()?,
            None => Vec::new(),
        };
        let moves = move_col.map(|j| records.iter().map(|r| r[j].to_string()).collect()).unwrap_or_default();
        Ok(Self { names, columns, accepted, moves })
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(self.accepted.len(), Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|j| self.columns[j].as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip() {
        let mut t = Trace::new(vec!["theta1_1".into(), "theta2_1".into()], vec!["lambda".into()], 7, 0);
        let s = ThetaSplit::new(vec![0.25], vec![1.5]).unwrap();
        t.push(&s, &[3.0], -10.5, true, Some(vec![1.4]));
        t.push(&s, &[3.5], -10.5, false, None);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "iter,accepted,log_post,theta1_1,theta2_1,lambda");
        assert_eq!(text.lines().nth(2).unwrap(), "2,0,-10.5,0.25,1.5,3.5");
        let table = TraceTable::parse_csv(&text).unwrap();
        assert_eq!(table.names, ["log_post", "theta1_1", "theta2_1", "lambda"]);
        assert_eq!(table.accepted, [true, false]);
        assert_eq!(table.column_by_name("lambda").unwrap(), [3.0, 3.5]);
        assert_eq!(t.column_by_name("theta2_1").unwrap(), vec![1.5, 1.5]);
    }
}
