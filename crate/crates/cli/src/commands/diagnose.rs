use std::fmt::Write;
use std::path::PathBuf;

use bayesel::diagnostics::{format_table, heidelberger_welch, summarize_series, HeidelbergerWelch, Summary};
use bayesel::sampler::TraceTable;
use serde::Serialize;

use crate::commands::{to_json, write};
use crate::config::{load, DiagnoseConfig};
use crate::failure::Failure;
use crate::Globals;

#[derive(Debug, Serialize)]
pub struct Stationarity {
    pub name: String,
    /// `None` when the kept series is too short for the test.
    pub test: Option<HeidelbergerWelch>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub summary: Vec<Summary>,
    pub heidelberger_welch: Vec<Stationarity>,
}

/// Summaries and stationarity tests of already burnt-in series.
pub fn analyse(series: &[(String, Vec<f64>)], alpha: f64, eps: f64) -> Result<Report, Failure> {
    let mut summary = Vec::with_capacity(series.len());
    let mut hw = Vec::with_capacity(series.len());
    for (name, xs) in series {
        summary.push(summarize_series(name, xs)?);
        let test = match heidelberger_welch(xs, alpha, eps) {
            Ok(t) => Some(t),
            Err(bayesel::Error::TooShort { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        hw.push(Stationarity { name: name.clone(), test });
    }
    Ok(Report { summary, heidelberger_welch: hw })
}

impl Report {
    pub fn text(&self) -> String {
        let mut s = format_table(&self.summary);
        s.push_str("\nHeidelberger-Welch\n");
        let width = self.heidelberger_welch.iter().map(|h| h.name.len()).max().unwrap_or(0).max(9);
        for h in &self.heidelberger_welch {
            match &h.test {
                Some(t) => {
                    let _ = writeln!(
                        s,
                        "{:<width$} stationarity {} (start {}, p = {:.4})  halfwidth {} ({:.4} / {:.4})",
                        h.name,
                        if t.stationary { "passed" } else { "failed" },
                        t.start,
                        t.pvalue,
                        if t.halfwidth_ok { "passed" } else { "failed" },
                        t.halfwidth,
                        t.mean
                    );
                }
                None => {
                    let _ = writeln!(s, "{:<width$} too short to test", h.name);
                }
            }
        }
        s
    }
}

pub fn run(g: &Globals, trace: Option<PathBuf>, burn_in: Option<usize>) -> Result<(), Failure> {
    let cfg = match (trace, &g.config) {
        (Some(trace), _) => DiagnoseConfig { trace, burn_in: burn_in.unwrap_or(0), alpha: 0.05, eps: 0.1 },
        (None, Some(path)) => {
            let (mut cfg, base): (DiagnoseConfig, _) = load(path)?;
            cfg.trace = base.join(&cfg.trace);
            if let Some(b) = burn_in {
                cfg.burn_in = b;
            }
            cfg
        }
        (None, None) => return Err(Failure::input("give a trace CSV or --config")),
    };
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) || !(cfg.eps > 0.0) {
        return Err(Failure::input("alpha must lie in (0, 1) and eps must be positive"));
    }
    let text = std::fs::read_to_string(&cfg.trace).map_err(|e| Failure::io(&cfg.trace, e))?;
    let table = TraceTable::parse_csv(&text)?;
    if cfg.burn_in >= table.len() {
        return Err(bayesel::Error::EmptyTrace { length: table.len(), burn_in: cfg.burn_in }.into());
    }
    let series: Vec<(String, Vec<f64>)> = table
        .names
        .iter()
        .zip(&table.columns)
        .filter(|(name, _)| name.as_str() != "log_post")
        .map(|(name, col)| (name.clone(), col[cfg.burn_in..].to_vec()))
        .collect();
    let report = analyse(&series, cfg.alpha, cfg.eps)?;
    let dir = g.out_dir()?;
    write(&dir.join("diagnostics.json"), to_json(&report)?)?;
    print!("{}", report.text());
    Ok(())
}
