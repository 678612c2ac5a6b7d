//! The per-solve CSV report.

use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};

pub const COLUMNS: [&str; 10] = [
    "method",
    "reg",
    "noise_level",
    "slice",
    "k",
    "mu",
    "discrepancy",
    "psnr",
    "relerr",
    "cpu_secs",
];

/// One report line. `None` fields are written as `NA`; a row whose `k` is
/// `None` marks a failed solve.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub reg: String,
    pub noise_level: f64,
    /// `None` when the whole block was solved at once.
    pub slice: Option<usize>,
    pub k: Option<usize>,
    pub mu: Option<f64>,
    pub discrepancy: Option<f64>,
    pub psnr: Option<f64>,
    pub relerr: Option<f64>,
    pub elapsed: Option<Duration>,
}

impl ReportRow {
    pub fn failed(&self) -> bool {
        self.k.is_none()
    }

    fn fields(&self, timing: bool) -> [String; 10] {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map_or_else(|| "NA".to_string(), |v| v.to_string())
        }
        [
            self.method.clone(),
            self.reg.clone(),
            self.noise_level.to_string(),
            self.slice.map_or_else(|| "all".to_string(), |s| s.to_string()),
            opt(self.k),
            opt(self.mu),
            opt(self.discrepancy),
            opt(self.psnr),
            opt(self.relerr),
            opt(self.elapsed.filter(|_| timing).map(|d| d.as_secs_f64())),
        ]
    }
}

pub fn to_csv(rows: &[ReportRow], timing: bool) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r.fields(timing))?;
    }
    w.into_inner().context("flushing report")
}

pub fn write_csv(path: &Path, rows: &[ReportRow], timing: bool) -> Result<()> {
    std::fs::write(path, to_csv(rows, timing)?)
        .with_context(|| format!("writing {}", path.display()))
}
