use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;

/// One line of the sweep CSV.
#[derive(Clone, Debug)]
pub struct CsvRow {
    pub t: f64,
    pub witness_id: usize,
    pub value: f64,
    pub derivative: f64,
    pub flag: bool,
}

pub const CSV_HEADER: &str = "t,witness_id,value,derivative,flag";

/// Floats carry 17 significant digits so reruns compare byte for byte.
pub fn csv(rows: &[CsvRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{:.16e},{},{:.16e},{:.16e},{}", r.t, r.witness_id, r.value, r.derivative, u8::from(r.flag))
            .expect("writing to a String");
    }
    out
}

#[derive(Debug)]
pub enum Status {
    Clean,
    Violation,
    /// Ran far enough to produce a report, but the input failed validation.
    Failed(String),
}

pub struct Outcome {
    pub report: Value,
    /// `None` for commands without a sweep.
    pub rows: Option<Vec<CsvRow>>,
    pub status: Status,
    pub summary: String,
}

/// Writes `report.json` and `sweep.csv` under `dir`, or prints the report when there is no directory.
pub fn emit(outcome: &Outcome, dir: Option<&Path>) -> Result<()> {
    let report = serde_json::to_string_pretty(&outcome.report)? + "\n";
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join("report.json");
            std::fs::write(&path, report).with_context(|| format!("writing {}", path.display()))?;
            if let Some(rows) = &outcome.rows {
                let path = dir.join("sweep.csv");
                std::fs::write(&path, csv(rows)).with_context(|| format!("writing {}", path.display()))?;
            }
            println!("{}", outcome.summary);
        }
        None => print!("{report}"),
    }
    Ok(())
}
