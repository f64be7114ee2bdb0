//! Report files: full JSON plus one flat CSV per tabulated section.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::report::{CheckReport, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// Writes the requested formats into `out_dir` and returns the written
/// paths. With `bits`, nats-valued CSV columns are divided by ln 2; the JSON
/// report always stays in nats.
pub fn emit(report: &CheckReport, out_dir: &Path, formats: &[Format], bits: bool) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut written = Vec::new();
    if formats.contains(&Format::Json) {
        let path = out_dir.join(format!("{}.json", report.name));
        let text = serde_json::to_string_pretty(report).expect("reports serialize");
        fs::write(&path, text + "\n").map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }
    if formats.contains(&Format::Csv) {
        for (i, section) in report.sections.iter().enumerate() {
            let Some(table) = &section.table else { continue };
            let path = out_dir.join(format!("{}.{}.{}.csv", report.name, i, table.name));
            write_csv(&path, table, bits)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn write_csv(path: &Path, table: &Table, bits: bool) -> Result<(), HarnessError> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&table.headers).map_err(csv_err)?;
    for row in &table.rows {
        let cells = row.iter().zip(&table.nats).map(|(&v, &nats)| {
            let v = if bits && nats { v / std::f64::consts::LN_2 } else { v };
            if v.is_nan() {
                String::new()
            } else {
                v.to_string()
            }
        });
        w.write_record(cells).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}
