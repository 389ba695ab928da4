//! CSV output of sweep rows.

use std::io::Write;
use std::path::Path;

use crate::sweep::SweepReport;
use crate::HarnessError;

pub const CSV_HEADER: [&str; 6] = ["method", "H", "error", "full_evals", "surrogate_evals", "wall_s"];

/// Writes the rows in report order (methods as configured, `H` descending).
/// Reals are printed with 17 significant digits, so they round-trip.
pub fn write_csv<W: Write>(report: &SweepReport, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.method.clone(),
            format!("{:.16e}", r.h),
            format!("{:.16e}", r.error),
            r.full_evals.to_string(),
            r.surrogate_evals.to_string(),
            format!("{:.16e}", r.wall_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(report: &SweepReport, path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(report, std::io::BufWriter::new(file)).map_err(|e| HarnessError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
