//! CSV and JSON writers and the CSV reader.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which parses
//! back to the same `f64`.

use std::fs;
use std::path::{Path, PathBuf};

use contractive_core::trajectory::{TrajectoryRecord, COLUMNS};
use serde::Serialize;

use crate::error::CliError;

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn header() -> String {
    COLUMNS.join(",")
}

fn write_rows<W: std::io::Write>(
    w: &mut csv::Writer<W>,
    prefix: &[&str],
    rows: &[Vec<f64>],
) -> csv::Result<()> {
    w.write_record(prefix.iter().copied().chain(COLUMNS))?;
    for row in rows {
        w.write_record(row.iter().map(|&v| format_float(v)))?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    CliError::io(path, source)
}

/// Trajectory CSV as a string.
pub fn trajectory_csv(records: &[TrajectoryRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let rows: Vec<Vec<f64>> = records.iter().map(|r| r.values().to_vec()).collect();
    write_rows(&mut w, &[], &rows).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flushed")).expect("ascii output")
}

pub fn write_trajectory_csv(path: &Path, records: &[TrajectoryRecord]) -> Result<(), CliError> {
    fs::write(path, trajectory_csv(records)).map_err(|e| CliError::io(path, e))
}

/// Long-format CSV with a leading `phi0` column, one block per series.
pub fn write_series_csv(path: &Path, series: &[(f64, Vec<TrajectoryRecord>)]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let rows: Vec<Vec<f64>> = series
        .iter()
        .flat_map(|(phi0, recs)| {
            recs.iter().map(move |r| std::iter::once(*phi0).chain(r.values()).collect())
        })
        .collect();
    write_rows(&mut w, &["phi0"], &rows).map_err(|e| csv_error(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Reads a trajectory CSV and checks the header.
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRecord>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_trajectory_csv(&text).map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRecord>, String> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let head = rdr.headers().map_err(|e| e.to_string())?;
    if head.iter().ne(COLUMNS) {
        return Err(format!("unexpected header '{}'", head.iter().collect::<Vec<_>>().join(",")));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| e.to_string())?;
        let values = row
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| format!("row {}: bad number '{v}'", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(TrajectoryRecord::from_values(&values).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// `path` with `.partial` appended.
pub fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        assert_eq!(format_float(f64::INFINITY).parse::<f64>().unwrap(), f64::INFINITY);
    }

    #[test]
    fn header_text() {
        assert_eq!(
            header(),
            "t,alpha_re,alpha_im,gamma_re,gamma_im,omega,eof,epr_F,var_q1,theta,r,phi,s,residual"
        );
    }

    #[test]
    fn partial_suffix() {
        assert_eq!(partial_path(Path::new("out/a.csv")), PathBuf::from("out/a.csv.partial"));
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(parse_trajectory_csv("t,alpha\n1,2\n").is_err());
    }
}
