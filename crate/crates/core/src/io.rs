//! CSV tables: 17 significant digits, comma-separated, LF line endings.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::evolve::Trajectory;

pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "p_e", "re_rho01", "im_rho01", "purity", "gamma"];

/// Scientific notation with 17 significant digits; round-trips exactly.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Validation(format!("not a number: {s:?} ({e})")))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Write a header and string rows.
pub fn write_table<W: Write>(w: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Header and string rows of a CSV table.
pub fn read_table<R: Read>(r: R) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|rec| Ok(rec?.iter().map(str::to_string).collect()))
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

/// Header and numeric rows.
pub fn read_numeric_table<R: Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let (header, rows) = read_table(r)?;
    let rows = rows
        .iter()
        .map(|row| row.iter().map(|c| parse_number(c)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

pub fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    traj.times
        .iter()
        .zip(&traj.observables)
        .map(|(t, o)| {
            vec![
                format_number(*t),
                format_number(o.p_e),
                format_number(o.rho01.re),
                format_number(o.rho01.im),
                format_number(o.purity),
                format_number(o.gamma.unwrap_or(f64::NAN)),
            ]
        })
        .collect()
}

pub fn write_trajectory<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let header: Vec<String> = TRAJECTORY_HEADER.iter().map(|s| s.to_string()).collect();
    write_table(w, &header, &trajectory_rows(traj))
}

/// One row of a trajectory CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub p_e: f64,
    pub re_rho01: f64,
    pub im_rho01: f64,
    pub purity: f64,
    /// NaN when the decay rate is undefined.
    pub gamma: f64,
}

pub fn read_trajectory<R: Read>(r: R) -> Result<Vec<TrajectoryRow>> {
    let (header, rows) = read_numeric_table(r)?;
    if header != TRAJECTORY_HEADER {
        return Err(Error::Validation(format!("unexpected trajectory header {header:?}")));
    }
    rows.into_iter()
        .map(|v| {
            if v.len() != 6 {
                return Err(Error::Validation(format!("trajectory row has {} fields", v.len())));
            }
            Ok(TrajectoryRow {
                t: v[0],
                p_e: v[1],
                re_rho01: v[2],
                im_rho01: v[3],
                purity: v[4],
                gamma: v[5],
            })
        })
        .collect()
}
