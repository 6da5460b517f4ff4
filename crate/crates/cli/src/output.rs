use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use doublematch::verify::MatchPoint;

pub const RESIDUALS_HEADER: &str = "n,radius_inner,residual_inner,residual_outer";

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_residuals_csv<W: Write>(points: &[MatchPoint], mut w: W) -> io::Result<()> {
    writeln!(w, "{RESIDUALS_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(p.n),
            fmt_f64(p.radius_inner),
            fmt_f64(p.residual_inner),
            fmt_f64(p.residual_outer)
        )?;
    }
    Ok(())
}

pub fn export_csv(points: &[MatchPoint], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_residuals_csv(points, &mut buf)?;
    std::fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

/// Rows of a residuals file, in column order.
pub fn parse_residuals_csv(text: &str) -> Result<Vec<[f64; 4]>> {
    let mut lines = text.split('\n');
    if lines.next() != Some(RESIDUALS_HEADER) {
        bail!("missing residuals header");
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            bail!("line {}: expected 4 fields, found {}", i + 2, fields.len());
        }
        let mut row = [0.0; 4];
        for (slot, field) in row.iter_mut().zip(&fields) {
            *slot = field.parse().with_context(|| format!("line {}: bad number {field:?}", i + 2))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Generic CSV with a header and `{:.16e}` cells.
pub fn write_table<W: Write>(header: &[&str], rows: &[Vec<f64>], mut w: W) -> io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
