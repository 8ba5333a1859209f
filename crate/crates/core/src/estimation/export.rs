//! Heatmap export. CSV layout: optional `# ...` comment lines (peak
//! annotations), then a header `row_name\col_name,c0,c1,...`, then one line
//! per row `r,v0,v1,...` in dB. PGM export is binary 8-bit (P5) with the
//! last row at the top, mapping `[peak - dynamic_range, peak]` dB linearly
//! to `[0, 255]`.

use std::fmt::Write as _;
use std::path::Path;

use crate::fsutil::write_atomic;
use crate::{Error, Result};

pub const DEFAULT_DYNAMIC_RANGE_DB: f64 = 50.0;

/// A 2D dB grid with named axes.
#[derive(Debug, Clone, Copy)]
pub struct Heatmap<'a> {
    pub row_name: &'a str,
    pub row_axis: &'a [f64],
    pub col_name: &'a str,
    pub col_axis: &'a [f64],
    /// Row-major, `row_axis.len() × col_axis.len()`.
    pub values_db: &'a [f64],
}

impl Heatmap<'_> {
    fn check(&self) -> Result<()> {
        if self.values_db.len() != self.row_axis.len() * self.col_axis.len() || self.values_db.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {}×{} heatmap",
                self.values_db.len(),
                self.row_axis.len(),
                self.col_axis.len()
            )));
        }
        Ok(())
    }
}

pub fn heatmap_csv(map: &Heatmap<'_>, annotations: &[String]) -> Result<String> {
    map.check()?;
    let mut s = String::new();
    for a in annotations {
        writeln!(s, "# {a}").unwrap();
    }
    write!(s, "{}\\{}", map.row_name, map.col_name).unwrap();
    for c in map.col_axis {
        write!(s, ",{c}").unwrap();
    }
    s.push('\n');
    let cols = map.col_axis.len();
    for (r, rv) in map.row_axis.iter().enumerate() {
        write!(s, "{rv}").unwrap();
        for v in &map.values_db[r * cols..(r + 1) * cols] {
            write!(s, ",{v:.4}").unwrap();
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn heatmap_pgm(map: &Heatmap<'_>, dynamic_range_db: f64) -> Result<Vec<u8>> {
    map.check()?;
    if !(dynamic_range_db > 0.0) {
        return Err(Error::invalid("dynamic range must be positive"));
    }
    let (rows, cols) = (map.row_axis.len(), map.col_axis.len());
    let peak = map.values_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    for r in (0..rows).rev() {
        for v in &map.values_db[r * cols..(r + 1) * cols] {
            let x = ((v - (peak - dynamic_range_db)) / dynamic_range_db).clamp(0.0, 1.0);
            out.push((x * 255.0).round() as u8);
        }
    }
    Ok(out)
}

pub fn write_heatmap_csv(path: impl AsRef<Path>, map: &Heatmap<'_>, annotations: &[String]) -> Result<()> {
    write_atomic(path.as_ref(), heatmap_csv(map, annotations)?.as_bytes())
}

pub fn write_heatmap_pgm(path: impl AsRef<Path>, map: &Heatmap<'_>, dynamic_range_db: f64) -> Result<()> {
    write_atomic(path.as_ref(), &heatmap_pgm(map, dynamic_range_db)?)
}
