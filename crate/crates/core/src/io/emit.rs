//! Result files. Everything is rendered into memory first and written in one
//! sequential pass, so the bytes never depend on scheduling.
//!
//! Numbers in `.csv` and `.dat` files carry 17 significant digits, enough to
//! round-trip any `f64`. Rust float formatting ignores the locale.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::delay::DelayProfile;
use crate::error::{Error, Result};
use crate::wigner::{KernelGrid, WignerGrid};

pub use super::config::FORMAT_VERSION;

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Output files keyed by path relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outputs {
    pub files: BTreeMap<PathBuf, Vec<u8>>,
}

impl Outputs {
    pub fn add(&mut self, rel: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(rel.into(), bytes.into());
    }

    pub fn add_json(&mut self, rel: impl Into<PathBuf>, value: &serde_json::Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.add(rel, text);
        Ok(())
    }

    pub fn write_all(&self, dir: &Path) -> Result<()> {
        for (rel, bytes) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// `E,tau,cumulative,count` with `count = cumulative / quantum`.
pub fn delay_csv(dp: &DelayProfile, quantum: f64) -> String {
    let mut s = format!("# delay.csv format_version={FORMAT_VERSION}\nE,tau,cumulative,count\n");
    for ((e, t), c) in dp.energies().iter().zip(dp.tau()).zip(dp.cumulative()) {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt17(*e),
            fmt17(*t),
            fmt17(*c),
            fmt17(c / quantum)
        );
    }
    s
}

/// Whitespace-separated columns with `#` header lines.
pub fn series_dat(header: &[&str], columns: &[&[f64]]) -> String {
    let mut s = format!("# format_version={FORMAT_VERSION}\n");
    for h in header {
        let _ = writeln!(s, "# {h}");
    }
    let n = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    for i in 0..n {
        let row: Vec<String> = columns.iter().map(|c| fmt17(c[i])).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

/// Evenly spaced indices, at most `max` of them, always including both ends.
pub fn stride_indices(len: usize, max: usize) -> Vec<usize> {
    if len <= max || max < 2 {
        return (0..len).collect();
    }
    let mut idx: Vec<usize> = (0..max).map(|k| k * (len - 1) / (max - 1)).collect();
    idx.dedup();
    idx
}

/// Heat map in gnuplot `pm3d` layout: `zeta+ E W`, a blank line between rows.
pub fn wigner_dat(wg: &WignerGrid, max_rows: usize, max_cols: usize) -> String {
    let mut s = format!(
        "# format_version={FORMAT_VERSION}\n# Wigner distribution W(zeta+, E), window={}, padding={}\n# zeta+ E W\n",
        wg.options.window.name(),
        wg.options.padding
    );
    let rows = stride_indices(wg.rows(), max_rows);
    let cols = stride_indices(wg.cols(), max_cols);
    for &r in &rows {
        for &c in &cols {
            let _ = writeln!(
                s,
                "{} {} {}",
                fmt17(wg.zeta_plus[r]),
                fmt17(wg.energy[c]),
                fmt17(wg.at(r, c))
            );
        }
        s.push('\n');
    }
    s
}

/// `zeta |H| Re H Im H` for `|zeta| <= limit`.
pub fn kernel_dat(kg: &KernelGrid, limit: f64) -> String {
    let mut s = format!(
        "# format_version={FORMAT_VERSION}\n# van Kampen kernel, a={}\n# zeta |H| Re_H Im_H\n",
        fmt17(kg.a)
    );
    for (z, h) in kg.zeta.iter().zip(&kg.h) {
        if z.abs() <= limit {
            let _ = writeln!(
                s,
                "{} {} {} {}",
                fmt17(*z),
                fmt17(h.norm()),
                fmt17(h.re),
                fmt17(h.im)
            );
        }
    }
    s
}
