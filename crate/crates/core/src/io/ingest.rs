//! Phase-shift tables `E,delta[,sigma]` turned into delay profiles.

use serde::{Deserialize, Serialize};

use crate::delay::DelayProfile;
use crate::engine::EnergyGrid;
use crate::error::{Error, Result};
use crate::units::HBAR;

pub const MIN_ROWS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftRow {
    pub e: f64,
    pub delta: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftTable {
    pub rows: Vec<PhaseShiftRow>,
}

impl PhaseShiftTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Csv(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let with_sigma = match header
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
            .as_slice()
        {
            ["E", "delta"] => false,
            ["E", "delta", "sigma"] => true,
            _ => return Err(Error::BadHeader(header.join(","))),
        };
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
            let row = i + 1;
            let num = |k: usize| -> Result<f64> {
                let s = rec.get(k).unwrap_or("");
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::Csv(format!("row {row}: `{s}` is not a number")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Csv(format!("row {row}: non-finite value")))
                }
            };
            rows.push(PhaseShiftRow {
                e: num(0)?,
                delta: num(1)?,
                sigma: if with_sigma { Some(num(2)?) } else { None },
            });
        }
        if rows.len() < MIN_ROWS {
            return Err(Error::TooFewRows {
                needed: MIN_ROWS,
                got: rows.len(),
            });
        }
        for (i, w) in rows.windows(2).enumerate() {
            if !(w[1].e > w[0].e) {
                return Err(Error::NonMonotonicEnergy { row: i + 2 });
            }
        }
        Ok(Self { rows })
    }

    /// Phases shifted by multiples of pi to remove jumps larger than pi/2.
    pub fn unwrapped(&self) -> Vec<f64> {
        use std::f64::consts::PI;
        let mut out: Vec<f64> = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let d = match out.last() {
                Some(&prev) => r.delta - PI * ((r.delta - prev) / PI).round(),
                None => r.delta,
            };
            out.push(d);
        }
        out
    }
}

/// Natural cubic spline: returns the first derivative at each node.
pub fn spline_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 2 && y.len() == n);
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    // second derivatives m with m[0] = m[n-1] = 0, Thomas algorithm
    let mut m = vec![0.0; n];
    if n > 2 {
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
        }
        for i in 1..k {
            let f = h[i] / diag[i - 1];
            diag[i] -= f * h[i];
            rhs[i] -= f * rhs[i - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
        }
    }
    let mut d = Vec::with_capacity(n);
    for i in 0..n - 1 {
        d.push((y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0);
    }
    let i = n - 2;
    d.push((y[i + 1] - y[i]) / h[i] + h[i] * (m[i] + 2.0 * m[i + 1]) / 6.0);
    d
}

/// `tau = 2 hbar d delta / dE` from the spline of the unwrapped phase, on the
/// table's own energies.
pub fn ingest_phase_shifts(text: &str) -> Result<DelayProfile> {
    let table = PhaseShiftTable::parse(text)?;
    profile_from_table(&table)
}

pub fn profile_from_table(table: &PhaseShiftTable) -> Result<DelayProfile> {
    let e: Vec<f64> = table.rows.iter().map(|r| r.e).collect();
    let delta = table.unwrapped();
    let tau: Vec<f64> = spline_slopes(&e, &delta)
        .into_iter()
        .map(|s| 2.0 * HBAR * s)
        .collect();
    let grid = EnergyGrid::new(e).map_err(|err| Error::Csv(err.to_string()))?;
    DelayProfile::from_samples(grid, tau, delta, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::detect_resonances;
    use crate::resonance::{bw_phase, BWParams, PhaseConvention};
    use std::fmt::Write;

    fn bw_csv(rows: usize) -> String {
        let p = BWParams::new(0.77, 0.15);
        let mut s = String::from("E,delta\n");
        for i in 0..rows {
            let e = 0.77 - 0.75 + 1.5 * i as f64 / (rows - 1) as f64;
            // wrapped into (-pi/2, pi/2] as a table would usually be
            let d = bw_phase(e, &p, PhaseConvention::Standard);
            let d = d - std::f64::consts::PI * (d / std::f64::consts::PI).round();
            writeln!(s, "{e},{d}").unwrap();
        }
        s
    }

    #[test]
    fn spline_is_exact_on_lines() {
        let x = [0.0, 0.5, 1.5, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        assert!(spline_slopes(&x, &y)
            .iter()
            .all(|d| (d - 3.0).abs() < 1e-14));
    }

    #[test]
    fn breit_wigner_table() {
        let dp = ingest_phase_shifts(&bw_csv(50)).unwrap();
        let found = detect_resonances(&dp);
        assert_eq!(found.len(), 1, "{found:?}");
        assert!((found[0].e0 - 0.77).abs() < 0.01 * 0.77);
        assert!(
            (found[0].gamma - 0.15).abs() < 0.05 * 0.15,
            "{}",
            found[0].gamma
        );
    }

    #[test]
    fn constant_phase() {
        let mut s = String::from("E,delta,sigma\n");
        for i in 1..=10 {
            writeln!(s, "{},0.3,0.01", i as f64).unwrap();
        }
        assert!(ingest_phase_shifts(&s)
            .unwrap()
            .tau()
            .iter()
            .all(|&t| t == 0.0));
    }

    #[test]
    fn table_errors() {
        assert!(matches!(
            ingest_phase_shifts("E,phase\n1,2\n"),
            Err(Error::BadHeader(_))
        ));
        assert!(matches!(
            ingest_phase_shifts("E,delta\n1,0\n2,0\n"),
            Err(Error::TooFewRows { .. })
        ));
        let mut s = String::from("E,delta\n");
        for e in [1.0, 2.0, 3.0, 2.5, 4.0, 5.0, 6.0, 7.0] {
            writeln!(s, "{e},0").unwrap();
        }
        assert!(matches!(
            ingest_phase_shifts(&s),
            Err(Error::NonMonotonicEnergy { row: 4 })
        ));
    }
}
