//! WebAssembly entry points for the static demo in `www/`.
//!
//! Every function returns a flat `Vec<f64>` (a `Float64Array` on the JS
//! side) with a short numeric header, so no serialization layer is needed.
//! Errors come back as strings.

use delaycount::delay::{
    count_resonances, detect_resonances, integrate_delay_with, CountingQuantum, DelayOptions,
};
use delaycount::engine::EnergyGrid;
use delaycount::io::emit::stride_indices;
use delaycount::oscillator::{contraction_exponent, integrate_oscillator, OscillatorConfig};
use delaycount::potential::{Geometry, Layer, PotentialProfile};
use delaycount::resonance::{bw_sample, BWParams};
use delaycount::wigner::{
    direct_delay_integral, phase_space_delay_integral, van_kampen_kernel, wigner_distribution,
    KernelOptions,
};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 4000;

fn err(e: delaycount::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Delay scan of a layered profile given as `[w0, h0, w1, h1, ...]`.
///
/// Layout: `[count_h, count_hbar, n_candidates, n, E.., tau.., I..]`,
/// decimated to at most 4000 samples.
pub fn scan(
    layers: &[f64],
    radial: bool,
    e_min: f64,
    e_max: f64,
    points: usize,
) -> delaycount::Result<Vec<f64>> {
    if !layers.len().is_multiple_of(2) {
        return Err(delaycount::Error::InvalidInput(
            "layers need width/height pairs".into(),
        ));
    }
    let geometry = if radial {
        Geometry::RadialSWave
    } else {
        Geometry::FullLine
    };
    let profile = PotentialProfile::new(
        geometry,
        layers.chunks(2).map(|c| Layer::new(c[0], c[1])).collect(),
    );
    let p = profile.validate()?;
    let grid = EnergyGrid::uniform(e_min, e_max, points)?.avoiding_thresholds(&p)?;
    let dp = integrate_delay_with(&p, &grid, p.support_end(), DelayOptions::default())?;
    let count = count_resonances(&dp, e_max, CountingQuantum::Planck)?;
    let cands = detect_resonances(&dp);
    let idx = stride_indices(dp.len(), MAX_POINTS);
    let mut out = vec![
        count.count_h,
        count.count_hbar,
        cands.len() as f64,
        idx.len() as f64,
    ];
    for v in [dp.energies(), dp.tau(), dp.cumulative()] {
        out.extend(idx.iter().map(|&i| v[i]));
    }
    Ok(out)
}

/// Ramped oscillator. Layout: `[gamma0 (NaN if unavailable), drift, n, x.., p..]`.
pub fn spiral(omega0: f64, eps: f64, t_end: f64, dt: f64) -> delaycount::Result<Vec<f64>> {
    let cfg = OscillatorConfig {
        omega0,
        ramp_rate_eps: eps,
        x0: 1.0,
        p0: 0.0,
        t_end,
        dt,
    };
    cfg.validate()?;
    let tr = integrate_oscillator(&cfg)?;
    let gamma = if eps > 0.0 {
        contraction_exponent(&tr)
            .map(|c| c.gamma_at_start)
            .unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    let idx = stride_indices(tr.len(), MAX_POINTS);
    let mut out = vec![gamma, tr.max_action_drift(), idx.len() as f64];
    out.extend(idx.iter().map(|&i| tr.x[i]));
    out.extend(idx.iter().map(|&i| tr.p[i]));
    Ok(out)
}

/// Wigner map of a Breit-Wigner resonance sampled at `dE, 2 dE, .., n dE`.
///
/// Layout: `[rows, cols, phase_space, direct, zeta.., E.., W row-major..]`,
/// clipped to `|zeta+| <= zeta_max` and decimated to at most 120 x 120.
pub fn wigner_map(
    e0: f64,
    gamma: f64,
    de: f64,
    n: usize,
    zeta_max: f64,
) -> delaycount::Result<Vec<f64>> {
    let bw = BWParams::new(e0, gamma);
    let samples: Vec<_> = (1..=n).map(|m| bw_sample(m as f64 * de, &bw)).collect();
    let kg = van_kampen_kernel(&samples, 0.0, KernelOptions::default())?;
    let wg = wigner_distribution(&kg);
    let ps = phase_space_delay_integral(&wg, 0.0)?;
    let direct = direct_delay_integral(&samples, ps.band.0, ps.band.1)?;
    let wg = wg.clipped(zeta_max);
    let rows = stride_indices(wg.rows(), 120);
    let cols = stride_indices(wg.cols(), 120);
    let mut out = vec![
        rows.len() as f64,
        cols.len() as f64,
        ps.referenced_integral(),
        direct,
    ];
    out.extend(rows.iter().map(|&r| wg.zeta_plus[r]));
    out.extend(cols.iter().map(|&c| wg.energy[c]));
    for &r in &rows {
        out.extend(cols.iter().map(|&c| wg.at(r, c)));
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn delay_scan(
    layers: Vec<f64>,
    radial: bool,
    e_min: f64,
    e_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    scan(&layers, radial, e_min, e_max, points).map_err(err)
}

#[wasm_bindgen]
pub fn oscillator_spiral(omega0: f64, eps: f64, t_end: f64, dt: f64) -> Result<Vec<f64>, JsError> {
    spiral(omega0, eps, t_end, dt).map_err(err)
}

#[wasm_bindgen]
pub fn breit_wigner_map(
    e0: f64,
    gamma: f64,
    de: f64,
    n: usize,
    zeta_max: f64,
) -> Result<Vec<f64>, JsError> {
    wigner_map(e0, gamma, de, n, zeta_max).map_err(err)
}
