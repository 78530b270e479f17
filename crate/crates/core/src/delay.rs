//! Wigner-Smith delay, its energy integral and resonance counting.
//!
//! The lifetime matrix is `Q = -i hbar S^dagger dS/dE` and the delay is the
//! channel average `tau = Tr Q / N`. Integrated over energy, every isolated
//! resonance contributes one full sweep of the scattering phase, i.e.
//! `2 pi hbar` to `I(E) = int tau dE`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{max_abs, s_matrix_sample, CMatrix, EnergyGrid, SMatrixSample};
use crate::error::{Error, Result};
use crate::potential::ValidatedProfile;
use crate::quadrature::cumulative_integral;
use crate::units::{HBAR, PLANCK};

const UNITARITY_TOL: f64 = 1e-10;
const HERMITICITY_TOL: f64 = 1e-10;

/// Largest grid `integrate_delay` will build.
pub const MAX_POINTS: usize = 1_000_000;

/// `Q = -i hbar S^dagger dS/dE`.
pub fn q_matrix(sample: &SMatrixSample) -> Result<CMatrix> {
    let defect = sample.unitarity_defect();
    if !(defect <= UNITARITY_TOL) {
        return Err(Error::NonUnitaryInput(defect));
    }
    let q = sample.s.adjoint() * &sample.ds_de * Complex64::new(0.0, -HBAR);
    Ok(q)
}

/// `max |Q - Q^dagger|`.
pub fn hermiticity_defect(q: &CMatrix) -> f64 {
    max_abs(&(q - q.adjoint()))
}

/// Channel-averaged delay `Tr Q / N`.
pub fn time_delay(sample: &SMatrixSample) -> Result<f64> {
    let q = q_matrix(sample)?;
    let defect = hermiticity_defect(&q);
    if !(defect <= HERMITICITY_TOL) {
        return Err(Error::NonHermitian(defect));
    }
    Ok(q.trace().re / sample.channels() as f64)
}

/// Delay samples on an energy grid and their running integral.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayProfile {
    grid: EnergyGrid,
    tau: Vec<f64>,
    cumulative: Vec<f64>,
    phase: Vec<f64>,
    channels: usize,
}

impl DelayProfile {
    /// Builds a profile from raw samples; the running integral is recomputed.
    /// `phase` is the unwrapped total phase `arg det S / 2`.
    pub fn from_samples(
        grid: EnergyGrid,
        tau: Vec<f64>,
        phase: Vec<f64>,
        channels: usize,
    ) -> Result<Self> {
        if tau.len() != grid.len() || phase.len() != grid.len() {
            return Err(Error::InvalidInput(
                "sample count differs from grid size".into(),
            ));
        }
        let cumulative = cumulative_integral(grid.points(), &tau);
        Ok(Self {
            grid,
            tau,
            cumulative,
            phase,
            channels,
        })
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn energies(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// `I(e)`, using the trapezoid rule inside the last partial interval.
    pub fn integral_at(&self, e: f64) -> Result<f64> {
        let pts = self.grid.points();
        let (lo, hi) = (self.grid.first(), self.grid.last());
        if !(e >= lo && e <= hi) {
            return Err(Error::OutOfRange { value: e, lo, hi });
        }
        let i = pts
            .partition_point(|&x| x <= e)
            .saturating_sub(1)
            .min(pts.len() - 2);
        let h = e - pts[i];
        if h == 0.0 {
            return Ok(self.cumulative[i]);
        }
        let slope = (self.tau[i + 1] - self.tau[i]) / (pts[i + 1] - pts[i]);
        let tau_e = self.tau[i] + slope * h;
        Ok(self.cumulative[i] + 0.5 * h * (self.tau[i] + tau_e))
    }

    fn integral_clamped(&self, e: f64) -> f64 {
        let e = e.clamp(self.grid.first(), self.grid.last());
        self.integral_at(e).expect("clamped into range")
    }
}

/// Controls for [`integrate_delay_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayOptions {
    /// Adaptive bisection plus peak-local refinement.
    pub refine: bool,
    /// Largest mismatch (radians) tolerated between the trapezoid of the
    /// delay over an interval and the phase increment across it.
    pub phase_tolerance: f64,
    pub max_points: usize,
}

impl Default for DelayOptions {
    fn default() -> Self {
        Self {
            refine: true,
            phase_tolerance: 2e-3,
            max_points: MAX_POINTS,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    e: f64,
    tau: f64,
    half_phase: f64,
}

fn evaluate_nodes(profile: &ValidatedProfile, energies: &[f64], a: f64) -> Result<Vec<Node>> {
    energies
        .par_iter()
        .map(|&e| {
            let smp = s_matrix_sample(profile, e, a)?;
            Ok(Node {
                e,
                tau: time_delay(&smp)?,
                half_phase: smp.half_phase(),
            })
        })
        .collect()
}

fn wrap_pi(x: f64) -> f64 {
    x - std::f64::consts::PI * (x / std::f64::consts::PI).round()
}

/// Phase increment across an interval predicted by the trapezoid of `tau`,
/// in units of the half phase `arg det S / 2`.
fn predicted_step(a: &Node, b: &Node, channels: usize) -> f64 {
    0.5 * (b.e - a.e) * (a.tau + b.tau) * channels as f64 / (2.0 * HBAR)
}

fn merge_nodes(mut nodes: Vec<Node>, extra: Vec<Node>) -> Vec<Node> {
    nodes.extend(extra);
    nodes.sort_by(|x, y| x.e.total_cmp(&y.e));
    nodes.dedup_by(|x, y| x.e == y.e);
    nodes
}

fn unwrap_phase(nodes: &[Node], channels: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut prev = nodes[0].half_phase;
    out.push(prev);
    for w in nodes.windows(2) {
        let guess = prev + predicted_step(&w[0], &w[1], channels);
        let next = guess + wrap_pi(w[1].half_phase - guess);
        out.push(next);
        prev = next;
    }
    out
}

fn profile_from_nodes(nodes: &[Node], channels: usize) -> Result<DelayProfile> {
    let grid = EnergyGrid::new(nodes.iter().map(|n| n.e).collect())?;
    let tau = nodes.iter().map(|n| n.tau).collect();
    let phase = unwrap_phase(nodes, channels);
    DelayProfile::from_samples(grid, tau, phase, channels)
}

/// Samples the delay over `grid` and integrates it, refining the grid where
/// the samples do not resolve the phase.
pub fn integrate_delay(
    profile: &ValidatedProfile,
    grid: &EnergyGrid,
    a: f64,
) -> Result<DelayProfile> {
    integrate_delay_with(profile, grid, a, DelayOptions::default())
}

pub fn integrate_delay_with(
    profile: &ValidatedProfile,
    grid: &EnergyGrid,
    a: f64,
    opts: DelayOptions,
) -> Result<DelayProfile> {
    let channels = profile.geometry().channels();
    let mut nodes = evaluate_nodes(profile, grid.points(), a)?;
    if !opts.refine {
        return profile_from_nodes(&nodes, channels);
    }

    // Bisect intervals whose delay does not integrate to the phase increment.
    for _ in 0..60 {
        let mids: Vec<f64> = nodes
            .windows(2)
            .filter(|w| {
                let predicted = predicted_step(&w[0], &w[1], channels);
                let actual = wrap_pi(w[1].half_phase - w[0].half_phase);
                predicted.abs() > std::f64::consts::FRAC_PI_8
                    || (predicted - actual).abs() > opts.phase_tolerance
            })
            .map(|w| 0.5 * (w[0].e + w[1].e))
            .filter(|&m| m > nodes[0].e)
            .collect();
        if mids.is_empty() {
            break;
        }
        if nodes.len() + mids.len() > opts.max_points {
            return Err(Error::RefinementLimit(nodes.len() + mids.len()));
        }
        let extra = evaluate_nodes(profile, &mids, a)?;
        nodes = merge_nodes(nodes, extra);
    }

    // Peak-local refinement: spacing <= Gamma/20 within +-5 Gamma.
    for _ in 0..8 {
        let dp = profile_from_nodes(&nodes, channels)?;
        let mut windows: Vec<(f64, f64, f64)> = Vec::new();
        for cand in detect_resonances(&dp) {
            let h = cand.gamma / 20.0;
            let (lo, hi) = (
                (cand.e0 - 5.0 * cand.gamma).max(dp.grid.first()),
                (cand.e0 + 5.0 * cand.gamma).min(dp.grid.last()),
            );
            let coarse = nodes
                .windows(2)
                .any(|w| w[1].e > lo && w[0].e < hi && (w[1].e - w[0].e) > h * (1.0 + 1e-9));
            if coarse {
                windows.push((lo, hi, h));
            }
        }
        if windows.is_empty() {
            break;
        }
        let mut inserted = Vec::new();
        for &(lo, hi, h) in &windows {
            let count = ((hi - lo) / h).ceil().max(1.0) as usize;
            let step = (hi - lo) / count as f64;
            inserted
                .extend((0..=count).map(|j| if j == count { hi } else { lo + step * j as f64 }));
        }
        nodes.retain(|n| !windows.iter().any(|&(lo, hi, _)| n.e > lo && n.e < hi));
        inserted.retain(|e| !nodes.iter().any(|n| n.e == *e));
        inserted.sort_by(f64::total_cmp);
        inserted.dedup();
        if nodes.len() + inserted.len() > opts.max_points {
            return Err(Error::RefinementLimit(nodes.len() + inserted.len()));
        }
        let extra = evaluate_nodes(profile, &inserted, a)?;
        nodes = merge_nodes(nodes, extra);
    }
    profile_from_nodes(&nodes, channels)
}

/// Per-resonance action quantum used to turn `I(E*)` into a count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingQuantum {
    /// `h = 2 pi hbar`, one full phase sweep.
    #[default]
    Planck,
    /// `hbar`, the constant as literally written in the counting rule.
    ReducedPlanck,
    Custom(f64),
}

impl CountingQuantum {
    pub fn value(self) -> f64 {
        match self {
            CountingQuantum::Planck => PLANCK,
            CountingQuantum::ReducedPlanck => HBAR,
            CountingQuantum::Custom(v) => v,
        }
    }

    pub fn label(self) -> String {
        match self {
            CountingQuantum::Planck => "h".into(),
            CountingQuantum::ReducedPlanck => "hbar".into(),
            CountingQuantum::Custom(v) => format!("custom={v}"),
        }
    }
}

/// Result of dividing `I(E*)` by a counting quantum. Both the `h` and `hbar`
/// ratios are always reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceCount {
    pub e_star: f64,
    pub integral: f64,
    pub quantum: CountingQuantum,
    pub count: f64,
    pub nearest: i64,
    pub residual: f64,
    pub count_h: f64,
    pub count_hbar: f64,
}

pub fn count_resonances(
    dp: &DelayProfile,
    e_star: f64,
    quantum: CountingQuantum,
) -> Result<ResonanceCount> {
    let q = quantum.value();
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidInput(format!(
            "counting quantum must be positive, got {q}"
        )));
    }
    let integral = dp.integral_at(e_star)?;
    let count = integral / q;
    let nearest = count.round();
    Ok(ResonanceCount {
        e_star,
        integral,
        quantum,
        count,
        nearest: nearest as i64,
        residual: count - nearest,
        count_h: integral / PLANCK,
        count_hbar: integral / HBAR,
    })
}

/// A peak of the delay read as a resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceCandidate {
    pub e0: f64,
    /// Full width at half maximum of the delay peak.
    pub gamma: f64,
    pub peak_tau: f64,
    /// `I(E0 + 5 Gamma) - I(E0 - 5 Gamma)`, background included.
    pub integral_quantum: f64,
    pub window: (f64, f64),
}

/// Median with weights; ties resolve to the lower value.
fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for &i in &idx {
        acc += weights[i];
        if acc >= 0.5 * total {
            return values[i];
        }
    }
    values[idx[idx.len() - 1]]
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d12 - d01) / (x[2] - x[0]);
    if !(curv < 0.0) {
        return None;
    }
    // y = y1 + b (x - x1) + curv (x - x1)^2 with b from the secant slopes
    let b = d01 + curv * (x[1] - x[0]);
    let xv = x[1] - b / (2.0 * curv);
    if xv < x[0] || xv > x[2] {
        return None;
    }
    let yv = y[1] - b * b / (4.0 * curv);
    Some((xv, yv))
}

fn half_crossing(e: &[f64], tau: &[f64], peak: usize, level: f64, step: isize) -> Option<f64> {
    let mut i = peak as isize;
    loop {
        let j = i + step;
        if j < 0 || j as usize >= tau.len() {
            return None;
        }
        let (iu, ju) = (i as usize, j as usize);
        if tau[ju] < level {
            let t = (tau[iu] - level) / (tau[iu] - tau[ju]);
            return Some(e[iu] + t * (e[ju] - e[iu]));
        }
        i = j;
    }
}

/// Local maxima of the delay above `median + 5 MAD` (energy-weighted).
pub fn detect_resonances(dp: &DelayProfile) -> Vec<ResonanceCandidate> {
    let n = dp.len();
    if n < 32 {
        return Vec::new();
    }
    let e = dp.energies();
    let tau = dp.tau();
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let lo = if i == 0 { e[0] } else { e[i - 1] };
            let hi = if i + 1 == n { e[n - 1] } else { e[i + 1] };
            0.5 * (hi - lo)
        })
        .collect();
    let median = weighted_median(tau, &weights);
    let deviations: Vec<f64> = tau.iter().map(|t| (t - median).abs()).collect();
    let mad = weighted_median(&deviations, &weights);
    let threshold = median + 5.0 * mad;

    let mut found: Vec<ResonanceCandidate> = Vec::new();
    for i in 1..n - 1 {
        // plateaus: the leftmost sample of the plateau wins
        if !(tau[i] > tau[i - 1] && tau[i] >= tau[i + 1] && tau[i] > threshold) {
            continue;
        }
        let (e0, peak) =
            parabola_vertex([e[i - 1], e[i], e[i + 1]], [tau[i - 1], tau[i], tau[i + 1]])
                .unwrap_or((e[i], tau[i]));
        let level = 0.5 * peak;
        let left = half_crossing(e, tau, i, level, -1);
        let right = half_crossing(e, tau, i, level, 1);
        let gamma = match (left, right) {
            (Some(l), Some(r)) => r - l,
            (Some(l), None) => 2.0 * (e0 - l),
            (None, Some(r)) => 2.0 * (r - e0),
            (None, None) => e[i + 1] - e[i - 1],
        };
        if !(gamma > 0.0) {
            continue;
        }
        let window = (e0 - 5.0 * gamma, e0 + 5.0 * gamma);
        let integral_quantum = dp.integral_clamped(window.1) - dp.integral_clamped(window.0);
        found.push(ResonanceCandidate {
            e0,
            gamma,
            peak_tau: peak,
            integral_quantum,
            window,
        });
    }

    // ripples on the flank of a taller peak are not separate resonances
    let mut kept: Vec<ResonanceCandidate> = Vec::new();
    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&a, &b| found[b].peak_tau.total_cmp(&found[a].peak_tau));
    for i in order {
        let c = found[i];
        if kept
            .iter()
            .all(|k| (c.e0 - k.e0).abs() > 0.5 * k.gamma.max(c.gamma))
        {
            kept.push(c);
        }
    }
    kept.sort_by(|a, b| a.e0.total_cmp(&b.e0));
    kept
}

/// Delay samples of one channel computed from precomputed S-matrix samples.
pub fn delays_from_samples(samples: &[SMatrixSample]) -> Result<Vec<f64>> {
    samples.iter().map(time_delay).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Geometry, Layer, PotentialProfile};

    fn bw_delay(e: f64, e0: f64, gamma: f64) -> f64 {
        HBAR * gamma / ((e - e0).powi(2) + 0.25 * gamma * gamma)
    }

    fn synthetic_profile(e0: f64, gamma: f64, lo: f64, hi: f64, n: usize) -> DelayProfile {
        let grid = EnergyGrid::uniform(lo, hi, n).unwrap();
        let tau: Vec<f64> = grid
            .points()
            .iter()
            .map(|&e| bw_delay(e, e0, gamma))
            .collect();
        let phase = grid
            .points()
            .iter()
            .map(|&e| (0.5 * gamma).atan2(e0 - e))
            .collect();
        DelayProfile::from_samples(grid, tau, phase, 1).unwrap()
    }

    #[test]
    fn free_particle_q_and_delay_vanish() {
        let p = PotentialProfile::free_particle(Geometry::RadialSWave)
            .validate()
            .unwrap();
        let smp = s_matrix_sample(&p, 3.0, 0.0).unwrap();
        assert!(max_abs(&q_matrix(&smp).unwrap()) < 1e-15);
        assert_eq!(time_delay(&smp).unwrap(), 0.0);
        let p = PotentialProfile::free_particle(Geometry::FullLine)
            .validate()
            .unwrap();
        let smp = s_matrix_sample(&p, 3.0, 0.0).unwrap();
        assert!(time_delay(&smp).unwrap().abs() < 1e-15);
    }

    #[test]
    fn single_channel_q_is_twice_phase_slope() {
        let smp = SMatrixSample::from_phase(2.0, 0.4, 1.7, 0.0);
        let q = q_matrix(&smp).unwrap();
        assert!((q[(0, 0)] - Complex64::from(2.0 * HBAR * 1.7)).norm() < 1e-14);
    }

    #[test]
    fn breit_wigner_peak_delay() {
        let (e0, gamma) = (3.0, 0.2);
        // at E = E0, d delta/dE = 2 / Gamma
        let smp = SMatrixSample::from_phase(e0, std::f64::consts::FRAC_PI_2, 2.0 / gamma, 0.0);
        assert!((time_delay(&smp).unwrap() - 4.0 * HBAR / gamma).abs() < 1e-12);
    }

    #[test]
    fn non_unitary_input_is_rejected() {
        let mut smp = SMatrixSample::from_phase(1.0, 0.1, 0.2, 0.0);
        smp.s[(0, 0)] *= 1.01;
        assert!(matches!(q_matrix(&smp), Err(Error::NonUnitaryInput(_))));
    }

    #[test]
    fn free_particle_cumulative_is_zero() {
        let p = PotentialProfile::free_particle(Geometry::RadialSWave)
            .validate()
            .unwrap();
        let grid = EnergyGrid::uniform(0.1, 10.0, 200).unwrap();
        let dp = integrate_delay(&p, &grid, 0.0).unwrap();
        assert!(dp.cumulative().iter().all(|&c| c == 0.0));
        let count = count_resonances(&dp, 10.0, CountingQuantum::Planck).unwrap();
        assert_eq!(count.count, 0.0);
        assert!(detect_resonances(&dp).is_empty());
    }

    #[test]
    fn cumulative_is_reproducible_from_samples() {
        let dp = synthetic_profile(2.0, 0.1, 0.5, 4.0, 301);
        let again = cumulative_integral(dp.energies(), dp.tau());
        assert!(again
            .iter()
            .zip(dp.cumulative())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(dp.cumulative()[0], 0.0);
    }

    #[test]
    fn count_outside_grid_is_an_error() {
        let dp = synthetic_profile(2.0, 0.1, 0.5, 4.0, 301);
        assert!(matches!(
            count_resonances(&dp, 5.0, CountingQuantum::Planck),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn quantum_labels_and_values() {
        assert_eq!(CountingQuantum::Planck.value(), 2.0 * std::f64::consts::PI);
        assert_eq!(CountingQuantum::ReducedPlanck.value(), 1.0);
        assert_eq!(CountingQuantum::Custom(3.0).label(), "custom=3");
    }

    #[test]
    fn detects_single_peak() {
        let (e0, gamma) = (2.0, 0.05);
        let dp = synthetic_profile(e0, gamma, 1.0, 3.0, 8001);
        let found = detect_resonances(&dp);
        assert_eq!(found.len(), 1);
        assert!((found[0].e0 - e0).abs() < gamma / 100.0);
        assert!((found[0].gamma - gamma).abs() < 0.02 * gamma);
    }

    #[test]
    fn too_few_samples_give_no_candidates() {
        let dp = synthetic_profile(2.0, 0.1, 1.0, 3.0, 31);
        assert!(detect_resonances(&dp).is_empty());
    }

    #[test]
    fn negative_delay_is_integrated_as_is() {
        let grid = EnergyGrid::uniform(1.0, 2.0, 11).unwrap();
        let dp = DelayProfile::from_samples(grid, vec![-1.0; 11], vec![0.0; 11], 1).unwrap();
        assert!((dp.cumulative()[10] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn refinement_resolves_a_sharp_radial_resonance() {
        let p = PotentialProfile::new(
            Geometry::RadialSWave,
            vec![Layer::new(3.0, -10.0), Layer::new(0.2, 200.0)],
        )
        .validate()
        .unwrap();
        let grid = EnergyGrid::uniform(5.0, 8.5, 200).unwrap();
        let dp = integrate_delay(&p, &grid, p.support_end()).unwrap();
        let found = detect_resonances(&dp);
        assert_eq!(found.len(), 1, "{found:?}");
        // the refined window holds the required spacing
        let c = found[0];
        let e = dp.energies();
        for w in e.windows(2) {
            if w[0] > c.e0 - 5.0 * c.gamma && w[1] < c.e0 + 5.0 * c.gamma {
                assert!(w[1] - w[0] <= c.gamma / 20.0 * 1.01);
            }
        }
        // total phase and integrated delay agree
        let n = dp.len();
        let from_phase = 2.0 * (dp.phase()[n - 1] - dp.phase()[0]);
        assert!((from_phase - dp.cumulative()[n - 1]).abs() < 1e-3 * from_phase.abs());
    }
}
