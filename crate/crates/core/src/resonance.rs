//! Breit-Wigner resonances: phase shift, delay, Lorentzian fits, the
//! classical damped-oscillator twin and the width/friction map `Gamma = 2 hbar gamma`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delay::{DelayProfile, ResonanceCandidate};
use crate::engine::SMatrixSample;
use crate::error::{Error, Result};
use crate::lm::{self, LmOutcome};
use crate::units::HBAR;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BWParams {
    pub e0: f64,
    pub gamma: f64,
    /// Constant phase offset in `(-pi, pi]`.
    pub background_delta: f64,
}

impl BWParams {
    pub fn new(e0: f64, gamma: f64) -> Self {
        Self {
            e0,
            gamma,
            background_delta: 0.0,
        }
    }
}

/// Sign of the energy offset in `tan delta = (Gamma/2) / (E0 - E)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseConvention {
    /// Phase rises by pi through the resonance.
    #[default]
    Standard,
    /// `tan delta = (Gamma/2) / (E - E0)`, taken literally: the phase falls by pi.
    PaperSign,
}

/// Breit-Wigner phase on the continuous branch, `pi/2 + background` at `E0`.
pub fn bw_phase(e: f64, p: &BWParams, conv: PhaseConvention) -> f64 {
    let x = match conv {
        PhaseConvention::Standard => p.e0 - e,
        PhaseConvention::PaperSign => e - p.e0,
    };
    (0.5 * p.gamma).atan2(x) + p.background_delta
}

/// `d delta / dE` of [`bw_phase`].
pub fn bw_phase_slope(e: f64, p: &BWParams, conv: PhaseConvention) -> f64 {
    let d = (e - p.e0).powi(2) + 0.25 * p.gamma * p.gamma;
    let s = 0.5 * p.gamma / d;
    match conv {
        PhaseConvention::Standard => s,
        PhaseConvention::PaperSign => -s,
    }
}

/// Lorentzian delay `hbar Gamma / ((E - E0)^2 + Gamma^2/4)`.
pub fn bw_delay(e: f64, e0: f64, gamma: f64) -> f64 {
    HBAR * gamma / ((e - e0).powi(2) + 0.25 * gamma * gamma)
}

/// Single-channel sample `S = exp(2 i delta)` of an isolated resonance.
pub fn bw_sample(e: f64, p: &BWParams) -> SMatrixSample {
    let conv = PhaseConvention::Standard;
    SMatrixSample::from_phase(e, bw_phase(e, p, conv), bw_phase_slope(e, p, conv), 0.0)
}

/// Phase lag of the damped oscillator, `tan delta = gamma_fr / (omega - omega0)`
/// on the same branch as [`bw_phase`].
pub fn classical_phase(omega: f64, omega0: f64, gamma_fr: f64, conv: PhaseConvention) -> f64 {
    let x = match conv {
        PhaseConvention::Standard => omega0 - omega,
        PhaseConvention::PaperSign => omega - omega0,
    };
    gamma_fr.atan2(x)
}

pub fn width_to_friction(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::NonPositiveRate(gamma));
    }
    Ok(gamma / (2.0 * HBAR))
}

pub fn friction_to_width(gamma_fr: f64) -> Result<f64> {
    if !(gamma_fr > 0.0) || !gamma_fr.is_finite() {
        return Err(Error::NonPositiveRate(gamma_fr));
    }
    Ok(2.0 * HBAR * gamma_fr)
}

/// Survival probability `exp(-Gamma t / hbar)` of a decaying state, the
/// square of an amplitude that decays at `Gamma / 2 hbar`.
pub fn wavepacket_survival(gamma: f64, t: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::NonPositiveRate(gamma));
    }
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    Ok((-gamma * t / HBAR).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: BWParams,
    /// Constant delay offset; zero for phase fits.
    pub background_tau: f64,
    /// Covariance of `(E0, Gamma, background)`.
    pub covariance: [[f64; 3]; 3],
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub condition_number: f64,
    pub gradient_ratio: f64,
    /// Resonances fitted together with this one, itself included.
    pub group_size: usize,
}

impl FitResult {
    pub fn sigma_e0(&self) -> f64 {
        self.covariance[0][0].sqrt()
    }

    pub fn sigma_gamma(&self) -> f64 {
        self.covariance[1][1].sqrt()
    }

    /// Normal matrix too ill-conditioned to trust the parameters.
    pub fn is_degenerate(&self) -> bool {
        !(self.condition_number <= lm::MAX_CONDITION)
    }
}

const MIN_SAMPLES: usize = 8;

fn check_samples(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    if samples
        .iter()
        .any(|(e, y)| !e.is_finite() || !y.is_finite())
    {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    Ok(())
}

/// Peak position, FWHM and baseline read directly off the samples.
pub fn initial_guess(samples: &[(f64, f64)]) -> (BWParams, f64) {
    let (imax, &(e0, peak)) = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty samples");
    let base = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let level = base + 0.5 * (peak - base);
    let cross = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imax;
        for i in range {
            let (ei, yi) = samples[i];
            if yi < level {
                let (ep, yp) = samples[prev];
                return Some(ep + (yp - level) / (yp - yi) * (ei - ep));
            }
            prev = i;
        }
        None
    };
    let left = cross(&mut (0..imax).rev());
    let right = cross(&mut (imax + 1..samples.len()));
    let span = samples[samples.len() - 1].0 - samples[0].0;
    let gamma = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (e0 - l),
        (None, Some(r)) => 2.0 * (r - e0),
        (None, None) => 0.5 * span,
    };
    (BWParams::new(e0, gamma.abs().max(f64::MIN_POSITIVE)), base)
}

/// Sum of Lorentzians plus a shared constant. Parameters are
/// `[E0_1, Gamma_1, ..., E0_n, Gamma_n, c]`.
fn lorentzian_sum(samples: &[(f64, f64)], p0: &[f64]) -> LmOutcome {
    let npk = (p0.len() - 1) / 2;
    lm::minimize(p0, samples.len(), |p, r, jac| {
        let c = p[2 * npk];
        for (i, &(e, y)) in samples.iter().enumerate() {
            let mut model = c;
            for k in 0..npk {
                let (e0, g) = (p[2 * k], p[2 * k + 1]);
                let d = e - e0;
                let den = d * d + 0.25 * g * g;
                model += HBAR * g / den;
                jac[(i, 2 * k)] = HBAR * 2.0 * g * d / (den * den);
                jac[(i, 2 * k + 1)] = HBAR * (d * d - 0.25 * g * g) / (den * den);
            }
            jac[(i, 2 * npk)] = 1.0;
            r[i] = model - y;
        }
    })
}

fn extract(out: &LmOutcome, k: usize, npk: usize) -> Result<FitResult> {
    let idx = [2 * k, 2 * k + 1, 2 * npk];
    let mut cov = [[0.0; 3]; 3];
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            cov[a][b] = out.covariance[(i, j)];
        }
    }
    let gamma = out.params[2 * k + 1];
    let e0 = out.params[2 * k];
    if !(gamma.is_finite() && e0.is_finite()) {
        return Err(Error::InvalidInput("fit diverged".into()));
    }
    let degenerate = !(out.condition <= lm::MAX_CONDITION);
    Ok(FitResult {
        // the model is odd in Gamma; report the physical branch
        params: BWParams::new(e0, gamma.abs()),
        background_tau: out.params[2 * npk],
        covariance: cov,
        residual_norm: out.residual_norm,
        iterations: out.iterations,
        converged: out.converged && !degenerate && gamma > 0.0,
        condition_number: out.condition,
        gradient_ratio: out.gradient_ratio,
        group_size: npk,
    })
}

/// Least-squares fit of `hbar Gamma / ((E - E0)^2 + Gamma^2/4) + c` to `(E, tau)`.
pub fn fit_bw(samples: &[(f64, f64)], init: Option<BWParams>) -> Result<FitResult> {
    check_samples(samples)?;
    let (guess, base) = initial_guess(samples);
    let init = init.unwrap_or(guess);
    let span = samples[samples.len() - 1].0 - samples[0].0;
    if span < init.gamma {
        return Err(Error::InvalidInput(format!(
            "samples span {span}, less than one width {}",
            init.gamma
        )));
    }
    let out = lorentzian_sum(samples, &[init.e0, init.gamma, base]);
    extract(&out, 0, 1)
}

/// Joint fit of several Lorentzians sharing one background.
pub fn fit_bw_joint(samples: &[(f64, f64)], inits: &[BWParams]) -> Result<Vec<FitResult>> {
    check_samples(samples)?;
    if inits.is_empty() {
        return Err(Error::InvalidInput("no resonances to fit".into()));
    }
    if samples.len() < MIN_SAMPLES * inits.len() {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES * inits.len(),
            got: samples.len(),
        });
    }
    let base = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let mut p0: Vec<f64> = inits.iter().flat_map(|p| [p.e0, p.gamma]).collect();
    p0.push(base);
    let out = lorentzian_sum(samples, &p0);
    (0..inits.len())
        .map(|k| extract(&out, k, inits.len()))
        .collect()
}

/// Fits `(E, delta)` samples with [`bw_phase`]; a cross-check on the delay fit.
pub fn fit_bw_phase(
    samples: &[(f64, f64)],
    init: BWParams,
    conv: PhaseConvention,
) -> Result<FitResult> {
    check_samples(samples)?;
    let sign = match conv {
        PhaseConvention::Standard => 1.0,
        PhaseConvention::PaperSign => -1.0,
    };
    let bg0 = samples
        .iter()
        .map(|&(e, d)| {
            d - bw_phase(
                e,
                &BWParams {
                    background_delta: 0.0,
                    ..init
                },
                conv,
            )
        })
        .sum::<f64>()
        / samples.len() as f64;
    let out = lm::minimize(&[init.e0, init.gamma, bg0], samples.len(), |p, r, jac| {
        let bw = BWParams {
            e0: p[0],
            gamma: p[1],
            background_delta: p[2],
        };
        for (i, &(e, d)) in samples.iter().enumerate() {
            let x = sign * (bw.e0 - e);
            let den = x * x + 0.25 * bw.gamma * bw.gamma;
            r[i] = bw_phase(e, &bw, conv) - d;
            jac[(i, 0)] = -sign * 0.5 * bw.gamma / den;
            jac[(i, 1)] = 0.5 * x / den;
            jac[(i, 2)] = 1.0;
        }
    });
    let mut fit = extract(&out, 0, 1)?;
    fit.background_tau = 0.0;
    fit.params.background_delta = wrap_angle(out.params[2]);
    Ok(fit)
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Fits every detected resonance of a delay profile. Candidates closer than
/// three widths are fitted together.
pub fn fit_candidates(dp: &DelayProfile, cands: &[ResonanceCandidate]) -> Vec<Result<FitResult>> {
    let groups = group_candidates(cands);
    let fitted: Vec<Vec<Result<FitResult>>> = groups
        .par_iter()
        .map(|group| {
            let lo = group
                .iter()
                .map(|c| c.e0 - 5.0 * c.gamma)
                .fold(f64::INFINITY, f64::min);
            let hi = group
                .iter()
                .map(|c| c.e0 + 5.0 * c.gamma)
                .fold(f64::NEG_INFINITY, f64::max);
            let samples: Vec<(f64, f64)> = dp
                .energies()
                .iter()
                .zip(dp.tau())
                .filter(|(e, _)| **e >= lo && **e <= hi)
                .map(|(&e, &t)| (e, t))
                .collect();
            let inits: Vec<BWParams> = group.iter().map(|c| BWParams::new(c.e0, c.gamma)).collect();
            match fit_bw_joint(&samples, &inits) {
                Ok(v) => v.into_iter().map(Ok).collect(),
                Err(e) => {
                    let msg = e.to_string();
                    let mut out = vec![Err(e)];
                    out.extend((1..group.len()).map(|_| Err(Error::InvalidInput(msg.clone()))));
                    out
                }
            }
        })
        .collect();
    fitted.into_iter().flatten().collect()
}

/// Consecutive candidates (sorted by energy) closer than `3 max(Gamma)`.
pub fn group_candidates(cands: &[ResonanceCandidate]) -> Vec<Vec<ResonanceCandidate>> {
    let mut sorted = cands.to_vec();
    sorted.sort_by(|a, b| a.e0.total_cmp(&b.e0));
    let mut groups: Vec<Vec<ResonanceCandidate>> = Vec::new();
    for c in sorted {
        match groups.last_mut() {
            Some(g)
                if {
                    let last = g[g.len() - 1];
                    c.e0 - last.e0 < 3.0 * last.gamma.max(c.gamma)
                } =>
            {
                g.push(c)
            }
            _ => groups.push(vec![c]),
        }
    }
    groups
}

/// Covariance block as a nalgebra matrix.
pub fn covariance_matrix(fit: &FitResult) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| fit.covariance[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn phase_examples() {
        let p = BWParams::new(2.0, 0.4);
        assert_eq!(bw_phase(2.0, &p, PhaseConvention::Standard), FRAC_PI_2);
        assert!((bw_phase(1e9, &p, PhaseConvention::Standard) - PI).abs() < 1e-9);
        assert!(bw_phase(-1e9, &p, PhaseConvention::Standard).abs() < 1e-9);
        // E - E0 = Gamma/2: the printed form gives tan delta = 1
        let d = bw_phase(2.2, &p, PhaseConvention::PaperSign);
        assert!((d.tan() - 1.0).abs() < 1e-14);
        assert!((bw_phase(2.2, &p, PhaseConvention::Standard).tan() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn slope_matches_delay() {
        let p = BWParams::new(1.0, 0.1);
        for e in [0.7, 1.0, 1.05, 1.3] {
            assert!(
                (2.0 * HBAR * bw_phase_slope(e, &p, PhaseConvention::Standard)
                    - bw_delay(e, 1.0, 0.1))
                .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn friction_map() {
        assert_eq!(width_to_friction(0.2).unwrap(), 0.1);
        let g = 0.123456789;
        assert_eq!(friction_to_width(width_to_friction(g).unwrap()).unwrap(), g);
        assert!(matches!(
            friction_to_width(0.0),
            Err(Error::NonPositiveRate(_))
        ));
    }

    #[test]
    fn survival() {
        assert_eq!(wavepacket_survival(0.3, 0.0).unwrap(), 1.0);
        assert!((wavepacket_survival(0.5, HBAR / 0.5).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(matches!(
            wavepacket_survival(0.5, -1.0),
            Err(Error::NegativeTime(_))
        ));
    }

    #[test]
    fn classical_twin_is_bitwise_equal() {
        let (w, w0, g) = (1.37, 1.2, 0.05);
        let q = classical_phase(w, w0, g, PhaseConvention::Standard);
        let b = bw_phase(
            HBAR * w,
            &BWParams::new(HBAR * w0, 2.0 * HBAR * g),
            PhaseConvention::Standard,
        );
        assert_eq!(q, b);
    }

    fn lorentz_samples(e0: f64, g: f64, c: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let e = e0 - 5.0 * g + 10.0 * g * i as f64 / (n - 1) as f64;
                (e, bw_delay(e, e0, g) + c)
            })
            .collect()
    }

    #[test]
    fn noiseless_fit() {
        for c in [0.0, 0.3] {
            let fit = fit_bw(&lorentz_samples(2.0, 0.1, c, 64), None).unwrap();
            assert!(fit.converged, "{fit:?}");
            assert!((fit.params.e0 - 2.0).abs() < 2e-6);
            assert!((fit.params.gamma - 0.1).abs() < 1e-7);
            assert!((fit.background_tau - c).abs() < 1e-6);
        }
    }

    #[test]
    fn too_few_samples() {
        let s = lorentz_samples(2.0, 0.1, 0.0, 7);
        assert!(matches!(
            fit_bw(&s, None),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn joint_fit_of_overlapping_pair() {
        let samples: Vec<(f64, f64)> = (0..400)
            .map(|i| {
                let e = 1.5 + i as f64 / 399.0;
                (e, bw_delay(e, 1.9, 0.05) + bw_delay(e, 2.0, 0.08) + 0.1)
            })
            .collect();
        let fits = fit_bw_joint(
            &samples,
            &[BWParams::new(1.88, 0.06), BWParams::new(2.02, 0.07)],
        )
        .unwrap();
        assert!((fits[0].params.e0 - 1.9).abs() < 1e-8);
        assert!((fits[1].params.gamma - 0.08).abs() < 1e-8);
        assert!(fits.iter().all(|f| f.group_size == 2 && f.converged));
    }

    #[test]
    fn phase_fit_recovers_background() {
        let truth = BWParams {
            e0: 3.0,
            gamma: 0.2,
            background_delta: 0.4,
        };
        let samples: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let e = 2.0 + 2.0 * i as f64 / 49.0;
                (e, bw_phase(e, &truth, PhaseConvention::Standard) + 2.0 * PI)
            })
            .collect();
        let fit = fit_bw_phase(
            &samples,
            BWParams::new(3.05, 0.3),
            PhaseConvention::Standard,
        )
        .unwrap();
        assert!((fit.params.e0 - 3.0).abs() < 1e-9);
        assert!((fit.params.background_delta - 0.4).abs() < 1e-9);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-15);
    }
}
