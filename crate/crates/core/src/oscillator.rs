//! Harmonic oscillator with a slowly ramped frequency, `x'' + omega(t)^2 x = 0`,
//! `omega(t) = omega0 (1 + eps t)`.
//!
//! The flow is Hamiltonian, so true phase-space area is conserved. The
//! contraction the exponent `gamma` measures is that of the oscillation
//! amplitude, i.e. of the ellipse in the `(x, p)` plane, which shrinks as
//! `omega^(-1/2)` while the action `J = E / omega` stays put.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonance::friction_to_width;

/// Minimum number of steps per period at the final frequency.
pub const STEPS_PER_PERIOD: f64 = 200.0;

/// Largest frequency growth a run may cover.
pub const MAX_GROWTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorConfig {
    pub omega0: f64,
    pub ramp_rate_eps: f64,
    pub x0: f64,
    pub p0: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl OscillatorConfig {
    pub fn omega(&self, t: f64) -> f64 {
        self.omega0 * (1.0 + self.ramp_rate_eps * t)
    }

    /// Run length that takes the frequency to `factor * omega0`.
    pub fn t_for_growth(eps: f64, factor: f64) -> f64 {
        (factor - 1.0) / eps
    }

    pub fn max_dt(&self) -> f64 {
        2.0 * std::f64::consts::PI / (STEPS_PER_PERIOD * self.omega(self.t_end))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(Error::InvalidInput(format!(
                "omega0 must be positive, got {}",
                self.omega0
            )));
        }
        if !(self.ramp_rate_eps >= 0.0) || !self.ramp_rate_eps.is_finite() {
            return Err(Error::InvalidInput(format!(
                "ramp rate must be non-negative, got {}",
                self.ramp_rate_eps
            )));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidInput(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.ramp_rate_eps * self.t_end > MAX_GROWTH - 1.0 {
            return Err(Error::InvalidInput(format!(
                "omega grows by {:.3}x, more than {MAX_GROWTH}x",
                1.0 + self.ramp_rate_eps * self.t_end
            )));
        }
        if !(self.x0.is_finite() && self.p0.is_finite()) || (self.x0 == 0.0 && self.p0 == 0.0) {
            return Err(Error::InvalidInput(
                "initial state must be finite and non-zero".into(),
            ));
        }
        if !(self.dt > 0.0) || self.dt > self.max_dt() {
            return Err(Error::StepTooLarge {
                dt: self.dt,
                max: self.max_dt(),
            });
        }
        Ok(())
    }

    /// Initial amplitude `sqrt(x0^2 + (p0/omega0)^2)`.
    pub fn amplitude0(&self) -> f64 {
        self.x0.hypot(self.p0 / self.omega0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub omega: Vec<f64>,
    /// `(p^2 + omega^2 x^2) / 2`
    pub energy: Vec<f64>,
    /// `E / omega`
    pub action: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max |J(t) - J(0)| / J(0)`.
    pub fn max_action_drift(&self) -> f64 {
        let j0 = self.action[0];
        self.action
            .iter()
            .map(|j| (j - j0).abs())
            .fold(0.0, f64::max)
            / j0
    }

    /// Number of oscillations covered.
    pub fn periods(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        // trapezoid of omega, exact for the linear ramp
        let phase: f64 = self
            .times
            .windows(2)
            .zip(self.omega.windows(2))
            .map(|(t, w)| 0.5 * (t[1] - t[0]) * (w[0] + w[1]))
            .sum();
        phase / (2.0 * std::f64::consts::PI)
    }

    /// Phase-space points rescaled by the instantaneous frequency,
    /// `(x sqrt(omega), p / sqrt(omega))`. Circles of radius `sqrt(2J)`.
    pub fn adiabatic_frame(&self) -> Vec<(f64, f64)> {
        (0..self.len())
            .map(|i| {
                let s = self.omega[i].sqrt();
                (self.x[i] * s, self.p[i] / s)
            })
            .collect()
    }
}

/// Fixed-step classical Runge-Kutta.
pub fn integrate_oscillator(cfg: &OscillatorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    let h = cfg.t_end / steps as f64;
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        p: Vec::with_capacity(steps + 1),
        omega: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        action: Vec::with_capacity(steps + 1),
    };
    let w2 = |t: f64| cfg.omega(t).powi(2);
    let (mut x, mut p) = (cfg.x0, cfg.p0);
    for n in 0..=steps {
        let t = n as f64 * h;
        let w = cfg.omega(t);
        let e = 0.5 * (p * p + w * w * x * x);
        traj.times.push(t);
        traj.x.push(x);
        traj.p.push(p);
        traj.omega.push(w);
        traj.energy.push(e);
        traj.action.push(e / w);
        if n == steps {
            break;
        }
        let (k1x, k1p) = (p, -w2(t) * x);
        let (k2x, k2p) = (p + 0.5 * h * k1p, -w2(t + 0.5 * h) * (x + 0.5 * h * k1x));
        let (k3x, k3p) = (p + 0.5 * h * k2p, -w2(t + 0.5 * h) * (x + 0.5 * h * k2x));
        let (k4x, k4p) = (p + h * k3p, -w2(t + h) * (x + h * k3x));
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    Ok(traj)
}

/// WKB envelope `a(0) sqrt(omega0 / omega(t))`.
pub fn wkb_envelope(cfg: &OscillatorConfig, t: f64) -> f64 {
    cfg.amplitude0() * (cfg.omega0 / cfg.omega(t)).sqrt()
}

/// Turning points `p = 0` as `(t, |x|)`, each refined by the parabola through
/// the three samples around the extremum of `x`.
pub fn turning_points(traj: &Trajectory) -> Vec<(f64, f64)> {
    let n = traj.len();
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(2) {
        let (pa, pb) = (traj.p[i], traj.p[i + 1]);
        if !(pa != 0.0 && (pa > 0.0) != (pb > 0.0)) && !(pb == 0.0 && pa != 0.0) {
            continue;
        }
        let j = if traj.x[i].abs() >= traj.x[i + 1].abs() {
            i
        } else {
            i + 1
        };
        let (t0, t1) = (traj.times[j - 1], traj.times[j]);
        let (y0, y1, y2) = (traj.x[j - 1], traj.x[j], traj.x[j + 1]);
        let h = t1 - t0;
        let b = (y2 - y0) / (2.0 * h);
        let c = (y2 - 2.0 * y1 + y0) / (2.0 * h * h);
        let (t, y) = if c != 0.0 {
            let s = (-b / (2.0 * c)).clamp(-h, h);
            (t1 + s, y1 + b * s + c * s * s)
        } else {
            (t1, y1)
        };
        out.push((t, y.abs()));
    }
    out
}

/// Instantaneous contraction exponent `gamma(t) = -d ln a / dt` of the
/// turning-point amplitude, next to the WKB value `omega' / (2 omega)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionSeries {
    pub times: Vec<f64>,
    pub gamma: Vec<f64>,
    pub expected: Vec<f64>,
    /// Fitted exponent extrapolated to `t = 0`.
    pub gamma_at_start: f64,
    pub mean_gamma: f64,
    pub mean_expected: f64,
}

impl ContractionSeries {
    /// Width `2 hbar gamma` equivalent to the exponent at the start of the run.
    pub fn equivalent_width(&self) -> Result<f64> {
        friction_to_width(self.gamma_at_start)
    }
}

/// Periods of turning points used in each local fit, on either side.
const FIT_HALF_SPAN: usize = 4;
pub const MIN_PERIODS: f64 = 10.0;

/// Slope at `t0` of the least-squares quadratic through `(t, y)`.
fn quadratic_slope(pts: &[(f64, f64)], t0: f64) -> f64 {
    let scale = pts
        .iter()
        .map(|(t, _)| (t - t0).abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut rhs = nalgebra::Vector3::<f64>::zeros();
    for &(t, y) in pts {
        let u = (t - t0) / scale;
        let row = nalgebra::Vector3::new(1.0, u, u * u);
        m += row * row.transpose();
        rhs += row * y;
    }
    match m.lu().solve(&rhs) {
        Some(c) => c[1] / scale,
        None => f64::NAN,
    }
}

pub fn contraction_exponent(traj: &Trajectory) -> Result<ContractionSeries> {
    let periods = traj.periods();
    if periods < MIN_PERIODS {
        return Err(Error::TooFewPeriods {
            got: periods,
            needed: MIN_PERIODS,
        });
    }
    let tp: Vec<(f64, f64)> = turning_points(traj)
        .into_iter()
        .map(|(t, a)| (t, a.ln()))
        .collect();
    // two turning points per period
    let half = 2 * FIT_HALF_SPAN;
    let n = tp.len();
    let omega_at = |t: f64| {
        let (t0, t1) = (traj.times[0], traj.times[traj.len() - 1]);
        let (w0, w1) = (traj.omega[0], traj.omega[traj.len() - 1]);
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    };
    let rate =
        (traj.omega[traj.len() - 1] - traj.omega[0]) / (traj.times[traj.len() - 1] - traj.times[0]);

    let mut times = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    let mut expected = Vec::with_capacity(n);
    for k in 0..n {
        let lo = k.saturating_sub(half);
        let hi = (k + half + 1).min(n);
        let (lo, hi) = if hi - lo < 2 * half + 1 && n > 2 * half {
            if lo == 0 {
                (0, 2 * half + 1)
            } else {
                (n - 2 * half - 1, n)
            }
        } else {
            (lo, hi)
        };
        let t = tp[k].0;
        times.push(t);
        gamma.push(-quadratic_slope(&tp[lo..hi], t));
        expected.push(0.5 * rate / omega_at(t));
    }
    let first = &tp[..(2 * half + 1).min(n)];
    let gamma_at_start = -quadratic_slope(first, traj.times[0]);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(ContractionSeries {
        mean_gamma: mean(&gamma),
        mean_expected: mean(&expected),
        times,
        gamma,
        expected,
        gamma_at_start,
    })
}

/// Steady-state amplitude and phase lag of `x'' + 2 gamma x' + omega0^2 x = f cos(omega t)`.
pub fn damped_response(omega: f64, omega0: f64, gamma_fr: f64, force_amp: f64) -> (f64, f64) {
    let re = omega0 * omega0 - omega * omega;
    let im = 2.0 * gamma_fr * omega;
    (force_amp / re.hypot(im), im.atan2(re))
}

/// Maximum relative action drift for each ramp rate, all other settings shared.
pub fn drift_sweep(base: &OscillatorConfig, rates: &[f64], growth: f64) -> Result<Vec<f64>> {
    rates
        .par_iter()
        .map(|&eps| {
            let t_end = if eps > 0.0 {
                OscillatorConfig::t_for_growth(eps, growth)
            } else {
                base.t_end
            };
            let cfg = OscillatorConfig {
                ramp_rate_eps: eps,
                t_end,
                ..*base
            };
            Ok(integrate_oscillator(&cfg)?.max_action_drift())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cfg(eps: f64, t_end: f64, dt: f64) -> OscillatorConfig {
        OscillatorConfig {
            omega0: 1.0,
            ramp_rate_eps: eps,
            x0: 1.0,
            p0: 0.0,
            t_end,
            dt,
        }
    }

    #[test]
    fn one_period_closes() {
        let tr = integrate_oscillator(&cfg(0.0, 2.0 * PI, 2.0 * PI / 1000.0)).unwrap();
        let n = tr.len() - 1;
        assert!((tr.x[n] - 1.0).abs() < 1e-9 && tr.p[n].abs() < 1e-9);
    }

    #[test]
    fn step_bound() {
        let c = cfg(0.0, 10.0, 0.05);
        assert!(matches!(
            integrate_oscillator(&c),
            Err(Error::StepTooLarge { .. })
        ));
        let c = cfg(1.0, 10.0, 0.001);
        assert!(integrate_oscillator(&c).is_err());
    }

    #[test]
    fn envelope() {
        let c = cfg(1e-3, 3000.0, 0.001);
        assert!((wkb_envelope(&c, 3000.0) - 0.5).abs() < 1e-15);
        let c = cfg(0.0, 10.0, 0.01);
        assert_eq!(wkb_envelope(&c, 7.0), 1.0);
    }

    #[test]
    fn damped_at_resonance() {
        let (a, ph) = damped_response(2.0, 2.0, 0.1, 3.0);
        assert!((ph - FRAC_PI_2).abs() < 1e-15);
        assert!((a - 3.0 / (2.0 * 0.1 * 2.0)).abs() < 1e-14);
    }

    #[test]
    fn too_short_for_exponent() {
        let tr = integrate_oscillator(&cfg(1e-3, 20.0, 0.01)).unwrap();
        assert!(matches!(
            contraction_exponent(&tr),
            Err(Error::TooFewPeriods { .. })
        ));
    }

    #[test]
    fn no_ramp_no_contraction() {
        let tr = integrate_oscillator(&cfg(0.0, 200.0, 0.01)).unwrap();
        let c = contraction_exponent(&tr).unwrap();
        assert!(c.gamma.iter().all(|g| g.abs() < 1e-9));
        assert!(c.gamma_at_start.abs() < 1e-9);
    }
}
