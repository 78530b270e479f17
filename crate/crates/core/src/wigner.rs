//! From the S-matrix to a phase-space picture of the delay.
//!
//! The chain runs: symmetric two-point form of `Q`, the energy correlation
//! function of `S`, the van Kampen kernel `H(zeta)` (Fourier conjugate of the
//! phase-referenced `S` over energy), its Wigner distribution `W(zeta+, E)`,
//! and finally the first `zeta+` moment of `W`, which reproduces the
//! integrated delay.
//!
//! Discretisation: on a band of `N` samples spaced `dE`, zero-padded by `P`,
//! the kernel lives on `M = P N` points spaced `dzeta = 2 pi hbar / (P N dE)`.
//! The discrete kernel is periodic in `zeta` with period `2 pi hbar / dE`; it
//! is stored on the symmetric interval `[-M/2, M/2) dzeta` so the window's
//! main lobe around `zeta = 0` stays in one piece.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::delay::DelayProfile;
use crate::engine::{
    s_matrix_sample, CMatrix, EnergyGrid, SMatrixSample, SPACING_TOL, THRESHOLD_NUDGE,
};
use crate::error::{Error, Result};
use crate::potential::ValidatedProfile;
use crate::quadrature::{cumulative_integral, simpson_uniform};
use crate::units::{velocity, wavenumber, HBAR};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest correlation offset, in grid spacings.
pub const MAX_OFFSET_STEPS: usize = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
    Blackman,
}

impl Window {
    pub fn weights(self, n: usize) -> Vec<f64> {
        if n < 2 {
            return vec![1.0; n];
        }
        let d = (n - 1) as f64;
        (0..n)
            .map(|i| {
                let x = TWO_PI * i as f64 / d;
                match self {
                    Window::Rectangular => 1.0,
                    Window::Hann => 0.5 - 0.5 * x.cos(),
                    Window::Blackman => 0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos(),
                }
            })
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Window::Rectangular => "rectangular",
            Window::Hann => "hann",
            Window::Blackman => "blackman",
        }
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangular" => Ok(Window::Rectangular),
            "hann" => Ok(Window::Hann),
            "blackman" => Ok(Window::Blackman),
            _ => Err(Error::InvalidInput(format!("unknown window `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    pub window: Window,
    pub padding: usize,
    /// Fraction of the band trimmed from each end when forming the interior.
    pub edge_fraction: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            window: Window::Hann,
            padding: 4,
            edge_fraction: 0.1,
        }
    }
}

/// `-i hbar d/d eps [Tr S^dagger(E - eps/2) S(E + eps/2) / N]` at `eps -> 0`,
/// from central differences at `eps`, `eps/2`, `eps/4` and two Richardson steps.
pub fn symmetric_q(profile: &ValidatedProfile, e: f64, eps: f64, a: f64) -> Result<Complex64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "offset must be positive, got {eps}"
        )));
    }
    if !(e - 0.5 * eps > 0.0) {
        return Err(Error::NonPositiveEnergy(e - 0.5 * eps));
    }
    let corr = |h: f64| -> Result<Complex64> {
        let sp = s_matrix_sample(profile, e + 0.5 * h, a)?.s;
        let sm = s_matrix_sample(profile, e - 0.5 * h, a)?.s;
        Ok(pair_trace(&sm, &sp))
    };
    let central =
        |h: f64| -> Result<Complex64> { Ok(-I * HBAR * (corr(h)? - corr(-h)?) / (2.0 * h)) };
    let d = [central(eps)?, central(0.5 * eps)?, central(0.25 * eps)?];
    let r1 = [(4.0 * d[1] - d[0]) / 3.0, (4.0 * d[2] - d[1]) / 3.0];
    Ok((16.0 * r1[1] - r1[0]) / 15.0)
}

/// Plain central difference at one offset, without extrapolation.
pub fn symmetric_q_raw(profile: &ValidatedProfile, e: f64, eps: f64, a: f64) -> Result<Complex64> {
    let sp = s_matrix_sample(profile, e + 0.5 * eps, a)?.s;
    let sm = s_matrix_sample(profile, e - 0.5 * eps, a)?.s;
    let f_plus = pair_trace(&sm, &sp);
    let f_minus = pair_trace(&sp, &sm);
    Ok(-I * HBAR * (f_plus - f_minus) / (2.0 * eps))
}

fn pair_trace(lower: &CMatrix, upper: &CMatrix) -> Complex64 {
    (lower.adjoint() * upper).trace() / lower.nrows() as f64
}

/// Spacing of an energy-ordered sample list, if uniform.
fn uniform_spacing(samples: &[SMatrixSample]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let de = samples[1].energy - samples[0].energy;
    if !(de > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    for w in samples.windows(2) {
        let h = w[1].energy - w[0].energy;
        if (h - de).abs() > SPACING_TOL * de {
            return Err(Error::NonUniformGrid);
        }
    }
    Ok(de)
}

/// Two-point correlation of `S` at offset `eps` and its slope at zero offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub eps: f64,
    /// `int Tr S^dagger(E - eps/2) S(E + eps/2) / N dE`
    pub integral: (f64, f64),
    /// `-i hbar d/d eps` of the integral at zero, from `+-eps`.
    pub derivative: f64,
    /// Midpoint energies covered: `[E_first + eps/2, E_last - eps/2]`.
    pub band: (f64, f64),
}

/// `eps` must be a whole number of grid spacings, at most [`MAX_OFFSET_STEPS`].
pub fn correlation_integral(samples: &[SMatrixSample], eps: f64) -> Result<Correlation> {
    let de = uniform_spacing(samples)?;
    let m = (eps / de).round();
    if !(m >= 1.0) || (eps - m * de).abs() > 1e-9 * de || m as usize > MAX_OFFSET_STEPS {
        return Err(Error::OffGridEpsilon { eps, de });
    }
    let m = m as usize;
    if samples.len() <= m + 1 {
        return Err(Error::InsufficientSamples {
            needed: m + 2,
            got: samples.len(),
        });
    }
    let products: Vec<Complex64> = (0..samples.len() - m)
        .map(|j| pair_trace(&samples[j].s, &samples[j + m].s))
        .collect();
    let c = simpson_uniform(&products, de);
    // C(-eps) = conj C(eps), so the central difference is Im C / eps
    let band = (
        samples[0].energy + 0.5 * eps,
        samples[samples.len() - 1].energy - 0.5 * eps,
    );
    Ok(Correlation {
        eps,
        integral: (c.re, c.im),
        derivative: HBAR * c.im / eps,
        band,
    })
}

/// Direct `int tau dE` over `[lo, hi]` from the delays of the samples.
pub fn direct_delay_integral(samples: &[SMatrixSample], lo: f64, hi: f64) -> Result<f64> {
    let grid = EnergyGrid::new(samples.iter().map(|s| s.energy).collect())?;
    let tau = crate::delay::delays_from_samples(samples)?;
    let n = tau.len();
    let dp = DelayProfile::from_samples(grid, tau, vec![0.0; n], samples[0].channels())?;
    Ok(dp.integral_at(hi)? - dp.integral_at(lo)?)
}

/// Discrete van Kampen kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    /// Ascending, from `-M/2 dzeta` to `(M/2 - 1) dzeta`.
    pub zeta: Vec<f64>,
    pub h: Vec<Complex64>,
    pub a: f64,
    pub de: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub n_energy: usize,
    pub options: KernelOptions,
    pub weights: Vec<f64>,
}

impl KernelGrid {
    pub fn dzeta(&self) -> f64 {
        self.zeta[1] - self.zeta[0]
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.n_energy)
            .map(|m| self.e_min + m as f64 * self.de)
            .collect()
    }

    /// Index of `zeta = 0`.
    pub fn origin(&self) -> usize {
        self.h.len() / 2
    }

    /// Interior band `[lo, hi]` away from the window edges.
    pub fn interior(&self) -> (f64, f64) {
        let span = self.e_max - self.e_min;
        let f = self.options.edge_fraction;
        (self.e_min + f * span, self.e_max - f * span)
    }

    /// `e^{2ika} S(E)` times the window, recovered from the kernel.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let m_len = self.h.len();
        let dz = self.dzeta();
        let mut buf: Vec<Complex64> = (0..m_len)
            .map(|i| {
                // back to FFT order: index j in [0, M) holds zeta = signed(j) dzeta
                let k = (i + self.origin()) % m_len;
                self.h[k] * Complex64::from_polar(1.0, self.e_min * self.zeta[k])
            })
            .collect();
        FftPlanner::new().plan_fft_inverse(m_len).process(&mut buf);
        buf.truncate(self.n_energy);
        buf.iter().map(|z| z * dz).collect()
    }

    /// `int |H|^2 dzeta`.
    pub fn norm_sq(&self) -> f64 {
        self.h.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dzeta()
    }
}

/// `H(zeta) = (1/2 pi hbar) int e^{-i E zeta / hbar} e^{2ika} S(E) w(E) dE`.
///
/// Samples carry their own reference length and are re-referenced to `a`.
pub fn van_kampen_kernel(
    samples: &[SMatrixSample],
    a: f64,
    opts: KernelOptions,
) -> Result<KernelGrid> {
    let de = uniform_spacing(samples)?;
    if samples.iter().any(|s| s.channels() != 1) {
        return Err(Error::InvalidInput(
            "the kernel is defined for one channel".into(),
        ));
    }
    if opts.padding == 0 {
        return Err(Error::InvalidInput("padding must be at least 1".into()));
    }
    let n = samples.len();
    let m_len = n * opts.padding;
    let weights = opts.window.weights(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); m_len];
    for (j, smp) in samples.iter().enumerate() {
        let shift = 2.0 * wavenumber(smp.energy) * (a - smp.reference_length);
        buf[j] = smp.s[(0, 0)] * Complex64::from_polar(weights[j], shift);
    }
    FftPlanner::new().plan_fft_forward(m_len).process(&mut buf);
    let e_min = samples[0].energy;
    let dz = TWO_PI * HBAR / (m_len as f64 * de);
    let half = m_len / 2;
    let mut zeta = Vec::with_capacity(m_len);
    let mut h = Vec::with_capacity(m_len);
    for i in 0..m_len {
        let j = (i + m_len - half) % m_len;
        let signed = i as f64 - half as f64;
        let z = signed * dz;
        zeta.push(z);
        h.push(buf[j] * Complex64::from_polar(de / (TWO_PI * HBAR), -e_min * z / HBAR));
    }
    Ok(KernelGrid {
        zeta,
        h,
        a,
        de,
        e_min,
        e_max: samples[n - 1].energy,
        n_energy: n,
        options: opts,
        weights,
    })
}

/// Decay rate of `|H|` fitted by least squares to `ln |H|` on `[lo, hi]`.
pub fn tail_decay_rate(kg: &KernelGrid, lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = kg
        .zeta
        .iter()
        .zip(&kg.h)
        .filter(|(z, _)| **z >= lo && **z <= hi)
        .map(|(&z, h)| (z, h.norm().ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(-sxy / sxx)
}

/// Real Wigner distribution on `(zeta+, E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub zeta_plus: Vec<f64>,
    pub energy: Vec<f64>,
    /// Row-major, one row per `zeta+`.
    pub w: Vec<f64>,
    /// Largest `|Im W|` over the largest `|Re W|`.
    pub imag_residue: f64,
    pub a: f64,
    pub interior: (f64, f64),
    pub options: KernelOptions,
    pub weights: Vec<f64>,
}

impl WignerGrid {
    pub fn rows(&self) -> usize {
        self.zeta_plus.len()
    }

    pub fn cols(&self) -> usize {
        self.energy.len()
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.w[row * self.cols() + col]
    }

    /// `int W dzeta+` per energy; equals `|w(E) S(E)|^2`.
    pub fn energy_marginal(&self) -> Vec<f64> {
        let dzp = self.zeta_plus[1] - self.zeta_plus[0];
        let mut out = vec![0.0; self.cols()];
        for r in 0..self.rows() {
            let row = &self.w[r * self.cols()..(r + 1) * self.cols()];
            for (o, v) in out.iter_mut().zip(row) {
                *o += v * dzp;
            }
        }
        out
    }

    /// Rows with `|zeta+| <= limit`, for display.
    pub fn clipped(&self, limit: f64) -> WignerGrid {
        let keep: Vec<usize> = (0..self.rows())
            .filter(|&r| self.zeta_plus[r].abs() <= limit)
            .collect();
        let cols = self.cols();
        WignerGrid {
            zeta_plus: keep.iter().map(|&r| self.zeta_plus[r]).collect(),
            w: keep
                .iter()
                .flat_map(|&r| self.w[r * cols..(r + 1) * cols].iter().copied())
                .collect(),
            energy: self.energy.clone(),
            weights: self.weights.clone(),
            ..*self
        }
    }
}

/// `W(zeta+, E) = int e^{i E zeta- / hbar} H(zeta+ + zeta-/2) H*(zeta+ - zeta-/2) dzeta-`,
/// summed over all pairs of kernel samples, on the source energies.
pub fn wigner_distribution(kg: &KernelGrid) -> WignerGrid {
    let m_len = kg.len() as i64;
    let half = m_len / 2;
    let dz = kg.dzeta();
    let n = kg.n_energy;
    let fft = FftPlanner::new().plan_fft_inverse(kg.len());
    // zeta+ = n2 dzeta / 2 with n2 = j + j', j, j' in [-M/2, M/2)
    let n2_values: Vec<i64> = (-m_len..=m_len - 2).collect();
    let rows: Vec<(Vec<f64>, f64, f64)> = n2_values
        .par_iter()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); kg.len()],
            |buf, &n2| {
                buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                let j_lo = (-half).max(n2 - half + 1);
                let j_hi = (half - 1).min(n2 + half);
                for j in j_lo..=j_hi {
                    let jp = n2 - j;
                    let d = j - jp;
                    let f = kg.h[(j + half) as usize] * kg.h[(jp + half) as usize].conj();
                    let phase = kg.e_min * d as f64 * dz / HBAR;
                    buf[d.rem_euclid(m_len) as usize] += f * Complex64::from_polar(1.0, phase);
                }
                fft.process(buf);
                let mut row = Vec::with_capacity(n);
                let (mut max_re, mut max_im) = (0.0f64, 0.0f64);
                for z in buf.iter().take(n) {
                    let v = z * (2.0 * dz);
                    max_re = max_re.max(v.re.abs());
                    max_im = max_im.max(v.im.abs());
                    row.push(v.re);
                }
                (row, max_re, max_im)
            },
        )
        .collect();
    let max_re = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let max_im = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    WignerGrid {
        zeta_plus: n2_values.iter().map(|&n2| 0.5 * n2 as f64 * dz).collect(),
        energy: kg.energies(),
        w: rows.into_iter().flat_map(|r| r.0).collect(),
        imag_residue: if max_re > 0.0 { max_im / max_re } else { 0.0 },
        a: kg.a,
        interior: kg.interior(),
        options: kg.options,
        weights: kg.weights.clone(),
    }
}

/// First `zeta+` moment of `W` over the interior band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceDelay {
    /// `int dE [int (zeta+ - 2a/v) W dzeta+ / int W dzeta+]`
    pub integral: f64,
    /// `int 2a/v dE` over the band.
    pub free_flight: f64,
    /// Per-energy delay read off `W`, on `energies`.
    pub tau: Vec<f64>,
    pub energies: Vec<f64>,
    pub band: (f64, f64),
    /// The unnormalised double integral; carries the window weight.
    pub window_weighted: f64,
}

impl PhaseSpaceDelay {
    /// `int zeta+ W / int W` integrated: the delay referenced to `a`.
    pub fn referenced_integral(&self) -> f64 {
        self.integral + self.free_flight
    }
}

/// Phase-space form of the integrated delay. At each energy the `zeta+`
/// moment is divided by the marginal `int W dzeta+`, which removes the
/// window weight from the result.
pub fn phase_space_delay_integral(wg: &WignerGrid, a: f64) -> Result<PhaseSpaceDelay> {
    let (lo, hi) = wg.interior;
    let cols: Vec<usize> = (0..wg.cols())
        .filter(|&c| wg.energy[c] >= lo && wg.energy[c] <= hi)
        .collect();
    if cols.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: cols.len(),
        });
    }
    let dzp = wg.zeta_plus[1] - wg.zeta_plus[0];
    let mut tau = Vec::with_capacity(cols.len());
    let mut weighted = Vec::with_capacity(cols.len());
    let mut flight = Vec::with_capacity(cols.len());
    for &c in &cols {
        let e = wg.energy[c];
        let ff = if a == 0.0 { 0.0 } else { 2.0 * a / velocity(e) };
        let (mut mass, mut moment) = (0.0, 0.0);
        for r in 0..wg.rows() {
            let w = wg.at(r, c);
            mass += w;
            moment += wg.zeta_plus[r] * w;
        }
        if !(mass > 0.0) {
            return Err(Error::InvalidInput(format!(
                "vanishing Wigner marginal at E = {e}"
            )));
        }
        tau.push(moment / mass - ff);
        weighted.push((moment - ff * mass) * dzp);
        flight.push(ff);
    }
    let energies: Vec<f64> = cols.iter().map(|&c| wg.energy[c]).collect();
    let integ = |v: &[f64]| *cumulative_integral(&energies, v).last().expect("non-empty");
    Ok(PhaseSpaceDelay {
        integral: integ(&tau),
        free_flight: integ(&flight),
        window_weighted: integ(&weighted),
        band: (energies[0], energies[energies.len() - 1]),
        tau,
        energies,
    })
}

/// `2a [k(E + eps/2) - k(E - eps/2)] - 2a eps / v`, the part of the
/// reference phase left out when the wavenumber difference is kept to first
/// order in `eps`.
pub fn expansion_residue(e: f64, eps: f64, a: f64) -> f64 {
    2.0 * a * (wavenumber(e + 0.5 * eps) - wavenumber(e - 0.5 * eps)) - 2.0 * a * eps / velocity(e)
}

/// S-matrix samples of a profile on `n` uniform energies `dE, 2 dE, ..., n dE`.
/// Points landing on a layer height are nudged just above it.
pub fn band_samples(
    profile: &ValidatedProfile,
    de: f64,
    n: usize,
    a: f64,
) -> Result<Vec<SMatrixSample>> {
    let thresholds = profile.thresholds();
    (1..=n)
        .into_par_iter()
        .map(|m| {
            let mut e = m as f64 * de;
            if let Some(v) = thresholds
                .iter()
                .find(|&&v| (e - v).abs() < THRESHOLD_NUDGE)
            {
                e = v + THRESHOLD_NUDGE;
            }
            s_matrix_sample(profile, e, a)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Geometry, Layer, PotentialProfile};
    use crate::resonance::{bw_sample, BWParams};

    fn unit_samples(n: usize, de: f64) -> Vec<SMatrixSample> {
        (1..=n)
            .map(|m| SMatrixSample::from_phase(m as f64 * de, 0.0, 0.0, 0.0))
            .collect()
    }

    #[test]
    fn windows() {
        let w = Window::Hann.weights(5);
        assert_eq!(w[0], 0.0);
        assert!((w[2] - 1.0).abs() < 1e-15);
        assert!(Window::Blackman.weights(9)[0].abs() < 1e-15);
        assert_eq!("blackman".parse::<Window>().unwrap(), Window::Blackman);
    }

    #[test]
    fn constant_s_gives_a_delta_kernel() {
        let opts = KernelOptions {
            window: Window::Rectangular,
            padding: 1,
            edge_fraction: 0.1,
        };
        let kg = van_kampen_kernel(&unit_samples(64, 0.1), 0.0, opts).unwrap();
        let total: f64 = kg.h.iter().map(|z| z.norm_sqr()).sum();
        let o = kg.origin();
        let head = kg.h[o].norm_sqr() + kg.h[o + 1].norm_sqr();
        assert!(head / total > 0.95);
    }

    #[test]
    fn kernel_round_trip_is_exact() {
        let p = BWParams::new(2.0, 0.3);
        let samples: Vec<_> = (1..=200).map(|m| bw_sample(m as f64 * 0.02, &p)).collect();
        let kg = van_kampen_kernel(&samples, 0.0, KernelOptions::default()).unwrap();
        let back = kg.reconstruct();
        for (j, (b, s)) in back.iter().zip(&samples).enumerate() {
            assert!((b - s.s[(0, 0)] * kg.weights[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn non_uniform_grid_is_rejected() {
        let mut s = unit_samples(10, 0.1);
        s[3].energy += 0.01;
        assert!(matches!(
            van_kampen_kernel(&s, 0.0, KernelOptions::default()),
            Err(Error::NonUniformGrid)
        ));
    }

    #[test]
    fn off_grid_offset_is_rejected() {
        let s = unit_samples(50, 0.1);
        assert!(matches!(
            correlation_integral(&s, 0.15),
            Err(Error::OffGridEpsilon { .. })
        ));
        assert!(matches!(
            correlation_integral(&s, 0.9),
            Err(Error::OffGridEpsilon { .. })
        ));
        let c = correlation_integral(&s, 0.1).unwrap();
        assert_eq!(c.derivative, 0.0);
        assert!((c.integral.0 - 4.8).abs() < 1e-12);
    }

    #[test]
    fn free_particle_symmetric_q() {
        let p = PotentialProfile::free_particle(Geometry::RadialSWave)
            .validate()
            .unwrap();
        assert!(symmetric_q(&p, 1.0, 0.01, 0.0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn delta_kernel_wigner_is_flat() {
        let opts = KernelOptions {
            window: Window::Rectangular,
            padding: 1,
            edge_fraction: 0.1,
        };
        let kg = van_kampen_kernel(&unit_samples(32, 0.1), 0.0, opts).unwrap();
        let wg = wigner_distribution(&kg);
        let row0 = wg.zeta_plus.iter().position(|&z| z == 0.0).unwrap();
        let peak = wg.at(row0, 0);
        for c in 0..wg.cols() {
            assert!((wg.at(row0, c) - peak).abs() < 1e-10 * peak.abs());
        }
        let off: f64 = (0..wg.rows())
            .filter(|&r| r != row0)
            .map(|r| wg.at(r, 5).abs())
            .sum();
        assert!(off < 1e-10 * peak.abs());
        assert!(wg.imag_residue < 1e-10);
    }

    #[test]
    fn expansion_residue_is_third_order() {
        let r1 = expansion_residue(2.0, 0.1, 1.0);
        let r2 = expansion_residue(2.0, 0.05, 1.0);
        assert!((r1 / r2 - 8.0).abs() < 0.1);
    }

    #[test]
    fn correlation_matches_direct_integral_for_a_well() {
        let p = PotentialProfile::new(
            Geometry::RadialSWave,
            vec![Layer::new(1.0, -10.0), Layer::new(0.5, 6.0)],
        )
        .validate()
        .unwrap();
        let samples = band_samples(&p, 0.01, 400, 1.5).unwrap();
        let c = correlation_integral(&samples, 0.01).unwrap();
        let direct = direct_delay_integral(&samples, c.band.0, c.band.1).unwrap();
        assert!(
            (c.derivative - direct).abs() < 0.01 * direct.abs(),
            "{} vs {direct}",
            c.derivative
        );
    }
}
