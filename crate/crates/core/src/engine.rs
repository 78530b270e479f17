//! Exact S-matrices of piecewise-constant potentials and their analytic
//! energy derivatives.
//!
//! Each layer is propagated in the `(psi, psi')` basis with the matrix
//!
//! ```text
//! [[ cos(kw),          sin(kw)/k ],
//!  [ -k sin(kw),       cos(kw)   ]]     k^2 = E - V
//! ```
//!
//! whose entries are entire functions of `z = k^2 w^2`. Propagating and
//! evanescent layers therefore share a single code path, and `d/dE` follows
//! from `dz/dE = w^2`.
//!
//! Phase reference: the returned S-matrix describes outgoing amplitudes
//! measured from the reference surface at `a` (radius `a`, or the planes
//! `x = L - a` and `x = a` on the full line), so moving the reference out by
//! `d` multiplies S by `exp(2ikd)` and adds the free-flight time `2d/v` to the
//! delay. With `a` equal to the support end the delay is the excess dwell time
//! over a free particle that starts at the edge of the potential.

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::{Geometry, ValidatedProfile};
use crate::units::wavenumber;

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Energies closer than this to a layer height are rejected.
pub const THRESHOLD_GUARD: f64 = 1e-12;

/// Minimum distance kept between grid points and layer heights by
/// [`EnergyGrid::avoiding_thresholds`].
pub const THRESHOLD_NUDGE: f64 = 1e-9;

/// Scattering matrix at one energy together with `dS/dE`.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrixSample {
    pub energy: f64,
    pub s: CMatrix,
    pub ds_de: CMatrix,
    pub reference_length: f64,
}

impl SMatrixSample {
    /// Single-channel sample `S = exp(2 i delta)` from a phase and its slope.
    pub fn from_phase(energy: f64, delta: f64, ddelta_de: f64, reference_length: f64) -> Self {
        let s = Complex64::from_polar(1.0, 2.0 * delta);
        let ds = 2.0 * I * ddelta_de * s;
        Self {
            energy,
            s: CMatrix::from_element(1, 1, s),
            ds_de: CMatrix::from_element(1, 1, ds),
            reference_length,
        }
    }

    pub fn channels(&self) -> usize {
        self.s.nrows()
    }

    /// `max |S^dagger S - I|` over entries.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.channels();
        let prod = self.s.adjoint() * &self.s;
        max_abs(&(prod - CMatrix::identity(n, n)))
    }

    /// Total scattering phase `arg det S / 2` in `(-pi/2, pi/2]`. For one
    /// channel this is the phase shift relative to the reference surface.
    pub fn half_phase(&self) -> f64 {
        let det = if self.channels() == 1 {
            self.s[(0, 0)]
        } else {
            self.s.determinant()
        };
        let half = det.arg() / 2.0;
        if half <= -std::f64::consts::FRAC_PI_2 {
            half + std::f64::consts::PI
        } else {
            half
        }
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Strictly increasing grid of positive energies.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrid {
    points: Vec<f64>,
    uniform: bool,
    min_spacing: f64,
}

/// Relative tolerance under which two spacings count as equal.
pub(crate) const SPACING_TOL: f64 = 1e-6;

impl EnergyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid("need at least two points".into()));
        }
        if let Some(&bad) = points.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidGrid(format!("energy {bad} is not positive")));
        }
        let mut min_spacing = f64::INFINITY;
        let mut max_spacing = 0.0f64;
        for (i, w) in points.windows(2).enumerate() {
            let d = w[1] - w[0];
            if !(d > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "not increasing at index {}",
                    i + 1
                )));
            }
            min_spacing = min_spacing.min(d);
            max_spacing = max_spacing.max(d);
        }
        let uniform = (max_spacing - min_spacing) <= SPACING_TOL * min_spacing;
        Ok(Self {
            points,
            uniform,
            min_spacing,
        })
    }

    /// `n` equally spaced points from `lo` to `hi` inclusive.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidGrid(format!(
                "bad uniform grid [{lo}, {hi}] x {n}"
            )));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
        pts[n - 1] = hi;
        Self::new(pts)
    }

    /// Moves points that sit within [`THRESHOLD_NUDGE`] of a layer height to
    /// just above it.
    pub fn avoiding_thresholds(self, profile: &ValidatedProfile) -> Result<Self> {
        let thresholds = profile.thresholds();
        let mut pts = self.points;
        for e in pts.iter_mut() {
            for &v in &thresholds {
                if (*e - v).abs() < THRESHOLD_NUDGE {
                    *e = v + THRESHOLD_NUDGE;
                }
            }
        }
        Self::new(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn min_spacing(&self) -> f64 {
        self.min_spacing
    }

    /// Spacing of a uniform grid.
    pub fn spacing(&self) -> Option<f64> {
        self.uniform
            .then(|| (self.points[self.len() - 1] - self.points[0]) / (self.len() - 1) as f64)
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.len() - 1]
    }
}

/// Values of `cos(sqrt z)` and `sin(sqrt z)/sqrt z` and their `z`-derivatives.
#[derive(Debug, Clone, Copy)]
struct Entire {
    c: f64,
    s: f64,
    dc: f64,
    ds: f64,
}

fn entire(z: f64) -> Entire {
    if z.abs() < 0.5 {
        // s(z) = sum (-z)^n / (2n+1)!,  c(z) = sum (-z)^n / (2n)!
        let mut c = 0.0;
        let mut s = 0.0;
        let mut ds = 0.0;
        let mut term_c = 1.0; // (-z)^n / (2n)!
        let mut term_s = 1.0; // (-z)^n / (2n+1)!
        let mut pow_prev = 1.0; // (-1)^n z^(n-1) / (2n+1)! times n, built from term_s
        for n in 0..20 {
            c += term_c;
            s += term_s;
            if n > 0 {
                ds += pow_prev;
            }
            let nf = n as f64;
            // term_s_{n+1} = term_s_n * (-z) / ((2n+2)(2n+3))
            let next_s = term_s * (-z) / ((2.0 * nf + 2.0) * (2.0 * nf + 3.0));
            // derivative term: (n+1) (-1)^(n+1) z^n / (2n+3)!
            pow_prev = -(nf + 1.0) * term_s / ((2.0 * nf + 2.0) * (2.0 * nf + 3.0));
            term_s = next_s;
            term_c *= -z / ((2.0 * nf + 1.0) * (2.0 * nf + 2.0));
        }
        Entire {
            c,
            s,
            dc: -0.5 * s,
            ds,
        }
    } else {
        let (c, s) = if z > 0.0 {
            let r = z.sqrt();
            (r.cos(), r.sin() / r)
        } else {
            let r = (-z).sqrt();
            (r.cosh(), r.sinh() / r)
        };
        Entire {
            c,
            s,
            dc: -0.5 * s,
            ds: (c - s) / (2.0 * z),
        }
    }
}

/// Propagator of `(psi, psi')` across one layer and its energy derivative.
fn layer_propagator(e: f64, width: f64, height: f64) -> (Matrix2<f64>, Matrix2<f64>) {
    let q = e - height;
    let w2 = width * width;
    let f = entire(q * w2);
    let m = Matrix2::new(f.c, width * f.s, -q * width * f.s, f.c);
    let dm11 = f.dc * w2;
    let dm12 = width * f.ds * w2;
    let dm21 = -(width * f.s + q * width * f.ds * w2);
    (m, Matrix2::new(dm11, dm12, dm21, dm11))
}

fn check_energy(profile: &ValidatedProfile, e: f64) -> Result<()> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::NonPositiveEnergy(e));
    }
    if let Some(layer) = profile
        .layers()
        .iter()
        .find(|l| (e - l.height).abs() < THRESHOLD_GUARD)
    {
        return Err(Error::EnergyAtThreshold {
            energy: e,
            height: layer.height,
        });
    }
    Ok(())
}

/// Product of layer propagators over the whole support, with its derivative.
fn stack_propagator(profile: &ValidatedProfile, e: f64) -> (Matrix2<f64>, Matrix2<f64>) {
    let mut p = Matrix2::identity();
    let mut dp = Matrix2::zeros();
    for layer in profile.layers() {
        let (m, dm) = layer_propagator(e, layer.width, layer.height);
        dp = dm * p + m * dp;
        p = m * p;
    }
    (p, dp)
}

/// Transfer matrix between plane-wave coefficients `(A, B)` of
/// `A e^{ikx} + B e^{-ikx}` on the left edge of the support and those on the
/// right edge (each measured from its own edge), with `dT/dE`.
pub fn transfer_matrix_with_derivative(
    profile: &ValidatedProfile,
    e: f64,
) -> Result<(Matrix2<Complex64>, Matrix2<Complex64>)> {
    check_energy(profile, e)?;
    let k = wavenumber(e);
    let dk = 0.5 / k;
    let (p, dp) = stack_propagator(profile, e);
    let pc = p.map(Complex64::from);
    let dpc = dp.map(Complex64::from);
    let ik = I * k;
    let w = Matrix2::new(Complex64::from(1.0), Complex64::from(1.0), ik, -ik);
    let dw = Matrix2::new(Complex64::from(0.0), Complex64::from(0.0), I * dk, -I * dk);
    let inv2ik = 1.0 / (2.0 * ik);
    let w_inv = Matrix2::new(Complex64::from(0.5), inv2ik, Complex64::from(0.5), -inv2ik);
    let dw_inv = -(w_inv * dw * w_inv);
    let t = w_inv * pc * w;
    let dt = dw_inv * pc * w + w_inv * dpc * w + w_inv * pc * dw;
    if t.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow(e));
    }
    Ok((t, dt))
}

/// Transfer matrix of the layer stack at energy `e`; see
/// [`transfer_matrix_with_derivative`].
pub fn transfer_matrix(profile: &ValidatedProfile, e: f64) -> Result<Matrix2<Complex64>> {
    transfer_matrix_with_derivative(profile, e).map(|(t, _)| t)
}

fn check_reference(profile: &ValidatedProfile, a: f64) -> Result<()> {
    let support_end = profile.support_end();
    if !(a >= support_end) || !a.is_finite() {
        return Err(Error::ReferenceInsideSupport { a, support_end });
    }
    Ok(())
}

/// Edge-referenced radial phase `delta + k L` and its energy derivative.
fn radial_edge_phase(profile: &ValidatedProfile, e: f64) -> Result<(f64, f64)> {
    check_energy(profile, e)?;
    let k = wavenumber(e);
    let (p, dp) = stack_propagator(profile, e);
    // regular solution starts as (u, u') = (0, 1)
    let y = p * Vector2::new(0.0, 1.0);
    let dy = dp * Vector2::new(0.0, 1.0);
    let (u, up) = (y[0], y[1]);
    let (du, dup) = (dy[0], dy[1]);
    if !(u.is_finite() && up.is_finite()) {
        return Err(Error::Overflow(e));
    }
    let x = k * u;
    let dx = u * 0.5 / k + k * du;
    let phase = x.atan2(up);
    let dphase = (dx * up - x * dup) / (x * x + up * up);
    Ok((phase, dphase))
}

/// Radial s-wave phase shift `delta_0` (origin convention) in `(-pi/2, pi/2]`
/// and its energy derivative.
pub fn phase_shift(profile: &ValidatedProfile, e: f64) -> Result<(f64, f64)> {
    if profile.geometry() != Geometry::RadialSWave {
        return Err(Error::InvalidInput(
            "phase shift needs a radial profile".into(),
        ));
    }
    let (phi, dphi) = radial_edge_phase(profile, e)?;
    let k = wavenumber(e);
    let l = profile.support_end();
    let mut delta = phi - k * l;
    delta -= std::f64::consts::PI * (delta / std::f64::consts::PI).round();
    if delta <= -std::f64::consts::FRAC_PI_2 {
        delta += std::f64::consts::PI;
    }
    Ok((delta, dphi - l * 0.5 / k))
}

/// S-matrix and `dS/dE` at energy `e` with phase reference `a`.
pub fn s_matrix_sample(profile: &ValidatedProfile, e: f64, a: f64) -> Result<SMatrixSample> {
    check_reference(profile, a)?;
    let k = wavenumber(e);
    let gap = a - profile.support_end();
    match profile.geometry() {
        Geometry::RadialSWave => {
            let (phi, dphi) = radial_edge_phase(profile, e)?;
            let total = phi + k * gap;
            let dtotal = dphi + gap * 0.5 / k;
            Ok(SMatrixSample::from_phase(e, total, dtotal, a))
        }
        Geometry::FullLine => {
            let (t, dt) = transfer_matrix_with_derivative(profile, e)?;
            let t22 = t[(1, 1)];
            let inv = 1.0 / t22;
            let inv2 = inv * inv;
            let r_left = -t[(1, 0)] * inv;
            let r_right = t[(0, 1)] * inv;
            let dr_left = -(dt[(1, 0)] * t22 - t[(1, 0)] * dt[(1, 1)]) * inv2;
            let dr_right = (dt[(0, 1)] * t22 - t[(0, 1)] * dt[(1, 1)]) * inv2;
            let dtrans = -dt[(1, 1)] * inv2;
            let s_edge = CMatrix::from_row_slice(2, 2, &[r_left, inv, inv, r_right]);
            let ds_edge = CMatrix::from_row_slice(2, 2, &[dr_left, dtrans, dtrans, dr_right]);
            let shift = Complex64::from_polar(1.0, 2.0 * k * gap);
            let dshift = I * (gap / k) * shift;
            let s = &s_edge * shift;
            let ds = ds_edge * shift + s_edge * dshift;
            Ok(SMatrixSample {
                energy: e,
                s,
                ds_de: ds,
                reference_length: a,
            })
        }
    }
}

/// S-matrix at energy `e` with phase reference `a`.
pub fn s_matrix(profile: &ValidatedProfile, e: f64, a: f64) -> Result<CMatrix> {
    s_matrix_sample(profile, e, a).map(|s| s.s)
}

/// Analytic `dS/dE` at energy `e` with phase reference `a`.
pub fn s_matrix_derivative(profile: &ValidatedProfile, e: f64, a: f64) -> Result<CMatrix> {
    s_matrix_sample(profile, e, a).map(|s| s.ds_de)
}

/// S-matrix samples over a grid, evaluated in parallel and returned in grid order.
pub fn sample_grid(
    profile: &ValidatedProfile,
    grid: &EnergyGrid,
    a: f64,
) -> Result<Vec<SMatrixSample>> {
    grid.points()
        .par_iter()
        .map(|&e| s_matrix_sample(profile, e, a))
        .collect()
}
