//! Piecewise-constant scattering potentials.
//!
//! Full-line profiles occupy `[0, support_end]` with zero potential on both
//! sides. Radial profiles are s-wave only and start at `r = 0`, where the
//! wavefunction is required to vanish.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    FullLine,
    RadialSWave,
}

impl Geometry {
    /// Number of open channels of the S-matrix for this geometry.
    pub fn channels(self) -> usize {
        match self {
            Geometry::FullLine => 2,
            Geometry::RadialSWave => 1,
        }
    }
}

/// A constant slab of potential. Negative heights are wells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub width: f64,
    pub height: f64,
}

impl Layer {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }
}

/// Unvalidated potential description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile {
    pub geometry: Geometry,
    pub layers: Vec<Layer>,
    /// Marks an intentionally empty profile. An empty layer list without
    /// this flag is rejected.
    #[serde(default)]
    pub free: bool,
}

impl PotentialProfile {
    pub fn new(geometry: Geometry, layers: Vec<Layer>) -> Self {
        Self {
            geometry,
            layers,
            free: false,
        }
    }

    pub fn free_particle(geometry: Geometry) -> Self {
        Self {
            geometry,
            layers: Vec::new(),
            free: true,
        }
    }

    pub fn validate(&self) -> Result<ValidatedProfile> {
        validate_profile(self)
    }
}

/// A checked profile with its cumulative layer boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedProfile {
    geometry: Geometry,
    layers: Vec<Layer>,
    boundaries: Vec<f64>,
}

pub fn validate_profile(profile: &PotentialProfile) -> Result<ValidatedProfile> {
    if profile.layers.is_empty() && !profile.free {
        return Err(Error::EmptyGeometry);
    }
    if profile.free && !profile.layers.is_empty() {
        return Err(Error::InvalidInput(
            "free-particle flag set on a profile with layers".into(),
        ));
    }
    let mut boundaries = Vec::with_capacity(profile.layers.len() + 1);
    let mut edge = 0.0;
    boundaries.push(edge);
    for (index, layer) in profile.layers.iter().enumerate() {
        if !(layer.width > 0.0) || !layer.width.is_finite() {
            return Err(Error::NonPositiveWidth {
                index,
                width: layer.width,
            });
        }
        if !layer.height.is_finite() {
            return Err(Error::NonFiniteHeight { index });
        }
        edge += layer.width;
        boundaries.push(edge);
    }
    Ok(ValidatedProfile {
        geometry: profile.geometry,
        layers: profile.layers.clone(),
        boundaries,
    })
}

impl ValidatedProfile {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Layer edges, starting at 0 and ending at [`Self::support_end`].
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn support_end(&self) -> f64 {
        *self
            .boundaries
            .last()
            .expect("boundaries always hold the origin")
    }

    pub fn is_free(&self) -> bool {
        self.layers.is_empty()
    }

    /// Distinct layer heights; the energies where the local wavenumber vanishes.
    pub fn thresholds(&self) -> Vec<f64> {
        let mut heights: Vec<f64> = self.layers.iter().map(|l| l.height).collect();
        heights.sort_by(f64::total_cmp);
        heights.dedup();
        heights
    }

    pub fn to_profile(&self) -> PotentialProfile {
        PotentialProfile {
            geometry: self.geometry,
            layers: self.layers.clone(),
            free: self.layers.is_empty(),
        }
    }

    /// Potential at position `x`. Layers are half-open, `[start, end)`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        evaluate_potential(self, x)
    }
}

pub fn evaluate_potential(profile: &ValidatedProfile, x: f64) -> Result<f64> {
    if profile.geometry == Geometry::RadialSWave && x < 0.0 {
        return Err(Error::NegativeRadius(x));
    }
    if x < 0.0 || x >= profile.support_end() {
        return Ok(0.0);
    }
    // first boundary strictly greater than x closes the layer containing x
    let upper = profile.boundaries.partition_point(|&b| b <= x);
    Ok(profile.layers[upper - 1].height)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_layer() -> ValidatedProfile {
        PotentialProfile::new(
            Geometry::RadialSWave,
            vec![Layer::new(1.0, -10.0), Layer::new(0.5, 4.0)],
        )
        .validate()
        .unwrap()
    }

    #[test]
    fn free_particle_has_no_support() {
        let p = PotentialProfile::free_particle(Geometry::FullLine)
            .validate()
            .unwrap();
        assert_eq!(p.support_end(), 0.0);
        assert_eq!(p.evaluate(3.7).unwrap(), 0.0);
    }

    #[test]
    fn single_layer_boundaries() {
        let p = PotentialProfile::new(Geometry::FullLine, vec![Layer::new(1.0, 5.0)])
            .validate()
            .unwrap();
        assert_eq!(p.support_end(), 1.0);
        assert_eq!(p.boundaries(), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_layers() {
        let p = PotentialProfile::new(Geometry::FullLine, vec![Layer::new(-1.0, 5.0)]);
        assert!(matches!(
            p.validate(),
            Err(Error::NonPositiveWidth { index: 0, .. })
        ));
        let p = PotentialProfile::new(Geometry::FullLine, vec![Layer::new(1.0, f64::NAN)]);
        assert!(matches!(
            p.validate(),
            Err(Error::NonFiniteHeight { index: 0 })
        ));
        let p = PotentialProfile::new(Geometry::FullLine, vec![]);
        assert!(matches!(p.validate(), Err(Error::EmptyGeometry)));
    }

    #[test]
    fn interval_lookup() {
        let p = two_layer();
        assert_eq!(p.evaluate(1.2).unwrap(), 4.0);
        assert_eq!(p.evaluate(0.0).unwrap(), -10.0);
        assert_eq!(p.evaluate(1.0).unwrap(), 4.0);
        assert_eq!(p.evaluate(100.0).unwrap(), 0.0);
        assert_eq!(p.evaluate(1.5).unwrap(), 0.0);
    }

    #[test]
    fn radial_rejects_negative_radius() {
        assert!(matches!(
            two_layer().evaluate(-0.1),
            Err(Error::NegativeRadius(_))
        ));
    }

    #[test]
    fn support_is_single_pass_sum() {
        let widths = [0.1, 0.2, 0.3, 0.7, 1e-3];
        let layers = widths.iter().map(|&w| Layer::new(w, 1.0)).collect();
        let p = PotentialProfile::new(Geometry::FullLine, layers)
            .validate()
            .unwrap();
        assert_eq!(p.support_end(), widths.iter().sum::<f64>());
    }

    #[test]
    fn evaluation_is_repeatable() {
        let p = two_layer();
        for x in [0.3, 1.0, 1.49, 7.0] {
            assert_eq!(
                p.evaluate(x).unwrap().to_bits(),
                p.evaluate(x).unwrap().to_bits()
            );
        }
    }
}
