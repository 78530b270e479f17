//! Bundled test potentials.

use crate::potential::{Geometry, Layer, PotentialProfile};

/// Deep s-wave well behind a thin high barrier. Three narrow resonances lie
/// below `E = 32`: near 6.750, 16.162 and 27.656 with widths 0.0040, 0.0106
/// and 0.0223.
pub fn sharp_well() -> PotentialProfile {
    PotentialProfile::new(
        Geometry::RadialSWave,
        vec![Layer::new(3.0, -10.0), Layer::new(0.2, 200.0)],
    )
}

/// Shallow well with a low barrier; only broad structure.
pub fn broad_well() -> PotentialProfile {
    PotentialProfile::new(
        Geometry::RadialSWave,
        vec![Layer::new(1.0, -10.0), Layer::new(0.5, 6.0)],
    )
}

pub fn square_well() -> PotentialProfile {
    PotentialProfile::new(Geometry::RadialSWave, vec![Layer::new(1.0, -5.0)])
}

pub fn barrier() -> PotentialProfile {
    PotentialProfile::new(Geometry::FullLine, vec![Layer::new(1.0, 5.0)])
}

/// Resonant-tunnelling structure.
pub fn double_barrier() -> PotentialProfile {
    PotentialProfile::new(
        Geometry::FullLine,
        vec![
            Layer::new(0.3, 20.0),
            Layer::new(2.0, 0.0),
            Layer::new(0.3, 20.0),
        ],
    )
}

/// Alternating slabs, as in a reflectometry multilayer.
pub fn multilayer() -> PotentialProfile {
    let mut layers = Vec::new();
    for i in 0..5 {
        layers.push(Layer::new(0.5, if i % 2 == 0 { 3.0 } else { -2.0 }));
    }
    PotentialProfile::new(Geometry::FullLine, layers)
}

pub fn all() -> Vec<(&'static str, PotentialProfile)> {
    vec![
        ("sharp-well", sharp_well()),
        ("broad-well", broad_well()),
        ("square-well", square_well()),
        ("barrier", barrier()),
        ("double-barrier", double_barrier()),
        ("multilayer", multilayer()),
    ]
}

/// Resonances of [`sharp_well`] below `E = 32` found by the independent
/// Numerov phase-jump count (`scripts/numerov_oracle.py`).
pub const SHARP_WELL_ORACLE_COUNT: usize = 3;

/// Pole estimates `(E0, Gamma)` of [`sharp_well`] from the same script.
pub const SHARP_WELL_ORACLE_POLES: [(f64, f64); 3] = [
    (6.750217202533426, 0.004036743091015732),
    (16.162436014917148, 0.010642143076155837),
    (27.65622936670868, 0.022309995314545025),
];
