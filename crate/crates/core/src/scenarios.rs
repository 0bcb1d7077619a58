//! The four reference separations, two per regime.

use crate::params::{derive_scales, snap_to_lambda21, SystemParams};
use crate::spectral::WindowPreset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    /// Separation in units of `lambda_beat`.
    pub beats: f64,
    pub window: WindowPreset,
}

pub const MARKOVIAN_FULL: Scenario = Scenario { name: "markovian_beat", beats: 1.0, window: WindowPreset::Markovian };
pub const MARKOVIAN_HALF: Scenario = Scenario { name: "markovian_half", beats: 0.5, window: WindowPreset::Markovian };
pub const NONMARKOVIAN_HALF: Scenario =
    Scenario { name: "nonmarkovian_7_5", beats: 7.5, window: WindowPreset::NonMarkovian };
pub const NONMARKOVIAN_FULL: Scenario =
    Scenario { name: "nonmarkovian_8", beats: 8.0, window: WindowPreset::NonMarkovian };

pub const ALL: [Scenario; 4] = [MARKOVIAN_FULL, MARKOVIAN_HALF, NONMARKOVIAN_HALF, NONMARKOVIAN_FULL];

impl Scenario {
    /// `base` with the separation set to `beats * lambda_beat`, rounded onto
    /// the `lambda21` lattice.
    pub fn params(&self, base: &SystemParams) -> SystemParams {
        let d = self.beats * derive_scales(base).lambda_beat;
        base.with_distance(snap_to_lambda21(d, base))
    }

    pub fn by_name(name: &str) -> Option<Scenario> {
        ALL.into_iter().find(|s| s.name == name)
    }
}
