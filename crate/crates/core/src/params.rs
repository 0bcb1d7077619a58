//! Physical parameters, derived length scales and initial states.
//!
//! Units are canonical throughout: rates and frequencies in units of the
//! level-2 decay rate `gamma22`, lengths in units of `velocity / gamma22`,
//! and `velocity = 1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::SymmetrySector;

const TAU: f64 = 2.0 * PI;

/// Rates, frequencies and geometry of the two-emitter system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub gamma22: f64,
    pub gamma33: f64,
    /// Cross-damping rate coupling level 3 into the level-2 equation.
    pub gamma23: f64,
    /// Cross-damping rate coupling level 2 into the level-3 equation.
    pub gamma32: f64,
    /// Splitting between the two excited levels. Negative only after
    /// [`SystemParams::level3_substitution`].
    pub omega23: f64,
    pub omega21: f64,
    pub distance: f64,
    pub velocity: f64,
    /// Replaces `omega21 * distance / velocity` as the level-2 propagation
    /// phase when set. Used to pin the emitters to a lattice of `lambda21`
    /// without changing the retardation time.
    pub phase2_override: Option<f64>,
}

impl SystemParams {
    /// Reference parameters with parallel dipoles and zero separation.
    pub fn canonical() -> Self {
        let gamma22: f64 = 1.0;
        let gamma33 = 1.0;
        let cross = (gamma22 * gamma33).sqrt();
        Self {
            gamma22,
            gamma33,
            gamma23: cross,
            gamma32: cross,
            omega23: 50.0,
            omega21: 1.0e4,
            distance: 0.0,
            velocity: 1.0,
            phase2_override: None,
        }
    }

    pub fn with_distance(mut self, distance: f64) -> Self {
        self.distance = distance;
        self
    }

    /// Treat the separation as an integer multiple of `lambda21`: the level-2
    /// propagation phase becomes exactly zero while the delay `d/v` is kept.
    pub fn with_lattice_phase(mut self) -> Self {
        self.phase2_override = Some(0.0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma22", self.gamma22),
            ("gamma33", self.gamma33),
            ("gamma23", self.gamma23),
            ("gamma32", self.gamma32),
            ("omega21", self.omega21),
            ("velocity", self.velocity),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.distance.is_finite() && self.distance >= 0.0) {
            return Err(Error::InvalidParams(format!("distance must be non-negative, got {}", self.distance)));
        }
        if !self.omega23.is_finite() || self.omega23 == 0.0 {
            return Err(Error::InvalidParams("omega23 must be finite and nonzero".into()));
        }
        // both excited levels above the ground state
        if self.omega21 - self.omega23 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega21 ({}) must exceed omega23 ({})",
                self.omega21, self.omega23
            )));
        }
        let cross = self.gamma23 * self.gamma32;
        let direct = self.gamma22 * self.gamma33;
        if cross > direct * (1.0 + 1e-12) {
            return Err(Error::InvalidParams(format!(
                "gamma23 * gamma32 = {cross} exceeds gamma22 * gamma33 = {direct}"
            )));
        }
        if let Some(p) = self.phase2_override {
            if !p.is_finite() {
                return Err(Error::InvalidParams("phase override must be finite".into()));
            }
        }
        Ok(())
    }

    /// Light transit time between the emitters.
    pub fn delay(&self) -> f64 {
        self.distance / self.velocity
    }

    pub fn omega31(&self) -> f64 {
        self.omega21 - self.omega23
    }

    /// Propagation phase of the level-2 transition across the separation.
    pub fn phase2(&self) -> f64 {
        self.phase2_override.unwrap_or(self.omega21 * self.delay())
    }

    /// Propagation phase of the level-3 transition, `phase2 - omega23 d / v`.
    pub fn phase3(&self) -> f64 {
        self.phase2() - self.omega23 * self.delay()
    }

    /// Waveguide coupling of level 2, normalized so that `g^2 = gamma22`.
    pub fn g2(&self) -> f64 {
        self.gamma22.sqrt()
    }

    pub fn g3(&self) -> f64 {
        self.gamma33.sqrt()
    }

    /// Swap the roles of the two excited levels so that an initial level-3
    /// excitation can reuse the level-2 machinery.
    ///
    /// Besides `omega23 -> -omega23`, `gamma22 <-> gamma33` and
    /// `gamma23 <-> gamma32`, the transition frequency `omega21` becomes
    /// `omega31`, which keeps every propagation phase attached to the right
    /// transition. The map is an involution.
    pub fn level3_substitution(&self) -> Self {
        Self {
            gamma22: self.gamma33,
            gamma33: self.gamma22,
            gamma23: self.gamma32,
            gamma32: self.gamma23,
            omega23: -self.omega23,
            omega21: self.omega31(),
            distance: self.distance,
            velocity: self.velocity,
            phase2_override: self.phase2_override.map(|p| p - self.omega23 * self.delay()),
        }
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::canonical()
    }
}

/// Reference parameters (`gamma33 = 1`, `omega23 = 50`, `omega21 = 1e4`,
/// `v = 1`) with `gamma23 = gamma32 = sqrt(gamma22 gamma33)`.
pub fn canonical_paper_params() -> SystemParams {
    SystemParams::canonical()
}

/// Length and phase scales derived from a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    pub lambda_beat: f64,
    pub lambda21: f64,
    pub coherence_length: f64,
    /// Raw `omega21 d / v`, not reduced.
    pub phi2: f64,
    /// Raw `omega31 d / v`, not reduced.
    pub phi3: f64,
}

impl DerivedScales {
    /// Phases reduced to `(-pi, pi]`.
    pub fn reduced_phases(&self) -> (f64, f64) {
        (reduce_phase(self.phi2), reduce_phase(self.phi3))
    }
}

pub fn derive_scales(params: &SystemParams) -> DerivedScales {
    let v = params.velocity;
    let delay = params.delay();
    DerivedScales {
        lambda_beat: TAU * v / params.omega23.abs(),
        lambda21: TAU * v / params.omega21,
        coherence_length: v / params.gamma22,
        phi2: params.omega21 * delay,
        phi3: params.omega21 * delay - params.omega23 * delay,
    }
}

/// Reduce an angle to `(-pi, pi]`.
pub fn reduce_phase(phase: f64) -> f64 {
    let r = phase - TAU * (phase / TAU).round();
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Units in which a separation can be given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceUnit {
    LambdaBeat,
    Lambda21,
    /// `v / gamma22`
    Coherence,
}

impl DistanceUnit {
    pub fn length(self, params: &SystemParams) -> f64 {
        let scales = derive_scales(params);
        match self {
            DistanceUnit::LambdaBeat => scales.lambda_beat,
            DistanceUnit::Lambda21 => scales.lambda21,
            DistanceUnit::Coherence => scales.coherence_length,
        }
    }
}

impl std::str::FromStr for DistanceUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beat" | "lambda_beat" => Ok(DistanceUnit::LambdaBeat),
            "lam21" | "lambda21" => Ok(DistanceUnit::Lambda21),
            "coh" | "coherence" => Ok(DistanceUnit::Coherence),
            other => Err(Error::InvalidParams(format!("unknown distance unit '{other}'"))),
        }
    }
}

/// Separation `value * unit`, optionally rounded to the nearest integer
/// multiple of `lambda21`.
pub fn resolve_distance(value: f64, unit: DistanceUnit, params: &SystemParams, snap: bool) -> f64 {
    let d = value * unit.length(params);
    if snap {
        snap_to_lambda21(d, params)
    } else {
        d
    }
}

pub fn snap_to_lambda21(distance: f64, params: &SystemParams) -> f64 {
    let lambda21 = derive_scales(params).lambda21;
    (distance / lambda21).round() * lambda21
}

/// Single-excitation initial state, amplitudes ordered `(K2A, K2B, K3A, K3B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    amplitudes: [Complex64; 4],
}

impl InitialState {
    /// `cos(theta)|2>_A|1>_B + e^{i phi} sin(theta)|1>_A|2>_B`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self {
            amplitudes: [
                Complex64::new(theta.cos(), 0.0),
                Complex64::from_polar(theta.sin(), phi),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        }
    }

    pub fn symmetric() -> Self {
        Self::sector(SymmetrySector::Symmetric)
    }

    pub fn antisymmetric() -> Self {
        Self::sector(SymmetrySector::Antisymmetric)
    }

    pub fn sector(sector: SymmetrySector) -> Self {
        let k = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self { amplitudes: [k, k * sector.sign(), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)] }
    }

    /// Arbitrary unit-norm amplitudes `(K2A, K2B, K3A, K3B)`.
    pub fn general(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("amplitudes have squared norm {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        self.amplitudes
    }

    pub fn k2a(&self) -> Complex64 {
        self.amplitudes[0]
    }

    pub fn k2b(&self) -> Complex64 {
        self.amplitudes[1]
    }

    pub fn k3a(&self) -> Complex64 {
        self.amplitudes[2]
    }

    pub fn k3b(&self) -> Complex64 {
        self.amplitudes[3]
    }

    pub fn is_level2_only(&self) -> bool {
        self.k3a() == Complex64::new(0.0, 0.0) && self.k3b() == Complex64::new(0.0, 0.0)
    }

    /// Symmetric/antisymmetric weights `(K2A +- K2B) / sqrt 2`.
    pub fn sector_weights(&self) -> (Complex64, Complex64) {
        ((self.k2a() + self.k2b()) * FRAC_1_SQRT_2, (self.k2a() - self.k2b()) * FRAC_1_SQRT_2)
    }
}
