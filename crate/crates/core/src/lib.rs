//! Collective quantum beats of two V-type emitters coupled through a
//! one-dimensional waveguide.
//!
//! Two independent routes to the amplitudes are provided: a residue
//! expansion over the complex eigenfrequencies ([`spectral`],
//! [`dynamics`]) and direct integration of the retarded equations of motion
//! ([`dde`]). [`field`] turns either into detector intensities.

pub mod dde;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod io;
pub mod metrics;
pub mod params;
pub mod scenarios;
pub mod single_atom;
pub mod spectral;

pub use dde::{convergence_study, dde_integrate, ConvergenceReport, Coupling, DdeConfig, HistoryInterp};
pub use dynamics::{
    amplitudes_from_modes, closed_form_coincident, compose_general_state, single_atom_trace, time_grid, AmplitudeTrace,
    Provenance, DEFAULT_DT,
};
pub use error::{Error, Result};
pub use field::{
    detector_pair, energy_budget, intensity_at_detector, intensity_coincident_closed_form, intensity_lightcone,
    DetectorPair, EnergyBudget, IntensityTrace, IntensityUnit,
};
pub use params::{
    canonical_paper_params, derive_scales, resolve_distance, DerivedScales, DistanceUnit, InitialState, SystemParams,
};
pub use spectral::{
    count_poles, find_poles, residues, solve_sector, ModeExpansion, SearchWindow, SymmetrySector, WindowPreset,
};
