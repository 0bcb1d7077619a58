//! Complex eigenfrequencies of the coupled emitters and the residue
//! expansion built from them.

mod contour;
mod poles;
mod propagator;
mod residues;

pub use contour::{log_derivative_moments, ContourMoments, QuadratureOptions, Rect};
pub use poles::{count_poles, count_poles_in, find_poles, newton_refine, SearchWindow, WindowPreset, TOL_RESIDUAL};
pub use propagator::{coincident_poles, inverse_propagator, inverse_propagator_deriv, SymmetrySector};
pub use residues::{residues, solve_sector, Mode, ModeExpansion, Residue, TOL_DERIV};
