use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid initial state: {0}")]
    InvalidState(String),

    #[error("invalid search window: {0}")]
    InvalidWindow(String),

    /// A Newton iteration did not settle within the iteration budget.
    #[error("newton iteration from seed {seed} did not converge in {iters} iterations")]
    NonConvergence { seed: Complex64, iters: usize },

    /// Certified root count disagrees with the argument-principle count.
    #[error("pole count mismatch: {certified} certified poles, winding number {winding}")]
    CountMismatch { certified: usize, winding: i64 },

    #[error("contour quadrature failed near {near}: a pole sits on or too close to the boundary")]
    BoundaryPole { near: Complex64 },

    #[error("pole at {s} is not simple (|dG^-1/ds| = {deriv_norm:e})")]
    DegeneratePole { s: Complex64, deriv_norm: f64 },

    #[error("mode expansion is missing residue coefficients")]
    IncompleteExpansion,

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("step {step} too coarse: |omega23| * h = {product} exceeds 0.05")]
    StepTooCoarse { step: f64, product: f64 },

    #[error("population {population} exceeds 1 + 1e-4 at t = {t}")]
    NormViolation { t: f64, population: f64 },

    #[error("amplitude history does not cover retarded time {t}")]
    InsufficientHistory { t: f64 },

    #[error("convergence study needs distinct step sizes")]
    NonDistinctSteps,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
