//! Time integration with complex-valued intermediate steps.
//!
//! A forward-Euler method that is allowed to take its substeps at complex
//! points in time can damp or annihilate modes that a real method of the same
//! cost cannot. This crate implements the machinery around that idea:
//!
//! - [`poly`]: stability polynomials, their absolute-stability regions, and
//!   polynomial root finding;
//! - [`paths`]: complex Euler step paths, their order of accuracy, and the
//!   enumeration of all full-order paths for a given step count;
//! - [`optimize`]: maximizing the stable step size over a spectrum by
//!   choosing free (real or complex) polynomial coefficients;
//! - [`integrate`]: steppers (composed Euler, two-stage, projective forward
//!   Euler) and a fixed-step initial-value-problem driver;
//! - [`models`]: the benchmark problems (Dahlquist, Prothero-Robinson, a
//!   two-scale 3x3 system, and the nonlinear Schroedinger equation);
//! - [`presets`]: named polynomials, paths, and steppers used by the CLI and
//!   the browser demo;
//! - [`experiments`]: the step-size sweep and projective-integration runs;
//! - [`acceptance`]: the self-check suite behind `ctint verify`.

pub mod acceptance;
pub mod experiments;
pub mod integrate;
pub mod models;
pub mod optimize;
pub mod paths;
pub mod poly;
pub mod presets;

pub use num_complex::Complex64;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A constructor or operation received arguments it cannot work with.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A requested magnitude grid would not fit in memory.
    #[error("grid of {cells} cells exceeds the {max}-cell limit")]
    GridTooLarge { cells: u64, max: u64 },
    /// The simultaneous root iteration failed its residual contract.
    #[error("root finding stalled: residual {residual:.3e} exceeds {allowed:.3e}")]
    RootsDidNotConverge { residual: f64, allowed: f64 },
    /// A state component left the guard band during time stepping.
    #[error("divergence at t = {time} (substep {substep})")]
    Divergence { time: f64, substep: usize },
    /// No step size satisfies the stability constraints.
    #[error("no feasible step size: {0}")]
    Infeasible(String),
    /// An eigenvector matrix was too close to singular to trust.
    #[error("near-degenerate eigensystem (condition estimate {cond:.3e})")]
    DegenerateSystem { cond: f64 },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
