//! Crate-wide error type.
//!
//! Every fallible operation in this crate reports through [`GhaError`]. The
//! variants are deliberately fine-grained: callers (the CLI in particular)
//! map convergence failures and domain/configuration errors onto different
//! process exit codes, so the distinction must survive the trip up the stack.

use thiserror::Error;

/// Errors produced by the algebra, spectrum, state and quadrature layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GhaError {
    /// The characteristic function failed to produce a strictly increasing
    /// energy ladder: `f(E_step) <= E_step`.
    #[error("ladder not strictly increasing at step {step}: f({energy}) = {next}")]
    NonMonotonicLadder { step: usize, energy: f64, next: f64 },

    /// A spectrum iteration produced a NaN or infinite energy.
    #[error("non-finite energy at iteration step {step}")]
    NonFinite { step: usize },

    /// A ladder coefficient would be the square root of a negative number
    /// (`E_{m+1} < E_0`), which cannot happen for a valid lowest-weight
    /// representation.
    #[error("cannot form ladder coefficient: E = {energy} lies below the ground energy {ground}")]
    NegativeSquare { energy: f64, ground: f64 },

    /// A Fock-space vector does not fit the representation it was used with.
    #[error("vector dimension {vector} does not match representation dimension {representation}")]
    DimensionMismatch { vector: usize, representation: usize },

    /// Applying the creation operator would push weight past the truncated
    /// top level of the representation.
    #[error("creation operator overflows the truncated representation at level {top}")]
    TruncationOverflow { top: usize },

    /// A level index lies outside the valid range for the operation.
    #[error("index {index} out of range (maximum {max})")]
    IndexOutOfRange { index: usize, max: usize },

    /// A series did not meet its relative tolerance within the term cap.
    #[error("series tail not converged after {terms} terms (relative tail ~ {tail:.3e})")]
    TailNotConverged { terms: usize, tail: f64 },

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A physical-units computation was requested without the required
    /// parameters (well depth, half-width, mass).
    #[error("missing physical parameters: {0}")]
    MissingPhysicalParams(&'static str),

    /// The closed-form characteristic function only exists in dimensionless
    /// units; physical-omega mode must evaluate spectra directly.
    #[error("characteristic function has no closed form in physical units; use dimensionless mode")]
    PhysicalModeUnsupported,

    /// Level-spacing classification found mixed increasing/decreasing gaps.
    #[error("spacing classification inconclusive: gaps are not monotone or uniform")]
    Inconclusive,

    /// Two objects built from different power-law specifications were combined.
    #[error("operands were built from different power-law specifications")]
    SpecMismatch,

    /// Mandel Q is undefined for the vacuum (`|z| = 0` has zero mean photon
    /// number).
    #[error("Mandel Q is undefined at the vacuum |z| = 0")]
    VacuumUndefined,

    /// A computation failed to reach its error target; the message names
    /// the failing stage (quadrature segment, sweep grid point, ...).
    #[error("did not converge: {0}")]
    NoConvergence(String),

    /// A resolution-of-unity moment integral failed.
    #[error("quadrature failure while computing moment {moment}: {reason}")]
    QuadratureFailure { moment: usize, reason: String },

    /// A measure candidate took a non-positive value where positivity is
    /// required.
    #[error("weight function is non-positive at x = {x}: value {value}")]
    NonPositiveWeight { x: f64, value: f64 },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, GhaError>;
