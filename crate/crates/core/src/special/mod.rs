//! Special functions and numerical kernels: log-gamma, modified Bessel
//! functions, log-domain series summation, and quadrature.
//!
//! Everything here is self-contained (no external special-function crates)
//! and validated against high-precision reference values and cross-checking
//! identities (recurrences, the Wronskian, quadrature exactness degrees).

mod bessel;
mod gamma;
mod quad;
mod series;

pub use bessel::{bessel_i, bessel_k};
pub use gamma::{log_factorial, log_gamma};
pub use quad::{integrate_adaptive, integrate_semi_infinite, QuadResult, QuadratureRule};
pub use series::{log_sum_exp, sum_log_series, LogTerm, SeriesAccumulator, CONSECUTIVE_SMALL};
