//! Coherent states of generalized Heisenberg algebras for one-dimensional
//! power-law potentials.
//!
//! A generalized Heisenberg algebra (GHA) is generated by a Hamiltonian `H`
//! and ladder operators `A`, `A†` obeying
//!
//! ```text
//! H A† = A† f(H),      A H = f(H) A,      [A, A†] = f(H) - H,
//! ```
//!
//! where the *characteristic function* `f` maps each energy level to the
//! next: `E_{n+1} = f(E_n)`. For a particle in the power-law potential
//! `V(x) = V₀ |x/a|^k` the WKB spectrum is `E_n ∝ (n + γ/4)^{2k/(k+2)}`
//! (γ counts turning points; γ = 4 for smooth walls), which closes the
//! algebra with `f(x) = (x^{1/p} + 1)^p`, `p = 2k/(k+2)`, in units of the
//! effective level scale. The harmonic oscillator is `k = 2` (`f(x) = x+1`)
//! and the infinite square well is the `k → ∞` limit (`f(x) = (√x + 1)²`).
//!
//! On top of the algebra this crate builds the associated coherent states
//! `A|z⟩ = z|z⟩`, their photon statistics (mean occupation, variance, Mandel
//! Q), and numerical checks of the resolution of unity via the Stieltjes
//! moment problem for the candidate measures.
//!
//! Modules:
//!
//! - [`special`]: log-gamma, modified Bessel I/K, log-domain series
//!   summation, Gauss rules and adaptive quadrature — the numerical kernels
//!   everything else is built on.
//! - [`powerlaw`]: the power-law spectrum, its characteristic function and
//!   the factorial-like products `g(n, k)`.
//! - [`algebra`]: finite lowest-weight representations, ladder operators and
//!   residual checks of the defining relations.
//! - [`coherent`]: coherent-state construction, overlaps, photon statistics
//!   and Mandel-Q sweeps.
//! - [`resolution`]: weight-function candidates for the resolution of unity
//!   and quadrature verification of their moment sequences.

pub mod algebra;
pub mod coherent;
pub mod error;
pub mod powerlaw;
pub mod resolution;
pub mod special;

pub use error::{GhaError, Result};
