//! Generalized Heisenberg algebra: characteristic functions, truncated
//! lowest-weight representations, and ladder-operator action on Fock vectors.
//!
//! A representation is fixed by the ground energy `E₀` and the
//! characteristic function `f`: energies iterate as `E_{n+1} = f(E_n)` and
//! the ladder matrix elements are `N_n = √(E_{n+1} - E₀)`, so that
//!
//! ```text
//! A†|n⟩ = N_n |n+1⟩,    A|n⟩ = N_{n-1} |n-1⟩,    H|n⟩ = E_n |n⟩.
//! ```
//!
//! Everything is kept finite-dimensional (levels 0..=n_max). The creation
//! operator refuses to push amplitude past the top level instead of silently
//! dropping it; residual checks ([`GhaRep::commutator_residual`],
//! [`GhaRep::casimir_residual`]) quantify how well the defining relations
//! hold at machine precision.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{GhaError, Result};

/// The characteristic function `f` of a GHA, wrapped with a descriptor so
/// reports can say which algebra they refer to.
#[derive(Clone)]
pub struct CharacteristicFn {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    descriptor: String,
}

impl fmt::Debug for CharacteristicFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharacteristicFn")
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

impl CharacteristicFn {
    /// Wraps an arbitrary map `x ↦ f(x)`.
    pub fn new(descriptor: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            descriptor: descriptor.into(),
        }
    }

    /// Harmonic oscillator: `f(x) = x + 1` (unit level spacing).
    pub fn harmonic() -> Self {
        Self::new("f(x) = x + 1 (harmonic)", |x| x + 1.0)
    }

    /// Linear deformation `f(x) = q x + 1`, the `su_q(1,1)`-type example.
    pub fn linear(q: f64) -> Self {
        Self::new(format!("f(x) = {q} x + 1 (linear)"), move |x| q * x + 1.0)
    }

    /// Evaluates `f(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// Human-readable description of the function.
    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }
}

/// Iterates `E_{n+1} = f(E_n)` from `e0`, validating that each step is
/// finite and strictly increasing. Returns `E_0 ..= E_{n_max}`
/// (`n_max + 1` values).
pub fn iterate_spectrum(f: &CharacteristicFn, e0: f64, n_max: usize) -> Result<Vec<f64>> {
    if !e0.is_finite() {
        return Err(GhaError::NonFinite { step: 0 });
    }
    let mut energies = Vec::with_capacity(n_max + 1);
    energies.push(e0);
    for step in 0..n_max {
        let current = energies[step];
        let next = f.eval(current);
        if !next.is_finite() {
            return Err(GhaError::NonFinite { step: step + 1 });
        }
        if next <= current {
            return Err(GhaError::NonMonotonicLadder {
                step,
                energy: current,
                next,
            });
        }
        energies.push(next);
    }
    Ok(energies)
}

/// Ladder coefficients `N_m = √(E_{m+1} - E_0)` for `m = 0 .. len-1`.
///
/// `E_{m+1} >= E_0` is required (lowest-weight condition); the coefficients
/// of a strictly increasing ladder are strictly positive.
pub fn ladder_coefficients(energies: &[f64]) -> Result<Vec<f64>> {
    let Some(&e0) = energies.first() else {
        return Ok(Vec::new());
    };
    let mut ladder = Vec::with_capacity(energies.len().saturating_sub(1));
    for &e in &energies[1..] {
        let gap = e - e0;
        if gap < 0.0 {
            return Err(GhaError::NegativeSquare {
                energy: e,
                ground: e0,
            });
        }
        ladder.push(gap.sqrt());
    }
    Ok(ladder)
}

/// A vector in the truncated Fock space spanned by `|0⟩ ..= |n_max⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    coeffs: Vec<Complex64>,
}

impl FockVector {
    /// Builds a vector from amplitudes `⟨n|v⟩`; all must be finite.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(GhaError::Domain("FockVector cannot be empty".into()));
        }
        if let Some(idx) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(GhaError::Domain(format!(
                "non-finite amplitude at level {idx}"
            )));
        }
        Ok(Self { coeffs })
    }

    /// Basis state `|n⟩` in a space of dimension `dim`.
    pub fn basis(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(GhaError::IndexOutOfRange {
                index: n,
                max: dim.saturating_sub(1),
            });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Ok(Self { coeffs })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// ℓ² norm.
    pub fn norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ⟨self|other⟩ (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(GhaError::DimensionMismatch {
                vector: other.dim(),
                representation: self.dim(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// self - scale · other.
    pub fn sub_scaled(&self, other: &Self, scale: Complex64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(GhaError::DimensionMismatch {
                vector: other.dim(),
                representation: self.dim(),
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - scale * b)
            .collect();
        Ok(Self { coeffs })
    }
}

/// A truncated lowest-weight representation of a GHA.
#[derive(Clone, Debug)]
pub struct GhaRep {
    energies: Vec<f64>,
    ladder: Vec<f64>,
    char_fn: CharacteristicFn,
}

impl GhaRep {
    /// Builds the representation by iterating the characteristic function
    /// from the ground energy.
    pub fn from_characteristic(char_fn: CharacteristicFn, e0: f64, n_max: usize) -> Result<Self> {
        let energies = iterate_spectrum(&char_fn, e0, n_max)?;
        Self::from_energies(energies, char_fn)
    }

    /// Builds the representation from an explicit energy list (e.g. a closed
    /// form) together with the characteristic function it satisfies. The
    /// list must be strictly increasing.
    pub fn from_energies(energies: Vec<f64>, char_fn: CharacteristicFn) -> Result<Self> {
        if energies.is_empty() {
            return Err(GhaError::Domain("energy list cannot be empty".into()));
        }
        for (i, pair) in energies.windows(2).enumerate() {
            if !pair[1].is_finite() {
                return Err(GhaError::NonFinite { step: i + 1 });
            }
            if pair[1] <= pair[0] {
                return Err(GhaError::NonMonotonicLadder {
                    step: i,
                    energy: pair[0],
                    next: pair[1],
                });
            }
        }
        let ladder = ladder_coefficients(&energies)?;
        Ok(Self {
            energies,
            ladder,
            char_fn,
        })
    }

    /// Highest level index `n_max`.
    pub fn n_max(&self) -> usize {
        self.energies.len() - 1
    }

    /// Space dimension `n_max + 1`.
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Energies `E_0 ..= E_{n_max}`.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Ladder coefficients `N_0 .. N_{n_max - 1}`.
    pub fn ladder(&self) -> &[f64] {
        &self.ladder
    }

    pub fn char_fn(&self) -> &CharacteristicFn {
        &self.char_fn
    }

    /// The Casimir value `C = A†A - H = -E_0` for a lowest-weight
    /// representation.
    pub fn casimir(&self) -> f64 {
        -self.energies[0]
    }

    fn check_dim(&self, v: &FockVector) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(GhaError::DimensionMismatch {
                vector: v.dim(),
                representation: self.dim(),
            });
        }
        Ok(())
    }

    /// `A v`: lowering, `(A v)_n = N_n v_{n+1}`.
    pub fn apply_annihilation(&self, v: &FockVector) -> Result<FockVector> {
        self.check_dim(v)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); v.dim()];
        for n in 0..self.n_max() {
            coeffs[n] = self.ladder[n] * v.coeffs[n + 1];
        }
        FockVector::new(coeffs)
    }

    /// `A† v`: raising, `(A† v)_n = N_{n-1} v_{n-1}`.
    ///
    /// Fails with [`GhaError::TruncationOverflow`] if the top level carries
    /// amplitude, because that amplitude would leave the truncated space.
    pub fn apply_creation(&self, v: &FockVector) -> Result<FockVector> {
        self.check_dim(v)?;
        let top = v.coeffs[self.n_max()];
        if top.norm_sqr() != 0.0 {
            return Err(GhaError::TruncationOverflow { top: self.n_max() });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); v.dim()];
        for n in 1..v.dim() {
            coeffs[n] = self.ladder[n - 1] * v.coeffs[n - 1];
        }
        FockVector::new(coeffs)
    }

    /// `H v`: `(H v)_n = E_n v_n`.
    pub fn apply_hamiltonian(&self, v: &FockVector) -> Result<FockVector> {
        self.check_dim(v)?;
        let coeffs = v
            .coeffs
            .iter()
            .zip(&self.energies)
            .map(|(c, &e)| e * c)
            .collect();
        FockVector::new(coeffs)
    }

    /// Relative residual of the commutation relation on `|n⟩`:
    ///
    /// ```text
    /// ‖([A, A†] - (f(H) - H))|n⟩‖ / |f(E_n) - E_n|
    /// ```
    ///
    /// computed by applying the operators, not from the closed form, so it
    /// genuinely exercises the ladder construction. Requires `n <= n_max - 1`
    /// (one level of creation headroom).
    pub fn commutator_residual(&self, n: usize) -> Result<f64> {
        if n + 1 > self.n_max() {
            return Err(GhaError::IndexOutOfRange {
                index: n,
                max: self.n_max().saturating_sub(1),
            });
        }
        let basis = FockVector::basis(n, self.dim())?;
        // A A† |n⟩.
        let up_down = self.apply_annihilation(&self.apply_creation(&basis)?)?;
        // A† A |n⟩; A|0⟩ = 0, and creation on the zero vector is safe.
        let down_up = self.apply_creation(&self.apply_annihilation(&basis)?)?;
        let spacing = self.char_fn.eval(self.energies[n]) - self.energies[n];
        let expected = Complex64::new(spacing, 0.0);
        let residual = up_down
            .sub_scaled(&down_up, Complex64::new(1.0, 0.0))?
            .sub_scaled(&basis, expected)?
            .norm();
        Ok(residual / spacing.abs().max(f64::MIN_POSITIVE))
    }

    /// Deviation of the Casimir operator from `-E_0` on `|n⟩`, evaluated
    /// both ways:
    ///
    /// ```text
    /// s₁ = ⟨n|A†A - H|n⟩,    s₂ = ⟨n|AA† - f(H)|n⟩,
    /// ```
    ///
    /// returning `max(|s₁ - s₂|, |s₁ - C|, |s₂ - C|)` with `C = -E_0`.
    /// Requires `n <= n_max - 1`.
    pub fn casimir_residual(&self, n: usize) -> Result<f64> {
        if n + 1 > self.n_max() {
            return Err(GhaError::IndexOutOfRange {
                index: n,
                max: self.n_max().saturating_sub(1),
            });
        }
        let basis = FockVector::basis(n, self.dim())?;
        let down_up = self.apply_creation(&self.apply_annihilation(&basis)?)?;
        let up_down = self.apply_annihilation(&self.apply_creation(&basis)?)?;
        let s1 = basis.inner(&down_up)?.re - self.energies[n];
        let s2 = basis.inner(&up_down)?.re - self.char_fn.eval(self.energies[n]);
        let c = self.casimir();
        Ok((s1 - s2)
            .abs()
            .max((s1 - c).abs())
            .max((s2 - c).abs()))
    }
}
