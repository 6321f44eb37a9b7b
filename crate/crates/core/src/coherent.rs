//! Coherent states `A|z⟩ = z|z⟩` of the power-law GHA and their photon
//! statistics.
//!
//! In the Fock basis the states are
//!
//! ```text
//! |z⟩ = N(|z|², k) Σ_n  z^n / √g(n, k)  |n⟩,
//! N(x, k) = [Σ_n x^n / g(n, k)]^{-1/2},
//! ```
//!
//! with the factorial-like `g(n, k)` from [`crate::powerlaw`]. For the
//! harmonic member (`k = 2`, `g = n!`) these are the Glauber states with
//! `N = e^{-x/2}` and Poissonian photon statistics; for the square-well
//! limit (`k → ∞`, `g = n!(n+2)!/2`) the normalization closes to
//! `N² = x / (2 I₂(2√x))`.
//!
//! All series run in the log domain ([`crate::special::sum_log_series`]):
//! for sub-linear spectra (`k < 2`) the peak term index grows like
//! `x^{(k+2)/(2k)}` — over 10⁵ at `k = 1/2`, `|z| = 10` — and the partial
//! sums overflow `f64` long before that. Occupation moments come from a
//! single shared pass (`S_j = Σ n^j x^n / g(n)`, j = 0, 1, 2), truncated
//! when the *second*-moment terms (the slowest to decay) drop below
//! tolerance. The Mandel parameter is
//!
//! ```text
//! Q = (⟨(ΔN)²⟩ - ⟨N⟩) / ⟨N⟩,
//! ```
//!
//! negative for sub-Poissonian (antibunched) statistics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{FockVector, GhaRep};
use crate::error::{GhaError, Result};
use crate::powerlaw::PowerLawSpec;
use crate::special::{log_sum_exp, LogTerm, SeriesAccumulator, CONSECUTIVE_SMALL};

/// Truncation controls shared by the series-driven operations.
#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    /// Relative tolerance: series stop once terms contribute below this
    /// level (amplitude level for state construction, second-moment level
    /// for statistics).
    pub rel_tol: f64,
    /// Hard cap on the number of series terms. Slowly converging corners
    /// (small k at large |z|) legitimately need more than the default; the
    /// cap exists so misconfigured parameters fail loudly instead of
    /// spinning.
    pub max_terms: usize,
}

pub const DEFAULT_REL_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_TERMS: usize = 100_000;

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

impl SeriesOptions {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(GhaError::Domain(format!(
                "series rel_tol must be in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.max_terms < 8 {
            return Err(GhaError::Domain(format!(
                "max_terms must be at least 8, got {}",
                self.max_terms
            )));
        }
        Ok(())
    }
}

/// Occupation-number moments of `|z⟩` at `x = |z|²`, from one shared pass
/// over the series `S_j = Σ n^j x^n / g(n, k)`.
#[derive(Clone, Copy, Debug)]
pub struct OccupationMoments {
    /// ln S₀ (the log of the squared inverse normalization).
    pub log_s0: f64,
    /// ⟨N⟩ = S₁/S₀.
    pub mean: f64,
    /// ⟨N²⟩ = S₂/S₀.
    pub second: f64,
    /// Terms consumed (highest occupation index used is `terms - 1`).
    pub terms: usize,
    /// Relative tail estimate of the slowest series at truncation.
    pub tail_bound: f64,
}

impl OccupationMoments {
    /// ⟨(ΔN)²⟩ = ⟨N²⟩ - ⟨N⟩².
    pub fn variance(&self) -> f64 {
        self.second - self.mean * self.mean
    }
}

/// Computes [`OccupationMoments`] at `x = |z|²` for the given spectrum.
pub fn occupation_moments(
    spec: &PowerLawSpec,
    z_sq: f64,
    opts: &SeriesOptions,
) -> Result<OccupationMoments> {
    opts.validate()?;
    if !(z_sq >= 0.0) {
        return Err(GhaError::Domain(format!(
            "|z|² must be non-negative, got {z_sq}"
        )));
    }
    if z_sq == 0.0 {
        // The vacuum: S₀ = 1 exactly, all occupation moments vanish.
        return Ok(OccupationMoments {
            log_s0: 0.0,
            mean: 0.0,
            second: 0.0,
            terms: 1,
            tail_bound: 0.0,
        });
    }
    let log_x = z_sq.ln();
    let mut s0 = SeriesAccumulator::new();
    let mut s1 = SeriesAccumulator::new();
    let mut s2 = SeriesAccumulator::new();
    s0.push(LogTerm::positive(0.0)); // n = 0 term: x⁰/g(0) = 1.
    let mut log_term = 0.0f64;
    let mut small_streak = 0usize;
    let mut n = 1usize;
    loop {
        log_term += log_x - spec.log_g_increment(n)?;
        let log_n = (n as f64).ln();
        s0.push(LogTerm::positive(log_term));
        s1.push(LogTerm::positive(log_term + log_n));
        s2.push(LogTerm::positive(log_term + 2.0 * log_n));
        // S₂ has the slowest-decaying terms (extra n² weight), so its
        // relative contribution gates the shared truncation.
        if s2.last_rel() < opts.rel_tol {
            small_streak += 1;
            if small_streak >= CONSECUTIVE_SMALL {
                break;
            }
        } else {
            small_streak = 0;
        }
        n += 1;
        if n >= opts.max_terms {
            return Err(GhaError::TailNotConverged {
                terms: n,
                tail: s2.tail_bound(),
            });
        }
    }
    let log_s0 = s0.log_abs();
    Ok(OccupationMoments {
        log_s0,
        mean: (s1.log_abs() - log_s0).exp(),
        second: (s2.log_abs() - log_s0).exp(),
        terms: n + 1,
        tail_bound: s2.tail_bound(),
    })
}

/// The normalization constant `N(x, k) = [Σ x^n/g(n,k)]^{-1/2}` at
/// `x = z_sq`. `N(0, k) = 1` exactly.
///
/// For extreme parameters `N` can underflow `f64` even though the state is
/// perfectly well defined; [`log_normalization`] stays in log form.
pub fn normalization(spec: &PowerLawSpec, z_sq: f64, opts: &SeriesOptions) -> Result<f64> {
    Ok(log_normalization(spec, z_sq, opts)?.exp())
}

/// ln N(x, k) = -½ ln S₀.
pub fn log_normalization(spec: &PowerLawSpec, z_sq: f64, opts: &SeriesOptions) -> Result<f64> {
    Ok(-0.5 * occupation_moments(spec, z_sq, opts)?.log_s0)
}

/// ⟨N^order⟩ for order 1 or 2.
pub fn photon_moment(
    spec: &PowerLawSpec,
    z_sq: f64,
    order: u32,
    opts: &SeriesOptions,
) -> Result<f64> {
    let m = occupation_moments(spec, z_sq, opts)?;
    match order {
        1 => Ok(m.mean),
        2 => Ok(m.second),
        _ => Err(GhaError::Domain(format!(
            "photon_moment supports orders 1 and 2, got {order}"
        ))),
    }
}

/// Mandel Q at `x = |z|²` (> 0; the vacuum has no meaningful Q).
pub fn mandel_q(spec: &PowerLawSpec, z_sq: f64, opts: &SeriesOptions) -> Result<f64> {
    if z_sq == 0.0 {
        return Err(GhaError::VacuumUndefined);
    }
    let m = occupation_moments(spec, z_sq, opts)?;
    Ok((m.variance() - m.mean) / m.mean)
}

/// A coherent state with its Fock expansion, kept in log-magnitude form.
///
/// Amplitudes are `c_n = exp(log_coeffs[n]) · e^{i n arg z}`; they satisfy
/// `Σ |c_n|² = 1` to rounding and `c_0 = N(|z|², k) > 0`.
#[derive(Clone, Debug)]
pub struct CoherentState {
    spec: PowerLawSpec,
    z: Complex64,
    /// ln |c_n| for n = 0 ..= n_max.
    log_coeffs: Vec<f64>,
    /// ln N = -½ ln S₀.
    log_norm_const: f64,
    /// Upper estimate of the ℓ² weight omitted by the truncation, as a
    /// relative amplitude.
    tail_bound: f64,
}

/// Builds the normalized truncated expansion of `|z⟩`.
///
/// Truncation is amplitude-level: terms stop once the relative amplitude
/// `|c_n|` would fall below `opts.rel_tol` for three consecutive levels past
/// the series peak. In exact arithmetic the eigenvalue defect of the result
/// is then exactly `|c_{n_max}|` (annihilation maps the truncated state onto
/// itself minus the top level), so `eigen_residual <= 10 × tail_bound` up to
/// a machine-precision floor: the ladder of the representation and the
/// log-domain coefficient chain round differently, which adds noise of order
/// `n_max · ε` to the residual.
pub fn build_state(spec: &PowerLawSpec, z: Complex64, opts: &SeriesOptions) -> Result<CoherentState> {
    opts.validate()?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(GhaError::Domain("z must be finite".into()));
    }
    let x = z.norm_sqr();
    if x == 0.0 {
        return Ok(CoherentState {
            spec: *spec,
            z,
            log_coeffs: vec![0.0],
            log_norm_const: 0.0,
            tail_bound: 0.0,
        });
    }
    let log_x = x.ln();
    // log_terms[n] = ln(x^n / g(n)) = 2 ln |⟨n|z⟩ before normalization|.
    let mut log_terms = vec![0.0f64];
    let mut log_term = 0.0f64;
    let mut peak = 0.0f64;
    let mut small_streak = 0usize;
    let log_cut = 2.0 * opts.rel_tol.ln();
    let mut n = 1usize;
    loop {
        log_term += log_x - spec.log_g_increment(n)?;
        log_terms.push(log_term);
        if log_term > peak {
            peak = log_term;
            small_streak = 0;
        } else if log_term - peak < log_cut {
            // Relative amplitude |c_n| <= exp((log_term - peak)/2) < rel_tol,
            // since S₀ >= the peak term.
            small_streak += 1;
            if small_streak >= CONSECUTIVE_SMALL {
                break;
            }
        } else {
            small_streak = 0;
        }
        n += 1;
        if n >= opts.max_terms {
            return Err(GhaError::TailNotConverged {
                terms: n,
                tail: (0.5 * (log_term - peak)).exp(),
            });
        }
    }
    let log_s0 = log_sum_exp(&log_terms);
    let log_coeffs: Vec<f64> = log_terms.iter().map(|&t| 0.5 * (t - log_s0)).collect();
    let last = *log_coeffs.last().expect("at least the n = 0 level");
    let prev = log_coeffs[log_coeffs.len() - 2];
    let amp = last.exp();
    let ratio = (last - prev).exp();
    let tail_bound = if ratio < 0.9 {
        amp / (1.0 - ratio)
    } else {
        amp * 10.0
    };
    Ok(CoherentState {
        spec: *spec,
        z,
        log_coeffs,
        log_norm_const: -0.5 * log_s0,
        tail_bound,
    })
}

impl CoherentState {
    pub fn spec(&self) -> &PowerLawSpec {
        &self.spec
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// Highest occupied level of the truncated expansion.
    pub fn n_max(&self) -> usize {
        self.log_coeffs.len() - 1
    }

    /// ln |c_n| for n = 0 ..= n_max.
    pub fn log_coeffs(&self) -> &[f64] {
        &self.log_coeffs
    }

    /// `N(|z|², k)`; may underflow to 0 for extreme parameters (see
    /// [`Self::log_norm_const`]).
    pub fn norm_const(&self) -> f64 {
        self.log_norm_const.exp()
    }

    /// ln N(|z|², k).
    pub fn log_norm_const(&self) -> f64 {
        self.log_norm_const
    }

    /// Relative ℓ² weight estimate of the truncated tail.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Amplitude `c_n = |c_n| e^{i n arg z}`.
    pub fn coeff(&self, n: usize) -> Result<Complex64> {
        let log_abs = *self
            .log_coeffs
            .get(n)
            .ok_or(GhaError::IndexOutOfRange {
                index: n,
                max: self.n_max(),
            })?;
        let theta = self.z.arg() * n as f64;
        Ok(Complex64::from_polar(log_abs.exp(), theta))
    }

    /// All amplitudes as a dense vector.
    pub fn coeffs(&self) -> Vec<Complex64> {
        (0..=self.n_max())
            .map(|n| self.coeff(n).expect("n <= n_max"))
            .collect()
    }

    /// Occupation probabilities `p_n = |c_n|²`.
    pub fn photon_distribution(&self) -> Vec<f64> {
        self.log_coeffs.iter().map(|&l| (2.0 * l).exp()).collect()
    }

    /// ‖A|ẑ⟩ - z|ẑ⟩‖ / |z| (absolute norm for z = 0), using the ladder of
    /// `rep`, which must cover the state (`rep.n_max() >= self.n_max()`) and
    /// stem from the same spectrum.
    pub fn eigen_residual(&self, rep: &GhaRep) -> Result<f64> {
        if rep.n_max() < self.n_max() {
            return Err(GhaError::DimensionMismatch {
                vector: self.n_max() + 1,
                representation: rep.dim(),
            });
        }
        // Cheap spectral fingerprint instead of trusting the caller.
        for &n in &[0usize, self.n_max()] {
            let expected = self.spec.dimensionless_energy(n);
            let got = rep.energies()[n];
            if (got - expected).abs() > 1e-12 * expected.abs().max(1.0) {
                return Err(GhaError::SpecMismatch);
            }
        }
        let mut padded = self.coeffs();
        padded.resize(rep.dim(), Complex64::new(0.0, 0.0));
        let v = FockVector::new(padded)?;
        let av = rep.apply_annihilation(&v)?;
        let residual = av.sub_scaled(&v, self.z)?.norm();
        let scale = self.z.norm();
        Ok(if scale == 0.0 { residual } else { residual / scale })
    }

    /// ⟨self|other⟩. States must share a spectrum ([`GhaError::SpecMismatch`]
    /// otherwise); by Cauchy–Schwarz the result has modulus ≤ 1 up to
    /// rounding.
    pub fn overlap(&self, other: &CoherentState) -> Result<Complex64> {
        if self.spec != other.spec {
            return Err(GhaError::SpecMismatch);
        }
        let w = self.z.conj() * other.z;
        let r = w.norm();
        if r == 0.0 {
            // ⟨z|0⟩ = N(|z|²) (only the n = 0 term survives) — and N(0) = 1
            // makes this exact for both orders of arguments.
            return Ok(Complex64::new(
                (self.log_norm_const + other.log_norm_const).exp(),
                0.0,
            ));
        }
        let theta = w.arg();
        let log_r = r.ln();
        // Σ w^n / g(n): split into real and imaginary signed series over the
        // common magnitude profile t_n = r^n / g(n); convergence is gated on
        // the magnitude series (the signed partial sums may legitimately
        // cancel towards zero).
        let mut abs_acc = SeriesAccumulator::new();
        let mut re_acc = SeriesAccumulator::new();
        let mut im_acc = SeriesAccumulator::new();
        let mut log_term = 0.0f64;
        let mut small_streak = 0usize;
        let mut n = 0usize;
        loop {
            if n > 0 {
                log_term += log_r - self.spec.log_g_increment(n)?;
            }
            let phase = theta * n as f64;
            let (sin, cos) = phase.sin_cos();
            abs_acc.push(LogTerm::positive(log_term));
            re_acc.push(split_term(cos, log_term));
            im_acc.push(split_term(sin, log_term));
            if abs_acc.last_rel() < 1e-16 {
                small_streak += 1;
                if small_streak >= CONSECUTIVE_SMALL {
                    break;
                }
            } else {
                small_streak = 0;
            }
            n += 1;
            // Overlaps reuse the state truncation budget scaled up: the
            // series peak sits near max(|z|,|z'|)², already reachable for
            // both factors.
            if n >= DEFAULT_MAX_TERMS * 4 {
                return Err(GhaError::TailNotConverged {
                    terms: n,
                    tail: abs_acc.tail_bound(),
                });
            }
        }
        let log_norms = self.log_norm_const + other.log_norm_const;
        let re = re_acc.sign() * (re_acc.log_abs() + log_norms).exp();
        let im = im_acc.sign() * (im_acc.log_abs() + log_norms).exp();
        Ok(Complex64::new(re, im))
    }
}

fn split_term(trig: f64, log_mag: f64) -> LogTerm {
    if trig == 0.0 {
        LogTerm::new(0.0, f64::NEG_INFINITY)
    } else {
        LogTerm::new(trig.signum(), log_mag + trig.abs().ln())
    }
}

/// One grid point of a Mandel-Q sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QSample {
    pub abs_z: f64,
    pub q: f64,
    pub mean_n: f64,
    pub variance: f64,
    pub n_max_used: usize,
    pub tail_bound: f64,
}

/// A Mandel-Q sweep over a |z| grid for one spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct QCurve {
    pub schema_version: u32,
    pub spec: PowerLawSpec,
    pub samples: Vec<QSample>,
}

impl QCurve {
    /// CSV rendering, schema `abs_z,Q,mean_n,variance,n_max_used,tail_bound`.
    /// Floats use shortest round-trip formatting, so output is reproducible
    /// bit-for-bit across runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("abs_z,Q,mean_n,variance,n_max_used,tail_bound\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{:e}\n",
                s.abs_z, s.q, s.mean_n, s.variance, s.n_max_used, s.tail_bound
            ));
        }
        out
    }
}

/// Sweeps Mandel Q over a grid of |z| values (all > 0, finite).
///
/// Grid points evaluate independently (in parallel); the output preserves
/// grid order, so results are deterministic regardless of thread count. A
/// non-convergent point aborts the sweep with an error naming it.
pub fn q_curve(spec: &PowerLawSpec, abs_z_grid: &[f64], opts: &SeriesOptions) -> Result<QCurve> {
    opts.validate()?;
    if abs_z_grid.is_empty() {
        return Err(GhaError::Domain("q_curve needs a non-empty grid".into()));
    }
    for (i, &z) in abs_z_grid.iter().enumerate() {
        if !(z > 0.0 && z.is_finite()) {
            return Err(GhaError::Domain(format!(
                "grid point {i} is {z}; |z| values must be positive and finite \
                 (Mandel Q is undefined at the vacuum)"
            )));
        }
    }
    let samples: Vec<QSample> = abs_z_grid
        .par_iter()
        .map(|&abs_z| -> Result<QSample> {
            let m = occupation_moments(spec, abs_z * abs_z, opts).map_err(|e| match e {
                GhaError::TailNotConverged { terms, tail } => GhaError::NoConvergence(format!(
                    "grid point |z| = {abs_z}: series tail not converged after {terms} terms \
                     (tail ~ {tail:.3e}); raise max_terms"
                )),
                other => other,
            })?;
            let variance = m.variance();
            Ok(QSample {
                abs_z,
                q: (variance - m.mean) / m.mean,
                mean_n: m.mean,
                variance,
                n_max_used: m.terms - 1,
                tail_bound: m.tail_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QCurve {
        schema_version: 1,
        spec: *spec,
        samples,
    })
}
