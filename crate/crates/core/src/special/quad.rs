//! Numerical integration: Gauss rules computed at runtime and a globally
//! adaptive bisection scheme built on an embedded Gauss–Legendre pair.
//!
//! Nodes and weights are found by Newton iteration on the orthogonal-
//! polynomial recurrences rather than hard-coded tables, so any order is
//! available and the construction is testable against exactness identities
//! (a rule of order n integrates polynomials up to degree 2n-1 exactly).
//!
//! Semi-infinite integrals of exponentially decaying integrands are handled
//! by adaptive integration over geometrically growing panels [0,1], [1,2],
//! [2,4], ... until successive panels stop contributing; the last panel's
//! magnitude doubles as the tail bound.

use std::sync::OnceLock;

use crate::error::{GhaError, Result};

/// Result of an adaptive integration: the value and an error estimate.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error (embedded-pair differences plus tail bound).
    pub abs_error: f64,
    /// Number of integrand evaluations performed.
    pub evaluations: usize,
}

/// A fixed quadrature rule: nodes, weights, and a human-readable descriptor.
///
/// Two families are provided. `gauss_legendre(n)` integrates over [-1, 1]
/// (map with [`QuadratureRule::integrate_interval`]); `gauss_laguerre(n)`
/// integrates ∫₀^∞ e^{-x} f(x) dx, i.e. the e^{-x} factor is part of the
/// weights and `f` is sampled bare.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
    descriptor: String,
}

impl QuadratureRule {
    /// Gauss–Legendre rule of the given order on [-1, 1].
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        if order == 0 || order > 128 {
            return Err(GhaError::Domain(format!(
                "Gauss-Legendre order must be in 1..=128, got {order}"
            )));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Roots come in ± pairs; solve for the non-negative half.
        for i in 0..(n + 1) / 2 {
            // Tricomi-style initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Evaluate P_n(x) and P'_n(x) by the three-term recurrence.
                let mut p0 = 1.0f64;
                let mut p1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                // P'_n from P_n and P_{n-1}.
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self {
            nodes,
            weights,
            order,
            descriptor: format!("Gauss-Legendre({order}) on [-1,1]"),
        })
    }

    /// Gauss–Laguerre rule of the given order for ∫₀^∞ e^{-x} f(x) dx.
    pub fn gauss_laguerre(order: usize) -> Result<Self> {
        if order == 0 || order > 64 {
            return Err(GhaError::Domain(format!(
                "Gauss-Laguerre order must be in 1..=64, got {order}"
            )));
        }
        let n = order;
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let mut x = 0.0f64;
        for i in 0..n {
            // Stroud–Secrest style initial guesses (first two absolute, the
            // rest extrapolated from the previous root spacing), refined by
            // Newton on the Laguerre recurrence.
            x = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => x + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    x + (1.0 + 2.55 * ai) / (1.9 * ai) * (x - nodes[i - 2])
                }
            };
            for _ in 0..100 {
                // L_n(x) and L_{n-1}(x) by recurrence.
                let mut l0 = 1.0f64;
                let mut l1 = 1.0 - x;
                for k in 2..=n {
                    let kf = k as f64;
                    let l2 = ((2.0 * kf - 1.0 - x) * l1 - (kf - 1.0) * l0) / kf;
                    l0 = l1;
                    l1 = l2;
                }
                // L'_n(x) = n (L_n - L_{n-1}) / x.
                let dl = nf * (l1 - l0) / x;
                let dx = l1 / dl;
                x -= dx;
                if dx.abs() < 1e-14 * x.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = x;
            // w_i = x_i / ((n+1)^2 L_{n+1}(x_i)^2).
            let mut l0 = 1.0f64;
            let mut l1 = 1.0 - x;
            for k in 2..=(n + 1) {
                let kf = k as f64;
                let l2 = ((2.0 * kf - 1.0 - x) * l1 - (kf - 1.0) * l0) / kf;
                l0 = l1;
                l1 = l2;
            }
            weights[i] = x / ((nf + 1.0) * (nf + 1.0) * l1 * l1);
        }
        Ok(Self {
            nodes,
            weights,
            order,
            descriptor: format!("Gauss-Laguerre({order}) for weight e^-x on [0,inf)"),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Σ w_i f(x_i) over the rule's native domain.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let term = w * f(x);
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    /// For a Legendre rule: ∫_a^b f(x) dx by affine mapping from [-1, 1].
    pub fn integrate_interval<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        half * self.integrate(|t| f(mid + half * t))
    }
}

fn legendre_pair() -> &'static (QuadratureRule, QuadratureRule) {
    static PAIR: OnceLock<(QuadratureRule, QuadratureRule)> = OnceLock::new();
    PAIR.get_or_init(|| {
        (
            QuadratureRule::gauss_legendre(7).expect("order 7 valid"),
            QuadratureRule::gauss_legendre(15).expect("order 15 valid"),
        )
    })
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn eval_segment<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let (low, high) = legendre_pair();
    let coarse = low.integrate_interval(f, a, b);
    let fine = high.integrate_interval(f, a, b);
    Segment {
        a,
        b,
        value: fine,
        error: (fine - coarse).abs(),
    }
}

const MAX_SEGMENTS: usize = 4000;

/// Globally adaptive integration of `f` over the finite interval [a, b].
///
/// Bisects the segment with the largest embedded-pair error estimate until
/// the total estimated error satisfies `abs_tol` or `rel_tol` (whichever is
/// looser), and fails with [`GhaError::NoConvergence`] if the segment budget
/// is exhausted first.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(GhaError::Domain(format!(
            "integrate_adaptive needs finite bounds, got [{a}, {b}]"
        )));
    }
    if !(rel_tol > 0.0 || abs_tol > 0.0) {
        return Err(GhaError::Domain(
            "integrate_adaptive needs a positive tolerance".into(),
        ));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let mut segments = vec![eval_segment(&f, a, b)];
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target {
            return Ok(QuadResult {
                value: total,
                abs_error: err,
                evaluations: segments.len() * 22, // 7 + 15 points per segment
            });
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(GhaError::NoConvergence(format!(
                "adaptive bisection exceeded {MAX_SEGMENTS} segments on [{a}, {b}] \
                 (err ~ {err:.3e}, target {target:.3e})"
            )));
        }
        // Split the worst segment.
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|(_, s), (_, t)| s.error.total_cmp(&t.error))
            .map(|(i, _)| i)
            .expect("segments non-empty");
        let Segment { a: sa, b: sb, .. } = segments.swap_remove(worst);
        let mid = 0.5 * (sa + sb);
        if mid <= sa || mid >= sb {
            // Interval at floating-point resolution: accept what we have.
            segments.push(eval_segment(&f, sa, sb));
            let total: f64 = segments.iter().map(|s| s.value).sum();
            let err: f64 = segments.iter().map(|s| s.error).sum();
            return Ok(QuadResult {
                value: total,
                abs_error: err,
                evaluations: segments.len() * 22,
            });
        }
        segments.push(eval_segment(&f, sa, mid));
        segments.push(eval_segment(&f, mid, sb));
    }
}

/// ∫₀^∞ f(x) dx for integrands decaying at least exponentially.
///
/// Integrates [0, 1] then doubling panels [1, 2], [2, 4], ... adaptively;
/// stops when two consecutive panels contribute less than `rel_tol` of the
/// running total. The final tail bound is added to the error estimate.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> Result<QuadResult> {
    if !(rel_tol > 0.0) {
        return Err(GhaError::Domain(
            "integrate_semi_infinite needs a positive relative tolerance".into(),
        ));
    }
    let panel_rel = rel_tol * 0.1;
    let mut total = 0.0f64;
    let mut err = 0.0f64;
    let mut evals = 0usize;
    let mut small_streak = 0usize;
    let mut last_panel = 0.0f64;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..64 {
        // Once a running total exists, panels only need enough absolute
        // accuracy to not disturb it; this keeps the scheme from endlessly
        // refining panels where the integrand has already died off.
        let panel_abs = (rel_tol * 0.01 * total.abs()).max(f64::MIN_POSITIVE);
        let r = integrate_adaptive(&f, lo, hi, panel_rel, panel_abs)?;
        total += r.value;
        err += r.abs_error;
        evals += r.evaluations;
        last_panel = r.value.abs();
        if last_panel <= rel_tol * total.abs() + f64::MIN_POSITIVE {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(QuadResult {
                    value: total,
                    abs_error: err + last_panel,
                    evaluations: evals,
                });
            }
        } else {
            small_streak = 0;
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(GhaError::NoConvergence(format!(
        "semi-infinite panels did not decay by x = {lo:.3e} (last panel {last_panel:.3e}, \
         total {total:.3e})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_on_polynomials() {
        let rule = QuadratureRule::gauss_legendre(8).unwrap();
        // Degree 15 = 2n-1 is still exact: ∫_{-1}^{1} x^14 dx = 2/15.
        let got = rule.integrate(|x| x.powi(14));
        assert!((got - 2.0 / 15.0).abs() < 1e-14);
        // Odd powers vanish by symmetry.
        assert!(rule.integrate(|x| x.powi(7)).abs() < 1e-15);
        // Weights sum to the interval length.
        let wsum: f64 = rule.weights().iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_rule_reproduces_factorial_moments() {
        // ∫₀^∞ e^{-x} x^n dx = n!; order 24 is exact through degree 47.
        let rule = QuadratureRule::gauss_laguerre(24).unwrap();
        let mut fact = 1.0f64;
        for n in 0..=12usize {
            if n > 0 {
                fact *= n as f64;
            }
            let got = rule.integrate(|x| x.powi(n as i32));
            assert!(
                (got - fact).abs() < 1e-12 * fact,
                "moment {n}: got {got}, want {fact}"
            );
        }
    }

    #[test]
    fn adaptive_handles_smooth_and_peaked_integrands() {
        // ∫₀^π sin = 2.
        let r = integrate_adaptive(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 0.0)
            .unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        // Narrow Gaussian: ∫ e^{-200 (x-0.5)^2} dx over [0,1] = sqrt(π/200)·erf-ish.
        let r = integrate_adaptive(
            |x: f64| (-200.0 * (x - 0.5) * (x - 0.5)).exp(),
            0.0,
            1.0,
            1e-12,
            0.0,
        )
        .unwrap();
        let exact = (std::f64::consts::PI / 200.0).sqrt(); // erf(~7) = 1 to 1e-22
        assert!((r.value - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn semi_infinite_matches_gamma_integrals() {
        // ∫₀^∞ x^3 e^{-x} dx = 6.
        let r = integrate_semi_infinite(|x: f64| x.powi(3) * (-x).exp(), 1e-11).unwrap();
        assert!((r.value - 6.0).abs() < 1e-9, "got {}", r.value);
        assert!(r.abs_error < 1e-7);
        // ∫₀^∞ e^{-x²} dx = √π/2.
        let r = integrate_semi_infinite(|x: f64| (-x * x).exp(), 1e-11).unwrap();
        assert!((r.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn adaptive_rejects_bad_input() {
        assert!(integrate_adaptive(|x| x, 0.0, f64::INFINITY, 1e-10, 0.0).is_err());
        assert!(integrate_adaptive(|x| x, 0.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn laguerre_initial_guesses_converge_at_high_order() {
        // All nodes positive, increasing, weights positive and summing to 1.
        let rule = QuadratureRule::gauss_laguerre(40).unwrap();
        let nodes = rule.nodes();
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(nodes[0] > 0.0);
        assert!(rule.weights().iter().all(|&w| w > 0.0));
        let wsum: f64 = rule.weights().iter().sum();
        assert!((wsum - 1.0).abs() < 1e-12);
    }
}
