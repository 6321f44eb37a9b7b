//! Property-based invariants of the algebra/state layer, plus the Gram
//! positivity check that backs the overlap kernel.

use num_complex::Complex64;
use proptest::prelude::*;

use gha_coherent::coherent::{build_state, mandel_q, occupation_moments, SeriesOptions};
use gha_coherent::powerlaw::{Exponent, PowerLawSpec};
use gha_coherent::special::{sum_log_series, LogTerm};

/// Relaxed-cap options for the slowly converging sub-linear corners.
fn roomy() -> SeriesOptions {
    SeriesOptions {
        rel_tol: 1e-14,
        max_terms: 300_000,
    }
}

/// Strategy: a finite exponent in a numerically sane band, or the
/// square-well limit.
fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        (0.5f64..20.0).prop_map(Exponent::Finite),
        Just(Exponent::Infinite),
    ]
}

fn spec_strategy() -> impl Strategy<Value = PowerLawSpec> {
    (exponent(), 0.0f64..8.0)
        .prop_map(|(k, gamma)| PowerLawSpec::dimensionless(k, gamma).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The closed-form energies satisfy the characteristic map:
    /// f(E_n) = E_{n+1} to 1e-12 relative, for any spec.
    #[test]
    fn characteristic_map_advances_spectrum(spec in spec_strategy(), n in 0usize..40) {
        let e_n = spec.dimensionless_energy(n);
        let e_next = spec.dimensionless_energy(n + 1);
        let f_e = spec.characteristic_value(e_n).unwrap();
        prop_assert!((f_e - e_next).abs() <= 1e-12 * e_next.abs().max(1.0));
    }

    /// g-product increments are positive, finite, and agree with the energy
    /// gaps E_i - E_0 they are defined from (two algebraically equal but
    /// numerically different evaluation routes).
    #[test]
    fn g_increments_match_energy_gaps(spec in spec_strategy(), i in 1usize..60) {
        let log_inc = spec.log_g_increment(i).unwrap();
        prop_assert!(log_inc.is_finite());
        let gap = spec.dimensionless_energy(i) - spec.dimensionless_energy(0);
        prop_assert!(gap > 0.0);
        prop_assert!(
            (log_inc - gap.ln()).abs() <= 1e-11 * gap.ln().abs().max(1.0),
            "increment {} vs gap {} at i={}, k={}, gamma={}",
            log_inc, gap.ln(), i, spec.k, spec.gamma
        );
    }

    /// Mandel Q is bounded below by -1 (variance is non-negative) and the
    /// moments are finite and ordered.
    #[test]
    fn mandel_q_is_physical(spec in spec_strategy(), x in 1e-3f64..16.0) {
        let m = occupation_moments(&spec, x, &roomy()).unwrap();
        prop_assert!(m.mean > 0.0 && m.mean.is_finite());
        prop_assert!(m.second >= m.mean * m.mean * (1.0 - 1e-12));
        let q = mandel_q(&spec, x, &roomy()).unwrap();
        prop_assert!(q.is_finite());
        prop_assert!(q >= -1.0 - 1e-9, "Q = {q}");
    }

    /// Normalization lies in (0, 1]: S₀ >= 1 because the n = 0 term alone
    /// contributes 1.
    #[test]
    fn normalization_bounded(spec in spec_strategy(), x in 0.0f64..16.0) {
        let n = gha_coherent::coherent::normalization(&spec, x, &roomy()).unwrap();
        prop_assert!(n > 0.0 && n <= 1.0 + 1e-14, "N = {n}");
    }

    /// States are unit-normalized, their truncation tail is tiny, and the
    /// eigenvalue defect obeys the tail-bound contract.
    #[test]
    fn states_are_normalized_eigenvectors(
        spec in spec_strategy(),
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        let z = Complex64::new(re, im);
        let state = build_state(&spec, z, &roomy()).unwrap();
        let total: f64 = state.photon_distribution().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(state.tail_bound() <= 1e-12);
        let rep = spec.gha_rep(state.n_max() + 1).unwrap();
        let residual = state.eigen_residual(&rep).unwrap();
        // 10 × tail_bound in exact arithmetic, plus a rounding floor: the
        // rep ladder and the log-domain coefficients round differently, so
        // the defect never drops below ~n_max · ε even for a tiny tail.
        prop_assert!(
            residual <= 10.0 * state.tail_bound() + 1e-11,
            "residual {} vs tail bound {}",
            residual,
            state.tail_bound()
        );
    }

    /// |⟨z|w⟩| <= 1 (Cauchy–Schwarz) and ⟨z|z⟩ = 1.
    #[test]
    fn overlaps_respect_cauchy_schwarz(
        spec in spec_strategy(),
        zr in -2.5f64..2.5,
        zi in -2.5f64..2.5,
        wr in -2.5f64..2.5,
        wi in -2.5f64..2.5,
    ) {
        let a = build_state(&spec, Complex64::new(zr, zi), &roomy()).unwrap();
        let b = build_state(&spec, Complex64::new(wr, wi), &roomy()).unwrap();
        let ab = a.overlap(&b).unwrap();
        prop_assert!(ab.norm() <= 1.0 + 1e-12, "|<z|w>| = {}", ab.norm());
        let aa = a.overlap(&a).unwrap();
        prop_assert!((aa.re - 1.0).abs() < 1e-12 && aa.im.abs() < 1e-13);
    }

    /// Compensated log-domain summation of positive series is stable under
    /// permutation of the terms.
    #[test]
    fn positive_series_sum_is_permutation_stable(
        mut logs in proptest::collection::vec(-30.0f64..30.0, 5..60),
        seed in any::<u64>(),
    ) {
        let reference = sum_log_series(
            logs.iter().map(|&l| LogTerm::positive(l)),
            0.0,
            1000,
        ).unwrap();
        // Fisher–Yates with a tiny deterministic LCG keyed by the seed.
        let mut state = seed | 1;
        for i in (1..logs.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            logs.swap(i, j);
        }
        let shuffled = sum_log_series(
            logs.iter().map(|&l| LogTerm::positive(l)),
            0.0,
            1000,
        ).unwrap();
        prop_assert!(
            (reference.log_abs() - shuffled.log_abs()).abs() <= 1e-12,
            "order dependence: {} vs {}",
            reference.log_abs(),
            shuffled.log_abs()
        );
    }
}

/// Gram positivity: for any label set z_1..z_m the matrix G_ij = ⟨z_i|z_j⟩
/// must be positive semidefinite (it is a Gram matrix of actual Hilbert-space
/// vectors). Checked via the real symmetric embedding
/// [[Re G, -Im G], [Im G, Re G]] and a cyclic Jacobi eigensolver.
mod gram {
    use super::*;

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[p][q] * a[p][q];
                }
            }
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for i in 0..n {
                        let aip = a[i][p];
                        let aiq = a[i][q];
                        a[i][p] = c * aip - s * aiq;
                        a[i][q] = s * aip + c * aiq;
                    }
                    for i in 0..n {
                        let api = a[p][i];
                        let aqi = a[q][i];
                        a[p][i] = c * api - s * aqi;
                        a[q][i] = s * api + c * aqi;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).collect()
    }

    #[test]
    fn jacobi_solver_sanity() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let eig = jacobi_eigenvalues(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        let mut eig = eig;
        eig.sort_by(f64::total_cmp);
        assert!((eig[0] - 1.0).abs() < 1e-12 && (eig[1] - 3.0).abs() < 1e-12);
    }

    fn min_gram_eigenvalue(spec: &PowerLawSpec, labels: &[Complex64]) -> f64 {
        let opts = roomy();
        let states: Vec<_> = labels
            .iter()
            .map(|&z| build_state(spec, z, &opts).unwrap())
            .collect();
        let m = labels.len();
        let mut re = vec![vec![0.0f64; m]; m];
        let mut im = vec![vec![0.0f64; m]; m];
        for i in 0..m {
            for j in 0..m {
                let g = states[i].overlap(&states[j]).unwrap();
                re[i][j] = g.re;
                im[i][j] = g.im;
            }
        }
        // Real symmetric embedding of the Hermitian Gram matrix.
        let n = 2 * m;
        let mut embed = vec![vec![0.0f64; n]; n];
        for i in 0..m {
            for j in 0..m {
                embed[i][j] = re[i][j];
                embed[i][j + m] = -im[i][j];
                embed[i + m][j] = im[i][j];
                embed[i + m][j + m] = re[i][j];
            }
        }
        jacobi_eigenvalues(embed)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn gram_matrices_are_positive_semidefinite(
            spec in spec_strategy(),
            raw in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 5),
        ) {
            let labels: Vec<Complex64> =
                raw.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
            let min_eig = min_gram_eigenvalue(&spec, &labels);
            prop_assert!(
                min_eig >= -1e-10,
                "Gram matrix has negative eigenvalue {min_eig}"
            );
        }
    }

    #[test]
    fn gram_psd_on_fixed_label_sets() {
        // Deterministic pinned sets for the three anchor spectra.
        let labels: Vec<Complex64> = [
            (0.5, 0.0),
            (-1.0, 0.7),
            (0.3, -1.4),
            (1.8, 0.9),
            (-0.6, -0.2),
        ]
        .iter()
        .map(|&(r, i)| Complex64::new(r, i))
        .collect();
        for k in [Exponent::Finite(0.5), Exponent::Finite(2.0), Exponent::Infinite] {
            let spec = PowerLawSpec::dimensionless(k, 4.0).unwrap();
            let min_eig = min_gram_eigenvalue(&spec, &labels);
            assert!(
                min_eig >= -1e-10,
                "k = {k}: negative Gram eigenvalue {min_eig}"
            );
        }
    }
}
