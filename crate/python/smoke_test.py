#!/usr/bin/env python3
"""Smoke test for the gha_coherent_py extension module.

Builds the cdylib with cargo if it is not already present, stages it under
an importable name, and exercises the bound API end to end. Exits non-zero
on the first failed assertion.

Usage: python3 python/smoke_test.py
"""

import math
import pathlib
import shutil
import subprocess
import sys
import sysconfig
import tempfile

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent


def stage_module() -> pathlib.Path:
    """Ensure the extension exists and return a directory to import from."""
    lib = REPO_ROOT / "target" / "debug" / "libgha_coherent_py.so"
    if not lib.exists():
        subprocess.run(
            ["cargo", "build", "-p", "gha-coherent-py"],
            cwd=REPO_ROOT,
            check=True,
        )
    if not lib.exists():
        sys.exit(f"extension library not found at {lib}")
    stage = pathlib.Path(tempfile.mkdtemp(prefix="gha_coherent_py_"))
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy2(lib, stage / f"gha_coherent_py{suffix}")
    # abi3 module: a plain .so name works for any CPython >= 3.10.
    shutil.copy2(lib, stage / "gha_coherent_py.so")
    return stage


def approx(actual, expected, tol, what):
    if abs(actual - expected) > tol:
        sys.exit(f"FAIL: {what}: got {actual!r}, expected {expected!r} (tol {tol})")
    print(f"  ok: {what} = {actual}")


def check(condition, what):
    if not condition:
        sys.exit(f"FAIL: {what}")
    print(f"  ok: {what}")


def main():
    sys.path.insert(0, str(stage_module()))
    import gha_coherent_py as gha

    print("spectrum:")
    well = gha.PowerLawSpec("inf")
    check([well.energy(n) for n in range(4)] == [1.0, 4.0, 9.0, 16.0],
          "square-well energies are (n+1)^2")
    check(well.spacing_class() == "tightening", "square-well gaps widen")
    harmonic = gha.PowerLawSpec(2, gamma=0.0)
    approx(harmonic.energy(7), 7.0, 1e-12, "harmonic E_7 (gamma = 0)")
    check(gha.PowerLawSpec(0.5).spacing_class() == "loosening",
          "loosely binding gaps shrink")
    approx(well.characteristic(4.0), 9.0, 1e-12, "f(E_1) = E_2 for the well")
    approx(gha.PowerLawSpec(2).physical(0.5, 1.0, 1.0).effective_frequency(),
           1.0, 1e-12, "omega for V0 = m w^2 a^2 / 2 with w = 1")
    try:
        gha.PowerLawSpec(-1)
        sys.exit("FAIL: negative k must raise ValueError")
    except ValueError:
        print("  ok: negative k raises ValueError")

    print("coherent states:")
    spec2 = gha.PowerLawSpec(2)
    approx(gha.normalization(spec2, 1.0), math.exp(-0.5), 1e-14,
           "harmonic N(1) = e^(-1/2)")
    approx(gha.mandel_q(spec2, 4.0), 0.0, 1e-12, "harmonic Q(|z|^2=4)")
    approx(gha.photon_moment(spec2, 4.0, 1), 4.0, 1e-10, "harmonic <n> = |z|^2")
    q_well = gha.mandel_q(well, 4.0)
    check(q_well < 0.0, f"square-well Q(|z|^2=4) = {q_well} is sub-Poissonian")

    state = gha.build_state(spec2, 1 + 0.5j)
    check(abs(sum(state.photon_distribution()) - 1.0) < 1e-12,
          "photon distribution sums to 1")
    check(state.tail_bound < 1e-12, f"tail bound {state.tail_bound} is tiny")
    check(state.eigen_residual() < 1e-10,
          f"eigen residual {state.eigen_residual()} is tiny")
    check(abs(state.overlap(state) - 1.0) < 1e-12, "self-overlap is 1")
    other = gha.build_state(spec2, 0.3 - 0.2j)
    check(abs(state.overlap(other)) <= 1.0 + 1e-12, "overlap obeys Cauchy-Schwarz")
    expected_c0 = math.exp(-state.z.real**2 / 2 - state.z.imag**2 / 2)
    approx(abs(state.coeffs()[0]), expected_c0, 1e-14, "c_0 = N(|z|^2)")

    print("q_curve:")
    rows = gha.q_curve(well, [0.5, 1.0, 2.0])
    check(len(rows) == 3 and rows[0]["abs_z"] == 0.5, "grid order is preserved")
    check(all(r["q"] < 0.0 for r in rows), "square-well Q < 0 along the grid")
    check(all(r["variance"] >= 0.0 for r in rows), "variances are non-negative")

    print("special functions:")
    approx(gha.log_gamma(11.0), math.log(math.factorial(10)), 1e-12,
           "log_gamma(11) = ln 10!")
    x = 2.0
    wronskian = (gha.bessel_i(2, x) * gha.bessel_k(1, x)
                 + gha.bessel_i(1, x) * gha.bessel_k(2, x))
    approx(wronskian, 1.0 / x, 1e-12, "Bessel Wronskian I2 K1 + I1 K2 = 1/x")

    print("resolution of unity:")
    harmonic_report = gha.verify_resolution("harmonic")
    check(harmonic_report["passed"] and harmonic_report["normalized"],
          "harmonic weight resolves the identity")
    approx(harmonic_report["rows"][5]["moment"], 120.0, 1e-6,
           "5th harmonic moment = 5!")
    paper = gha.verify_resolution("square-well-paper")
    check(paper["passed"] and not paper["normalized"],
          "published square-well weight is flat but scaled")
    approx(paper["scalar_ratio"], 2.0, 1e-6, "its common scalar is 2")
    corrected = gha.verify_resolution("square-well-corrected")
    check(corrected["passed"] and corrected["normalized"],
          "halved square-well weight resolves the identity")
    try:
        gha.verify_resolution("gaussian")
        sys.exit("FAIL: unknown weight must raise ValueError")
    except ValueError:
        print("  ok: unknown weight raises ValueError")

    print("error mapping:")
    loose = gha.PowerLawSpec(0.5)
    try:
        gha.mandel_q(loose, 100.0, max_terms=50)
        sys.exit("FAIL: tiny max_terms must raise RuntimeError")
    except RuntimeError:
        print("  ok: non-convergence raises RuntimeError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
