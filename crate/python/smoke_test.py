"""Smoke test for the `logsep` extension module.

Build and install first, e.g. `maturin develop --release -m crates/py/Cargo.toml`.
"""

import math
import sys
import tempfile

import logsep


def check(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    results = []

    q0 = logsep.q_profile(0.0, 3.0)
    results.append(check("q_profile(0) = sqrt(2) for p = 3", abs(q0 - math.sqrt(2.0)) < 1e-14, f"{q0:.15f}"))

    params = logsep.ModelParams(3.0, 1.0)
    grid = logsep.Grid(40.0, 0.02)
    truth = logsep.SolitonState(1.05, 0.2, 14.0, 0.01)
    re, im = logsep.family_member(grid, truth, 3.0)
    results.append(check("family member on grid", len(re) == grid.n == len(im)))

    guess = logsep.SolitonState(1.0, 0.15, 13.8, 0.0)
    state, residuals, xi_h1 = logsep.decompose(grid, re, im, guess, params, "full")
    err = max(abs(a - b) for a, b in zip(state.as_tuple(), truth.as_tuple()))
    results.append(check("decompose recovers the member", err < 1e-8 and xi_h1 < 1e-8, f"err={err:.2e}"))
    results.append(check("orthogonality residuals", max(abs(r) for r in residuals) <= 1e-10))

    re1, im1, mass_drift, energy_drift = logsep.evolve(grid, re, im, params, 0.0, 0.5, 1e-3)
    results.append(check("short PDE run conserves mass", mass_drift < 1e-8, f"{mass_drift:.2e}"))

    spec = logsep.spectral(3.0, 1.0, 16.0)
    results.append(check("tau in bracket at z = 16", 0.25 <= spec["tau"] <= 0.35, f"tau={spec['tau']:.4f}"))

    law = logsep.ForceLaw(3.0, 1.0)
    z18 = law.sigma * law.zeta(18.0) * math.exp(-9.0)
    results.append(check("zeta ratio at z = 18 near [sqrt3, 1.932]", 1.72 < z18 < 1.94, f"{z18:.5f}"))
    s, z, v, drift = law.integrate(2.0 * math.log(100.0), law.classical_velocity(2.0 * math.log(100.0)), 100.0, 1000.0)
    results.append(check("effective ODE energy drift", drift <= 1e-8, f"{drift:.2e}"))

    try:
        logsep.ModelParams(3.0, -1.0)
        results.append(check("negative gamma rejected", False))
    except ValueError:
        results.append(check("negative gamma rejected", True))

    passed, metrics = logsep.run_criterion(1)
    results.append(check("criterion 1", passed))

    with tempfile.TemporaryDirectory() as out:
        code = logsep.cli(["profile", "--out", out])
        results.append(check("cli profile", code == 0))
        results.append(check("cli config error exit code", logsep.cli(["shoot"]) == 2))

    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
