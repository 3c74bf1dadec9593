#!/usr/bin/env python3
"""Smoke test for the compiled python module.

Usage: test_smoke.py <dir-containing-_core-extension>
Run against the build tree (no install step needed).
"""

import math
import sys
import tempfile


def approx(a, b, tol):
    return abs(a - b) <= tol * (1.0 + abs(b))


def main():
    if len(sys.argv) > 1:
        sys.path.insert(0, sys.argv[1])
    import _core as core

    # Grid + quadrature: Gaussian mass = pi^{3/2}.
    g = core.make_log_grid(1e-7, 30.0, 2048)
    assert g.n == 2048 and len(g.r) == 2048
    rho = [math.exp(-r * r) for r in g.r]
    mass = core.integrate_volume(g, rho)
    assert approx(mass, math.pi ** 1.5, 1e-9), mass

    # Model presets and energy terms.
    m = core.make_model("tf_c0", 1.0, 1.0)
    assert m.family == "tf_c0" and m.c_kin == 1.0 and m.c_corr == 0.75
    t_kin = core.kinetic_energy(m, g, rho)
    assert approx(t_kin, (3.0 * math.pi / 5.0) ** 1.5, 1e-9), t_kin
    raw = core.coulomb_raw(g, rho)
    assert approx(raw, math.sqrt(2.0) * math.pi ** 2.5, 1e-8), raw
    assert approx(core.hartree_bruteforce(g, rho), raw / 2.0, 1e-6)

    # Exceptions surface as python types.
    try:
        core.make_model("nope", 1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown family must raise")

    # Single-nucleus solve: t = 0 is the zero density.
    z = core.solve_constrained(core.make_model("tf_d", 1.0, 1.0), g, 0.0)
    assert z.converged and z.energy == 0.0 and z.t_achieved == 0.0

    with tempfile.TemporaryDirectory() as cache:
        ev = core.gb_evaluator(
            cache, "tf_d", b=1.0, Z=2.0, beta=5.0 / 3.0,
            r_min=1e-5, r_max=30.0, nodes=512,
        )
        assert ev.value(0.0) == 0.0
        assert ev.value(1.0) < 0.0
        assert approx(ev.saturation_alpha(), 2.0, 0.05)
        thr = core.ionization_threshold(ev)
        assert approx(thr, 2.0, 0.05), thr

        res = core.allocate(
            "tf_c0", [1.0, 2.0], 3.0, cache_dir=cache,
            r_min=1e-5, r_max=30.0, nodes=512,
        )
        assert res["kkt"]["ok"], res["kkt"]
        oracle = core.closed_form_tfc0([1.0, 2.0], 3.0)
        assert approx(res["alpha"][0], oracle[0], 1e-3)
        assert approx(res["alpha"][1], oracle[1], 1e-3)
        assert approx(oracle[0], 1.0 / 3.0, 1e-12)

    print("python smoke: OK")


if __name__ == "__main__":
    main()
