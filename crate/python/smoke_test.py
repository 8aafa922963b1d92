"""Smoke test for the cylint_py extension.

Build and run:
    cargo build --release -p cylint-py --features extension-module
    cp target/release/libcylint_py.so python/cylint_py.so
    python3 python/smoke_test.py
or install with `pip install ./crates/python` (maturin) and run the script.
"""

import json
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import cylint_py as cy


def main():
    keys = [k for k, _ in cy.families()]
    assert keys == [f"F{i}" for i in range(1, 9)], keys
    assert "f1 < 0, f1/8 < beta1 < 0" in cy.describe("F2")

    assert cy.special("K", k=0.0) == math.pi / 2
    assert abs(cy.special("sn", k=1.0, u=1.0) - math.tanh(1.0)) < 1e-12

    larmor = cy.System("F1", "mu0 = 1\n")
    assert larmor.field(2.0, 0.0, 0.0) == [0.0, 0.0, 2.0]
    run = larmor.simulate([2.0, 0.0, 0.0, 0.0, -4.0, 0.0], t_end=2 * math.pi)
    r, phi = run["states"][-1][:2]
    closure = math.hypot(r * math.cos(phi) - 2.0, r * math.sin(phi))
    assert run["truncated_at"] is None and closure < 1e-6, closure

    state = [1.2, 0.3, 0.1, 0.1, 0.5, 0.05]
    for key in keys:
        system = cy.System(key)
        values = system.integrals(state)
        assert abs(values["H"] - system.hamiltonian(state)) < 1e-15
        report = json.loads(system.verify("commutation", samples=20, seed=1))
        assert report["pass"], (key, report["max_residual"])
        assert system.verify("gauge") == system.verify("gauge")

    try:
        cy.System("F8", "psi = trig\npsi.a = 1\npsi.k = 1\nmu = const\nmu.c = 0.5\nsigma = poly\nsigma.c1 = 1\n")
    except cy.Rank3Error:
        pass
    else:
        raise AssertionError("rank-3 configuration accepted")

    gamma = cy.profile_gamma(-8.0, -0.5, 0.0, 1.0, math.sqrt(2.0), (0.0, 2 * math.pi))
    assert max(abs(m) for m in gamma["monitor"]) <= 1e-9

    print("smoke test passed")


if __name__ == "__main__":
    main()
