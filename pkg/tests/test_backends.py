import os
import subprocess
import sys

import numpy as np
import pytest

from mljtoda import _backend, _fallback, chain
from mljtoda.analysis.ring import E_X
from mljtoda.potentials import Fpu, Mlj, NormalizedMlj, RatioLimit, TaylorToda, Toda

compiled = pytest.importorskip("mljtoda._kernels")

POTENTIALS = [Toda(-2.0), NormalizedMlj(12, 6), NormalizedMlj(96, 6), TaylorToda(5),
              Fpu(-1, 2, 0.1), RatioLimit(0.5)]


def _run_both(fn_name, *args, arrays):
    out = []
    for mod in (compiled, _fallback):
        copies = [a.copy() for a in arrays]
        res = getattr(mod, fn_name)(*copies, *args)
        out.append((copies, res))
    return out


@pytest.mark.parametrize("p", POTENTIALS, ids=lambda p: str(p.describe()))
@pytest.mark.parametrize("boundary", ["fixed", "periodic"])
@pytest.mark.parametrize("scheme", [0, 1])
def test_integrate_agrees(p, boundary, scheme):
    s = chain.sample_state(9, 0.2, boundary, seed=1)
    kind, params = p.kernel_spec()
    runs = []
    for mod in (compiled, _fallback):
        x, q = s.positions.copy(), s.momenta.copy()
        res = mod.integrate(x, q, kind, params, s.periodic, 0.0, 1.0, 0.02, scheme, 200)
        runs.append((x, q, res))
    (x1, q1, r1), (x2, q2, r2) = runs
    assert r1 == r2 and r1[0] == 0
    np.testing.assert_allclose(x1, x2, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(q1, q2, rtol=1e-12, atol=1e-12)


def test_molecular_mlj_agrees():
    p = Mlj(12, 6, 1.0, 1.0)
    s = chain.equilibrium(6, "fixed", chain.Frame.molecular(1.0, 1.0, 1.0))
    kind, params = p.kernel_spec()
    runs = []
    for mod in (compiled, _fallback):
        x, q = s.positions.copy(), np.linspace(-0.1, 0.1, 5)
        mod.integrate(x, q, kind, params, False, 6.0, 1.0, 0.002, 1, 200)
        runs.append(x)
    np.testing.assert_allclose(runs[0], runs[1], rtol=1e-12)


@pytest.mark.parametrize("p", POTENTIALS, ids=lambda p: str(p.describe()))
def test_tangent_agrees(p):
    s = chain.sample_state(7, 0.05, "fixed", seed=2)
    kind, params = p.kernel_spec()
    rng = np.random.default_rng(0)
    u0, v0 = rng.normal(size=6), rng.normal(size=6)
    rec = np.array([5, 50, 300], dtype=np.int64)
    runs = []
    for mod in (compiled, _fallback):
        x, q, dx, dq = s.positions.copy(), s.momenta.copy(), u0.copy(), v0.copy()
        out = np.zeros(3)
        res = mod.integrate_tangent(x, q, dx, dq, kind, params, False, 0.0, 1.0, 0.02, 1, 300,
                                    10, rec, out, 0.0)
        runs.append((x, dx, out, res))
    (x1, d1, o1, r1), (x2, d2, o2, r2) = runs
    assert r1[:3] == r2[:3] and r1[0] == 0
    assert r1[3] == pytest.approx(r2[3], rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(o1, o2, rtol=1e-11)
    np.testing.assert_allclose(d1, d2, rtol=1e-10, atol=1e-12)


def test_crossing_agrees():
    p = Toda()
    kind, params = p.kernel_spec()
    runs = []
    for mod in (compiled, _fallback):
        x = np.array([0.3, -0.1, -0.2])
        q = np.array([0.1, 0.2, -0.3])
        xp, qp = np.empty(3), np.empty(3)
        res = mod.integrate_until_crossing(x, q, kind, params, True, 0.0, 1.0, 0.01, 1, E_X,
                                           10000, xp, qp)
        runs.append((x, xp, res))
    assert runs[0][2] == runs[1][2]
    assert runs[0][2][3]
    np.testing.assert_allclose(runs[0][0], runs[1][0], rtol=1e-12)


def test_domain_status_agrees():
    p = NormalizedMlj(12, 6)
    kind, params = p.kernel_spec()
    res = []
    for mod in (compiled, _fallback):
        x, q = np.zeros(3), np.array([0.0, 0.0, 30.0])
        res.append(mod.integrate(x, q, kind, params, False, 0.0, 1.0, 0.5, 0, 100))
    assert res[0] == res[1] and res[0][0] == 1


def test_environment_selects_fallback():
    env = dict(os.environ, MLJTODA_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from mljtoda import _backend; print(_backend.NAME)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert _backend.NAME == "cython"
