import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from mljtoda import normal_form as nf
from mljtoda.potentials import Mlj, NormalizedMlj, Toda


def test_toda_class_has_unit_coefficients():
    lam = -2.0
    _, seq = nf.normalize_generic(Toda(lam).derivatives_at_minimum(10), 0.0, 0.0, lam)
    assert seq.k == pytest.approx([1.0] * 7, rel=1e-15)


def test_cubic_class_has_zero_coefficients():
    _, seq = nf.normalize_generic([1.0, -2.0, 0.0, 0.0, 0.0], 0.0, 0.0, -2.0)
    assert seq.k == (0.0, 0.0, 0.0)


def test_mlj_12_6_k4_via_generic_route():
    p = Mlj(12, 6, 1.0, 1.0)
    _, seq = nf.normalize_generic(p.derivatives_at_minimum(4), p.value(1.0), 1.0, -2.0)
    assert seq.k_j(4) == pytest.approx(0.8412698412698413, rel=1e-12)
    assert seq.k_j(4) == pytest.approx(nf.k_coeff_mlj(12, 6, 4), rel=1e-12)


@pytest.mark.parametrize("lam", [-2.0, 0.5, 3.0])
@pytest.mark.parametrize("n,m,eps0,a", [(12, 6, 1.0, 1.0), (9, 4, 0.3, 2.2), (30, 7, 5.0, 0.8)])
def test_affine_map_produces_normal_form(lam, n, m, eps0, a):
    p = Mlj(n, m, eps0, a)
    norm, _ = nf.normalize_generic(p.derivatives_at_minimum(3), p.value(a), a, lam)
    A, C = norm.A, norm.C
    assert A > 0
    assert norm.apply(p.value, 0.0) == pytest.approx(0.0, abs=1e-10)
    assert A * C * p.d1(a) == pytest.approx(0.0, abs=1e-10)
    assert A * C ** 2 * p.d2(a) == pytest.approx(1.0, rel=1e-10)
    assert A * C ** 3 * p.d3(a) == pytest.approx(lam, rel=1e-10)


def test_affine_map_equals_normalized_mlj():
    p = Mlj(12, 6, 1.0, 1.0)
    norm, _ = nf.normalize_generic(p.derivatives_at_minimum(3), p.value(1.0), 1.0, -2.0)
    xi = np.linspace(-1, 2, 31)
    np.testing.assert_allclose(norm.apply(p.value, xi), NormalizedMlj(12, 6, -2.0).value(xi),
                               rtol=1e-9, atol=1e-13)
    assert norm.inverse_argument(norm.C * 0.3 + norm.D) == pytest.approx(0.3)


def test_class_conditions_named():
    with pytest.raises(nf.ClassConditionError, match="f''"):
        nf.normalize_generic([0.0, 1.0], 0.0, 0.0, -2.0)
    with pytest.raises(nf.ClassConditionError, match="f'''"):
        nf.normalize_generic([1.0, 0.0], 0.0, 0.0, -2.0)
    with pytest.raises(nf.ClassConditionError, match="lambda"):
        nf.normalize_generic([1.0, 1.0], 0.0, 0.0, 0.0)


def test_k_coeff_against_symbolic_normal_form():
    # independent route: differentiate the closed normalized potential symbolically
    n, m, lam = 12, 6, sp.Rational(-2)
    x = sp.symbols("x")
    K = n + m + 3
    s = 1 / (1 - lam * x / K)
    V = (s ** n - sp.Rational(n, m) * s ** m + sp.Rational(n, m) - 1) / (lam ** 2 * n * (n - m) / K ** 2)
    for j in range(4, 8):
        dj = sp.diff(V, x, j).subs(x, 0)
        kj = sp.nsimplify(dj / lam ** (j - 2))
        assert Fraction(int(kj.p), int(kj.q)) == nf.k_coeff_mlj_exact(n, m, j)


def test_known_deltas():
    assert nf.k_coeff_mlj_exact(12, 6, 4) - 1 == Fraction(-70, 441)
    assert nf.k_coeff_mlj_exact(24, 6, 4) - 1 == Fraction(-142, 1089)
    assert nf.k_coeff_mlj_exact(48, 6, 4) - 1 == Fraction(-286, 3249)
    assert nf.k_coeff_mlj(12, 6, 5) - 1 == pytest.approx(-0.30461, abs=1e-5)


def test_delta4_closed_form_random_pairs():
    gen = random.Random(7)
    for _ in range(100):
        m = gen.randint(1, 60)
        n = gen.randint(m + 1, 400)
        assert nf.k_coeff_mlj_exact(n, m, 4) - 1 == nf.delta4_closed_form(n, m)


def test_large_n_exact_without_overflow():
    k = nf.k_coeff_mlj_exact(4000, 6, 8)
    assert isinstance(k, Fraction)
    assert abs(float(k) - 1) < 0.05


@pytest.mark.parametrize("j", [4, 5, 6, 7])
def test_n_delta_converges(j):
    a = 2 ** 10 * nf.k_coeff_mlj(2 ** 10, 6, j) - 2 ** 10
    b = 2 ** 11 * nf.k_coeff_mlj(2 ** 11, 6, j) - 2 ** 11
    assert abs(a - b) <= 0.01 * abs(b)


def test_delta_table_grid_and_monotonicity():
    rows = nf.delta_table(6, [4, 5, 6, 7], 32)
    assert len(rows) == 31 * 4
    assert {r.n for r in rows} == set(range(12, 193, 6))
    for j in (4, 5, 6, 7):
        d = [abs(r.delta) for r in rows if r.j == j]
        assert all(x > y for x, y in zip(d, d[1:]))
        assert d[-1] < 0.2 * d[0]
    row12 = next(r for r in rows if r.n == 12 and r.j == 4)
    assert row12.delta == nf.k_coeff_mlj(12, 6, 4) - 1


def test_k_coeff_rejects_bad_input():
    with pytest.raises(ValueError):
        nf.k_coeff_mlj(6, 6, 4)
    with pytest.raises(ValueError):
        nf.k_coeff_mlj(12, 6, 3)
    with pytest.raises(ValueError):
        nf.delta_table(6, [3], 4)


def test_fpu_delta4():
    assert nf.fpu_delta4(-1.0, 2.0) == 2.0
    assert nf.fpu_delta4(-1.0, 0.0) == -1.0
    assert nf.fpu_delta4(0.7, 2 * 0.7 ** 2 / 3) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(nf.ClassConditionError):
        nf.fpu_delta4(0.0, 1.0)


def test_series_reproduces_normalized_mlj():
    p = NormalizedMlj(12, 6, -2.0)
    seq = nf.mlj_coefficients(12, 6, -2.0, 10)
    xi = np.linspace(-0.1, 0.1, 41)
    assert np.max(np.abs(seq.series(xi) - p.value(xi))) <= 1e-8


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 7).flatmap(lambda m: st.tuples(st.just(m), st.integers(m + 1, 200))),
       st.integers(4, 8))
def test_oracle_equivalence_property(mn, j):
    m, n = mn
    p = Mlj(n, m, 1.0, 1.0)
    _, seq = nf.normalize_generic(p.derivatives_at_minimum(j), p.value(1.0), 1.0, -2.0)
    assert math.isclose(seq.k_j(j), nf.k_coeff_mlj(n, m, j), rel_tol=1e-10)
