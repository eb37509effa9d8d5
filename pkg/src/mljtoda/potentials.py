"""Pair potentials with closed-form derivatives.

Every potential evaluates ``value``, ``d1``, ``d2`` and ``d3`` on scalars or
arrays.  The normalized family (Toda, normalized MLJ, Taylor truncations of
Toda, the fixed-ratio limit) has its minimum at the origin with unit
curvature and third derivative ``lam``.  ``Mlj`` is the raw molecular
potential in physical units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P

from . import normal_form

KIND_TODA = 0
KIND_MLJ = 1
KIND_NMLJ = 2
KIND_POLY = 3
KIND_RATIO = 4


class DomainError(ValueError):
    """A potential was evaluated outside its domain."""

    def __init__(self, x, message: str | None = None, bond: int | None = None,
                 step: int | None = None):
        self.x = x
        self.bond = bond
        self.step = step
        if message is None:
            message = f"argument {x!r} outside the potential's domain"
        where = []
        if step is not None:
            where.append(f"step {step}")
        if bond is not None:
            where.append(f"bond {bond}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


def _rising(x: int, count: int) -> int:
    out = 1
    for i in range(count):
        out *= x + i
    return out


class Potential:
    """Common evaluation front end; subclasses supply ``_v``, ``_d1``, ``_d2``, ``_d3``."""

    name = "potential"
    minimum = 0.0

    def _domain_mask(self, x: np.ndarray) -> np.ndarray:
        return np.isfinite(x)

    def _prepare(self, x):
        arr = np.asarray(x, dtype=float)
        ok = self._domain_mask(arr)
        if not np.all(ok):
            bad = arr[~ok] if arr.ndim else arr
            first = float(np.ravel(bad)[0])
            raise DomainError(first, f"{self.name}: argument {first!r} outside the domain")
        return arr

    def _call(self, fn, x):
        arr = self._prepare(x)
        out = fn(arr)
        return float(out) if np.ndim(out) == 0 else out

    def value(self, x):
        return self._call(self._v, x)

    def __call__(self, x):
        return self.value(x)

    def d1(self, x):
        return self._call(self._d1, x)

    def d2(self, x):
        return self._call(self._d2, x)

    def d3(self, x):
        return self._call(self._d3, x)

    def in_domain(self, x) -> np.ndarray:
        return self._domain_mask(np.asarray(x, dtype=float))

    def derivatives_at_minimum(self, j_max: int) -> list[float]:
        """Exact ``[f''(r0), ..., f^(j_max)(r0)]`` at the minimum ``r0``."""
        raise NotImplementedError

    def kernel_spec(self) -> tuple[int, np.ndarray]:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Toda(Potential):
    lam: float = -2.0

    name = "toda"

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("Toda potential needs lam != 0")

    def _v(self, x):
        u = self.lam * x
        small = np.abs(u) < 1e-2
        # expm1(u) - u loses digits near the origin; use the series there
        series = u * u * (1 / 2 + u * (1 / 6 + u * (1 / 24 + u * (1 / 120 + u * (1 / 720 + u / 5040)))))
        with np.errstate(over="ignore"):
            closed = np.expm1(u) - u
        return np.where(small, series, closed) / self.lam ** 2

    def _d1(self, x):
        return np.expm1(self.lam * x) / self.lam

    def _d2(self, x):
        return np.exp(self.lam * x)

    def _d3(self, x):
        return self.lam * np.exp(self.lam * x)

    def derivatives_at_minimum(self, j_max):
        return [float(self.lam) ** (j - 2) for j in range(2, j_max + 1)]

    def kernel_spec(self):
        return KIND_TODA, np.array([self.lam], dtype=float)

    def describe(self):
        return {"family": "toda", "lambda": self.lam}


@dataclass(frozen=True)
class Mlj(Potential):
    """Mie-Lennard-Jones ``eps0/(n-m) [m (a/r)^n - n (a/r)^m]`` for ``r > 0``."""

    n: int = 12
    m: int = 6
    epsilon0: float = 1.0
    a: float = 1.0

    name = "mlj"

    def __post_init__(self):
        if not (int(self.n) == self.n and int(self.m) == self.m):
            raise ValueError("MLJ exponents must be integers")
        if not self.n > self.m >= 1:
            raise ValueError(f"MLJ needs n > m >= 1, got n={self.n}, m={self.m}")
        if not (self.epsilon0 > 0 and self.a > 0):
            raise ValueError("MLJ needs epsilon0 > 0 and a > 0")

    @property
    def minimum(self):
        return self.a

    def _domain_mask(self, x):
        return np.isfinite(x) & (x > 0)

    def _deriv(self, x, j):
        n, m, a = self.n, self.m, self.a
        sign = (-1) ** j
        pref = self.epsilon0 / (n - m) * sign / x ** j
        q = a / x
        return pref * (m * _rising(n, j) * q ** n - n * _rising(m, j) * q ** m)

    def _v(self, x):
        return self._deriv(x, 0)

    def _d1(self, x):
        return self._deriv(x, 1)

    def _d2(self, x):
        return self._deriv(x, 2)

    def _d3(self, x):
        return self._deriv(x, 3)

    def derivative(self, x, j: int):
        """Arbitrary-order derivative, closed form."""
        return self._call(lambda arr: self._deriv(arr, j), x)

    def derivatives_at_minimum(self, j_max):
        n, m, a, e0 = self.n, self.m, self.a, self.epsilon0
        # at r = a the bracket is (-1)^j [m (n)_j - n (m)_j], exact in integers
        return [e0 * (-1) ** j * (m * _rising(n, j) - n * _rising(m, j)) / (n - m) / a ** j
                for j in range(2, j_max + 1)]

    def kernel_spec(self):
        return KIND_MLJ, np.array([self.n, self.m, self.epsilon0, self.a], dtype=float)

    def normalized(self, lam: float = -2.0) -> "NormalizedMlj":
        return NormalizedMlj(self.n, self.m, lam)

    def describe(self):
        return {"family": "mlj", "n": self.n, "m": self.m,
                "epsilon0": self.epsilon0, "a": self.a}


@dataclass(frozen=True)
class NormalizedMlj(Potential):
    """lambda-normal form of the MLJ potential, defined for ``1 - lam*x/(n+m+3) > 0``."""

    n: int = 12
    m: int = 6
    lam: float = -2.0

    name = "mlj-normalized"
    taylor_cutoff = 1e-4

    def __post_init__(self):
        if not (int(self.n) == self.n and int(self.m) == self.m):
            raise ValueError("MLJ exponents must be integers")
        if not self.n > self.m >= 1:
            raise ValueError(f"MLJ needs n > m >= 1, got n={self.n}, m={self.m}")
        if self.lam == 0:
            raise ValueError("normalized MLJ needs lam != 0")

    @property
    def _K(self):
        return self.n + self.m + 3

    @property
    def pole(self) -> float:
        """Location of the repulsive wall's singularity."""
        return self._K / self.lam

    @cached_property
    def _series_k(self):
        return [normal_form.k_coeff_mlj(self.n, self.m, j) for j in (4, 5, 6)]

    @property
    def _denominator(self):
        return self.lam ** 2 * self.n * (self.n - self.m) / self._K ** 2

    def _domain_mask(self, x):
        return np.isfinite(x) & (1.0 - self.lam * x / self._K > 0)

    def _log_s(self, x):
        # s = 1/(1 - c x);  log s = -log1p(-c x)
        return -np.log1p(-(self.lam / self._K) * x)

    def _v(self, x):
        n, m = self.n, self.m
        L = self._log_s(x)
        closed = (np.expm1(n * L) - (n / m) * np.expm1(m * L)) / self._denominator
        small = np.abs(self.lam * x) < self.taylor_cutoff
        if np.any(small):
            series = normal_form.normal_form_series(self.lam, self._series_k, x, j_max=6)
            return np.where(small, series, closed)
        return closed

    def _d1(self, x):
        n, m = self.n, self.m
        c = self.lam / self._K
        L = self._log_s(x)
        return c * n * np.exp((m + 1) * L) * np.expm1((n - m) * L) / self._denominator

    def _d2(self, x):
        n, m = self.n, self.m
        c = self.lam / self._K
        L = self._log_s(x)
        return c * c * n * ((n + 1) * np.exp((n + 2) * L)
                            - (m + 1) * np.exp((m + 2) * L)) / self._denominator

    def _d3(self, x):
        n, m = self.n, self.m
        c = self.lam / self._K
        L = self._log_s(x)
        return c ** 3 * n * ((n + 1) * (n + 2) * np.exp((n + 3) * L)
                             - (m + 1) * (m + 2) * np.exp((m + 3) * L)) / self._denominator

    def derivatives_at_minimum(self, j_max):
        out = [1.0, self.lam]
        out += [normal_form.k_coeff_mlj(self.n, self.m, j) * self.lam ** (j - 2)
                for j in range(4, j_max + 1)]
        return out[: max(j_max - 1, 0)]

    def kernel_spec(self):
        return KIND_NMLJ, np.array([self.n, self.m, self.lam], dtype=float)

    def describe(self):
        return {"family": "mlj-normalized", "n": self.n, "m": self.m, "lambda": self.lam}


class _Polynomial(Potential):
    """``sum_i coeffs[i] * x**(i + 2)``."""

    @property
    def coeffs(self) -> tuple[float, ...]:
        raise NotImplementedError

    def _poly(self, x, order):
        c = np.zeros(len(self.coeffs) + 2)
        c[2:] = self.coeffs
        if order:
            c = P.polyder(c, order)
        return P.polyval(x, c)

    def _v(self, x):
        return self._poly(x, 0)

    def _d1(self, x):
        return self._poly(x, 1)

    def _d2(self, x):
        return self._poly(x, 2)

    def _d3(self, x):
        return self._poly(x, 3)

    def derivatives_at_minimum(self, j_max):
        c = self.coeffs
        return [math.factorial(j) * (c[j - 2] if j - 2 < len(c) else 0.0)
                for j in range(2, j_max + 1)]

    def kernel_spec(self):
        return KIND_POLY, np.array(self.coeffs, dtype=float)


@dataclass(frozen=True)
class TaylorToda(_Polynomial):
    """Toda potential truncated at ``xi**order``."""

    order: int = 3
    lam: float = -2.0

    name = "taylor"

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise ValueError(f"Taylor order must be an integer >= 2, got {self.order}")

    @property
    def coeffs(self):
        return tuple(self.lam ** (i - 2) / math.factorial(i) for i in range(2, self.order + 1))

    def describe(self):
        return {"family": "taylor", "order": self.order, "lambda": self.lam}


@dataclass(frozen=True)
class Fpu(_Polynomial):
    """``xi^2/2 + alpha xi^3/3 + beta xi^4/4 + gamma xi^5/5``."""

    alpha: float = -1.0
    beta: float = 0.0
    gamma: float = 0.0

    name = "fpu"

    @property
    def coeffs(self):
        return (0.5, self.alpha / 3.0, self.beta / 4.0, self.gamma / 5.0)

    @property
    def lam(self):
        """Third derivative at the origin."""
        return 2.0 * self.alpha

    def describe(self):
        return {"family": "fpu", "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}


@dataclass(frozen=True)
class RatioLimit(Potential):
    """Limit of the normalized MLJ potential as ``n -> oo`` with ``m = delta * n``."""

    delta: float = 0.5
    lam: float = -2.0

    name = "ratio-limit"

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.lam == 0:
            raise ValueError("ratio-limit potential needs lam != 0")

    @property
    def _b(self):
        return self.lam / (1 + self.delta)

    @property
    def _pref(self):
        d = self.delta
        return (1 + d) ** 2 / (self.lam ** 2 * d * (1 - d))

    def _v(self, x):
        d, b = self.delta, self._b
        return self._pref * (d * np.expm1(b * x) - np.expm1(d * b * x))

    def _dj(self, x, j):
        d, b = self.delta, self._b
        return self._pref * (d * b ** j * np.exp(b * x) - (d * b) ** j * np.exp(d * b * x))

    def _d1(self, x):
        return self._dj(x, 1)

    def _d2(self, x):
        return self._dj(x, 2)

    def _d3(self, x):
        return self._dj(x, 3)

    def derivatives_at_minimum(self, j_max):
        d, b = self.delta, self._b
        return [self._pref * d * b ** j * (1 - d ** (j - 1)) for j in range(2, j_max + 1)]

    def kernel_spec(self):
        return KIND_RATIO, np.array([self.delta, self.lam], dtype=float)

    def describe(self):
        return {"family": "ratio-limit", "delta": self.delta, "lambda": self.lam}


def morse_limit_eval(lam: float, x):
    """``(9/2) (exp(lam x / 3) - 1)^2``, a Morse form without the ``1/lam**2`` factor.

    For ``|lam| != 1`` this differs from ``RatioLimit(0.5, lam)`` by the factor
    ``lam**2``; see :func:`morse_limit_normalized` for the normalized version.
    """
    out = 4.5 * np.expm1(lam * np.asarray(x, dtype=float) / 3.0) ** 2
    return float(out) if np.ndim(out) == 0 else out


def morse_limit_normalized(lam: float, x):
    """Morse potential with unit curvature: ``morse_limit_eval(lam, x) / lam**2``."""
    out = morse_limit_eval(lam, x)
    return out / lam ** 2


def value(p: Potential, x):
    return p.value(x)


def d1(p: Potential, x):
    return p.d1(x)


def d2(p: Potential, x):
    return p.d2(x)


def d3(p: Potential, x):
    return p.d3(x)


def from_description(desc: dict) -> Potential:
    """Inverse of ``Potential.describe``."""
    family = desc["family"]
    if family == "toda":
        return Toda(desc["lambda"])
    if family == "mlj":
        return Mlj(int(desc["n"]), int(desc["m"]), desc.get("epsilon0", 1.0), desc.get("a", 1.0))
    if family == "mlj-normalized":
        return NormalizedMlj(int(desc["n"]), int(desc["m"]), desc["lambda"])
    if family == "taylor":
        return TaylorToda(int(desc["order"]), desc["lambda"])
    if family == "fpu":
        return Fpu(desc["alpha"], desc.get("beta", 0.0), desc.get("gamma", 0.0))
    if family == "ratio-limit":
        return RatioLimit(desc["delta"], desc["lambda"])
    raise ValueError(f"unknown potential family {family!r}")
