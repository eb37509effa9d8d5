"""Affine lambda-normalization of potentials with a generic minimum.

A function ``f`` with ``f'(a) = 0``, ``f''(a) > 0`` and ``f'''(a) != 0`` is
mapped onto ``A*f(C*xi + D) + B`` whose value, slope, curvature and third
derivative at the origin are ``0, 0, 1, lambda``.  Its Taylor series is then

    xi**2/2 + lambda*xi**3/6 + sum_{j>=4} k_j * lambda**(j-2) * xi**j / j!

and the dimensionless numbers ``k_j`` label the equivalence class.  The Toda
class has ``k_j = 1`` for every ``j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np


class ClassConditionError(ValueError):
    """The input does not describe a non-degenerate minimum."""

    def __init__(self, condition: str):
        super().__init__(f"class condition violated: {condition}")
        self.condition = condition


@dataclass(frozen=True)
class AffineNormalization:
    """The map ``f -> A*f(C*xi + D) + B``."""

    A: float
    B: float
    C: float
    D: float
    lam: float

    def apply(self, f: Callable, xi):
        return self.A * f(self.C * np.asarray(xi, dtype=float) + self.D) + self.B

    def inverse_argument(self, r):
        """Normalized coordinate corresponding to the original argument ``r``."""
        return (np.asarray(r, dtype=float) - self.D) / self.C


@dataclass(frozen=True)
class CoefficientSequence:
    lam: float
    k: tuple[float, ...]
    j_start: int = 4

    @property
    def j_max(self) -> int:
        return self.j_start + len(self.k) - 1

    def k_j(self, j: int) -> float:
        if not self.j_start <= j <= self.j_max:
            raise IndexError(f"k_{j} not available (have j={self.j_start}..{self.j_max})")
        return self.k[j - self.j_start]

    def deltas(self) -> tuple[float, ...]:
        return tuple(kj - 1.0 for kj in self.k)

    def series(self, xi, j_max: int | None = None):
        """Evaluate the truncated normal-form series at ``xi``."""
        return normal_form_series(self.lam, self.k, xi, j_max=j_max)


def normal_form_series(lam: float, k: Sequence[float], xi, j_max: int | None = None):
    """``xi^2/2 + lam xi^3/6 + sum_{j=4}^{j_max} k_j lam^(j-2) xi^j / j!``."""
    xi = np.asarray(xi, dtype=float)
    if j_max is None:
        j_max = 3 + len(k)
    if j_max - 3 > len(k):
        raise ValueError(f"need k_4..k_{j_max}, got {len(k)} coefficients")
    coeffs = [1.0 / 2.0, lam / 6.0]
    coeffs += [k[j - 4] * lam ** (j - 2) / math.factorial(j) for j in range(4, j_max + 1)]
    out = np.zeros_like(xi)
    for c in reversed(coeffs):
        out = (out + c) * xi
    return out * xi


def normalize_generic(derivs: Sequence[float], f_at_a: float, a: float, lam: float
                      ) -> tuple[AffineNormalization, CoefficientSequence]:
    """Normalize a potential given its derivatives at the minimum.

    Parameters
    ----------
    derivs
        ``[f''(a), f'''(a), f''''(a), ...]``; at least the first two entries.
    f_at_a
        ``f(a)``.
    a
        Location of the minimum (``f'(a) = 0`` is assumed, not checked).
    lam
        Target third derivative of the normal form.

    Returns
    -------
    The affine map and the coefficients ``k_4 .. k_jmax``.
    """
    if len(derivs) < 2:
        raise ValueError("need at least f''(a) and f'''(a)")
    f2, f3 = float(derivs[0]), float(derivs[1])
    if not f2 > 0:
        raise ClassConditionError("f''(a) > 0")
    if f3 == 0:
        raise ClassConditionError("f'''(a) != 0")
    if lam == 0:
        raise ClassConditionError("lambda != 0")

    A = f3 ** 2 / (lam ** 2 * f2 ** 3)
    C = lam * f2 / f3
    norm = AffineNormalization(A=A, B=-A * f_at_a, C=C, D=float(a), lam=float(lam))
    k = tuple(f2 ** (j - 3) * float(fj) / f3 ** (j - 2)
              for j, fj in enumerate(derivs[2:], start=4))
    return norm, CoefficientSequence(lam=float(lam), k=k)


def _rising(x: int, count: int) -> int:
    """``(x+1)(x+2)...(x+count)``."""
    out = 1
    for i in range(1, count + 1):
        out *= x + i
    return out


def k_coeff_mlj_exact(n: int, m: int, j: int) -> Fraction:
    """Closed-form ``k_{nm,j}`` of the normalized Mie-Lennard-Jones potential."""
    n, m, j = int(n), int(m), int(j)
    if not n > m >= 1:
        raise ValueError(f"need n > m >= 1, got n={n}, m={m}")
    if j < 4:
        raise ValueError(f"need j >= 4, got {j}")
    num = _rising(n, j - 1) - _rising(m, j - 1)
    den = (n - m) * (n + m + 3) ** (j - 2)
    return Fraction(num, den)


def k_coeff_mlj(n: int, m: int, j: int) -> float:
    return float(k_coeff_mlj_exact(n, m, j))


def delta4_closed_form(n: int, m: int) -> Fraction:
    """``Delta_4 = (2 - n m) / (n + m + 3)^2`` as an exact rational."""
    return Fraction(2 - n * m, (n + m + 3) ** 2)


def mlj_coefficients(n: int, m: int, lam: float, j_max: int) -> CoefficientSequence:
    return CoefficientSequence(lam=float(lam),
                               k=tuple(k_coeff_mlj(n, m, j) for j in range(4, j_max + 1)))


@dataclass(frozen=True)
class DeltaRow:
    n_over_m: int
    n: int
    j: int
    delta: float


def delta_table(m: int, j_list: Sequence[int], n_over_m_max: int) -> list[DeltaRow]:
    """Rows ``(n/m, n, j, Delta_j)`` for ``n = 2m, 3m, ..., n_over_m_max*m``."""
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    for j in j_list:
        if j < 4:
            raise ValueError(f"need j >= 4, got {j}")
    rows = []
    for q in range(2, n_over_m_max + 1):
        n = q * m
        for j in j_list:
            rows.append(DeltaRow(q, n, j, float(k_coeff_mlj_exact(n, m, j) - 1)))
    return rows


def fpu_delta4(alpha: float, beta: float) -> float:
    """Quartic mismatch of an FPU chain with the Toda chain of equal cubic term."""
    if alpha == 0:
        raise ClassConditionError("alpha != 0 (the Toda-matching quartic is undefined)")
    return 3.0 * beta / (2.0 * alpha ** 2) - 1.0
