"""Three particles on a ring, reduced to two degrees of freedom.

With the baricenter at rest the configuration lives in the plane
``zeta_0 + zeta_1 + zeta_2 = 0``.  The orthonormal basis

    e_X = (1, 1, -2) / sqrt(6),    e_Y = (1, -1, 0) / sqrt(2)

gives canonical coordinates ``(X, Y, PX, PY)`` (momenta transform with the
same matrix).  For the cubic Toda truncation the reduced Hamiltonian is six
times the Henon-Heiles Hamiltonian after ``X = sqrt(2) x``, ``Y = -sqrt(2) y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..chain import Boundary, ChainState, NORMALIZED
from ..potentials import Potential

E_X = np.array([1.0, 1.0, -2.0]) / math.sqrt(6.0)
E_Y = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)
BASIS = np.vstack([E_X, E_Y])

HH_SCALE = math.sqrt(2.0)
HH_ENERGY_FACTOR = 6.0
#: Henon-Heiles coefficients of x^i y^j for (x^2 + y^2)/2 + x^2 y - y^3/3
HH_COEFFS = {(2, 0): 0.5, (0, 2): 0.5, (2, 1): 1.0, (0, 3): -1.0 / 3.0}


@dataclass(frozen=True)
class ReducedRingCoords:
    X: float
    Y: float
    PX: float
    PY: float

    @property
    def kinetic(self) -> float:
        return 0.5 * (self.PX ** 2 + self.PY ** 2)


def reduce_ring3(state: ChainState, tol: float = 1e-12) -> ReducedRingCoords:
    if state.boundary is not Boundary.PERIODIC or len(state.positions) != 3:
        raise ValueError("reduce_ring3 needs a periodic ring of three particles")
    total = float(np.sum(state.momenta))
    if abs(total) > tol * max(1.0, float(np.max(np.abs(state.momenta)))):
        raise ValueError(f"total momentum {total!r} is not zero")
    X, Y = BASIS @ state.positions
    PX, PY = BASIS @ state.momenta
    return ReducedRingCoords(float(X), float(Y), float(PX), float(PY))


def expand_ring3(rc: ReducedRingCoords) -> ChainState:
    """Zero-baricenter ring state with the given reduced coordinates."""
    zeta = rc.X * E_X + rc.Y * E_Y
    eta = rc.PX * E_X + rc.PY * E_Y
    return ChainState(zeta, eta, Boundary.PERIODIC, NORMALIZED)


def ring_bonds(X, Y):
    """Bond stretches ``(zeta_1 - zeta_0, zeta_2 - zeta_1, zeta_0 - zeta_2)``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    z0 = X * E_X[0] + Y * E_Y[0]
    z1 = X * E_X[1] + Y * E_Y[1]
    z2 = X * E_X[2]
    return z1 - z0, z2 - z1, z0 - z2


def ring_potential(p: Potential, X, Y):
    r0, r1, r2 = ring_bonds(X, Y)
    out = p.value(r0) + p.value(r1) + p.value(r2)
    return out


def reduced_hamiltonian(p: Potential, rc: ReducedRingCoords) -> float:
    return rc.kinetic + float(ring_potential(p, rc.X, rc.Y))


def to_henon_heiles(rc: ReducedRingCoords) -> tuple[float, float, float, float]:
    """``(x, y, px, py)`` with ``H_ring = 6 H_HH``; HH time runs ``sqrt(3)`` times faster."""
    s = HH_SCALE
    sp = math.sqrt(HH_ENERGY_FACTOR)
    return rc.X / s, -rc.Y / s, rc.PX / sp, -rc.PY / sp


def _monomials(deg: int):
    return [(i, j) for total in range(deg + 1) for i, j in
            ((i, total - i) for i in range(total, -1, -1))]


def henon_heiles_fit(p: Potential, half_width: float = 0.25, points: int = 21,
                     degree: int = 4) -> dict[tuple[int, int], float]:
    """Least-squares polynomial coefficients of ``V_ring(sqrt2 x, -sqrt2 y) / 6``.

    Keys are exponent pairs ``(i, j)`` of ``x^i y^j`` up to total ``degree``.
    """
    g = np.linspace(-half_width, half_width, points)
    x, y = (a.ravel() for a in np.meshgrid(g, g))
    v = ring_potential(p, HH_SCALE * x, -HH_SCALE * y) / HH_ENERGY_FACTOR
    mons = _monomials(degree)
    A = np.column_stack([x ** i * y ** j for i, j in mons])
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    return dict(zip(mons, (float(c) for c in coef)))


def henon_heiles_mismatch(fit: dict[tuple[int, int], float]) -> float:
    """Largest coefficient difference from the Henon-Heiles potential."""
    keys = set(fit) | set(HH_COEFFS)
    return max(abs(fit.get(k, 0.0) - HH_COEFFS.get(k, 0.0)) for k in keys)


__all__ = [
    "BASIS", "E_X", "E_Y", "HH_COEFFS", "ReducedRingCoords", "expand_ring3",
    "henon_heiles_fit", "henon_heiles_mismatch", "reduce_ring3", "reduced_hamiltonian",
    "ring_bonds", "ring_potential", "to_henon_heiles",
]
