"""Nearest-neighbour chains: states, energy, forces and the canonical rescaling.

``N`` is the lattice size, i.e. the number of bonds.  With fixed ends the
walls sit at sites ``0`` and ``N`` and only the ``N - 1`` interior particles
are stored; on a periodic ring all ``N`` particles are stored.

In the molecular frame positions are absolute (``x_i = a*i`` at rest, chain
length ``L = N*a``) and the potential is the raw MLJ one.  In the normalized
frame positions are displacements and the mass is one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .potentials import DomainError, Mlj, NormalizedMlj, Potential


class Boundary(str, Enum):
    FIXED_ENDS = "fixed"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class Frame:
    """``kind`` is ``"normalized"`` or ``"molecular"``; ``a`` is the lattice spacing."""

    kind: str = "normalized"
    mass: float = 1.0
    a: float = 0.0
    epsilon0: float | None = None

    @classmethod
    def molecular(cls, mass: float, a: float, epsilon0: float | None = None) -> "Frame":
        return cls("molecular", float(mass), float(a), epsilon0)

    @property
    def is_molecular(self) -> bool:
        return self.kind == "molecular"


NORMALIZED = Frame()


@dataclass(frozen=True)
class ChainState:
    positions: np.ndarray
    momenta: np.ndarray
    boundary: Boundary = Boundary.FIXED_ENDS
    frame: Frame = field(default=NORMALIZED)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        mom = np.array(self.momenta, dtype=float)
        if pos.shape != mom.shape or pos.ndim != 1:
            raise ValueError("positions and momenta must be 1-d arrays of equal length")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "momenta", mom)
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def N(self) -> int:
        n = len(self.positions)
        return n + 1 if self.boundary is Boundary.FIXED_ENDS else n

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def length(self) -> float:
        return self.N * self.frame.a

    def copy(self) -> "ChainState":
        return replace(self, positions=self.positions.copy(), momenta=self.momenta.copy())

    def to_dict(self, **extra) -> dict:
        frame = "normalized" if not self.frame.is_molecular else {
            "kind": "molecular", "mass": self.frame.mass, "a": self.frame.a,
            "epsilon0": self.frame.epsilon0}
        out = {"N": self.N, "boundary": self.boundary.value, "frame": frame,
               "positions": self.positions.tolist(), "momenta": self.momenta.tolist()}
        out.update({k: v for k, v in extra.items() if v is not None})
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ChainState":
        frame = d.get("frame", "normalized")
        if isinstance(frame, dict):
            fr = Frame.molecular(frame["mass"], frame["a"], frame.get("epsilon0"))
        elif frame == "normalized":
            fr = NORMALIZED
        else:
            raise ValueError(f"unknown frame {frame!r}")
        state = cls(d["positions"], d["momenta"], Boundary(d["boundary"]), fr)
        if "N" in d and d["N"] != state.N:
            raise ValueError(f"snapshot N={d['N']} does not match {len(state.positions)} "
                             f"stored particles with {state.boundary.value} boundary")
        return state

    def to_json(self, **extra) -> str:
        return json.dumps(self.to_dict(**extra))

    @classmethod
    def from_json(cls, text: str) -> "ChainState":
        return cls.from_dict(json.loads(text))


def bonds(state: ChainState) -> np.ndarray:
    """The ``N`` bond lengths (molecular) or bond stretches (normalized)."""
    x = state.positions
    L = state.length
    if state.periodic:
        return np.append(np.diff(x), x[0] + L - x[-1])
    return np.concatenate([[x[0]], np.diff(x), [L - x[-1]]])


def _bond_values(fn, r: np.ndarray) -> np.ndarray:
    try:
        return fn(r)
    except DomainError as exc:
        bad = int(np.nonzero(r == exc.x)[0][0]) if np.any(r == exc.x) else None
        raise DomainError(exc.x, f"bond stretch {exc.x!r} outside the potential's domain",
                          bond=bad) from None


def potential_energy(state: ChainState, p: Potential) -> float:
    return float(np.sum(_bond_values(p.value, bonds(state))))


def kinetic_energy(state: ChainState) -> float:
    return float(np.dot(state.momenta, state.momenta)) / (2.0 * state.frame.mass)


def energy(state: ChainState, p: Potential) -> float:
    return kinetic_energy(state) + potential_energy(state, p)


def forces(state: ChainState, p: Potential) -> np.ndarray:
    """``-dU/dx_i``: derivative on the right bond minus derivative on the left bond."""
    f1 = _bond_values(p.d1, bonds(state))
    if state.periodic:
        return f1 - np.roll(f1, 1)
    return f1[1:] - f1[:-1]


def equilibrium(N: int, boundary: Boundary = Boundary.FIXED_ENDS,
                frame: Frame = NORMALIZED) -> ChainState:
    boundary = Boundary(boundary)
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    sites = np.arange(1, N) if boundary is Boundary.FIXED_ENDS else np.arange(N)
    pos = sites * frame.a if frame.is_molecular else np.zeros(len(sites))
    return ChainState(pos, np.zeros(len(sites)), boundary, frame)


@dataclass(frozen=True)
class CanonicalMap:
    """Two-step canonical rescaling from the molecular MLJ chain to the normalized one.

    ``x_i = a (i + w zeta_i)``, ``p_i = a sqrt(mass Phi''(a)) w eta_i`` and
    ``t = sqrt(mass / Phi''(a)) tau``.
    """

    potential: Mlj
    mass: float = 1.0
    lam: float = -2.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.lam == 0:
            raise ValueError("lam must be nonzero")

    @property
    def a(self) -> float:
        return self.potential.a

    @property
    def phi2a(self) -> float:
        return self.potential.derivatives_at_minimum(2)[0]

    @property
    def phi3a(self) -> float:
        return self.potential.derivatives_at_minimum(3)[1]

    @property
    def w(self) -> float:
        return self.lam * self.phi2a / (self.a * self.phi3a)

    @property
    def time_scale(self) -> float:
        return math.sqrt(self.mass / self.phi2a)

    @property
    def valence1(self) -> float:
        return self.a ** 2 * math.sqrt(self.mass * self.phi2a)

    @property
    def valence2(self) -> float:
        return self.w ** 2

    @property
    def energy_scale(self) -> float:
        """Factor ``a^2 Phi''(a) w^2`` between molecular and normalized energies."""
        return self.a ** 2 * self.phi2a * self.w ** 2

    def energy_offset(self, N: int) -> float:
        return N * float(self.potential.value(self.a))

    @property
    def frame(self) -> Frame:
        return Frame.molecular(self.mass, self.a, self.potential.epsilon0)

    def normalized_potential(self) -> NormalizedMlj:
        return NormalizedMlj(self.potential.n, self.potential.m, self.lam)

    def _sites(self, state: ChainState) -> np.ndarray:
        n = len(state.positions)
        return np.arange(1, n + 1) if state.boundary is Boundary.FIXED_ENDS else np.arange(n)

    def to_normalized(self, state: ChainState) -> ChainState:
        if not state.frame.is_molecular:
            raise ValueError("to_normalized expects a molecular-frame state")
        if not (math.isclose(state.frame.a, self.a) and math.isclose(state.frame.mass, self.mass)):
            raise ValueError("state frame does not match this map's (a, mass)")
        Q = state.positions / self.a - self._sites(state)
        P = state.momenta / (self.a * math.sqrt(self.mass * self.phi2a))
        return ChainState(Q / self.w, P / self.w, state.boundary, NORMALIZED)

    def to_molecular(self, state: ChainState) -> ChainState:
        if state.frame.is_molecular:
            raise ValueError("to_molecular expects a normalized-frame state")
        Q = self.w * state.positions
        P = self.w * state.momenta
        x = self.a * (self._sites(state) + Q)
        p = self.a * math.sqrt(self.mass * self.phi2a) * P
        return ChainState(x, p, state.boundary, self.frame)


def member_rng(seed: int, stream: int = 0, purpose: int = 0) -> np.random.Generator:
    """Independent PCG64 stream for ensemble member ``stream``."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(purpose)))))


def sample_state(N: int, eps: float, boundary: Boundary = Boundary.FIXED_ENDS,
                 seed: int = 0, stream: int = 0) -> ChainState:
    """Equilibrium positions with Gaussian momenta scaled to specific energy ``eps``.

    Periodic rings get zero total momentum.  The potential energy is zero at
    equilibrium for every normalized potential, so the energy is all kinetic.
    """
    boundary = Boundary(boundary)
    if not eps > 0:
        raise ValueError(f"specific energy must be positive, got {eps}")
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    state = equilibrium(N, boundary)
    rng = member_rng(seed, stream)
    p = rng.standard_normal(len(state.positions))
    if boundary is Boundary.PERIODIC:
        p -= p.mean()
    p *= math.sqrt(2.0 * N * eps / float(np.dot(p, p)))
    return ChainState(state.positions, p, boundary, NORMALIZED)
