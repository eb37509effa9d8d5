"""Symplectic integration of chain trajectories and of their tangent vectors."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import chain as chain_mod
from ._backend import kernels
from .chain import ChainState
from .potentials import DomainError, Potential

SCHEMES = {"verlet": 0, "yoshida4": 1}


class IntegrationError(DomainError):
    """A bond left the potential's domain (or the state blew up) during a step."""


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.02
    scheme: str = "yoshida4"
    renorm_interval: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if int(self.renorm_interval) != self.renorm_interval or self.renorm_interval < 1:
            raise ValueError("renorm_interval must be a positive integer")

    @property
    def scheme_code(self) -> int:
        return SCHEMES[self.scheme]


@dataclass
class TangentVector:
    dpos: np.ndarray
    dmom: np.ndarray

    def __post_init__(self):
        self.dpos = np.array(self.dpos, dtype=float)
        self.dmom = np.array(self.dmom, dtype=float)

    @property
    def norm(self) -> float:
        return math.sqrt(float(np.dot(self.dpos, self.dpos) + np.dot(self.dmom, self.dmom)))

    def normalized(self) -> "TangentVector":
        n = self.norm
        return TangentVector(self.dpos / n, self.dmom / n)

    def copy(self) -> "TangentVector":
        return TangentVector(self.dpos.copy(), self.dmom.copy())

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, zero_mean: bool = False) -> "TangentVector":
        v = rng.standard_normal(2 * n)
        dpos, dmom = v[:n], v[n:]
        if zero_mean:
            dpos -= dpos.mean()
            dmom -= dmom.mean()
        return cls(dpos, dmom).normalized()


def symplectic_form(u: TangentVector, v: TangentVector) -> float:
    """``omega(u, v) = sum(du_q dv_p - du_p dv_q)``."""
    return float(np.dot(u.dpos, v.dmom) - np.dot(u.dmom, v.dpos))


def _kernel_args(state: ChainState, p: Potential):
    kind, params = p.kernel_spec()
    return kind, params, state.periodic, state.length, 1.0 / state.frame.mass


def _raise_status(status: int, step: int, bond: int, step_offset: int = 0):
    if status == 1:
        raise IntegrationError(None, "bond left the potential's domain",
                               bond=bond, step=step_offset + step)
    if status == 2:
        raise IntegrationError(None, "state became non-finite", step=step_offset + step)


def max_frequency(state: ChainState, p: Potential) -> float:
    """``sqrt(4 max V''/mass)``, the top of the linearized chain spectrum."""
    r = chain_mod.bonds(state)
    try:
        k = float(np.max(p.d2(r)))
    except DomainError:
        return math.inf
    return math.sqrt(max(k, 0.0) * 4.0 / state.frame.mass)


def check_step_size(state: ChainState, p: Potential, cfg: IntegratorConfig) -> None:
    omega = max_frequency(state, p)
    if cfg.dt * omega >= 0.5:
        warnings.warn(f"dt*omega_max = {cfg.dt * omega:.3g} >= 0.5; the step may be too large",
                      RuntimeWarning, stacklevel=3)


def advance(state: ChainState, p: Potential, cfg: IntegratorConfig, nsteps: int,
            step_offset: int = 0) -> ChainState:
    """Return the state after ``nsteps`` steps of size ``cfg.dt``."""
    out = state.copy()
    if nsteps <= 0:
        return out
    kind, params, periodic, length, inv_mass = _kernel_args(state, p)
    status, step, bond = kernels.integrate(out.positions, out.momenta, kind, params, periodic,
                                           length, inv_mass, cfg.dt, cfg.scheme_code,
                                           int(nsteps))
    _raise_status(status, step, bond, step_offset)
    return out


def step(state: ChainState, p: Potential, cfg: IntegratorConfig) -> ChainState:
    """One symplectic step (Verlet kick-drift-kick, or its Yoshida composition)."""
    return advance(state, p, cfg, 1)


def advance_with_tangent(state: ChainState, u: TangentVector, p: Potential,
                         cfg: IntegratorConfig, nsteps: int,
                         record_steps: Sequence[int] = (), renormalize: bool = True,
                         step_offset: int = 0):
    """Advance state and tangent vector ``nsteps`` steps.

    Returns ``(state, u, log_growth, recorded)`` where ``log_growth`` is the
    total ``log(|u_final| / |u_initial|)`` and ``recorded[i]`` the same
    quantity at step ``record_steps[i]``.  With ``renormalize`` the vector is
    rescaled every ``cfg.renorm_interval`` steps, which leaves the
    accumulated growth unchanged, and the returned ``u`` has unit norm;
    without it ``u`` is the linearized flow applied to the input vector.
    """
    out = state.copy()
    n0 = u.norm
    v = u.normalized()
    rec = np.ascontiguousarray(record_steps, dtype=np.int64)
    if np.any(np.diff(rec) < 0) or (len(rec) and (rec[0] < 1 or rec[-1] > nsteps)):
        raise ValueError("record_steps must be sorted and within 1..nsteps")
    recorded = np.full(len(rec), np.nan)
    renorm = cfg.renorm_interval if renormalize else max(int(nsteps) + 1, 1)
    kind, params, periodic, length, inv_mass = _kernel_args(state, p)
    status, stp, bond, acc = kernels.integrate_tangent(
        out.positions, out.momenta, v.dpos, v.dmom, kind, params, periodic, length, inv_mass,
        cfg.dt, cfg.scheme_code, int(nsteps), int(renorm), rec, recorded, 0.0)
    _raise_status(status, stp, bond, step_offset)
    log_growth = acc + math.log(v.norm)
    v = v.normalized() if renormalize else TangentVector(v.dpos * n0, v.dmom * n0)
    return out, v, log_growth, recorded


def step_with_tangent(state: ChainState, u: TangentVector, p: Potential,
                      cfg: IntegratorConfig):
    """One step of the state and of the linearized flow along it."""
    new, v, _, _ = advance_with_tangent(state, u, p, cfg, 1, renormalize=False)
    return new, v


Observer = Callable[[int, float, ChainState], None]


def n_steps(t_final: float, dt: float) -> int:
    return int(round(t_final / dt))


def evolve(state: ChainState, p: Potential, cfg: IntegratorConfig, t_final: float,
           observers: Iterable[Observer] = (), stride: int = 1) -> ChainState:
    """Integrate to ``t_final`` (rounded to a whole number of steps).

    Each observer is called as ``obs(step, time, state)`` at step 0 and every
    ``stride`` steps after.  The trajectory does not depend on ``stride``.
    """
    if not t_final > 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    observers = list(observers)
    check_step_size(state, p, cfg)
    total = n_steps(t_final, cfg.dt)
    current = state.copy()
    done = 0
    for obs in observers:
        obs(0, 0.0, current)
    chunk = stride if observers else total
    while done < total:
        k = min(chunk, total - done)
        current = advance(current, p, cfg, k, step_offset=done)
        done += k
        if observers and done % stride == 0:
            for obs in observers:
                obs(done, done * cfg.dt, current)
    return current
