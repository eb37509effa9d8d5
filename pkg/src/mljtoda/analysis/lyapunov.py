"""Ensemble-averaged finite-time Lyapunov indicator of long chains.

For each ensemble member a random state at specific energy ``eps`` and a
random unit tangent vector are drawn from the member's own random stream;
the tangent vector is carried along by the linearized flow and
``chi(t) = log(|u(t)| / |u(0)|) / t`` is recorded on a geometric time grid.
The indicator is the arithmetic mean over members.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..chain import Boundary, ChainState, member_rng, sample_state
from ..dynamics import IntegratorConfig, TangentVector, advance_with_tangent
from ..potentials import DomainError, Potential


@dataclass
class LyapunovSeries:
    times: np.ndarray
    chi_mean: np.ndarray
    chi_samples: np.ndarray
    n_samples: int
    seed: int
    potential: dict = field(default_factory=dict)
    N: int = 0
    eps: float = 0.0
    dt: float = 0.0
    scheme: str = ""
    boundary: str = Boundary.FIXED_ENDS.value
    failures: list[str] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.failures

    @property
    def _finished(self) -> np.ndarray:
        ok = ~np.any(np.isnan(self.chi_samples), axis=1)
        return self.chi_samples[ok] if ok.any() else np.full((1, len(self.times)), np.nan)

    @property
    def chi_min(self) -> np.ndarray:
        return self._finished.min(axis=0)

    @property
    def chi_max(self) -> np.ndarray:
        return self._finished.max(axis=0)

    def at(self, t: float) -> float:
        """``chi_mean`` at the grid time closest to ``t``."""
        return float(self.chi_mean[int(np.argmin(np.abs(self.times - t)))])

    def metadata(self) -> dict:
        return {"potential": self.potential, "N": self.N, "eps": self.eps, "dt": self.dt,
                "scheme": self.scheme, "boundary": self.boundary, "seed": self.seed,
                "n_samples": self.n_samples, "complete": self.complete,
                "failures": self.failures}


def time_grid(dt: float, t_max: float, per_decade: int = 50, t_min: float | None = None):
    """Step counts and times, geometric from ``10*dt`` to ``t_max``, always ending at ``t_max``."""
    t_min = 10 * dt if t_min is None else t_min
    total = int(round(t_max / dt))
    first = max(1, int(round(t_min / dt)))
    if total < first:
        raise ValueError(f"t_max={t_max} is shorter than the first grid time {t_min}")
    decades = math.log10(total / first)
    count = max(2, int(math.ceil(decades * per_decade)) + 1)
    steps = np.unique(np.rint(np.geomspace(first, total, count)).astype(np.int64))
    return steps, steps * dt


def finite_time_chi(state: ChainState, u: TangentVector, p: Potential, cfg: IntegratorConfig,
                    steps: np.ndarray) -> np.ndarray:
    """``chi`` at the given step counts along one trajectory."""
    steps = np.asarray(steps, dtype=np.int64)
    _, _, _, logs = advance_with_tangent(state, u, p, cfg, int(steps[-1]), record_steps=steps)
    return logs / (steps * cfg.dt)


def member_initial_data(N: int, eps: float, boundary: Boundary, seed: int, member: int):
    state = sample_state(N, eps, boundary, seed, stream=member)
    u = TangentVector.random(len(state.positions), member_rng(seed, member, purpose=1),
                             zero_mean=state.periodic)
    return state, u


def lyapunov_series(p: Potential, N: int = 32, eps: float = 0.1, t_max: float = 1e5,
                    n_samples: int = 24, seed: int = 0, cfg: IntegratorConfig | None = None,
                    boundary: Boundary = Boundary.FIXED_ENDS, threads: int = 1,
                    per_decade: int = 50) -> LyapunovSeries:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    cfg = cfg or IntegratorConfig()
    boundary = Boundary(boundary)
    steps, times = time_grid(cfg.dt, t_max, per_decade)

    def run(member):
        state, u = member_initial_data(N, eps, boundary, seed, member)
        try:
            return finite_time_chi(state, u, p, cfg, steps), None
        except DomainError as exc:
            return np.full(len(steps), np.nan), f"member {member}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(n_samples)))
    else:
        results = [run(k) for k in range(n_samples)]
    samples = np.vstack([r[0] for r in results])
    failures = [r[1] for r in results if r[1] is not None]
    out = LyapunovSeries(times=times, chi_mean=np.empty(0), chi_samples=samples,
                         n_samples=n_samples, seed=int(seed), potential=p.describe(), N=N,
                         eps=float(eps), dt=cfg.dt, scheme=cfg.scheme,
                         boundary=boundary.value, failures=failures)
    # aborted members are excluded from the mean
    out.chi_mean = out._finished.mean(axis=0)
    return out
