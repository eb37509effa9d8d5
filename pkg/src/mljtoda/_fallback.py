"""Pure numpy implementation of the ``_kernels`` entry points.

Used when the compiled extension is unavailable (or ``MLJTODA_PURE_PYTHON=1``).
Same signatures and status codes; roughly two orders of magnitude slower.
"""

import math

import numpy as np

KIND_TODA, KIND_MLJ, KIND_NMLJ, KIND_POLY, KIND_RATIO = range(5)


def _pair_derivs(kind, params):
    """Return ``f(r) -> (ok, d1, d2)`` for the encoded pair potential."""
    if kind == KIND_TODA:
        lam = params[0]

        def f(r):
            e = np.exp(lam * r)
            return True, (e - 1.0) / lam, e
    elif kind == KIND_NMLJ:
        n, m, lam = int(params[0]), int(params[1]), params[2]
        K = n + m + 3
        D = lam * lam * n * (n - m) / (K * K)
        c = lam / K

        def f(r):
            u = 1.0 - c * r
            if not np.all(u > 0):
                return False, None, None
            s = 1.0 / u
            sn, sm = s ** n, s ** m
            return (True, c * n / D * s * (sn - sm),
                    c * c * n / D * s * s * ((n + 1) * sn - (m + 1) * sm))
    elif kind == KIND_POLY:
        coef = np.asarray(params, dtype=float)
        powers = np.arange(2, 2 + len(coef))
        c1 = np.concatenate([[0.0], coef * powers])            # powers 1..J
        c2 = coef * powers * (powers - 1)                      # powers 0..J-2

        def f(r):
            return (True, np.polynomial.polynomial.polyval(r, c1),
                    np.polynomial.polynomial.polyval(r, c2))
    elif kind == KIND_MLJ:
        n, m, e0, a = int(params[0]), int(params[1]), params[2], params[3]
        scale = e0 * n * m / (n - m)

        def f(r):
            if not np.all(r > 0):
                return False, None, None
            q = a / r
            qn, qm = q ** n, q ** m
            return True, scale / r * (qm - qn), scale / (r * r) * ((n + 1) * qn - (m + 1) * qm)
    elif kind == KIND_RATIO:
        delta, lam = params[0], params[1]
        b = lam / (1.0 + delta)
        pref = (1.0 + delta) ** 2 / (lam * lam * delta * (1.0 - delta))

        def f(r):
            e1, e2 = np.exp(b * r), np.exp(delta * b * r)
            return True, pref * delta * b * (e1 - e2), pref * delta * b * b * (e1 - delta * e2)
    else:
        raise ValueError(f"unknown potential kind {kind}")
    return f


class _Chain:
    def __init__(self, kind, params, periodic, length, inv_mass):
        self.pair = _pair_derivs(kind, params)
        self.periodic = bool(periodic)
        self.length = length
        self.inv_mass = inv_mass
        self.bd2 = None

    def bonds(self, x):
        if self.periodic:
            return np.append(np.diff(x), x[0] + self.length - x[-1])
        return np.concatenate([[x[0]], np.diff(x), [self.length - x[-1]]])

    def forces(self, x):
        """Forces on the moving particles, or the index of the first bad bond."""
        r = self.bonds(x)
        with np.errstate(over="ignore", invalid="ignore"):
            ok, b1, b2 = self.pair(r)
        if not ok:
            bad = np.nonzero(~self._domain(r))[0]
            return None, int(bad[0]) if len(bad) else 0
        self.bd2 = b2
        if self.periodic:
            return b1 - np.roll(b1, 1), -1
        return b1[1:] - b1[:-1], -1

    def _domain(self, r):
        ok = np.ones(len(r), dtype=bool)
        for k, rk in enumerate(r):
            ok[k] = self.pair(np.array([rk]))[0]
        return ok

    def tangent_force(self, dx):
        b2 = self.bd2
        if self.periodic:
            right = b2 * (np.roll(dx, -1) - dx)
            return right - np.roll(right, 1)
        ext = np.concatenate([[0.0], dx, [0.0]])
        tension = b2 * np.diff(ext)
        return tension[1:] - tension[:-1]


def _substeps(scheme, dt):
    if scheme == 0:
        return [dt]
    if scheme == 1:
        c = float(np.cbrt(2.0))
        w1 = 1.0 / (2.0 - c)
        w0 = -c * w1
        return [w1 * dt, w0 * dt, w1 * dt]
    raise ValueError(f"unknown scheme {scheme}")


def _finite(x, p):
    return bool(np.all(np.isfinite(x)) and np.all(np.isfinite(p)))


def _step(ch, x, p, force, hs, dx=None, dp=None):
    for h in hs:
        p += 0.5 * h * force
        if dx is not None:
            dp += 0.5 * h * ch.tangent_force(dx)
        x += h * ch.inv_mass * p
        if dx is not None:
            dx += h * ch.inv_mass * dp
        force, bad = ch.forces(x)
        if force is None:
            return None, bad
        p += 0.5 * h * force
        if dx is not None:
            dp += 0.5 * h * ch.tangent_force(dx)
    return force, -1


@np.errstate(all="ignore")
def integrate(x, p, kind, params, periodic, length, inv_mass, dt, scheme, nsteps):
    ch = _Chain(kind, params, periodic, length, inv_mass)
    hs = _substeps(scheme, dt)
    force, bad = ch.forces(x)
    if force is None:
        return 1, 0, bad
    k = 0
    while k < nsteps:
        force, bad = _step(ch, x, p, force, hs)
        k += 1
        if force is None:
            return 1, k, bad
        if not _finite(x, p):
            return 2, k, -1
    return 0, k, -1


@np.errstate(all="ignore")
def integrate_tangent(x, p, dx, dp, kind, params, periodic, length, inv_mass, dt, scheme,
                      nsteps, renorm, record_steps, out, acc_log):
    ch = _Chain(kind, params, periodic, length, inv_mass)
    hs = _substeps(scheme, dt)
    force, bad = ch.forces(x)
    if force is None:
        return 1, 0, bad, acc_log
    irec, nrec = 0, len(record_steps)
    k = 0
    while k < nsteps:
        force, bad = _step(ch, x, p, force, hs, dx, dp)
        k += 1
        if force is None:
            return 1, k, bad, acc_log
        if not _finite(x, p):
            return 2, k, -1, acc_log
        due = k % renorm == 0
        if due or (irec < nrec and record_steps[irec] == k):
            nrm = math.sqrt(float(np.dot(dx, dx) + np.dot(dp, dp)))
            if not (math.isfinite(nrm) and nrm > 0):
                return 2, k, -1, acc_log
            while irec < nrec and record_steps[irec] == k:
                out[irec] = acc_log + math.log(nrm)
                irec += 1
            if due:
                acc_log += math.log(nrm)
                dx /= nrm
                dp /= nrm
    return 0, k, -1, acc_log


@np.errstate(all="ignore")
def integrate_until_crossing(x, p, kind, params, periodic, length, inv_mass, dt, scheme, w,
                             max_steps, xprev, pprev):
    ch = _Chain(kind, params, periodic, length, inv_mass)
    hs = _substeps(scheme, dt)
    force, bad = ch.forces(x)
    if force is None:
        return 1, 0, bad, False
    s_new = float(np.dot(w, x))
    k = 0
    while k < max_steps:
        xprev[:] = x
        pprev[:] = p
        s_old = s_new
        force, bad = _step(ch, x, p, force, hs)
        k += 1
        if force is None:
            return 1, k, bad, False
        if not _finite(x, p):
            return 2, k, -1, False
        s_new = float(np.dot(w, x))
        if s_old < 0.0 and s_new >= 0.0:
            return 0, k, -1, True
    return 0, k, -1, False
