# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: symplectic chain steps, tangent dynamics, section stops.

Signatures mirror ``_fallback``; arrays are updated in place.  Status codes:
0 ok, 1 bond outside the potential's domain, 2 non-finite state.
"""

from libc.math cimport exp, log, sqrt, isfinite, cbrt
from libc.stdlib cimport malloc, free

cdef enum:
    MAX_COEF = 64

cdef enum:
    KIND_TODA = 0
    KIND_MLJ = 1
    KIND_NMLJ = 2
    KIND_POLY = 3
    KIND_RATIO = 4

cdef struct Pot:
    int kind
    int n
    int m
    double lam
    double c
    double scale1
    double scale2
    double e0
    double a
    double delta
    double b
    int ncoef
    double coef[MAX_COEF]


cdef int setup_pot(Pot* pot, int kind, double[::1] params) except -1:
    cdef Py_ssize_t i
    cdef double n, m, K, D, pref
    pot.kind = kind
    if kind == KIND_TODA:
        pot.lam = params[0]
    elif kind == KIND_MLJ:
        pot.n = <int>params[0]
        pot.m = <int>params[1]
        pot.e0 = params[2]
        pot.a = params[3]
        n = pot.n
        m = pot.m
        pot.scale1 = pot.e0 * n * m / (n - m)
    elif kind == KIND_NMLJ:
        pot.n = <int>params[0]
        pot.m = <int>params[1]
        pot.lam = params[2]
        n = pot.n
        m = pot.m
        K = n + m + 3
        D = pot.lam * pot.lam * n * (n - m) / (K * K)
        pot.c = pot.lam / K
        pot.scale1 = pot.c * n / D
        pot.scale2 = pot.c * pot.c * n / D
    elif kind == KIND_POLY:
        if params.shape[0] > MAX_COEF:
            raise ValueError("polynomial order too high for the compiled kernel")
        pot.ncoef = params.shape[0]
        for i in range(pot.ncoef):
            pot.coef[i] = params[i]
    elif kind == KIND_RATIO:
        pot.delta = params[0]
        pot.lam = params[1]
        pot.b = pot.lam / (1.0 + pot.delta)
        pref = (1.0 + pot.delta) ** 2 / (pot.lam * pot.lam * pot.delta * (1.0 - pot.delta))
        pot.scale1 = pref * pot.delta * pot.b
        pot.scale2 = pref * pot.delta * pot.b * pot.b
    else:
        raise ValueError(f"unknown potential kind {kind}")
    return 0


cdef inline double ipow(double x, int k) noexcept nogil:
    cdef double out = 1.0
    while k > 0:
        if k & 1:
            out *= x
        x *= x
        k >>= 1
    return out


cdef inline int pair_derivs(const Pot* pot, double r, double* f1, double* f2) noexcept nogil:
    """First and second derivative of the pair potential at ``r``."""
    cdef double e, u, s, sn, sm, q, qn, qm, acc1, acc2, e1, e2
    cdef int i, power
    if pot.kind == KIND_TODA:
        e = exp(pot.lam * r)
        f1[0] = (e - 1.0) / pot.lam
        f2[0] = e
    elif pot.kind == KIND_NMLJ:
        u = 1.0 - pot.c * r
        if not u > 0.0:
            return 1
        s = 1.0 / u
        sn = ipow(s, pot.n)
        sm = ipow(s, pot.m)
        f1[0] = pot.scale1 * s * (sn - sm)
        f2[0] = pot.scale2 * s * s * ((pot.n + 1) * sn - (pot.m + 1) * sm)
    elif pot.kind == KIND_POLY:
        acc1 = 0.0
        acc2 = 0.0
        for i in range(pot.ncoef - 1, -1, -1):
            power = i + 2
            acc1 = acc1 * r + power * pot.coef[i]
            acc2 = acc2 * r + power * (power - 1) * pot.coef[i]
        f1[0] = acc1 * r
        f2[0] = acc2
    elif pot.kind == KIND_MLJ:
        if not r > 0.0:
            return 1
        q = pot.a / r
        qn = ipow(q, pot.n)
        qm = ipow(q, pot.m)
        f1[0] = pot.scale1 / r * (qm - qn)
        f2[0] = pot.scale1 / (r * r) * ((pot.n + 1) * qn - (pot.m + 1) * qm)
    else:
        e1 = exp(pot.b * r)
        e2 = exp(pot.delta * pot.b * r)
        f1[0] = pot.scale1 * (e1 - e2)
        f2[0] = pot.scale2 * (e1 - pot.delta * e2)
    return 0


cdef struct Chain:
    int nmov
    int nbond
    bint periodic
    double length
    double inv_mass
    double* force
    double* bd1
    double* bd2


cdef int alloc_chain(Chain* ch, int nmov, bint periodic, double length, double inv_mass) except -1:
    ch.nmov = nmov
    ch.periodic = periodic
    ch.nbond = nmov if periodic else nmov + 1
    ch.length = length
    ch.inv_mass = inv_mass
    ch.force = <double*>malloc(nmov * sizeof(double))
    ch.bd1 = <double*>malloc(ch.nbond * sizeof(double))
    ch.bd2 = <double*>malloc(ch.nbond * sizeof(double))
    if ch.force == NULL or ch.bd1 == NULL or ch.bd2 == NULL:
        free_chain(ch)
        raise MemoryError()
    return 0


cdef void free_chain(Chain* ch) noexcept:
    free(ch.force)
    free(ch.bd1)
    free(ch.bd2)
    ch.force = NULL
    ch.bd1 = NULL
    ch.bd2 = NULL


cdef inline int compute_forces(const Pot* pot, Chain* ch, double* x, int* bad_bond) noexcept nogil:
    """Fill bond derivatives and forces; ``force[j] = V'(right bond) - V'(left bond)``."""
    cdef int j, k, st
    cdef int nm = ch.nmov
    cdef double r
    for k in range(ch.nbond):
        if ch.periodic:
            if k < nm - 1:
                r = x[k + 1] - x[k]
            else:
                r = x[0] + ch.length - x[nm - 1]
        else:
            if k == 0:
                r = x[0]
            elif k < nm:
                r = x[k] - x[k - 1]
            else:
                r = ch.length - x[nm - 1]
        st = pair_derivs(pot, r, &ch.bd1[k], &ch.bd2[k])
        if st:
            bad_bond[0] = k
            return st
    if ch.periodic:
        ch.force[0] = ch.bd1[0] - ch.bd1[nm - 1]
        for j in range(1, nm):
            ch.force[j] = ch.bd1[j] - ch.bd1[j - 1]
    else:
        for j in range(nm):
            ch.force[j] = ch.bd1[j + 1] - ch.bd1[j]
    return 0


cdef inline double tangent_force(Chain* ch, double* dx, int j) noexcept nogil:
    """Linearized force on particle ``j`` for displacement ``dx``."""
    cdef int nm = ch.nmov
    cdef double right, left
    cdef int jr, jl
    if ch.periodic:
        jr = j + 1 if j + 1 < nm else 0
        jl = j - 1 if j > 0 else nm - 1
        left = ch.bd2[jl]
        right = ch.bd2[j]
        return right * (dx[jr] - dx[j]) - left * (dx[j] - dx[jl])
    right = ch.bd2[j + 1] * ((dx[j + 1] if j + 1 < nm else 0.0) - dx[j])
    left = ch.bd2[j] * (dx[j] - (dx[j - 1] if j > 0 else 0.0))
    return right - left


cdef int substeps(int scheme, double dt, double* h) except -1:
    cdef double w1, w0
    if scheme == 0:
        h[0] = dt
        return 1
    elif scheme == 1:
        w1 = 1.0 / (2.0 - cbrt(2.0))
        w0 = -cbrt(2.0) * w1
        h[0] = w1 * dt
        h[1] = w0 * dt
        h[2] = w1 * dt
        return 3
    raise ValueError(f"unknown scheme {scheme}")


cdef inline int finite_state(double* x, double* p, int n) noexcept nogil:
    cdef int j
    for j in range(n):
        if not (isfinite(x[j]) and isfinite(p[j])):
            return 0
    return 1


cdef inline int one_step(const Pot* pot, Chain* ch, double* x, double* p, double* h, int nsub,
                         int* bad_bond) noexcept nogil:
    """One composed kick-drift-kick step; forces in ``ch`` must match ``x`` on entry."""
    cdef int s, j, st
    cdef double half
    for s in range(nsub):
        half = 0.5 * h[s]
        for j in range(ch.nmov):
            p[j] += half * ch.force[j]
        for j in range(ch.nmov):
            x[j] += h[s] * ch.inv_mass * p[j]
        st = compute_forces(pot, ch, x, bad_bond)
        if st:
            return st
        for j in range(ch.nmov):
            p[j] += half * ch.force[j]
    return 0


cdef inline int one_step_tangent(const Pot* pot, Chain* ch, double* x, double* p,
                                 double* dx, double* dp, double* h, int nsub,
                                 int* bad_bond) noexcept nogil:
    cdef int s, j, st
    cdef double half
    for s in range(nsub):
        half = 0.5 * h[s]
        for j in range(ch.nmov):
            p[j] += half * ch.force[j]
            dp[j] += half * tangent_force(ch, dx, j)
        for j in range(ch.nmov):
            x[j] += h[s] * ch.inv_mass * p[j]
            dx[j] += h[s] * ch.inv_mass * dp[j]
        st = compute_forces(pot, ch, x, bad_bond)
        if st:
            return st
        for j in range(ch.nmov):
            p[j] += half * ch.force[j]
            dp[j] += half * tangent_force(ch, dx, j)
    return 0


def integrate(double[::1] x, double[::1] p, int kind, double[::1] params, bint periodic,
              double length, double inv_mass, double dt, int scheme, long nsteps):
    """Advance ``(x, p)`` by ``nsteps``.  Returns ``(status, step, bond)``."""
    cdef Pot pot
    cdef Chain ch
    cdef double h[3]
    cdef int nsub, st = 0, bad = -1
    cdef long k = 0
    cdef int n = x.shape[0]
    setup_pot(&pot, kind, params)
    nsub = substeps(scheme, dt, h)
    alloc_chain(&ch, n, periodic, length, inv_mass)
    try:
        with nogil:
            st = compute_forces(&pot, &ch, &x[0], &bad)
            if st == 0:
                while k < nsteps:
                    st = one_step(&pot, &ch, &x[0], &p[0], h, nsub, &bad)
                    k += 1
                    if st:
                        break
                    if not finite_state(&x[0], &p[0], n):
                        st = 2
                        break
    finally:
        free_chain(&ch)
    return st, k, bad


def integrate_tangent(double[::1] x, double[::1] p, double[::1] dx, double[::1] dp,
                      int kind, double[::1] params, bint periodic, double length,
                      double inv_mass, double dt, int scheme, long nsteps, long renorm,
                      long[::1] record_steps, double[::1] out, double acc_log):
    """Advance state and tangent vector together.

    The tangent vector is rescaled to unit norm every ``renorm`` steps with
    the logarithm of the removed factor added to ``acc_log``.  At each step
    listed in ``record_steps`` (steps counted from 1 within this call),
    ``acc_log + log|u|`` is written into ``out``.  Returns
    ``(status, step, bond, acc_log)``.
    """
    cdef Pot pot
    cdef Chain ch
    cdef double h[3]
    cdef int nsub, st = 0, bad = -1, j
    cdef long k = 0
    cdef Py_ssize_t irec = 0, nrec = record_steps.shape[0]
    cdef int n = x.shape[0]
    cdef double nrm
    setup_pot(&pot, kind, params)
    nsub = substeps(scheme, dt, h)
    alloc_chain(&ch, n, periodic, length, inv_mass)
    try:
        with nogil:
            st = compute_forces(&pot, &ch, &x[0], &bad)
            while st == 0 and k < nsteps:
                st = one_step_tangent(&pot, &ch, &x[0], &p[0], &dx[0], &dp[0], h, nsub, &bad)
                k += 1
                if st:
                    break
                if not finite_state(&x[0], &p[0], n):
                    st = 2
                    break
                if (k % renorm == 0) or (irec < nrec and record_steps[irec] == k):
                    nrm = 0.0
                    for j in range(n):
                        nrm += dx[j] * dx[j] + dp[j] * dp[j]
                    nrm = sqrt(nrm)
                    if not (isfinite(nrm) and nrm > 0.0):
                        st = 2
                        break
                    while irec < nrec and record_steps[irec] == k:
                        out[irec] = acc_log + log(nrm)
                        irec += 1
                    if k % renorm == 0:
                        acc_log += log(nrm)
                        for j in range(n):
                            dx[j] /= nrm
                            dp[j] /= nrm
    finally:
        free_chain(&ch)
    return st, k, bad, acc_log


def integrate_until_crossing(double[::1] x, double[::1] p, int kind, double[::1] params,
                             bint periodic, double length, double inv_mass, double dt,
                             int scheme, double[::1] w, long max_steps,
                             double[::1] xprev, double[::1] pprev):
    """Step until ``w.x`` goes from negative to non-negative.

    On a crossing, ``(xprev, pprev)`` holds the last state before it and
    ``(x, p)`` the first state after.  Returns ``(status, steps, bond, crossed)``.
    """
    cdef Pot pot
    cdef Chain ch
    cdef double h[3]
    cdef int nsub, st = 0, bad = -1, j
    cdef long k = 0
    cdef int n = x.shape[0]
    cdef double s_old, s_new
    cdef bint crossed = False
    setup_pot(&pot, kind, params)
    nsub = substeps(scheme, dt, h)
    alloc_chain(&ch, n, periodic, length, inv_mass)
    try:
        with nogil:
            st = compute_forces(&pot, &ch, &x[0], &bad)
            s_new = 0.0
            for j in range(n):
                s_new += w[j] * x[j]
            while st == 0 and k < max_steps:
                for j in range(n):
                    xprev[j] = x[j]
                    pprev[j] = p[j]
                s_old = s_new
                st = one_step(&pot, &ch, &x[0], &p[0], h, nsub, &bad)
                k += 1
                if st:
                    break
                if not finite_state(&x[0], &p[0], n):
                    st = 2
                    break
                s_new = 0.0
                for j in range(n):
                    s_new += w[j] * x[j]
                if s_old < 0.0 and s_new >= 0.0:
                    crossed = True
                    break
    finally:
        free_chain(&ch)
    return st, k, bad, crossed
