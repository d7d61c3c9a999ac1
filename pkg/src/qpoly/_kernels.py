"""Compiled inner loops for the multi-start local search.

Objectives take ``(params, data)`` where ``params`` are the ``m*m`` real
coordinates of an anti-Hermitian generator and ``data`` is a tuple of
precomputed arrays; both return ``sign * value`` so that every search is a
minimization.
"""

import numpy as np
from numba import njit

Q_ONE_ATOL = 1e-6
DROP_WEIGHT = 1e-12
POLISH_STEPS = (0.5, 0.05, 5e-3, 5e-4)


@njit(cache=True)
def unitary_from_params(params, m):
    """``exp(iH)`` with ``H`` Hermitian: diagonal first, then (re, im) pairs of the upper triangle."""
    h = np.zeros((m, m), dtype=np.complex128)
    for i in range(m):
        h[i, i] = params[i]
    k = m
    for i in range(m):
        for j in range(i + 1, m):
            h[i, j] = params[k] + 1j * params[k + 1]
            h[j, i] = params[k] - 1j * params[k + 1]
            k += 2
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


@njit(cache=True)
def weighted_entropy(mu, q):
    """``p**q S_q(mu / p)`` for an unnormalized spectrum ``mu`` of total weight ``p``."""
    p = 0.0
    for x in mu:
        if x > 0:
            p += x
    if p < DROP_WEIGHT:
        return 0.0
    s = 0.0
    if abs(q - 1.0) < Q_ONE_ATOL:
        for x in mu:
            if x > 0:
                s -= x * np.log(x)
        return s + p * np.log(p)
    for x in mu:
        if x > 0:
            s += x**q
    return (p**q - s) / (q - 1.0)


@njit(cache=True)
def decomposition_objective(params, data):
    # data: (sign, m, r, coef[r, D], da, db, q); coef rows are sqrt(l_j) e_j
    sign, m, r, coef, da, db, q = data
    u = np.ascontiguousarray(unitary_from_params(params, m)[:, :r])
    psi = u @ coef
    total = 0.0
    for i in range(m):
        mat = np.ascontiguousarray(psi[i]).reshape((da, db))
        if da <= db:
            sig = mat @ mat.conj().T
        else:
            sig = mat.conj().T @ mat
        total += weighted_entropy(np.linalg.eigvalsh(sig), q)
    return sign * total


@njit(cache=True)
def measurement_objective(params, data):
    # data: (sign, n, r, rhof[da, r, da, r], da, q, s_a); rhof is rho projected onto supp(rho_B)
    sign, n, r, rhof, da, q, s_a = data
    w = unitary_from_params(params, n)
    total = 0.0
    sig = np.empty((da, da), dtype=np.complex128)
    for x in range(n):
        sig[:, :] = 0.0
        for k in range(r):
            for l in range(r):
                c = w[x, k] * np.conj(w[x, l])
                for a in range(da):
                    for b in range(da):
                        sig[a, b] += c * rhof[a, k, b, l]
        total += weighted_entropy(np.linalg.eigvalsh(sig), q)
    return sign * (s_a - total)


@njit(cache=True)
def nelder_mead(fun, x0, data, step, xatol, fatol, maxiter):
    """Adaptive Nelder-Mead; stops once the simplex is small in either x or f."""
    n = x0.size
    alpha = 1.0
    beta = 1.0 + 2.0 / n
    gamma = 0.75 - 1.0 / (2.0 * n)
    delta = 1.0 - 1.0 / n
    sim = np.empty((n + 1, n))
    fs = np.empty(n + 1)
    sim[0] = x0
    for i in range(n):
        sim[i + 1] = x0
        sim[i + 1, i] += step
    for i in range(n + 1):
        fs[i] = fun(sim[i], data)
    nfev = n + 1
    it = 0
    converged = False
    while True:
        order = np.argsort(fs)
        sim = sim[order]
        fs = fs[order]
        if np.max(np.abs(sim[1:] - sim[0])) <= xatol or fs[-1] - fs[0] <= fatol:
            converged = True
            break
        if it >= maxiter:
            break
        it += 1
        xbar = sim[:-1].sum(axis=0) / n
        xr = xbar + alpha * (xbar - sim[-1])
        fr = fun(xr, data)
        nfev += 1
        if fr < fs[0]:
            xe = xbar + beta * (xr - xbar)
            fe = fun(xe, data)
            nfev += 1
            if fe < fr:
                sim[-1] = xe
                fs[-1] = fe
            else:
                sim[-1] = xr
                fs[-1] = fr
        elif fr < fs[-2]:
            sim[-1] = xr
            fs[-1] = fr
        else:
            shrink = False
            if fr < fs[-1]:
                xc = xbar + gamma * (xr - xbar)
                fc = fun(xc, data)
                nfev += 1
                if fc <= fr:
                    sim[-1] = xc
                    fs[-1] = fc
                else:
                    shrink = True
            else:
                xc = xbar - gamma * (xbar - sim[-1])
                fc = fun(xc, data)
                nfev += 1
                if fc < fs[-1]:
                    sim[-1] = xc
                    fs[-1] = fc
                else:
                    shrink = True
            if shrink:
                for i in range(1, n + 1):
                    sim[i] = sim[0] + delta * (sim[i] - sim[0])
                    fs[i] = fun(sim[i], data)
                    nfev += 1
    return sim[0].copy(), fs[0], converged, it, nfev


@njit(cache=True)
def local_search(fun, x0, data, xatol, fatol, maxiter):
    """Nelder-Mead restarted from its own optimum with shrinking initial simplices.

    Stops when a restart improves by no more than ``fatol`` or the shared
    iteration budget ``maxiter`` runs out.
    """
    x = x0.copy()
    f = np.inf
    budget = maxiter
    converged = False
    nfev = 0
    for step in POLISH_STEPS:
        xn, fn, conv, it, ne = nelder_mead(fun, x, data, step, xatol, fatol, budget)
        budget -= it
        nfev += ne
        improved = f - fn
        if fn <= f:
            x = xn
            f = fn
        converged = conv
        if not conv or budget <= 0 or improved <= fatol:
            break
    return x, f, converged, nfev
