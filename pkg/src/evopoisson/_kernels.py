"""Hot numeric loops for payoff evaluation, dynamics, and equilibrium search.

Every kernel has a plain-Python implementation (``py_*``). When numba is
importable and the environment variable EVOPOISSON_NO_NUMBA is unset/0, the
exported names are ``@njit``-compiled versions of the same functions;
otherwise the pure implementations are exported unchanged. Each kernel is
self-contained (no cross-kernel calls) so both paths execute the identical
sequence of floating point operations.

Schedule family codes used by the loop kernels:
  0 -> 1/n, 1 -> 1/(1 + n*log n), 2 -> 1/n**2, 3 -> constant h.
"""

import math
import os

import numpy as np


def py_poly(coeffs, y):
    """Evaluate sum_n coeffs[n] * y**n by Horner's scheme."""
    acc = 0.0
    for i in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * y + coeffs[i]
    return acc


def py_safe_prob(coeffs, y):
    """Probability mass of the non-propagating outcomes at Poisson scale y."""
    acc = 0.0
    for i in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * y + coeffs[i]
    return math.exp(-y) * acc


def py_cost_off(coeffs, y, big_k):
    """Expected cost of an unprotected player, clamped into [0, big_k]."""
    acc = 0.0
    for i in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * y + coeffs[i]
    u = big_k * (1.0 - math.exp(-y) * acc)
    if u < 0.0:
        u = 0.0
    elif u > big_k:
        u = big_k
    return u


def py_drift(coeffs, lam, big_k, price, p, eps):
    """Replicator right-hand side (1/eps) * p(1-p) * (price - cost_off)."""
    y = lam * p
    acc = 0.0
    for i in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * y + coeffs[i]
    u = big_k * (1.0 - math.exp(-y) * acc)
    if u < 0.0:
        u = 0.0
    elif u > big_k:
        u = big_k
    return p * (1.0 - p) * (price - u) / eps


def py_bisect_root(coeffs, lam, target, tol, max_iter):
    """Bisect exp(-lam*p) * poly(lam*p) = target on [0, 1].

    The bracket presumes value(0)=1 > target and value(1) < target
    (monotone decreasing safe mass). Returns (root, iterations, ok) where
    ok=False signals a non-finite evaluation.
    """
    lo = 0.0
    hi = 1.0
    it = 0
    while hi - lo > tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        y = lam * mid
        acc = 0.0
        for i in range(coeffs.shape[0] - 1, -1, -1):
            acc = acc * y + coeffs[i]
        val = math.exp(-y) * acc
        if not math.isfinite(val):
            return 0.5 * (lo + hi), it, False
        if val > target:
            lo = mid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi), it, True


def py_discrete_path(coeffs, lam, big_k, price, p0, n_max, tol, family, h,
                     stride, cap):
    """Euler replicator iteration p += b(n) p(1-p)(price - cost_off).

    Steps that would leave the open unit interval are halved until the
    iterate stays strictly inside (an absorbing clamp at 0/1 would freeze
    the dynamics there). Convergence: |p_{n+1} - p_n| / b(n) < tol, i.e.
    the unguarded drift magnitude falls below tol.

    Returns (index_array, p_array, n_stored, n_total, converged, p_final);
    the path is subsampled with the given stride but always contains the
    first and last points.
    """
    idx = np.empty(cap, dtype=np.float64)
    path = np.empty(cap, dtype=np.float64)
    idx[0] = 0.0
    path[0] = p0
    m = 1
    p = p0
    converged = False
    n_done = 0
    for n in range(1, n_max + 1):
        if family == 0:
            b = 1.0 / n
        elif family == 1:
            b = 1.0 / (1.0 + n * math.log(n))
        elif family == 2:
            b = 1.0 / (n * n)
        else:
            b = h
        y = lam * p
        acc = 0.0
        for i in range(coeffs.shape[0] - 1, -1, -1):
            acc = acc * y + coeffs[i]
        u = big_k * (1.0 - math.exp(-y) * acc)
        if u < 0.0:
            u = 0.0
        elif u > big_k:
            u = big_k
        drift = p * (1.0 - p) * (price - u)
        n_done = n
        if abs(drift) < tol:
            converged = True
            break
        step = b * drift
        pn = p + step
        while pn <= 0.0 or pn >= 1.0:
            step *= 0.5
            pn = p + step
            if pn == p:
                break
        p = pn
        if n % stride == 0 and m < cap - 1:
            idx[m] = float(n)
            path[m] = p
            m += 1
    if idx[m - 1] != float(n_done) or path[m - 1] != p:
        idx[m] = float(n_done)
        path[m] = p
        m += 1
    return idx[:m], path[:m], m, n_done, converged, p


def py_rk4_path(coeffs, lam, big_k, price, p0, dt, n_max, eps, tol, stride,
                cap):
    """Classical fourth-order fixed-step integration of the replicator ODE.

    Accepted points are clamped into [0, 1] (stage evaluations may step
    slightly outside near the boundary; the payoff expression extends
    smoothly). Stops early once |rhs| < tol and |delta p| < tol*dt.

    Returns (t_array, p_array, n_stored, n_total, converged, p_final).
    """
    ts = np.empty(cap, dtype=np.float64)
    path = np.empty(cap, dtype=np.float64)
    ts[0] = 0.0
    path[0] = p0
    m = 1
    p = p0
    converged = False
    n_done = 0
    for n in range(1, n_max + 1):
        # k1..k4 with the shared payoff expression inlined
        q = p
        y = lam * q
        acc = 0.0
        for i in range(coeffs.shape[0] - 1, -1, -1):
            acc = acc * y + coeffs[i]
        u = big_k * (1.0 - math.exp(-y) * acc)
        if u < 0.0:
            u = 0.0
        elif u > big_k:
            u = big_k
        k1 = q * (1.0 - q) * (price - u) / eps

        q = p + 0.5 * dt * k1
        y = lam * q
        acc = 0.0
        for i in range(coeffs.shape[0] - 1, -1, -1):
            acc = acc * y + coeffs[i]
        u = big_k * (1.0 - math.exp(-y) * acc)
        if u < 0.0:
            u = 0.0
        elif u > big_k:
            u = big_k
        k2 = q * (1.0 - q) * (price - u) / eps

        q = p + 0.5 * dt * k2
        y = lam * q
        acc = 0.0
        for i in range(coeffs.shape[0] - 1, -1, -1):
            acc = acc * y + coeffs[i]
        u = big_k * (1.0 - math.exp(-y) * acc)
        if u < 0.0:
            u = 0.0
        elif u > big_k:
            u = big_k
        k3 = q * (1.0 - q) * (price - u) / eps

        q = p + dt * k3
        y = lam * q
        acc = 0.0
        for i in range(coeffs.shape[0] - 1, -1, -1):
            acc = acc * y + coeffs[i]
        u = big_k * (1.0 - math.exp(-y) * acc)
        if u < 0.0:
            u = 0.0
        elif u > big_k:
            u = big_k
        k4 = q * (1.0 - q) * (price - u) / eps

        pn = p + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if pn < 0.0:
            pn = 0.0
        elif pn > 1.0:
            pn = 1.0
        dp = pn - p
        p = pn
        n_done = n
        if n % stride == 0 and m < cap - 1:
            ts[m] = n * dt
            path[m] = p
            m += 1
        y = lam * p
        acc = 0.0
        for i in range(coeffs.shape[0] - 1, -1, -1):
            acc = acc * y + coeffs[i]
        u = big_k * (1.0 - math.exp(-y) * acc)
        if u < 0.0:
            u = 0.0
        elif u > big_k:
            u = big_k
        rhs = p * (1.0 - p) * (price - u) / eps
        if abs(rhs) < tol and abs(dp) < tol * dt:
            converged = True
            break
    if ts[m - 1] != n_done * dt or path[m - 1] != p:
        ts[m] = n_done * dt
        path[m] = p
        m += 1
    return ts[:m], path[:m], m, n_done, converged, p


def py_equilibrate(coeffs, lam, big_k, price, p0, gain, tol, n_max):
    """Constant-gain replicator iteration run to its rest point.

    Used by the nested controller to re-equilibrate the population after a
    price move; geometric convergence makes it cheap to call per probe.
    Returns (p_final, steps, converged).
    """
    p = p0
    converged = False
    steps = 0
    for n in range(1, n_max + 1):
        y = lam * p
        acc = 0.0
        for i in range(coeffs.shape[0] - 1, -1, -1):
            acc = acc * y + coeffs[i]
        u = big_k * (1.0 - math.exp(-y) * acc)
        if u < 0.0:
            u = 0.0
        elif u > big_k:
            u = big_k
        drift = p * (1.0 - p) * (price - u)
        steps = n
        if abs(drift) < tol:
            converged = True
            break
        step = gain * drift
        pn = p + step
        while pn <= 0.0 or pn >= 1.0:
            step *= 0.5
            pn = p + step
            if pn == p:
                break
        p = pn
    return p, steps, converged


_PY_IMPLS = {
    "poly": py_poly,
    "safe_prob": py_safe_prob,
    "cost_off": py_cost_off,
    "drift": py_drift,
    "bisect_root": py_bisect_root,
    "discrete_path": py_discrete_path,
    "rk4_path": py_rk4_path,
    "equilibrate": py_equilibrate,
}

_disabled = os.environ.get("EVOPOISSON_NO_NUMBA", "0").lower() in (
    "1", "true", "yes")
NUMBA_ACTIVE = False
if not _disabled:
    try:
        from numba import njit
        NUMBA_ACTIVE = True
    except ImportError:
        NUMBA_ACTIVE = False

if NUMBA_ACTIVE:
    poly = njit(cache=True)(py_poly)
    safe_prob = njit(cache=True)(py_safe_prob)
    cost_off = njit(cache=True)(py_cost_off)
    drift = njit(cache=True)(py_drift)
    bisect_root = njit(cache=True)(py_bisect_root)
    discrete_path = njit(cache=True)(py_discrete_path)
    rk4_path = njit(cache=True)(py_rk4_path)
    equilibrate = njit(cache=True)(py_equilibrate)
else:
    poly = py_poly
    safe_prob = py_safe_prob
    cost_off = py_cost_off
    drift = py_drift
    bisect_root = py_bisect_root
    discrete_path = py_discrete_path
    rk4_path = py_rk4_path
    equilibrate = py_equilibrate
