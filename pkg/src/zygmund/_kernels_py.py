"""Pure-numpy kernels; the fallback when the compiled extension is unavailable.

Both backends take ``absf`` already rescaled so that ``max(absf) == 1`` (the
callers exploit homogeneity of the norm), plus the flat Young parameters from
``YoungSpec.kernel_params``.  They must agree to rounding.
"""
from __future__ import annotations

import math

import numpy as np

POWER, CLOSE2, RYOU, KASHIN = range(4)
OK, BRACKET_FAILED = 0, 1
MAX_BRACKET_STEPS = 200


def _modular_factory(absf, w, code, alpha, p, u0, c):
    """Return ``k -> E[Phi(absf / k)]`` with the k-independent work hoisted."""
    if code == POWER:
        # E[(|f|/k)^p] = (||f||_p / k)^p
        lp = float(np.sum(w * absf**p)) ** (1.0 / p)
        return lambda k: (lp / k) ** p

    if code in (CLOSE2, RYOU):
        q, beta = (2.0, alpha) if code == CLOSE2 else (p, alpha * p)
        nz = absf > 0
        a = absf[nz]
        wn = w[nz]
        logf = np.log(a)
        f2 = a * a
        fq = f2 if q == 2.0 else a**q
        log_u0 = math.log(u0)

        def modular(k):
            t = logf - math.log(k)
            upper = t >= log_u0
            tb = t if beta == 1.0 else np.where(upper, t, 1.0) ** beta
            terms = np.where(upper, fq * k ** (-q) * tb, c * f2 / (k * k))
            return float(np.sum(wn * terms))

        return modular

    if code == KASHIN:
        nz = absf > 0
        a = absf[nz]
        wn = w[nz]

        def modular(k):
            u = a / k
            with np.errstate(over="ignore"):
                g = u * u * (np.log(math.e + u) / np.log(math.e + 1.0 / u)) ** alpha
            return float(np.sum(wn * g))

        return modular

    raise ValueError(f"unknown family code {code}")


def modular_abs(absf, w, code, alpha, p, u0, c, k):
    return _modular_factory(absf, w, code, alpha, p, u0, c)(k)


def luxemburg_abs(absf, w, code, alpha, p, u0, c, rel_tol, max_iter):
    """Bracket-and-bisect the smallest ``k`` with modular ``<= 1``.

    Returns ``(value, modular_at_value, iterations, lo, hi, status)``.
    """
    k = math.sqrt(float(np.sum(w * absf * absf)))
    if k == 0.0:
        return 0.0, 0.0, 0, 0.0, 0.0, OK
    mod = _modular_factory(absf, w, code, alpha, p, u0, c)

    m = mod(k)
    if m <= 1.0:
        hi, m_hi, lo = k, m, 0.5 * k
        for _ in range(MAX_BRACKET_STEPS):
            m_lo = mod(lo)
            if m_lo > 1.0:
                break
            hi, m_hi, lo = lo, m_lo, 0.5 * lo
        else:
            return hi, m_hi, 0, lo, hi, BRACKET_FAILED
    else:
        lo, hi = k, 2.0 * k
        for _ in range(MAX_BRACKET_STEPS):
            m_hi = mod(hi)
            if m_hi <= 1.0:
                break
            lo, hi = hi, 2.0 * hi
        else:
            return hi, m_hi, 0, lo, hi, BRACKET_FAILED

    it = 0
    while it < max_iter and hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        it += 1
        m_mid = mod(mid)
        if m_mid <= 1.0:
            hi, m_hi = mid, m_mid
        else:
            lo = mid
    return hi, m_hi, it, lo, hi, OK


def _phi_rows(u, code, alpha, p, u0, c):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if code == POWER:
            return u**p
        if code in (CLOSE2, RYOU):
            q, beta = (2.0, alpha) if code == CLOSE2 else (p, alpha * p)
            hi = u**q * np.log(np.maximum(u, u0)) ** beta
            return np.where(u < u0, c * u * u, hi)
        safe = np.where(u > 0, u, 1.0)
        g = safe * safe * (np.log(math.e + safe) / np.log(math.e + 1.0 / safe)) ** alpha
        return np.where(u > 0, g, 0.0)


def luxemburg_rows(absF, w, code, alpha, p, u0, c, rel_tol, max_iter):
    """Row-wise norms of a 2-d array; returns ``(values, status)`` arrays.

    Same bracket-and-bisect as ``luxemburg_abs``, vectorized across rows.
    """
    absF = np.asarray(absF, dtype=float)

    def mod(rows, k):
        return np.sum(w * _phi_rows(absF[rows] / k[:, None], code, alpha, p, u0, c), axis=1)

    B = absF.shape[0]
    k0 = np.sqrt(np.sum(w * absF * absF, axis=1))
    values = np.zeros(B)
    status = np.zeros(B, dtype=np.int32)
    live = np.flatnonzero(k0 > 0)
    if live.size == 0:
        return values, status
    k0 = k0[live]
    lo = k0.copy()
    hi = k0.copy()
    below = mod(live, k0) <= 1.0
    # rows already feasible at k0 halve lo; the others double hi
    lo[below] *= 0.5
    hi[~below] *= 2.0
    pending = np.ones(live.size, dtype=bool)
    for _ in range(MAX_BRACKET_STEPS):
        idx = np.flatnonzero(pending)
        if idx.size == 0:
            break
        lo_rows = idx[below[idx]]
        hi_rows = idx[~below[idx]]
        if lo_rows.size:
            ok = mod(live[lo_rows], lo[lo_rows]) > 1.0
            pending[lo_rows[ok]] = False
            step = lo_rows[~ok]
            hi[step] = lo[step]
            lo[step] *= 0.5
        if hi_rows.size:
            ok = mod(live[hi_rows], hi[hi_rows]) <= 1.0
            pending[hi_rows[ok]] = False
            step = hi_rows[~ok]
            lo[step] = hi[step]
            hi[step] *= 2.0
    status[live[pending]] = BRACKET_FAILED

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        act = np.flatnonzero((hi - lo > rel_tol * hi) & (mid > lo) & (mid < hi) & ~pending)
        if act.size == 0:
            break
        feasible = mod(live[act], mid[act]) <= 1.0
        hi[act[feasible]] = mid[act[feasible]]
        lo[act[~feasible]] = mid[act[~feasible]]
    values[live] = hi
    return values, status
