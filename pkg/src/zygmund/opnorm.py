"""Lower bounds for ``sup_{||a||_2 <= 1} ||sum_{i in J} a_i phi_i||_Phi``.

Maximizing a norm over the sphere is nonconvex, so the ascent is a multi-start
heuristic; every value it returns is certified by the coefficient vector that
attains it.  For ``Phi(u) = u^2`` the quantity is the top singular value of
the weighted evaluation map, computed exactly by power iteration.

Since ``a -> ||f_a||_Phi`` is convex and 1-homogeneous, the retracted step
``normalize(a + t grad)`` never decreases it for any ``t >= 0``; large steps
recover the nonlinear power method.  The line search therefore starts at the
largest step, backtracks only against rounding and regrows after success.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .luxemburg import DEFAULT_REL_TOL, luxemburg_norms, value_and_gradient
from .systems import System, as_indices
from .young import YoungSpec

MAX_STEP = 1e6
MIN_STEP = 1e-14


@dataclass(frozen=True)
class OpNormEstimate:
    value: float
    argmax: np.ndarray
    restarts_used: int
    converged: bool


def phase_gauge(a) -> np.ndarray:
    """Rotate ``a`` so its first nonzero coordinate is real and positive."""
    a = np.asarray(a, dtype=complex)
    nz = np.flatnonzero(np.abs(a) > 1e-14 * max(1.0, float(np.abs(a).max(initial=0))))
    if nz.size == 0:
        return a.copy()
    first = a[nz[0]]
    return a * (np.conj(first) / abs(first))


def _random_unit(rng, m: int) -> np.ndarray:
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return z / np.linalg.norm(z)


def l2_top_singular(sys: System, J, tol: float = 1e-10, seed: int = 0, max_iter: int = 10_000):
    """Top singular value and right singular vector of ``a -> (sqrt(w_j) f_a(j))_j``.

    Power iteration on the Gram operator ``a -> analyze(w * synthesize(a))``,
    stopped once the eigen-residual is below ``tol`` times the eigenvalue.
    """
    idx = as_indices(J, sys.n)
    if idx.size == 0:
        raise ValueError("J is empty")
    w = sys.space.weights
    v = _random_unit(np.random.default_rng(seed), idx.size)
    lam = 0.0
    for _ in range(max_iter):
        y = sys.analyze(idx, w * sys.synthesize(idx, v))
        lam = float(np.vdot(v, y).real)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0, phase_gauge(v)
        resid = np.linalg.norm(y - lam * v)
        v = y / ny
        if resid <= tol * lam:
            break
    return float(np.sqrt(max(lam, 0.0))), phase_gauge(v)


def peak_start(sys: System, J, chunk: int = 16) -> np.ndarray:
    """Unit vector whose phases align every ``phi_i`` at the atom maximizing ``sum_i |phi_i|``.

    The synthesized function then peaks at ``sum_i |phi_i(x*)| / sqrt(|J|)``,
    which is where heavy-tailed Young functions gain over L2.
    """
    idx = as_indices(J, sys.n)
    total = np.zeros(sys.space.atom_count)
    for s in range(0, idx.size, chunk):
        total += np.abs(sys.columns(idx[s:s + chunk])).sum(axis=1)
    total[sys.space.weights == 0] = -1.0
    x_star = int(np.argmax(total))
    row = np.concatenate([sys.columns(idx[s:s + chunk])[x_star] for s in range(0, idx.size, chunk)])
    a = np.conj(row)
    nrm = np.linalg.norm(a)
    if nrm == 0:
        return _random_unit(np.random.default_rng(0), idx.size)
    return a / nrm


def _ascend(spec, sys, idx, start, max_iters, tol, rel_tol):
    m = idx.size

    def evaluate(x):
        return value_and_gradient(spec, sys, idx, x[:m] + 1j * x[m:], rel_tol)

    x = np.concatenate([start.real, start.imag])
    x /= np.linalg.norm(x)
    val, g = evaluate(x)
    step = MAX_STEP
    for _ in range(max_iters):
        tangent = g - (g @ x) * x
        if np.linalg.norm(tangent) <= tol * val:
            return val, x, True
        while True:
            y = x + step * g
            y /= np.linalg.norm(y)
            val_y, g_y = evaluate(y)
            if val_y > val:
                break
            step *= 0.5
            if step < MIN_STEP:
                # no representable ascent left along the gradient
                return val, x, True
        gain = val_y - val
        x, val, g = y, val_y, g_y
        step = min(2.0 * step, MAX_STEP)
        if gain <= tol * val:
            return val, x, True
    return val, x, False


def opnorm_ascent(
    spec: YoungSpec,
    sys: System,
    J,
    restarts: int = 8,
    max_iters: int = 500,
    tol: float = 1e-8,
    seed: int = 0,
    rel_tol: float = DEFAULT_REL_TOL,
) -> OpNormEstimate:
    """Multi-start projected gradient ascent on the unit sphere of ``C^|J|``.

    The first start is the top L2 singular vector, the second (when
    ``restarts >= 2``) the phase-aligned peak vector of ``peak_start``, and
    the remaining ones seeded random unit vectors.  Ties keep the earliest.
    """
    idx = as_indices(J, sys.n)
    if idx.size == 0:
        raise ValueError("J is empty")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    m = idx.size
    rng = np.random.default_rng(seed)
    starts = [l2_top_singular(sys, idx, seed=seed)[1]]
    if restarts >= 2:
        starts.append(peak_start(sys, idx))
    starts += [_random_unit(rng, m) for _ in range(restarts - len(starts))]

    best = None
    for start in starts:
        val, x, conv = _ascend(spec, sys, idx, start, max_iters, tol, rel_tol)
        if best is None or val > best[0]:
            best = (val, x, conv)
    val, x, conv = best
    a = phase_gauge(x[:m] + 1j * x[m:])
    return OpNormEstimate(float(val), a / np.linalg.norm(a), len(starts), conv)


def sphere_points(dim: int, samples: int, seed: int = 0) -> np.ndarray:
    """Scrambled Sobol points pushed through the normal quantile onto the unit sphere."""
    engine = qmc.Sobol(d=dim, scramble=True, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        u = engine.random(samples)
    z = ndtri(np.clip(u, 1e-16, 1 - 1e-16))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sphere_sample_max(
    spec: YoungSpec, sys: System, J, samples: int, seed: int = 0,
    rel_tol: float = DEFAULT_REL_TOL, chunk: int = 1 << 15,
) -> float:
    """Largest norm over ``samples`` quasi-uniform unit coefficient vectors.

    Points are drawn in order from one Sobol stream, so the result is
    nondecreasing in ``samples`` for a fixed seed.
    """
    idx = as_indices(J, sys.n)
    m = idx.size
    V = sys.columns(idx)
    engine = qmc.Sobol(d=2 * m, scramble=True, seed=seed)
    best = 0.0
    done = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        while done < samples:
            b = min(chunk, samples - done)
            z = ndtri(np.clip(engine.random(b), 1e-16, 1 - 1e-16))
            a = z[:, :m] + 1j * z[:, m:]
            a /= np.linalg.norm(a, axis=1, keepdims=True)
            norms = luxemburg_norms(sys.space, spec, a @ V.T, rel_tol)
            best = max(best, float(norms.max()))
            done += b
    return best


def opnorm_bruteforce(
    spec: YoungSpec, sys: System, J, samples: int = 10**6, seed: int = 0,
    include_candidate: bool = True, rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """Sampling oracle for ``|J| <= 3``; optionally also offers the ascent's answer."""
    idx = as_indices(J, sys.n)
    if idx.size == 0:
        raise ValueError("J is empty")
    if idx.size > 3:
        raise ValueError("brute force is limited to |J| <= 3")
    best = sphere_sample_max(spec, sys, idx, samples, seed, rel_tol)
    if include_candidate:
        best = max(best, opnorm_ascent(spec, sys, idx, seed=seed, rel_tol=rel_tol).value)
    return best
