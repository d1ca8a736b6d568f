"""Luxemburg norm ``inf{k > 0 : E[Phi(|f|/k)] <= 1}`` and its coefficient gradient.

On a finite space the modular ``k -> E[Phi(|f|/k)]`` is continuous and
strictly decreasing wherever it is positive, so bracketing followed by
bisection always converges.  The returned value is the upper end of the final
bracket, hence always feasible (modular <= 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .space import ProbSpace
from .young import YoungSpec, young_deriv

DEFAULT_REL_TOL = 1e-10
MAX_ITER = 200


class NumericalFailure(ArithmeticError):
    """A solver could not produce a trustworthy number."""


@dataclass(frozen=True)
class NormResult:
    value: float
    modular_at_value: float
    iterations: int
    bracket: tuple[float, float]

    def __float__(self) -> float:
        return self.value


def _check_rel_tol(rel_tol):
    if not 0 < rel_tol <= 1e-2:
        raise ValueError(f"rel_tol must lie in (0, 1e-2], got {rel_tol}")


def modular(space: ProbSpace, spec: YoungSpec, f, k: float) -> float:
    """``E[Phi(|f|/k)]``."""
    if not k > 0:
        raise ValueError(f"k must be > 0, got {k}")
    absf = np.ascontiguousarray(np.abs(space.check(f)), dtype=float)
    return float(_backend.modular_abs(absf, space.weights, *spec.kernel_params(), float(k)))


def norm_of_abs(weights, spec: YoungSpec, absf, rel_tol=DEFAULT_REL_TOL) -> NormResult:
    """Luxemburg norm from ``|f|`` directly; the hot path behind everything else."""
    scale = float(absf.max()) if absf.size else 0.0
    if scale == 0.0:
        return NormResult(0.0, 0.0, 0, (0.0, 0.0))
    # homogeneity: solve for f / max|f| so that no power of |f| over- or underflows
    scaled = np.ascontiguousarray(absf / scale, dtype=float)
    value, mod, it, lo, hi, status = _backend.luxemburg_abs(
        scaled, weights, *spec.kernel_params(), float(rel_tol), MAX_ITER
    )
    if status != 0:
        raise NumericalFailure(f"could not bracket the Luxemburg norm ({spec})")
    return NormResult(value * scale, mod, it, (lo * scale, hi * scale))


def luxemburg_norm(space: ProbSpace, spec: YoungSpec, f, rel_tol: float = DEFAULT_REL_TOL) -> NormResult:
    """Luxemburg norm of ``f`` to relative accuracy ``rel_tol``."""
    _check_rel_tol(rel_tol)
    arr = np.asarray(f)
    if np.any(np.isnan(arr)):
        raise ValueError("f contains NaN")
    absf = np.abs(space.check(arr))
    return norm_of_abs(space.weights, spec, absf, rel_tol)


def luxemburg_norms(space: ProbSpace, spec: YoungSpec, F, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Norms of each row of the 2-d array ``F`` (one function per row)."""
    _check_rel_tol(rel_tol)
    absF = np.abs(np.asarray(F))
    if absF.ndim != 2 or absF.shape[1] != space.atom_count:
        raise ValueError("F must have shape (rows, atom_count)")
    if not np.all(np.isfinite(absF)):
        raise ValueError("F has non-finite entries")
    scale = absF.max(axis=1)
    safe = np.where(scale > 0, scale, 1.0)
    scaled = np.ascontiguousarray(absF / safe[:, None])
    values, status = _backend.luxemburg_rows(
        scaled, space.weights, *spec.kernel_params(), float(rel_tol), MAX_ITER
    )
    if np.any(status != 0):
        raise NumericalFailure(f"could not bracket {int(np.sum(status != 0))} row norms")
    return values * scale


def value_and_gradient(spec: YoungSpec, system, J, a, rel_tol=DEFAULT_REL_TOL):
    """Norm of ``f_a = sum_{i in J} a_i phi_i`` and its gradient.

    Implicit differentiation of ``E[Phi(|f_a|/k)] = 1`` gives, in complex form,

        grad = k * sum_j w_j Phi'(u_j) (f_j/|f_j|) conj(phi_i(j)) / E[Phi'(u)|f|]

    with ``u = |f|/k``; the real gradient is ``(Re grad, Im grad)``.  Atoms
    where ``f_a`` vanishes contribute nothing.
    """
    a = np.asarray(a, dtype=complex)
    if not np.any(a != 0):
        raise ValueError("gradient is undefined at a = 0")
    space = system.space
    f = system.synthesize(J, a)
    absf = np.abs(f)
    res = norm_of_abs(space.weights, spec, absf, rel_tol)
    k = res.value
    if k == 0.0:
        raise ValueError("gradient is undefined where f_a = 0")
    dphi = np.asarray(young_deriv(spec, absf / k))
    denom = float(np.sum(space.weights * dphi * absf))
    if not np.isfinite(denom) or denom <= 1e-300:
        raise NumericalFailure("modular has vanishing k-derivative at the norm")
    nz = absf > 0
    phase = np.zeros_like(f)
    phase[nz] = f[nz] / absf[nz]
    g = k * system.analyze(J, space.weights * dphi * phase) / denom
    return k, np.concatenate([g.real, g.imag])


def luxemburg_gradient(spec: YoungSpec, system, J, a, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Gradient of ``a -> ||sum_{i in J} a_i phi_i||_Phi``.

    Laid out as ``[Re a_1 .. Re a_m, Im a_1 .. Im a_m]`` for ``m = |J|``.
    """
    return value_and_gradient(spec, system, J, a, rel_tol)[1]
