"""Finite probability spaces and functions on them.

A function on a space is a plain complex numpy array with one value per atom;
every expectation is a weighted sum over atoms.  ``np.sum`` on contiguous
arrays uses pairwise summation, which keeps the relative error of sums over
~1e6 atoms near machine precision.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class ProbSpace:
    """Atoms with probability weights and optional coordinates in [0, 1).

    Parameters
    ----------
    weights : array_like
        Nonnegative probabilities of the atoms, summing to 1 within 1e-12.
    coordinates : array_like, optional
        Point of [0, 1) represented by each atom.
    """

    weights: np.ndarray
    coordinates: np.ndarray | None = None

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if abs(np.sum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {np.sum(w)!r}, not 1")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        if self.coordinates is not None:
            x = np.ascontiguousarray(self.coordinates, dtype=float)
            if x.shape != w.shape:
                raise ValueError("coordinates must have one entry per atom")
            if np.any(x < 0) or np.any(x >= 1):
                raise ValueError("coordinates must lie in [0, 1)")
            x.flags.writeable = False
            object.__setattr__(self, "coordinates", x)

    @property
    def atom_count(self) -> int:
        return self.weights.size

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    def check(self, f, name: str = "f") -> np.ndarray:
        """Return ``f`` as a complex array after checking it lives on this space."""
        arr = np.asarray(f)
        if arr.shape != (self.atom_count,):
            raise ValueError(
                f"{name} has shape {arr.shape}, expected ({self.atom_count},)"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} has non-finite entries")
        return arr


def uniform_grid_space(M: int) -> ProbSpace:
    """Uniform space on the left endpoints ``j/M`` of ``M`` equal cells.

    Left endpoints make discrete Fourier orthogonality exact up to rounding.
    """
    M = int(M)
    if M < 1:
        raise ValueError("M must be >= 1")
    return ProbSpace(np.full(M, 1.0 / M), np.arange(M) / M)


def expectation(space: ProbSpace, g) -> complex | float:
    """Weighted sum of ``g`` over the atoms."""
    g = space.check(g, "g")
    out = np.sum(space.weights * g)
    return complex(out) if np.iscomplexobj(out) else float(out)


def inner_product(space: ProbSpace, f, g) -> complex:
    """``E[f conj(g)]``."""
    f = space.check(f, "f")
    g = space.check(g, "g")
    return complex(np.sum(space.weights * f * np.conj(g)))


def lp_norm(space: ProbSpace, f, p: float) -> float:
    """``(E|f|^p)^(1/p)``; ``p = inf`` gives the max over atoms of positive weight."""
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(space.check(f))
    if np.isinf(p):
        live = a[space.weights > 0]
        return float(live.max()) if live.size else 0.0
    scale = a.max()
    if scale == 0:
        return 0.0
    # rescale so |f|^p cannot overflow for large p
    return float(scale * np.sum(space.weights * (a / scale) ** p) ** (1.0 / p))


def read_func_csv(path) -> np.ndarray:
    """Read a function stored as headerless ``re,im`` rows."""
    data = np.loadtxt(Path(path), delimiter=",", ndmin=2, dtype=float)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected 2 columns (re,im), got {data.shape[1]}")
    return data[:, 0] + 1j * data[:, 1]


def write_func_csv(path, f) -> None:
    f = np.asarray(f, dtype=complex)
    np.savetxt(Path(path), np.column_stack([f.real, f.imag]), delimiter=",", fmt="%.17g")
