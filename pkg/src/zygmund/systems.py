"""Bounded orthogonal systems as linear maps from coefficients to functions.

A system never has to be materialized: ``synthesize(J, a)`` evaluates
``sum_{i in J} a_i phi_i`` on the atoms and ``analyze(J, v)`` is its adjoint
without weights, ``(sum_j v_j conj(phi_i(j)))_{i in J}``.  Fourier systems use
the FFT and Walsh systems the fast Walsh-Hadamard transform, so the full
systems used in the experiments (n up to 16384 on 65536 atoms) cost
O(M log M) per evaluation instead of an n-by-M matrix.

Indices are 1-based throughout, matching ``IndexSet``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .space import ProbSpace, uniform_grid_space

DEFAULT_P1 = 4.0


def as_indices(J, n: int) -> np.ndarray:
    """1-based index array from an ``IndexSet`` or any integer sequence."""
    idx = np.asarray(getattr(J, "indices", J), dtype=np.int64).reshape(-1)
    if idx.size and (idx.min() < 1 or idx.max() > n):
        raise ValueError(f"indices must lie in [1, {n}]")
    return idx


@dataclass(frozen=True)
class SystemStats:
    S: float
    max_ortho_defect: float
    max_sup: float


class System:
    """Ordered functions ``phi_1 .. phi_n`` on a finite probability space."""

    def __init__(self, space: ProbSpace, n: int, p1: float = DEFAULT_P1):
        if n < 1:
            raise ValueError("a system needs at least one function")
        self.space = space
        self.n = int(n)
        self.p1 = float(p1)

    # subclasses implement these three
    def columns(self, J) -> np.ndarray:
        """Values of ``phi_i``, ``i in J``, as an (atoms, |J|) matrix."""
        raise NotImplementedError

    def synthesize(self, J, a) -> np.ndarray:
        return self.columns(J) @ np.asarray(a, dtype=complex)

    def analyze(self, J, v) -> np.ndarray:
        return self.columns(J).conj().T @ np.asarray(v, dtype=complex)

    def gram(self, J) -> np.ndarray:
        """``G[i, l] = <phi_l, phi_i>`` over ``J``, so that ``G a = analyze(w * synthesize(a))``."""
        V = self.columns(J)
        return V.conj().T @ (self.space.weights[:, None] * V)

    def _column_stats(self, p1: float, chunk: int = 256) -> tuple[float, float]:
        w = self.space.weights
        S = sup = 0.0
        for start in range(1, self.n + 1, chunk):
            V = np.abs(self.columns(np.arange(start, min(start + chunk, self.n + 1))))
            sup = max(sup, float(V[w > 0].max()))
            scale = V.max(axis=0)
            safe = np.where(scale > 0, scale, 1.0)
            norms = safe * np.sum(w[:, None] * (V / safe) ** p1, axis=0) ** (1.0 / p1)
            S = max(S, float(norms.max()))
        return S, sup

    def _ortho_defect(self) -> float:
        G = self.gram(np.arange(1, self.n + 1))
        np.fill_diagonal(G, 0)
        return float(np.abs(G).max())

    @cached_property
    def stats(self) -> SystemStats:
        return validate_system(self, self.p1)

    @property
    def S(self) -> float:
        return self.stats.S

    @property
    def max_sup(self) -> float:
        return self.stats.max_sup

    @property
    def max_ortho_defect(self) -> float:
        return self.stats.max_ortho_defect


class DenseSystem(System):
    """System stored as an explicit (atoms, n) matrix, e.g. loaded from CSV."""

    def __init__(self, space: ProbSpace, values, p1: float = DEFAULT_P1):
        V = np.asarray(values, dtype=complex)
        if V.ndim != 2 or V.shape[0] != space.atom_count:
            raise ValueError("values must have shape (atom_count, n)")
        if not np.all(np.isfinite(V)):
            raise ValueError("system values must be finite")
        super().__init__(space, V.shape[1], p1)
        V.flags.writeable = False
        self.values = V

    def columns(self, J) -> np.ndarray:
        return self.values[:, as_indices(J, self.n) - 1]


class FourierSystem(System):
    """Characters ``exp(-2 pi i k x)``, ``k = 1..n``, on the uniform grid of ``M`` atoms."""

    def __init__(self, n: int, M: int, p1: float = DEFAULT_P1):
        super().__init__(uniform_grid_space(M), n, p1)
        self.M = int(M)

    def columns(self, J) -> np.ndarray:
        k = as_indices(J, self.n)
        j = np.arange(self.M)
        # reduce k*j mod M in integers so the phase stays exact for large products
        return np.exp(-2j * np.pi * ((np.outer(j, k) % self.M) / self.M))

    def synthesize(self, J, a) -> np.ndarray:
        k = as_indices(J, self.n)
        c = np.zeros(self.M, dtype=complex)
        np.add.at(c, k % self.M, np.asarray(a, dtype=complex))
        return np.fft.fft(c)

    def analyze(self, J, v) -> np.ndarray:
        k = as_indices(J, self.n)
        return self.M * np.fft.ifft(np.asarray(v, dtype=complex))[k % self.M]

    def _column_stats(self, p1: float, chunk: int = 256) -> tuple[float, float]:
        if self.n * self.M <= 1 << 24:
            return super()._column_stats(p1, chunk)
        # too large to scan every column; every character is unimodular
        V = np.abs(self.columns(np.unique(np.linspace(1, self.n, 64).astype(int))))
        return float(V.max()), float(V.max())

    def _ortho_defect(self) -> float:
        # <phi_k, phi_l> depends only on k - l: it is the DFT of the weights
        if self.n == 1:
            return 0.0
        dft = np.fft.fft(self.space.weights)
        return float(np.abs(dft[np.arange(1, self.n) % self.M]).max())


def fwht(x) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along a length-2^d axis."""
    x = np.array(x, copy=True)
    n = x.shape[0]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < n:
        x = x.reshape(-1, 2, h)
        x = np.stack([x[:, 0] + x[:, 1], x[:, 0] - x[:, 1]], axis=1)
        h *= 2
    return x.reshape(n)


def _parity(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.uint64)
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> np.uint64(shift)
    return (v & np.uint64(1)).astype(np.int64)


class WalshSystem(System):
    """All ``2^d - 1`` nonconstant Walsh characters on ``{0,1}^d``.

    Function ``i`` is ``x -> (-1)^popcount(i & x)``, i.e. the product of the
    Rademacher coordinates selected by the bits of ``i``.
    """

    def __init__(self, d: int, p1: float = DEFAULT_P1):
        self.d = int(d)
        super().__init__(uniform_grid_space(1 << self.d), (1 << self.d) - 1, p1)

    def columns(self, J) -> np.ndarray:
        s = as_indices(J, self.n)
        x = np.arange(1 << self.d)
        signs = 1 - 2 * _parity(np.bitwise_and.outer(x, s))
        return signs.astype(complex)

    def synthesize(self, J, a) -> np.ndarray:
        c = np.zeros(1 << self.d, dtype=complex)
        c[as_indices(J, self.n)] = np.asarray(a, dtype=complex)
        return fwht(c)

    def analyze(self, J, v) -> np.ndarray:
        return fwht(np.asarray(v, dtype=complex))[as_indices(J, self.n)]

    def _ortho_defect(self) -> float:
        # <phi_s, phi_t> is the Walsh transform of the weights at s xor t
        if self.n == 1:
            return 0.0
        return float(np.abs(fwht(self.space.weights)[1:]).max())


def fourier_system(n: int, M: int | None = None, *, allow_aliasing: bool = False) -> FourierSystem:
    """Fourier characters of frequencies ``1..n`` on ``M`` grid atoms.

    ``M`` defaults to ``max(4n, 1024)``.  ``M >= 2n`` is required unless
    ``allow_aliasing`` is set; aliased systems are only useful when a single
    block of consecutive frequencies is evaluated at a time.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    M = max(4 * n, 1024) if M is None else int(M)
    if M < 2 * n and not allow_aliasing:
        raise ValueError(f"M = {M} < 2n = {2 * n}")
    if M < 1:
        raise ValueError("M must be >= 1")
    return FourierSystem(n, M)


def walsh_system(d: int) -> WalshSystem:
    d = int(d)
    if not 1 <= d <= 20:
        raise ValueError("d must lie in [1, 20]")
    return WalshSystem(d)


def validate_system(sys: System, p1: float = DEFAULT_P1) -> SystemStats:
    """Recompute ``S = max_i ||phi_i||_p1``, the largest sup-norm and the largest
    off-diagonal inner product.  Violations are reported, never raised."""
    if sys.n < 1:
        raise ValueError("empty system")
    if not p1 > 2:
        raise ValueError("p1 must be > 2")
    S, sup = sys._column_stats(float(p1))
    return SystemStats(S=S, max_ortho_defect=sys._ortho_defect(), max_sup=sup)


def read_system_csv(path, p1: float = DEFAULT_P1) -> DenseSystem:
    """Load a uniform-grid system: row j holds ``re, im`` pairs for ``phi_1 .. phi_n``."""
    data = np.loadtxt(Path(path), delimiter=",", ndmin=2, dtype=float)
    if data.shape[1] % 2:
        raise ValueError(f"{path}: expected an even number of columns")
    values = data[:, 0::2] + 1j * data[:, 1::2]
    sys = DenseSystem(uniform_grid_space(data.shape[0]), values, p1)
    stats = sys.stats
    if stats.max_sup > 1 + 1e-12 or stats.max_ortho_defect > 1e-10:
        warnings.warn(
            f"{path}: sup-norm {stats.max_sup:.3g}, orthogonality defect "
            f"{stats.max_ortho_defect:.3g} outside the bounded orthogonal regime",
            stacklevel=2,
        )
    return sys


def write_system_csv(path, sys: System) -> None:
    V = sys.columns(np.arange(1, sys.n + 1))
    out = np.empty((V.shape[0], 2 * V.shape[1]))
    out[:, 0::2] = V.real
    out[:, 1::2] = V.imag
    np.savetxt(Path(path), out, delimiter=",", fmt="%.17g")
