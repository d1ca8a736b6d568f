"""Seeded Bernoulli index selection and the selection densities.

Generator contract (pinned so that any implementation reproduces the same
sets bit for bit): index ``i`` (1-based) is kept iff ``u_i < delta`` where

    z   = (seed + i * 0x9E3779B97F4A7C15) mod 2**64
    z   = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z   = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z   = z ^ (z >> 31)
    u_i = (z >> 11) * 2**-53

i.e. ``u_i`` is the i-th SplitMix64 output for state ``seed``, mapped to a
double in [0, 1).  Inclusion of ``i`` depends on ``(seed, i)`` only.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1


def splitmix64(seed: int, i):
    """The i-th SplitMix64 output (i >= 1) of state ``seed``; vectorized over ``i``."""
    i = np.asarray(i, dtype=np.uint64)
    # uint64 arithmetic wraps mod 2**64, which is exactly what the mixer wants
    with np.errstate(over="ignore"):
        z = np.uint64(seed & MASK64) + i * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, n: int) -> np.ndarray:
    """``u_1 .. u_n`` of the generator contract."""
    z = splitmix64(seed, np.arange(1, n + 1, dtype=np.uint64))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True, eq=False)
class IndexSet:
    """Sorted 1-based indices selected out of ``[1, n]``."""

    indices: np.ndarray
    n: int
    delta: float
    seed: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        if idx.size and (idx[0] < 1 or idx[-1] > self.n or np.any(np.diff(idx) <= 0)):
            raise ValueError("indices must be strictly increasing within [1, n]")
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return int(self.indices.size)

    def __iter__(self):
        return iter(self.indices.tolist())

    def __eq__(self, other):
        if not isinstance(other, IndexSet):
            return NotImplemented
        return (
            (self.n, self.delta, self.seed) == (other.n, other.delta, other.seed)
            and np.array_equal(self.indices, other.indices)
        )

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "delta": self.delta, "seed": self.seed, "indices": self.indices.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "IndexSet":
        d = json.loads(text)
        return cls(np.asarray(d["indices"], dtype=np.int64), int(d["n"]), float(d["delta"]), int(d["seed"]))


def bernoulli_subset(n: int, delta: float, seed: int) -> IndexSet:
    """Keep each of ``1..n`` independently with probability ``delta``."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    if n < 0:
        raise ValueError("n must be >= 0")
    seed = int(seed) & MASK64
    keep = np.flatnonzero(uniforms(seed, n) < delta) + 1
    return IndexSet(keep, int(n), float(delta), seed)


def delta_main(n: int, alpha: float) -> float:
    """``1 / (e ln(n)^(alpha+1))``, clamped to 1."""
    if n < 3:
        raise ValueError("n must be >= 3")
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    return min(1.0, 1.0 / (math.e * math.log(n) ** (alpha + 1)))


def delta_power(n: int, rho: float) -> float:
    """``ln(n)^(-rho)``, clamped to 1."""
    if n < 3:
        raise ValueError("n must be >= 3")
    if not rho > 0:
        raise ValueError("rho must be > 0")
    return min(1.0, math.log(n) ** (-rho))
