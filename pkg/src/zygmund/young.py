"""Young function families and numerical checks of the Young axioms.

Four families are supported:

``power``
    ``u**p`` for ``p >= 1``.
``close2``
    ``u**2`` below ``e`` and ``u**2 * ln(u)**alpha`` from ``e`` on.  With the
    junction at ``e`` the constant in front of the quadratic piece is 1, which
    makes the function continuous with an upward derivative jump.
``ryou``
    ``c * u**2`` below ``e`` and ``u**p * ln(u)**(alpha*p)`` from ``e`` on,
    ``c = e**(p - 2)`` for continuity.
``kashinG``
    ``u**2 * ln(e + u)**alpha / ln(e + 1/u)**alpha`` with value 0 at 0.

All logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

FAMILIES = ("power", "close2", "ryou", "kashinG")
# integer codes shared with the kernels
FAMILY_CODES = {name: i for i, name in enumerate(FAMILIES)}


@dataclass(frozen=True)
class YoungSpec:
    family: str
    alpha: float | None = None
    p: float | None = None
    u0: float | None = None
    c: float | None = None

    @property
    def code(self) -> int:
        return FAMILY_CODES[self.family]

    @property
    def upper_exponents(self) -> tuple[float, float]:
        """``(q, beta)`` of the piece ``u**q * ln(u)**beta`` used from ``u0`` on."""
        if self.family == "close2":
            return 2.0, self.alpha
        if self.family == "ryou":
            return self.p, self.alpha * self.p
        raise ValueError(f"{self.family} is not a piecewise family")

    def kernel_params(self) -> tuple[int, float, float, float, float]:
        """Flat ``(code, alpha, p, u0, c)`` tuple passed to the compiled kernels."""
        nan = float("nan")
        return (
            self.code,
            nan if self.alpha is None else float(self.alpha),
            nan if self.p is None else float(self.p),
            nan if self.u0 is None else float(self.u0),
            nan if self.c is None else float(self.c),
        )

    def __call__(self, u):
        return young_eval(self, u)

    def __str__(self) -> str:
        return format_family(self)


def young_close2(alpha: float) -> YoungSpec:
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    return YoungSpec("close2", alpha=alpha, u0=math.e, c=1.0)


def young_power(p: float) -> YoungSpec:
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return YoungSpec("power", p=p)


def young_ryou(p: float, alpha: float) -> YoungSpec:
    p, alpha = float(p), float(alpha)
    if not p > 2:
        raise ValueError(f"p must be > 2, got {p}")
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    return YoungSpec("ryou", alpha=alpha, p=p, u0=math.e, c=math.exp(p - 2.0))


def young_kashin(alpha: float) -> YoungSpec:
    alpha = float(alpha)
    if not alpha > 0.5:
        raise ValueError(f"alpha must be > 1/2, got {alpha}")
    return YoungSpec("kashinG", alpha=alpha)


def _as_nonneg(u):
    arr = np.asarray(u, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise ValueError("Young functions are evaluated at u >= 0 only")
    return arr


def _finish(out, u):
    return float(out) if np.ndim(u) == 0 else out


def young_eval(spec: YoungSpec, u):
    """Evaluate the Young function at ``u >= 0`` (scalar or array)."""
    x = _as_nonneg(u)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if spec.family == "power":
            out = x**spec.p
        elif spec.family in ("close2", "ryou"):
            q, beta = spec.upper_exponents
            lo = spec.c * x * x
            hi = x**q * np.log(np.maximum(x, spec.u0)) ** beta
            out = np.where(x < spec.u0, lo, hi)
        elif spec.family == "kashinG":
            a = spec.alpha
            safe = np.where(x > 0, x, 1.0)
            g = safe * safe * (np.log(math.e + safe) / np.log(math.e + 1.0 / safe)) ** a
            out = np.where(x > 0, g, 0.0)
        else:
            raise ValueError(f"unknown family {spec.family!r}")
    return _finish(out, u)


def young_deriv(spec: YoungSpec, u):
    """Derivative of the Young function; the right derivative at the junction ``u0``."""
    x = _as_nonneg(u)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if spec.family == "power":
            p = spec.p
            out = np.ones_like(x) if p == 1 else p * x ** (p - 1)
        elif spec.family in ("close2", "ryou"):
            q, beta = spec.upper_exponents
            lo = 2.0 * spec.c * x
            L = np.log(np.maximum(x, spec.u0))
            xs = np.maximum(x, spec.u0)
            hi = xs ** (q - 1) * (q * L**beta + beta * L ** (beta - 1))
            out = np.where(x < spec.u0, lo, hi)
        elif spec.family == "kashinG":
            a = spec.alpha
            safe = np.where(x > 0, x, 1.0)
            A = np.log(math.e + safe)
            B = np.log(math.e + 1.0 / safe)
            r = (A / B) ** a
            d = (
                2.0 * safe * r
                + a * safe * safe * r / (A * (math.e + safe))
                + a * r / (B * (math.e + 1.0 / safe))
            )
            out = np.where(x > 0, d, 0.0)
        else:
            raise ValueError(f"unknown family {spec.family!r}")
    return _finish(out, u)


@dataclass(frozen=True)
class ValidationReport:
    zero_at_zero: bool
    increasing: bool
    convex: bool
    unbounded: bool
    nice_at_zero: bool
    nice_at_infinity: bool
    min_deriv_step: float
    ratio_at_min: float
    ratio_at_max: float

    @property
    def is_young(self) -> bool:
        return self.zero_at_zero and self.increasing and self.convex and self.unbounded

    @property
    def is_nice(self) -> bool:
        return self.is_young and self.nice_at_zero and self.nice_at_infinity

    def to_dict(self) -> dict:
        d = asdict(self)
        d["is_young"] = self.is_young
        d["is_nice"] = self.is_nice
        return d


def default_grid(points: int = 400, lo: float = 1e-6, hi: float = 1e8) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), points)


def young_validate(
    spec: YoungSpec,
    grid=None,
    *,
    convex_tol: float = 1e-9,
    zero_tol: float = 1e-3,
    inf_threshold: float = 1e3,
) -> ValidationReport:
    """Scan ``spec`` on a positive increasing grid and report the Young axioms.

    Convexity is witnessed by a nondecreasing derivative; the tolerance is
    relative to the derivative's magnitude since it spans many decades.
    """
    u = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if u.ndim != 1 or u.size == 0:
        raise ValueError("grid must be a nonempty 1-d sequence")
    if np.any(u <= 0) or np.any(np.diff(u) <= 0):
        raise ValueError("grid must be positive and strictly increasing")

    phi = np.asarray(young_eval(spec, u), dtype=float)
    dphi = np.asarray(young_deriv(spec, u), dtype=float)
    steps = np.diff(dphi) / np.maximum(1.0, np.abs(dphi[:-1]))
    min_step = float(steps.min()) if steps.size else 0.0
    ratio = phi / u
    return ValidationReport(
        zero_at_zero=young_eval(spec, 0.0) == 0.0,
        increasing=bool(np.all(np.diff(phi) > 0)),
        convex=bool(min_step >= -convex_tol),
        unbounded=bool(phi[-1] > inf_threshold),
        nice_at_zero=bool(ratio[0] < zero_tol),
        nice_at_infinity=bool(ratio[-1] > inf_threshold),
        min_deriv_step=min_step,
        ratio_at_min=float(ratio[0]),
        ratio_at_max=float(ratio[-1]),
    )


_BUILDERS = {
    "power": (young_power, ("p",)),
    "close2": (young_close2, ("alpha",)),
    "ryou": (young_ryou, ("p", "alpha")),
    "kashinG": (young_kashin, ("alpha",)),
}


def parse_family(text: str) -> YoungSpec:
    """Parse ``close2:alpha=1.0``, ``power:p=2``, ``ryou:p=3,alpha=0.5``, ``kashinG:alpha=1``."""
    name, _, rest = text.strip().partition(":")
    if name not in _BUILDERS:
        raise ValueError(f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}")
    builder, keys = _BUILDERS[name]
    kwargs = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq or key not in keys:
            raise ValueError(f"bad parameter {item!r} for family {name}")
        kwargs[key] = float(value)
    missing = [k for k in keys if k not in kwargs]
    if missing:
        raise ValueError(f"family {name} needs {', '.join(missing)}")
    return builder(**kwargs)


def format_family(spec: YoungSpec) -> str:
    keys = _BUILDERS[spec.family][1]
    return spec.family + ":" + ",".join(f"{k}={getattr(spec, k)!r}" for k in keys)
