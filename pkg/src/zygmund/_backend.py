"""Pick the compiled kernels when importable, else the numpy ones.

``NAME`` records which backend is active; ``python`` and ``compiled`` (the
latter ``None`` when unbuilt) stay importable for benchmarks and
cross-checks.
"""
from __future__ import annotations

from . import _kernels_py as python

try:
    from . import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

active = compiled if compiled is not None else python
NAME = "compiled" if compiled is not None else "python"

modular_abs = active.modular_abs
luxemburg_abs = active.luxemburg_abs
luxemburg_rows = active.luxemburg_rows
