"""Adaptive matrix-ODE integrator with a compiled core and a pure fallback.

The compiled extension (``srconj.kernel._core``) is used when it imported
cleanly; otherwise the numpy implementation in ``pure.py`` takes over.  Set
``SRCONJ_PURE=1`` to force the fallback (used by the benchmark and the
backend parity tests).
"""

from __future__ import annotations

import os

from . import pure as _pure
from . import systems
from .pure import RunResult

if os.environ.get("SRCONJ_PURE") == "1":
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pure


def backend_name() -> str:
    return _impl.BACKEND_NAME


def run(
    system,
    y0,
    t_grid,
    rtol,
    atol,
    norm_cap=1e300,
    h_min=1e-14,
    max_steps=2_000_000,
) -> RunResult:
    out = _impl.run(system, y0, t_grid, rtol, atol, norm_cap, h_min, max_steps)
    if isinstance(out, RunResult):
        return out
    return RunResult(*out)


__all__ = ["run", "backend_name", "systems", "RunResult"]
