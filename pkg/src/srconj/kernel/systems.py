"""System and coefficient-source descriptors consumed by the integrator kernels.

Matrices are flattened row-major.  The compiled and pure kernels dispatch on
the integer tags below and must implement identical semantics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

# system kinds
KIND_JACOBI = 0          # state (M, N), two n x n blocks
KIND_RICCATI_W = 1       # state W, n x n, symmetrized after each step
KIND_RICCATI_V = 2       # state V, n x n, symmetrized after each step
KIND_FLOW3D = 3          # state (h0, h1, h2)
KIND_GENERAL_RICCATI = 4  # state X, n x n, coefficients a 2n x 2n matrix

# coefficient sources
SRC_CONST = 0
SRC_LINEAR = 1           # piecewise-linear samples, clamped outside the range
SRC_PYCALL = 2           # python callable t -> matrix, symmetrized on read
SRC_CONTACT3D = 3        # cubic-Hermite covector samples -> diag(Ric1, Ric2)

# run statuses
OK = 0
BLOWUP = 1
STEP_UNDERFLOW = 2
MAX_STEPS_EXCEEDED = 3
NONFINITE = 4


@dataclass(eq=False)
class SourceSpec:
    kind: int
    n: int
    const: Optional[np.ndarray] = None     # (n, n)
    ts: Optional[np.ndarray] = None        # (m,)
    vals: Optional[np.ndarray] = None      # (m, n, n)
    func: Optional[Callable] = None
    chi: float = 0.0
    kappa: float = 0.0
    hs: Optional[np.ndarray] = None        # (m, 3)
    hds: Optional[np.ndarray] = None       # (m, 3)


@dataclass(eq=False)
class SystemSpec:
    kind: int
    n: int
    dim: int
    gamma1: Optional[np.ndarray] = None
    gamma2: Optional[np.ndarray] = None
    source: Optional[SourceSpec] = None
    chi: float = 0.0
    symmetrize: bool = False


def const_source(Q: np.ndarray) -> SourceSpec:
    Q = np.ascontiguousarray(Q, dtype=float)
    Q = 0.5 * (Q + Q.T)
    return SourceSpec(kind=SRC_CONST, n=Q.shape[0], const=Q)


def linear_source(ts: np.ndarray, vals: np.ndarray) -> SourceSpec:
    ts = np.ascontiguousarray(ts, dtype=float)
    vals = np.ascontiguousarray(vals, dtype=float)
    if ts.ndim != 1 or vals.ndim != 3 or vals.shape[0] != ts.shape[0]:
        raise ValueError("need matching (m,) times and (m, n, n) samples")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("sample times must be strictly increasing")
    vals = 0.5 * (vals + np.transpose(vals, (0, 2, 1)))
    return SourceSpec(kind=SRC_LINEAR, n=vals.shape[1], ts=ts, vals=vals)


def pycall_source(n: int, func: Callable) -> SourceSpec:
    return SourceSpec(kind=SRC_PYCALL, n=n, func=func)


def contact3d_source(chi: float, kappa: float, ts, hs, hds) -> SourceSpec:
    ts = np.ascontiguousarray(ts, dtype=float)
    hs = np.ascontiguousarray(hs, dtype=float)
    hds = np.ascontiguousarray(hds, dtype=float)
    if hs.shape != (ts.shape[0], 3) or hds.shape != hs.shape:
        raise ValueError("need (m,) times with (m, 3) states and derivatives")
    return SourceSpec(
        kind=SRC_CONTACT3D, n=2, chi=float(chi), kappa=float(kappa),
        ts=ts, hs=hs, hds=hds,
    )


def jacobi_system(gamma1, gamma2, source: SourceSpec) -> SystemSpec:
    n = gamma1.shape[0]
    if source.n != n:
        raise ValueError("curvature source dimension mismatch")
    return SystemSpec(
        kind=KIND_JACOBI, n=n, dim=2 * n * n,
        gamma1=np.ascontiguousarray(gamma1, float),
        gamma2=np.ascontiguousarray(gamma2, float),
        source=source,
    )


def riccati_w_system(gamma1, gamma2, source: SourceSpec) -> SystemSpec:
    n = gamma1.shape[0]
    return SystemSpec(
        kind=KIND_RICCATI_W, n=n, dim=n * n,
        gamma1=np.ascontiguousarray(gamma1, float),
        gamma2=np.ascontiguousarray(gamma2, float),
        source=source, symmetrize=True,
    )


def riccati_v_system(gamma1, gamma2, source: SourceSpec) -> SystemSpec:
    n = gamma1.shape[0]
    return SystemSpec(
        kind=KIND_RICCATI_V, n=n, dim=n * n,
        gamma1=np.ascontiguousarray(gamma1, float),
        gamma2=np.ascontiguousarray(gamma2, float),
        source=source, symmetrize=True,
    )


def flow3d_system(chi: float) -> SystemSpec:
    return SystemSpec(kind=KIND_FLOW3D, n=3, dim=3, chi=float(chi))


def general_riccati_system(n: int, source: SourceSpec) -> SystemSpec:
    """Riccati dX = M11 + M12 X + X M12^T + X M22 X with 2n x 2n coefficients M."""
    if source.n != 2 * n:
        raise ValueError("coefficient source must be 2n x 2n")
    return SystemSpec(
        kind=KIND_GENERAL_RICCATI, n=n, dim=n * n, source=source, symmetrize=True,
    )
