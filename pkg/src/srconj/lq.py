"""Constant-curvature comparison models and their conjugate times.

A model pairs a Young diagram with a constant symmetric potential Q.  Its
conjugate time is computed numerically from the Jacobi system; the special
shapes with closed forms (isotropic on a one-box-per-row diagram, and a
single row of length two with diagonal potential (k1, 0)) double as exact
anchors.  Finiteness is classified through the substituted polynomial

    p(s) = s^l - sum_{i=0}^{l-1} (-1)^{l-i} kappa_{l-i} s^i,

whose simple negative real roots correspond to the simple purely imaginary
spectrum that forces conjugate times to exist.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .fields import CurvatureField
from .jacobi import (
    CERTIFIED_INFINITE,
    FINITE,
    NONE_UP_TO_HORIZON,
    ConjugateTimeResult,
    first_conjugate_time,
    integrate_jacobi,
)
from .polyroots import negative_simple_roots
from .tolerances import DEFAULT_TOL, GRID_POINTS, Tolerances
from .young import YoungDiagram, build_structural_matrices

__all__ = [
    "LQModel",
    "DiagonalRowModel",
    "finiteness_polynomial",
    "classify_finiteness",
    "classify_finiteness_l2",
    "closed_form_tc",
    "hamiltonian_spectrum",
    "lq_conjugate_time",
    "model_to_json",
    "model_from_json",
]

DEFAULT_HORIZON = 50.0

FINITE_CLASS = "finite"
INFINITE_CLASS = "infinite"
NOT_CERTIFIED = "not-certified"


@dataclass(frozen=True, eq=False)
class LQModel:
    """Diagram plus constant symmetric potential."""

    diagram: YoungDiagram
    Q: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        n = self.diagram.total_boxes
        if Q.shape != (n, n):
            raise ValueError(f"potential must be {n}x{n}, got {Q.shape}")
        if np.max(np.abs(Q - Q.T)) > 1e-12 * (1.0 + np.max(np.abs(Q))):
            raise ValueError("potential must be symmetric")
        object.__setattr__(self, "Q", 0.5 * (Q + Q.T))

    @property
    def dimension(self) -> int:
        return self.diagram.total_boxes

    def hamiltonian_matrix(self) -> np.ndarray:
        """The 2n x 2n block matrix [[-G1, -Q], [G2, G1^T]] generating the flow."""
        s = build_structural_matrices(self.diagram)
        n = self.dimension
        H = np.zeros((2 * n, 2 * n))
        H[:n, :n] = -s.gamma1
        H[:n, n:] = -self.Q
        H[n:, :n] = s.gamma2
        H[n:, n:] = s.gamma1.T
        return H

    def is_riemannian_isotropic(self) -> float | None:
        """The scalar kappa when the diagram is all length-1 rows and Q = kappa*I."""
        if any(r != 1 for r in self.diagram.row_lengths):
            return None
        k = float(self.Q[0, 0])
        if np.max(np.abs(self.Q - k * np.eye(self.dimension))) > 1e-12 * (1 + abs(k)):
            return None
        return k

    def as_diagonal_row(self) -> "DiagonalRowModel | None":
        if self.diagram.num_rows != 1:
            return None
        off = self.Q - np.diag(np.diag(self.Q))
        if np.max(np.abs(off)) > 1e-12 * (1.0 + np.max(np.abs(self.Q))):
            return None
        return DiagonalRowModel(tuple(float(k) for k in np.diag(self.Q)))


@dataclass(frozen=True)
class DiagonalRowModel:
    """Single-row model with diagonal potential (kappa_1, ..., kappa_l)."""

    kappas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "kappas",
                           tuple(float(k) for k in self.kappas))
        if not self.kappas:
            raise ValueError("need at least one diagonal entry")

    @property
    def length(self) -> int:
        return len(self.kappas)

    def to_lq_model(self) -> LQModel:
        return LQModel(YoungDiagram((self.length,)), np.diag(self.kappas))


def finiteness_polynomial(kappas) -> np.ndarray:
    """Monic coefficients (highest power first) of p(s) for LQ(k1..kl)."""
    ks = [float(k) for k in kappas]
    ell = len(ks)
    coeffs = np.zeros(ell + 1)
    coeffs[0] = 1.0
    for i in range(ell):
        # coefficient of s^i
        coeffs[ell - i] = -((-1.0) ** (ell - i)) * ks[ell - i - 1]
    return coeffs


def classify_finiteness(model: DiagonalRowModel) -> tuple[str, float | None]:
    """Spectral finiteness of LQ(k1..kl) via simple negative roots of p(s).

    Finite comes with the witness root.  Lengths one and two are decided
    exactly in both directions; for l >= 3 the absence of a simple negative
    root is only NOT_CERTIFIED (deciding infiniteness would need the Jordan
    structure, which is numerically ill-posed).
    """
    p = finiteness_polynomial(model.kappas)
    roots = negative_simple_roots(p)
    if roots:
        return FINITE_CLASS, roots[0].value
    if model.length <= 2:
        return INFINITE_CLASS, None
    return NOT_CERTIFIED, None


def classify_finiteness_l2(k1: float, k2: float) -> str:
    """Exact two-case analysis for the length-2 row."""
    if (k1 > 0 and 4.0 * k2 > -(k1 * k1)) or (k1 <= 0 and k2 > 0):
        return FINITE_CLASS
    return INFINITE_CLASS


def closed_form_tc(model: LQModel | DiagonalRowModel) -> float | None:
    """Exact first conjugate time for the covered shapes, None otherwise.

    Isotropic one-box-per-row models: pi/sqrt(kappa) for kappa > 0, infinite
    otherwise.  Single row of length two with (k1 > 0, k2 = 0): 2*pi/sqrt(k1).
    """
    if isinstance(model, DiagonalRowModel):
        if model.length == 1:
            k = model.kappas[0]
            return math.pi / math.sqrt(k) if k > 0 else math.inf
        if model.length == 2 and model.kappas[1] == 0.0 and model.kappas[0] > 0:
            return 2.0 * math.pi / math.sqrt(model.kappas[0])
        return None
    k = model.is_riemannian_isotropic()
    if k is not None:
        return math.pi / math.sqrt(k) if k > 0 else math.inf
    row = model.as_diagonal_row()
    if row is not None and not isinstance(row, LQModel):
        return closed_form_tc(row) if row.length <= 2 else None
    return None


@dataclass(frozen=True)
class SpectrumEntry:
    value: complex
    multiplicity: int
    purely_imaginary: bool


def hamiltonian_spectrum(model: LQModel) -> list[SpectrumEntry]:
    """Eigenvalues of the flow generator with multiplicities.

    Diagnostic only: eigenvalues are clustered at 1e-8 resolution and the
    imaginary flag is set when |Re| <= 1e-9 * (1 + |value|); the Jordan
    structure is not certified numerically.
    """
    vals = np.linalg.eigvals(model.hamiltonian_matrix())
    vals = sorted(vals, key=lambda z: (round(z.real, 8), round(z.imag, 8)))
    scale = 1e-8 * (1.0 + max(abs(v) for v in vals))
    entries: list[SpectrumEntry] = []
    for v in vals:
        if entries and abs(v - entries[-1].value) <= scale:
            last = entries[-1]
            entries[-1] = SpectrumEntry(last.value, last.multiplicity + 1,
                                        last.purely_imaginary)
        else:
            entries.append(SpectrumEntry(
                complex(v), 1, bool(abs(v.real) <= 1e-9 * (1.0 + abs(v)))
            ))
    return entries


def _scan_grid_points(horizon: float, Q: np.ndarray) -> int:
    freq = math.sqrt(max(1.0, float(np.linalg.norm(Q, 2))))
    return max(GRID_POINTS, int(horizon * freq * 8))


def lq_conjugate_time(
    model: LQModel | DiagonalRowModel,
    horizon: float = DEFAULT_HORIZON,
    tol: Tolerances = DEFAULT_TOL,
    grid_points: int | None = None,
) -> ConjugateTimeResult:
    """First conjugate time of the model by the dense det-N scan.

    When the scan is empty the verdict is upgraded to certified-infinite if
    the zero-potential argument, the spectral classification of a diagonal
    row, or the isotropic closed form proves there is none.
    """
    if isinstance(model, DiagonalRowModel):
        model = model.to_lq_model()
    s = build_structural_matrices(model.diagram)
    field = CurvatureField.constant(model.Q)
    gp = grid_points or _scan_grid_points(horizon, model.Q)
    traj = integrate_jacobi(s, field, horizon, tol, grid_points=gp)
    res = first_conjugate_time(traj)
    if res.is_finite:
        return res

    flags = res.flags
    if not np.any(model.Q):
        return ConjugateTimeResult(
            CERTIFIED_INFINITE, horizon=horizon, certificate="zero-potential",
            flags=flags,
        )
    row = model.as_diagonal_row()
    if row is not None:
        verdict, _ = classify_finiteness(row)
        if verdict == INFINITE_CLASS:
            return ConjugateTimeResult(
                CERTIFIED_INFINITE, horizon=horizon,
                certificate="spectral-dichotomy", flags=flags,
            )
        if verdict == FINITE_CLASS:
            flags = flags + ("classified-finite-beyond-horizon",)
    k = model.is_riemannian_isotropic()
    if k is not None and k <= 0:
        return ConjugateTimeResult(
            CERTIFIED_INFINITE, horizon=horizon, certificate="closed-form",
            flags=flags,
        )
    return ConjugateTimeResult(NONE_UP_TO_HORIZON, horizon=horizon, flags=flags)


def model_to_json(model: LQModel | DiagonalRowModel) -> str:
    if isinstance(model, DiagonalRowModel):
        return json.dumps({"l": model.length, "kappas": list(model.kappas)})
    return json.dumps({
        "rows": list(model.diagram.row_lengths),
        "Q": model.Q.tolist(),
    })


def model_from_json(text: str) -> LQModel | DiagonalRowModel:
    doc = json.loads(text)
    if "kappas" in doc:
        kappas = tuple(float(k) for k in doc["kappas"])
        if "l" in doc and int(doc["l"]) != len(kappas):
            raise ValueError("declared length disagrees with the kappas")
        return DiagonalRowModel(kappas)
    if "rows" in doc and "Q" in doc:
        return LQModel(YoungDiagram(tuple(int(r) for r in doc["rows"])),
                       np.array(doc["Q"], dtype=float))
    raise ValueError("need either {rows, Q} or {l, kappas}")
