"""Model-side bounds from curvature bounds and a verification harness.

A lower bound R(t) >= Q+ on the directional curvature caps the geodesic's
first conjugate time by the model time of (diagram, Q+); an upper bound
R(t) <= Q- floors it.  Averaged (Ricci) bounds per level feed the
single-row diagonal models instead.  The harness checks the hypothesis on
the integration grid and asserts the inequality between both computed
times.
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
    ConjugateTimeResult,
    first_conjugate_time,
    integrate_jacobi,
)
from .lq import (
    DiagonalRowModel,
    FINITE_CLASS,
    LQModel,
    classify_finiteness,
    closed_form_tc,
    lq_conjugate_time,
)
from .tolerances import DEFAULT_TOL, Tolerances
from .young import Level, YoungDiagram, build_structural_matrices, partial_trace_ricci

__all__ = [
    "CurvatureBoundSpec",
    "sectional_bound",
    "ricci_bound",
    "bonnet_myers_diameter",
    "verify_comparison",
    "ComparisonReport",
]

SECTIONAL_LOWER = "sectional-lower"
SECTIONAL_UPPER = "sectional-upper"
RICCI_LEVEL = "ricci-level"

HYPOTHESIS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CurvatureBoundSpec:
    """A curvature hypothesis: a matrix bound or per-superbox Ricci bounds.

    ``kind`` is sectional-lower (R >= bound, upper bound on t_c),
    sectional-upper (R <= bound, lower bound on t_c), or ricci-level with
    constants k_i meaning (1/size) * trace over superbox i >= k_i.
    """

    kind: str
    diagram: YoungDiagram
    bound: np.ndarray | None = None          # sectional kinds
    level: Level | None = None               # ricci-level
    constants: tuple[float, ...] | None = None

    def __post_init__(self):
        n = self.diagram.total_boxes
        if self.kind in (SECTIONAL_LOWER, SECTIONAL_UPPER):
            B = np.asarray(self.bound, dtype=float)
            if B.shape != (n, n):
                raise ValueError(f"bound must be {n}x{n}")
            object.__setattr__(self, "bound", 0.5 * (B + B.T))
        elif self.kind == RICCI_LEVEL:
            if self.level is None or self.constants is None:
                raise ValueError("ricci-level needs a level and its constants")
            if self.level not in self.diagram.levels():
                raise ValueError("level does not belong to the diagram")
            if len(self.constants) != self.level.length:
                raise ValueError("need one constant per superbox of the level")
        else:
            raise ValueError(f"unknown bound kind {self.kind!r}")


def sectional_bound(
    spec: CurvatureBoundSpec,
    horizon: float = 50.0,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[ConjugateTimeResult, str]:
    """Model conjugate time for a matrix curvature bound, plus its direction.

    Lower bound on curvature -> the returned time is an upper bound on the
    geodesic's t_c; upper bound on curvature -> a lower bound.
    """
    if spec.kind not in (SECTIONAL_LOWER, SECTIONAL_UPPER):
        raise ValueError("need a sectional bound spec")
    model = LQModel(spec.diagram, spec.bound)
    res = lq_conjugate_time(model, horizon, tol)
    direction = ("upper-bound-on-tc" if spec.kind == SECTIONAL_LOWER
                 else "lower-bound-on-tc")
    return res, direction


def ricci_bound(
    spec: CurvatureBoundSpec,
    horizon: float = 50.0,
    tol: Tolerances = DEFAULT_TOL,
) -> ConjugateTimeResult:
    """Model time t_c(k_1..k_l) for an averaged per-level bound."""
    if spec.kind != RICCI_LEVEL:
        raise ValueError("need a ricci-level bound spec")
    model = DiagonalRowModel(spec.constants)
    cf = closed_form_tc(model)
    if cf is not None and math.isfinite(cf):
        half = 0.5 * tol.refine
        return ConjugateTimeResult(
            FINITE, time=cf, bracket=(cf - half, cf + half), horizon=horizon,
            witness="closed-form",
        )
    if cf == math.inf:
        return ConjugateTimeResult(CERTIFIED_INFINITE, horizon=horizon,
                                   certificate="closed-form")
    return lq_conjugate_time(model, horizon, tol)


def bonnet_myers_diameter(
    length: int,
    size: int,
    constants,
    horizon: float = 50.0,
    tol: Tolerances = DEFAULT_TOL,
) -> float | None:
    """Diameter bound t_c(k_1..k_l) when the polynomial condition certifies
    finiteness; None otherwise.  ``size`` only scales the hypothesis the
    caller must have divided by, so it is accepted for the record."""
    if size < 1 or length < 1 or len(tuple(constants)) != length:
        raise ValueError("inconsistent level data")
    model = DiagonalRowModel(tuple(constants))
    verdict, _ = classify_finiteness(model)
    if verdict != FINITE_CLASS:
        return None
    cf = closed_form_tc(model)
    if cf is not None and math.isfinite(cf):
        return cf
    res = lq_conjugate_time(model, horizon, tol)
    return res.time if res.is_finite else None


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of a single comparison verification."""

    hypothesis_ok: bool
    hypothesis_margin: float     # worst signed margin over the grid
    tc_geodesic: ConjugateTimeResult | None
    tc_model: ConjugateTimeResult | None
    inequality_ok: bool | None   # None when vacuous or not applicable
    slack: float | None          # model time minus geodesic time (lower kind)

    @property
    def vacuous(self) -> bool:
        return not self.hypothesis_ok

    def as_dict(self) -> dict:
        def _t(res):
            if res is None:
                return None
            return res.time if res.is_finite else res.verdict

        return {
            "tc_geodesic": _t(self.tc_geodesic),
            "tc_model": _t(self.tc_model),
            "margin": self.hypothesis_margin,
            "verdict": ("vacuous" if self.vacuous
                        else "pass" if self.inequality_ok else "fail"),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


def _hypothesis_margin(field, spec, ts):
    """Worst signed margin of the hypothesis over the sample times."""
    worst = math.inf
    for t in ts:
        R = field(t)
        if spec.kind == SECTIONAL_LOWER:
            m = float(np.linalg.eigvalsh(R - spec.bound)[0])
        elif spec.kind == SECTIONAL_UPPER:
            m = float(np.linalg.eigvalsh(spec.bound - R)[0])
        else:
            traces = partial_trace_ricci(R, spec.diagram, spec.level)
            m = min(tr / spec.level.size - k
                    for tr, k in zip(traces, spec.constants))
        worst = min(worst, m)
    return worst


def verify_comparison(
    structural,
    field: CurvatureField,
    spec: CurvatureBoundSpec,
    horizon: float,
    tol: Tolerances = DEFAULT_TOL,
    grid_points: int | None = None,
) -> ComparisonReport:
    """Check the comparison inequality on concrete geodesic data.

    The hypothesis is sampled on the integration grid with tolerance
    -1e-9 * scale; a violated hypothesis makes the check vacuous, reported
    distinctly from a failed inequality.
    """
    traj = integrate_jacobi(structural, field, horizon, tol,
                            grid_points=grid_points)
    scale = 1.0 + (float(np.linalg.norm(spec.bound, 2))
                   if spec.bound is not None
                   else max(abs(k) for k in spec.constants))
    margin = _hypothesis_margin(field, spec, traj.ts)
    if margin < -HYPOTHESIS_TOL * scale:
        return ComparisonReport(
            hypothesis_ok=False, hypothesis_margin=margin,
            tc_geodesic=None, tc_model=None, inequality_ok=None, slack=None,
        )

    tc_geo = first_conjugate_time(traj)
    if spec.kind == RICCI_LEVEL:
        tc_model = ricci_bound(spec, horizon, tol)
        upper = True
    else:
        tc_model, direction = sectional_bound(spec, horizon, tol)
        upper = direction == "upper-bound-on-tc"

    slack = None
    allowance = 10.0 * tol.refine
    if upper:
        # model time must dominate the geodesic time
        if tc_model.is_finite:
            if tc_geo.is_finite:
                slack = tc_model.time - tc_geo.time
                ok = tc_geo.time <= tc_model.time + allowance
            else:
                # geodesic outlived the model bound: a violation only if the
                # horizon actually reached the model time
                ok = horizon < tc_model.time + allowance
                slack = math.inf
        else:
            ok = True
            slack = math.inf
    else:
        # model time floors the geodesic time
        if tc_geo.is_finite:
            if tc_model.is_finite:
                slack = tc_geo.time - tc_model.time
                ok = tc_geo.time >= tc_model.time - allowance
            else:
                ok = False
                slack = -math.inf
        else:
            ok = True
            slack = math.inf

    return ComparisonReport(
        hypothesis_ok=True, hypothesis_margin=margin,
        tc_geodesic=tc_geo, tc_model=tc_model,
        inequality_ok=bool(ok), slack=slack,
    )
