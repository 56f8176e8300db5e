"""Matrix Riccati flows with limit initial condition and comparison checks.

The inverse-phase trick makes the limit initial condition computable: W
solves

    dW/dt = G1^T W + W G1 + G2 + W R(t) W,   W(0) = 0,

and is positive definite for small t > 0 under controllability.  Once its
smallest eigenvalue clears a threshold, V = W^{-1} continues under

    dV/dt = -G1 V - V G1^T - R(t) - V G2 V,

and the first blow-up of V is the first conjugate time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernel
from .errors import IntegrationFailure, SwitchNotReached
from .fields import CurvatureField
from .jacobi import FINITE, NONE_UP_TO_HORIZON, ConjugateTimeResult
from .kernel import systems
from .tolerances import (
    BLOWUP_CAP,
    BLOWUP_NORM_FLOOR,
    DEFAULT_TOL,
    GRID_POINTS,
    SWITCH_THRESHOLD,
    Tolerances,
)
from .young import StructuralMatrices

__all__ = [
    "RiccatiSolution",
    "integrate_riccati_limit_ic",
    "riccati_comparison_check",
    "RiccatiComparisonReport",
    "riccati_monotonicity_check",
    "MonotonicityReport",
    "matrix_cauchy_schwarz_gap",
    "v_equation_coefficients",
]

# fraction of the horizon within which the W -> V switch must happen
SWITCH_WINDOW = 0.5


@dataclass(eq=False)
class RiccatiSolution:
    """History of a limit-initial-condition Riccati integration.

    The W-phase runs from t = 0 with W(0) = 0 until ``switch_time``; the
    V-phase carries V = W^{-1} forward until the horizon or blow-up.
    """

    w_ts: np.ndarray            # (k,)
    w_states: np.ndarray        # (k, n, n), includes t = 0
    switch_time: float
    v_ts: np.ndarray            # (l,) valid V samples
    v_states: np.ndarray        # (l, n, n)
    blowup_time: float | None
    horizon: float

    @property
    def dimension(self) -> int:
        return self.w_states.shape[1]

    def phase(self, t: float) -> str:
        if t < self.switch_time:
            return "W"
        if self.blowup_time is not None and t >= self.blowup_time:
            return "blown-up"
        return "V"

    def symmetry_defect(self) -> float:
        d = 0.0
        for arr in (self.w_states, self.v_states):
            if len(arr):
                d = max(d, float(np.max(np.abs(arr - np.transpose(arr, (0, 2, 1))))))
        return d


def integrate_riccati_limit_ic(
    structural: StructuralMatrices,
    curvature: CurvatureField,
    horizon: float,
    tol: Tolerances = DEFAULT_TOL,
    grid_points: int | None = None,
) -> tuple[RiccatiSolution, ConjugateTimeResult]:
    """Limit-IC Riccati flow and its blow-up verdict.

    The blow-up time (matrix max-norm beyond the cap under collapsing
    steps) is reported as the conjugate time; it agrees with the det-N
    detector on the same inputs to within ten refinement widths.
    """
    n = structural.dimension
    if curvature.dimension != n:
        raise ValueError("curvature dimension does not match the diagram")
    m = (grid_points or GRID_POINTS) + 1
    ts = np.linspace(0.0, horizon, m)

    w_spec = systems.riccati_w_system(structural.gamma1, structural.gamma2,
                                      curvature.source)
    w_states = [np.zeros((n, n))]
    w_ts = [0.0]
    switch_idx = None
    W = np.zeros(n * n)
    max_switch_idx = max(2, int(SWITCH_WINDOW * (m - 1)))
    for i in range(1, max_switch_idx + 1):
        res = kernel.run(w_spec, W, ts[i - 1:i + 1], tol.rtol, tol.atol)
        if res.status != systems.OK:
            raise IntegrationFailure(
                f"inverse-phase integration failed at t={res.t_stop:.6g} "
                f"(status {res.status})",
                t_reached=res.t_stop,
            )
        W = res.states[-1]
        Wm = W.reshape(n, n)
        w_states.append(Wm.copy())
        w_ts.append(float(ts[i]))
        eigmin = float(np.linalg.eigvalsh(Wm)[0])
        if eigmin > SWITCH_THRESHOLD:
            switch_idx = i
            break
        if eigmin < -1e3 * SWITCH_THRESHOLD:
            raise IntegrationFailure(
                f"inverse-phase matrix lost positivity at t={ts[i]:.6g}; "
                "controllability of the structural pair is suspect"
            )
    if switch_idx is None:
        raise SwitchNotReached(
            f"smallest eigenvalue never exceeded {SWITCH_THRESHOLD:g} within "
            f"t <= {ts[max_switch_idx]:.6g}; structural pair not controllable "
            "or threshold too tight for this horizon"
        )

    V0 = np.linalg.inv(w_states[-1])
    V0 = 0.5 * (V0 + V0.T)
    v_spec = systems.riccati_v_system(structural.gamma1, structural.gamma2,
                                      curvature.source)
    res = kernel.run(v_spec, V0.ravel(), ts[switch_idx:], tol.rtol, tol.atol,
                     norm_cap=BLOWUP_CAP)
    blowup = None
    if res.status == systems.OK:
        pass
    elif res.status == systems.BLOWUP:
        blowup = float(res.t_stop)
    elif res.status == systems.STEP_UNDERFLOW \
            and np.max(np.abs(res.y_stop)) >= BLOWUP_NORM_FLOOR:
        blowup = float(res.t_stop)
    else:
        raise IntegrationFailure(
            f"Riccati integration failed at t={res.t_stop:.6g} "
            f"(status {res.status})",
            t_reached=res.t_stop,
        )

    k = res.n_reached
    v_ts = ts[switch_idx:switch_idx + k + 1]
    v_states = res.states[:k + 1].reshape(-1, n, n)

    sol = RiccatiSolution(
        w_ts=np.array(w_ts),
        w_states=np.array(w_states),
        switch_time=float(ts[switch_idx]),
        v_ts=np.array(v_ts),
        v_states=np.ascontiguousarray(v_states),
        blowup_time=blowup,
        horizon=float(horizon),
    )
    if blowup is not None:
        verdict = ConjugateTimeResult(
            FINITE, time=blowup, bracket=(blowup, blowup + tol.refine),
            horizon=float(horizon), witness="riccati-blowup",
        )
    else:
        verdict = ConjugateTimeResult(NONE_UP_TO_HORIZON, horizon=float(horizon))
    return sol, verdict


def v_equation_coefficients(structural: StructuralMatrices, Q) -> np.ndarray:
    """Constant 2n x 2n coefficient block of the V-equation, -[[Q, G1], [G1^T, G2]].

    With these coefficients the general Riccati form dX = (I X) M (I; X)
    reproduces dV = -G1 V - V G1^T - Q - V G2 V.
    """
    n = structural.dimension
    Q = np.asarray(Q, dtype=float)
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = -Q
    M[:n, n:] = -structural.gamma1
    M[n:, :n] = -structural.gamma1.T
    M[n:, n:] = -structural.gamma2
    return M


def _coeff_eval(M) -> Callable[[float], np.ndarray]:
    if callable(M):
        return lambda t: np.asarray(M(t), dtype=float)
    Mc = np.asarray(M, dtype=float)
    return lambda t: Mc


def _coeff_source(M, two_n: int) -> systems.SourceSpec:
    if callable(M):
        return systems.pycall_source(two_n, M)
    return systems.const_source(np.asarray(M, dtype=float))


def _flip_coefficients(M):
    """Coefficients of the inverse flow: Y = X^{-1} solves the Riccati
    equation with -J M J, J the block swap."""
    if callable(M):
        def flipped(t, M=M):
            A = np.asarray(M(t), dtype=float)
            n = A.shape[0] // 2
            return -np.block([[A[n:, n:], A[n:, :n]], [A[:n, n:], A[:n, :n]]])
        return flipped
    A = np.asarray(M, dtype=float)
    n = A.shape[0] // 2
    return -np.block([[A[n:, n:], A[n:, :n]], [A[:n, n:], A[:n, :n]]])


@dataclass(frozen=True)
class RiccatiComparisonReport:
    ordered: bool
    precondition_ok: bool
    first_violation_time: float | None
    precondition_violation_time: float | None
    min_margin: float
    switch_time: float | None
    compared_nodes: int

    @property
    def ok(self) -> bool:
        return self.ordered and self.precondition_ok


def _ordering_tol(X1, X2) -> float:
    return 1e-8 * (1.0 + float(np.linalg.norm(X1)) + float(np.linalg.norm(X2)))


def riccati_comparison_check(
    m1,
    m2,
    horizon: float,
    x1_0=None,
    x2_0=None,
    limit_ic: bool = False,
    t0: float = 0.0,
    grid_points: int = 400,
    tol: Tolerances = DEFAULT_TOL,
) -> RiccatiComparisonReport:
    """Check the ordered-coefficients comparison: M1 >= M2 implies X1 >= X2.

    ``m1``/``m2`` are constant 2n x 2n symmetric matrices or callables of t.
    Initial data: either matrices ``x1_0 >= x2_0`` at ``t0``, or
    ``limit_ic=True`` for the limit initial condition (both solutions start
    at +infinity; realized through the inverse flow from 0).  Coefficient
    ordering failures are reported separately from conclusion failures.
    """
    ev1, ev2 = _coeff_eval(m1), _coeff_eval(m2)
    two_n = ev1(t0).shape[0]
    n = two_n // 2
    ts = np.linspace(t0, t0 + horizon, grid_points + 1)

    pre_viol = None
    for t in ts:
        D = ev1(t) - ev2(t)
        D = 0.5 * (D + D.T)
        scale = 1.0 + float(np.linalg.norm(ev1(t))) + float(np.linalg.norm(ev2(t)))
        if float(np.linalg.eigvalsh(D)[0]) < -1e-8 * scale:
            pre_viol = float(t)
            break
    if pre_viol is not None:
        return RiccatiComparisonReport(
            ordered=False, precondition_ok=False, first_violation_time=None,
            precondition_violation_time=pre_viol, min_margin=np.nan,
            switch_time=None, compared_nodes=0,
        )

    switch_time = None
    if limit_ic:
        # inverse flow from 0 until both matrices clear the switch threshold
        f1 = systems.general_riccati_system(n, _coeff_source(_flip_coefficients(m1), two_n))
        f2 = systems.general_riccati_system(n, _coeff_source(_flip_coefficients(m2), two_n))
        Y1 = np.zeros(n * n)
        Y2 = np.zeros(n * n)
        switch_idx = None
        for i in range(1, max(2, grid_points // 2)):
            r1 = kernel.run(f1, Y1, ts[i - 1:i + 1], tol.rtol, tol.atol)
            r2 = kernel.run(f2, Y2, ts[i - 1:i + 1], tol.rtol, tol.atol)
            if r1.status != systems.OK or r2.status != systems.OK:
                raise IntegrationFailure("inverse flow failed before the switch")
            Y1, Y2 = r1.states[-1], r2.states[-1]
            e1 = np.linalg.eigvalsh(Y1.reshape(n, n))[0]
            e2 = np.linalg.eigvalsh(Y2.reshape(n, n))[0]
            if min(e1, e2) > SWITCH_THRESHOLD:
                switch_idx = i
                break
        if switch_idx is None:
            raise SwitchNotReached("limit-IC comparison never left the inverse phase")
        switch_time = float(ts[switch_idx])
        X1 = np.linalg.inv(Y1.reshape(n, n))
        X2 = np.linalg.inv(Y2.reshape(n, n))
        start = switch_idx
    else:
        X1 = np.asarray(x1_0, dtype=float)
        X2 = np.asarray(x2_0, dtype=float)
        if float(np.linalg.eigvalsh(0.5 * ((X1 - X2) + (X1 - X2).T))[0]) \
                < -_ordering_tol(X1, X2):
            raise ValueError("initial data are not ordered: need x1_0 >= x2_0")
        start = 0

    g1 = systems.general_riccati_system(n, _coeff_source(m1, two_n))
    g2 = systems.general_riccati_system(n, _coeff_source(m2, two_n))
    r1 = kernel.run(g1, 0.5 * (X1 + X1.T).ravel(), ts[start:], tol.rtol,
                    tol.atol, norm_cap=BLOWUP_CAP)
    r2 = kernel.run(g2, 0.5 * (X2 + X2.T).ravel(), ts[start:], tol.rtol,
                    tol.atol, norm_cap=BLOWUP_CAP)
    k = min(r1.n_reached, r2.n_reached)

    min_margin = np.inf
    first_violation = None
    for j in range(k + 1):
        A = r1.states[j].reshape(n, n)
        B = r2.states[j].reshape(n, n)
        margin = float(np.linalg.eigvalsh(A - B)[0])
        min_margin = min(min_margin, margin)
        if margin < -_ordering_tol(A, B) and first_violation is None:
            first_violation = float(ts[start + j])
    return RiccatiComparisonReport(
        ordered=first_violation is None,
        precondition_ok=True,
        first_violation_time=first_violation,
        precondition_violation_time=None,
        min_margin=min_margin,
        switch_time=switch_time,
        compared_nodes=k + 1,
    )


@dataclass(frozen=True)
class MonotonicityReport:
    monotone: bool
    first_violation_time: float | None
    checked_nodes: int
    worst_rise: float


def riccati_monotonicity_check(
    structural: StructuralMatrices,
    Q,
    horizon: float,
    tol: Tolerances = DEFAULT_TOL,
    grid_points: int | None = None,
) -> MonotonicityReport:
    """Constant-potential limit-IC solutions are monotone non-increasing;
    assert V(t+dt) <= V(t) + tol on the sample grid (up to blow-up)."""
    field = CurvatureField.constant(np.asarray(Q, dtype=float))
    sol, _ = integrate_riccati_limit_ic(structural, field, horizon, tol,
                                        grid_points)
    worst = -np.inf
    first = None
    V = sol.v_states
    for j in range(1, len(V)):
        D = V[j] - V[j - 1]
        rise = float(np.linalg.eigvalsh(0.5 * (D + D.T))[-1])
        worst = max(worst, rise)
        if rise > _ordering_tol(V[j], V[j - 1]) and first is None:
            first = float(sol.v_ts[j])
    return MonotonicityReport(
        monotone=first is None,
        first_violation_time=first,
        checked_nodes=len(V),
        worst_rise=worst,
    )


def matrix_cauchy_schwarz_gap(X, Y) -> np.ndarray:
    """PSD gap of the non-commutative Cauchy-Schwarz inequality.

    For matrix lists X_a, Y_a (a = 1..r) returns

        ||sum Y_a^T Y_a|| * sum X_a^T X_a  -  (sum X_a^T Y_a)(sum X_a^T Y_a)^T

    with the operator norm; the result is positive semidefinite.
    """
    X = [np.asarray(x, dtype=float) for x in X]
    Y = [np.asarray(y, dtype=float) for y in Y]
    if len(X) != len(Y) or not X:
        raise ValueError("need matching non-empty matrix lists")
    ell = X[0].shape[0]
    for A in (*X, *Y):
        if A.shape != (ell, ell):
            raise ValueError("all matrices must share one square shape")
    cross = sum(x.T @ y for x, y in zip(X, Y))
    yy = sum(y.T @ y for y in Y)
    xx = sum(x.T @ x for x in X)
    op_norm = float(np.linalg.norm(yy, 2))
    gap = op_norm * xx - cross @ cross.T
    return 0.5 * (gap + gap.T)
