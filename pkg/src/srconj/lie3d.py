"""Left-invariant contact structures on 3D unimodular Lie groups.

The pair of scalar invariants (chi, kappa) determines the structure.  For
chi > 0 the canonical frame has bracket constants (chi + kappa, chi - kappa)
and the covector flow

    dh0 = 2 chi h1 h2,   dh1 = h0 h2,   dh2 = -h0 h1

conserves H = (h1^2 + h2^2)/2 and E = h0^2/(2 chi) + h2^2.  (The h1
equation is forced by conservation of H together with the quoted h2
equation; the H-drift checks below guard that derivation.)  Along a
length-parametrized extremal the two Ricci curvatures are

    Ric1 = h0^2 + 3 chi (h1^2 - h2^2) + kappa (h1^2 + h2^2),
    Ric2 = 6 chi (h1^2 - h2^2) h0^2 - 2 chi (chi + kappa) h1^4
           - 12 chi^2 h1^2 h2^2 - 2 chi (chi - kappa) h2^4,

diagonal in the reduced length-2 single-row frame, so conjugate times come
from the 2x2 Jacobi pipeline with R(t) = diag(Ric1, Ric2).  For chi = 0 the
curvature is the constant diag(h0^2 + kappa, 0) and the conjugate time has
the closed form 2*pi/sqrt(h0^2 + kappa).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernel
from .errors import ConservationViolated, IntegrationFailure
from .fields import CurvatureField
from .jacobi import (
    CERTIFIED_INFINITE,
    FINITE,
    ConjugateTimeResult,
    first_conjugate_time,
    integrate_jacobi,
)
from .kernel import systems
from .kernel.pure import _contact3d_ricci, _hermite_eval
from .tolerances import DEFAULT_TOL, GRID_POINTS, Tolerances
from .young import YoungDiagram, build_structural_matrices

__all__ = [
    "StructureConstants3D",
    "ContactStructure3D",
    "CovectorState",
    "invariants_from_constants",
    "covector_from_energy",
    "FlowTrajectory",
    "extremal_flow",
    "curvature_along",
    "e_form_ricci",
    "conjugate_time_3d",
    "chi0_conjugate_time",
    "ricci_bounds_egrande",
    "ebar",
    "min_finite_energy",
    "trajectory_rows",
]

TRACE_FREE_TOL = 1e-12
DRIFT_ABORT = 1e-6

REDUCED_DIAGRAM = YoungDiagram((2,))
_REDUCED = build_structural_matrices(REDUCED_DIAGRAM)


@dataclass(frozen=True)
class StructureConstants3D:
    """Bracket constants of a left-invariant orthonormal frame.

    [X1, X0] = c01_1 X1 + c01_2 X2
    [X2, X0] = c02_1 X1 + c02_2 X2
    [X2, X1] = c12_1 X1 + c12_2 X2 + X0

    Unimodularity with a contact normalization forces c01_1 + c02_2 = 0.
    """

    c01_1: float = 0.0
    c01_2: float = 0.0
    c02_1: float = 0.0
    c02_2: float = 0.0
    c12_1: float = 0.0
    c12_2: float = 0.0

    def __post_init__(self):
        trace = self.c01_1 + self.c02_2
        if abs(trace) > TRACE_FREE_TOL * (1.0 + abs(self.c01_1)):
            raise ValueError(
                f"frame is not trace-free: c01_1 + c02_2 = {trace:g}"
            )


def invariants_from_constants(c: StructureConstants3D) -> tuple[float, float]:
    """(chi, kappa) of the structure with the given constants.

    chi is the positive eigenvalue of the quadratic form
    c01_1 h1^2 + (c01_2 + c02_1) h1 h2 + c02_2 h2^2; for constant frames the
    derivative terms of kappa vanish, leaving
    kappa = -c12_1^2 - c12_2^2 + (c01_2 - c02_1)/2.
    """
    chi = math.sqrt(c.c01_1 ** 2 + 0.25 * (c.c01_2 + c.c02_1) ** 2)
    kappa = -c.c12_1 ** 2 - c.c12_2 ** 2 + 0.5 * (c.c01_2 - c.c02_1)
    return chi, kappa


@dataclass(frozen=True)
class ContactStructure3D:
    """A structure by its invariants; chi > 0 fixes the canonical frame."""

    chi: float
    kappa: float

    def __post_init__(self):
        if self.chi < 0:
            raise ValueError("chi is non-negative by definition")

    def canonical_constants(self) -> StructureConstants3D:
        if self.chi <= 0:
            # chi = 0: rotationally symmetric frame, c01_2 = -c02_1 = kappa
            return StructureConstants3D(c01_2=self.kappa, c02_1=-self.kappa)
        return StructureConstants3D(c01_2=self.chi + self.kappa,
                                    c02_1=self.chi - self.kappa)


@dataclass(frozen=True)
class CovectorState:
    """Fiber coordinates (h0, h1, h2) of the extremal's covector."""

    h0: float
    h1: float
    h2: float

    @property
    def H(self) -> float:
        return 0.5 * (self.h1 ** 2 + self.h2 ** 2)

    def energy(self, chi: float) -> float:
        if chi <= 0:
            raise ValueError("the constant of motion E needs chi > 0")
        return self.h0 ** 2 / (2.0 * chi) + self.h2 ** 2

    def is_length_parametrized(self, tol: float = 1e-12) -> bool:
        return abs(self.h1 ** 2 + self.h2 ** 2 - 1.0) <= tol

    def as_array(self) -> np.ndarray:
        return np.array([self.h0, self.h1, self.h2])


def covector_from_energy(
    s: ContactStructure3D,
    E: float,
    u: float,
    sign_h1: int = 1,
    sign_h2: int = 1,
    sign_h0: int = 1,
) -> CovectorState:
    """Length-parametrized covector with prescribed E on a chi > 0 structure.

    ``u`` in [max(0, 1 - E), 1] selects the slice point: h1^2 = u,
    h2^2 = 1 - u, h0^2 = 2 chi (E - 1 + u); the three signs pick the branch.
    """
    if s.chi <= 0:
        raise ValueError("energy parametrization needs chi > 0")
    u_lo = max(0.0, 1.0 - E)
    if not (u_lo - 1e-12 <= u <= 1.0 + 1e-12):
        raise ValueError(f"u must lie in [{u_lo:g}, 1] for E = {E:g}")
    u = min(max(u, u_lo), 1.0)
    h0sq = 2.0 * s.chi * (E - 1.0 + u)
    return CovectorState(
        h0=math.copysign(math.sqrt(max(h0sq, 0.0)), sign_h0),
        h1=math.copysign(math.sqrt(u), sign_h1),
        h2=math.copysign(math.sqrt(1.0 - u), sign_h2),
    )


@dataclass(eq=False)
class FlowTrajectory:
    """Dense samples of the covector flow with exact nodal derivatives."""

    structure: ContactStructure3D
    ts: np.ndarray          # (m,)
    states: np.ndarray      # (m, 3): h0, h1, h2
    derivs: np.ndarray      # (m, 3)
    max_h_drift: float      # worst |H - H(0)| over the run
    max_e_drift: float      # worst |E - E(0)| (chi > 0)

    @property
    def energy(self) -> float:
        h0, _, h2 = self.states[0]
        return h0 ** 2 / (2.0 * self.structure.chi) + h2 ** 2

    def state_at(self, t: float) -> CovectorState:
        h = _hermite_eval(self.ts, self.states, self.derivs, float(t))
        return CovectorState(h0=float(h[0]), h1=float(h[1]), h2=float(h[2]))

    def curvature_field(self) -> CurvatureField:
        return CurvatureField.contact3d(
            self.structure.chi, self.structure.kappa,
            self.ts, self.states, self.derivs,
        )

    def h0_bound_margins(self) -> tuple[float, float]:
        """Worst margins of 2 chi (E-1) <= h0(t)^2 <= 2 chi E over the grid."""
        chi = self.structure.chi
        E = self.energy
        h0sq = self.states[:, 0] ** 2
        lower = float(np.min(h0sq - 2.0 * chi * (E - 1.0)))
        upper = float(np.min(2.0 * chi * E - h0sq))
        return lower, upper


def _flow_rhs(chi, h):
    return np.array([
        2.0 * chi * h[1] * h[2],
        h[0] * h[2],
        -h[0] * h[1],
    ])


def _flow_grid_points(s: ContactStructure3D, initial: CovectorState,
                      horizon: float) -> int:
    if s.chi > 0:
        omega = math.sqrt(2.0 * s.chi * initial.energy(s.chi)) + 1.0
    else:
        omega = abs(initial.h0) + 1.0
    return int(min(max(4000, math.ceil(256 * horizon * omega)), 200_000))


def extremal_flow(
    s: ContactStructure3D,
    initial: CovectorState,
    horizon: float,
    tol: Tolerances = DEFAULT_TOL,
    grid_points: int | None = None,
) -> FlowTrajectory:
    """Integrate the covector flow, checking H and E conservation.

    Aborts when either conserved quantity drifts beyond 1e-6; typical drift
    at default tolerances is below 1e-9 over horizons up to 20.
    """
    if s.chi <= 0:
        raise ValueError("the flow is only integrated for chi > 0; "
                         "chi = 0 curvature is constant in time")
    if not initial.is_length_parametrized(1e-9):
        raise ValueError("initial covector must satisfy h1^2 + h2^2 = 1")
    m = (grid_points or _flow_grid_points(s, initial, horizon)) + 1
    ts = np.linspace(0.0, horizon, m)
    spec = systems.flow3d_system(s.chi)
    res = kernel.run(spec, initial.as_array(), ts, tol.rtol, tol.atol)
    if res.status != systems.OK:
        raise IntegrationFailure(
            f"covector flow failed at t={res.t_stop:.6g} (status {res.status})",
            t_reached=res.t_stop,
        )
    states = res.states
    derivs = np.column_stack([
        2.0 * s.chi * states[:, 1] * states[:, 2],
        states[:, 0] * states[:, 2],
        -states[:, 0] * states[:, 1],
    ])
    H = 0.5 * (states[:, 1] ** 2 + states[:, 2] ** 2)
    E = states[:, 0] ** 2 / (2.0 * s.chi) + states[:, 2] ** 2
    h_drift = float(np.max(np.abs(H - H[0])))
    e_drift = float(np.max(np.abs(E - E[0])))
    if h_drift > DRIFT_ABORT or e_drift > DRIFT_ABORT:
        raise ConservationViolated(
            f"conserved quantities drifted (|dH|={h_drift:.3g}, "
            f"|dE|={e_drift:.3g}); tighten the tolerances"
        )
    return FlowTrajectory(
        structure=s, ts=ts, states=states, derivs=derivs,
        max_h_drift=h_drift, max_e_drift=e_drift,
    )


def curvature_along(s: ContactStructure3D, state: CovectorState,
                    ) -> tuple[float, float]:
    """The two Ricci curvatures at a covector state (chi > 0 formulas)."""
    r1, r2 = _contact3d_ricci(s.chi, s.kappa, state.h0, state.h1, state.h2)
    return float(r1), float(r2)


def e_form_ricci(s: ContactStructure3D, h0: float, E: float,
                 ) -> tuple[float, float]:
    """Ricci pair rewritten through the constant of motion; used as the
    cross-check of ``curvature_along`` on length-parametrized states."""
    chi, kappa = s.chi, s.kappa
    r1 = 4.0 * h0 ** 2 - 3.0 * chi * (2.0 * E - 1.0) + kappa
    r2 = (8.0 * h0 ** 4
          - (2.0 * kappa + 10.0 * chi * (2.0 * E - 1.0)) * h0 ** 2
          + (2.0 * chi * kappa * (2.0 * E - 1.0)
             + chi ** 2 * (8.0 * E ** 2 - 8.0 * E - 2.0)))
    return float(r1), float(r2)


def chi0_conjugate_time(kappa: float, h0: float) -> ConjugateTimeResult:
    """Exact chi = 0 conjugate time: 2*pi/sqrt(h0^2 + kappa) when positive,
    certified infinite otherwise (the length-2 dichotomy with k2 = 0)."""
    k1 = h0 * h0 + kappa
    if k1 > 0:
        tc = 2.0 * math.pi / math.sqrt(k1)
        return ConjugateTimeResult(
            FINITE, time=tc, bracket=(tc, tc), witness="closed-form",
        )
    return ConjugateTimeResult(
        CERTIFIED_INFINITE, certificate="spectral-dichotomy",
    )


def _jacobi_grid_points(horizon: float, r_scale: float) -> int:
    return max(GRID_POINTS, int(horizon * math.sqrt(max(1.0, r_scale)) * 8))


def conjugate_time_3d(
    s: ContactStructure3D,
    initial: CovectorState,
    horizon: float,
    tol: Tolerances = DEFAULT_TOL,
    method: str = "auto",
) -> ConjugateTimeResult:
    """First conjugate time along the extremal from ``initial``.

    chi = 0 defaults to the closed form (``method="closed-form"``);
    ``method="numeric"`` runs the reduced 2x2 Jacobi pipeline on a constant
    field for chi = 0, or on the curvature along the integrated flow for
    chi > 0.
    """
    if not initial.is_length_parametrized(1e-9):
        raise ValueError("initial covector must satisfy h1^2 + h2^2 = 1")
    if method not in ("auto", "closed-form", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    if s.chi == 0.0:
        if method in ("auto", "closed-form"):
            return chi0_conjugate_time(s.kappa, initial.h0)
        k1 = initial.h0 ** 2 + s.kappa
        field = CurvatureField.constant(np.diag([k1, 0.0]))
        gp = _jacobi_grid_points(horizon, abs(k1))
        traj = integrate_jacobi(_REDUCED, field, horizon, tol, grid_points=gp)
        return first_conjugate_time(traj)
    if method == "closed-form":
        raise ValueError("no closed form for chi > 0")
    flow = extremal_flow(s, initial, horizon, tol)
    field = flow.curvature_field()
    r1 = np.array([_contact3d_ricci(s.chi, s.kappa, *h)[0]
                   for h in flow.states[::max(1, len(flow.states) // 512)]])
    gp = _jacobi_grid_points(horizon, float(np.max(np.abs(r1))))
    traj = integrate_jacobi(_REDUCED, field, horizon, tol, grid_points=gp)
    return first_conjugate_time(traj)


def ricci_bounds_egrande(chi: float, kappa: float, E: float,
                         ) -> tuple[float, float]:
    """Curvature lower bounds (k1, k2) valid along every flow with this E.

    Requires E >= (5 - kappa/chi)/2 so that k1 > 0 and the quartic estimate
    of the second curvature applies.
    """
    if chi <= 0:
        raise ValueError("needs chi > 0")
    threshold = 0.5 * (5.0 - kappa / chi)
    if E < threshold - 1e-12:
        raise ValueError(f"E = {E:g} is below the usable range {threshold:g}")
    k1 = 2.0 * chi * E - 5.0 * chi + kappa
    k2 = 2.0 * chi ** 2 * (15.0 - 26.0 * E) - 2.0 * chi * kappa
    return k1, k2


def ebar(chi: float, kappa: float) -> float:
    """Energy threshold above which every extremal has a finite conjugate time.

    Largest root of 4 chi^2 E^2 + a E + b with a = 4 chi kappa - 228 chi^2
    and b = 145 chi^2 - 18 chi kappa + kappa^2 (beyond it, 4 k2 + k1^2 > 0),
    floored at the usable-range threshold; depends only on kappa/chi.
    """
    if chi <= 0:
        raise ValueError("needs chi > 0")
    a = 4.0 * chi * kappa - 228.0 * chi ** 2
    b = 145.0 * chi ** 2 - 18.0 * chi * kappa + kappa ** 2
    threshold = 0.5 * (5.0 - kappa / chi)
    disc = a * a - 16.0 * chi ** 2 * b
    if disc < 0:
        return threshold
    root = (-a + math.sqrt(disc)) / (8.0 * chi ** 2)
    return max(root, threshold)


def min_finite_energy(
    s: ContactStructure3D,
    energies,
    samples_per_energy: int = 8,
    horizon: float = 20.0,
    tol: Tolerances = DEFAULT_TOL,
) -> float | None:
    """Empirical smallest grid energy at which every sampled covector has a
    finite conjugate time (the provable threshold is not claimed sharp)."""
    best = None
    for E in sorted(energies, reverse=True):
        u_lo = max(0.0, 1.0 - E)
        all_finite = True
        for u in np.linspace(u_lo + 1e-3, 1.0 - 1e-3, samples_per_energy):
            cov = covector_from_energy(s, E, float(u))
            res = conjugate_time_3d(s, cov, horizon, tol)
            if not res.is_finite:
                all_finite = False
                break
        if not all_finite:
            break
        best = float(E)
    return best


def trajectory_rows(
    s: ContactStructure3D,
    initial: CovectorState,
    horizon: float,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[list[str], np.ndarray]:
    """Table (t, h0, h1, h2, R11, R22, detN) along the extremal, for export."""
    header = ["t", "h0", "h1", "h2", "R11", "R22", "detN"]
    if s.chi > 0:
        flow = extremal_flow(s, initial, horizon, tol)
        field = flow.curvature_field()
        traj = integrate_jacobi(_REDUCED, field, horizon, tol)
        hs = np.array([
            _hermite_eval(flow.ts, flow.states, flow.derivs, t)
            for t in traj.ts
        ])
    else:
        k1 = initial.h0 ** 2 + s.kappa
        field = CurvatureField.constant(np.diag([k1, 0.0]))
        traj = integrate_jacobi(_REDUCED, field, horizon, tol)
        m = len(traj.ts)
        hs = np.tile([initial.h0, initial.h1, initial.h2], (m, 1))
        # chi = 0: (h1, h2) precesses at rate h0 but the curvature is constant
        angle = initial.h0 * traj.ts
        c, sn = np.cos(angle), np.sin(angle)
        h1 = c * initial.h1 - sn * initial.h2
        h2 = sn * initial.h1 + c * initial.h2
        hs[:, 1], hs[:, 2] = h1, h2
    riccis = np.array([
        _contact3d_ricci(s.chi, s.kappa, h[0], h[1], h[2]) for h in hs
    ]) if s.chi > 0 else np.column_stack([
        np.full(len(hs), initial.h0 ** 2 + s.kappa), np.zeros(len(hs)),
    ])
    rows = np.column_stack([
        traj.ts, hs[:, 0], hs[:, 1], hs[:, 2],
        riccis[:, 0], riccis[:, 1], traj.det_n,
    ])
    return header, rows
