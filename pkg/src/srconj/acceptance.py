"""Acceptance suite: the library's exit criteria as runnable checks.

Each criterion returns a CriterionResult and prints one pass/fail line when
run through ``run_all`` (the CLI ``selftest`` subcommand and the pytest
acceptance module both call into here).  Criteria 1-6 register their
(structural, field, horizon) instances so criterion 11 can replay every one
of them through both conjugate-time detectors.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fields import CurvatureField
from .jacobi import FINITE, first_conjugate_time, integrate_jacobi
from .lie3d import (
    ContactStructure3D,
    CovectorState,
    chi0_conjugate_time,
    conjugate_time_3d,
    covector_from_energy,
    curvature_along,
    e_form_ricci,
    ebar,
    extremal_flow,
    ricci_bounds_egrande,
)
from .lq import (
    DiagonalRowModel,
    FINITE_CLASS,
    LQModel,
    classify_finiteness_l2,
    lq_conjugate_time,
)
from .riccati import (
    integrate_riccati_limit_ic,
    matrix_cauchy_schwarz_gap,
    riccati_comparison_check,
    riccati_monotonicity_check,
    v_equation_coefficients,
)
from .tolerances import DEFAULT_TOL
from .young import YoungDiagram, build_structural_matrices

DEFAULT_SEED = 20240803

ROW2 = build_structural_matrices(YoungDiagram((2,)))
RIEM = {n: build_structural_matrices(YoungDiagram((1,) * n)) for n in (1, 2, 3)}


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (f"[{mark}] criterion {self.number:2d} - {self.name} "
                f"({self.elapsed:.1f}s): {self.detail}")


@dataclass(frozen=True)
class Case:
    """One detector input replayed by the cross-validation criterion."""

    name: str
    structural: object
    field: CurvatureField
    horizon: float
    grid_points: int | None = None


def _grid_for(horizon, scale):
    return max(2000, int(horizon * math.sqrt(max(1.0, scale)) * 8))


def _detn_result(case: Case):
    traj = integrate_jacobi(case.structural, case.field, case.horizon,
                            DEFAULT_TOL, grid_points=case.grid_points)
    return first_conjugate_time(traj)


# ---------------------------------------------------------------------------
# shared inputs of criteria 1-6


@lru_cache(maxsize=None)
def _cases_heisenberg() -> tuple[Case, ...]:
    cases = []
    for h0 in (0.5, 1.0, 2.0, 4.0):
        k1 = h0 * h0
        tc = 2.0 * math.pi / abs(h0)
        cases.append(Case(
            f"heisenberg h0={h0}", ROW2,
            CurvatureField.constant(np.diag([k1, 0.0])),
            horizon=1.5 * tc, grid_points=_grid_for(1.5 * tc, k1),
        ))
    return tuple(cases)


@lru_cache(maxsize=None)
def _cases_su2_sl2() -> tuple[Case, ...]:
    cases = []
    for kappa, h0 in [(1.0, 0.0), (1.0, 1.0), (1.0, 2.0),
                      (-1.0, math.sqrt(2.0)), (-1.0, 2.0)]:
        k1 = h0 * h0 + kappa
        tc = 2.0 * math.pi / math.sqrt(k1)
        cases.append(Case(
            f"chi0 kappa={kappa} h0={h0:.4g}", ROW2,
            CurvatureField.constant(np.diag([k1, 0.0])),
            horizon=1.5 * tc, grid_points=_grid_for(1.5 * tc, abs(k1)),
        ))
    for h0 in (0.0, 1.0):
        k1 = h0 * h0 - 1.0
        cases.append(Case(
            f"sl2 h0={h0} (no conjugate point)", ROW2,
            CurvatureField.constant(np.diag([k1, 0.0])),
            horizon=100.0, grid_points=_grid_for(100.0, abs(k1)),
        ))
    return tuple(cases)


@lru_cache(maxsize=None)
def _cases_lq_closed() -> tuple[Case, ...]:
    cases = []
    for kappa in (1.0, 4.0):
        for n in (1, 2, 3):
            cases.append(Case(
                f"riemannian n={n} kappa={kappa}", RIEM[n],
                CurvatureField.constant(kappa * np.eye(n)),
                horizon=1.5 * math.pi / math.sqrt(kappa),
                grid_points=_grid_for(1.5 * math.pi / math.sqrt(kappa), kappa),
            ))
    for k1 in (1.0, 9.0):
        cases.append(Case(
            f"single row (k1={k1}, 0)", ROW2,
            CurvatureField.constant(np.diag([k1, 0.0])),
            horizon=1.5 * 2.0 * math.pi / math.sqrt(k1),
            grid_points=_grid_for(1.5 * 2.0 * math.pi / math.sqrt(k1), k1),
        ))
    return tuple(cases)


DICHOTOMY_K1 = (-2.0, -1.0, 0.0, 1.0, 2.0)
DICHOTOMY_K2 = (-1.0, -0.5, 0.0, 0.5, 1.0)
BOUNDARY_BAND = 0.05


def dichotomy_grid() -> list[tuple[float, float]]:
    pts = []
    for k1 in DICHOTOMY_K1:
        for k2 in DICHOTOMY_K2:
            if abs(k2) <= BOUNDARY_BAND:
                continue
            if k1 > 0 and abs(4.0 * k2 + k1 * k1) <= 4.0 * BOUNDARY_BAND:
                continue
            pts.append((k1, k2))
    return pts


@lru_cache(maxsize=None)
def _cases_dichotomy() -> tuple[Case, ...]:
    return tuple(
        Case(
            f"lq grid ({k1}, {k2})", ROW2,
            CurvatureField.constant(np.diag([k1, k2])),
            horizon=50.0, grid_points=_grid_for(50.0, max(abs(k1), abs(k2))),
        )
        for k1, k2 in dichotomy_grid()
    )


@lru_cache(maxsize=None)
def _cases_comparison(seed: int = DEFAULT_SEED) -> tuple[Case, ...]:
    rng = np.random.default_rng(seed)
    base = np.diag([1.0, 0.0])
    cases = [Case("equality R = diag(1,0)", ROW2,
                  CurvatureField.constant(base), horizon=7.0,
                  grid_points=_grid_for(7.0, 1.0))]
    for k in range(100):
        A = rng.normal(size=(2, 2))
        Q = base + A @ A.T
        cases.append(Case(
            f"random field above diag(1,0) #{k}", ROW2,
            CurvatureField.constant(Q), horizon=7.0,
            grid_points=_grid_for(7.0, float(np.linalg.norm(Q, 2))),
        ))
    return tuple(cases)


@lru_cache(maxsize=None)
def _cases_flat(seed: int = DEFAULT_SEED) -> tuple[Case, ...]:
    rng = np.random.default_rng(seed + 1)
    cases = []
    for k in range(25):
        A = rng.normal(size=(2, 2))
        cases.append(Case(
            f"nonpositive field row2 #{k}", ROW2,
            CurvatureField.constant(-(A @ A.T)), horizon=100.0,
        ))
    for k in range(25):
        A = rng.normal(size=(3, 3))
        cases.append(Case(
            f"nonpositive field riem3 #{k}", RIEM[3],
            CurvatureField.constant(-(A @ A.T)), horizon=100.0,
        ))
    return tuple(cases)


def all_detector_cases(seed: int = DEFAULT_SEED) -> list[Case]:
    return [
        *_cases_heisenberg(),
        *_cases_su2_sl2(),
        *_cases_lq_closed(),
        *_cases_dichotomy(),
        *_cases_comparison(seed),
        *_cases_flat(seed),
    ]


# ---------------------------------------------------------------------------
# criteria


def criterion_1(seed: int = DEFAULT_SEED) -> CriterionResult:
    """Heisenberg conjugate times 2*pi/|h0| on both computation paths."""
    t0 = time.time()
    worst = 0.0
    detail = []
    for h0, case in zip((0.5, 1.0, 2.0, 4.0), _cases_heisenberg()):
        expect = 2.0 * math.pi / abs(h0)
        s = ContactStructure3D(0.0, 0.0)
        cov = CovectorState(h0, 1.0, 0.0)
        closed = conjugate_time_3d(s, cov, case.horizon, method="closed-form")
        numeric = conjugate_time_3d(s, cov, case.horizon, method="numeric")
        for tag, res in (("closed", closed), ("numeric", numeric)):
            if not res.is_finite:
                return CriterionResult(1, "heisenberg exactness", False,
                                       f"{case.name} {tag}: {res.verdict}",
                                       time.time() - t0)
            rel = abs(res.time - expect) / expect
            worst = max(worst, rel)
    detail.append(f"worst relative error {worst:.2e} over 4 h0 values, "
                  "closed and numeric paths")
    return CriterionResult(1, "heisenberg exactness", worst <= 1e-6,
                           detail[0], time.time() - t0)


def criterion_2(seed: int = DEFAULT_SEED) -> CriterionResult:
    """SU(2)/SL(2) conjugate times and the no-conjugate-point cases."""
    t0 = time.time()
    worst = 0.0
    finite = [(1.0, 0.0), (1.0, 1.0), (1.0, 2.0),
              (-1.0, math.sqrt(2.0)), (-1.0, 2.0)]
    for (kappa, h0), case in zip(finite, _cases_su2_sl2()):
        expect = 2.0 * math.pi / math.sqrt(h0 * h0 + kappa)
        s = ContactStructure3D(0.0, kappa)
        cov = CovectorState(h0, 0.0, 1.0)
        closed = chi0_conjugate_time(kappa, h0)
        numeric = conjugate_time_3d(s, cov, case.horizon, method="numeric")
        if not (closed.is_finite and numeric.is_finite):
            return CriterionResult(2, "su2/sl2 exactness", False,
                                   f"{case.name}: missing conjugate time",
                                   time.time() - t0)
        worst = max(worst, abs(closed.time - expect) / expect,
                    abs(numeric.time - expect) / expect)
    for h0 in (0.0, 1.0):
        s = ContactStructure3D(0.0, -1.0)
        numeric = conjugate_time_3d(s, CovectorState(h0, 0.0, 1.0),
                                    horizon=100.0, method="numeric")
        closed = chi0_conjugate_time(-1.0, h0)
        if numeric.verdict != "none-up-to-horizon" or closed.is_finite:
            return CriterionResult(2, "su2/sl2 exactness", False,
                                   f"sl2 h0={h0}: expected no conjugate point, "
                                   f"got {numeric.verdict}", time.time() - t0)
    return CriterionResult(
        2, "su2/sl2 exactness", worst <= 1e-6,
        f"worst relative error {worst:.2e}; both infinite cases certified",
        time.time() - t0)


def criterion_3(seed: int = DEFAULT_SEED) -> CriterionResult:
    """LQ closed forms pi/sqrt(kappa) and 2*pi/sqrt(k1) numerically."""
    t0 = time.time()
    worst = 0.0
    for kappa in (1.0, 4.0):
        for n in (1, 2, 3):
            expect = math.pi / math.sqrt(kappa)
            model = LQModel(YoungDiagram((1,) * n), kappa * np.eye(n))
            res = lq_conjugate_time(model, horizon=1.5 * expect)
            if not res.is_finite:
                return CriterionResult(3, "lq closed forms", False,
                                       f"n={n} kappa={kappa}: {res.verdict}",
                                       time.time() - t0)
            worst = max(worst, abs(res.time - expect) / expect)
    for k1 in (1.0, 9.0):
        expect = 2.0 * math.pi / math.sqrt(k1)
        res = lq_conjugate_time(DiagonalRowModel((k1, 0.0)),
                                horizon=1.5 * expect)
        if not res.is_finite:
            return CriterionResult(3, "lq closed forms", False,
                                   f"(k1={k1}, 0): {res.verdict}",
                                   time.time() - t0)
        worst = max(worst, abs(res.time - expect) / expect)
    return CriterionResult(3, "lq closed forms", worst <= 1e-6,
                           f"worst relative error {worst:.2e} over 8 models",
                           time.time() - t0)


def criterion_4(seed: int = DEFAULT_SEED) -> CriterionResult:
    """Length-2 dichotomy agrees with the horizon-50 numerical scan."""
    t0 = time.time()
    checked = 0
    for k1, k2 in dichotomy_grid():
        predicted = classify_finiteness_l2(k1, k2)
        res = lq_conjugate_time(DiagonalRowModel((k1, k2)), horizon=50.0)
        scanned = FINITE_CLASS if res.is_finite else "infinite"
        if predicted != scanned:
            return CriterionResult(
                4, "length-2 dichotomy grid", False,
                f"({k1}, {k2}): classifier {predicted}, scan {res.verdict}",
                time.time() - t0)
        checked += 1
    return CriterionResult(4, "length-2 dichotomy grid", True,
                           f"classifier and scan agree on {checked} grid points",
                           time.time() - t0)


def criterion_5(seed: int = DEFAULT_SEED) -> CriterionResult:
    """Random fields above diag(1,0) conjugate by 2*pi; equality is exact."""
    t0 = time.time()
    bound = 2.0 * math.pi
    eq_case, *random_cases = _cases_comparison(seed)
    res = _detn_result(eq_case)
    if not res.is_finite or abs(res.time - bound) / bound > 1e-6:
        return CriterionResult(5, "comparison inequality", False,
                               f"equality case gave {res.verdict} {res.time}",
                               time.time() - t0)
    worst = -math.inf
    for case in random_cases:
        res = _detn_result(case)
        if not res.is_finite or res.time > bound + 1e-5:
            return CriterionResult(
                5, "comparison inequality", False,
                f"{case.name}: {res.verdict} t={res.time}", time.time() - t0)
        worst = max(worst, res.time)
    return CriterionResult(
        5, "comparison inequality", True,
        f"100 random fields conjugate by {worst:.6f} <= 2*pi; equality exact",
        time.time() - t0)


def criterion_6(seed: int = DEFAULT_SEED) -> CriterionResult:
    """No conjugate points up to horizon 100 under non-positive curvature."""
    t0 = time.time()
    for case in _cases_flat(seed):
        res = _detn_result(case)
        if res.verdict != "none-up-to-horizon":
            return CriterionResult(6, "flat certificate", False,
                                   f"{case.name}: {res.verdict} t={res.time}",
                                   time.time() - t0)
    return CriterionResult(6, "flat certificate", True,
                           "50 non-positive fields clean up to horizon 100",
                           time.time() - t0)


def _random_flows(seed: int):
    rng = np.random.default_rng(seed + 2)
    flows = []
    chis = (0.5, 1.0, 2.0)
    for k in range(20):
        chi = chis[k % 3]
        kappa = float(rng.uniform(-1.0, 1.0))
        phase = float(rng.uniform(0.0, 2.0 * math.pi))
        h0 = float(rng.uniform(-3.0, 3.0))
        cov = CovectorState(h0, math.cos(phase), math.sin(phase))
        s = ContactStructure3D(chi, kappa)
        flows.append((s, cov))
    return flows


def criterion_7(seed: int = DEFAULT_SEED) -> CriterionResult:
    """H, E conservation and the h0 range bound along 20 random flows."""
    t0 = time.time()
    worst_h = worst_e = 0.0
    worst_margin = math.inf
    for s, cov in _random_flows(seed):
        flow = extremal_flow(s, cov, horizon=20.0)
        worst_h = max(worst_h, flow.max_h_drift)
        worst_e = max(worst_e, flow.max_e_drift)
        lo, hi = flow.h0_bound_margins()
        scale = max(1.0, 2.0 * s.chi * flow.energy)
        worst_margin = min(worst_margin, lo / scale, hi / scale)
    ok = worst_h <= 1e-9 and worst_e <= 1e-9 and worst_margin >= -1e-9
    return CriterionResult(
        7, "flow conservation", ok,
        f"max |H-1/2| = {worst_h:.2e}, max |E-E0| = {worst_e:.2e}, "
        f"worst h0-range margin {worst_margin:.2e}", time.time() - t0)


def criterion_8(seed: int = DEFAULT_SEED) -> CriterionResult:
    """Quadratic and energy-form Ricci expressions agree along the flows."""
    t0 = time.time()
    worst = 0.0
    for s, cov in _random_flows(seed):
        flow = extremal_flow(s, cov, horizon=20.0)
        E = flow.energy
        step = max(1, len(flow.ts) // 2000)
        for h in flow.states[::step]:
            a1, a2 = curvature_along(s, CovectorState(*h))
            b1, b2 = e_form_ricci(s, float(h[0]), E)
            worst = max(worst, abs(a1 - b1), abs(a2 - b2))
    return CriterionResult(8, "curvature identity", worst <= 1e-10,
                           f"max |quadratic - energy form| = {worst:.2e}",
                           time.time() - t0)


def criterion_9(seed: int = DEFAULT_SEED) -> CriterionResult:
    """High-energy flows conjugate no later than the model bound."""
    t0 = time.time()
    s = ContactStructure3D(1.0, 0.0)
    eb = ebar(1.0, 0.0)
    oracle = float(np.max(np.roots([4.0, -228.0, 145.0])))
    if abs(eb - oracle) > 1e-9 * oracle or abs(eb - 56.357) > 1e-3:
        return CriterionResult(9, "high-energy finiteness", False,
                               f"threshold {eb} disagrees with the root oracle",
                               time.time() - t0)
    counts = {1.01: 7, 1.5: 7, 2.0: 6}
    worst_slack = math.inf
    checked = 0
    for mult, cnt in counts.items():
        E = eb * mult
        k1, k2 = ricci_bounds_egrande(1.0, 0.0, E)
        model = lq_conjugate_time(DiagonalRowModel((k1, k2)), horizon=10.0)
        if not model.is_finite:
            return CriterionResult(9, "high-energy finiteness", False,
                                   f"model ({k1:.3g}, {k2:.3g}) not finite",
                                   time.time() - t0)
        for i, u in enumerate(np.linspace(0.05, 0.95, cnt)):
            cov = covector_from_energy(s, E, float(u),
                                       sign_h0=1 if i % 2 == 0 else -1)
            res = conjugate_time_3d(s, cov, horizon=1.2 * model.time)
            if not res.is_finite or res.time > model.time + 1e-4:
                return CriterionResult(
                    9, "high-energy finiteness", False,
                    f"E={E:.3f} u={u:.2f}: {res.verdict} t={res.time} vs "
                    f"model {model.time:.6f}", time.time() - t0)
            worst_slack = min(worst_slack, model.time - res.time)
            checked += 1
    return CriterionResult(
        9, "high-energy finiteness", True,
        f"threshold {eb:.3f}; {checked} covectors conjugate before the model "
        f"time (min slack {worst_slack:.3f})", time.time() - t0)


def criterion_10(seed: int = DEFAULT_SEED) -> CriterionResult:
    """Riccati ordering, matrix Cauchy-Schwarz, and monotonicity suites."""
    t0 = time.time()
    rng = np.random.default_rng(seed + 3)
    s3 = build_structural_matrices(YoungDiagram((2, 1)))
    # ordering: 10 matrix-IC pairs with full PSD gap, 10 limit-IC pairs
    for k in range(10):
        A = rng.normal(size=(6, 6))
        M2 = 0.5 * (A + A.T)
        B = rng.normal(size=(6, 6))
        M1 = M2 + 0.2 * (B @ B.T)
        C = rng.normal(size=(3, 3))
        X0 = 0.5 * (C + C.T)
        rep = riccati_comparison_check(M1, M2, 1.0, x1_0=X0, x2_0=X0)
        if not rep.ok:
            return CriterionResult(10, "appendix property suites", False,
                                   f"matrix-IC pair {k}: margin {rep.min_margin:.2e}",
                                   time.time() - t0)
    for k in range(10):
        A = rng.normal(size=(3, 3))
        R2 = 0.5 * (A + A.T)
        B = rng.normal(size=(3, 3))
        M2 = v_equation_coefficients(s3, R2)
        M1 = v_equation_coefficients(s3, R2 - 0.5 * (B @ B.T))
        rep = riccati_comparison_check(M1, M2, 2.0, limit_ic=True)
        if not rep.ok:
            return CriterionResult(10, "appendix property suites", False,
                                   f"limit-IC pair {k}: margin {rep.min_margin:.2e}",
                                   time.time() - t0)
    # matrix Cauchy-Schwarz gap: 200 random instances
    worst_cs = 0.0
    for _ in range(200):
        r = int(rng.integers(1, 5))
        ell = int(rng.integers(1, 4))
        X = [rng.normal(size=(ell, ell)) for _ in range(r)]
        Y = [rng.normal(size=(ell, ell)) for _ in range(r)]
        gap = matrix_cauchy_schwarz_gap(X, Y)
        worst_cs = min(worst_cs, float(np.linalg.eigvalsh(gap)[0]))
    if worst_cs < -1e-10:
        return CriterionResult(10, "appendix property suites", False,
                               f"cauchy-schwarz gap min eig {worst_cs:.2e}",
                               time.time() - t0)
    # monotone limit-IC solutions for 10 random constant potentials
    diagrams = [(3,), (2, 1), (2, 2), (3, 2), (1, 1, 1), (3, 1), (2, 1, 1),
                (3, 3), (2, 2, 1), (1, 1)]
    for k, rows in enumerate(diagrams):
        st = build_structural_matrices(YoungDiagram(rows))
        n = st.dimension
        A = rng.normal(size=(n, n))
        rep = riccati_monotonicity_check(st, 0.5 * (A + A.T), horizon=5.0)
        if not rep.monotone:
            return CriterionResult(
                10, "appendix property suites", False,
                f"diagram {rows}: rise {rep.worst_rise:.2e} at "
                f"t={rep.first_violation_time}", time.time() - t0)
    return CriterionResult(
        10, "appendix property suites", True,
        f"20 ordered pairs, 200 gap instances (min eig {worst_cs:.1e}), "
        "10 monotone potentials", time.time() - t0)


def criterion_11(seed: int = DEFAULT_SEED) -> CriterionResult:
    """det N and Riccati blow-up detectors agree on every criterion-1-6 input."""
    t0 = time.time()
    cases = all_detector_cases(seed)
    agree_tol = 10.0 * DEFAULT_TOL.refine
    worst = 0.0
    for case in cases:
        det = _detn_result(case)
        _, ric = integrate_riccati_limit_ic(
            case.structural, case.field, case.horizon, DEFAULT_TOL,
            grid_points=case.grid_points)
        if det.is_finite != ric.is_finite:
            return CriterionResult(
                11, "detector cross-validation", False,
                f"{case.name}: detN {det.verdict} vs riccati {ric.verdict}",
                time.time() - t0)
        if det.is_finite:
            d = abs(det.time - ric.time)
            worst = max(worst, d)
            if d > agree_tol:
                return CriterionResult(
                    11, "detector cross-validation", False,
                    f"{case.name}: |{det.time:.10f} - {ric.time:.10f}| = "
                    f"{d:.2e} > {agree_tol:.1e}", time.time() - t0)
    return CriterionResult(
        11, "detector cross-validation", True,
        f"{len(cases)} inputs, worst time gap {worst:.2e} <= {agree_tol:.1e}",
        time.time() - t0)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
    9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_criterion(number: int, seed: int = DEFAULT_SEED) -> CriterionResult:
    return CRITERIA[number](seed)


def run_all(seed: int = DEFAULT_SEED, echo=print) -> list[CriterionResult]:
    results = []
    for number in sorted(CRITERIA):
        res = run_criterion(number, seed)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
