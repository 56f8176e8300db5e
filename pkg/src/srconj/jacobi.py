"""The linear Jacobi system and first-conjugate-time detection.

The pair (M(t), N(t)) solves

    d/dt [M; N] = [[-G1, -R(t)], [G2, G1^T]] [M; N],   M(0) = I, N(0) = 0,

and the first conjugate time is the first positive zero of det N(t).  Zeros
are located on a dense output grid: simple zeros by sign-change bisection,
even-multiplicity zeros by a singular-value dip refined with a parabola fit
and confirmed by re-integration at tighter tolerance.

Long hyperbolic runs renormalize the propagated frame by QR whenever its
norm passes a threshold.  The R factors have positive diagonal, so zeros and
signs of det N are untouched while the conditioning stays bounded; their
log-determinants are accumulated so det N is still reported exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg

from . import kernel
from .errors import IntegrationFailure
from .fields import CurvatureField
from .kernel import systems
from .tolerances import (
    DEFAULT_TOL,
    DIP_THRESHOLD,
    GRID_POINTS,
    STARTUP_FRACTION,
    Tolerances,
)
from .young import StructuralMatrices

__all__ = [
    "FINITE",
    "NONE_UP_TO_HORIZON",
    "CERTIFIED_INFINITE",
    "ConjugateTimeResult",
    "JacobiTrajectory",
    "integrate_jacobi",
    "first_conjugate_time",
]

FINITE = "finite"
NONE_UP_TO_HORIZON = "none-up-to-horizon"
CERTIFIED_INFINITE = "certified-infinite"

# frame max-norm beyond which the propagated (M; N) frame is QR-renormalized
FRAME_RENORM = 1e3
# smallest normalized singular value under which a node counts as numerically
# singular; sign flips between two such nodes are not trusted
NUMERICAL_SINGULAR = 1e-12


@dataclass(frozen=True)
class ConjugateTimeResult:
    """Verdict of a first-conjugate-time search."""

    verdict: str
    time: float | None = None
    bracket: tuple[float, float] | None = None
    horizon: float | None = None
    certificate: str | None = None
    witness: str | None = None
    flags: tuple[str, ...] = ()

    @property
    def is_finite(self) -> bool:
        return self.verdict == FINITE

    def as_dict(self) -> dict:
        out = {"verdict": self.verdict}
        if self.time is not None:
            out["tc"] = self.time
        if self.bracket is not None:
            out["bracket"] = list(self.bracket)
        if self.horizon is not None:
            out["horizon"] = self.horizon
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.witness is not None:
            out["witness"] = self.witness
        if self.flags:
            out["flags"] = list(self.flags)
        return out


def _positive_qr(Y):
    """QR with positive diagonal R, so det R > 0 preserves det signs."""
    Q, R = np.linalg.qr(Y)
    d = np.sign(np.diag(R))
    d[d == 0.0] = 1.0
    return Q * d, R * d[:, None]


@dataclass(eq=False)
class JacobiTrajectory:
    """Dense-grid solution of the Jacobi system plus singularity diagnostics.

    ``Ms``/``Ns`` hold the propagated frame; when renormalization kicked in
    (``renormalized`` true) they are scaled by a positive-determinant factor
    whose cumulative log-det is in ``cum_log``, and det N(t_i) equals
    ``det_sign[i] * exp(det_log[i])`` exactly.
    """

    structural: StructuralMatrices
    curvature: CurvatureField
    horizon: float
    tol: Tolerances
    method: str                      # "rk" or "expm"
    ts: np.ndarray                   # (m,)
    Ms: np.ndarray                   # (m, n, n)
    Ns: np.ndarray                   # (m, n, n)
    cum_log: np.ndarray              # (m,) accumulated log det of R factors
    det_sign: np.ndarray             # (m,)
    det_log: np.ndarray              # (m,) log |det N|, scale included
    smin: np.ndarray                 # (m,) normalized smallest singular value
    smax: np.ndarray                 # (m,)
    renormalized: bool = False
    flags: tuple[str, ...] = ()
    _expm_gen: np.ndarray | None = dc_field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.structural.dimension

    @property
    def det_n(self) -> np.ndarray:
        """det N(t) samples (log representation keeps the magnitude exact)."""
        return self.det_sign * np.exp(np.clip(self.det_log, -745.0, 700.0))

    def state_at(self, t: float, base_idx: int | None = None,
                 tol: Tolerances | None = None):
        """(M, N) frame at ``t``, evolved from grid node ``base_idx``.

        On the renormalized path the frame carries the base node's scale;
        signs and singular-value ratios are unaffected.
        """
        tol = tol or self.tol
        t = float(t)
        if base_idx is None:
            base_idx = int(np.searchsorted(self.ts, t, side="right") - 1)
        i = min(max(base_idx, 0), len(self.ts) - 1)
        n = self.dimension
        if abs(t - self.ts[i]) <= 1e-307:
            return self.Ms[i].copy(), self.Ns[i].copy()
        if t < self.ts[i]:
            raise ValueError("evaluation before the base node")
        if self.method == "expm":
            P = scipy.linalg.expm(self._expm_gen * (t - self.ts[i]))
            Y = P @ np.vstack([self.Ms[i], self.Ns[i]])
            return Y[:n], Y[n:]
        spec = _jacobi_spec(self.structural, self.curvature)
        y0 = np.concatenate([self.Ms[i].ravel(), self.Ns[i].ravel()])
        res = kernel.run(spec, y0, np.array([self.ts[i], t]), tol.rtol, tol.atol)
        if res.status != systems.OK:
            raise IntegrationFailure(
                f"restart integration failed with status {res.status}",
                t_reached=res.t_stop,
            )
        y = res.states[-1]
        return y[: n * n].reshape(n, n), y[n * n:].reshape(n, n)

    def det_diag_at(self, t: float, base_idx: int | None = None,
                    tol: Tolerances | None = None):
        """(sign, window-relative log |det|, smin, smax) of N at ``t``."""
        _, N = self.state_at(t, base_idx, tol)
        sign, logdet = np.linalg.slogdet(N)
        sv = np.linalg.svd(N, compute_uv=False)
        return (float(sign), float(logdet),
                float(sv[-1] / max(sv[0], 1.0)), float(sv[0]))


def _jacobi_spec(structural: StructuralMatrices, curvature: CurvatureField):
    return systems.jacobi_system(structural.gamma1, structural.gamma2,
                                 curvature.source)


def _hamiltonian_generator(structural: StructuralMatrices, Q: np.ndarray):
    g1, g2 = structural.gamma1, structural.gamma2
    n = structural.dimension
    K = np.zeros((2 * n, 2 * n))
    K[:n, :n] = -g1
    K[:n, n:] = -Q
    K[n:, :n] = g2
    K[n:, n:] = g1.T
    return K


def _propagate_expm(gen, ts, n):
    """Node-to-node propagation by the matrix exponential, renormalizing on
    demand.  Returns (frames, cum_log, renormalized)."""
    m = len(ts)
    P = scipy.linalg.expm(gen * (ts[1] - ts[0]))
    frames = np.empty((m, 2 * n, n))
    frames[0, :n] = np.eye(n)
    frames[0, n:] = 0.0
    cum = np.zeros(m)
    running = 0.0
    renorm = False
    Y = frames[0].copy()
    for i in range(1, m):
        Y = P @ Y
        if np.max(np.abs(Y)) > FRAME_RENORM:
            Y, R = _positive_qr(Y)
            running += float(np.sum(np.log(np.diag(R))))
            renorm = True
        frames[i] = Y
        cum[i] = running
    return frames, cum, renorm


def _propagate_rk(spec, ts, n, tol):
    """Adaptive integration over the grid; falls back to node-by-node
    propagation with QR renormalization when the frame norm blows past the
    threshold."""
    m = len(ts)
    y0 = np.concatenate([np.eye(n).ravel(), np.zeros(n * n)])
    res = kernel.run(spec, y0, ts, tol.rtol, tol.atol, norm_cap=FRAME_RENORM)
    if res.status == systems.OK:
        return res.states.reshape(m, 2 * n, n), np.zeros(m), False
    if res.status != systems.BLOWUP:
        raise IntegrationFailure(
            f"Jacobi integration stopped at t={res.t_stop:.6g} "
            f"(status {res.status})",
            t_reached=res.t_stop,
        )
    frames = np.empty((m, 2 * n, n))
    frames[0, :n] = np.eye(n)
    frames[0, n:] = 0.0
    cum = np.zeros(m)
    running = 0.0
    k = res.n_reached
    frames[1:k + 1] = res.states[1:k + 1].reshape(-1, 2 * n, n)
    Y = frames[k].copy()
    for i in range(k + 1, m):
        seg = kernel.run(spec, Y.ravel(), np.array([ts[i - 1], ts[i]]),
                         tol.rtol, tol.atol)
        if seg.status != systems.OK:
            raise IntegrationFailure(
                f"Jacobi integration stopped at t={seg.t_stop:.6g} "
                f"(status {seg.status})",
                t_reached=seg.t_stop,
            )
        Y = seg.states[-1].reshape(2 * n, n)
        if np.max(np.abs(Y)) > FRAME_RENORM:
            Y, R = _positive_qr(Y)
            running += float(np.sum(np.log(np.diag(R))))
        frames[i] = Y
        cum[i] = running
    return frames, cum, True


def integrate_jacobi(
    structural: StructuralMatrices,
    curvature: CurvatureField,
    horizon: float,
    tol: Tolerances = DEFAULT_TOL,
    grid_points: int | None = None,
    method: str = "auto",
) -> JacobiTrajectory:
    """Solve the Jacobi system on [0, horizon] with dense grid output.

    ``method="expm"`` propagates constant-curvature systems node to node by
    the matrix exponential; ``"rk"`` uses the adaptive embedded pair.  The
    default picks the exponential for constant fields.
    """
    n = structural.dimension
    if curvature.dimension != n:
        raise ValueError("curvature dimension does not match the diagram")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if method == "auto":
        method = "expm" if curvature.is_constant() else "rk"
    if method == "expm" and not curvature.is_constant():
        raise ValueError("matrix-exponential path needs a constant field")

    m = (grid_points or GRID_POINTS) + 1
    ts = np.linspace(0.0, horizon, m)
    gen = None

    if method == "expm":
        gen = _hamiltonian_generator(structural, curvature.constant_matrix())
        frames, cum, renorm = _propagate_expm(gen, ts, n)
    else:
        spec = _jacobi_spec(structural, curvature)
        frames, cum, renorm = _propagate_rk(spec, ts, n, tol)

    Ms = np.ascontiguousarray(frames[:, :n, :])
    Ns = np.ascontiguousarray(frames[:, n:, :])
    sign, logdet = np.linalg.slogdet(Ns)
    sv = np.linalg.svd(Ns, compute_uv=False)
    smin = sv[:, -1] / np.maximum(sv[:, 0], 1.0)

    flags = []
    t_min = STARTUP_FRACTION * horizon
    j0 = int(np.searchsorted(ts, t_min, side="right"))
    if j0 < m and sign[min(j0, m - 1)] == 0.0:
        flags.append("startup-singular")

    return JacobiTrajectory(
        structural=structural,
        curvature=curvature,
        horizon=float(horizon),
        tol=tol,
        method=method,
        ts=ts,
        Ms=Ms,
        Ns=Ns,
        cum_log=cum,
        det_sign=sign,
        det_log=logdet + cum,
        smin=smin,
        smax=sv[:, 0],
        renormalized=renorm,
        flags=tuple(flags),
        _expm_gen=gen,
    )


def _bisect_sign_change(traj, a, b, sa, sb, refine_tol, base_idx, tol=None):
    """Shrink [a, b] with det-sign endpoints (sa, sb), sa*sb < 0."""
    for _ in range(200):
        if b - a <= refine_tol:
            break
        mid = 0.5 * (a + b)
        sm = traj.det_diag_at(mid, base_idx, tol)[0]
        if sm == 0.0:
            half = 0.25 * refine_tol
            return max(a, mid - half), min(b, mid + half)
        if sm == sa:
            a = mid
        else:
            b = mid
    return a, b


def _parabola_vertex(ts, vals):
    """Least-squares quadratic fit; falls back to the sampled argmin."""
    t0 = ts[len(ts) // 2]
    coef = np.polyfit(ts - t0, vals, 2)
    if coef[0] > 0:
        v = t0 - coef[1] / (2.0 * coef[0])
        if ts[0] <= v <= ts[-1]:
            return float(v)
    return float(ts[int(np.argmin(vals))])


def _refine_dip(traj, a, b, refine_tol, base_idx, tol=None):
    """Locate a candidate even-multiplicity zero of det N inside [a, b].

    Returns (kind, payload): ("sign-change", (lo, hi, sa, sb)) when the dense
    sweep uncovers a crossing hidden between grid nodes, else
    ("dip", vertex) with the parabola-fit minimizer of det N.  All
    evaluations evolve from the same base node, so the det normalization is
    consistent across the window.
    """
    npts = 61
    vertex = 0.5 * (a + b)
    for _ in range(3):
        ts = np.linspace(a, b, npts)
        diags = [traj.det_diag_at(t, base_idx, tol) for t in ts]
        signs = np.array([d[0] for d in diags])
        logs = np.array([d[1] for d in diags])
        neg = np.where(signs < 0)[0]
        if neg.size:
            k = int(neg[0])
            lo = ts[k - 1] if k > 0 else a
            sa = signs[k - 1] if k > 0 else 1.0
            return "sign-change", (lo, ts[k], sa, signs[k])
        ref = np.max(logs[np.isfinite(logs)]) if np.any(np.isfinite(logs)) else 0.0
        dets = signs * np.exp(logs - ref)
        k = int(np.argmin(dets))
        sl = slice(max(0, k - 8), min(npts, k + 9))
        vertex = _parabola_vertex(ts[sl], dets[sl])
        width = (b - a) / 16.0
        a = max(vertex - width, traj.ts[base_idx])
        b = vertex + width
        if b - a <= max(refine_tol, 4e-12 * max(1.0, abs(vertex))):
            break
    return "dip", vertex


def _confirm_rank_drop(traj, vertex, probe, base_idx, tol=None):
    """Accept a dip as a zero of det N only if it is deep and V-shaped.

    A true rank drop sends the smallest singular value to the noise floor
    with steep recovery at +-probe; a merely ill-conditioned N varies
    smoothly on that scale.
    """
    smin_v = traj.det_diag_at(vertex, base_idx, tol)[2]
    lo = max(vertex - probe, traj.ts[base_idx])
    hi = min(vertex + probe, traj.horizon)
    smin_l = traj.det_diag_at(lo, base_idx, tol)[2]
    smin_r = traj.det_diag_at(hi, base_idx, tol)[2]
    deep = smin_v < DIP_THRESHOLD
    vshaped = smin_l > 4.0 * smin_v and smin_r > 4.0 * smin_v
    return deep and vshaped, smin_v


def first_conjugate_time(
    traj: JacobiTrajectory,
    refine_tol: float | None = None,
) -> ConjugateTimeResult:
    """Smallest t in (0, horizon] with det N(t) = 0, to the requested width.

    The startup window (0, 1e-4 * horizon) is excluded: N(0) = 0 by
    construction.  A singular-value dip below the rank-drop threshold
    without a confirmed zero is reported through the ``ambiguous-dip`` flag.
    """
    refine_tol = refine_tol if refine_tol is not None else traj.tol.refine
    ts = traj.ts
    m = len(ts)
    t_min = STARTUP_FRACTION * traj.horizon
    spacing = ts[1] - ts[0]
    sign = traj.det_sign
    smin = traj.smin
    flags = list(traj.flags)

    i0 = max(1, int(np.searchsorted(ts, t_min, side="right")))
    for i in range(i0, m):
        # simple zero: sign change across the interval
        if sign[i] != sign[i - 1] and sign[i - 1] != 0.0:
            if smin[i] < NUMERICAL_SINGULAR and smin[i - 1] < NUMERICAL_SINGULAR:
                flags.append(f"untrusted-sign-flip@{ts[i]:.6g}")
                continue
            if sign[i] == 0.0:
                lo = max(ts[i] - 0.5 * refine_tol, ts[i - 1])
                return ConjugateTimeResult(
                    FINITE, time=float(ts[i]), bracket=(lo, float(ts[i])),
                    horizon=traj.horizon, witness="sign-change",
                    flags=tuple(flags),
                )
            a, b = _bisect_sign_change(
                traj, ts[i - 1], ts[i], sign[i - 1], sign[i], refine_tol, i - 1
            )
            return ConjugateTimeResult(
                FINITE, time=float(0.5 * (a + b)), bracket=(float(a), float(b)),
                horizon=traj.horizon, witness="sign-change", flags=tuple(flags),
            )
        # candidate even-multiplicity zero: an interior dip of the normalized
        # smallest singular value, deep relative to its neighbourhood
        if i < m - 1 and ts[i - 1] > t_min \
                and smin[i] <= smin[i - 1] and smin[i] <= smin[i + 1]:
            window = smin[max(0, i - 25): min(m, i + 26)]
            if smin[i] >= 0.25 * float(np.max(window)):
                continue
            base = i - 1
            kind, payload = _refine_dip(traj, ts[i - 1], ts[i + 1],
                                        refine_tol, base)
            if kind == "sign-change":
                lo, hi, sa, sb = payload
                a, b = _bisect_sign_change(traj, lo, hi, sa, sb,
                                           refine_tol, base)
                return ConjugateTimeResult(
                    FINITE, time=float(0.5 * (a + b)),
                    bracket=(float(a), float(b)), horizon=traj.horizon,
                    witness="sign-change", flags=tuple(flags),
                )
            t_star = payload
            probe = spacing / 16.0
            ok, smin_star = _confirm_rank_drop(traj, t_star, probe, base)
            if ok:
                # confirm against a 10x tighter re-integration
                tight = traj.tol.tighter(10.0)
                kind2, payload2 = _refine_dip(
                    traj, max(t_star - spacing / 8.0, ts[base]),
                    t_star + spacing / 8.0, refine_tol, base, tol=tight,
                )
                if kind2 == "sign-change":
                    lo, hi, sa, sb = payload2
                    a, b = _bisect_sign_change(traj, lo, hi, sa, sb,
                                               refine_tol, base, tol=tight)
                    return ConjugateTimeResult(
                        FINITE, time=float(0.5 * (a + b)),
                        bracket=(float(a), float(b)), horizon=traj.horizon,
                        witness="sign-change", flags=tuple(flags),
                    )
                t2 = payload2
                ok2, _ = _confirm_rank_drop(traj, t2, probe, base, tol=tight)
                if ok2 and abs(t2 - t_star) <= max(100 * refine_tol,
                                                   1e-6 * max(1.0, t_star)):
                    tc = float(t2)
                    half = 0.5 * refine_tol
                    return ConjugateTimeResult(
                        FINITE, time=tc, bracket=(tc - half, tc + half),
                        horizon=traj.horizon, witness="rank-drop",
                        flags=tuple(flags),
                    )
                flags.append(f"ambiguous-dip@{t_star:.6g}")
            elif smin_star < 10.0 * DIP_THRESHOLD:
                flags.append(f"ambiguous-dip@{t_star:.6g}")

    return ConjugateTimeResult(
        NONE_UP_TO_HORIZON, horizon=traj.horizon, flags=tuple(flags)
    )
