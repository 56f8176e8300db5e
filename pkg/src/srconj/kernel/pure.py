"""Pure-numpy integrator kernel.

Embedded Dormand-Prince 5(4) pair with adaptive steps, landing exactly on
every requested grid node.  This is the fallback twin of the compiled core
in ``_core.pyx``; the two must stay semantically identical (same tableau,
same controller, same stopping rules).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .systems import (
    BLOWUP,
    KIND_FLOW3D,
    KIND_GENERAL_RICCATI,
    KIND_JACOBI,
    KIND_RICCATI_V,
    KIND_RICCATI_W,
    MAX_STEPS_EXCEEDED,
    NONFINITE,
    OK,
    SRC_CONST,
    SRC_CONTACT3D,
    SRC_LINEAR,
    SRC_PYCALL,
    STEP_UNDERFLOW,
    SourceSpec,
    SystemSpec,
)

BACKEND_NAME = "pure"

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
SAFETY = 0.9


class RunResult(NamedTuple):
    status: int
    n_reached: int       # index of the last grid node that was attained
    t_stop: float        # time at which integration ended
    y_stop: np.ndarray   # state there
    states: np.ndarray   # (len(t_grid), dim); rows past n_reached are nan


def _contact3d_ricci(chi, kappa, h0, h1, h2):
    s = h1 * h1 - h2 * h2
    r1 = h0 * h0 + 3.0 * chi * s + kappa * (h1 * h1 + h2 * h2)
    r2 = (
        6.0 * chi * s * h0 * h0
        - 2.0 * chi * (chi + kappa) * h1 ** 4
        - 12.0 * chi * chi * h1 * h1 * h2 * h2
        - 2.0 * chi * (chi - kappa) * h2 ** 4
    )
    return r1, r2


def _hermite_eval(ts, ys, yds, t):
    """Cubic Hermite interpolation of sampled states with exact derivatives."""
    m = len(ts)
    if t <= ts[0]:
        return ys[0].copy()
    if t >= ts[-1]:
        return ys[-1].copy()
    i = int(np.searchsorted(ts, t, side="right") - 1)
    i = min(max(i, 0), m - 2)
    dt = ts[i + 1] - ts[i]
    u = (t - ts[i]) / dt
    u2, u3 = u * u, u * u * u
    return (
        (2 * u3 - 3 * u2 + 1) * ys[i]
        + (u3 - 2 * u2 + u) * dt * yds[i]
        + (-2 * u3 + 3 * u2) * ys[i + 1]
        + (u3 - u2) * dt * yds[i + 1]
    )


def make_source_eval(src: SourceSpec):
    """Return a callable t -> symmetric (n, n) coefficient matrix."""
    if src.kind == SRC_CONST:
        Q = src.const

        def ev(t, Q=Q):
            return Q

    elif src.kind == SRC_LINEAR:
        ts, vals = src.ts, src.vals

        def ev(t, ts=ts, vals=vals):
            if t <= ts[0]:
                return vals[0]
            if t >= ts[-1]:
                return vals[-1]
            i = int(np.searchsorted(ts, t, side="right") - 1)
            w = (t - ts[i]) / (ts[i + 1] - ts[i])
            return (1.0 - w) * vals[i] + w * vals[i + 1]

    elif src.kind == SRC_PYCALL:
        f = src.func

        def ev(t, f=f):
            R = np.asarray(f(t), dtype=float)
            return 0.5 * (R + R.T)

    elif src.kind == SRC_CONTACT3D:
        chi, kappa = src.chi, src.kappa
        ts, hs, hds = src.ts, src.hs, src.hds

        def ev(t, chi=chi, kappa=kappa, ts=ts, hs=hs, hds=hds):
            h = _hermite_eval(ts, hs, hds, t)
            r1, r2 = _contact3d_ricci(chi, kappa, h[0], h[1], h[2])
            return np.array([[r1, 0.0], [0.0, r2]])

    else:
        raise ValueError(f"unknown source kind {src.kind}")
    return ev


def make_rhs(system: SystemSpec):
    n = system.n
    nn = n * n
    if system.kind == KIND_JACOBI:
        G1, G2 = system.gamma1, system.gamma2
        G1T = np.ascontiguousarray(G1.T)
        evR = make_source_eval(system.source)

        def rhs(t, y):
            M = y[:nn].reshape(n, n)
            N = y[nn:].reshape(n, n)
            R = evR(t)
            return np.concatenate(
                ((-(G1 @ M) - R @ N).ravel(), (G2 @ M + G1T @ N).ravel())
            )

    elif system.kind == KIND_RICCATI_W:
        G1, G2 = system.gamma1, system.gamma2
        G1T = np.ascontiguousarray(G1.T)
        evR = make_source_eval(system.source)

        def rhs(t, y):
            W = y.reshape(n, n)
            R = evR(t)
            return (G1T @ W + W @ G1 + G2 + W @ R @ W).ravel()

    elif system.kind == KIND_RICCATI_V:
        G1, G2 = system.gamma1, system.gamma2
        G1T = np.ascontiguousarray(G1.T)
        evR = make_source_eval(system.source)

        def rhs(t, y):
            V = y.reshape(n, n)
            R = evR(t)
            return (-(G1 @ V) - V @ G1T - R - V @ G2 @ V).ravel()

    elif system.kind == KIND_FLOW3D:
        two_chi = 2.0 * system.chi

        def rhs(t, y):
            h0, h1, h2 = y
            return np.array([two_chi * h1 * h2, h0 * h2, -h0 * h1])

    elif system.kind == KIND_GENERAL_RICCATI:
        evM = make_source_eval(system.source)

        def rhs(t, y):
            X = y.reshape(n, n)
            M = evM(t)
            M11 = M[:n, :n]
            M12 = M[:n, n:]
            M22 = M[n:, n:]
            return (M11 + M12 @ X + X @ M12.T + X @ M22 @ X).ravel()

    else:
        raise ValueError(f"unknown system kind {system.kind}")
    return rhs


def _rms(v):
    return float(np.sqrt(np.mean(v * v)))


def _initial_step(rhs, t0, y0, f0, rtol, atol, span):
    sc = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / sc)
    d1 = _rms(f0 / sc)
    h0 = 0.01 * d0 / d1 if (d0 > 1e-5 and d1 > 1e-5) else 1e-6
    h0 = min(h0, span)
    f1 = rhs(t0 + h0, y0 + h0 * f0)
    d2 = _rms((f1 - f0) / sc) / h0
    dmax = max(d1, d2)
    h1 = (0.01 / dmax) ** 0.2 if dmax > 1e-15 else max(1e-6, h0 * 1e-3)
    return min(100.0 * h0, h1, span)


def _symmetrize(y, n):
    X = y.reshape(n, n)
    return (0.5 * (X + X.T)).ravel()


def run(
    system: SystemSpec,
    y0: np.ndarray,
    t_grid: np.ndarray,
    rtol: float,
    atol: float,
    norm_cap: float = 1e300,
    h_min: float = 1e-14,
    max_steps: int = 2_000_000,
) -> RunResult:
    """Integrate ``system`` from ``t_grid[0]``, recording the state at each node.

    Stops early when the max-norm of the state exceeds ``norm_cap`` (status
    BLOWUP), when the accepted step would fall under ``h_min * max(1, |t|)``
    (STEP_UNDERFLOW), or on a non-finite state (NONFINITE).
    """
    rhs = make_rhs(system)
    t_grid = np.asarray(t_grid, dtype=float)
    y = np.array(y0, dtype=float).copy()
    m = len(t_grid)
    states = np.full((m, y.size), np.nan)
    states[0] = y
    t = float(t_grid[0])
    span = float(t_grid[-1] - t_grid[0])
    if span <= 0:
        raise ValueError("grid must advance forward in time")

    k1 = rhs(t, y)
    h = _initial_step(rhs, t, y, k1, rtol, atol, span)
    steps = 0
    sym_n = system.n if system.symmetrize else 0

    for i in range(1, m):
        t_target = float(t_grid[i])
        while t < t_target:
            if steps >= max_steps:
                return RunResult(MAX_STEPS_EXCEEDED, i - 1, t, y, states)
            clamped = h >= t_target - t
            h_use = t_target - t if clamped else h
            if h_use < h_min * max(1.0, abs(t)):
                return RunResult(STEP_UNDERFLOW, i - 1, t, y, states)
            steps += 1

            k2 = rhs(t + C2 * h_use, y + h_use * (A21 * k1))
            k3 = rhs(t + C3 * h_use, y + h_use * (A31 * k1 + A32 * k2))
            k4 = rhs(t + C4 * h_use, y + h_use * (A41 * k1 + A42 * k2 + A43 * k3))
            k5 = rhs(
                t + C5 * h_use,
                y + h_use * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
            )
            k6 = rhs(
                t + h_use,
                y + h_use * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            )
            y_new = y + h_use * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
            k7 = rhs(t + h_use, y_new)

            err_vec = h_use * (
                E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7
            )
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
                err = _rms(err_vec / sc)
            if not np.isfinite(err):
                err = 10.0

            if err <= 1.0:
                t = t_target if clamped else t + h_use
                if sym_n:
                    y = _symmetrize(y_new, sym_n)
                    k1 = rhs(t, y)
                else:
                    y = y_new
                    k1 = k7
                if not np.all(np.isfinite(y)):
                    return RunResult(NONFINITE, i - 1, t, y, states)
                if np.max(np.abs(y)) > norm_cap:
                    return RunResult(BLOWUP, i - 1, t, y, states)
                factor = MAX_FACTOR if err == 0.0 else min(
                    MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2)
                )
                h = h_use * factor
            else:
                h = h_use * max(MIN_FACTOR, SAFETY * err ** -0.2)
        states[i] = y

    return RunResult(OK, m - 1, t, y, states)
