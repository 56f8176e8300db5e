# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integrator core.

Semantic twin of ``pure.py``: same Dormand-Prince 5(4) tableau, step
controller and stopping rules, with the stepping loop and the right-hand
sides in C.  Python is re-entered only for SRC_PYCALL coefficient sources.
"""

import numpy as np

from libc.math cimport fabs, isfinite, sqrt

from .systems import (
    KIND_JACOBI, KIND_RICCATI_W, KIND_RICCATI_V, KIND_FLOW3D,
    KIND_GENERAL_RICCATI,
    SRC_CONST, SRC_LINEAR, SRC_PYCALL, SRC_CONTACT3D,
    OK, BLOWUP, STEP_UNDERFLOW, MAX_STEPS_EXCEEDED, NONFINITE,
)

BACKEND_NAME = "compiled"

cdef int K_JACOBI = KIND_JACOBI
cdef int K_RICC_W = KIND_RICCATI_W
cdef int K_RICC_V = KIND_RICCATI_V
cdef int K_FLOW3D = KIND_FLOW3D
cdef int K_GENERAL = KIND_GENERAL_RICCATI
cdef int S_CONST = SRC_CONST
cdef int S_LINEAR = SRC_LINEAR
cdef int S_PYCALL = SRC_PYCALL
cdef int S_CONTACT = SRC_CONTACT3D

cdef int ST_OK = OK
cdef int ST_BLOWUP = BLOWUP
cdef int ST_UNDERFLOW = STEP_UNDERFLOW
cdef int ST_MAXSTEPS = MAX_STEPS_EXCEEDED
cdef int ST_NONFINITE = NONFINITE

# Dormand-Prince 5(4) tableau
cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187
cdef double A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247
cdef double A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192
cdef double B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920
cdef double E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40

cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 5.0
cdef double SAFETY = 0.9

cdef double[::1] EMPTY1 = np.empty(0)
cdef double[:, ::1] EMPTY2 = np.empty((0, 0))


cdef int _bisect(double[::1] ts, double t, int m) noexcept:
    # largest i with ts[i] <= t, clamped to [0, m-2]
    cdef int lo = 0, hi = m - 1, mid
    if t <= ts[0]:
        return 0
    if t >= ts[m - 1]:
        return m - 2
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if ts[mid] <= t:
            lo = mid
        else:
            hi = mid
    return lo


cdef class Sys:
    cdef int kind, n, dim, sn, src_kind, m_samples
    cdef double chi, kappa
    cdef double[::1] g1, g2
    cdef double[::1] qconst
    cdef double[::1] src_ts
    cdef double[:, ::1] src_vals
    cdef double[:, ::1] hs, hds
    cdef object func
    cdef double[::1] rbuf, t1

    def __init__(self, spec):
        self.kind = spec.kind
        self.n = spec.n
        self.dim = spec.dim
        self.chi = spec.chi
        # np.array copies: inputs may be write-protected, memoryviews may not
        self.g1 = np.array(spec.gamma1, dtype=float, order="C").ravel() \
            if spec.gamma1 is not None else EMPTY1
        self.g2 = np.array(spec.gamma2, dtype=float, order="C").ravel() \
            if spec.gamma2 is not None else EMPTY1
        src = spec.source
        if src is None:
            self.src_kind = -1
            self.sn = 0
            self.qconst = EMPTY1
            self.src_ts = EMPTY1
            self.src_vals = EMPTY2
            self.hs = EMPTY2
            self.hds = EMPTY2
            self.func = None
            self.rbuf = EMPTY1
            self.kappa = 0.0
            self.m_samples = 0
        else:
            self.src_kind = src.kind
            self.sn = src.n
            self.kappa = src.kappa
            if src.kind == S_CONTACT:
                self.chi = src.chi
            self.qconst = np.array(src.const, dtype=float, order="C").ravel() \
                if src.const is not None else EMPTY1
            self.src_ts = np.array(src.ts, dtype=float, order="C") \
                if src.ts is not None else EMPTY1
            self.src_vals = np.array(
                src.vals, dtype=float, order="C").reshape(src.vals.shape[0], -1) \
                if src.vals is not None else EMPTY2
            self.hs = np.array(src.hs, dtype=float, order="C") \
                if src.hs is not None else EMPTY2
            self.hds = np.array(src.hds, dtype=float, order="C") \
                if src.hds is not None else EMPTY2
            self.func = src.func
            self.m_samples = self.src_ts.shape[0]
            self.rbuf = np.empty(self.sn * self.sn)
        self.t1 = np.empty(self.n * self.n) if self.n > 0 else EMPTY1

    cdef void eval_source(self, double t):
        cdef int i, j, k, m, snn
        cdef double w, u, u2, u3, a00, a10, a01, a11, dt
        cdef double h0, h1, h2, s, r1, r2
        snn = self.sn * self.sn
        if self.src_kind == S_CONST:
            for i in range(snn):
                self.rbuf[i] = self.qconst[i]
        elif self.src_kind == S_LINEAR:
            m = self.m_samples
            if t <= self.src_ts[0]:
                for i in range(snn):
                    self.rbuf[i] = self.src_vals[0, i]
            elif t >= self.src_ts[m - 1]:
                for i in range(snn):
                    self.rbuf[i] = self.src_vals[m - 1, i]
            else:
                k = _bisect(self.src_ts, t, m)
                w = (t - self.src_ts[k]) / (self.src_ts[k + 1] - self.src_ts[k])
                for i in range(snn):
                    self.rbuf[i] = (1.0 - w) * self.src_vals[k, i] \
                        + w * self.src_vals[k + 1, i]
        elif self.src_kind == S_CONTACT:
            m = self.m_samples
            if t <= self.src_ts[0]:
                h0 = self.hs[0, 0]; h1 = self.hs[0, 1]; h2 = self.hs[0, 2]
            elif t >= self.src_ts[m - 1]:
                h0 = self.hs[m - 1, 0]; h1 = self.hs[m - 1, 1]; h2 = self.hs[m - 1, 2]
            else:
                k = _bisect(self.src_ts, t, m)
                dt = self.src_ts[k + 1] - self.src_ts[k]
                u = (t - self.src_ts[k]) / dt
                u2 = u * u; u3 = u2 * u
                a00 = 2 * u3 - 3 * u2 + 1
                a10 = (u3 - 2 * u2 + u) * dt
                a01 = -2 * u3 + 3 * u2
                a11 = (u3 - u2) * dt
                h0 = a00 * self.hs[k, 0] + a10 * self.hds[k, 0] \
                    + a01 * self.hs[k + 1, 0] + a11 * self.hds[k + 1, 0]
                h1 = a00 * self.hs[k, 1] + a10 * self.hds[k, 1] \
                    + a01 * self.hs[k + 1, 1] + a11 * self.hds[k + 1, 1]
                h2 = a00 * self.hs[k, 2] + a10 * self.hds[k, 2] \
                    + a01 * self.hs[k + 1, 2] + a11 * self.hds[k + 1, 2]
            s = h1 * h1 - h2 * h2
            r1 = h0 * h0 + 3.0 * self.chi * s + self.kappa * (h1 * h1 + h2 * h2)
            r2 = 6.0 * self.chi * s * h0 * h0 \
                - 2.0 * self.chi * (self.chi + self.kappa) * h1 * h1 * h1 * h1 \
                - 12.0 * self.chi * self.chi * h1 * h1 * h2 * h2 \
                - 2.0 * self.chi * (self.chi - self.kappa) * h2 * h2 * h2 * h2
            self.rbuf[0] = r1; self.rbuf[1] = 0.0
            self.rbuf[2] = 0.0; self.rbuf[3] = r2
        else:  # S_PYCALL
            arr = np.asarray(self.func(t), dtype=float)
            mv = np.ascontiguousarray(arr).ravel()
            self._copy_sym(mv)

    cdef void _copy_sym(self, double[::1] mv):
        cdef int i, j, sn = self.sn
        for i in range(sn):
            for j in range(sn):
                self.rbuf[i * sn + j] = 0.5 * (mv[i * sn + j] + mv[j * sn + i])

    cdef void rhs(self, double t, double[::1] y, double[::1] out):
        cdef int i, j, k, n = self.n, nn = self.n * self.n, n2
        cdef double s, sm, sn_
        if self.kind == K_FLOW3D:
            out[0] = 2.0 * self.chi * y[1] * y[2]
            out[1] = y[0] * y[2]
            out[2] = -y[0] * y[1]
            return
        if self.src_kind >= 0:
            self.eval_source(t)
        if self.kind == K_JACOBI:
            # dM = -G1 M - R N ; dN = G2 M + G1^T N
            for i in range(n):
                for j in range(n):
                    sm = 0.0
                    sn_ = 0.0
                    for k in range(n):
                        sm -= self.g1[i * n + k] * y[k * n + j]
                        sm -= self.rbuf[i * n + k] * y[nn + k * n + j]
                        sn_ += self.g2[i * n + k] * y[k * n + j]
                        sn_ += self.g1[k * n + i] * y[nn + k * n + j]
                    out[i * n + j] = sm
                    out[nn + i * n + j] = sn_
        elif self.kind == K_RICC_W:
            # dW = G1^T W + W G1 + G2 + W R W
            for i in range(n):
                for j in range(n):
                    s = 0.0
                    for k in range(n):
                        s += self.rbuf[i * n + k] * y[k * n + j]
                    self.t1[i * n + j] = s
            for i in range(n):
                for j in range(n):
                    s = self.g2[i * n + j]
                    for k in range(n):
                        s += self.g1[k * n + i] * y[k * n + j]
                        s += y[i * n + k] * self.g1[k * n + j]
                        s += y[i * n + k] * self.t1[k * n + j]
                    out[i * n + j] = s
        elif self.kind == K_RICC_V:
            # dV = -G1 V - V G1^T - R - V G2 V
            for i in range(n):
                for j in range(n):
                    s = 0.0
                    for k in range(n):
                        s += self.g2[i * n + k] * y[k * n + j]
                    self.t1[i * n + j] = s
            for i in range(n):
                for j in range(n):
                    s = -self.rbuf[i * n + j]
                    for k in range(n):
                        s -= self.g1[i * n + k] * y[k * n + j]
                        s -= y[i * n + k] * self.g1[j * n + k]
                        s -= y[i * n + k] * self.t1[k * n + j]
                    out[i * n + j] = s
        else:
            # general: dX = M11 + M12 X + X M12^T + X M22 X
            n2 = 2 * n
            for i in range(n):
                for j in range(n):
                    s = 0.0
                    for k in range(n):
                        s += self.rbuf[(n + i) * n2 + n + k] * y[k * n + j]
                    self.t1[i * n + j] = s
            for i in range(n):
                for j in range(n):
                    s = self.rbuf[i * n2 + j]
                    for k in range(n):
                        s += self.rbuf[i * n2 + n + k] * y[k * n + j]
                        s += y[i * n + k] * self.rbuf[j * n2 + n + k]
                        s += y[i * n + k] * self.t1[k * n + j]
                    out[i * n + j] = s


cdef double _rms_scaled(double[::1] v, double[::1] sc, int dim):
    cdef double acc = 0.0, r
    cdef int i
    for i in range(dim):
        r = v[i] / sc[i]
        acc += r * r
    return sqrt(acc / dim)


def run(spec, y0, t_grid, double rtol, double atol, double norm_cap=1e300,
        double h_min=1e-14, long max_steps=2_000_000):
    cdef Sys sys = Sys(spec)
    cdef int dim = sys.dim
    t_arr = np.asarray(t_grid, dtype=float)
    cdef double[::1] tg = np.ascontiguousarray(t_arr)
    cdef int m = tg.shape[0]
    states_arr = np.full((m, dim), np.nan)
    cdef double[:, ::1] states = states_arr
    cdef double[::1] y = np.array(y0, dtype=float).ravel().copy()
    cdef double[::1] ytmp = np.empty(dim)
    cdef double[::1] ynew = np.empty(dim)
    cdef double[::1] errv = np.empty(dim)
    cdef double[::1] sc = np.empty(dim)
    cdef double[:, ::1] K = np.empty((7, dim))
    cdef int i, j, q, status
    cdef long steps = 0
    cdef double t = tg[0], span = tg[m - 1] - tg[0]
    cdef double h, h_use, t_target, err, factor, d0, d1, d2, dmax, h0, h1
    cdef double amax, ay, an
    cdef bint clamped
    cdef int n = sys.n

    if span <= 0:
        raise ValueError("grid must advance forward in time")
    for j in range(dim):
        states[0, j] = y[j]

    # initial step size (same heuristic as the pure kernel)
    sys.rhs(t, y, K[0])
    for j in range(dim):
        sc[j] = atol + rtol * fabs(y[j])
    d0 = _rms_scaled(y, sc, dim)
    for j in range(dim):
        errv[j] = K[0, j]
    d1 = _rms_scaled(errv, sc, dim)
    if d0 > 1e-5 and d1 > 1e-5:
        h0 = 0.01 * d0 / d1
    else:
        h0 = 1e-6
    if h0 > span:
        h0 = span
    for j in range(dim):
        ytmp[j] = y[j] + h0 * K[0, j]
    sys.rhs(t + h0, ytmp, K[1])
    for j in range(dim):
        errv[j] = K[1, j] - K[0, j]
    d2 = _rms_scaled(errv, sc, dim) / h0
    dmax = d1 if d1 > d2 else d2
    if dmax > 1e-15:
        h1 = (0.01 / dmax) ** 0.2
    else:
        h1 = 1e-6 if 1e-6 > h0 * 1e-3 else h0 * 1e-3
    h = 100.0 * h0
    if h1 < h:
        h = h1
    if span < h:
        h = span

    status = ST_OK
    for i in range(1, m):
        t_target = tg[i]
        while t < t_target:
            if steps >= max_steps:
                return (ST_MAXSTEPS, i - 1, t, np.asarray(y).copy(), states_arr)
            clamped = h >= t_target - t
            h_use = t_target - t if clamped else h
            amax = 1.0 if fabs(t) < 1.0 else fabs(t)
            if h_use < h_min * amax:
                return (ST_UNDERFLOW, i - 1, t, np.asarray(y).copy(), states_arr)
            steps += 1

            for j in range(dim):
                ytmp[j] = y[j] + h_use * (A21 * K[0, j])
            sys.rhs(t + C2 * h_use, ytmp, K[1])
            for j in range(dim):
                ytmp[j] = y[j] + h_use * (A31 * K[0, j] + A32 * K[1, j])
            sys.rhs(t + C3 * h_use, ytmp, K[2])
            for j in range(dim):
                ytmp[j] = y[j] + h_use * (A41 * K[0, j] + A42 * K[1, j]
                                          + A43 * K[2, j])
            sys.rhs(t + C4 * h_use, ytmp, K[3])
            for j in range(dim):
                ytmp[j] = y[j] + h_use * (A51 * K[0, j] + A52 * K[1, j]
                                          + A53 * K[2, j] + A54 * K[3, j])
            sys.rhs(t + C5 * h_use, ytmp, K[4])
            for j in range(dim):
                ytmp[j] = y[j] + h_use * (A61 * K[0, j] + A62 * K[1, j]
                                          + A63 * K[2, j] + A64 * K[3, j]
                                          + A65 * K[4, j])
            sys.rhs(t + h_use, ytmp, K[5])
            for j in range(dim):
                ynew[j] = y[j] + h_use * (B1 * K[0, j] + B3 * K[2, j]
                                          + B4 * K[3, j] + B5 * K[4, j]
                                          + B6 * K[5, j])
            sys.rhs(t + h_use, ynew, K[6])

            err = 0.0
            for j in range(dim):
                errv[j] = h_use * (E1 * K[0, j] + E3 * K[2, j] + E4 * K[3, j]
                                   + E5 * K[4, j] + E6 * K[5, j] + E7 * K[6, j])
                ay = fabs(y[j])
                an = fabs(ynew[j])
                sc[j] = atol + rtol * (ay if ay > an else an)
            err = _rms_scaled(errv, sc, dim)
            if not isfinite(err):
                err = 10.0

            if err <= 1.0:
                t = t_target if clamped else t + h_use
                if sys.kind == K_RICC_W or sys.kind == K_RICC_V \
                        or sys.kind == K_GENERAL:
                    for q in range(n):
                        for j in range(n):
                            y[q * n + j] = 0.5 * (ynew[q * n + j]
                                                  + ynew[j * n + q])
                    sys.rhs(t, y, K[0])
                else:
                    for j in range(dim):
                        y[j] = ynew[j]
                        K[0, j] = K[6, j]
                amax = 0.0
                for j in range(dim):
                    if not isfinite(y[j]):
                        return (ST_NONFINITE, i - 1, t,
                                np.asarray(y).copy(), states_arr)
                    ay = fabs(y[j])
                    if ay > amax:
                        amax = ay
                if amax > norm_cap:
                    return (ST_BLOWUP, i - 1, t, np.asarray(y).copy(), states_arr)
                if err == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = SAFETY * err ** -0.2
                    if factor > MAX_FACTOR:
                        factor = MAX_FACTOR
                    elif factor < MIN_FACTOR:
                        factor = MIN_FACTOR
                h = h_use * factor
            else:
                factor = SAFETY * err ** -0.2
                if factor < MIN_FACTOR:
                    factor = MIN_FACTOR
                h = h_use * factor
        for j in range(dim):
            states[i, j] = y[j]

    return (ST_OK, m - 1, t, np.asarray(y).copy(), states_arr)
