"""Real-root isolation for small polynomials by Sturm-sequence counting.

Coefficients are floating point, highest power first (numpy convention).
Degrees here are tiny (the finiteness polynomials), so plain long division
with a relative zero-remainder cutoff is adequate; an early-terminating
chain signals a repeated factor, which is divided out before counting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RealRoot", "isolate_real_roots", "negative_simple_roots"]

REMAINDER_CUTOFF = 1e-13
SIMPLICITY_TOL = 1e-9


@dataclass(frozen=True)
class RealRoot:
    value: float
    simple: bool
    bracket: tuple[float, float]


def _trim(c):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.nonzero(np.abs(c) > 0.0)[0]
    return c[nz[0]:] if nz.size else np.zeros(1)


def _polydiv_rem(a, b):
    q, r = np.polydiv(a, b)
    return _trim(r)


def _sturm_chain(p):
    chain = [p, _trim(np.polyder(p))]
    while len(chain[-1]) > 1:
        prev, last = chain[-2], chain[-1]
        r = _polydiv_rem(prev, last)
        if np.max(np.abs(r)) <= REMAINDER_CUTOFF * max(1.0, np.max(np.abs(prev))):
            break
        chain.append(-r)
    return chain


def _sign_variations(chain, x):
    vals = [np.polyval(c, x) for c in chain]
    signs = [v for v in vals if v != 0.0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def _count_roots(chain, a, b):
    return _sign_variations(chain, a) - _sign_variations(chain, b)


def _cauchy_bound(p):
    lead = p[0]
    return 1.0 + float(np.max(np.abs(p[1:] / lead))) if len(p) > 1 else 1.0


def _bisect_root(p, a, b, tol):
    fa = np.polyval(p, a)
    for _ in range(200):
        if b - a <= tol * max(1.0, abs(a), abs(b)):
            break
        m = 0.5 * (a + b)
        fm = np.polyval(p, m)
        if fm == 0.0:
            return m, m
        if (fa > 0) == (fm > 0):
            a, fa = m, fm
        else:
            b = m
    return a, b


def isolate_real_roots(p, tol: float = 1e-12) -> list[RealRoot]:
    """Distinct real roots of p with simplicity flags.

    A root is flagged non-simple when the repeated factor extracted from the
    Sturm chain vanishes there, or when |p'| at the root falls under
    ``SIMPLICITY_TOL`` relative to its natural evaluation magnitude.
    """
    p = _trim(p)
    if len(p) <= 1:
        return []
    gcd = np.ones(1)
    chain = _sturm_chain(p)
    q = p
    if len(chain[-1]) > 1:
        # early termination: chain[-1] ~ gcd(p, p'); work with the
        # square-free part and remember the repeated roots
        gcd = chain[-1] / chain[-1][0]
        q = _trim(np.polydiv(p, gcd)[0])
        chain = _sturm_chain(q)

    bound = _cauchy_bound(q)
    total = _count_roots(chain, -bound - 1.0, bound + 1.0)
    roots: list[RealRoot] = []

    def recurse(a, b, count):
        if count == 0:
            return
        if count == 1:
            lo, hi = _bisect_root(q, a, b, tol)
            r = 0.5 * (lo + hi)
            # one Newton polish on the square-free part
            dq = np.polyval(np.polyder(q), r)
            if dq != 0.0:
                r2 = r - np.polyval(q, r) / dq
                if lo - (hi - lo) <= r2 <= hi + (hi - lo):
                    r = r2
            dp = np.polyval(np.polyder(p), r)
            scale = float(np.sum(np.abs(np.polyder(p))
                                 * np.maximum(1.0, abs(r))
                                 ** np.arange(len(p) - 2, -1, -1)))
            simple = abs(dp) >= SIMPLICITY_TOL * max(1.0, scale)
            if abs(np.polyval(gcd, r)) <= 1e-6 * max(1.0, abs(r)) ** (len(gcd) - 1) \
                    and len(gcd) > 1:
                simple = False
            roots.append(RealRoot(float(r), bool(simple), (float(lo), float(hi))))
            return
        m = 0.5 * (a + b)
        left = _count_roots(chain, a, m)
        recurse(a, m, left)
        recurse(m, b, count - left)

    recurse(-bound - 1.0, bound + 1.0, total)
    roots.sort(key=lambda r: r.value)
    return roots


def negative_simple_roots(p, zero_guard: float = 1e-9) -> list[RealRoot]:
    """Simple real roots strictly below ``-zero_guard``."""
    return [r for r in isolate_real_roots(p)
            if r.simple and r.value < -zero_guard]
