"""Time-dependent symmetric curvature matrices R(t) along an extremal.

Three kinds: constant, closed-form (an arbitrary callable), and sampled with
linear interpolation.  Constant and sampled fields round-trip through JSON;
the header of a sampled field declares its interpolation rule.
"""

from __future__ import annotations

import json
from typing import Callable

import numpy as np

from .errors import DimensionMismatch
from .kernel import systems

__all__ = ["CurvatureField"]

SYMMETRY_TOL = 1e-12


class CurvatureField:
    """Evaluator ``t -> R(t)`` with a kind tag and a kernel source descriptor."""

    def __init__(self, dimension: int, kind: str, source: systems.SourceSpec,
                 evaluator: Callable[[float], np.ndarray]):
        self.dimension = int(dimension)
        self.kind = kind
        self.source = source
        self._evaluator = evaluator

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, Q) -> "CurvatureField":
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionMismatch("constant field needs a square matrix")
        if np.max(np.abs(Q - Q.T)) > SYMMETRY_TOL * (1.0 + np.max(np.abs(Q))):
            raise ValueError("constant field must be symmetric")
        src = systems.const_source(Q)
        return cls(Q.shape[0], "constant", src, lambda t, Q=src.const: Q.copy())

    @classmethod
    def from_callable(cls, dimension: int, func: Callable[[float], np.ndarray],
                      ) -> "CurvatureField":
        src = systems.pycall_source(dimension, func)

        def ev(t, func=func):
            R = np.asarray(func(t), dtype=float)
            return 0.5 * (R + R.T)

        return cls(dimension, "closed-form", src, ev)

    @classmethod
    def from_samples(cls, ts, Rs) -> "CurvatureField":
        src = systems.linear_source(np.asarray(ts, float), np.asarray(Rs, float))

        def ev(t, ts=src.ts, vals=src.vals):
            if t <= ts[0]:
                return vals[0].copy()
            if t >= ts[-1]:
                return vals[-1].copy()
            i = int(np.searchsorted(ts, t, side="right") - 1)
            w = (t - ts[i]) / (ts[i + 1] - ts[i])
            return (1.0 - w) * vals[i] + w * vals[i + 1]

        return cls(src.n, "sampled", src, ev)

    @classmethod
    def contact3d(cls, chi: float, kappa: float, ts, hs, hds) -> "CurvatureField":
        """Diagonal 2x2 field diag(Ric1, Ric2) along a sampled covector flow."""
        from .kernel.pure import _contact3d_ricci, _hermite_eval

        src = systems.contact3d_source(chi, kappa, ts, hs, hds)

        def ev(t, src=src):
            h = _hermite_eval(src.ts, src.hs, src.hds, t)
            r1, r2 = _contact3d_ricci(src.chi, src.kappa, h[0], h[1], h[2])
            return np.array([[r1, 0.0], [0.0, r2]])

        return cls(2, "closed-form", src, ev)

    # -- evaluation --------------------------------------------------------

    def __call__(self, t: float) -> np.ndarray:
        R = np.asarray(self._evaluator(float(t)), dtype=float)
        if R.shape != (self.dimension, self.dimension):
            raise DimensionMismatch(
                f"evaluator returned shape {R.shape}, expected "
                f"({self.dimension}, {self.dimension})"
            )
        return 0.5 * (R + R.T)

    def is_constant(self) -> bool:
        return self.kind == "constant"

    def constant_matrix(self) -> np.ndarray:
        if not self.is_constant():
            raise ValueError("field is not constant")
        return self.source.const.copy()

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        if self.kind == "constant":
            doc = {
                "kind": "constant",
                "dimension": self.dimension,
                "matrix": self.source.const.tolist(),
            }
        elif self.kind == "sampled":
            doc = {
                "kind": "sampled",
                "dimension": self.dimension,
                "interpolation": "linear",
                "times": self.source.ts.tolist(),
                "matrices": self.source.vals.tolist(),
            }
        else:
            raise ValueError("only constant and sampled fields serialize")
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "CurvatureField":
        doc = json.loads(text)
        kind = doc.get("kind")
        if kind == "constant":
            return cls.constant(np.array(doc["matrix"], dtype=float))
        if kind == "sampled":
            interp = doc.get("interpolation", "linear")
            if interp != "linear":
                raise ValueError(f"unsupported interpolation {interp!r}")
            return cls.from_samples(
                np.array(doc["times"], dtype=float),
                np.array(doc["matrices"], dtype=float),
            )
        raise ValueError(f"unknown field kind {kind!r}")
