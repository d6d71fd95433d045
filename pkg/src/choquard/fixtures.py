"""Harmonic validation fixtures.

``RemarkOneField`` is the optimal-growth example: ``|x|^{2-n}`` when
``lam < n/(n-2)`` (so that ``u^lam`` stays integrable) and the constant 1
otherwise, both multiplied by the cutoff.  Either way ``-Laplace u = 0`` in
``B_2 minus {0}``, so the inequality holds with left side zero.
"""

from __future__ import annotations

import numpy as np

from .potential import cutoff
from .quadrature import Feature
from .regions import Params


class RemarkOneField:
    def __init__(self, params: Params):
        self.params = params
        self.singular = params.lam < params.lam_top

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def features(self) -> list[Feature]:
        origin = tuple([0.0] * self.n)
        return [Feature(origin, 0.0, np.inf if self.singular else 0.0)]

    def __call__(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, float))
        r = np.sqrt(np.sum(pts * pts, axis=1))
        if self.singular:
            with np.errstate(divide="ignore"):
                base = r ** (2.0 - self.n)
        else:
            base = np.ones_like(r)
        return base * cutoff(r)

    def source(self, pts) -> np.ndarray:
        return np.zeros(len(np.atleast_2d(pts)))

    @property
    def label(self) -> str:
        return "remark1-singular" if self.singular else "remark1-constant"
