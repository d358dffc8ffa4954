"""Periodic scalar function bases on [0, P).

Both bases expose `matrix(t)`: rows are evaluation points, columns the n
basis functions.  Coefficient vectors therefore act by `matrix(t) @ c`.
"""

import numpy as np
from scipy.interpolate import BSpline

TWO_PI = 2.0 * np.pi


class TrigBasis:
    """Constant plus paired cosines and sines: 1, cos(2*pi j t / P),
    sin(2*pi j t / P) for j = 1, 2, ... truncated to n functions."""

    kind = "trig"

    def __init__(self, n=11, period=TWO_PI):
        if n < 1:
            raise ValueError("need at least one basis function")
        self.n = int(n)
        self.period = float(period)

    def matrix(self, t):
        t = np.asarray(t, dtype=float)
        m = np.ones((t.shape[0], self.n))
        omega = TWO_PI / self.period
        for col in range(1, self.n):
            j = (col + 1) // 2
            if col % 2 == 1:
                m[:, col] = np.cos(j * omega * t)
            else:
                m[:, col] = np.sin(j * omega * t)
        return m

    def spec(self):
        return {"type": "trig", "n": self.n}


class PeriodicBSplineBasis:
    """n uniformly shifted periodic B-splines of the given degree.

    Built from the open uniform B-spline of the degree by summing integer-
    period translates, so the family is a partition of unity times a
    constant.
    """

    kind = "bspline"

    def __init__(self, n=11, period=TWO_PI, degree=3):
        if n <= degree:
            raise ValueError("need more functions than the spline degree")
        self.n = int(n)
        self.period = float(period)
        self.degree = int(degree)
        self._h = self.period / self.n
        self._element = BSpline.basis_element(
            np.arange(self.degree + 2) * self._h, extrapolate=False)
        self._support = (self.degree + 1) * self._h

    def matrix(self, t):
        t = np.asarray(t, dtype=float)
        tw = np.mod(t, self.period)
        m = np.zeros((t.shape[0], self.n))
        for j in range(self.n):
            for shift in (0.0, self.period):
                u = tw - j * self._h + shift
                inside = (u >= 0.0) & (u < self._support)
                if np.any(inside):
                    m[inside, j] += np.nan_to_num(self._element(u[inside]))
        return m

    def spec(self):
        return {"type": "bspline", "n": self.n, "degree": self.degree}


def make_basis(spec, period=TWO_PI):
    """Build a basis from its JSON-style spec dict."""
    kind = spec.get("type", "trig")
    n = int(spec.get("n", 11))
    if kind == "trig":
        return TrigBasis(n=n, period=period)
    if kind == "bspline":
        return PeriodicBSplineBasis(n=n, period=period, degree=int(spec.get("degree", 3)))
    raise ValueError(f"unknown basis type {kind!r}")
