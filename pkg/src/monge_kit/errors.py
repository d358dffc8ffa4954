"""Exception types shared across the package.

Geometric preconditions raise subclasses of GeometryError so callers (and the
command line driver) can distinguish bad geometry from bad input files.
"""


class GeometryError(Exception):
    """A geometric precondition failed."""


class DegenerateCurve(GeometryError):
    """Repeated consecutive samples, or too few samples to be regular."""


class DegenerateTangent(GeometryError):
    """A tangent vector could not be normalized (zero speed)."""


class InflectionPoint(GeometryError):
    """Curvature vanishes at a sample, so the Frenet frame is undefined there."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"curvature vanishes at sample index {index}")


class NonPeriodicBinormal(GeometryError):
    """The binormal field of a closed curve returns negated after one loop."""


class OpenCurve(GeometryError):
    """An operation that requires a closed curve was given an open one."""


class OutOfDomain(GeometryError):
    """Evaluation outside the parameter domain of an open curve or family."""


class SingularPoint(GeometryError):
    """The swept surface is singular at a grid point (margin vanishes)."""

    def __init__(self, u, v, message=None):
        self.u = u
        self.v = v
        super().__init__(message or f"surface is singular at (u, v) = ({u}, {v})")


class SeamMismatch(GeometryError):
    """Seam vertices fail to coincide under the requested identification."""


class NonPositiveSigma(GeometryError):
    """A torsion-radius field sigma = 1/tau must be strictly positive."""


class Infeasible(GeometryError):
    """The closing system has no strictly positive solution."""


class NonConvergence(GeometryError):
    """An iterative solver stopped before reaching its tolerance."""
