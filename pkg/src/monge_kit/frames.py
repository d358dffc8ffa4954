"""Rotation-minimizing frames along space curves and their holonomy.

The frame (t, q1, q2) is adapted (t tangent) and twist-free: q1 and q2 have
derivatives along t only.  Transport is discretized by the double-reflection
scheme: reflect the frame through the plane bisecting the chord, then through
the plane bisecting the old and new tangents.  For a closed curve the
transported normal-plane basis generally returns rotated by the holonomy
angle, which equals minus the total torsion modulo 2*pi.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .curve import SampledCurve3, binormal_trace_length, curve_derivatives, frenet_data, total_torsion
from .errors import DegenerateTangent, InflectionPoint, OpenCurve
from .numerics import TWO_PI, unit, wrap_angle

TANGENT_TOL = 1e-12


@dataclass(frozen=True)
class MovingFrame:
    """Orthonormal right-handed frame field (t, q1, q2) along a curve.

    For closed curves `holonomy_angle` is the wrapped angle by which the
    normal-plane basis returns rotated after one loop; for open curves it is
    the accumulated rotation of the Frenet normal relative to (q1, q2), or
    None when the Frenet frame is undefined.
    """

    curve: SampledCurve3
    t: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    holonomy_angle: Optional[float]

    def __post_init__(self):
        for name in ("t", "q1", "q2"):
            a = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=float))
            a.setflags(write=False)
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class CylinderReport:
    """Closure diagnostics for a prospective Monge-cylinder spine."""

    is_cylinder_spine: bool
    total_torsion: float
    binormal_length: float
    holonomy: float
    rational: Optional[Fraction]


def _tangents(curve):
    d1 = curve_derivatives(curve)[0]
    speed = np.linalg.norm(d1, axis=1)
    scale = curve.scale()
    bad = np.nonzero(speed <= TANGENT_TOL * scale)[0]
    if bad.size:
        raise DegenerateTangent(f"vanishing tangent at sample {bad[0]}")
    return d1 / speed[:, None], speed


def _double_reflect(x0, x1, t0, t1, q):
    v1 = x1 - x0
    c1 = v1 @ v1
    q_l = q - (2.0 / c1) * (v1 @ q) * v1
    t_l = t0 - (2.0 / c1) * (v1 @ t0) * v1
    v2 = t1 - t_l
    c2 = v2 @ v2
    if c2 > 1e-28:
        q_l = q_l - (2.0 / c2) * (v2 @ q_l) * v2
    return q_l


def rotation_minimizing_frame(curve, q1_initial=None):
    """Transport a rotation-minimizing frame along the curve samples.

    `q1_initial` seeds the normal-plane basis at the first sample; it is
    projected orthogonal to the initial tangent and normalized.  When omitted
    a deterministic seed orthogonal to t(0) is chosen.
    """
    t, _ = _tangents(curve)
    x = curve.samples
    n = curve.n
    if q1_initial is None:
        axis = np.zeros(3)
        axis[int(np.argmin(np.abs(t[0])))] = 1.0
        q1_initial = axis
    q = np.asarray(q1_initial, dtype=float)
    q = q - (q @ t[0]) * t[0]
    nq = np.linalg.norm(q)
    if nq < 1e-12:
        raise ValueError("q1_initial is parallel to the initial tangent")
    q = q / nq

    q1 = np.empty_like(t)
    q1[0] = q
    for i in range(n - 1):
        q_next = _double_reflect(x[i], x[i + 1], t[i], t[i + 1], q1[i])
        q_next = q_next - (q_next @ t[i + 1]) * t[i + 1]
        q1[i + 1] = q_next / np.linalg.norm(q_next)
    q2 = np.cross(t, q1)

    holonomy = None
    if curve.closed:
        q_wrap = _double_reflect(x[-1], x[0], t[-1], t[0], q1[-1])
        q_wrap = q_wrap - (q_wrap @ t[0]) * t[0]
        q_wrap = q_wrap / np.linalg.norm(q_wrap)
        holonomy = wrap_angle(float(np.arctan2(q_wrap @ q2[0], q_wrap @ q1[0])))
    else:
        try:
            fr = frenet_data(curve)
        except InflectionPoint:
            fr = None
        if fr is not None:
            delta = np.unwrap(np.arctan2(
                np.einsum("ij,ij->i", fr.normal, q2),
                np.einsum("ij,ij->i", fr.normal, q1),
            ))
            holonomy = float(delta[-1] - delta[0])
    return MovingFrame(curve=curve, t=t, q1=q1, q2=q2, holonomy_angle=holonomy)


def frame_holonomy(frame):
    """Wrapped rotation angle of the normal-plane basis after one loop."""
    if not frame.curve.closed:
        raise OpenCurve("frame holonomy requires a closed curve")
    return float(frame.holonomy_angle)


def rational_turns(total_torsion_value, tol=1e-6, max_den=24):
    """Best small-denominator fraction k/n for T/(2*pi), if close enough."""
    turns = total_torsion_value / TWO_PI
    frac = Fraction(turns).limit_denominator(max_den)
    if abs(turns - float(frac)) < tol:
        return frac
    return None


def is_monge_cylinder_spine(curve, tol=1e-6):
    """Whether a closed spine carries a closed rotation-minimizing frame.

    Returns (verdict, CylinderReport).  The verdict is true exactly when the
    frame holonomy vanishes modulo 2*pi within `tol`; the report also carries
    the total torsion, the binormal trace length, and the small-denominator
    rational approximation of T / (2*pi) when one exists.
    """
    if not curve.closed:
        raise OpenCurve("Monge-cylinder test requires a closed spine")
    frame = rotation_minimizing_frame(curve)
    theta = frame_holonomy(frame)
    T = total_torsion(curve)
    L_S = binormal_trace_length(curve)
    verdict = bool(abs(theta) <= tol)
    report = CylinderReport(
        is_cylinder_spine=verdict,
        total_torsion=float(T),
        binormal_length=float(L_S),
        holonomy=float(theta),
        rational=rational_turns(T, tol=max(tol, 1e-9)),
    )
    return verdict, report
