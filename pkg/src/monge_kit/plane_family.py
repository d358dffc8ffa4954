"""Orthogonal families of planes in 3-space.

A family is a base-point path p(v) with an adapted orthonormal frame
(q1, q2, t), t the plane normal, whose in-plane vectors move only along t:

    q1' = kappa1 t,    q2' = kappa2 t,    t' = -kappa1 q1 - kappa2 q2,
    p'  = lambda t.

With these signs the base-point shift p -> p + a q1 + b q2 sends lambda to
lambda + a kappa1 + b kappa2, and the instantaneous axis of rotation in plane
coordinates is the line kappa1 x + kappa2 y + lambda = 0.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .curve import SampledCurve3, curve_derivatives, parameter_speed, reparameterize_arclength
from .errors import NonConvergence
from .frames import rotation_minimizing_frame
from .numerics import (
    fd_derivatives_open,
    is_uniform,
    orthonormalize_frame,
    periodic_trapezoid,
    spectral_derivatives,
)

FRAME_TOL = 1e-8
ORTHOGONALITY_RTOL = 1e-6
TRANSPORT_STEP = 0.1  # max tangent turn, in radians, per frame-transport step


@dataclass(frozen=True)
class PlaneFamily:
    """Sampled orthogonal family of planes.

    `closed` means the whole family (base point and frame) is periodic; a
    closed spine whose frame returns rotated yields closed=False with the
    rotation recorded in `holonomy_angle` and the base period in `period`.
    """

    params: np.ndarray
    p: np.ndarray
    t: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    lam: np.ndarray
    closed: bool
    period: Optional[float] = None
    holonomy_angle: Optional[float] = None
    spine: Optional[SampledCurve3] = None
    validate: bool = True

    def __post_init__(self):
        for name in ("params", "p", "t", "q1", "q2", "kappa1", "kappa2", "lam"):
            a = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=float))
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.validate:
            _validate_family(self)

    @property
    def n(self):
        return self.params.shape[0]

    def scale(self):
        lo = self.p.min(axis=0)
        hi = self.p.max(axis=0)
        return max(float(np.linalg.norm(hi - lo)), 1.0)


@dataclass(frozen=True)
class AxisLine:
    """Instantaneous rotation axis in plane coordinates.

    kind is "line" (coefficients define kappa1 x + kappa2 y + lam = 0),
    "empty" (pure translation, no fixed points in the plane), or
    "everything" (all coefficients vanish).
    """

    kind: str
    kappa1: Optional[float] = None
    kappa2: Optional[float] = None
    lam: Optional[float] = None


def _base_periodic(family):
    """Whether the base point loops even though the frame may not."""
    if family.closed:
        return True
    return bool(family.period is not None
                and family.spine is not None
                and family.spine.closed)


def _twisted_derivatives(family, theta):
    """Spectral first derivatives of the in-plane pair (q1, q2) when the
    frame returns rotated by `theta` after one period.  The complex field
    w = q1 + i q2 satisfies w(v + P) = exp(-i theta) w(v); removing the
    spiral factor makes it periodic and band-limited."""
    v = family.params - family.params[0]
    rate = theta / family.period
    spiral = np.exp(1j * rate * v)[:, None]
    w = spiral * (family.q1 + 1j * family.q2)
    dw = (spectral_derivatives(w.real, family.period, orders=(1,))[0]
          + 1j * spectral_derivatives(w.imag, family.period, orders=(1,))[0])
    dq = (dw - 1j * rate * w) / spiral
    return dq.real, dq.imag


def _family_first_derivatives(family):
    """First derivatives of (p, q1, q2) with the stencil matched to how each
    field continues around the loop, plus the rows each is trusted on.

    Periodic fields are differentiated spectrally; a frame that loops only up
    to the holonomy rotation is untwisted first.  Open (or unknown)
    continuations fall back to finite differences whose one-sided end rows
    are excluded: they amplify truncation error past any useful tolerance on
    oscillatory fields.
    """
    h = family.params[1] - family.params[0]
    interior = slice(2, -2)
    everywhere = slice(None)
    fd = lambda values: fd_derivatives_open(values, h, orders=(1,))[0]
    if family.closed:
        sp = lambda values: spectral_derivatives(values, family.period, orders=(1,))[0]
        return [("p", sp(family.p), everywhere),
                ("q1", sp(family.q1), everywhere),
                ("q2", sp(family.q2), everywhere)]
    if _base_periodic(family):
        dp = spectral_derivatives(family.p, family.period, orders=(1,))[0]
        if family.holonomy_angle is not None:
            dq1, dq2 = _twisted_derivatives(family, family.holonomy_angle)
            return [("p", dp, everywhere), ("q1", dq1, everywhere),
                    ("q2", dq2, everywhere)]
        return [("p", dp, everywhere), ("q1", fd(family.q1), interior),
                ("q2", fd(family.q2), interior)]
    return [("p", fd(family.p), interior), ("q1", fd(family.q1), interior),
            ("q2", fd(family.q2), interior)]


def _validate_family(family):
    if not is_uniform(family.params):
        raise ValueError("plane families require a uniform parameter grid")
    frames = np.stack([family.q1, family.q2, family.t], axis=-1)
    eye = np.eye(3)
    gram_err = np.abs(np.einsum("nij,nik->njk", frames, frames) - eye).max()
    det_err = np.abs(np.linalg.det(frames) - 1.0).max()
    if gram_err > FRAME_TOL or det_err > 1e-6:
        raise ValueError("family frame is not orthonormal right-handed")
    scale = max(np.abs(family.kappa1).max(), np.abs(family.kappa2).max(),
                np.abs(family.lam).max(), 1e-12)
    for name, d, rows in _family_first_derivatives(family):
        d = d[rows]
        t = family.t[rows]
        off = d - np.einsum("ij,ij->i", d, t)[:, None] * t
        if np.abs(off).max() > ORTHOGONALITY_RTOL * max(scale, np.abs(d).max()):
            raise ValueError(f"{name}' has components off the plane normal; "
                             "not an orthogonal family")


def _transport_oversample(curve, n):
    """Samples per output step so the tangent turns at most TRANSPORT_STEP."""
    d1, d2, _ = curve_derivatives(curve)
    speed = np.linalg.norm(d1, axis=1)
    kappa_max = float((np.linalg.norm(np.cross(d1, d2), axis=1) / speed**3).max())
    if curve.closed:
        length = periodic_trapezoid(parameter_speed(curve), curve.period)
        steps = n
    else:
        length = float(np.sum(0.5 * (speed[1:] + speed[:-1]) * np.diff(curve.params)))
        steps = n - 1
    m = int(np.ceil(kappa_max * length / (TRANSPORT_STEP * steps)))
    return min(max(m, 1), max(1, 131072 // n))


def _decimate_curve(curve, m):
    if m == 1:
        return curve
    sel = slice(None, None, m)
    return SampledCurve3(
        samples=curve.samples[sel],
        params=curve.params[sel],
        closed=curve.closed,
        period=curve.period,
        analytic=curve.analytic,
        native_params=None if curve.native_params is None else curve.native_params[sel],
        derivs=None if curve.derivs is None else tuple(d[sel] for d in curve.derivs),
    )


def from_spine(curve, q1_initial=None, n=None):
    """Build the orthogonal family carried by a spine curve.

    The spine is reparameterized to unit speed, so lambda is identically 1;
    the in-plane frame is the rotation-minimizing one seeded by `q1_initial`.
    Transport runs on a grid fine enough that the tangent turns little per
    step; with n=None the family keeps that resolution (at least the spine's
    own sample count), while an explicit n decimates every field onto exactly
    n samples, which must still resolve the spine's bandwidth.
    """
    n_out = curve.n if n is None else int(n)
    m = _transport_oversample(curve, n_out)
    n_fine = m * n_out if curve.closed else m * (n_out - 1) + 1
    speed = parameter_speed(curve)
    if n_fine != curve.n or np.abs(speed - 1.0).max() > 1e-9:
        fine = reparameterize_arclength(curve, n_fine)
    else:
        fine = curve
    frame = rotation_minimizing_frame(fine, q1_initial=q1_initial)
    d1, d2, _ = curve_derivatives(fine)
    # d2 may be taken in the analytic native parameter; dividing by the
    # squared native speed yields the arc-length tangent derivative in the
    # normal plane, which is all the qi-projections see.
    speed_sq = np.einsum("ij,ij->i", d1, d1)
    kappa1 = -np.einsum("ij,ij->i", d2, frame.q1) / speed_sq
    kappa2 = -np.einsum("ij,ij->i", d2, frame.q2) / speed_sq
    closed_family = bool(fine.closed and frame.holonomy_angle is not None
                         and abs(frame.holonomy_angle) < 1e-6)
    if n is None:
        m = 1
    sel = slice(None, None, m)
    return PlaneFamily(
        params=fine.params[sel],
        p=fine.samples[sel],
        t=frame.t[sel],
        q1=frame.q1[sel],
        q2=frame.q2[sel],
        kappa1=kappa1[sel],
        kappa2=kappa2[sel],
        lam=np.ones(fine.params[sel].shape[0]),
        closed=closed_family,
        period=fine.period,
        holonomy_angle=frame.holonomy_angle,
        spine=_decimate_curve(fine, m),
    )


def _coefficient_splines(params, kappa1, kappa2, lam, period):
    kappa1, kappa2, lam = (np.broadcast_to(np.asarray(f, dtype=float),
                                           params.shape)
                           for f in (kappa1, kappa2, lam))
    if period is not None:
        grid = np.append(params, params[0] + period)
        wrap = lambda f: np.append(f, f[0])
        bc = "periodic"
        return tuple(CubicSpline(grid, wrap(np.asarray(f, dtype=float)), bc_type=bc)
                     for f in (kappa1, kappa2, lam))
    return tuple(CubicSpline(params, np.asarray(f, dtype=float))
                 for f in (kappa1, kappa2, lam))


def _omega(k1, k2):
    return np.array([
        [0.0, 0.0, -k1],
        [0.0, 0.0, -k2],
        [k1, k2, 0.0],
    ])


def _rk4_step(F, p, v, h, sk1, sk2, slam):
    def rates(Fc, vc):
        k1 = sk1(vc)
        k2 = sk2(vc)
        dF = Fc @ _omega(k1, k2)
        dp = slam(vc) * Fc[:, 2]
        return dF, dp

    dF1, dp1 = rates(F, v)
    dF2, dp2 = rates(F + 0.5 * h * dF1, v + 0.5 * h)
    dF3, dp3 = rates(F + 0.5 * h * dF2, v + 0.5 * h)
    dF4, dp4 = rates(F + h * dF3, v + h)
    F_new = F + (h / 6.0) * (dF1 + 2.0 * dF2 + 2.0 * dF3 + dF4)
    p_new = p + (h / 6.0) * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4)
    return orthonormalize_frame(F_new), p_new


def from_coefficients(params, kappa1, kappa2, lam, initial_frame=None,
                      initial_point=(0.0, 0.0, 0.0), period=None, substeps=8):
    """Integrate a plane family from its connection coefficients.

    `initial_frame` is a 3x3 matrix with columns (q1, q2, t); the coefficient
    fields are sampled on `params` and interpolated by cubic splines
    (periodic splines when `period` is given).  The frame is advanced by a
    classical 4th-order step with polar re-orthonormalization.
    """
    params = np.asarray(params, dtype=float)
    if not is_uniform(params):
        raise ValueError("from_coefficients requires a uniform parameter grid")
    kappa1, kappa2, lam = (np.ascontiguousarray(
        np.broadcast_to(np.asarray(f, dtype=float), params.shape))
        for f in (kappa1, kappa2, lam))
    sk1, sk2, slam = _coefficient_splines(params, kappa1, kappa2, lam, period)
    if initial_frame is None:
        F = np.eye(3)
    else:
        F = orthonormalize_frame(np.asarray(initial_frame, dtype=float))
    p = np.asarray(initial_point, dtype=float).copy()

    n = params.shape[0]
    frames = np.empty((n, 3, 3))
    points = np.empty((n, 3))
    frames[0] = F
    points[0] = p
    h_grid = params[1] - params[0]
    h = h_grid / substeps
    for i in range(n - 1):
        v = params[i]
        for k in range(substeps):
            F, p = _rk4_step(F, p, v + k * h, h, sk1, sk2, slam)
        frames[i + 1] = F
        points[i + 1] = p
    if not np.all(np.isfinite(points)):
        raise NonConvergence("frame integration produced non-finite values")

    closed = False
    holonomy = None
    if period is not None:
        F_end, p_end = F, p
        v = params[-1]
        for k in range(substeps):
            F_end, p_end = _rk4_step(F_end, p_end, v + k * h, h, sk1, sk2, slam)
        scale = max(np.linalg.norm(points - points[0], axis=1).max(), 1.0)
        point_ok = np.linalg.norm(p_end - points[0]) < 1e-5 * scale
        frame_ok = np.abs(F_end - frames[0]).max() < 1e-5
        closed = bool(point_ok and frame_ok)
        if point_ok:
            c, s = F_end[:, 0] @ frames[0][:, 0], F_end[:, 0] @ frames[0][:, 1]
            holonomy = float(np.arctan2(s, c))
    return PlaneFamily(
        params=params,
        p=points,
        t=frames[:, :, 2],
        q1=frames[:, :, 0],
        q2=frames[:, :, 1],
        kappa1=np.asarray(kappa1, dtype=float),
        kappa2=np.asarray(kappa2, dtype=float),
        lam=np.asarray(lam, dtype=float),
        closed=closed,
        period=period,
        holonomy_angle=holonomy,
    )


def extract_coefficients(family):
    """Recover (kappa1, kappa2, lambda) from the sampled fields by numerical
    differentiation; used to cross-check the stored coefficients."""
    derivs = dict((name, d) for name, d, _ in _family_first_derivatives(family))
    k1 = np.einsum("ij,ij->i", derivs["q1"], family.t)
    k2 = np.einsum("ij,ij->i", derivs["q2"], family.t)
    lam = np.einsum("ij,ij->i", derivs["p"], family.t)
    return k1, k2, lam


def gauge_transform(family, angle=0.0, a=0.0, b=0.0):
    """Rotate the in-plane basis by a constant angle and shift the base point
    by a q1 + b q2; coefficients transform covariantly."""
    c, s = np.cos(angle), np.sin(angle)
    q1 = c * family.q1 + s * family.q2
    q2 = -s * family.q1 + c * family.q2
    k1 = c * family.kappa1 + s * family.kappa2
    k2 = -s * family.kappa1 + c * family.kappa2
    p = family.p + a * family.q1 + b * family.q2
    lam = family.lam + a * family.kappa1 + b * family.kappa2
    return PlaneFamily(
        params=family.params, p=p, t=family.t, q1=q1, q2=q2,
        kappa1=k1, kappa2=k2, lam=lam, closed=family.closed,
        period=family.period, holonomy_angle=family.holonomy_angle,
        spine=None, validate=family.validate,
    )


def is_regular_family(family, tol_factor=1e-9):
    """A family is regular when (kappa1, kappa2, lambda) never all vanish."""
    mags = np.maximum(np.abs(family.kappa1),
                      np.maximum(np.abs(family.kappa2), np.abs(family.lam)))
    scale = max(float(mags.max()), 1e-300)
    bad = np.nonzero(mags <= tol_factor * scale)[0]
    if bad.size:
        return False, int(bad[0])
    return True, None


def instantaneous_axis(family, v):
    """Axis of rotation in the plane at parameter v: the line where the
    instantaneous motion of the plane has no in-plane displacement."""
    if family.period is not None:
        grid = np.append(family.params, family.params[0] + family.period)
        wrap = lambda f: np.append(f, f[0])
        splines = [CubicSpline(grid, wrap(f), bc_type="periodic")
                   for f in (family.kappa1, family.kappa2, family.lam)]
        v = family.params[0] + (v - family.params[0]) % family.period
    else:
        splines = [CubicSpline(family.params, f)
                   for f in (family.kappa1, family.kappa2, family.lam)]
    k1, k2, lam = (float(s(v)) for s in splines)
    scale = max(abs(k1), abs(k2), abs(lam), 1e-300)
    if max(abs(k1), abs(k2)) <= 1e-12 * scale:
        if abs(lam) <= 1e-12 * scale:
            return AxisLine(kind="everything")
        return AxisLine(kind="empty")
    norm = np.hypot(k1, k2)
    k1, k2, lam = k1 / norm, k2 / norm, lam / norm
    if lam < 0.0:
        k1, k2, lam = -k1, -k2, -lam
    return AxisLine(kind="line", kappa1=k1, kappa2=k2, lam=lam)
