"""Sampled space and plane curves, Frenet data, and torsion integrals.

Curves are immutable arrays of samples with strictly increasing parameters.
Closed curves store one period without a duplicated endpoint; evaluation and
stencils wrap around.  Curves built from analytic families carry exact
derivative callables, and curves built by quadrature carry per-sample
derivative arrays; everything else falls back to 4th-order finite differences
on a uniform parameter grid.

Convention: torsion follows the classical determinant formula
tau = det(r', r'', r''') / |r' x r''|^2, which is positive for a right-handed
circular helix.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    DegenerateCurve,
    InflectionPoint,
    NonPeriodicBinormal,
    OpenCurve,
)
from . import numerics
from .numerics import (
    bbox_diameter,
    cumulative_gauss,
    fd_derivatives_open,
    fd_derivatives_periodic,
    is_uniform,
    periodic_trapezoid,
)

MIN_CLOSED_SAMPLES = 8


@dataclass(frozen=True)
class AnalyticCurve:
    """Exact point/derivative callables in a native parameter.

    All callables are vectorized: given shape (m,) parameters they return
    (m, dim) arrays.
    """

    point: Callable
    d1: Callable
    d2: Callable
    d3: Callable
    dim: int = 3


def _freeze(a, dtype=float):
    a = np.ascontiguousarray(np.asarray(a, dtype=dtype))
    a.setflags(write=False)
    return a


def _validate_samples(samples, params, closed, period, dim):
    if samples.ndim != 2 or samples.shape[1] != dim:
        raise ValueError(f"samples must have shape (n, {dim})")
    if params.shape != (samples.shape[0],):
        raise ValueError("params must align with samples")
    if np.any(np.diff(params) <= 0):
        raise ValueError("params must be strictly increasing")
    n = samples.shape[0]
    if closed:
        if n < MIN_CLOSED_SAMPLES:
            raise DegenerateCurve(f"closed curves need at least {MIN_CLOSED_SAMPLES} samples")
        if period is None or not period > 0:
            raise ValueError("closed curves need a positive period")
        if params[-1] - params[0] >= period:
            raise ValueError("params of a closed curve must span less than one period")
    elif n < 2:
        raise DegenerateCurve("open curves need at least 2 samples")
    gaps = samples[1:] - samples[:-1]
    if closed:
        gaps = np.vstack([gaps, samples[0] - samples[-1]])
    if np.min(np.linalg.norm(gaps, axis=1)) == 0.0:
        raise DegenerateCurve("consecutive samples coincide")


@dataclass(frozen=True)
class SampledCurve3:
    """A space curve as (n, 3) samples at strictly increasing parameters.

    `analytic` plus `native_params` back the samples with exact derivatives:
    when `native_params` is None the stored parameter *is* the native one;
    otherwise the stored parameter is arc length and `native_params[i]` is the
    native parameter of sample i.  `derivs`, when present, holds
    (d1, d2, d3) arrays taken with respect to the stored parameter.
    """

    samples: np.ndarray
    params: np.ndarray
    closed: bool
    period: Optional[float] = None
    analytic: Optional[AnalyticCurve] = None
    native_params: Optional[np.ndarray] = None
    derivs: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "samples", _freeze(self.samples))
        object.__setattr__(self, "params", _freeze(self.params))
        if self.native_params is not None:
            object.__setattr__(self, "native_params", _freeze(self.native_params))
        if self.derivs is not None:
            object.__setattr__(self, "derivs", tuple(_freeze(d) for d in self.derivs))
        _validate_samples(self.samples, self.params, self.closed, self.period, 3)

    @property
    def n(self):
        return self.samples.shape[0]

    def scale(self):
        return max(bbox_diameter(self.samples), 1e-300)


@dataclass(frozen=True)
class PlaneCurve:
    """A plane curve, used as the profile carried along a plane family.

    `symmetry_order`, when declared, asserts that rotating the curve by
    2*pi/symmetry_order about the plane origin maps it onto itself (possibly
    reversing the traversal direction); this is validated on construction.
    """

    samples: np.ndarray
    params: np.ndarray
    closed: bool
    period: Optional[float] = None
    symmetry_order: Optional[int] = None
    analytic: Optional[AnalyticCurve] = None
    native_params: Optional[np.ndarray] = None
    derivs: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "samples", _freeze(self.samples))
        object.__setattr__(self, "params", _freeze(self.params))
        if self.native_params is not None:
            object.__setattr__(self, "native_params", _freeze(self.native_params))
        if self.derivs is not None:
            object.__setattr__(self, "derivs", tuple(_freeze(d) for d in self.derivs))
        _validate_samples(self.samples, self.params, self.closed, self.period, 2)
        if self.symmetry_order is not None:
            if self.symmetry_order < 2:
                raise ValueError("symmetry_order must be at least 2")
            res = symmetry_residual(self, 2.0 * np.pi / self.symmetry_order)
            tol = 1e-6 * max(self.scale(), 1e-300)
            if min(res["preserving"], res["reversing"]) > tol:
                raise ValueError(
                    f"declared symmetry_order {self.symmetry_order} not satisfied "
                    f"(residual {min(res['preserving'], res['reversing']):.3e})"
                )

    @property
    def n(self):
        return self.samples.shape[0]

    def scale(self):
        return max(bbox_diameter(self.samples), 1e-300)


@dataclass(frozen=True)
class FrenetData:
    """Per-sample Frenet fields of a space curve."""

    tangent: np.ndarray
    normal: np.ndarray
    binormal: np.ndarray
    curvature: np.ndarray
    torsion: np.ndarray

    def __post_init__(self):
        for name in ("tangent", "normal", "binormal", "curvature", "torsion"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))


def curve_derivatives(curve):
    """First three derivative arrays of a curve, one row per sample.

    For analytic curves the derivatives are taken in the native parameter,
    which is fine for every Frenet quantity (they are parameterization
    invariant); the paired speeds used for arc-length integrals are returned
    separately by `parameter_speed`.
    """
    if curve.analytic is not None:
        t = curve.native_params if curve.native_params is not None else curve.params
        return curve.analytic.d1(t), curve.analytic.d2(t), curve.analytic.d3(t)
    if curve.derivs is not None:
        return curve.derivs
    if not is_uniform(curve.params):
        raise ValueError(
            "finite differences need a uniform parameter grid; "
            "call reparameterize_arclength first"
        )
    h = (curve.params[-1] - curve.params[0]) / (curve.n - 1)
    if curve.closed:
        return fd_derivatives_periodic(curve.samples, h)
    return fd_derivatives_open(curve.samples, h)


def parameter_speed(curve, d1=None):
    """|dr/dparam| per sample, in the *stored* parameter of the curve."""
    if curve.analytic is not None and curve.native_params is not None:
        # Stored parameter is arc length by construction.
        return np.ones(curve.n)
    if d1 is None:
        d1 = curve_derivatives(curve)[0]
    return np.linalg.norm(d1, axis=1)


def frenet_data(curve, kappa_tol=1e-8):
    """Frenet frame, curvature and torsion at every sample.

    Raises InflectionPoint where the dimensionless curvature
    kappa * bbox_diameter falls below `kappa_tol`.  The binormal keeps a
    continuous sign along the curve.
    """
    d1, d2, d3 = curve_derivatives(curve)
    speed = np.linalg.norm(d1, axis=1)
    if np.min(speed) == 0.0:
        raise DegenerateCurve("zero velocity sample")
    tangent = d1 / speed[:, None]
    c12 = np.cross(d1, d2)
    nc = np.linalg.norm(c12, axis=1)
    curvature = nc / speed**3
    diam = curve.scale()
    small = curvature * diam <= kappa_tol
    if np.any(small):
        raise InflectionPoint(int(np.argmax(small)))
    binormal = c12 / nc[:, None]
    # Keep the binormal continuous sample to sample; joint sign flips of
    # (n, b) leave the determinant torsion unchanged.
    dots = np.einsum("ij,ij->i", binormal[1:], binormal[:-1])
    signs = np.concatenate([[1.0], np.cumprod(np.sign(dots))])
    binormal = binormal * signs[:, None]
    normal = np.cross(binormal, tangent)
    torsion = np.einsum("ij,ij->i", c12, d3) / nc**2
    return FrenetData(tangent, normal, binormal, curvature, torsion)


def _closed_or_raise(curve, what):
    if not curve.closed:
        raise OpenCurve(f"{what} requires a closed curve")


def _torsion_integral(curve, absolute, kappa_tol):
    _closed_or_raise(curve, "total torsion")
    if (
        curve.analytic is None
        and curve.derivs is None
        and not is_uniform(curve.params)
    ):
        curve = reparameterize_arclength(curve, max(1024, 4 * curve.n))
    fr = frenet_data(curve, kappa_tol=kappa_tol)
    if float(np.dot(fr.binormal[-1], fr.binormal[0])) <= 0.0:
        raise NonPeriodicBinormal("binormal returns negated around the loop")
    if not is_uniform(curve.params):
        raise ValueError("closed-curve quadrature needs a uniform parameter grid")
    speed = parameter_speed(curve)
    tau = np.abs(fr.torsion) if absolute else fr.torsion
    # Trapezoid rule on one full period; the grid omits the duplicate endpoint,
    # so this is the periodic trapezoid rule.
    return periodic_trapezoid(tau * speed, curve.period)


def total_torsion(curve, kappa_tol=1e-8):
    """Integral of the torsion with respect to arc length over one period."""
    return _torsion_integral(curve, absolute=False, kappa_tol=kappa_tol)


def binormal_trace_length(curve, kappa_tol=1e-8):
    """Spherical length of the binormal image, i.e. the integral of |tau| ds."""
    return _torsion_integral(curve, absolute=True, kappa_tol=kappa_tol)


def _position_spline(curve):
    if curve.closed:
        t = np.append(curve.params, curve.params[0] + curve.period)
        y = np.vstack([curve.samples, curve.samples[:1]])
        return CubicSpline(t, y, bc_type="periodic")
    return CubicSpline(curve.params, curve.samples)


def interp_values(curve, t):
    """Positions at arbitrary parameters via the analytic backing or a spline."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if curve.analytic is not None and curve.native_params is None:
        return curve.analytic.point(t)
    if curve.closed:
        t0 = curve.params[0]
        t = t0 + np.remainder(t - t0, curve.period)
    return _position_spline(curve)(t)


def _arclength_chain_rule(d1, d2, d3):
    """Rewrite native-parameter derivatives to the arc-length parameter."""
    sig = np.linalg.norm(d1, axis=1)
    sig1 = np.einsum("ij,ij->i", d1, d2) / sig
    sig2 = (np.einsum("ij,ij->i", d2, d2)
            + np.einsum("ij,ij->i", d1, d3) - sig1**2) / sig
    s, s1, s2 = sig[:, None], sig1[:, None], sig2[:, None]
    r1 = d1 / s
    r2 = d2 / s**2 - d1 * s1 / s**3
    r3 = d3 / s**3 - 3.0 * d2 * s1 / s**4 + d1 * (3.0 * s1**2 - s * s2) / s**5
    return r1, r2, r3


def reparameterize_arclength(curve, n_out):
    """Resample a curve uniformly in arc length.

    Arc length accumulates from a chord-corrected model of the curve: the
    exact speed for analytic curves, the trigonometric interpolant for closed
    uniform curves carrying derivative arrays, the speed of an interpolating
    cubic spline otherwise, integrated with per-interval Gauss quadrature.
    Closed outputs keep n_out samples over one period (no duplicate
    endpoint); open outputs include both endpoints.  Derivative arrays are
    carried through by interpolation and the chain rule, so the output speed
    is exactly one wherever they exist.
    """
    if curve.closed and n_out < MIN_CLOSED_SAMPLES:
        raise ValueError("n_out too small for a closed curve")
    spectral = (curve.analytic is None and curve.derivs is not None
                and curve.closed and is_uniform(curve.params))
    if curve.analytic is not None:
        base = curve.native_params if curve.native_params is not None else curve.params
        speed = lambda t: np.linalg.norm(curve.analytic.d1(t), axis=-1)
        point = curve.analytic.point
        t0 = base[0]
        t_end = t0 + curve.period if curve.closed else base[-1]
    elif spectral:
        t0 = curve.params[0]
        t_end = t0 + curve.period
        d1_of = lambda t: numerics.spectral_interpolate(
            curve.derivs[0], curve.period, t, t0)
        speed = lambda t: np.linalg.norm(d1_of(t), axis=-1)
        point = lambda t: numerics.spectral_interpolate(
            curve.samples, curve.period, t, t0)
    else:
        spline = _position_spline(curve)
        dspline = spline.derivative()
        speed = lambda t: np.linalg.norm(dspline(t), axis=-1)
        point = spline
        t0 = curve.params[0]
        t_end = t0 + curve.period if curve.closed else curve.params[-1]

    n_dense = max(4096, 8 * curve.n, 4 * n_out)
    t_dense = np.linspace(t0, t_end, n_dense + 1)
    arc = cumulative_gauss(speed, t_dense)
    length = float(arc[-1])

    if curve.closed:
        s_targets = np.arange(n_out) * (length / n_out)
    else:
        s_targets = np.linspace(0.0, length, n_out)
    t_new = np.interp(s_targets, arc, t_dense)
    arc_spline = CubicSpline(t_dense, arc)
    for _ in range(3):  # Newton polish of the inverse arc-length map
        resid = arc_spline(t_new) - s_targets
        t_new = t_new - resid / speed(t_new)
        t_new = np.clip(t_new, t0, t_end)
    if curve.closed:
        t_new[0] = t0

    samples = point(t_new)
    analytic = curve.analytic
    native = t_new if analytic is not None else None
    derivs = None
    if spectral:
        derivs = _arclength_chain_rule(
            d1_of(t_new),
            numerics.spectral_interpolate(curve.derivs[1], curve.period, t_new, t0),
            numerics.spectral_interpolate(curve.derivs[2], curve.period, t_new, t0),
        )
    kwargs = {}
    if isinstance(curve, PlaneCurve):
        cls = PlaneCurve
        kwargs["symmetry_order"] = curve.symmetry_order
    else:
        cls = SampledCurve3
    return cls(
        samples=samples,
        params=s_targets,
        closed=curve.closed,
        period=length if curve.closed else None,
        analytic=analytic,
        native_params=native,
        derivs=derivs,
        **kwargs,
    )


def transform(curve, rotation=None, translation=None):
    """Apply a rigid motion, carrying any derivative backing along."""
    r = np.eye(3 if isinstance(curve, SampledCurve3) else 2) if rotation is None else np.asarray(rotation, dtype=float)
    dim = r.shape[0]
    tvec = np.zeros(dim) if translation is None else np.asarray(translation, dtype=float)
    samples = curve.samples @ r.T + tvec
    analytic = None
    if curve.analytic is not None:
        a = curve.analytic
        analytic = AnalyticCurve(
            point=lambda t, a=a: a.point(t) @ r.T + tvec,
            d1=lambda t, a=a: a.d1(t) @ r.T,
            d2=lambda t, a=a: a.d2(t) @ r.T,
            d3=lambda t, a=a: a.d3(t) @ r.T,
            dim=a.dim,
        )
    kwargs = dict(
        samples=samples,
        params=curve.params,
        closed=curve.closed,
        period=curve.period,
        analytic=analytic,
        native_params=curve.native_params,
    )
    if isinstance(curve, PlaneCurve):
        return PlaneCurve(symmetry_order=curve.symmetry_order, **kwargs)
    derivs = None
    if curve.derivs is not None:
        derivs = tuple(d @ r.T for d in curve.derivs)
    return SampledCurve3(derivs=derivs, **kwargs)


def _rot2(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def _shift_residual(rotated, profile, shift, spline, t0, period):
    t = profile.params + shift
    t = t0 + np.remainder(t - t0, period)
    return float(np.max(np.linalg.norm(rotated - spline(t), axis=1)))


def symmetry_residual(profile, angle):
    """How close the profile is to being invariant under a rotation.

    Returns a dict with the best sup-distance residuals for an
    orientation-preserving match (gamma(u + shift) = R gamma(u)) and an
    orientation-reversing one (gamma(shift - u) = R gamma(u)), together with
    the shifts that achieve them.  Open curves only admit the reversing match
    when the rotation is by pi.
    """
    if not profile.closed:
        rot = profile.samples @ _rot2(angle).T
        rev = profile.samples[::-1]
        residual_rev = float(np.max(np.linalg.norm(rot - rev, axis=1)))
        return {
            "preserving": np.inf,
            "reversing": residual_rev,
            "shift_preserving": None,
            "shift_reversing": 0.0,
        }
    if not is_uniform(profile.params):
        profile = reparameterize_arclength(profile, max(512, profile.n))
    rot = profile.samples @ _rot2(angle).T
    period = profile.period
    t0 = profile.params[0]
    spline = _position_spline(profile)
    n = profile.n

    def best_shift(target):
        # Coarse scan over sample shifts, then golden-section refinement.
        dists = np.empty(n)
        for k in range(n):
            dists[k] = np.max(np.linalg.norm(target - np.roll(profile.samples, -k, axis=0), axis=1))
        k0 = int(np.argmin(dists))
        lo = profile.params[(k0 - 1) % n] - profile.params[0]
        hi = profile.params[(k0 + 1) % n] - profile.params[0]
        if hi <= lo:
            hi += period
        f = lambda s: _shift_residual(target, profile, s, spline, t0, period)
        gr = 0.5 * (np.sqrt(5.0) - 1.0)
        a, b = lo, hi
        c = b - gr * (b - a)
        d = a + gr * (b - a)
        fc, fd = f(c), f(d)
        for _ in range(60):
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - gr * (b - a)
                fc = f(c)
            else:
                a, c, fc = c, d, fd
                d = a + gr * (b - a)
                fd = f(d)
        s_best = 0.5 * (a + b)
        return f(s_best), s_best

    res_pres, shift_pres = best_shift(rot)
    # Reversing match: gamma(shift - u) = R gamma(u).  Coarse scan against the
    # reversed sample order, then golden-section refinement on the spline.
    rev_samples = profile.samples[::-1]
    dists = np.empty(n)
    for k in range(n):
        dists[k] = np.max(np.linalg.norm(rot - np.roll(rev_samples, -k, axis=0), axis=1))
    k0 = int(np.argmin(dists))
    u = profile.params
    h = period / n

    def f_rev(shift):
        t = t0 + np.remainder(shift - u - t0, period)
        return float(np.max(np.linalg.norm(rot - spline(t), axis=1)))

    s_guess = 2.0 * t0 + ((n - 1 - k0) % n) * h
    gr = 0.5 * (np.sqrt(5.0) - 1.0)
    a, b = s_guess - 3 * h, s_guess + 3 * h
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, fd = f_rev(c), f_rev(d)
    for _ in range(60):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = f_rev(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = f_rev(d)
    res_rev = f_rev(0.5 * (a + b))
    return {
        "preserving": res_pres,
        "reversing": res_rev,
        "shift_preserving": shift_pres,
        "shift_reversing": 0.5 * (a + b),
    }
