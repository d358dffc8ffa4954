"""Built-in analytic curve families and profile curves.

Space-curve factories return SampledCurve3 objects backed by exact derivative
callables (generated symbolically once per construction), so Frenet data and
torsion integrals computed from them carry no finite-difference error.
Profile factories return arc-length parameterized PlaneCurve objects.
"""

import numpy as np

from .curve import (
    AnalyticCurve,
    PlaneCurve,
    SampledCurve3,
    reparameterize_arclength,
)
from .numerics import TWO_PI, unit


def _vectorized(fn, dim):
    def wrapped(t):
        t = np.asarray(t, dtype=float)
        comps = fn(t)
        comps = [np.broadcast_to(np.asarray(c, dtype=float), t.shape) for c in comps]
        return np.stack(comps, axis=-1)

    return wrapped


def analytic_from_sympy(exprs, t_symbol):
    """Build an AnalyticCurve from sympy component expressions."""
    import sympy as sp

    dim = len(exprs)
    fns = []
    current = list(exprs)
    for _ in range(4):
        lam = sp.lambdify(t_symbol, current, modules="numpy", cse=True)
        fns.append(_vectorized(lam, dim))
        current = [sp.diff(e, t_symbol) for e in current]
    return AnalyticCurve(point=fns[0], d1=fns[1], d2=fns[2], d3=fns[3], dim=dim)


def _closed_from_analytic(analytic, period, n):
    t = np.arange(n) * (period / n)
    return SampledCurve3(
        samples=analytic.point(t),
        params=t,
        closed=True,
        period=period,
        analytic=analytic,
    )


def circle3(radius=1.0, center=(0.0, 0.0, 0.0), n=256):
    """Circle in the xy-plane, parameterized by arc length."""
    c = np.asarray(center, dtype=float)
    r = float(radius)

    def p(s):
        s = np.asarray(s, dtype=float)
        a = s / r
        return c + r * np.stack([np.cos(a), np.sin(a), np.zeros_like(a)], axis=-1)

    def d(s, k):
        s = np.asarray(s, dtype=float)
        a = s / r + k * (np.pi / 2.0)
        return r ** (1 - k) * np.stack([np.cos(a), np.sin(a), np.zeros_like(a)], axis=-1)

    analytic = AnalyticCurve(
        point=p,
        d1=lambda s: d(s, 1),
        d2=lambda s: d(s, 2),
        d3=lambda s: d(s, 3),
    )
    return _closed_from_analytic(analytic, TWO_PI * r, n)


def helix(a=1.0, c=1.0, turns=1.0, n=257):
    """Circular helix (a cos t, a sin t, c t) over `turns` full turns (open)."""
    import sympy as sp

    t = sp.Symbol("t", real=True)
    analytic = analytic_from_sympy([a * sp.cos(t), a * sp.sin(t), c * t], t)
    params = np.linspace(0.0, TWO_PI * turns, n)
    return SampledCurve3(
        samples=analytic.point(params),
        params=params,
        closed=False,
        analytic=analytic,
    )


def torus_knot(p=2, q=3, R=2.0, r=0.5, n=512):
    """(p, q) torus knot on the torus with radii (R, r)."""
    import sympy as sp

    t = sp.Symbol("t", real=True)
    w = R + r * sp.cos(q * t)
    exprs = [w * sp.cos(p * t), w * sp.sin(p * t), r * sp.sin(q * t)]
    return _closed_from_analytic(analytic_from_sympy(exprs, t), TWO_PI, n)


def ellipse3(a=2.0, b=1.0, n=256):
    """Ellipse in the xy-plane as a space curve (native angle parameter)."""
    import sympy as sp

    t = sp.Symbol("t", real=True)
    exprs = [a * sp.cos(t), b * sp.sin(t), sp.Integer(0)]
    return _closed_from_analytic(analytic_from_sympy(exprs, t), TWO_PI, n)


def _normalized_sympy_curve(w_exprs, t_symbol, period, n):
    import sympy as sp

    norm = sp.sqrt(sum(e**2 for e in w_exprs))
    exprs = [e / norm for e in w_exprs]
    return _closed_from_analytic(analytic_from_sympy(exprs, t_symbol), period, n)


def sphere_curve(cos_coeffs, sin_coeffs, n=512):
    """Closed unit-sphere curve: normalize a vector trigonometric polynomial.

    `cos_coeffs` and `sin_coeffs` are (H+1, 3) and (H, 3) arrays: component j
    of the raw curve is sum_k cos_coeffs[k, j] cos(k t) + sin_coeffs[k-1, j]
    sin(k t).
    """
    import sympy as sp

    cos_coeffs = np.asarray(cos_coeffs, dtype=float)
    sin_coeffs = np.asarray(sin_coeffs, dtype=float)
    t = sp.Symbol("t", real=True)
    w = []
    for j in range(3):
        e = sp.Float(cos_coeffs[0, j])
        for k in range(1, cos_coeffs.shape[0]):
            e += sp.Float(cos_coeffs[k, j]) * sp.cos(k * t)
        for k in range(1, sin_coeffs.shape[0] + 1):
            e += sp.Float(sin_coeffs[k - 1, j]) * sp.sin(k * t)
        w.append(e)
    # Reject coefficient sets whose raw curve passes too close to the origin.
    tt = np.arange(2048) * (TWO_PI / 2048)
    raw = np.zeros((2048, 3))
    for j in range(3):
        raw[:, j] = cos_coeffs[0, j]
        for k in range(1, cos_coeffs.shape[0]):
            raw[:, j] += cos_coeffs[k, j] * np.cos(k * tt)
        for k in range(1, sin_coeffs.shape[0] + 1):
            raw[:, j] += sin_coeffs[k - 1, j] * np.sin(k * tt)
    mags = np.linalg.norm(raw, axis=1)
    if mags.min() < 0.15 * mags.max():
        raise ValueError("raw curve passes too close to the origin to normalize")
    return _normalized_sympy_curve(w, t, TWO_PI, n)


def random_sphere_curve(seed, harmonics=3, n=512):
    """Random smooth closed curve on the unit sphere (seeded)."""
    rng = np.random.default_rng(seed)
    for _ in range(64):
        cos_coeffs = np.zeros((harmonics + 1, 3))
        sin_coeffs = np.zeros((harmonics, 3))
        cos_coeffs[0] = rng.normal(size=3)
        cos_coeffs[0] *= 1.5 / max(np.linalg.norm(cos_coeffs[0]), 1e-9)
        for k in range(1, harmonics + 1):
            cos_coeffs[k] = rng.normal(size=3) / k**2
            sin_coeffs[k - 1] = rng.normal(size=3) / k**2
        try:
            return sphere_curve(cos_coeffs, sin_coeffs, n=n)
        except ValueError:
            continue
    raise RuntimeError("could not draw a usable sphere curve")


def sphere_figure_eight(a=0.9, b=0.5, n=512):
    """Figure-eight shaped closed curve on the unit sphere."""
    import sympy as sp

    t = sp.Symbol("t", real=True)
    w = [sp.Integer(1), a * sp.sin(t), b * sp.sin(t) * sp.cos(t)]
    return _normalized_sympy_curve(w, t, TWO_PI, n)


def torus_knot_binormal(p=2, q=3, R=2.0, r=0.5, n=2048):
    """Binormal image of a torus knot: a closed unit-sphere curve.

    Sampled exactly from the knot's derivatives on a uniform grid; spherical
    where the knot's torsion is positive this is the binormal of a closed
    curve, which makes it a convenient feasible input for spine synthesis.
    """
    knot = torus_knot(p, q, R, r, n=max(n, 8))
    t = np.arange(n) * (TWO_PI / n)
    d1 = knot.analytic.d1(t)
    d2 = knot.analytic.d2(t)
    b = unit(np.cross(d1, d2))
    return SampledCurve3(samples=b, params=t, closed=True, period=TWO_PI)


def loop_stroke_binormal(scale, n=512, loops=6, loop_radius=0.22, stroke=1.0):
    """Closed unit-sphere curve tracing small loops along a back-and-forth
    stroke, radially projected from the plane tangent at a pole.

    The stroke carrier contributes no net swept angle about the pole, so the
    conormal field b x b' changes sign in its polar component; together with
    the everywhere-positive geodesic curvature this makes the curve usable as
    the binormal of a closed space curve, with low-order trigonometric
    closing weights.  `scale` controls the spherical extent and hence the
    curve length, monotonically over roughly (0, 1.5].
    """
    s = float(scale)
    if not 0.0 < s <= 1.5:
        raise ValueError("scale must lie in (0, 1.5]")
    t = np.arange(n) * (TWO_PI / n)
    w = np.stack([
        s * (loop_radius * np.cos(loops * t) + stroke * np.cos(t)),
        s * loop_radius * np.sin(loops * t),
        np.ones(n),
    ], axis=-1)
    return SampledCurve3(samples=unit(w), params=t, closed=True, period=TWO_PI)


def latitude_oscillation_binormal(scale, n=512, harmonic=2, wobble=0.5,
                                  retrograde=1.8):
    """Closed unit-sphere curve whose polar distance and azimuth are each a
    single trigonometric harmonic.

    The polar distance is scale * (1 + wobble * cos(harmonic * t)) and the
    azimuth runs t - (retrograde / harmonic) * sin(harmonic * t), so with
    retrograde > 1 the azimuth backtracks exactly where the curve is farthest
    from the pole.  There the conormal's polar component carries its largest
    weight, so the sign flip it picks up during the backtrack makes the curve
    a feasible binormal with low-order closing weights.  Because both angles
    are band-limited, the Cartesian components decay at a Bessel-function
    rate: for moderate amplitudes the spectrum is numerically zero beyond a
    few dozen modes, which keeps every field transported along the
    synthesized spine resolvable on coarse grids.  `scale` sets the spherical
    extent and hence the curve length, monotonically while the curve stays
    inside one hemisphere.
    """
    s = float(scale)
    if not 0.0 < s * (1.0 + wobble) < np.pi / 2:
        raise ValueError("scale * (1 + wobble) must lie in (0, pi/2)")
    t = np.arange(n) * (TWO_PI / n)
    beta = s * (1.0 + wobble * np.cos(harmonic * t))
    gamma = t - (retrograde / harmonic) * np.sin(harmonic * t)
    w = np.stack([
        np.sin(beta) * np.cos(gamma),
        np.sin(beta) * np.sin(gamma),
        np.cos(beta),
    ], axis=-1)
    return SampledCurve3(samples=w, params=t, closed=True, period=TWO_PI)


# ---------------------------------------------------------------------------
# Profile curves (plane curves carried along a family of planes)


def circle_profile(radius=0.5, center=(0.0, 0.0), n=256):
    """Circle profile, arc-length parameterized exactly."""
    c = np.asarray(center, dtype=float)
    r = float(radius)

    def p(s):
        s = np.asarray(s, dtype=float)
        a = s / r
        return c + r * np.stack([np.cos(a), np.sin(a)], axis=-1)

    def d(s, k):
        s = np.asarray(s, dtype=float)
        a = s / r + k * (np.pi / 2.0)
        return r ** (1 - k) * np.stack([np.cos(a), np.sin(a)], axis=-1)

    analytic = AnalyticCurve(
        point=p,
        d1=lambda s: d(s, 1),
        d2=lambda s: d(s, 2),
        d3=lambda s: d(s, 3),
        dim=2,
    )
    s = np.arange(n) * (TWO_PI * r / n)
    return PlaneCurve(
        samples=p(s),
        params=s,
        closed=True,
        period=TWO_PI * r,
        analytic=analytic,
    )


def _profile_from_sympy(exprs, t_symbol, period, n, symmetry_order=None):
    analytic = analytic_from_sympy(exprs, t_symbol)
    t = np.arange(max(4 * n, 512)) * (period / max(4 * n, 512))
    raw = PlaneCurve(
        samples=analytic.point(t),
        params=t,
        closed=True,
        period=period,
        analytic=analytic,
    )
    uniform = reparameterize_arclength(raw, n)
    return PlaneCurve(
        samples=uniform.samples,
        params=uniform.params,
        closed=True,
        period=uniform.period,
        symmetry_order=symmetry_order,
        analytic=uniform.analytic,
        native_params=uniform.native_params,
    )


def ellipse_profile(a=0.5, b=0.3, n=256):
    """Origin-centered ellipse, 2-fold rotationally symmetric."""
    import sympy as sp

    t = sp.Symbol("t", real=True)
    return _profile_from_sympy(
        [a * sp.cos(t), b * sp.sin(t)], t, TWO_PI, n, symmetry_order=2
    )


def flower_profile(order, mean_radius=0.5, amplitude=0.1, n=256):
    """Closed profile r(theta) = R (1 + eps cos(order theta)) with n-fold symmetry."""
    import sympy as sp

    if n % order != 0:
        n = order * int(np.ceil(n / order))
    t = sp.Symbol("t", real=True)
    rad = mean_radius * (1 + (amplitude / mean_radius) * sp.cos(order * t))
    return _profile_from_sympy(
        [rad * sp.cos(t), rad * sp.sin(t)], t, TWO_PI, n, symmetry_order=order
    )


def figure_eight_profile(a=0.35, b=0.5, n=256):
    """Figure-eight profile through the origin; rotation by pi reverses it."""
    import sympy as sp

    t = sp.Symbol("t", real=True)
    return _profile_from_sympy(
        [a * sp.sin(2 * t), b * sp.sin(t)], t, TWO_PI, n, symmetry_order=2
    )


def segment_profile(half_width=0.5, angle=0.0, n=65):
    """Straight open segment through the origin (direction `angle`)."""
    u = np.linspace(-half_width, half_width, n)
    direction = np.array([np.cos(angle), np.sin(angle)])
    samples = u[:, None] * direction[None, :]
    return PlaneCurve(
        samples=samples,
        params=u,
        closed=False,
        symmetry_order=2,
    )
