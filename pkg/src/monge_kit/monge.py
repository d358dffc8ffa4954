"""Generalized Monge surfaces: a profile curve swept along a plane family.

The surface is x(u, v) = p(v) + x(u) q1(v) + y(u) q2(v) for a plane profile
gamma(u) = (x(u), y(u)) carried by an orthogonal family of planes.  The sweep
direction contributes x_v = (lambda + kappa1 x + kappa2 y) t, so the margin
field lambda + kappa1 x + kappa2 y controls regularity: the surface is
singular exactly where the profile crosses the instantaneous rotation axis.

The module computes the fundamental forms and curvature on sample grids,
verifies the planar-geodesic foliation by the meridians, classifies how the
sweep closes globally (torus, covering, Moebius strip, Klein bottle, tubular
torus), and emits quad meshes whose seams are glued by the exact symmetry of
the profile.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .curve import interp_values, parameter_speed, symmetry_residual, total_torsion
from .errors import GeometryError, OutOfDomain, SeamMismatch, SingularPoint
from .frames import rational_turns
from .mesh import QuadMesh
from .numerics import (
    fd_derivatives_open,
    fd_derivatives_periodic,
    orthonormalize_frame,
    spectral_derivatives,
    spectral_resample,
    wrap_angle,
)
from .plane_family import PlaneFamily, from_spine

TWO_PI = 2.0 * np.pi
MARGIN_RTOL = 1e-8
UNIT_SPEED_TOL = 1e-6

GLUED_KINDS = frozenset({
    "monge_torus", "cylinder", "covered_torus",
    "moebius_strip", "klein_bottle", "tubular_torus",
})


@dataclass(frozen=True)
class MongeSurface:
    """A plane family plus an arc-length profile curve in plane coordinates."""

    family: PlaneFamily
    profile: object

    def __post_init__(self):
        if self.profile.samples.shape[1] != 2:
            raise ValueError("profile must be a plane curve")
        speed = parameter_speed(self.profile)
        if np.abs(speed - 1.0).max() > UNIT_SPEED_TOL:
            raise ValueError("profile must be arc-length parameterized")

    @property
    def u_closed(self):
        return self.profile.closed

    @property
    def v_periodic(self):
        return self.family.period is not None


# ---------------------------------------------------------------------------
# Grid sampling


def _thread_count():
    raw = os.environ.get("MONGE_KIT_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _fill_rows(points, xy, p, q1, q2, lo, hi):
    for i in range(lo, hi):
        points[i] = p + xy[i, 0] * q1 + xy[i, 1] * q2


def _assemble_points(xy, p, q1, q2):
    nu = xy.shape[0]
    points = np.empty((nu, p.shape[0], 3))
    workers = _thread_count()
    if workers == 1 or nu < 2 * workers:
        _fill_rows(points, xy, p, q1, q2, 0, nu)
        return points
    bounds = np.linspace(0, nu, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        jobs = [pool.submit(_fill_rows, points, xy, p, q1, q2, lo, hi)
                for lo, hi in zip(bounds[:-1], bounds[1:])]
        for job in jobs:
            job.result()
    return points


def _u_grid(profile, nu):
    if profile.closed:
        return profile.params[0] + np.arange(nu) * (profile.period / nu)
    return np.linspace(profile.params[0], profile.params[-1], nu)


def _v_grid(family, nv):
    v0 = family.params[0]
    if family.period is not None:
        return v0 + np.arange(nv) * (family.period / nv)
    return np.linspace(v0, family.params[-1], nv)


def _profile_on_grid(profile, nu):
    if nu == profile.n:
        return np.array(profile.samples)
    if profile.closed:
        return spectral_resample(profile.samples, nu)
    return CubicSpline(profile.params, profile.samples)(_u_grid(profile, nu))


def _family_on_grid(family, nv):
    """The family resampled to nv plane samples.

    Fully periodic families resample spectrally; base-periodic families whose
    frame returns rotated by the holonomy are untwisted by the matching
    spiral first, so the in-plane fields resample spectrally as well.
    """
    if nv == family.n:
        return family
    if family.period is None:
        grid = _v_grid(family, nv)
        fields = {name: CubicSpline(family.params, getattr(family, name))(grid)
                  for name in ("p", "t", "q1", "q2", "kappa1", "kappa2", "lam")}
        frames = _orthonormalized(fields["t"], fields["q1"], fields["q2"])
        return PlaneFamily(params=grid, p=fields["p"], t=frames[0],
                           q1=frames[1], q2=frames[2], kappa1=fields["kappa1"],
                           kappa2=fields["kappa2"], lam=fields["lam"],
                           closed=False, validate=False)
    if family.closed:
        fields = {name: spectral_resample(getattr(family, name), nv)
                  for name in ("p", "t", "q1", "q2", "kappa1", "kappa2", "lam")}
        frames = _orthonormalized(fields["t"], fields["q1"], fields["q2"])
        return PlaneFamily(params=_v_grid(family, nv), p=fields["p"],
                           t=frames[0], q1=frames[1], q2=frames[2],
                           kappa1=fields["kappa1"], kappa2=fields["kappa2"],
                           lam=fields["lam"], closed=True, period=family.period,
                           holonomy_angle=family.holonomy_angle,
                           spine=family.spine, validate=False)
    if family.holonomy_angle is not None:
        # (q1 + i q2) and (kappa1 + i kappa2) both return multiplied by
        # exp(-i theta) after one period; the inverse spiral makes them
        # periodic, hence spectrally resamplable.
        theta = family.holonomy_angle
        grid = _v_grid(family, nv)
        rate = theta / family.period
        spiral_old = np.exp(1j * rate * (family.params - family.params[0]))
        spiral_new = np.exp(-1j * rate * (grid - family.params[0]))
        resample_c = lambda z: (spectral_resample(z.real, nv)
                                + 1j * spectral_resample(z.imag, nv))
        w = resample_c(spiral_old[:, None] * (family.q1 + 1j * family.q2))
        w = spiral_new[:, None] * w
        kap = resample_c(spiral_old * (family.kappa1 + 1j * family.kappa2))
        kap = spiral_new * kap
        frames = _orthonormalized(spectral_resample(family.t, nv), w.real, w.imag)
        return PlaneFamily(params=grid, p=spectral_resample(family.p, nv),
                           t=frames[0], q1=frames[1], q2=frames[2],
                           kappa1=kap.real, kappa2=kap.imag,
                           lam=spectral_resample(family.lam, nv),
                           closed=False, period=family.period,
                           holonomy_angle=theta, spine=family.spine,
                           validate=False)
    if family.spine is not None:
        return from_spine(family.spine, q1_initial=family.q1[0], n=nv)
    raise ValueError(
        "cannot resample a non-periodic frame family without its spine; "
        "pass a grid size matching the stored family")


def _orthonormalized(t, q1, q2):
    out_t = np.empty_like(t)
    out_q1 = np.empty_like(q1)
    out_q2 = np.empty_like(q2)
    for i in range(t.shape[0]):
        m = orthonormalize_frame(np.stack([q1[i], q2[i], t[i]], axis=-1))
        out_q1[i], out_q2[i], out_t[i] = m[:, 0], m[:, 1], m[:, 2]
    return out_t, out_q1, out_q2


@dataclass(frozen=True)
class SurfaceGrid:
    """Surface samples plus the per-axis fields they were built from."""

    u: np.ndarray
    v: np.ndarray
    points: np.ndarray
    profile_xy: np.ndarray
    p: np.ndarray
    t: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    lam: np.ndarray
    u_closed: bool
    v_base_periodic: bool
    v_frame_periodic: bool
    u_period: Optional[float]
    v_period: Optional[float]

    @property
    def margin(self):
        x = self.profile_xy[:, 0][:, None]
        y = self.profile_xy[:, 1][:, None]
        return self.lam[None, :] + self.kappa1[None, :] * x + self.kappa2[None, :] * y


def sample_grid(surface, nu, nv):
    """Evaluate the sweep on a nu x nv grid (rows may fill in parallel)."""
    profile = surface.profile
    fam = _family_on_grid(surface.family, nv)
    xy = _profile_on_grid(profile, nu)
    points = _assemble_points(xy, fam.p, fam.q1, fam.q2)
    return SurfaceGrid(
        u=_u_grid(profile, nu), v=_v_grid(fam, nv), points=points,
        profile_xy=xy, p=fam.p, t=fam.t, q1=fam.q1, q2=fam.q2,
        kappa1=fam.kappa1, kappa2=fam.kappa2, lam=fam.lam,
        u_closed=profile.closed, v_base_periodic=fam.period is not None,
        v_frame_periodic=fam.closed,
        u_period=profile.period, v_period=fam.period)


# ---------------------------------------------------------------------------
# Point evaluation


def _family_splines(family):
    grid = family.params
    fields = [family.p, family.q1, family.q2]
    if family.period is not None:
        theta = family.holonomy_angle or 0.0
        ca, sa = np.cos(theta), np.sin(theta)
        wraps = [family.p[0],
                 ca * family.q1[0] + sa * family.q2[0],
                 ca * family.q2[0] - sa * family.q1[0]]
        grid = np.append(grid, grid[0] + family.period)
        fields = [np.vstack([f, w]) for f, w in zip(fields, wraps)]
    return [CubicSpline(grid, f) for f in fields]


def evaluate(surface, u, v):
    """Surface point x(u, v) = p(v) + x(u) q1(v) + y(u) q2(v)."""
    profile, fam = surface.profile, surface.family
    u, v = float(u), float(v)
    if profile.closed:
        u = profile.params[0] + (u - profile.params[0]) % profile.period
    else:
        span = profile.params[-1] - profile.params[0]
        if not profile.params[0] - 1e-9 * span <= u <= profile.params[-1] + 1e-9 * span:
            raise OutOfDomain(f"u = {u} outside the profile domain")
    if fam.period is not None:
        v = fam.params[0] + (v - fam.params[0]) % fam.period
    else:
        span = fam.params[-1] - fam.params[0]
        if not fam.params[0] - 1e-9 * span <= v <= fam.params[-1] + 1e-9 * span:
            raise OutOfDomain(f"v = {v} outside the family domain")
    xy = interp_values(profile, u)[0]
    p_s, q1_s, q2_s = _family_splines(fam)
    return p_s(v) + xy[0] * q1_s(v) + xy[1] * q2_s(v)


# ---------------------------------------------------------------------------
# Regularity


def _margin_scale(grid):
    coeff = max(np.abs(grid.kappa1).max(), np.abs(grid.kappa2).max())
    prof = float(np.abs(grid.profile_xy).max())
    return max(np.abs(grid.lam).max(), coeff * max(prof, 1e-300), 1e-300)


@dataclass(frozen=True)
class MarginReport:
    u: np.ndarray
    v: np.ndarray
    margin: np.ndarray
    regular: bool
    margin_min: float
    margin_max: float
    tol: float
    zero_set: np.ndarray  # (k, 2) approximate (u, v) roots


def regularity_margin(surface, nu=None, nv=None, tol=None, grid=None):
    """Margin field lambda + kappa1 x + kappa2 y with verdict and zero set."""
    if grid is None:
        nu = surface.profile.n if nu is None else nu
        nv = surface.family.n if nv is None else nv
        grid = sample_grid(surface, nu, nv)
    m = grid.margin
    tol = MARGIN_RTOL * _margin_scale(grid) if tol is None else float(tol)
    zeros = []
    hit = np.argwhere(np.abs(m) <= tol)
    for i, j in hit:
        zeros.append((grid.u[i], grid.v[j]))
    for axis, coords in ((0, grid.u), (1, grid.v)):
        a = m if axis == 0 else m.T
        other = grid.v if axis == 0 else grid.u
        sign_change = (a[:-1] * a[1:] < 0.0) & (np.abs(a[:-1]) > tol) & (np.abs(a[1:]) > tol)
        for i, j in np.argwhere(sign_change):
            frac = a[i, j] / (a[i, j] - a[i + 1, j])
            root = coords[i] + frac * (coords[i + 1] - coords[i])
            pair = (root, other[j]) if axis == 0 else (other[j], root)
            zeros.append(pair)
    zero_set = np.array(sorted(zeros)) if zeros else np.empty((0, 2))
    return MarginReport(
        u=grid.u, v=grid.v, margin=m,
        regular=bool(np.abs(m).min() > tol and zero_set.shape[0] == 0),
        margin_min=float(m.min()), margin_max=float(m.max()),
        tol=tol, zero_set=zero_set)


def _require_regular(grid, allow_singular, tol=None):
    if allow_singular:
        return
    tol = MARGIN_RTOL * _margin_scale(grid) if tol is None else tol
    m = grid.margin
    bad = np.abs(m) <= tol
    # A sign change between neighbouring nodes is a crossing even when no
    # node lands inside the tolerance band; mark the nearer endpoint.
    for axis, periodic in ((0, grid.u_closed), (1, grid.v_frame_periodic)):
        a = np.moveaxis(m, axis, 0)
        b = np.moveaxis(bad, axis, 0)
        change = a * np.roll(a, -1, axis=0) < 0.0
        if not periodic:
            change[-1] = False
        near = np.abs(a) <= np.abs(np.roll(a, -1, axis=0))
        b |= change & near
        b |= np.roll(change & ~near, 1, axis=0)
    if bad.any():
        am = np.where(bad, np.abs(m), np.inf)
        i, j = np.unravel_index(int(np.argmin(am)), am.shape)
        raise SingularPoint(float(grid.u[i]), float(grid.v[j]))


# ---------------------------------------------------------------------------
# Fundamental forms


def _axis_derivatives(values, axis, h, closed, method, orders):
    arr = np.moveaxis(values, axis, 0)
    if method == "spectral":
        if closed:
            out = spectral_derivatives(arr, h * arr.shape[0], orders=orders)
        else:
            out = fd_derivatives_open(arr, h, orders=orders)
    elif method == "fd2":
        out = []
        for order in orders:
            if closed:
                if order == 1:
                    d = (np.roll(arr, -1, axis=0) - np.roll(arr, 1, axis=0)) / (2.0 * h)
                else:
                    d = (np.roll(arr, -1, axis=0) - 2.0 * arr + np.roll(arr, 1, axis=0)) / h**2
            else:
                d = arr
                for _ in range(order):
                    d = np.gradient(d, h, axis=0, edge_order=2)
            out.append(d)
    else:
        raise ValueError(f"unknown derivative method {method!r}")
    return [np.moveaxis(d, 0, axis) for d in out]


def _surface_derivatives(grid, method):
    hu = grid.u[1] - grid.u[0]
    hv = grid.v[1] - grid.v[0]
    x_u, x_uu = _axis_derivatives(grid.points, 0, hu, grid.u_closed, method, (1, 2))
    x_v, x_vv = _axis_derivatives(grid.points, 1, hv, grid.v_frame_periodic, method, (1, 2))
    x_uv = _axis_derivatives(x_u, 1, hv, grid.v_frame_periodic, method, (1,))[0]
    return x_u, x_v, x_uu, x_uv, x_vv


def _dot(a, b):
    return np.einsum("ijk,ijk->ij", a, b)


@dataclass(frozen=True)
class SurfaceDiagnostics:
    """First and second fundamental forms with the regularity fields.

    `alpha` is 1 - margin, the quantity whose square complements the metric
    (G = (1 - alpha)^2); `alpha_printed` is the plain product field
    x kappa1 - y kappa2, recorded for comparison since the two differ by the
    frame-sign convention.
    """

    u: np.ndarray
    v: np.ndarray
    regularity_margin: np.ndarray
    alpha: np.ndarray
    alpha_printed: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    L: np.ndarray
    M: np.ndarray
    N: np.ndarray
    gauss_curvature: np.ndarray
    method: str

    @property
    def first_form(self):
        return self.E, self.F, self.G

    @property
    def second_form(self):
        return self.L, self.M, self.N


def fundamental_forms(surface, nu=128, nv=128, method="spectral",
                      allow_singular=False, grid=None):
    """Numerical E, F, G, L, M, N on the grid, plus margin and curvature."""
    if grid is None:
        grid = sample_grid(surface, nu, nv)
    _require_regular(grid, allow_singular)
    x_u, x_v, x_uu, x_uv, x_vv = _surface_derivatives(grid, method)
    E = _dot(x_u, x_u)
    F = _dot(x_u, x_v)
    G = _dot(x_v, x_v)
    normal = np.cross(x_u, x_v)
    norm = np.linalg.norm(normal, axis=2)
    safe = np.where(norm > 0.0, norm, 1.0)[:, :, None]
    unit_normal = normal / safe
    L = _dot(x_uu, unit_normal)
    M = _dot(x_uv, unit_normal)
    N = _dot(x_vv, unit_normal)
    denom = E * G - F**2
    denom = np.where(np.abs(denom) > 0.0, denom, np.nan)
    margin = grid.margin
    x = grid.profile_xy[:, 0][:, None]
    y = grid.profile_xy[:, 1][:, None]
    return SurfaceDiagnostics(
        u=grid.u, v=grid.v,
        regularity_margin=margin,
        alpha=1.0 - margin,
        alpha_printed=x * grid.kappa1[None, :] - y * grid.kappa2[None, :],
        E=E, F=F, G=G, L=L, M=M, N=N,
        gauss_curvature=(L * N - M**2) / denom,
        method=method)


# ---------------------------------------------------------------------------
# Planar geodesic foliation check


@dataclass(frozen=True)
class PGFReport:
    planarity_residual: float
    geodesic_residual: float
    normal_residual: float
    tol: float
    is_pgf: bool


def _field_v_derivatives(grid, holonomy, method):
    """d/dv of the frame fields p, q1, q2 on the grid.

    The base point is periodic whenever the family's base is; the frame
    fields of a twisted family return rotated by the holonomy, so their
    derivatives come from the untwisted complex pair, which is periodic.
    """
    hv = grid.v[1] - grid.v[0]
    dp = _axis_derivatives(grid.p, 0, hv, grid.v_base_periodic, method, (1,))[0]
    if grid.v_frame_periodic or holonomy is None or not grid.v_base_periodic:
        closed = grid.v_frame_periodic
        dq1 = _axis_derivatives(grid.q1, 0, hv, closed, method, (1,))[0]
        dq2 = _axis_derivatives(grid.q2, 0, hv, closed, method, (1,))[0]
        return dp, dq1, dq2
    rate = holonomy / grid.v_period
    spiral = np.exp(1j * rate * (grid.v - grid.v[0]))[:, None]
    w = spiral * (grid.q1 + 1j * grid.q2)
    dw_r = _axis_derivatives(w.real, 0, hv, True, method, (1,))[0]
    dw_i = _axis_derivatives(w.imag, 0, hv, True, method, (1,))[0]
    dq = (dw_r + 1j * dw_i - 1j * rate * w) / spiral
    return dp, dq.real, dq.imag


def check_pgf(surface, nu=96, nv=96, tol=1e-5, method="spectral",
              allow_singular=False, grid=None):
    """Verify the meridians are planar geodesics whose planes carry the normal.

    Planarity: sup distance of each meridian from its best-fit plane.
    Geodesic: sup norm of the tangential part of x_uu (unit-speed profile).
    Normal condition: sup of |surface normal . meridian-plane normal|.

    x_uu comes from differencing the meridians; x_v comes from the product
    rule over the frame fields' derivatives, so twisted families (whose
    points are not v-periodic) still differentiate at full accuracy.
    """
    if grid is None:
        grid = sample_grid(surface, nu, nv)
    _require_regular(grid, allow_singular)
    hu = grid.u[1] - grid.u[0]
    x_u, x_uu = _axis_derivatives(grid.points, 0, hu, grid.u_closed, method, (1, 2))
    holonomy = None if surface is None else surface.family.holonomy_angle
    dp, dq1, dq2 = _field_v_derivatives(grid, holonomy, method)
    xy = grid.profile_xy
    x_v = (dp[None, :, :] + xy[:, 0][:, None, None] * dq1[None, :, :]
           + xy[:, 1][:, None, None] * dq2[None, :, :])
    normal = np.cross(x_u, x_v)
    norm = np.linalg.norm(normal, axis=2)
    unit_normal = normal / np.where(norm > 0.0, norm, 1.0)[:, :, None]

    planarity = 0.0
    normal_res = 0.0
    for j in range(grid.points.shape[1]):
        pts = grid.points[:, j]
        centered = pts - pts.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        plane_normal = vt[-1]
        planarity = max(planarity, float(np.abs(centered @ plane_normal).max()))
        normal_res = max(normal_res, float(np.abs(unit_normal[:, j] @ plane_normal).max()))

    tangential = x_uu - _dot(x_uu, unit_normal)[:, :, None] * unit_normal
    geodesic = float(np.linalg.norm(tangential, axis=2).max())
    return PGFReport(
        planarity_residual=planarity,
        geodesic_residual=geodesic,
        normal_residual=normal_res,
        tol=tol,
        is_pgf=bool(planarity < tol and geodesic < tol and normal_res < tol))


# ---------------------------------------------------------------------------
# Closure classification


@dataclass(frozen=True)
class ClosureReport:
    kind: str
    total_torsion: Optional[float]
    holonomy: Optional[float]
    profile_symmetry_order: Optional[int]
    covering_degree: Optional[int]
    rational: Optional[Fraction]
    seam_rotation: Optional[float]
    profile_closed: bool


def _spine_total_torsion(family):
    if family.spine is None or not family.spine.closed:
        return None
    try:
        return float(total_torsion(family.spine))
    except GeometryError:
        return None


def _is_centered_circle(profile, tol):
    r = np.linalg.norm(profile.samples, axis=1)
    rbar = float(r.mean())
    return rbar > 0.0 and float(np.abs(r - rbar).max()) <= tol


def classify_closure(surface, tol=1e-6):
    """Decide how the swept surface closes up over one spine period.

    The frame holonomy theta drives the decision: zero gives a torus or
    cylinder; theta = pi combines with an origin-symmetric profile into a
    Moebius strip (open profile) or Klein bottle (reversing figure-eight);
    other rational multiples of 2 pi need a matching profile symmetry and give
    a covered torus; a centered circular profile absorbs any rotation into a
    tubular torus; anything else does not close.
    """
    fam, prof = surface.family, surface.profile
    T = _spine_total_torsion(fam)
    base = dict(total_torsion=T, holonomy=None, profile_symmetry_order=prof.symmetry_order,
                covering_degree=None, rational=None, seam_rotation=None,
                profile_closed=prof.closed)
    if fam.period is None or fam.holonomy_angle is None:
        return ClosureReport(kind="open", **base)
    theta = wrap_angle(fam.holonomy_angle)
    base["holonomy"] = float(theta)
    sym_tol = 1e-6 * max(prof.scale(), 1e-300)

    if abs(theta) <= tol:
        base["seam_rotation"] = 0.0
        base["rational"] = Fraction(0, 1)
        kind = "monge_torus" if prof.closed else "cylinder"
        return ClosureReport(kind=kind, **base)

    if abs(wrap_angle(theta - np.pi)) <= tol:
        res = symmetry_residual(prof, np.pi)
        reversing = res["reversing"] <= sym_tol
        preserving = prof.closed and res["preserving"] <= sym_tol
        if not prof.closed and reversing:
            return ClosureReport(kind="moebius_strip", **{
                **base, "seam_rotation": float(np.pi), "rational": Fraction(1, 2),
                "profile_symmetry_order": 2})
        if prof.closed and reversing and not preserving:
            return ClosureReport(kind="klein_bottle", **{
                **base, "seam_rotation": float(np.pi), "rational": Fraction(1, 2),
                "profile_symmetry_order": 2})

    m = prof.symmetry_order
    if prof.closed and m:
        k = int(round(m * theta / TWO_PI))
        snapped = TWO_PI * k / m
        if abs(wrap_angle(theta - snapped)) <= tol and k % m != 0:
            if symmetry_residual(prof, snapped)["preserving"] <= sym_tol:
                return ClosureReport(kind="covered_torus", **{
                    **base,
                    "covering_degree": m // math.gcd(m, abs(k) % m),
                    "rational": Fraction(k, m),
                    "seam_rotation": float(wrap_angle(snapped))})

    if prof.closed and _is_centered_circle(prof, sym_tol):
        # Any rotation maps the profile to itself, so the image closes even
        # though the parallels do not; the mesh re-gauges the frame to zero.
        return ClosureReport(kind="tubular_torus", **{
            **base, "seam_rotation": 0.0, "rational": rational_turns(theta, tol=tol)})

    return ClosureReport(kind="non_closing", **{
        **base, "rational": rational_turns(theta, tol=tol)})


# ---------------------------------------------------------------------------
# Meshing


def _rot2(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def _seam_permutation(kind, closure, nu, profile_xy, scale, seam_tol):
    """Index map sigma with gamma(u_sigma(i)) = R(seam_rotation) gamma(u_i)."""
    if kind == "moebius_strip":
        return np.arange(nu)[::-1]
    if kind == "klein_bottle":
        return (-np.arange(nu)) % nu
    if kind == "covered_torus":
        turns = closure.seam_rotation / TWO_PI
        raw = turns * nu
        shift = int(round(raw))
        if abs(raw - shift) > 1e-6 * nu:
            raise ValueError(
                f"nu = {nu} incompatible with the seam rotation "
                f"{closure.seam_rotation:.6g}; use a multiple of "
                f"{Fraction(closure.rational).denominator}")
        target = profile_xy @ _rot2(closure.seam_rotation).T
        best = None
        for cand in (shift, -shift):
            sigma = (np.arange(nu) + cand) % nu
            res = float(np.abs(profile_xy[sigma] - target).max())
            if best is None or res < best[1]:
                best = (sigma, res)
        return best[0]
    return np.arange(nu)


def make_mesh(surface, nu, nv, closure=None, allow_singular=False,
              seam_tol=1e-9, classify_tol=1e-6):
    """Quad mesh with the closure's identification glued exactly at the seam.

    No seam row is duplicated: the identification map is recorded in the
    header and realized by the face indices.  The frame field is twisted
    linearly in v so its end rotation lands exactly on the seam rotation;
    with the profile's symmetry this makes glued vertex positions coincide
    to machine precision.
    """
    if closure is None:
        closure = classify_closure(surface, tol=classify_tol)
    kind = closure.kind
    glue_v = kind in GLUED_KINDS
    profile = surface.profile
    fam = _family_on_grid(surface.family, nv)

    xy = _profile_on_grid(profile, nu)
    scale = max(float(np.abs(xy).max()), 1.0)
    sigma = _seam_permutation(kind, closure, nu, xy, scale, seam_tol)

    seam_residual = 0.0
    if glue_v:
        theta = wrap_angle(fam.holonomy_angle)
        target_rotation = closure.seam_rotation
        if kind != "tubular_torus" and abs(wrap_angle(theta - target_rotation)) > 10.0 * classify_tol:
            raise SeamMismatch(
                f"holonomy {theta:.8g} does not match the {kind} seam rotation "
                f"{target_rotation:.8g}; reclassify the surface")
        rotated = xy @ _rot2(target_rotation).T
        seam_residual = float(np.linalg.norm(xy[sigma] - rotated, axis=1).max())
        if seam_residual > seam_tol * scale:
            raise SeamMismatch(
                f"seam identification residual {seam_residual:.3e} exceeds "
                f"tolerance; the profile lacks the required symmetry")
        twist = wrap_angle(target_rotation - theta)
    else:
        twist = 0.0

    angles = twist * np.arange(nv) / nv
    ca, sa = np.cos(angles)[:, None], np.sin(angles)[:, None]
    q1 = ca * fam.q1 + sa * fam.q2
    q2 = ca * fam.q2 - sa * fam.q1

    grid = SurfaceGrid(
        u=_u_grid(profile, nu), v=_v_grid(fam, nv),
        points=_assemble_points(xy, fam.p, q1, q2),
        profile_xy=xy, p=fam.p, t=fam.t, q1=q1, q2=q2,
        kappa1=fam.kappa1, kappa2=fam.kappa2, lam=fam.lam,
        u_closed=profile.closed, v_base_periodic=fam.period is not None,
        v_frame_periodic=fam.closed, u_period=profile.period,
        v_period=fam.period)
    _require_regular(grid, allow_singular)

    def vid(i, j):
        return i * nv + j

    faces = []
    u_range = nu if profile.closed else nu - 1
    v_range = nv if glue_v else nv - 1
    for i in range(u_range):
        ip = (i + 1) % nu
        for j in range(v_range):
            if j + 1 == nv:
                faces.append([vid(i, j), vid(ip, j),
                              vid(int(sigma[ip]), 0), vid(int(sigma[i]), 0)])
            else:
                faces.append([vid(i, j), vid(ip, j), vid(ip, j + 1), vid(i, j + 1)])

    seam_map = {"monge_torus": "identity", "cylinder": "identity",
                "tubular_torus": "identity", "covered_torus": "shift",
                "moebius_strip": "reverse", "klein_bottle": "reverse"}.get(kind, "none")
    header = {
        "kind": kind,
        "nu": nu,
        "nv": nv,
        "u_closed": profile.closed,
        "v_glued": glue_v,
        "seam_map": seam_map,
        "seam_rotation": float(closure.seam_rotation or 0.0),
        "seam_residual": seam_residual,
        "holonomy": float(closure.holonomy) if closure.holonomy is not None else 0.0,
        "twist": float(twist),
    }
    if closure.covering_degree is not None:
        header["covering_degree"] = closure.covering_degree
    return QuadMesh(vertices=grid.points.reshape(-1, 3),
                    faces=np.asarray(faces, dtype=np.int64),
                    header=header)
