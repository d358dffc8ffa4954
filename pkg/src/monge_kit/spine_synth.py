"""Synthesis of closed spine curves from a prescribed binormal image.

Given a closed unit-sphere curve b(t), every positive scalar field sigma
reconstructs a space curve r with r' = sigma (b x b'); r has binormal b,
torsion 1/sigma, and total torsion equal to the length of b.  Closing r is
the linear condition that sigma, expanded in a periodic basis, annihilates
the conormal integrals; among closing fields we minimize the bending energy

    E(sigma) = integral  det(b, b', b'')^2 / (sigma |b'|^5) dt,

which equals the integral of the squared curvature of r.  E is convex in the
basis coefficients over sigma > 0, so the constrained minimum is found by a
log-barrier Newton iteration in the null space of the equality constraints,
seeded by a linear-programming feasibility phase.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog

from .curve import SampledCurve3, curve_derivatives, total_torsion
from .errors import DegenerateTangent, GeometryError, Infeasible, NonConvergence, NonPositiveSigma
from .numerics import is_uniform, periodic_trapezoid, spectral_antiderivative, spectral_derivatives

SPHERE_TOL = 1e-9
BISECTION_TOL = 1e-8


@dataclass(frozen=True)
class BinormalCurve:
    """A closed unit-sphere curve with cached derivative and conormal data.

    `conormal` is b x b'; its weighted integrals against the basis are the
    closing vectors.  `flatness` is det(b, b', b'') per sample, the numerator
    of both the energy integrand and the geodesic curvature.
    """

    curve: SampledCurve3
    period: float = field(init=False)
    length: float = field(init=False)

    def __post_init__(self):
        c = self.curve
        if not c.closed:
            raise ValueError("binormal curves must be closed")
        if not is_uniform(c.params):
            raise ValueError("binormal curves need a uniform parameter grid")
        r = np.linalg.norm(c.samples, axis=1)
        if np.abs(r - 1.0).max() > SPHERE_TOL:
            raise ValueError("binormal samples must lie on the unit sphere")
        object.__setattr__(self, "period", float(c.period))
        if c.analytic is not None:
            d1, d2, d3 = curve_derivatives(c)
        else:
            d1, d2, d3 = spectral_derivatives(c.samples, self.period, orders=(1, 2, 3))
        speed = np.linalg.norm(d1, axis=1)
        if speed.min() <= 1e-10:
            raise DegenerateTangent("binormal trace has a stationary point")
        for name, value in (
            ("b", c.samples), ("b1", d1), ("b2", d2), ("b3", d3),
            ("speed", speed),
            ("conormal", np.cross(c.samples, d1)),
            ("flatness", np.einsum("ij,ij->i", c.samples, np.cross(d1, d2))),
        ):
            a = np.ascontiguousarray(value)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "length", float(periodic_trapezoid(speed, self.period)))

    @property
    def params(self):
        return self.curve.params

    @property
    def n(self):
        return self.curve.n

    @property
    def weight(self):
        return self.period / self.n


@dataclass(frozen=True)
class SpineSynthesisProblem:
    """Closing problem: binormal curve, periodic basis, and constraints.

    `family`, when given, maps a positive shape scale to a binormal curve
    (SampledCurve3 or BinormalCurve); it enables torsion targeting by
    bisection on the trace length.
    """

    binormal: BinormalCurve
    basis: object
    length_target: float = 1.0
    sigma_min: Optional[float] = None
    family: Optional[Callable] = None
    scale_bounds: tuple = (1e-3, 1.5)

    def __post_init__(self):
        B = self.basis.matrix(self.binormal.params)
        s = np.linalg.svd(B, compute_uv=False)
        if s[-1] <= 1e-12 * s[0]:
            raise ValueError("basis functions are linearly dependent on the grid")

    def sigma_floor(self, binormal=None):
        if self.sigma_min is not None:
            return float(self.sigma_min)
        b = self.binormal if binormal is None else binormal
        return 1e-3 * self.length_target / b.length


@dataclass(frozen=True)
class SynthesisResult:
    coefficients: np.ndarray
    sigma: np.ndarray
    spine: SampledCurve3
    achieved_total_torsion: Optional[float]
    energy: float
    closing_residual: float
    binormal: BinormalCurve
    sigma_floor: float
    kkt_residual: float
    barrier_gap: float
    newton_iterations: int


def as_binormal(curve):
    if isinstance(curve, BinormalCurve):
        return curve
    return BinormalCurve(curve)


def closing_vectors(problem):
    """Integral of each basis function against the conormal b x b'."""
    b = problem.binormal
    B = problem.basis.matrix(b.params)
    return b.weight * (B[:, :, None] * b.conormal[:, None, :]).sum(axis=0)


def fenchel_coverage(binormal, n_polar=64, n_azimuth=128):
    """Fraction of sphere directions crossed by a tangent great circle.

    The tangent great circle at t lies in the plane normal to the conormal;
    a direction is covered when its inner product with that normal changes
    sign over one period.  Full coverage is the classical criterion for the
    closing system to admit positive solutions; this is a diagnostic only,
    infeasibility of the linear program being the operative test.
    """
    b = as_binormal(binormal)
    m = b.conormal / np.linalg.norm(b.conormal, axis=1)[:, None]
    theta = (np.arange(n_polar) + 0.5) * np.pi / n_polar
    phi = np.arange(n_azimuth) * 2.0 * np.pi / n_azimuth
    y = np.stack([
        np.outer(np.sin(theta), np.cos(phi)),
        np.outer(np.sin(theta), np.sin(phi)),
        np.outer(np.cos(theta), np.ones_like(phi)),
    ], axis=-1).reshape(-1, 3)
    f = y @ m.T
    covered = (f.min(axis=1) <= 0.0) & (f.max(axis=1) >= 0.0)
    return float(covered.mean())


def elastic_energy(binormal, sigma):
    """Bending energy of the reconstruction: integral of kappa^2 ds."""
    b = as_binormal(binormal)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.min() <= 0.0:
        raise NonPositiveSigma("elastic energy requires sigma > 0")
    w = b.flatness**2 / b.speed**5
    return float(b.weight * np.sum(w / sigma))


def reconstruct_spine(binormal, sigma):
    """Integrate r' = sigma (b x b') by periodic spectral quadrature.

    The result keeps exact-through-spectral derivative arrays so Frenet data
    of the spine is available without re-differencing positions.
    """
    b = as_binormal(binormal)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (b.n,):
        raise ValueError("sigma must be sampled on the binormal grid")
    if sigma.min() <= 0.0:
        raise NonPositiveSigma("reconstruction requires sigma > 0")
    g = b.conormal
    g1 = np.cross(b.b, b.b2)
    g2 = np.cross(b.b1, b.b2) + np.cross(b.b, b.b3)
    s1, s2 = spectral_derivatives(sigma, b.period, orders=(1, 2))
    d1 = sigma[:, None] * g
    d2 = s1[:, None] * g + sigma[:, None] * g1
    d3 = s2[:, None] * g + 2.0 * s1[:, None] * g1 + sigma[:, None] * g2

    drift = b.weight * d1.sum(axis=0)
    length = float(b.weight * np.sum(sigma * b.speed))
    samples = spectral_antiderivative(d1, b.period)
    closes = bool(np.linalg.norm(drift) < 1e-6 * max(length, 1e-300))
    if closes:
        return SampledCurve3(samples=samples, params=b.params, closed=True,
                             period=b.period, derivs=(d1, d2, d3))
    return SampledCurve3(samples=samples, params=b.params, closed=False,
                         derivs=(d1, d2, d3))


def scale_to_torsion(family, target, bounds=(1e-3, 1.5), tol=BISECTION_TOL):
    """Bisect the family's shape scale until the trace length hits target."""
    lo, hi = float(bounds[0]), float(bounds[1])
    f_lo = as_binormal(family(lo))
    f_hi = as_binormal(family(hi))
    if not f_lo.length <= target <= f_hi.length:
        raise Infeasible(
            f"torsion target {target} outside family range "
            f"[{f_lo.length:.6f}, {f_hi.length:.6f}]")
    best = None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = as_binormal(family(mid))
        best = f_mid
        if abs(f_mid.length - target) < tol:
            return f_mid
        if f_mid.length < target:
            lo = mid
        else:
            hi = mid
    if best is not None and abs(best.length - target) < 1e2 * tol:
        return best
    raise NonConvergence("trace-length bisection failed to converge")


def _phase_one(B, A_eq, b_eq, sigma_floor):
    m, n = B.shape
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    A_ub = np.hstack([-B, np.ones((m, 1))])
    b_ub = -sigma_floor * np.ones(m)
    A_eq_lp = np.hstack([A_eq, np.zeros((A_eq.shape[0], 1))])
    bounds = [(None, None)] * n + [(None, 1e6 * max(sigma_floor, 1.0))]
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq_lp, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise Infeasible(f"closing system has no solution (LP status {res.status})")
    margin = float(res.x[-1])
    if margin <= 0.0:
        raise Infeasible(
            f"no sigma above the floor closes the spine (margin {margin:.3e})")
    return res.x[:-1], margin


def _barrier_newton(B, Z, c0, w, weight, sigma_floor):
    """Minimize weight * sum(w / sigma) over c = c0 + Z y, sigma = B c,
    subject to sigma >= sigma_floor, by a log-barrier Newton path."""
    m = B.shape[0]
    BZ = B @ Z

    def energy(sig):
        return weight * np.sum(w / sig)

    if Z.shape[1] == 0:
        # The equalities pin c completely; the feasible set is the point c0.
        sigma = B @ c0
        return c0, sigma, 0.0, 0.0, 0

    e0 = energy(B @ c0)
    mu = max(e0, 1e-6) / m
    total_newton = 0
    y = np.zeros(Z.shape[1])
    for _outer in range(64):
        for _inner in range(120):
            sigma = B @ (c0 + Z @ y)
            slack = sigma - sigma_floor
            grad_energy = -weight * (w / sigma**2)
            g = BZ.T @ (grad_energy - mu / slack)
            # Full-space gradient scales stay O(1) near the optimum (the
            # equality multipliers are nonzero), so they anchor the stop.
            gref = max(np.abs(B.T @ grad_energy).max(),
                       np.abs(B.T @ (mu / slack)).max(), 1e-300)
            if np.abs(g).max() <= 1e-11 * gref:
                break
            hdiag = 2.0 * weight * (w / sigma**3) + mu / slack**2
            H = BZ.T @ (hdiag[:, None] * BZ)
            try:
                step = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(H, -g, rcond=None)[0]
            decrement = float(-g @ step)
            total_newton += 1
            if decrement <= 0.0:
                break
            t = 1.0
            phi0 = energy(sigma) - mu * np.sum(np.log(slack))
            for _ in range(60):
                y_try = y + t * step
                sl_try = B @ (c0 + Z @ y_try) - sigma_floor
                if sl_try.min() > 0.0:
                    phi_try = energy(sl_try + sigma_floor) - mu * np.sum(np.log(sl_try))
                    if phi_try <= phi0 - 0.25 * t * decrement:
                        break
                t *= 0.5
            else:
                break
            y = y_try
        gap = mu * m
        if gap < 1e-11 * max(abs(e0), 1e-30) or mu < 1e-300:
            break
        mu *= 0.12
    c = c0 + Z @ y
    sigma = B @ c
    slack = sigma - sigma_floor
    duals = mu / slack
    grad_energy = -weight * (w / sigma**2)
    # Lagrangian stationarity in the reduced space, with the barrier duals.
    if Z.shape[1]:
        kkt = float(np.abs(BZ.T @ (grad_energy - duals)).max())
        grad_scale = float(max(np.abs(B.T @ grad_energy).max(),
                               np.abs(B.T @ duals).max(), 1e-300))
    else:
        kkt, grad_scale = 0.0, 1.0
    if kkt > 1e-4 * grad_scale:
        raise NonConvergence(
            f"optimizer stalled: stationarity {kkt:.3e} vs gradient scale "
            f"{grad_scale:.3e} after {total_newton} Newton steps (mu {mu:.3e})")
    return c, sigma, float(mu * m), kkt, total_newton


def synthesize(problem, torsion_target=None):
    """Solve the closing problem for the minimum-energy positive sigma.

    With `torsion_target` the binormal is replaced by the family member whose
    trace length equals the target (total torsion equals trace length for
    positive-torsion reconstructions), found by bisection on the shape scale.
    """
    binormal = problem.binormal
    if torsion_target is not None:
        target = float(torsion_target)
        if abs(binormal.length - target) > BISECTION_TOL:
            if problem.family is None:
                raise ValueError(
                    "torsion targeting needs a shape family to rescale")
            binormal = scale_to_torsion(problem.family, target,
                                        bounds=problem.scale_bounds)

    work = SpineSynthesisProblem(
        binormal=binormal, basis=problem.basis,
        length_target=problem.length_target, sigma_min=problem.sigma_min,
        family=problem.family, scale_bounds=problem.scale_bounds)
    sigma_floor = work.sigma_floor()
    B = problem.basis.matrix(binormal.params)
    a_vectors = closing_vectors(work)
    ell = binormal.weight * (B * binormal.speed[:, None]).sum(axis=0)
    A_eq = np.vstack([a_vectors.T, ell])
    b_eq = np.array([0.0, 0.0, 0.0, float(problem.length_target)])

    c_start, _margin = _phase_one(B, A_eq, b_eq, sigma_floor)

    # Project the LP vertex onto the affine solution set and search the
    # equality null space; rank-deficient closing systems keep extra freedom.
    u, s, vt = np.linalg.svd(A_eq)
    rank = int(np.sum(s > 1e-12 * s[0]))
    Z = vt[rank:].T
    c_p, *_ = np.linalg.lstsq(A_eq, b_eq, rcond=None)
    if np.linalg.norm(A_eq @ c_p - b_eq) > 1e-9 * max(1.0, np.linalg.norm(b_eq)):
        raise Infeasible("equality constraints are inconsistent")
    # Keep the strictly feasible LP point as the barrier start.
    y0 = Z.T @ (c_start - c_p)
    c0 = c_p + Z @ y0
    sigma0 = B @ c0
    if (sigma0 - sigma_floor).min() <= 0.0:
        c0 = c_start

    w = binormal.flatness**2 / binormal.speed**5
    c, sigma, gap, kkt, iters = _barrier_newton(
        B, Z, c0, w, binormal.weight, sigma_floor)

    spine = reconstruct_spine(binormal, sigma)
    residual = float(np.linalg.norm(binormal.weight *
                                    (sigma[:, None] * binormal.conormal).sum(axis=0)))
    try:
        achieved = float(total_torsion(spine))
    except GeometryError:
        achieved = None
    return SynthesisResult(
        coefficients=c,
        sigma=sigma,
        spine=spine,
        achieved_total_torsion=achieved,
        energy=elastic_energy(binormal, sigma),
        closing_residual=residual,
        binormal=binormal,
        sigma_floor=sigma_floor,
        kkt_residual=kkt,
        barrier_gap=gap,
        newton_iterations=iters,
    )
