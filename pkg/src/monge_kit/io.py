"""JSON exchange formats for curves, frames, plane families, and results.

Document kinds, one per top-level shape:

  curve            dim / closed / period / params / samples
                   (+ symmetry_order for profiles, + frame for framed curves)
  plane family     params / p / t / q1 / q2 / kappa1 / kappa2 / lambda
                   (+ closed / period / holonomy_angle)
  problem          binormal / basis / length_target / sigma_min / torsion_target
  result           coefficients / sigma / spine / diagnostics

Serialization is canonical: sorted keys, two-space indent, floats through
Python's shortest round-trip repr (exact to the last bit, always at least as
faithful as 15 significant digits).  Identical objects therefore serialize to
byte-identical documents, which the command-line tools rely on.
"""

import json
import os
from fractions import Fraction
from functools import partial

import numpy as np

from .basis import make_basis
from .curve import PlaneCurve, SampledCurve3
from .numerics import is_uniform, spectral_derivatives
from .families import latitude_oscillation_binormal, loop_stroke_binormal
from .frames import MovingFrame
from .plane_family import PlaneFamily
from .spine_synth import SpineSynthesisProblem, as_binormal

# Scale-parameterized binormal families usable for torsion targeting; each
# maps a positive shape scale to a closed unit-sphere curve.
BINORMAL_FAMILIES = {
    "latitude_oscillation": latitude_oscillation_binormal,
    "loop_stroke": loop_stroke_binormal,
}


def dumps(doc):
    """Canonical JSON text: sorted keys, two-space indent, repr floats."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def dump_path(doc, path):
    with open(path, "w") as fh:
        fh.write(dumps(doc))


def load_path(path):
    with open(path) as fh:
        return json.load(fh)


def _vectors(a):
    return np.asarray(a, dtype=float).tolist()


def _require(doc, key, kind):
    if key not in doc:
        raise ValueError(f"curve document is missing {key!r}")
    return doc[key] if kind is None else kind(doc[key])


def curve_to_dict(curve, frame=None):
    doc = {
        "dim": int(curve.samples.shape[1]),
        "closed": bool(curve.closed),
        "params": _vectors(curve.params),
        "samples": _vectors(curve.samples),
    }
    if curve.closed:
        doc["period"] = float(curve.period)
    symmetry = getattr(curve, "symmetry_order", None)
    if symmetry is not None:
        doc["symmetry_order"] = int(symmetry)
    if frame is not None:
        doc["frame"] = {
            "t": _vectors(frame.t),
            "q1": _vectors(frame.q1),
            "q2": _vectors(frame.q2),
            "holonomy_angle": float(frame.holonomy_angle),
        }
    return doc


def curve_from_dict(doc):
    dim = _require(doc, "dim", int)
    if dim not in (2, 3):
        raise ValueError(f"curve dim must be 2 or 3, got {dim}")
    closed = _require(doc, "closed", bool)
    samples = np.asarray(_require(doc, "samples", None), dtype=float)
    params = np.asarray(_require(doc, "params", None), dtype=float)
    if samples.ndim != 2 or samples.shape[1] != dim:
        raise ValueError(f"samples must be an (n, {dim}) array")
    if params.shape != (samples.shape[0],):
        raise ValueError("params must match the sample count")
    period = None
    if closed:
        if "period" not in doc:
            raise ValueError("closed curves require a period")
        period = float(doc["period"])
    # A closed curve on a uniform one-period grid gets its trigonometric
    # interpolant's derivatives attached, so torsion and framing downstream
    # see the same smooth model that produced the samples instead of a
    # re-differenced one.
    derivs = None
    n = samples.shape[0]
    if closed and n >= 8 and is_uniform(params) and (
            abs((params[-1] - params[0]) - period * (n - 1) / n) <= 1e-9 * abs(period)):
        derivs = tuple(spectral_derivatives(samples, period, orders=(1, 2, 3)))
    if dim == 2:
        symmetry = doc.get("symmetry_order")
        return PlaneCurve(samples=samples, params=params, closed=closed,
                          period=period, derivs=derivs,
                          symmetry_order=None if symmetry is None else int(symmetry))
    return SampledCurve3(samples=samples, params=params, closed=closed,
                         period=period, derivs=derivs)


def frame_to_dict(frame):
    return curve_to_dict(frame.curve, frame=frame)


def frame_from_dict(doc):
    curve = curve_from_dict(doc)
    if "frame" not in doc:
        raise ValueError("curve document carries no frame")
    f = doc["frame"]
    return MovingFrame(
        curve=curve,
        t=np.asarray(f["t"], dtype=float),
        q1=np.asarray(f["q1"], dtype=float),
        q2=np.asarray(f["q2"], dtype=float),
        holonomy_angle=float(f["holonomy_angle"]))


def family_to_dict(family):
    doc = {
        "params": _vectors(family.params),
        "p": _vectors(family.p),
        "t": _vectors(family.t),
        "q1": _vectors(family.q1),
        "q2": _vectors(family.q2),
        "kappa1": _vectors(family.kappa1),
        "kappa2": _vectors(family.kappa2),
        "lambda": _vectors(family.lam),
        "closed": bool(family.closed),
    }
    if family.period is not None:
        doc["period"] = float(family.period)
    if family.holonomy_angle is not None:
        doc["holonomy_angle"] = float(family.holonomy_angle)
    return doc


def family_from_dict(doc):
    arrays = {}
    for key in ("params", "p", "t", "q1", "q2", "kappa1", "kappa2"):
        arrays[key] = np.asarray(_require(doc, key, None), dtype=float)
    lam = np.asarray(_require(doc, "lambda", None), dtype=float)
    period = doc.get("period")
    holonomy = doc.get("holonomy_angle")
    return PlaneFamily(
        lam=lam, closed=bool(doc.get("closed", False)),
        period=None if period is None else float(period),
        holonomy_angle=None if holonomy is None else float(holonomy),
        **arrays)


def is_family_document(doc):
    """Plane-family documents carry coefficient arrays; curves carry samples."""
    return "kappa1" in doc and "samples" not in doc


def binormal_from_spec(spec, base_dir="."):
    """Resolve a problem's binormal: inline curve, file reference, or a named
    scale family.  Returns (BinormalCurve, family callable or None)."""
    if not isinstance(spec, dict):
        raise ValueError("binormal spec must be an object")
    if "samples" in spec:
        return as_binormal(curve_from_dict(spec)), None
    if "file" in spec:
        path = os.path.join(base_dir, spec["file"])
        return as_binormal(curve_from_dict(load_path(path))), None
    if "family" in spec:
        name = spec["family"]
        if name not in BINORMAL_FAMILIES:
            known = ", ".join(sorted(BINORMAL_FAMILIES))
            raise ValueError(f"unknown binormal family {name!r} (known: {known})")
        kwargs = {k: v for k, v in spec.items() if k not in ("family", "scale")}
        generator = partial(BINORMAL_FAMILIES[name], **kwargs)
        scale = float(spec.get("scale", 0.5))
        return as_binormal(generator(scale)), generator
    raise ValueError("binormal spec needs samples, a file, or a family name")


def problem_from_dict(doc, base_dir="."):
    """Build a synthesis problem from its document; returns (problem, target).

    `target` is the document's torsion_target (or None); it is kept separate
    so a command-line override can replace it before solving.
    """
    binormal, family = binormal_from_spec(_require(doc, "binormal", None), base_dir)
    basis = make_basis(_require(doc, "basis", None), period=binormal.period)
    sigma_min = doc.get("sigma_min")
    kwargs = {}
    if "scale_bounds" in doc:
        lo, hi = doc["scale_bounds"]
        kwargs["scale_bounds"] = (float(lo), float(hi))
    problem = SpineSynthesisProblem(
        binormal=binormal, basis=basis,
        length_target=float(_require(doc, "length_target", float)),
        sigma_min=None if sigma_min is None else float(sigma_min),
        family=family, **kwargs)
    target = doc.get("torsion_target")
    return problem, None if target is None else float(target)


def result_to_dict(result):
    return {
        "coefficients": _vectors(result.coefficients),
        "sigma": _vectors(result.sigma),
        "spine": curve_to_dict(result.spine),
        "diagnostics": {
            "achieved_total_torsion": _opt_float(result.achieved_total_torsion),
            "energy": float(result.energy),
            "closing_residual": float(result.closing_residual),
            "binormal_trace_length": float(result.binormal.length),
            "sigma_floor": float(result.sigma_floor),
            "kkt_residual": float(result.kkt_residual),
            "barrier_gap": float(result.barrier_gap),
            "newton_iterations": int(result.newton_iterations),
        },
    }


def _opt_float(value):
    return None if value is None else float(value)


def rational_str(rational):
    if rational is None:
        return None
    f = Fraction(rational)
    return f"{f.numerator}/{f.denominator}"


def closure_report_to_dict(report):
    return {
        "kind": report.kind,
        "total_torsion": _opt_float(report.total_torsion),
        "holonomy": _opt_float(report.holonomy),
        "profile_symmetry_order": report.profile_symmetry_order,
        "covering_degree": report.covering_degree,
        "rational": rational_str(report.rational),
        "seam_rotation": _opt_float(report.seam_rotation),
        "profile_closed": bool(report.profile_closed),
    }


def margin_report_to_dict(report):
    return {
        "regular": bool(report.regular),
        "margin_min": float(report.margin_min),
        "margin_max": float(report.margin_max),
        "tol": float(report.tol),
        "zero_set": _vectors(report.zero_set),
    }


def pgf_report_to_dict(report):
    return {
        "planarity_residual": float(report.planarity_residual),
        "geodesic_residual": float(report.geodesic_residual),
        "normal_residual": float(report.normal_residual),
        "tol": float(report.tol),
        "is_pgf": bool(report.is_pgf),
    }


def watertight_report_to_dict(report):
    return {
        "watertight": bool(report.watertight),
        "n_edges": int(report.n_edges),
        "boundary_edges": int(report.boundary_edges),
        "nonmanifold_edges": int(report.nonmanifold_edges),
        "degenerate_faces": int(report.degenerate_faces),
    }


def orientability_report_to_dict(report):
    return {
        "orientable": bool(report.orientable),
        "n_components": int(report.n_components),
        "conflicts": int(report.conflicts),
    }
