"""Command-line pipeline: curve analysis, spine synthesis, surface building,
and mesh checking.

Exit codes are part of the contract: 0 success, 2 unparseable or malformed
input, 3 a geometric precondition failed (the error class name is printed to
stderr), 4 the closing problem is infeasible, 5 the surface is singular on
the grid and --allow-singular was not given.  mesh-check additionally exits 1
when the mesh is not watertight, so shell harnesses can assert closure.

Identical inputs and options produce byte-identical output files and stdout.
The MONGE_KIT_THREADS environment variable caps grid parallelism exactly as
in the library.
"""

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import io
from .errors import GeometryError, Infeasible, SingularPoint
from .families import random_sphere_curve
from .frames import is_monge_cylinder_spine
from .mesh import orientability_report, read_obj, watertight_report, write_obj
from .monge import (MongeSurface, check_pgf, classify_closure,
                    fundamental_forms, make_mesh, regularity_margin)
from .plane_family import from_spine
from .spine_synth import synthesize


class ParseFailure(Exception):
    """Input file missing, unreadable, or not a documented format."""


def _parse(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (OSError, ValueError, KeyError, TypeError,
            json.JSONDecodeError) as exc:
        raise ParseFailure(str(exc)) from exc


def _emit(doc, path=None):
    text = io.dumps(doc)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _spine_from_doc(doc):
    curve = io.curve_from_dict(doc)
    if curve.samples.shape[1] != 3:
        raise ValueError("spine curves must be 3-dimensional")
    return curve


def _profile_from_doc(doc):
    curve = io.curve_from_dict(doc)
    if curve.samples.shape[1] != 2:
        raise ValueError("profiles must be plane curves (dim 2)")
    return curve


def cmd_analyze(args):
    if args.random_sphere:
        if args.curve is not None:
            raise ParseFailure("give either a curve file or --random-sphere")
        curve = random_sphere_curve(seed=args.seed)
    elif args.curve is None:
        raise ParseFailure("a curve file is required without --random-sphere")
    else:
        curve = _parse(_spine_from_doc, _parse(io.load_path, args.curve))
    verdict, report = is_monge_cylinder_spine(curve, tol=args.tol)
    _emit({
        "total_torsion": float(report.total_torsion),
        "binormal_trace_length": float(report.binormal_length),
        "holonomy_angle": float(report.holonomy),
        "rational": io.rational_str(report.rational),
        "is_monge_cylinder": bool(verdict),
        "n_samples": int(curve.n),
    })
    return 0


def cmd_synthesize(args):
    doc = _parse(io.load_path, args.problem)
    base_dir = os.path.dirname(os.path.abspath(args.problem))
    problem, target = _parse(io.problem_from_dict, doc, base_dir=base_dir)
    if args.torsion_target is not None:
        target = args.torsion_target
    result = synthesize(problem, torsion_target=target)
    _emit(io.result_to_dict(result), args.out)
    return 0


def _metric_residuals(diag):
    return {
        "E_residual": float(np.abs(diag.E - 1.0).max()),
        "F_residual": float(np.abs(diag.F).max()),
        "G_residual": float(np.abs(diag.G - (1.0 - diag.alpha) ** 2).max()),
        "M_residual": float(np.abs(diag.M).max()),
    }


def cmd_surface(args):
    geometry_doc = _parse(io.load_path, args.geometry)
    profile_doc = _parse(io.load_path, args.profile)
    profile = _parse(_profile_from_doc, profile_doc)
    if io.is_family_document(geometry_doc):
        family = _parse(io.family_from_dict, geometry_doc)
    else:
        spine = _parse(_spine_from_doc, geometry_doc)
        family = from_spine(spine)

    surface = MongeSurface(family=family, profile=profile)
    nu = profile.n if args.nu is None else args.nu
    nv = family.n if args.nv is None else args.nv

    closure = classify_closure(surface, tol=args.classify_tol)
    mesh = make_mesh(surface, nu, nv, closure=closure,
                     allow_singular=args.allow_singular)
    margin = regularity_margin(surface, nu=nu, nv=nv)

    report = {
        "closure": io.closure_report_to_dict(closure),
        "margin": io.margin_report_to_dict(margin),
        "grid": {"nu": int(nu), "nv": int(nv)},
        "singular": bool(not margin.regular),
        "mesh": {
            "n_vertices": int(mesh.n_vertices),
            "n_faces": int(mesh.n_faces),
            "seam_residual": float(mesh.header["seam_residual"]),
            "twist": float(mesh.header["twist"]),
            "watertight": io.watertight_report_to_dict(watertight_report(mesh)),
            "orientability": io.orientability_report_to_dict(
                orientability_report(mesh)),
        },
    }
    if margin.regular:
        # Diagnostics differentiate the profile along u and the family along
        # v, so they run at the native sampling of each; the mesh alone is
        # decimated to the requested grid.
        diag = fundamental_forms(surface, nu=profile.n, nv=family.n)
        report["fundamental_forms"] = _metric_residuals(diag)
        report["pgf"] = io.pgf_report_to_dict(
            check_pgf(surface, nu=profile.n, nv=family.n))
    else:
        # Singular-locus annotation travels in the OBJ header; the zero set
        # itself is in the margin report.
        mesh = dataclasses.replace(mesh, header={
            **mesh.header, "singular": True,
            "singular_points": len(margin.zero_set)})

    if args.out_mesh is not None:
        write_obj(mesh, args.out_mesh)
    _emit(report, args.out_report)
    return 0


def cmd_mesh_check(args):
    mesh = _parse(read_obj, args.mesh)
    water = watertight_report(mesh)
    orient = orientability_report(mesh)
    _emit({
        "n_vertices": int(mesh.n_vertices),
        "n_faces": int(mesh.n_faces),
        "watertight": io.watertight_report_to_dict(water),
        "orientability": io.orientability_report_to_dict(orient),
        "header": {key: str(mesh.header[key]) for key in sorted(mesh.header)},
    }, args.out_report)
    return 0 if water.watertight else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="monge-kit",
        description="Analyze closed curves, synthesize closing spines, and "
                    "build swept surfaces over plane families.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="closure report for a closed space curve")
    p.add_argument("curve", nargs="?", help="curve JSON file (dim 3, closed)")
    p.add_argument("--random-sphere", action="store_true",
                   help="analyze a generated random spherical curve instead")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for --random-sphere (default 0)")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="holonomy tolerance for the cylinder verdict")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synthesize", help="solve a spine closing problem")
    p.add_argument("problem", help="problem JSON file")
    p.add_argument("--torsion-target", type=float, default=None,
                   help="override the problem's torsion target")
    p.add_argument("--out", default=None,
                   help="result JSON path (default: stdout)")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("surface", help="build, classify, and mesh a surface")
    p.add_argument("geometry", help="spine curve or plane-family JSON file")
    p.add_argument("profile", help="profile curve JSON file (dim 2)")
    p.add_argument("--nu", type=int, default=None,
                   help="profile samples (default: the file's sample count)")
    p.add_argument("--nv", type=int, default=None,
                   help="family samples (default: the file's sample count)")
    p.add_argument("--out-mesh", default=None, help="OBJ output path")
    p.add_argument("--out-report", default=None,
                   help="report JSON path (default: stdout)")
    p.add_argument("--allow-singular", action="store_true",
                   help="mesh through singular points and annotate them")
    p.add_argument("--classify-tol", type=float, default=1e-6,
                   help="holonomy tolerance for closure classification")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("mesh-check",
                       help="watertightness and orientability of an OBJ mesh")
    p.add_argument("mesh", help="OBJ file")
    p.add_argument("--out-report", default=None,
                   help="report JSON path (default: stdout)")
    p.set_defaults(func=cmd_mesh_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Infeasible as exc:
        print(f"Infeasible: {exc}", file=sys.stderr)
        return 4
    except SingularPoint as exc:
        print(f"SingularPoint: {exc}", file=sys.stderr)
        return 5
    except GeometryError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
