"""Surfaces swept by a plane profile carried on a rotation-minimizing frame.

The pipeline: a closed space curve (the spine) carries a twist-free moving
frame; the frame's normal planes form an orthogonal plane family; a plane
profile swept through the family is a generalized Monge surface.  Whether
and how the surface closes up is governed by the frame holonomy, which for
closed frames is minus the spine's total torsion modulo 2*pi, so spines are
synthesized from a prescribed binormal image by solving a linearly
constrained convex closing problem.
"""

from .errors import (DegenerateCurve, DegenerateTangent, GeometryError,
                     Infeasible, InflectionPoint, NonConvergence,
                     NonPeriodicBinormal, NonPositiveSigma, OpenCurve,
                     OutOfDomain, SeamMismatch, SingularPoint)
from .curve import (AnalyticCurve, PlaneCurve, SampledCurve3,
                    binormal_trace_length, curve_derivatives, frenet_data,
                    parameter_speed, reparameterize_arclength,
                    symmetry_residual, total_torsion)
from .frames import (CylinderReport, MovingFrame, frame_holonomy,
                     is_monge_cylinder_spine, rational_turns,
                     rotation_minimizing_frame)
from .plane_family import (AxisLine, PlaneFamily, extract_coefficients,
                           from_coefficients, from_spine, gauge_transform,
                           instantaneous_axis, is_regular_family)
from .basis import PeriodicBSplineBasis, TrigBasis, make_basis
from .spine_synth import (BinormalCurve, SpineSynthesisProblem,
                          SynthesisResult, as_binormal, closing_vectors,
                          elastic_energy, fenchel_coverage, reconstruct_spine,
                          scale_to_torsion, synthesize)
from .monge import (ClosureReport, MarginReport, MongeSurface, PGFReport,
                    SurfaceDiagnostics, SurfaceGrid, check_pgf,
                    classify_closure, evaluate, fundamental_forms, make_mesh,
                    regularity_margin, sample_grid)
from .mesh import (OrientabilityReport, QuadMesh, WatertightReport,
                   orientability_report, read_obj, watertight_report,
                   write_obj)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
