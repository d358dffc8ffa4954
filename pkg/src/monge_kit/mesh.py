"""Quad meshes with explicit seam identification, OBJ I/O, topology checks.

Glued seams are never duplicated as vertex rows; the identification map is
recorded in the mesh header so watertightness stays checkable directly from
the face graph.
"""

from dataclasses import dataclass
from collections import defaultdict, deque

import numpy as np

HEADER_PREFIX = "# monge_kit "


def _freeze(a):
    out = np.ascontiguousarray(a)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QuadMesh:
    """Vertices (n, 3), quad faces (m, 4) of 0-based indices, header dict."""

    vertices: np.ndarray
    faces: np.ndarray
    header: dict

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        f = np.asarray(self.faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError("vertices must have shape (n, 3)")
        if f.ndim != 2 or f.shape[1] != 4:
            raise ValueError("faces must have shape (m, 4)")
        if f.size and (f.min() < 0 or f.max() >= v.shape[0]):
            raise ValueError("face indices out of range")
        object.__setattr__(self, "vertices", _freeze(v))
        object.__setattr__(self, "faces", _freeze(f))

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]


def _format_header_value(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_obj(mesh, path):
    """Wavefront OBJ with quads; header entries as sorted comment lines."""
    lines = []
    for key in sorted(mesh.header):
        lines.append(f"{HEADER_PREFIX}{key}: {_format_header_value(mesh.header[key])}")
    for x, y, z in mesh.vertices:
        lines.append(f"v {float(x)!r} {float(y)!r} {float(z)!r}")
    for a, b, c, d in mesh.faces + 1:
        lines.append(f"f {a} {b} {c} {d}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_obj(path):
    vertices, faces, header = [], [], {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith(HEADER_PREFIX):
                key, _, value = line[len(HEADER_PREFIX):].partition(":")
                header[key.strip()] = value.strip()
            elif line.startswith("v "):
                vertices.append([float(x) for x in line.split()[1:4]])
            elif line.startswith("f "):
                idx = [int(tok.split("/")[0]) - 1 for tok in line.split()[1:]]
                if len(idx) != 4:
                    raise ValueError("only quad faces are supported")
                faces.append(idx)
    return QuadMesh(vertices=np.asarray(vertices, dtype=float),
                    faces=np.asarray(faces, dtype=np.int64),
                    header=header)


def _edge_faces(mesh):
    """Map undirected edge -> list of (face index, directed as stored?)."""
    edges = defaultdict(list)
    for fi, face in enumerate(mesh.faces):
        for k in range(4):
            a, b = int(face[k]), int(face[(k + 1) % 4])
            edges[(min(a, b), max(a, b))].append((fi, a < b))
    return edges


@dataclass(frozen=True)
class WatertightReport:
    watertight: bool
    n_edges: int
    boundary_edges: int
    nonmanifold_edges: int
    degenerate_faces: int


def watertight_report(mesh):
    """Every edge on exactly two quads = watertight (closed surface)."""
    edges = _edge_faces(mesh)
    boundary = sum(1 for users in edges.values() if len(users) == 1)
    nonmanifold = sum(1 for users in edges.values() if len(users) > 2)
    degenerate = int(np.sum([len(set(map(int, f))) < 4 for f in mesh.faces]))
    watertight = boundary == 0 and nonmanifold == 0 and degenerate == 0
    return WatertightReport(watertight=watertight, n_edges=len(edges),
                            boundary_edges=boundary, nonmanifold_edges=nonmanifold,
                            degenerate_faces=degenerate)


@dataclass(frozen=True)
class OrientabilityReport:
    orientable: bool
    n_components: int
    conflicts: int


def orientability_report(mesh):
    """Propagate a consistent winding across shared edges by breadth-first
    search; a parity conflict on some edge means the surface is one-sided.

    Two neighbouring quads are consistently oriented when their shared edge
    is traversed in opposite directions.
    """
    edges = _edge_faces(mesh)
    flips = np.full(mesh.n_faces, -1, dtype=np.int8)
    components = 0
    conflicts = 0
    for seed in range(mesh.n_faces):
        if flips[seed] >= 0:
            continue
        components += 1
        flips[seed] = 0
        queue = deque([seed])
        while queue:
            fi = queue.popleft()
            face = mesh.faces[fi]
            for k in range(4):
                a, b = int(face[k]), int(face[(k + 1) % 4])
                key = (min(a, b), max(a, b))
                for fj, fwd in edges[key]:
                    if fj == fi:
                        continue
                    here = a < b
                    # opposite traversal = same orientation (flip parity equal)
                    want = flips[fi] if fwd != here else flips[fi] ^ 1
                    if flips[fj] < 0:
                        flips[fj] = want
                        queue.append(fj)
                    elif flips[fj] != want:
                        conflicts += 1
    return OrientabilityReport(orientable=conflicts == 0,
                               n_components=components,
                               conflicts=conflicts)
