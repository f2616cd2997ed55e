"""Synthetic test cohorts: anisotropically scaled icospheres with a
sine-wave painted boundary splitting each surface into kept and cut halves.
"""

from __future__ import annotations

import numpy as np

from .fields import FaceMask
from .geometry import TriangleMesh


class DegenerateMask(ValueError):
    """Mask construction produced an all-included or all-excluded mask."""


_PHI = (1.0 + 5.0 ** 0.5) / 2.0

_ICO_VERTS = np.array([
    (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
    (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
    (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
], dtype=np.float64)

_ICO_FACES = np.array([
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
], dtype=np.int64)


def icosphere(subdiv: int) -> TriangleMesh:
    """Unit sphere mesh: icosahedron with ``subdiv`` 4-to-1 refinements.

    Every refinement splits each face at edge midpoints and reprojects new
    vertices onto the unit sphere, giving 10*4**s + 2 vertices and
    20*4**s faces with outward-oriented normals.
    """
    if subdiv < 0:
        raise ValueError("subdiv must be >= 0")
    verts = [v / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = [tuple(f) for f in _ICO_FACES]
    for _ in range(subdiv):
        midpoint: dict[tuple[int, int], int] = {}

        def mid(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            k = midpoint.get(key)
            if k is None:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                k = len(verts) - 1
                midpoint[key] = k
            return k

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc),
                          (ab, bc, ca)]
        faces = new_faces
    return TriangleMesh(np.array(verts), np.array(faces, dtype=np.int64))


def gen_ellipsoid_mesh(a: float, b: float, c: float, subdiv: int = 3
                       ) -> TriangleMesh:
    """Ellipsoid with semi-axes (a, b, c): a unit icosphere scaled per axis."""
    if min(a, b, c) <= 0.0:
        raise ValueError("semi-axes must be positive")
    sphere = icosphere(subdiv)
    return TriangleMesh(sphere.vertices * np.array([a, b, c]), sphere.faces)


def gen_ellipsoid_cohort(axis_values, subdiv: int = 3) -> list[TriangleMesh]:
    """Cartesian product of semi-axis values, a-major then b then c.

    The first mesh uses the first value for every axis, the last the last
    value; len(axis_values)**3 meshes in total. All meshes share the same
    icosphere topology, so vertex indices correspond across the cohort.
    """
    vals = [float(v) for v in axis_values]
    if not vals:
        raise ValueError("axis_values must be non-empty")
    sphere = icosphere(subdiv)
    out = []
    for a in vals:
        for b in vals:
            for c in vals:
                if min(a, b, c) <= 0.0:
                    raise ValueError("semi-axes must be positive")
                out.append(TriangleMesh(
                    sphere.vertices * np.array([a, b, c]), sphere.faces))
    return out


def cohort_axes(axis_values) -> list[tuple[float, float, float]]:
    """(a, b, c) per cohort member, matching gen_ellipsoid_cohort order."""
    vals = [float(v) for v in axis_values]
    return [(a, b, c) for a in vals for b in vals for c in vals]


def sine_boundary_mask(mesh: TriangleMesh, amplitude_frac: float = 0.3
                       ) -> FaceMask:
    """Face mask splitting an ellipsoid by one sine period around the equator.

    A face is included when its centroid, in axis-normalized coordinates,
    satisfies z > amplitude_frac * sin(azimuth). Semi-axes are recovered
    from the bounding box, so the mask depends only on shape, not scale.
    """
    center = (mesh.bbox_max + mesh.bbox_min) / 2.0
    semi = (mesh.bbox_max - mesh.bbox_min) / 2.0
    if np.any(semi <= 0.0):
        raise DegenerateMask("mesh is flat along an axis")
    q = (mesh.face_centroids() - center) / semi
    azimuth = np.arctan2(q[:, 1], q[:, 0])
    included = q[:, 2] > amplitude_frac * np.sin(azimuth)
    if included.all() or not included.any():
        raise DegenerateMask(
            "amplitude %.3g leaves no boundary at this resolution"
            % amplitude_frac)
    return FaceMask.for_mesh(mesh, included)
