"""Painted-region constraint fields.

A region of interest is painted on a mesh as a per-face mask. This module
turns such a mask into (1) boundary loops of edge crossings, (2) a signed
per-vertex geodesic distance field (negative inside the kept region) with a
matching per-vertex unit gradient field, and (3) point queries against
those fields, which is what the optimizer's constraint code consumes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .geometry import SurfacePoint, TriangleMesh, closest_point, \
    geodesic_from_sources


class EmptyBoundary(ValueError):
    """The mask has no included/excluded interface (all one flag)."""


class InconsistentMask(ValueError):
    """A vertex touches both flags but no boundary edge, so its sign and
    offset cannot be derived from the loops."""


class ChecksumMismatch(ValueError):
    """Field or mask was built for a different mesh (vertex bytes differ)."""


_DEGENERATE_NORM = 1e-8


@dataclass
class FaceMask:
    """Per-face paint state: True = included (feasible side)."""

    included: np.ndarray
    mesh_checksum: int | None = None

    def __post_init__(self):
        self.included = np.asarray(self.included, dtype=bool)

    @classmethod
    def for_mesh(cls, mesh: TriangleMesh, included) -> "FaceMask":
        m = cls(included, mesh_checksum=mesh.checksum())
        if m.included.shape != (mesh.num_faces,):
            raise ValueError("mask length does not match face count")
        return m

    def validate(self, mesh: TriangleMesh) -> None:
        if self.included.shape != (mesh.num_faces,):
            raise ValueError("mask length does not match face count")
        if (self.mesh_checksum is not None
                and self.mesh_checksum != mesh.checksum()):
            raise ChecksumMismatch("mask belongs to a different mesh")


@dataclass
class BoundaryLoop:
    """Ordered boundary crossings, each on a mesh edge at parameter t.

    Consecutive crossings share a vertex and bound the same excluded
    face sector around it. ``closed`` loops wrap around; open chains
    appear only for degenerate masks (pinched regions).
    Orientation convention: walking the crossings in order with the
    outward normal up keeps the included region on the left.
    """

    edge_ids: np.ndarray
    t: np.ndarray
    closed: bool = True

    def __post_init__(self):
        self.edge_ids = np.asarray(self.edge_ids, dtype=np.int64)
        self.t = np.asarray(self.t, dtype=np.float64)

    def __len__(self) -> int:
        return int(self.edge_ids.shape[0])

    def positions(self, mesh: TriangleMesh) -> np.ndarray:
        e = mesh.edges[self.edge_ids]
        a = mesh.vertices[e[:, 0]]
        b = mesh.vertices[e[:, 1]]
        return a + self.t[:, None] * (b - a)


@dataclass
class MeshField:
    """Signed distance + unit gradient sampled at mesh vertices.

    ``vertex_distance`` is negative on the feasible (painted-included)
    side. ``vertex_gradient`` points toward increasing distance, i.e.
    toward the infeasible side; rows flagged in ``degenerate`` are zero
    because the incident face gradients cancelled (local extremum).
    """

    mesh_checksum: int
    vertex_distance: np.ndarray
    vertex_gradient: np.ndarray
    degenerate: np.ndarray = dc_field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.vertex_distance = np.asarray(self.vertex_distance,
                                          dtype=np.float64)
        self.vertex_gradient = np.asarray(self.vertex_gradient,
                                          dtype=np.float64)
        if self.degenerate is None:
            norms = np.linalg.norm(self.vertex_gradient, axis=1)
            self.degenerate = norms < _DEGENERATE_NORM

    def validate(self, mesh: TriangleMesh) -> None:
        if self.mesh_checksum != mesh.checksum():
            raise ChecksumMismatch("field belongs to a different mesh")
        if self.vertex_distance.shape != (mesh.num_vertices,):
            raise ValueError("field length does not match vertex count")


def trace_boundary_loops(mesh: TriangleMesh, mask: FaceMask
                         ) -> list[BoundaryLoop]:
    """Chains of edge crossings separating included from excluded faces.

    An edge is crossed when its two incident faces carry opposite flags;
    the crossing sits at the edge midpoint (t = 0.5). Two crossings are
    consecutive when their edges share a vertex and bound the same
    excluded sector of that vertex's face fan, which keeps every crossing
    on at most one chain even where the mask pinches. Closed loops are
    returned rotated to start at their smallest edge id and oriented with
    the included region on the left; the list is sorted by that starting
    edge id.
    """
    mask.validate(mesh)
    inc = mask.included
    ef = mesh.edge_faces
    both = (ef[:, 0] >= 0) & (ef[:, 1] >= 0)
    crossed = np.flatnonzero(both & (inc[ef[:, 0]] != inc[ef[:, 1]]))
    if crossed.size == 0:
        state = "included" if inc.all() else (
            "excluded" if not inc.any() else "mixed but interface-free")
        raise EmptyBoundary(f"mask is all-{state}: no boundary to trace")

    adj = _connect_crossings(mesh, inc, crossed)
    chains = _walk_chains(adj)
    loops = []
    for chain, closed in chains:
        edge_ids = np.array(chain, dtype=np.int64)
        t = np.full(edge_ids.shape, 0.5)
        loop = BoundaryLoop(edge_ids, t, closed=closed)
        _orient_loop(mesh, mask, loop)
        if closed:
            k = int(np.argmin(loop.edge_ids))
            loop.edge_ids = np.roll(loop.edge_ids, -k)
            loop.t = np.roll(loop.t, -k)
        loops.append(loop)
    loops.sort(key=lambda lp: int(lp.edge_ids[0]))
    return loops


def _connect_crossings(mesh: TriangleMesh, inc: np.ndarray,
                       crossed: np.ndarray) -> dict[int, list[int]]:
    """Adjacency between crossings, paired around shared vertices.

    At each vertex the incident faces are walked in fan order; every
    maximal run of excluded faces is bounded by exactly two crossed
    edges, which become consecutive. Each crossing has two endpoint
    vertices and gains at most one neighbour per endpoint, so degrees
    never exceed two.
    """
    adj: dict[int, list[int]] = {int(e): [] for e in crossed}
    crossed_set = set(adj)
    verts = sorted({int(v) for e in crossed for v in mesh.edges[e]})
    vset = set(verts)
    incident: dict[int, list[int]] = {v: [] for v in verts}
    for fi, tri in enumerate(mesh.faces):
        for v in tri:
            v = int(v)
            if v in vset:
                incident[v].append(fi)

    for v in verts:
        fan = _face_fan(mesh, v, incident[v])
        if fan is None:
            # Open or non-manifold fan: only the unambiguous case links.
            ce = [e for e in (mesh.edge_id(v, int(u))
                              for f in incident[v]
                              for u in mesh.faces[f] if int(u) != v)
                  if e in crossed_set]
            ce = sorted(set(ce))
            if len(ce) == 2:
                adj[ce[0]].append(ce[1])
                adj[ce[1]].append(ce[0])
            continue
        m = len(fan)
        changes = []  # (position, crossing edge id) between fan[i], fan[i+1]
        for i in range(m):
            f0, f1 = fan[i], fan[(i + 1) % m]
            if inc[f0] != inc[f1]:
                shared = set(map(int, mesh.faces[f0])) & \
                    set(map(int, mesh.faces[f1])) - {v}
                changes.append((i, mesh.edge_id(v, shared.pop())))
        for k in range(len(changes)):
            i0, e0 = changes[k]
            i1, e1 = changes[(k + 1) % len(changes)]
            if not inc[fan[(i0 + 1) % m]] and e0 != e1:
                adj[e0].append(e1)
                adj[e1].append(e0)
    return adj


def _face_fan(mesh: TriangleMesh, v: int, faces: list[int]):
    """Faces around vertex v in adjacency order, or None if the fan does
    not close into a single cycle (mesh boundary or non-manifold)."""
    if len(faces) < 3:
        return None
    remaining = set(faces)
    start = min(faces)
    fan = [start]
    remaining.discard(start)
    cur = start
    prev = -1
    while True:
        tri = mesh.faces[cur]
        k = int(np.where(tri == v)[0][0])
        # Edges of cur containing v sit in slots k and (k+2)%3.
        cand = [int(mesh.face_neighbors[cur, k]),
                int(mesh.face_neighbors[cur, (k + 2) % 3])]
        nxt = None
        for c in cand:
            if c >= 0 and c != prev and (c in remaining or
                                         (c == start and len(fan) > 2)):
                nxt = c
                break
        if nxt is None or nxt == start:
            break
        fan.append(nxt)
        remaining.discard(nxt)
        prev, cur = cur, nxt
    if remaining or nxt != start:
        return None
    return fan


def _walk_chains(adj: dict[int, list[int]]):
    """Decompose the crossing graph into chains, reusing no connection.

    Degree-2 components come out as closed loops. Anything else (pinch
    points from degenerate masks) is emitted as open chains starting at
    odd-degree crossings.
    """
    used: set[tuple[int, int]] = set()
    visited: set[int] = set()
    chains = []

    def take(a: int, b: int) -> None:
        used.add((a, b))
        used.add((b, a))

    def walk(start: int):
        chain = [start]
        cur = start
        while True:
            nxt = None
            for nb in adj[cur]:
                if (cur, nb) not in used:
                    nxt = nb
                    break
            if nxt is None:
                return chain, False
            take(cur, nxt)
            if nxt == start:
                return chain, len(chain) >= 3
            chain.append(nxt)
            cur = nxt

    # Open chains first, seeded at crossings with odd degree.
    nodes = sorted(adj)
    for n in nodes:
        while len(adj[n]) % 2 == 1 and any(
                (n, nb) not in used for nb in adj[n]):
            chain, closed = walk(n)
            chains.append((chain, closed))
            visited.update(chain)
    for n in nodes:
        if n not in visited:
            chain, closed = walk(n)
            chains.append((chain, closed))
            visited.update(chain)
    return chains


def _orient_loop(mesh: TriangleMesh, mask: FaceMask, loop: BoundaryLoop
                 ) -> None:
    """Flip the loop in place so the included side lies on the left.

    Each consecutive crossing pair votes: the direction from the included
    to the excluded face centroid of the first crossing's edge should
    point to the right of the walk. Majority wins; a tie keeps the
    original order.
    """
    n = len(loop)
    if n < 2:
        return
    pos = loop.positions(mesh)
    inc = mask.included
    ef = mesh.edge_faces
    centroids = mesh.face_centroids()
    pairs = range(n) if loop.closed else range(n - 1)
    vote = 0.0
    for k in pairs:
        e0 = int(loop.edge_ids[k])
        e1 = int(loop.edge_ids[(k + 1) % n])
        shared = set(map(int, mesh.edges[e0])) & set(map(int, mesh.edges[e1]))
        if not shared:
            continue
        up = mesh.vertex_normals[shared.pop()]
        d = pos[(k + 1) % n] - pos[k]
        fa, fb = ef[e0]
        f_in, f_out = (fa, fb) if inc[fa] else (fb, fa)
        w = centroids[f_out] - centroids[f_in]
        vote += np.sign(np.dot(np.cross(d, up), w))
    if vote < 0.0:
        loop.edge_ids = loop.edge_ids[::-1].copy()
        loop.t = loop.t[::-1].copy()


def build_field(mesh: TriangleMesh, loops: list[BoundaryLoop],
                mask: FaceMask) -> MeshField:
    """Signed geodesic distance and gradient fields from boundary loops.

    Every vertex of a crossed edge seeds the geodesic front with an offset
    equal to its straight-line distance to the nearest crossing on that
    edge; distances then propagate along mesh edges. The sign comes from
    the mask (a vertex touching any included face is feasible, negative).
    Gradients are the per-face linear gradients of the signed field,
    area-averaged onto vertices and normalized.
    """
    mask.validate(mesh)
    if not loops:
        raise EmptyBoundary("cannot build a field without boundary loops")

    sources: list[tuple[int, float]] = []
    crossed_vertex = np.zeros(mesh.num_vertices, dtype=bool)
    for loop in loops:
        e = mesh.edges[loop.edge_ids]
        a = mesh.vertices[e[:, 0]]
        b = mesh.vertices[e[:, 1]]
        x = a + loop.t[:, None] * (b - a)
        da = np.linalg.norm(x - a, axis=1)
        db = np.linalg.norm(x - b, axis=1)
        sources.extend(zip(e[:, 0], da))
        sources.extend(zip(e[:, 1], db))
        crossed_vertex[e.ravel()] = True

    inc = mask.included
    feasible = np.zeros(mesh.num_vertices, dtype=bool)
    feasible[mesh.faces[inc].ravel()] = True
    touches_excluded = np.zeros(mesh.num_vertices, dtype=bool)
    touches_excluded[mesh.faces[~inc].ravel()] = True
    mixed = feasible & touches_excluded
    bad = mixed & ~crossed_vertex
    if bad.any():
        raise InconsistentMask(
            f"{int(bad.sum())} vertices touch both flags but sit on no "
            "boundary edge (first: vertex %d)" % int(np.flatnonzero(bad)[0]))

    unsigned = geodesic_from_sources(mesh, sources)
    signed = np.where(feasible, -unsigned, unsigned)

    grad = _vertex_gradients(mesh, signed)
    return MeshField(mesh_checksum=mesh.checksum(),
                     vertex_distance=signed, vertex_gradient=grad)


def _vertex_gradients(mesh: TriangleMesh, values: np.ndarray) -> np.ndarray:
    """Unit per-vertex gradient of a piecewise-linear vertex field."""
    v, f = mesh.vertices, mesh.faces
    a, b, c = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    fa = values[f[:, 0]][:, None]
    fb = values[f[:, 1]][:, None]
    fc = values[f[:, 2]][:, None]
    n = mesh.face_normals
    face_grad = np.cross(n, fa * (c - b) + fb * (a - c) + fc * (b - a))
    face_grad /= (2.0 * mesh.face_areas)[:, None]

    weighted = face_grad * mesh.face_areas[:, None]
    out = np.zeros_like(v)
    np.add.at(out, f[:, 0], weighted)
    np.add.at(out, f[:, 1], weighted)
    np.add.at(out, f[:, 2], weighted)
    norms = np.linalg.norm(out, axis=1)
    keep = norms >= _DEGENERATE_NORM
    out[keep] /= norms[keep, None]
    out[~keep] = 0.0
    return out


# -- queries ----------------------------------------------------------------


def distance_at(field: MeshField, mesh: TriangleMesh, sp: SurfacePoint
                ) -> float:
    """Signed distance interpolated at a known surface point."""
    vals = field.vertex_distance[mesh.faces[sp.face]]
    return float(sp.bary @ vals)


def gradient_at(field: MeshField, mesh: TriangleMesh, sp: SurfacePoint):
    """(unit gradient, degenerate flag) at a known surface point."""
    g = sp.bary @ field.vertex_gradient[mesh.faces[sp.face]]
    norm = float(np.linalg.norm(g))
    if norm < _DEGENERATE_NORM:
        return np.zeros(3), True
    return g / norm, False


def query_distance(field: MeshField, mesh: TriangleMesh, p,
                   hint_face: int | None = None) -> float:
    """Signed distance for an arbitrary 3D point via surface projection."""
    return distance_at(field, mesh, closest_point(mesh, p, hint_face))


def query_gradient(field: MeshField, mesh: TriangleMesh, p,
                   hint_face: int | None = None):
    """(unit gradient, degenerate flag) for an arbitrary 3D point."""
    return gradient_at(field, mesh, closest_point(mesh, p, hint_face))


# -- persistence -------------------------------------------------------------


def field_to_dict(field: MeshField) -> dict:
    return {
        "vertex_distance": field.vertex_distance.tolist(),
        "vertex_gradient": field.vertex_gradient.ravel().tolist(),
        "mesh_checksum": "%016x" % field.mesh_checksum,
    }


def field_from_dict(data: dict) -> MeshField:
    try:
        dist = np.asarray(data["vertex_distance"], dtype=np.float64)
        grad = np.asarray(data["vertex_gradient"], dtype=np.float64)
        raw = data["mesh_checksum"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed field payload: {exc}") from None
    checksum = int(raw, 16) if isinstance(raw, str) else int(raw)
    if grad.size != 3 * dist.size:
        raise ValueError("vertex_gradient length must be 3x vertex_distance")
    return MeshField(mesh_checksum=checksum, vertex_distance=dist,
                     vertex_gradient=grad.reshape(-1, 3))


def save_field(field: MeshField, path) -> None:
    Path(path).write_text(json.dumps(field_to_dict(field)), encoding="utf-8")


def load_field(path, mesh: TriangleMesh | None = None) -> MeshField:
    field = field_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    if mesh is not None:
        field.validate(mesh)
    return field
