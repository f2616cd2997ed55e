"""Triangle mesh core: loading, spatial queries, and edge-graph geodesics.

Everything downstream (constraint fields, the particle optimizer, the data
generators) works on the immutable :class:`TriangleMesh` defined here. The
mesh owns its adjacency so queries never rebuild it, and all arrays are
frozen after construction, which makes concurrent read-only use safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra


class MeshError(ValueError):
    """Base class for mesh construction / parsing failures."""


class ParseError(MeshError):
    """File could not be parsed as a supported mesh format."""


class NonTriangleFace(MeshError):
    """A face with a vertex count other than 3 was encountered."""


class EmptyMesh(MeshError):
    """No usable vertices or faces remain after parsing and cleanup."""


class NoSources(ValueError):
    """Geodesic propagation was asked to run without any seed vertices."""


_DEGENERATE_REL_AREA = 1e-14

# FNV-1a 64-bit parameters
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _FNV_MASK
    return h


class TriangleMesh:
    """Indexed triangle surface with precomputed adjacency.

    Parameters
    ----------
    vertices : (V, 3) array_like
        Vertex positions in model units.
    faces : (F, 3) array_like
        Vertex index triples. Faces with (numerically) zero area are
        dropped during construction; the number removed is recorded in
        ``dropped_faces``.

    Notes
    -----
    Instances are immutable: the backing arrays are marked read-only and
    every query method is side-effect free, so a mesh may be shared across
    threads. Boundary edges (one incident face) are tolerated and treated
    as ordinary edges; edges with more than two incident faces are kept in
    the adjacency lists but such meshes are outside the supported class.
    """

    def __init__(self, vertices, faces):
        v = np.ascontiguousarray(vertices, dtype=np.float64)
        f = np.ascontiguousarray(faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError("vertices must be an (V, 3) array")
        if f.size == 0:
            raise EmptyMesh("mesh has no faces")
        if f.ndim != 2 or f.shape[1] != 3:
            raise NonTriangleFace("faces must be an (F, 3) index array")
        if v.shape[0] == 0:
            raise EmptyMesh("mesh has no vertices")
        if f.min() < 0 or f.max() >= v.shape[0]:
            raise MeshError("face index out of range")

        # Drop zero-area faces (repeated indices or exact slivers).
        cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        areas = 0.5 * np.linalg.norm(cross, axis=1)
        scale = float(np.max(np.abs(v))) if v.size else 1.0
        keep = areas > _DEGENERATE_REL_AREA * max(scale, 1e-300) ** 2
        self.dropped_faces = int(np.count_nonzero(~keep))
        f = f[keep]
        if f.shape[0] == 0:
            raise EmptyMesh("all faces degenerate")

        self.vertices = v
        self.faces = f
        self.bbox_min = v.min(axis=0)
        self.bbox_max = v.max(axis=0)

        self._build_adjacency()
        self._build_normals()
        for arr in (self.vertices, self.faces, self.edges, self.edge_faces,
                    self.face_neighbors, self.face_normals, self.face_areas,
                    self.vertex_normals, self.bbox_min, self.bbox_max):
            arr.flags.writeable = False
        self._bvh = None
        self._checksum = None

    # -- construction helpers -------------------------------------------

    def _build_adjacency(self):
        f = self.faces
        # Undirected edges, each listed once.
        raw = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        raw.sort(axis=1)
        edges, inverse = np.unique(raw, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)  # shape differs across numpy versions
        self.edges = edges
        nf = f.shape[0]
        face_of_entry = np.tile(np.arange(nf), 3)

        # edge_faces[e] = up to two incident faces (-1 padded).
        ef = np.full((edges.shape[0], 2), -1, dtype=np.int64)
        extra = 0
        for entry, e in enumerate(inverse):
            row = ef[e]
            if row[0] < 0:
                row[0] = face_of_entry[entry]
            elif row[1] < 0:
                row[1] = face_of_entry[entry]
            else:
                extra += 1  # non-manifold edge; keep the first two faces
        self.edge_faces = ef
        self.nonmanifold_edges = extra

        # face_neighbors[f, k] = face across edge (t[k], t[(k+1)%3]).
        edge_of_face = inverse.reshape(3, nf).T  # column k is edge slot k
        fn = np.full((nf, 3), -1, dtype=np.int64)
        for fi in range(nf):
            for k in range(3):
                a, b = ef[edge_of_face[fi, k]]
                fn[fi, k] = b if a == fi else a
        self.face_neighbors = fn
        self._edge_of_face = edge_of_face
        self._edge_index = {(int(a), int(b)): i
                            for i, (a, b) in enumerate(edges)}

    def _build_normals(self):
        v, f = self.vertices, self.faces
        cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        norms = np.linalg.norm(cross, axis=1)
        self.face_areas = 0.5 * norms
        self.face_normals = cross / norms[:, None]
        vn = np.zeros_like(v)
        np.add.at(vn, f[:, 0], cross)
        np.add.at(vn, f[:, 1], cross)
        np.add.at(vn, f[:, 2], cross)
        lens = np.linalg.norm(vn, axis=1)
        lens[lens == 0.0] = 1.0
        self.vertex_normals = vn / lens[:, None]

    # -- basic properties -------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def bbox_diagonal(self) -> float:
        return float(np.linalg.norm(self.bbox_max - self.bbox_min))

    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_faces

    def edge_id(self, a: int, b: int) -> int:
        """Index of the undirected edge (a, b); KeyError if absent."""
        return self._edge_index[(a, b) if a < b else (b, a)]

    def mean_edge_length(self) -> float:
        d = self.vertices[self.edges[:, 0]] - self.vertices[self.edges[:, 1]]
        return float(np.mean(np.linalg.norm(d, axis=1)))

    def face_centroids(self) -> np.ndarray:
        return self.vertices[self.faces].mean(axis=1)

    def checksum(self) -> int:
        """FNV-1a 64-bit hash of the little-endian vertex bytes."""
        if self._checksum is None:
            self._checksum = fnv1a64(
                np.ascontiguousarray(self.vertices, dtype="<f8").tobytes())
        return self._checksum

    def interpolated_normal(self, face: int, bary) -> np.ndarray:
        """Unit vertex-normal blend at a barycentric surface location."""
        n = self.vertex_normals[self.faces[face]]
        out = bary[0] * n[0] + bary[1] * n[1] + bary[2] * n[2]
        ln = np.linalg.norm(out)
        if ln == 0.0:
            return self.face_normals[face].copy()
        return out / ln

    # -- closest point queries --------------------------------------------

    def bvh(self) -> "_Bvh":
        if self._bvh is None:
            self._bvh = _Bvh(self)
        return self._bvh


@dataclass(frozen=True)
class SurfacePoint:
    """A point on a mesh: face index, barycentric weights, 3D position."""

    face: int
    bary: np.ndarray
    position: np.ndarray


def _closest_on_triangle(ax, ay, az, bx, by, bz, cx, cy, cz, px, py, pz):
    """Closest point on one triangle, scalar math.

    Returns (squared distance, u, v, w) with barycentric weights for the
    triangle corners a, b, c. Region classification follows Ericson's
    'Real-Time Collision Detection' construction.
    """
    abx, aby, abz = bx - ax, by - ay, bz - az
    acx, acy, acz = cx - ax, cy - ay, cz - az
    apx, apy, apz = px - ax, py - ay, pz - az
    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        dx, dy, dz = apx, apy, apz
        return dx * dx + dy * dy + dz * dz, 1.0, 0.0, 0.0

    bpx, bpy, bpz = px - bx, py - by, pz - bz
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz
    if d3 >= 0.0 and d4 <= d3:
        dx, dy, dz = bpx, bpy, bpz
        return dx * dx + dy * dy + dz * dz, 0.0, 1.0, 0.0

    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        t = d1 / (d1 - d3)
        qx, qy, qz = ax + t * abx, ay + t * aby, az + t * abz
        dx, dy, dz = px - qx, py - qy, pz - qz
        return dx * dx + dy * dy + dz * dz, 1.0 - t, t, 0.0

    cpx, cpy, cpz = px - cx, py - cy, pz - cz
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz
    if d6 >= 0.0 and d5 <= d6:
        dx, dy, dz = cpx, cpy, cpz
        return dx * dx + dy * dy + dz * dz, 0.0, 0.0, 1.0

    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        t = d2 / (d2 - d6)
        qx, qy, qz = ax + t * acx, ay + t * acy, az + t * acz
        dx, dy, dz = px - qx, py - qy, pz - qz
        return dx * dx + dy * dy + dz * dz, 1.0 - t, 0.0, t

    va = d3 * d6 - d5 * d4
    if va <= 0.0 and d4 - d3 >= 0.0 and d5 - d6 >= 0.0:
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        qx = bx + t * (cx - bx)
        qy = by + t * (cy - by)
        qz = bz + t * (cz - bz)
        dx, dy, dz = px - qx, py - qy, pz - qz
        return dx * dx + dy * dy + dz * dz, 0.0, 1.0 - t, t

    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    u = 1.0 - v - w
    qx = ax + abx * v + acx * w
    qy = ay + aby * v + acy * w
    qz = az + abz * v + acz * w
    dx, dy, dz = px - qx, py - qy, pz - qz
    return dx * dx + dy * dy + dz * dz, u, v, w


class _Bvh:
    """Median-split AABB tree over the faces, leaf size 8.

    The tree is flat arrays plus one python list of per-face corner tuples;
    queries run scalar python math, which beats small-array numpy calls at
    this node size.
    """

    LEAF_SIZE = 8

    def __init__(self, mesh: TriangleMesh):
        v, f = mesh.vertices, mesh.faces
        tv = v[f]  # (F, 3, 3)
        self._tris = [tuple(t.ravel()) for t in tv]
        lo = tv.min(axis=1)
        hi = tv.max(axis=1)
        cent = tv.mean(axis=1)

        order = np.arange(f.shape[0])
        boxes_min, boxes_max = [], []
        lefts, rights, starts, counts = [], [], [], []

        def build(idx: np.ndarray) -> int:
            node = len(boxes_min)
            boxes_min.append(lo[idx].min(axis=0))
            boxes_max.append(hi[idx].max(axis=0))
            lefts.append(-1)
            rights.append(-1)
            starts.append(-1)
            counts.append(-1)
            if idx.size <= self.LEAF_SIZE:
                starts[node] = len(leaf_faces)
                counts[node] = idx.size
                leaf_faces.extend(int(i) for i in idx)
                return node
            c = cent[idx]
            axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
            half = idx.size // 2
            part = np.argpartition(c[:, axis], half)
            lefts[node] = build(idx[part[:half]])
            rights[node] = build(idx[part[half:]])
            return node

        leaf_faces: list[int] = []
        build(order)
        self._leaf_faces = leaf_faces
        self._bmin = [tuple(b) for b in boxes_min]
        self._bmax = [tuple(b) for b in boxes_max]
        self._left = lefts
        self._right = rights
        self._start = starts
        self._count = counts

    def _box_dist2(self, node: int, px, py, pz) -> float:
        mn = self._bmin[node]
        mx = self._bmax[node]
        dx = mn[0] - px if px < mn[0] else (px - mx[0] if px > mx[0] else 0.0)
        dy = mn[1] - py if py < mn[1] else (py - mx[1] if py > mx[1] else 0.0)
        dz = mn[2] - pz if pz < mn[2] else (pz - mx[2] if pz > mx[2] else 0.0)
        return dx * dx + dy * dy + dz * dz

    def _test_face(self, fi, px, py, pz, best):
        t = self._tris[fi]
        d2, u, v, w = _closest_on_triangle(
            t[0], t[1], t[2], t[3], t[4], t[5], t[6], t[7], t[8], px, py, pz)
        if d2 < best[0]:
            best[0] = d2
            best[1] = fi
            best[2] = u
            best[3] = v
            best[4] = w

    def query(self, p, hint_face: int | None = None):
        """Exact nearest face/barycentric/d2 for point p.

        A hint face (e.g. the face a particle sat on before a small move)
        seeds the search with a tight upper bound so most branches prune
        immediately. Results are identical with or without the hint.
        """
        px, py, pz = float(p[0]), float(p[1]), float(p[2])
        best = [math.inf, -1, 0.0, 0.0, 0.0]
        if hint_face is not None and hint_face >= 0:
            self._test_face(hint_face, px, py, pz, best)
        stack = [0]
        while stack:
            node = stack.pop()
            if self._box_dist2(node, px, py, pz) >= best[0]:
                continue
            cnt = self._count[node]
            if cnt >= 0:
                s = self._start[node]
                for fi in self._leaf_faces[s:s + cnt]:
                    self._test_face(fi, px, py, pz, best)
            else:
                l, r = self._left[node], self._right[node]
                dl = self._box_dist2(l, px, py, pz)
                dr = self._box_dist2(r, px, py, pz)
                # Push the farther child first so the nearer is explored first.
                if dl <= dr:
                    if dr < best[0]:
                        stack.append(r)
                    if dl < best[0]:
                        stack.append(l)
                else:
                    if dl < best[0]:
                        stack.append(l)
                    if dr < best[0]:
                        stack.append(r)
        return best[1], (best[2], best[3], best[4]), best[0]


def closest_point(mesh: TriangleMesh, p, hint_face: int | None = None
                  ) -> SurfacePoint:
    """Exact closest surface point to ``p``, BVH-accelerated.

    The result is identical to a brute-force scan over all faces
    (:func:`closest_point_brute`); ties between faces may resolve to a
    different face index at equal distance.
    """
    if mesh.num_faces == 0:
        raise EmptyMesh("closest_point on empty mesh")
    face, (u, v, w), _ = mesh.bvh().query(p, hint_face)
    bary = np.array([u, v, w])
    tri = mesh.vertices[mesh.faces[face]]
    pos = bary @ tri
    return SurfacePoint(face=face, bary=bary, position=pos)


def closest_point_brute(mesh: TriangleMesh, p) -> SurfacePoint:
    """Reference closest-point: vectorized scan over every face."""
    d2, bary = _triangle_distances(mesh, np.asarray(p, dtype=np.float64))
    face = int(np.argmin(d2))
    b = bary[face]
    tri = mesh.vertices[mesh.faces[face]]
    return SurfacePoint(face=face, bary=b, position=b @ tri)


def _triangle_distances(mesh: TriangleMesh, p: np.ndarray):
    """Squared distance and barycentric of closest point, for all faces."""
    tv = mesh.vertices[mesh.faces]
    a, b, c = tv[:, 0], tv[:, 1], tv[:, 2]
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2_ = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    vc = d1 * d4 - d3 * d2_
    vb = d5 * d2_ - d1 * d6
    va = d3 * d6 - d5 * d4

    def safe_div(num, den):
        return num / np.where(den == 0.0, 1.0, den)

    t_ab = np.clip(safe_div(d1, d1 - d3), 0.0, 1.0)
    t_ac = np.clip(safe_div(d2_, d2_ - d6), 0.0, 1.0)
    t_bc = np.clip(safe_div(d4 - d3, (d4 - d3) + (d5 - d6)), 0.0, 1.0)
    denom = np.where(va + vb + vc == 0.0, 1.0, va + vb + vc)
    v_in = vb / denom
    w_in = vc / denom

    zeros = np.zeros(len(a))
    ones = np.ones(len(a))
    conds = [
        (d1 <= 0) & (d2_ <= 0),
        (d3 >= 0) & (d4 <= d3),
        (vc <= 0) & (d1 >= 0) & (d3 <= 0),
        (d6 >= 0) & (d5 <= d6),
        (vb <= 0) & (d2_ >= 0) & (d6 <= 0),
        (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0),
    ]
    u = np.select(conds, [ones, zeros, 1 - t_ab, zeros, 1 - t_ac, zeros],
                  default=1 - v_in - w_in)
    v = np.select(conds, [zeros, ones, t_ab, zeros, zeros, 1 - t_bc],
                  default=v_in)
    w = np.select(conds, [zeros, zeros, zeros, ones, t_ac, t_bc],
                  default=w_in)
    bary = np.stack([u, v, w], axis=1)
    q = np.einsum("ik,ikj->ij", bary, tv)
    dist2 = np.einsum("ij,ij->i", p - q, p - q)
    return dist2, bary


def project_to_surface(mesh: TriangleMesh, p, hint_face: int | None = None
                       ) -> np.ndarray:
    """Position of the closest surface point; idempotent up to rounding."""
    return closest_point(mesh, p, hint_face).position


# -- geodesics -------------------------------------------------------------


def geodesic_from_sources(mesh: TriangleMesh, sources) -> np.ndarray:
    """Multi-source Dijkstra over the edge graph with seed offsets.

    ``sources`` is an iterable of ``(vertex_index, offset)`` pairs; each
    seed starts at its offset and distances propagate along mesh edges
    weighted by Euclidean length. Vertices unreachable from every source
    get ``inf``. Duplicate seeds keep the smallest offset.
    """
    seeds: dict[int, float] = {}
    for vi, off in sources:
        vi = int(vi)
        off = float(off)
        if off < 0.0:
            raise ValueError("source offset must be >= 0")
        if vi < 0 or vi >= mesh.num_vertices:
            raise IndexError(f"source vertex {vi} out of range")
        if vi not in seeds or off < seeds[vi]:
            seeds[vi] = off
    if not seeds:
        raise NoSources("geodesic propagation needs at least one source")

    nv = mesh.num_vertices
    e = mesh.edges
    w = np.linalg.norm(mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]],
                       axis=1)
    # Virtual node nv connects to each seed with weight = its offset.
    sv = np.fromiter(seeds.keys(), dtype=np.int64)
    sw = np.fromiter(seeds.values(), dtype=np.float64)
    rows = np.concatenate([e[:, 0], np.full(sv.shape, nv)])
    cols = np.concatenate([e[:, 1], sv])
    data = np.concatenate([w, sw])
    graph = sparse.csr_matrix((data, (rows, cols)), shape=(nv + 1, nv + 1))
    dist = dijkstra(graph, directed=False, indices=nv)
    return dist[:nv]


# -- file I/O ---------------------------------------------------------------


def load_mesh(path, fmt: str | None = None) -> TriangleMesh:
    """Read an ASCII PLY or OBJ triangle mesh.

    The format is taken from the extension unless ``fmt`` ("ply-ascii" or
    "obj") is given. Only vertex positions and triangle faces are read;
    faces with any other vertex count raise :class:`NonTriangleFace`.
    """
    path = Path(path)
    if fmt is None:
        ext = path.suffix.lower()
        fmt = {"": None, ".ply": "ply-ascii", ".obj": "obj"}.get(ext)
        if fmt is None:
            raise ParseError(f"cannot infer mesh format from {path.name!r}")
    text = path.read_text(encoding="utf-8", errors="replace")
    if fmt == "ply-ascii":
        verts, faces = _parse_ply(text)
    elif fmt == "obj":
        verts, faces = _parse_obj(text)
    else:
        raise ParseError(f"unsupported mesh format {fmt!r}")
    if not verts:
        raise EmptyMesh(f"{path.name}: no vertices")
    if not faces:
        raise EmptyMesh(f"{path.name}: no faces")
    return TriangleMesh(np.array(verts), np.array(faces))


def _parse_ply(text: str):
    lines = iter(text.splitlines())
    try:
        if next(lines).strip() != "ply":
            raise ParseError("missing 'ply' magic")
    except StopIteration:
        raise ParseError("empty file") from None

    elements = []  # (name, count)
    props: dict[str, list[str]] = {}
    fmt_seen = False
    for line in lines:
        tok = line.split()
        if not tok or tok[0] == "comment":
            continue
        if tok[0] == "format":
            if len(tok) < 2 or tok[1] != "ascii":
                raise ParseError("only ascii PLY is supported")
            fmt_seen = True
        elif tok[0] == "element":
            if len(tok) != 3:
                raise ParseError(f"bad element line: {line!r}")
            elements.append((tok[1], int(tok[2])))
            props[tok[1]] = []
        elif tok[0] == "property":
            if not elements:
                raise ParseError("property before element")
            props[elements[-1][0]].append(tok[-1])
        elif tok[0] == "end_header":
            break
        else:
            raise ParseError(f"unexpected header line: {line!r}")
    else:
        raise ParseError("missing end_header")
    if not fmt_seen:
        raise ParseError("missing format line")

    verts: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    for name, count in elements:
        if name == "vertex":
            names = props[name]
            try:
                ix, iy, iz = (names.index(k) for k in ("x", "y", "z"))
            except ValueError:
                raise ParseError("vertex element lacks x/y/z") from None
            for _ in range(count):
                tok = _next_data_line(lines)
                try:
                    verts.append((float(tok[ix]), float(tok[iy]),
                                  float(tok[iz])))
                except (ValueError, IndexError):
                    raise ParseError(f"bad vertex line: {tok}") from None
        elif name == "face":
            for _ in range(count):
                tok = _next_data_line(lines)
                try:
                    n = int(tok[0])
                    idx = [int(t) for t in tok[1:1 + n]]
                except (ValueError, IndexError):
                    raise ParseError(f"bad face line: {tok}") from None
                if n != 3 or len(idx) != 3:
                    raise NonTriangleFace(
                        f"face with {n} vertices (triangles only)")
                faces.append(tuple(idx))
        else:
            for _ in range(count):  # skip unknown elements
                _next_data_line(lines)
    return verts, faces


def _next_data_line(lines):
    for line in lines:
        tok = line.split()
        if tok:
            return tok
    raise ParseError("unexpected end of file")


def _parse_obj(text: str):
    verts: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    for ln, line in enumerate(text.splitlines(), 1):
        tok = line.split()
        if not tok or tok[0].startswith("#"):
            continue
        if tok[0] == "v":
            if len(tok) < 4:
                raise ParseError(f"line {ln}: bad vertex")
            try:
                verts.append((float(tok[1]), float(tok[2]), float(tok[3])))
            except ValueError:
                raise ParseError(f"line {ln}: bad vertex") from None
        elif tok[0] == "f":
            refs = tok[1:]
            if len(refs) != 3:
                raise NonTriangleFace(
                    f"line {ln}: face with {len(refs)} vertices")
            idx = []
            for r in refs:
                try:
                    i = int(r.split("/")[0])
                except ValueError:
                    raise ParseError(f"line {ln}: bad face ref {r!r}") from None
                if i == 0:
                    raise ParseError(f"line {ln}: zero face index")
                idx.append(i - 1 if i > 0 else len(verts) + i)
            faces.append(tuple(idx))
        # all other records (vn, vt, usemtl, ...) are ignored
    return verts, faces


def save_mesh(mesh: TriangleMesh, path) -> None:
    """Write an ASCII PLY or OBJ file (by extension), lossless precision."""
    path = Path(path)
    ext = path.suffix.lower()
    if ext == ".ply":
        out = ["ply", "format ascii 1.0",
               f"element vertex {mesh.num_vertices}",
               "property double x", "property double y",
               "property double z",
               f"element face {mesh.num_faces}",
               "property list uchar int vertex_indices", "end_header"]
        out.extend("%.17g %.17g %.17g" % tuple(v) for v in mesh.vertices)
        out.extend("3 %d %d %d" % tuple(f) for f in mesh.faces)
    elif ext == ".obj":
        out = ["v %.17g %.17g %.17g" % tuple(v) for v in mesh.vertices]
        out.extend("f %d %d %d" % (f[0] + 1, f[1] + 1, f[2] + 1)
                   for f in mesh.faces)
    else:
        raise ParseError(f"unsupported output format {ext!r}")
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
