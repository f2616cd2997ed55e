"""Feasibility constraints g(p) <= 0 and their penalty terms.

Three constraint kinds share one interface: half-space planes, spheres
(either side), and painted free-form regions backed by a signed mesh
field. A point is feasible when g(p) <= 0. Infeasible points pay
mu * max(0, g)^power, whose gradient drives particles back inside.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import fields
from .fields import FaceMask, MeshField
from .geometry import SurfacePoint, TriangleMesh


@dataclass(frozen=True)
class Plane:
    """Half-space boundary; the normal points toward the feasible side."""

    origin: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=np.float64).reshape(3)
        n = np.asarray(self.normal, dtype=np.float64).reshape(3)
        ln = np.linalg.norm(n)
        if ln == 0.0:
            raise ValueError("plane normal must be nonzero")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "normal", n / ln)


EXCLUDE_INSIDE = "exclude_inside"
EXCLUDE_OUTSIDE = "exclude_outside"


@dataclass(frozen=True)
class Sphere:
    """Spherical boundary; mode picks which side is infeasible."""

    center: np.ndarray
    radius: float
    mode: str = EXCLUDE_INSIDE

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64).reshape(3)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0.0:
            raise ValueError("sphere radius must be positive")
        if self.mode not in (EXCLUDE_INSIDE, EXCLUDE_OUTSIDE):
            raise ValueError(f"unknown sphere mode {self.mode!r}")


@dataclass(frozen=True)
class FreeForm:
    """Painted-region constraint: g(p) is the signed field of the mesh.

    ``face_mask``, when present, remembers the paint the field was built
    from so serialization can stay in the compact mask form.
    """

    field: MeshField
    mesh: TriangleMesh
    face_mask: np.ndarray | None = None

    def __post_init__(self):
        self.field.validate(self.mesh)


Constraint = Plane | Sphere | FreeForm


def evaluate(c: Constraint, p, sp: SurfacePoint | None = None) -> float:
    """Signed feasibility value g(p); negative means feasible.

    For free-form constraints an already-computed surface projection of
    p may be passed as ``sp`` to skip the closest-point query.
    """
    p = np.asarray(p, dtype=np.float64)
    if isinstance(c, Plane):
        return float(-np.dot(c.normal, p - c.origin))
    if isinstance(c, Sphere):
        r = float(np.linalg.norm(p - c.center))
        return c.radius - r if c.mode == EXCLUDE_INSIDE else r - c.radius
    if sp is None:
        return fields.query_distance(c.field, c.mesh, p)
    return fields.distance_at(c.field, c.mesh, sp)


def gradient(c: Constraint, p, sp: SurfacePoint | None = None):
    """(dg/dp, degenerate flag).

    The flag is set where the gradient is undefined: a point at a sphere
    center, or a free-form query landing on a flat spot of the field; in
    both cases the vector is zero.
    """
    p = np.asarray(p, dtype=np.float64)
    if isinstance(c, Plane):
        return -c.normal, False
    if isinstance(c, Sphere):
        d = p - c.center
        r = float(np.linalg.norm(d))
        if r == 0.0:
            return np.zeros(3), True
        u = d / r
        return (-u, False) if c.mode == EXCLUDE_INSIDE else (u, False)
    if sp is None:
        return fields.query_gradient(c.field, c.mesh, p)
    return fields.gradient_at(c.field, c.mesh, sp)


def penalty(c: Constraint, p, mu: float, power: int = 2,
            sp: SurfacePoint | None = None) -> float:
    """mu * max(0, g(p))**power; zero everywhere feasible."""
    _check_mu_power(mu, power)
    gplus = max(0.0, evaluate(c, p, sp))
    return mu * gplus ** power


def penalty_gradient(c: Constraint, p, mu: float, power: int = 2,
                     sp: SurfacePoint | None = None) -> np.ndarray:
    """Gradient of :func:`penalty` at p; zero for feasible points.

    With power 2 the gradient is continuous across the boundary
    (2*mu*g+ -> 0 as g -> 0); with power 1 it jumps from 0 to mu.
    """
    _check_mu_power(mu, power)
    g = evaluate(c, p, sp)
    if g <= 0.0:
        return np.zeros(3)
    direction, degenerate = gradient(c, p, sp)
    if degenerate:
        return np.zeros(3)
    if power == 1:
        return mu * direction
    return 2.0 * mu * g * direction


def _check_mu_power(mu: float, power: int) -> None:
    if mu < 0.0:
        raise ValueError("mu must be >= 0")
    if power not in (1, 2):
        raise ValueError("penalty power must be 1 or 2")


def total_penalty(constraints, p, mu: float, power: int = 2,
                  sp: SurfacePoint | None = None) -> float:
    return sum(penalty(c, p, mu, power, sp) for c in constraints)


def total_penalty_gradient(constraints, p, mu: float, power: int = 2,
                           sp: SurfacePoint | None = None) -> np.ndarray:
    out = np.zeros(3)
    for c in constraints:
        out += penalty_gradient(c, p, mu, power, sp)
    return out


def default_mu(mesh: TriangleMesh) -> float:
    """Penalty weight scaled to the shape: 100 / bbox diagonal."""
    return 100.0 / mesh.bbox_diagonal


# -- violation reporting ------------------------------------------------------


@dataclass
class ViolationReport:
    """Every (shape, particle, constraint) with g above tolerance."""

    tolerance: float
    per_shape: list  # [[(particle, constraint, g), ...] per shape]
    max_g: float = dc_field(init=False)
    count: int = dc_field(init=False)

    def __post_init__(self):
        entries = [g for shape in self.per_shape for (_, _, g) in shape]
        self.max_g = max(entries) if entries else 0.0
        self.count = len(entries)


def check_violations(system, constraints_per_shape, tolerance: float
                     ) -> ViolationReport:
    """Enumerate all particle-constraint pairs with g > tolerance.

    ``system`` is anything with a ``positions`` attribute holding one
    (J, 3) array per shape, or such a list directly.
    """
    positions = getattr(system, "positions", system)
    per_shape = []
    for pts, cons in zip(positions, constraints_per_shape):
        entries = []
        for j, p in enumerate(np.asarray(pts, dtype=np.float64)):
            for m, c in enumerate(cons):
                g = evaluate(c, p)
                if g > tolerance:
                    entries.append((j, m, g))
        per_shape.append(entries)
    return ViolationReport(tolerance=tolerance, per_shape=per_shape)


# -- persistence --------------------------------------------------------------
# One JSON file per shape. Constraint order within a shape is planes,
# then spheres, then ffcs; violation indices refer to that order.


def constraints_to_dict(constraints) -> dict:
    planes, spheres, ffcs = [], [], []
    for c in constraints:
        if isinstance(c, Plane):
            planes.append({"origin": c.origin.tolist(),
                           "normal": c.normal.tolist()})
        elif isinstance(c, Sphere):
            spheres.append({"center": c.center.tolist(),
                            "radius": c.radius, "mode": c.mode})
        elif isinstance(c, FreeForm):
            if c.face_mask is not None:
                ffcs.append({"face_mask":
                             [int(b) for b in c.face_mask]})
            else:
                ffcs.append({"field": fields.field_to_dict(c.field)})
        else:
            raise TypeError(f"not a constraint: {c!r}")
    return {"planes": planes, "spheres": spheres, "ffcs": ffcs}


def constraints_from_dict(data: dict, mesh: TriangleMesh) -> list:
    """Parse one shape's constraint file; mask-form FFC fields are built
    against ``mesh``. Raises ValueError on malformed payloads."""
    if not isinstance(data, dict):
        raise ValueError("constraint payload must be a JSON object")
    unknown = set(data) - {"planes", "spheres", "ffcs"}
    if unknown:
        raise ValueError(f"unknown constraint sections: {sorted(unknown)}")
    out: list[Constraint] = []
    try:
        for rec in data.get("planes", []):
            out.append(Plane(origin=rec["origin"], normal=rec["normal"]))
        for rec in data.get("spheres", []):
            out.append(Sphere(center=rec["center"], radius=rec["radius"],
                              mode=rec.get("mode", EXCLUDE_INSIDE)))
        for rec in data.get("ffcs", []):
            out.append(_ffc_from_dict(rec, mesh))
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed constraint payload: {exc!r}") from None
    return out


def _ffc_from_dict(rec: dict, mesh: TriangleMesh) -> FreeForm:
    if "face_mask" in rec:
        mask = FaceMask.for_mesh(mesh, np.asarray(rec["face_mask"],
                                                  dtype=bool))
        loops = fields.trace_boundary_loops(mesh, mask)
        fld = fields.build_field(mesh, loops, mask)
        return FreeForm(field=fld, mesh=mesh, face_mask=mask.included)
    if "field" in rec:
        fld = fields.field_from_dict(rec["field"])
        return FreeForm(field=fld, mesh=mesh)
    raise ValueError("ffc entry needs a 'face_mask' or 'field' key")


def save_constraints(constraints, path) -> None:
    Path(path).write_text(json.dumps(constraints_to_dict(constraints)),
                          encoding="utf-8")


def load_constraints(path, mesh: TriangleMesh) -> list:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValueError(f"constraint file is not valid JSON: {exc}") from None
    return constraints_from_dict(data, mesh)
