"""HTTP service for the constraint-painting UI.

Serves shape listings, mesh geometry, constraint documents (read/write),
free-form boundary previews, and optimized particles for one project.
Constraint writes are validated against the owning mesh, serialized per
shape, and written atomically (temp file + rename) so a crash can never
leave a half-written document behind. Optimization itself stays in the
CLI; the service is a thin editing layer.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.staticfiles import StaticFiles

from . import constraints as cons
from . import fields
from .geometry import load_mesh
from .optimizer import load_particles
from .project import Project

_EMPTY_DOC = {"planes": [], "spheres": [], "ffcs": []}


def _default_ui_dir() -> Path | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


class _ShapeStore:
    """Lazy mesh cache plus per-shape write locks for one project."""

    def __init__(self, project: Project):
        self.project = project
        self._meshes: dict[int, object] = {}
        self._mesh_guard = threading.Lock()
        self._write_locks = [threading.Lock() for _ in project.shapes]

    def entry(self, shape_id: int):
        if not 0 <= shape_id < len(self.project.shapes):
            raise HTTPException(404, f"no shape with id {shape_id}")
        return self.project.shapes[shape_id]

    def mesh(self, shape_id: int):
        entry = self.entry(shape_id)
        with self._mesh_guard:
            if shape_id not in self._meshes:
                if not entry.mesh_path.is_file():
                    raise HTTPException(404, f"mesh file missing: {entry.mesh_path.name}")
                self._meshes[shape_id] = load_mesh(entry.mesh_path)
            return self._meshes[shape_id]

    def constraint_path(self, shape_id: int) -> Path:
        entry = self.entry(shape_id)
        if entry.constraint_path is not None:
            return entry.constraint_path
        return self.project.root / "constraints" / f"{entry.name}.json"

    def write_doc(self, shape_id: int, doc) -> None:
        path = self.constraint_path(shape_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._write_locks[shape_id]:
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_text(json.dumps(doc) + "\n", encoding="utf-8")
            os.replace(tmp, path)

    def read_doc(self, shape_id: int):
        path = self.constraint_path(shape_id)
        if not path.is_file():
            return dict(_EMPTY_DOC)
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise HTTPException(500, f"stored constraint file is corrupt: {exc}")


async def _json_body(request: Request):
    try:
        return json.loads(await request.body())
    except json.JSONDecodeError as exc:
        raise HTTPException(400, f"body is not valid JSON: {exc}")


def create_app(project: Project, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="roiform constraint service")
    store = _ShapeStore(project)

    @app.get("/api/shapes")
    def list_shapes():
        return [
            {
                "id": i,
                "name": e.name,
                "mesh_url": f"/api/shapes/{i}/mesh",
                "constraint_url": f"/api/shapes/{i}/constraints",
            }
            for i, e in enumerate(project.shapes)
        ]

    @app.get("/api/shapes/{shape_id}/mesh")
    def get_mesh(shape_id: int):
        mesh = store.mesh(shape_id)
        return {
            "vertices": mesh.vertices.tolist(),
            "faces": mesh.faces.tolist(),
        }

    @app.get("/api/shapes/{shape_id}/constraints")
    def get_constraints(shape_id: int):
        store.entry(shape_id)
        return store.read_doc(shape_id)

    def _validate_doc(shape_id: int, doc) -> None:
        if not isinstance(doc, dict):
            raise HTTPException(400, "constraint document must be a JSON object")
        try:
            cons.constraints_from_dict(doc, store.mesh(shape_id))
        except HTTPException:
            raise
        except (ValueError, KeyError, TypeError, fields.EmptyBoundary) as exc:
            raise HTTPException(400, f"invalid constraint document: {exc}")

    @app.put("/api/shapes/{shape_id}/constraints")
    async def put_constraints(shape_id: int, request: Request):
        doc = await _json_body(request)
        _validate_doc(shape_id, doc)
        store.write_doc(shape_id, doc)
        return Response(status_code=204)

    @app.post("/api/shapes/{shape_id}/constraints/copy-to-all")
    def copy_to_all(shape_id: int):
        doc = store.read_doc(shape_id)
        # Validate against every target before touching any file, so a
        # mismatching shape aborts the whole copy rather than half of it.
        for target in range(len(project.shapes)):
            _validate_doc(target, doc)
        for target in range(len(project.shapes)):
            store.write_doc(target, doc)
        return Response(status_code=204)

    @app.post("/api/shapes/{shape_id}/ffc/preview")
    async def ffc_preview(shape_id: int, request: Request):
        body = await _json_body(request)
        if not isinstance(body, dict) or "face_mask" not in body:
            raise HTTPException(400, "body must be {\"face_mask\": [...]}")
        mesh = store.mesh(shape_id)
        raw = body["face_mask"]
        if not isinstance(raw, list) or len(raw) != mesh.num_faces:
            raise HTTPException(
                400, f"face_mask must list {mesh.num_faces} flags")
        included = np.asarray(raw, dtype=bool)
        # A uniform mask has no boundary: every vertex is simply inside
        # (or outside) the painted region, at nominal full depth.
        if included.all() or not included.any():
            fill = -mesh.bbox_diagonal if included.all() else mesh.bbox_diagonal
            return {"vertex_distance": [fill] * mesh.num_vertices}
        mask = fields.FaceMask(included=included, mesh_checksum=mesh.checksum())
        try:
            loops = fields.trace_boundary_loops(mesh, mask)
            field = fields.build_field(mesh, loops, mask)
        except (fields.EmptyBoundary, fields.InconsistentMask, ValueError) as exc:
            raise HTTPException(400, f"cannot build field: {exc}")
        return {"vertex_distance": field.vertex_distance.tolist()}

    @app.get("/api/particles/{shape_id}")
    def get_particles(shape_id: int):
        entry = store.entry(shape_id)
        if not entry.particle_path.is_file():
            raise HTTPException(404, f"no particles for shape {shape_id}; "
                                     "run the optimizer first")
        return load_particles(entry.particle_path).tolist()

    ui = Path(ui_dir) if ui_dir else _default_ui_dir()
    if ui is not None and ui.is_dir():
        app.mount("/", StaticFiles(directory=str(ui), html=True), name="ui")
    return app
