import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from roiform import project as proj
from roiform.datagen import icosphere
from roiform.geometry import save_mesh
from roiform.optimizer import OptimizerConfig, save_particles
from roiform.server import create_app


@pytest.fixture(scope="module")
def served(tmp_path_factory):
    out = tmp_path_factory.mktemp("srv_cohort")
    cfg = OptimizerConfig(target_j=4, iterations_per_level=25, seed=3)
    path = proj.generate_ellipsoid_assets(out, [10.0, 30.0], subdiv=1,
                                          config=cfg)
    project = proj.load_project(path)
    client = TestClient(create_app(project))
    return project, client


@pytest.fixture()
def mixed_project(tmp_path):
    # two meshes with different face counts: a mask valid on one cannot
    # validate on the other
    meshes = [icosphere(1), icosphere(2)]
    entries = []
    for i, m in enumerate(meshes):
        mp = tmp_path / f"m{i}.ply"
        save_mesh(m, mp)
        cp = tmp_path / f"c{i}.json"
        half = m.num_faces // 2
        doc = {"planes": [], "spheres": [],
               "ffcs": [{"face_mask": [True] * half
                         + [False] * (m.num_faces - half)}]}
        cp.write_text(json.dumps(doc))
        entries.append(proj.ShapeEntry(f"s{i}", mp, cp,
                                       tmp_path / f"p{i}.particles"))
    project = proj.Project(shapes=tuple(entries),
                           config=OptimizerConfig(target_j=4), root=tmp_path)
    return project, TestClient(create_app(project))


class TestListing:
    def test_shapes(self, served):
        project, client = served
        body = client.get("/api/shapes").json()
        assert len(body) == 8
        assert body[0]["id"] == 0
        assert body[0]["name"] == project.shapes[0].name
        assert body[3]["mesh_url"] == "/api/shapes/3/mesh"

    def test_mesh_payload(self, served):
        _, client = served
        r = client.get("/api/shapes/0/mesh")
        assert r.status_code == 200
        body = r.json()
        assert len(body["vertices"]) == 42   # icosphere subdiv 1
        assert len(body["faces"]) == 80
        assert all(len(v) == 3 for v in body["faces"][:5])

    def test_unknown_shape_404(self, served):
        _, client = served
        assert client.get("/api/shapes/99/mesh").status_code == 404
        assert client.get("/api/shapes/99/constraints").status_code == 404


class TestConstraintDocs:
    def test_get_existing(self, served):
        _, client = served
        doc = client.get("/api/shapes/0/constraints").json()
        assert set(doc) == {"planes", "spheres", "ffcs"}
        assert len(doc["ffcs"]) == 1

    def test_put_then_get(self, served):
        project, client = served
        doc = {"planes": [{"origin": [0, 0, 0], "normal": [0, 0, 1]}],
               "spheres": [], "ffcs": []}
        r = client.put("/api/shapes/1/constraints", content=json.dumps(doc))
        assert r.status_code == 204
        back = client.get("/api/shapes/1/constraints").json()
        assert back["planes"] == doc["planes"]
        on_disk = json.loads(project.shapes[1].constraint_path.read_text())
        assert on_disk["planes"] == doc["planes"]

    def test_put_invalid_json_400(self, served):
        _, client = served
        r = client.put("/api/shapes/0/constraints", content="{nope")
        assert r.status_code == 400

    def test_put_wrong_mask_length_400(self, served):
        _, client = served
        doc = {"planes": [], "spheres": [],
               "ffcs": [{"face_mask": [True, False]}]}
        r = client.put("/api/shapes/0/constraints", content=json.dumps(doc))
        assert r.status_code == 400

    def test_put_unknown_section_400(self, served):
        _, client = served
        doc = {"planes": [], "spheres": [], "ffcs": [], "cones": []}
        r = client.put("/api/shapes/0/constraints", content=json.dumps(doc))
        assert r.status_code == 400

    def test_put_array_body_400(self, served):
        _, client = served
        r = client.put("/api/shapes/0/constraints", content="[1,2]")
        assert r.status_code == 400


class TestCopyToAll:
    def test_replicates(self, served):
        project, client = served
        doc = {"planes": [{"origin": [1, 2, 3], "normal": [0, 1, 0]}],
               "spheres": [], "ffcs": []}
        assert client.put("/api/shapes/2/constraints",
                          content=json.dumps(doc)).status_code == 204
        r = client.post("/api/shapes/2/constraints/copy-to-all")
        assert r.status_code == 204
        for i in range(len(project.shapes)):
            got = client.get(f"/api/shapes/{i}/constraints").json()
            assert got["planes"] == doc["planes"]

    def test_aborts_before_any_write(self, mixed_project):
        project, client = mixed_project
        before = [e.constraint_path.read_text() for e in project.shapes]
        r = client.post("/api/shapes/0/constraints/copy-to-all")
        assert r.status_code == 400
        after = [e.constraint_path.read_text() for e in project.shapes]
        assert after == before


class TestFfcPreview:
    def test_hemisphere_sign_pattern(self, served):
        _, client = served
        mesh = client.get("/api/shapes/0/mesh").json()
        verts = np.array(mesh["vertices"])
        faces = np.array(mesh["faces"])
        centroid_z = verts[faces].mean(axis=1)[:, 2]
        mask = (centroid_z > 0).tolist()
        r = client.post("/api/shapes/0/ffc/preview",
                        content=json.dumps({"face_mask": mask}))
        assert r.status_code == 200
        dist = np.array(r.json()["vertex_distance"])
        assert dist.shape == (len(verts),)
        assert dist[np.argmax(verts[:, 2])] < 0   # painted side feasible
        assert dist[np.argmin(verts[:, 2])] > 0

    def test_uniform_mask_fill(self, served):
        _, client = served
        mesh = client.get("/api/shapes/0/mesh").json()
        n = len(mesh["faces"])
        r = client.post("/api/shapes/0/ffc/preview",
                        content=json.dumps({"face_mask": [True] * n}))
        assert r.status_code == 200
        dist = np.array(r.json()["vertex_distance"])
        assert (dist < 0).all()
        r = client.post("/api/shapes/0/ffc/preview",
                        content=json.dumps({"face_mask": [False] * n}))
        assert (np.array(r.json()["vertex_distance"]) > 0).all()

    def test_wrong_length_400(self, served):
        _, client = served
        r = client.post("/api/shapes/0/ffc/preview",
                        content=json.dumps({"face_mask": [True]}))
        assert r.status_code == 400

    def test_missing_key_400(self, served):
        _, client = served
        r = client.post("/api/shapes/0/ffc/preview", content="{}")
        assert r.status_code == 400


class TestParticles:
    def test_missing_404(self, served):
        _, client = served
        r = client.get("/api/particles/0")
        assert r.status_code == 404

    def test_served_after_write(self, served, rng):
        project, client = served
        pts = rng.normal(size=(4, 3))
        path = project.shapes[0].particle_path
        path.parent.mkdir(parents=True, exist_ok=True)
        save_particles(path, pts)
        body = client.get("/api/particles/0").json()
        assert np.allclose(np.array(body), pts)
