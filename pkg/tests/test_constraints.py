import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roiform import constraints as cons
from roiform import fields
from roiform.datagen import icosphere, sine_boundary_mask

finite3 = st.tuples(st.floats(-50, 50), st.floats(-50, 50),
                    st.floats(-50, 50))


def sine_ffc(mesh):
    mask = sine_boundary_mask(mesh)
    loops = fields.trace_boundary_loops(mesh, mask)
    fld = fields.build_field(mesh, loops, mask)
    return cons.FreeForm(field=fld, mesh=mesh, face_mask=mask.included)


class TestPlane:
    def test_analytic_values(self):
        pl = cons.Plane(origin=(0, 0, 2.0), normal=(0, 0, 4.0))
        # normalized normal, feasible strictly on the normal side
        assert np.allclose(pl.normal, [0, 0, 1])
        assert cons.evaluate(pl, (0, 0, 5.0)) == -3.0
        assert cons.evaluate(pl, (7, -7, 2.0)) == 0.0
        assert cons.evaluate(pl, (0, 0, -1.0)) == 3.0

    def test_gradient_constant(self):
        pl = cons.Plane(origin=(1, 2, 3), normal=(1, 1, 0))
        g, degen = cons.gradient(pl, (9, 9, 9))
        assert not degen
        assert np.allclose(g, [-1 / np.sqrt(2), -1 / np.sqrt(2), 0])

    def test_zero_normal_rejected(self):
        with pytest.raises(ValueError):
            cons.Plane(origin=(0, 0, 0), normal=(0, 0, 0))


class TestSphere:
    def test_exclude_inside(self):
        s = cons.Sphere(center=(1, 0, 0), radius=2.0)
        assert cons.evaluate(s, (1, 0, 0)) == 2.0       # dead center
        assert cons.evaluate(s, (4, 0, 0)) == -1.0      # outside: feasible
        assert cons.evaluate(s, (1, 2, 0)) == 0.0

    def test_exclude_outside(self):
        s = cons.Sphere(center=(0, 0, 0), radius=2.0,
                        mode=cons.EXCLUDE_OUTSIDE)
        assert cons.evaluate(s, (0, 0, 0)) == -2.0
        assert cons.evaluate(s, (3, 0, 0)) == 1.0

    def test_gradient_radial(self):
        s = cons.Sphere(center=(0, 0, 0), radius=1.0)
        g, degen = cons.gradient(s, (0, 3, 0))
        assert not degen
        assert np.allclose(g, [0, -1, 0])  # infeasibility decays outward
        gc, degen_c = cons.gradient(s, (0, 0, 0))
        assert degen_c and np.allclose(gc, 0)

    def test_validation(self):
        with pytest.raises(ValueError):
            cons.Sphere(center=(0, 0, 0), radius=0.0)
        with pytest.raises(ValueError):
            cons.Sphere(center=(0, 0, 0), radius=1.0, mode="sideways")


class TestPenalty:
    def test_feasible_is_free(self):
        pl = cons.Plane(origin=(0, 0, 0), normal=(0, 0, 1))
        assert cons.penalty(pl, (0, 0, 1), mu=5.0) == 0.0
        assert np.allclose(cons.penalty_gradient(pl, (0, 0, 1), mu=5.0), 0)

    def test_quadratic_form(self):
        pl = cons.Plane(origin=(0, 0, 0), normal=(0, 0, 1))
        assert cons.penalty(pl, (0, 0, -3.0), mu=5.0) == 45.0
        assert cons.penalty(pl, (0, 0, -3.0), mu=5.0, power=1) == 15.0

    def test_gradient_continuous_at_boundary(self):
        pl = cons.Plane(origin=(0, 0, 0), normal=(0, 0, 1))
        g = cons.penalty_gradient(pl, (0, 0, -1e-9), mu=7.0)
        assert np.linalg.norm(g) < 1e-7

    @pytest.mark.parametrize("c", [
        cons.Plane(origin=(0.5, 0, 0), normal=(1, 2, 2)),
        cons.Sphere(center=(0, 0, 0), radius=3.0),
        cons.Sphere(center=(0, 0, 0), radius=0.5,
                    mode=cons.EXCLUDE_OUTSIDE),
    ])
    def test_gradient_matches_fd(self, c, rng):
        # central differences at infeasible points, relative error < 1e-4
        mu, h = 4.0, 1e-6
        tested = 0
        for _ in range(200):
            p = rng.uniform(-4, 4, size=3)
            if cons.evaluate(c, p) <= 1e-3:
                continue
            ana = cons.penalty_gradient(c, p, mu)
            fd = np.empty(3)
            for k in range(3):
                e = np.zeros(3)
                e[k] = h
                fd[k] = (cons.penalty(c, p + e, mu)
                         - cons.penalty(c, p - e, mu)) / (2 * h)
            denom = max(np.linalg.norm(fd), 1e-12)
            assert np.linalg.norm(ana - fd) / denom < 1e-4
            tested += 1
        assert tested > 20

    def test_bad_parameters(self):
        pl = cons.Plane(origin=(0, 0, 0), normal=(0, 0, 1))
        with pytest.raises(ValueError):
            cons.penalty(pl, (0, 0, -1), mu=-1.0)
        with pytest.raises(ValueError):
            cons.penalty(pl, (0, 0, -1), mu=1.0, power=3)

    def test_total_sums(self):
        cs = [cons.Plane(origin=(0, 0, 0), normal=(0, 0, 1)),
              cons.Sphere(center=(0, 0, -5), radius=10.0)]
        p = (0, 0, -2.0)
        total = cons.total_penalty(cs, p, mu=2.0)
        assert total == pytest.approx(
            sum(cons.penalty(c, p, 2.0) for c in cs))
        tg = cons.total_penalty_gradient(cs, p, mu=2.0)
        assert np.allclose(
            tg, sum(cons.penalty_gradient(c, p, 2.0) for c in cs))


class TestFreeForm:
    def test_sign_matches_mask_side(self, icosphere3):
        ffc = sine_ffc(icosphere3)
        # deep in the included upper region vs the excluded lower one
        assert cons.evaluate(ffc, (0, 0, 1.0)) < 0
        assert cons.evaluate(ffc, (0, 0, -1.0)) > 0

    def test_surface_point_shortcut(self, icosphere3):
        from roiform.geometry import closest_point
        ffc = sine_ffc(icosphere3)
        p = np.array([0.4, 0.3, 0.6])
        sp = closest_point(icosphere3, p)
        assert cons.evaluate(ffc, p, sp) == cons.evaluate(ffc, p)
        g1, _ = cons.gradient(ffc, p, sp)
        g2, _ = cons.gradient(ffc, p)
        assert np.allclose(g1, g2)

    def test_field_mesh_binding_enforced(self, icosphere2, icosphere3):
        ffc = sine_ffc(icosphere3)
        with pytest.raises(fields.ChecksumMismatch):
            cons.FreeForm(field=ffc.field, mesh=icosphere2)

    def test_gradient_cosine_vs_tangential_fd(self, icosphere3, rng):
        # directional agreement away from boundary and field extrema
        ffc = sine_ffc(icosphere3)
        h = 1e-4
        cosines = []
        for _ in range(300):
            p = rng.normal(size=3)
            p /= np.linalg.norm(p)
            g_val = cons.evaluate(ffc, p)
            if abs(g_val) < 0.2 or abs(g_val) > 1.2:
                continue
            g, degen = cons.gradient(ffc, p)
            if degen:
                continue
            n = p  # unit sphere normal
            t1 = np.cross(n, [1, 0, 0])
            if np.linalg.norm(t1) < 1e-6:
                t1 = np.cross(n, [0, 1, 0])
            t1 /= np.linalg.norm(t1)
            t2 = np.cross(n, t1)
            fd = np.zeros(3)
            for t in (t1, t2):
                dplus = cons.evaluate(ffc, p + h * t)
                dminus = cons.evaluate(ffc, p - h * t)
                fd += ((dplus - dminus) / (2 * h)) * t
            if np.linalg.norm(fd) < 1e-6:
                continue
            cosines.append(np.dot(g, fd)
                           / (np.linalg.norm(g) * np.linalg.norm(fd)))
        assert len(cosines) > 50
        assert np.mean(cosines) >= 0.95


class TestViolationReport:
    def test_counts_and_max(self):
        pl = cons.Plane(origin=(0, 0, 0), normal=(0, 0, 1))
        positions = [np.array([[0, 0, 1.0], [0, 0, -0.5], [0, 0, -2.0]]),
                     np.array([[0, 0, 3.0], [0, 0, 4.0], [0, 0, 5.0]])]
        rep = cons.check_violations(positions, [[pl], [pl]], tolerance=0.1)
        assert rep.count == 2
        assert rep.max_g == 2.0
        assert rep.per_shape[0] == [(1, 0, 0.5), (2, 0, 2.0)]
        assert rep.per_shape[1] == []

    def test_tolerance_excludes_boundary(self):
        pl = cons.Plane(origin=(0, 0, 0), normal=(0, 0, 1))
        rep = cons.check_violations([np.array([[0, 0, -0.05]])], [[pl]],
                                    tolerance=0.1)
        assert rep.count == 0
        assert rep.max_g == 0.0


class TestPersistence:
    def test_roundtrip_all_kinds(self, icosphere3, tmp_path):
        cs = [cons.Plane(origin=(1, 2, 3), normal=(0, 1, 0)),
              cons.Sphere(center=(0, 1, 0), radius=2.5,
                          mode=cons.EXCLUDE_OUTSIDE),
              sine_ffc(icosphere3)]
        path = tmp_path / "c.json"
        cons.save_constraints(cs, path)
        back = cons.load_constraints(path, icosphere3)
        assert len(back) == 3
        pl, sp, ffc = back
        assert np.allclose(pl.origin, (1, 2, 3))
        assert np.allclose(pl.normal, (0, 1, 0))
        assert sp.radius == 2.5 and sp.mode == cons.EXCLUDE_OUTSIDE
        assert (ffc.face_mask == cs[2].face_mask).all()
        assert np.allclose(ffc.field.vertex_distance,
                           cs[2].field.vertex_distance, atol=1e-12)

    def test_field_form_roundtrip(self, icosphere3, tmp_path):
        base = sine_ffc(icosphere3)
        ffc = cons.FreeForm(field=base.field, mesh=icosphere3)  # no mask
        path = tmp_path / "c.json"
        cons.save_constraints([ffc], path)
        back = cons.load_constraints(path, icosphere3)
        assert back[0].face_mask is None
        assert np.allclose(back[0].field.vertex_distance,
                           base.field.vertex_distance, atol=1e-12)

    def test_malformed_rejected(self, icosphere3, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(ValueError):
            cons.load_constraints(path, icosphere3)
        with pytest.raises(ValueError):
            cons.constraints_from_dict({"hexagons": []}, icosphere3)
        with pytest.raises(ValueError):
            cons.constraints_from_dict({"planes": [{"origin": [0, 0, 0]}]},
                                       icosphere3)
        with pytest.raises(ValueError):
            cons.constraints_from_dict({"ffcs": [{}]}, icosphere3)

    def test_default_mu(self, icosphere3):
        assert cons.default_mu(icosphere3) == pytest.approx(
            100.0 / icosphere3.bbox_diagonal)


@settings(max_examples=50, deadline=None)
@given(finite3, finite3)
def test_plane_penalty_nonnegative(origin, point):
    pl = cons.Plane(origin=origin, normal=(0.3, -0.5, 0.8))
    val = cons.penalty(pl, point, mu=2.0)
    assert val >= 0.0
    g = cons.evaluate(pl, point)
    if g > 0:
        assert val == pytest.approx(2.0 * g * g)
    else:
        assert val == 0.0


@settings(max_examples=50, deadline=None)
@given(finite3)
def test_sphere_eval_antisymmetry(point):
    inside = cons.Sphere(center=(1, 1, 1), radius=4.0)
    outside = cons.Sphere(center=(1, 1, 1), radius=4.0,
                          mode=cons.EXCLUDE_OUTSIDE)
    assert cons.evaluate(inside, point) == pytest.approx(
        -cons.evaluate(outside, point), abs=1e-12)
