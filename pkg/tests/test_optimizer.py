import math

import numpy as np
import pytest

from roiform import constraints as cons
from roiform import optimizer as opt
from roiform import stats
from roiform.datagen import gen_ellipsoid_mesh, icosphere

# fixed configurations for the frozen entropy values below
SAMP_P = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
                   [0.0, 0.0, 1.0], [0.6, 0.6, 0.0]])
SAMP_SIG = np.array([0.8, 0.9, 1.0, 1.1])
SAMP_H_EXPECT = 3.370152799067127

CORR_Z = np.array([
    [0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
    [0.1, 0.0, 0.9, 1.1, 0.1, 0.0],
    [0.0, 0.2, 1.1, 0.9, 0.0, 0.1],
])
CORR_ALPHA = 0.05
CORR_H_EXPECT = -4.160539156244973


def tiny_cfg(**kw):
    kw.setdefault("target_j", 8)
    kw.setdefault("iterations_per_level", 40)
    return opt.OptimizerConfig(**kw)


def corr_system(mesh, rows):
    # lift flat (I, 3J) rows onto a shared mesh for entropy tests
    positions = [r.reshape(-1, 3) for r in rows]
    return opt.ParticleSystem([mesh] * len(positions), positions)


class TestConfig:
    def test_target_j_power_of_two(self):
        for bad in (0, 3, 6, 100):
            with pytest.raises(ValueError):
                opt.OptimizerConfig(target_j=bad)
        opt.OptimizerConfig(target_j=128)

    def test_positive_knobs(self):
        with pytest.raises(ValueError):
            opt.OptimizerConfig(initial_step=-1.0)
        with pytest.raises(ValueError):
            opt.OptimizerConfig(step_decay=0.0)
        with pytest.raises(ValueError):
            opt.OptimizerConfig(w=-0.5)
        with pytest.raises(ValueError):
            opt.OptimizerConfig(penalty_power=3)
        with pytest.raises(ValueError):
            opt.OptimizerConfig(sigma_k=0)


class TestSamplingEntropy:
    def test_frozen_value(self, icosphere2):
        h, _ = opt.sampling_entropy_gradient(SAMP_P, icosphere2,
                                             tiny_cfg(), sigmas=SAMP_SIG,
                                             project=False)
        assert h == pytest.approx(SAMP_H_EXPECT, rel=1e-12)

    def test_matches_naive_formula(self, icosphere2, rng):
        # independent oracle: direct double loop over the definition
        p = rng.normal(size=(6, 3))
        sig = rng.uniform(0.5, 1.5, size=6)
        h, _ = opt.sampling_entropy_gradient(p, icosphere2, tiny_cfg(),
                                             sigmas=sig, project=False)
        total = 0.0
        for j in range(6):
            d = 0.0
            for k in range(6):
                if k == j:
                    continue
                d2 = float(np.sum((p[j] - p[k]) ** 2))
                d += (2 * math.pi) ** -1.5 * sig[j] ** -3 \
                    * math.exp(-0.5 * d2 / sig[j] ** 2)
            total += -math.log(d / 5)
        assert h == pytest.approx(total / 6, rel=1e-12)

    def test_gradient_matches_fd(self, icosphere2):
        # objective addend is -H; frozen sigmas, unprojected, h = 1e-6
        cfg = tiny_cfg()
        h_step = 1e-6
        _, grads = opt.sampling_entropy_gradient(SAMP_P, icosphere2, cfg,
                                                 sigmas=SAMP_SIG,
                                                 project=False)
        for j in range(4):
            for c in range(3):
                plus = SAMP_P.copy()
                plus[j, c] += h_step
                minus = SAMP_P.copy()
                minus[j, c] -= h_step
                hp, _ = opt.sampling_entropy_gradient(
                    plus, icosphere2, cfg, sigmas=SAMP_SIG, project=False)
                hm, _ = opt.sampling_entropy_gradient(
                    minus, icosphere2, cfg, sigmas=SAMP_SIG, project=False)
                fd = -(hp - hm) / (2 * h_step)
                assert grads[j, c] == pytest.approx(
                    fd, rel=1e-3, abs=1e-9), (j, c)

    def test_tetrahedron_symmetry(self, icosphere2):
        # equidistant particles on a sphere: equal-magnitude radial
        # gradients, so their tangential parts vanish
        t = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0],
                      [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]) / math.sqrt(3)
        sig = np.full(4, 0.9)
        _, g = opt.sampling_entropy_gradient(t, icosphere2, tiny_cfg(),
                                             sigmas=sig, project=False)
        mags = np.linalg.norm(g, axis=1)
        assert np.allclose(mags, mags[0], rtol=1e-10)
        diag = icosphere2.bbox_diagonal
        for j in range(4):
            # gradient of the objective term (-H): pulls inward, and
            # descent (-grad) therefore pushes the particles apart
            d = g[j] / mags[j]
            assert np.allclose(d, -t[j], atol=1e-10)
            tangential = g[j] - np.dot(g[j], t[j]) * t[j]
            assert np.linalg.norm(tangential) < 1e-6 * diag

    def test_single_particle(self, icosphere2):
        h, g = opt.sampling_entropy_gradient(np.zeros((1, 3)), icosphere2,
                                             tiny_cfg(), project=False)
        assert h == 0.0
        assert g.shape == (1, 3)
        assert (g == 0).all()

    def test_projection_removes_normal_part(self, icosphere2, rng):
        p = rng.normal(size=(5, 3))
        p /= np.linalg.norm(p, axis=1)[:, None]
        _, g = opt.sampling_entropy_gradient(p, icosphere2, tiny_cfg())
        from roiform.geometry import closest_point
        for j in range(5):
            sp = closest_point(icosphere2, p[j])
            n = icosphere2.interpolated_normal(sp.face, sp.bary)
            assert abs(np.dot(g[j], n)) < 1e-10


class TestCorrespondenceEntropy:
    def test_frozen_value(self, icosphere2):
        system = corr_system(icosphere2, CORR_Z)
        h, _ = opt.correspondence_entropy_gradient(system, CORR_ALPHA,
                                                   project=False)
        assert h == pytest.approx(CORR_H_EXPECT, rel=1e-12)

    def test_matches_naive_logdet(self, icosphere2, rng):
        rows = rng.normal(size=(4, 9))
        system = corr_system(icosphere2, rows)
        h, _ = opt.correspondence_entropy_gradient(system, 0.02,
                                                   project=False)
        y = rows - rows.mean(axis=0)
        m = y @ y.T / 3 + 0.02 * np.eye(4)
        assert h == pytest.approx(0.5 * math.log(np.linalg.det(m)),
                                  rel=1e-10)

    def test_gradient_matches_fd(self, icosphere2):
        system = corr_system(icosphere2, CORR_Z)
        _, grads = opt.correspondence_entropy_gradient(system, CORR_ALPHA,
                                                       project=False)
        h_step = 1e-6
        for i in range(3):
            for j in range(2):
                for c in range(3):
                    for sgn, store in ((1, "hp"), (-1, "hm")):
                        rows = CORR_Z.copy()
                        rows[i, 3 * j + c] += sgn * h_step
                        sys2 = corr_system(icosphere2, rows)
                        h, _ = opt.correspondence_entropy_gradient(
                            sys2, CORR_ALPHA, project=False)
                        if sgn > 0:
                            hp = h
                        else:
                            hm = h
                    fd = (hp - hm) / (2 * h_step)
                    assert grads[i][j, c] == pytest.approx(
                        fd, rel=1e-3, abs=1e-9), (i, j, c)

    def test_identical_shapes_zero_gradient(self, icosphere2):
        row = np.tile([0.3, 0.1, 0.95, -0.5, 0.2, 0.8], (4, 1))
        system = corr_system(icosphere2, row)
        h, grads = opt.correspondence_entropy_gradient(system, 0.01,
                                                       project=False)
        # Y = 0: entropy collapses to the regularizer floor, pull vanishes
        assert h == pytest.approx(0.5 * 4 * math.log(0.01))
        for g in grads:
            assert np.abs(g).max() == 0.0

    def test_singular_rejected(self, icosphere2):
        system = corr_system(icosphere2, CORR_Z)
        with pytest.raises(ValueError):
            opt.correspondence_entropy_gradient(system, -0.1)
        with pytest.raises(opt.SingularSystem):
            single = corr_system(icosphere2, CORR_Z[:1])
            opt.correspondence_entropy_gradient(single, 0.0)

    def test_translation_of_whole_ensemble_invariant(self, icosphere2):
        shifted = CORR_Z + 7.5
        h0, _ = opt.correspondence_entropy_gradient(
            corr_system(icosphere2, CORR_Z), CORR_ALPHA, project=False)
        h1, _ = opt.correspondence_entropy_gradient(
            corr_system(icosphere2, shifted), CORR_ALPHA, project=False)
        assert h0 == pytest.approx(h1, rel=1e-12)


class TestInitAndSplit:
    def test_init_is_projected_centroid(self):
        mesh = gen_ellipsoid_mesh(10.0, 20.0, 40.0, subdiv=2)
        system = opt.init_particles([mesh], seed=0)
        assert system.num_particles == 1
        p = system.positions[0][0]
        # nearest surface to the center is the minor-axis tip
        assert abs(p[0]) == pytest.approx(10.0, abs=0.5)
        assert abs(p[1]) < 2.0 and abs(p[2]) < 2.0

    def test_split_doubles_and_stays_on_surface(self, icosphere2):
        from roiform.geometry import closest_point
        system = opt.init_particles([icosphere2, icosphere2], seed=1)
        child = opt.split_particles(system, epsilon=0.05, seed=7)
        assert child.num_particles == 2
        diag = icosphere2.bbox_diagonal
        for i in range(2):
            for p in child.positions[i]:
                sp = closest_point(icosphere2, p)
                assert np.linalg.norm(sp.position - p) < 1e-9 * diag
            gap = np.linalg.norm(child.positions[i][0]
                                 - child.positions[i][1])
            assert 0.05 < gap < 0.25

    def test_identical_shapes_stay_identical(self, icosphere2):
        system = opt.init_particles([icosphere2, icosphere2], seed=3)
        child = opt.split_particles(system, epsilon=0.05, seed=11)
        assert np.array_equal(child.positions[0], child.positions[1])

    def test_split_deterministic(self, icosphere2):
        system = opt.init_particles([icosphere2], seed=3)
        a = opt.split_particles(system.copy(), epsilon=0.05, seed=5)
        b = opt.split_particles(system.copy(), epsilon=0.05, seed=5)
        assert np.array_equal(a.positions[0], b.positions[0])


class TestSweep:
    def test_update_ordering(self, icosphere2, monkeypatch):
        # particle j must see the already-updated positions of 0..j-1
        system = opt.init_particles([icosphere2], seed=6)
        system = opt.split_particles(system, epsilon=0.08, seed=2)
        before = system.positions[0].copy()
        seen = []
        real = opt.closest_point

        def recorder(mesh, point, hint_face=None):
            seen.append(system.positions[0].copy())
            return real(mesh, point, hint_face=hint_face)

        monkeypatch.setattr(opt, "closest_point", recorder)
        moved, mean_disp = opt.gauss_seidel_iteration(
            system, [[]], tiny_cfg(target_j=2), step=0.4)
        after = moved.positions[0]
        assert mean_disp > 0
        assert len(seen) == 2
        # first move computed from the untouched configuration
        assert np.array_equal(seen[0], before)
        # second move already sees particle 0 at its new position
        assert not np.array_equal(after[0], before[0])
        assert np.array_equal(seen[1][0], after[0])
        assert np.array_equal(seen[1][1], before[1])

    def test_plane_violation_descends(self, icosphere2):
        # lone particle with no entropy forces walks back across the cut
        system = opt.init_particles([icosphere2], seed=0)
        p0 = system.positions[0][0].copy()
        radial = p0 / np.linalg.norm(p0)
        axis = np.zeros(3)
        axis[np.argmin(np.abs(radial))] = 1.0
        tangent = axis - np.dot(axis, radial) * radial
        tangent /= np.linalg.norm(tangent)
        n = radial + 0.8 * tangent
        n /= np.linalg.norm(n)
        # cap n.u >= 0.88 is on the sphere, but excludes the particle
        pl = cons.Plane(origin=0.88 * n, normal=n)
        g0 = cons.evaluate(pl, p0)
        assert g0 > 0.05

        cfg = tiny_cfg(target_j=1)
        gs = [g0]
        for _ in range(60):
            system, _ = opt.gauss_seidel_iteration(system, [[pl]], cfg,
                                                   step=0.05)
            gs.append(cons.evaluate(pl, system.positions[0][0]))
        tol = 1e-3 * icosphere2.bbox_diagonal
        for a, b in zip(gs, gs[1:]):
            if a > tol:
                assert b < a
        assert gs[-1] <= tol


class TestOptimize:
    def test_sphere_uniformity(self, icosphere2):
        cfg = tiny_cfg(target_j=16, iterations_per_level=60, seed=0)
        system, log = opt.optimize([icosphere2], [[]], cfg)
        assert system.num_particles == 16
        p = system.positions[0]
        d = np.linalg.norm(p[:, None] - p[None, :], axis=2)
        np.fill_diagonal(d, np.inf)
        nearest = d.min(axis=1)
        ideal = math.sqrt(4 * math.pi / 16)  # area-per-particle spacing
        assert nearest.min() >= 0.5 * ideal
        # all particles still on the sphere
        assert np.abs(np.linalg.norm(p, axis=1) - 1).max() < 0.02

    def test_objective_trend_down(self, icosphere2):
        # threshold ~0 so every level runs its full budget; the last
        # iterations_per_level rows are then exactly the final level
        cfg = tiny_cfg(target_j=8, iterations_per_level=50, seed=2,
                       convergence_threshold=1e-30)
        _, log = opt.optimize([icosphere2], [[]], cfg)
        f = np.array(log.F[-50:])
        windows = np.array([f[k:k + 10].mean() for k in range(41)])
        assert (np.diff(windows) <= 1e-9).all()
        assert len(log.F) == len(log.iterations) == len(log.mean_step)

    def test_penalty_respected(self):
        # particles crowd against the cut; the boundary equilibrium sits
        # at g ~ 1/mu, so the doubling schedule plus enough sweeps to
        # settle the bounce keeps residuals under a 1e-3*diag tolerance
        mesh = icosphere(2)
        pl = cons.Plane(origin=(0, 0, 0), normal=(0, 0, 1))
        cfg = tiny_cfg(target_j=8, iterations_per_level=150, seed=0,
                       mu_schedule=True)
        system, log = opt.optimize([mesh], [[pl]], cfg)
        tol = 1e-3 * mesh.bbox_diagonal
        rep = cons.check_violations(system.positions, [[pl]], tol)
        assert rep.count == 0

    def test_two_identical_shapes_degenerate_model(self, icosphere2):
        cfg = tiny_cfg(target_j=8, iterations_per_level=30, seed=4)
        system, _ = opt.optimize([icosphere2, icosphere2], [[], []], cfg)
        assert np.array_equal(system.positions[0], system.positions[1])
        model = stats.compute_pca(system.positions)
        diag2 = icosphere2.bbox_diagonal ** 2
        assert (model.eigenvalues <= 1e-10 * diag2).all()

    def test_deterministic(self, icosphere2):
        cfg = tiny_cfg(target_j=4, iterations_per_level=25, seed=9)
        s1, _ = opt.optimize([icosphere2], [[]], cfg)
        s2, _ = opt.optimize([icosphere2], [[]], cfg)
        assert np.array_equal(s1.positions[0], s2.positions[0])

    def test_constraint_count_checked(self, icosphere2):
        with pytest.raises(ValueError):
            opt.optimize([icosphere2], [[], []], tiny_cfg())


class TestParticleIO:
    def test_roundtrip_exact(self, rng, tmp_path):
        p = rng.normal(scale=15.0, size=(20, 3))
        path = tmp_path / "shape.particles"
        opt.save_particles(path, p)
        back = opt.load_particles(path)
        assert np.array_equal(back, p)   # 17 digits: bit-exact floats

    def test_byte_identical_rewrite(self, rng, tmp_path):
        p = rng.normal(size=(8, 3))
        a, b = tmp_path / "a.particles", tmp_path / "b.particles"
        opt.save_particles(a, p)
        opt.save_particles(b, p.copy())
        assert a.read_bytes() == b.read_bytes()

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "bad.particles"
        path.write_text("1.0 2.0\n")
        with pytest.raises(ValueError):
            opt.load_particles(path)

    def test_log_csv_header(self, tmp_path):
        log = opt.ConvergenceLog()
        log.append(0, 1.0, 0.5, 0.25, 0.25, 0.1, 2)
        path = tmp_path / "conv.csv"
        log.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == \
            "iter,F,sampling,correspondence,penalty,mean_step,violations"
        fields = lines[1].split(",")
        assert fields[0] == "0" and fields[-1] == "2"
        assert [float(x) for x in fields[1:6]] == [1.0, 0.5, 0.25, 0.25, 0.1]
