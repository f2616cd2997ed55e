"""Correspondence particle optimization over a mesh cohort.

The state is I shapes carrying J particles each, index-matched across
shapes. Descent minimizes

    F = w * H(ensemble) - sum_i H(particles_i) + penalties,

where the ensemble entropy pulls corresponding particles into a compact
statistical model, each per-shape entropy spreads particles over the
surface, and constraint penalties price infeasible positions. Particles
double through split levels until the target count is reached; within a
level a Gauss-Seidel sweep updates particles one at a time against the
already-moved positions of their predecessors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import constraints as cons
from .geometry import SurfacePoint, TriangleMesh, closest_point

_TWO_PI_POW = (2.0 * math.pi) ** -1.5
_TINY = 1e-300
_STEP_AUTO_FACTOR = 0.2
_SIGMA_CLAMP_LO = 1e-4
_SIGMA_CLAMP_HI = 0.5
_SIGMA_FALLBACK = 0.05   # of bbox diagonal, used when J == 1
_PRECOND_FLOOR = 0.7     # of diag/sqrt(J); keeps freshly split levels mobile
_CORR_FRACTION = 0.5     # max per-sweep shrink of an ensemble residual
_SPLIT_SPACING_FRAC = 0.35  # child offset as a fraction of diag/sqrt(J)


class SingularSystem(ValueError):
    """Ensemble covariance is rank-deficient and alpha is zero."""


@dataclass
class OptimizerConfig:
    """Tuning knobs for :func:`optimize`.

    ``None`` values are resolved from the shapes when optimization
    starts: the step from the particle count (displacements are
    premultiplied per shape by the squared step width), alpha from the
    step-stability bound on the correspondence term, mu per shape as
    100/diagonal, and the split offset and convergence threshold from
    shape size and local particle spacing.
    """

    target_j: int = 64
    iterations_per_level: int = 100
    initial_step: float | None = None
    step_decay: float = 0.9
    sigma_k: int = 6
    sigma_multiplier: float = 0.6
    alpha: float | None = None
    mu: float | None = None
    mu_schedule: bool = False
    penalty_power: int = 2
    w: float = 1.0
    convergence_threshold: float | None = None
    violation_tolerance: float | None = None
    split_epsilon: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.target_j < 1 or self.target_j & (self.target_j - 1):
            raise ValueError("target_j must be a power of two (J doubles "
                             "at every split level)")
        if self.iterations_per_level < 1:
            raise ValueError("iterations_per_level must be >= 1")
        if not 0.0 < self.step_decay <= 1.0:
            raise ValueError("step_decay must be in (0, 1]")
        if self.sigma_k < 1:
            raise ValueError("sigma_k must be >= 1")
        if self.sigma_multiplier <= 0.0:
            raise ValueError("sigma_multiplier must be positive")
        if self.penalty_power not in (1, 2):
            raise ValueError("penalty_power must be 1 or 2")
        if self.w < 0.0:
            raise ValueError("w must be >= 0")
        for name in ("initial_step", "alpha", "mu", "convergence_threshold",
                     "violation_tolerance", "split_epsilon"):
            v = getattr(self, name)
            if v is not None and v <= 0.0:
                raise ValueError(f"{name} must be positive when set")


class ParticleSystem:
    """I shapes with J surface particles each; row j corresponds across
    shapes. Keeps each particle's face and barycentric coordinates cached
    so surface reprojections and field lookups start from the right face.
    """

    def __init__(self, meshes: list[TriangleMesh], positions,
                 surface_points=None):
        if not meshes:
            raise ValueError("need at least one shape")
        if len(meshes) != len(positions):
            raise ValueError("one particle array per mesh required")
        self.meshes = list(meshes)
        self.positions = [np.array(p, dtype=np.float64) for p in positions]
        counts = {p.shape[0] for p in self.positions}
        if len(counts) != 1:
            raise ValueError("all shapes must carry the same particle count")
        if surface_points is None:
            surface_points = [
                [closest_point(m, p) for p in pts]
                for m, pts in zip(self.meshes, self.positions)]
        self.surface_points = surface_points

    @property
    def num_shapes(self) -> int:
        return len(self.meshes)

    @property
    def num_particles(self) -> int:
        return int(self.positions[0].shape[0])

    def copy(self) -> "ParticleSystem":
        return ParticleSystem(self.meshes,
                              [p.copy() for p in self.positions],
                              [list(sp) for sp in self.surface_points])

    def max_surface_deviation(self) -> float:
        """Largest |particle - its surface projection| over the system,
        as a fraction of the owning shape's bbox diagonal."""
        worst = 0.0
        for mesh, pts in zip(self.meshes, self.positions):
            for p in pts:
                d = np.linalg.norm(closest_point(mesh, p).position - p)
                worst = max(worst, d / mesh.bbox_diagonal)
        return worst

    def normals(self, i: int) -> np.ndarray:
        """Interpolated surface normal per particle of shape i."""
        mesh = self.meshes[i]
        return np.array([mesh.interpolated_normal(sp.face, sp.bary)
                         for sp in self.surface_points[i]])


@dataclass
class ConvergenceLog:
    """Per-iteration objective breakdown; F = sampling + correspondence
    + penalty with the configured weight already folded in."""

    iterations: list = dc_field(default_factory=list)
    F: list = dc_field(default_factory=list)
    sampling: list = dc_field(default_factory=list)
    correspondence: list = dc_field(default_factory=list)
    penalty: list = dc_field(default_factory=list)
    mean_step: list = dc_field(default_factory=list)
    violations: list = dc_field(default_factory=list)
    converged: bool = True

    def append(self, it, F, sampling, correspondence, penalty, mean_step,
               violations) -> None:
        self.iterations.append(int(it))
        self.F.append(float(F))
        self.sampling.append(float(sampling))
        self.correspondence.append(float(correspondence))
        self.penalty.append(float(penalty))
        self.mean_step.append(float(mean_step))
        self.violations.append(int(violations))

    def to_csv(self, path) -> None:
        rows = ["iter,F,sampling,correspondence,penalty,mean_step,violations"]
        for k in range(len(self.iterations)):
            rows.append("%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d" % (
                self.iterations[k], self.F[k], self.sampling[k],
                self.correspondence[k], self.penalty[k], self.mean_step[k],
                self.violations[k]))
        Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


# -- initialization and refinement -------------------------------------------


def init_particles(meshes: list[TriangleMesh], seed: int = 0
                   ) -> ParticleSystem:
    """One particle per shape at the surface projection of the vertex
    centroid. ``seed`` fixes downstream stochastic choices; initialization
    itself is deterministic."""
    del seed  # initialization has no random component
    positions = []
    sps = []
    for mesh in meshes:
        sp = closest_point(mesh, mesh.vertices.mean(axis=0))
        positions.append(sp.position[None, :].copy())
        sps.append([sp])
    return ParticleSystem(meshes, positions, sps)


def split_particles(system: ParticleSystem, epsilon: float, seed: int
                    ) -> ParticleSystem:
    """Double J: parent j spawns children 2j and 2j+1 at +/- epsilon
    along a random direction. The direction is drawn once per parent
    index and shared by every shape, projected into each shape's local
    tangent plane, so index correspondence survives the split."""
    rng = np.random.default_rng(seed)
    jn = system.num_particles
    dirs = np.empty((jn, 3))
    for j in range(jn):
        while True:
            d = rng.normal(size=3)
            n = np.linalg.norm(d)
            if n < 1e-12:
                continue
            d /= n
            # Redraw if the direction is near-normal on any shape: its
            # tangent part would vanish there and desync the pairing.
            ok = True
            for i in range(system.num_shapes):
                sp = system.surface_points[i][j]
                nrm = system.meshes[i].interpolated_normal(sp.face, sp.bary)
                if np.linalg.norm(d - np.dot(d, nrm) * nrm) < 1e-3:
                    ok = False
                    break
            if ok:
                break
        dirs[j] = d

    positions = []
    sps = []
    for i, mesh in enumerate(system.meshes):
        pts = np.empty((2 * jn, 3))
        shape_sps: list[SurfacePoint] = []
        for j in range(jn):
            parent = system.positions[i][j]
            sp = system.surface_points[i][j]
            nrm = mesh.interpolated_normal(sp.face, sp.bary)
            t = dirs[j] - np.dot(dirs[j], nrm) * nrm
            t *= epsilon / np.linalg.norm(t)
            for side, child in ((0, parent + t), (1, parent - t)):
                csp = closest_point(mesh, child, hint_face=sp.face)
                pts[2 * j + side] = csp.position
                shape_sps.append(csp)
        positions.append(pts)
        sps.append(shape_sps)
    return ParticleSystem(system.meshes, positions, sps)


# -- kernel widths -------------------------------------------------------------


def sigma_values(positions: np.ndarray, cfg: OptimizerConfig, diag: float
                 ) -> np.ndarray:
    """Per-particle Gaussian width: multiplier times the mean distance to
    the k nearest same-shape particles, clamped to [1e-4, 0.5] of the
    shape's bbox diagonal."""
    jn = positions.shape[0]
    if jn < 2:
        return np.full(jn, _SIGMA_FALLBACK * diag)
    d = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=2)
    np.fill_diagonal(d, np.inf)
    k = min(cfg.sigma_k, jn - 1)
    nearest = np.sort(d, axis=1)[:, :k]
    sig = cfg.sigma_multiplier * nearest.mean(axis=1)
    return np.clip(sig, _SIGMA_CLAMP_LO * diag, _SIGMA_CLAMP_HI * diag)


def _step_scales(system: ParticleSystem, cfg: OptimizerConfig,
                 sigmas_per_shape) -> list[float]:
    """Per-shape width s_i that scales the gradient step.

    Displacements are -step * s_i^2 * gradient: entropy gradients carry
    units of 1/length, so the squared width renders every shape's motion
    proportional to its own scale regardless of how sizes mix in the
    cohort. The width is the shape's median kernel sigma, floored at the
    spacing the level will settle to (children sit nearly on top of their
    parents right after a split, which would otherwise freeze the level)
    and capped like sigma itself.
    """
    jn = system.num_particles
    scales = []
    for mesh, sig in zip(system.meshes, sigmas_per_shape):
        diag = mesh.bbox_diagonal
        floor = _PRECOND_FLOOR * diag / math.sqrt(jn)
        scales.append(min(max(float(np.median(sig)), floor),
                          _SIGMA_CLAMP_HI * diag))
    return scales


def _gauss(d2: np.ndarray, sigma) -> np.ndarray:
    """Isotropic 3D Gaussian kernel value for squared distances."""
    return _TWO_PI_POW * sigma ** -3 * np.exp(-0.5 * d2 / sigma ** 2)


def _tangent_project(grads: np.ndarray, normals: np.ndarray) -> np.ndarray:
    return grads - np.einsum("ij,ij->i", grads, normals)[:, None] * normals


# -- entropy terms -------------------------------------------------------------


def sampling_entropy_gradient(particles, mesh: TriangleMesh,
                              cfg: OptimizerConfig,
                              sigmas: np.ndarray | None = None,
                              project: bool = True,
                              surface_points=None):
    """Parzen entropy of one shape's particles and the gradient of -H.

    H = -(1/J) sum_j log[(1/(J-1)) sum_{k!=j} G_sigma_j(p_j - p_k)].
    Kernel widths follow the sigma policy unless given explicitly; they
    are treated as constants by the gradient either way. Descending the
    returned gradient (of -H, the objective's sampling addend) pushes
    particles apart. With ``project`` the gradients are flattened into
    the local tangent planes. J = 1 gives H = 0 and a zero gradient.
    """
    p = np.asarray(particles, dtype=np.float64)
    jn = p.shape[0]
    if jn < 2:
        return 0.0, np.zeros((jn, 3))
    if sigmas is None:
        sigmas = sigma_values(p, cfg, mesh.bbox_diagonal)

    diff = p[:, None, :] - p[None, :, :]
    d2 = np.einsum("jkc,jkc->jk", diff, diff)
    G = _gauss(d2, sigmas[:, None])
    np.fill_diagonal(G, 0.0)
    D = np.maximum(G.sum(axis=1) / (jn - 1), _TINY)
    H = -float(np.mean(np.log(D)))

    W = G / ((jn - 1) * D * sigmas ** 2)[:, None]
    S = W + W.T
    grad_H = (S.sum(axis=1)[:, None] * p - S @ p) / jn
    grads = -grad_H  # objective carries -H for the sampling term
    if project:
        if surface_points is None:
            surface_points = [closest_point(mesh, q) for q in p]
        normals = np.array([mesh.interpolated_normal(sp.face, sp.bary)
                            for sp in surface_points])
        grads = _tangent_project(grads, normals)
    return H, grads


def correspondence_entropy_gradient(system: ParticleSystem, alpha: float,
                                    project: bool = True):
    """Ensemble entropy across shapes and its per-particle gradient.

    Shapes are flattened to rows of Y (centered); H = 0.5 log det of the
    I x I matrix Y Y^T/(I-1) + alpha Id, whose nonzero spectrum matches
    the full 3J-dimensional covariance. The gradient rows come from
    (Y Y^T + alpha (I-1) Id)^{-1} Y; centering contributes exactly
    nothing because the rows of Y sum to zero.
    """
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    i_n = system.num_shapes
    jn = system.num_particles
    if i_n == 1:
        if alpha == 0.0:
            raise SingularSystem("one shape with alpha = 0")
        return 0.5 * math.log(alpha), [np.zeros((jn, 3))]

    Z = np.stack([p.reshape(-1) for p in system.positions])
    Y = Z - Z.mean(axis=0)
    M = Y @ Y.T / (i_n - 1) + alpha * np.eye(i_n)
    sign, logdet = np.linalg.slogdet(M)
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularSystem(
            "ensemble covariance is singular; use alpha > 0")
    H = 0.5 * float(logdet)

    A = Y @ Y.T + alpha * (i_n - 1) * np.eye(i_n)
    try:
        G = np.linalg.solve(A, Y)
    except np.linalg.LinAlgError:
        raise SingularSystem(
            "ensemble covariance is singular; use alpha > 0") from None
    grads = []
    for i in range(i_n):
        g = G[i].reshape(jn, 3)
        if project:
            g = _tangent_project(g, system.normals(i))
        grads.append(g)
    return H, grads


# -- objective -----------------------------------------------------------------


def _resolve_alpha(cfg: OptimizerConfig, system: ParticleSystem,
                   scales: list[float] | None = None,
                   step: float | None = None) -> float:
    """Covariance regularizer for the ensemble entropy.

    Unless configured explicitly, alpha is sized against the step so that
    one sweep shrinks any ensemble residual by at most _CORR_FRACTION:
    the correspondence displacement for a residual component r along a
    Gram eigendirection lambda is step * s^2 * w * r / (lambda + (I-1)
    alpha), maximal as lambda -> 0. Too small an alpha turns the
    correspondence term into a stiff spring that overshoots and fights
    the penalty; this bound keeps it a contraction.
    """
    if cfg.alpha is not None:
        return cfg.alpha
    jn = system.num_particles
    if step is None:
        step = cfg.initial_step or _STEP_AUTO_FACTOR * jn
    if scales is None:
        sigmas = [sigma_values(system.positions[i], cfg,
                               system.meshes[i].bbox_diagonal)
                  for i in range(system.num_shapes)]
        scales = _step_scales(system, cfg, sigmas)
    denom = max(system.num_shapes - 1, 1)
    return step * max(scales) ** 2 * max(cfg.w, 1.0) / (_CORR_FRACTION * denom)


def _resolve_mus(cfg: OptimizerConfig, meshes, level: int = 0
                 ) -> list[float]:
    scale = 2.0 ** level if cfg.mu_schedule else 1.0
    if cfg.mu is not None:
        return [cfg.mu * scale for _ in meshes]
    return [cons.default_mu(m) * scale for m in meshes]


def objective_value(system: ParticleSystem, constraints_per_shape,
                    cfg: OptimizerConfig, mus: list[float] | None = None,
                    alpha: float | None = None):
    """(F, components) with components = {sampling, correspondence,
    penalty} summing exactly to F. The correspondence component already
    includes the weight w; sampling is -sum_i H(P_i)."""
    if mus is None:
        mus = _resolve_mus(cfg, system.meshes)
    if alpha is None:
        alpha = _resolve_alpha(cfg, system)
    h_corr, _ = correspondence_entropy_gradient(system, alpha, project=False)
    h_samp = []
    pen = []
    for i, mesh in enumerate(system.meshes):
        h, _ = sampling_entropy_gradient(system.positions[i], mesh, cfg,
                                         project=False)
        h_samp.append(h)
        shape_pen = [
            cons.total_penalty(constraints_per_shape[i], p, mus[i],
                               cfg.penalty_power, sp)
            for p, sp in zip(system.positions[i], system.surface_points[i])]
        pen.append(math.fsum(shape_pen))
    components = {
        "sampling": -math.fsum(h_samp),
        "correspondence": cfg.w * h_corr,
        "penalty": math.fsum(pen),
    }
    F = math.fsum(components.values())
    return F, components


# -- the Gauss-Seidel sweep ----------------------------------------------------


def gauss_seidel_iteration(system: ParticleSystem, constraints_per_shape,
                           cfg: OptimizerConfig, step: float,
                           mus: list[float] | None = None,
                           alpha: float | None = None):
    """One sweep: every particle of every shape moves once, in order.

    Correspondence gradients are frozen at the sweep start. Sampling
    gradients see the current positions, including particles already
    moved this sweep; the per-shape kernel density is updated
    incrementally after every move, so one sweep costs O(J^2) per shape.
    Each displacement is -step * s_i^2 * total gradient with s_i the
    shape's step width (see _step_scales), clamped to the local sigma,
    then snapped back to the surface. Returns (system, mean displacement
    over all particles).
    """
    if mus is None:
        mus = _resolve_mus(cfg, system.meshes)
    sigmas = [sigma_values(system.positions[i], cfg,
                           system.meshes[i].bbox_diagonal)
              for i in range(system.num_shapes)]
    scales = _step_scales(system, cfg, sigmas)
    if alpha is None:
        alpha = _resolve_alpha(cfg, system, scales, step)
    _, corr = correspondence_entropy_gradient(system, alpha)

    moved = []
    for i, mesh in enumerate(system.meshes):
        p = system.positions[i]
        sps = system.surface_points[i]
        jn = p.shape[0]
        sig = sigmas[i]
        shape_step = step * scales[i] ** 2

        if jn > 1:
            diff = p[:, None, :] - p[None, :, :]
            d2 = np.einsum("jkc,jkc->jk", diff, diff)
            G = _gauss(d2, sig[:, None])
            np.fill_diagonal(G, 0.0)
            D = np.maximum(G.sum(axis=1) / (jn - 1), _TINY)
        else:
            D = np.full(1, _TINY)

        for j in range(jn):
            total = cfg.w * corr[i][j].copy()
            if jn > 1:
                d = p - p[j]
                d2 = np.einsum("kc,kc->k", d, d)
                row = _gauss(d2, sig[j])      # G_sigma_j(p_j - p_k)
                col = _gauss(d2, sig)         # G_sigma_k(p_k - p_j)
                row[j] = 0.0
                col[j] = 0.0
                w_row = row / ((jn - 1) * D[j] * sig[j] ** 2)
                w_col = col / ((jn - 1) * D * sig ** 2)
                # Gradient of -H at particle j; pushes away from neighbors.
                samp = (w_row + w_col) @ d / jn
                nrm = mesh.interpolated_normal(sps[j].face, sps[j].bary)
                samp -= np.dot(samp, nrm) * nrm
                total += samp
            total += cons.total_penalty_gradient(
                constraints_per_shape[i], p[j], mus[i], cfg.penalty_power,
                sps[j])

            delta = -shape_step * total
            norm = float(np.linalg.norm(delta))
            if norm > sig[j]:
                delta *= sig[j] / norm
            if norm > 0.0:
                old = p[j].copy()
                sp = closest_point(mesh, p[j] + delta,
                                   hint_face=sps[j].face)
                p[j] = sp.position
                sps[j] = sp
                moved.append(float(np.linalg.norm(p[j] - old)))
                if jn > 1:
                    # Refresh the density terms touched by this move.
                    d_new = p - p[j]
                    d2_new = np.einsum("kc,kc->k", d_new, d_new)
                    col_new = _gauss(d2_new, sig)
                    col_new[j] = 0.0
                    D += (col_new - col) / (jn - 1)
                    row_new = _gauss(d2_new, sig[j])
                    row_new[j] = 0.0
                    D[j] = max(row_new.sum() / (jn - 1), _TINY)
                    D = np.maximum(D, _TINY)
            else:
                moved.append(0.0)
    return system, math.fsum(moved) / len(moved)


def _violation_count(system: ParticleSystem, constraints_per_shape,
                     tolerances: list[float]) -> int:
    """Count g > tolerance pairs using the cached surface points."""
    count = 0
    for i in range(system.num_shapes):
        tol = tolerances[i]
        for p, sp in zip(system.positions[i], system.surface_points[i]):
            for c in constraints_per_shape[i]:
                if cons.evaluate(c, p, sp) > tol:
                    count += 1
    return count


def optimize(meshes: list[TriangleMesh], constraints_per_shape,
             cfg: OptimizerConfig):
    """Full multiscale run: init at J=1, then split and relax until the
    target particle count converges. Returns (system, log); a run that
    exhausts its final-level iteration budget above the displacement
    threshold comes back with ``log.converged = False`` rather than an
    exception."""
    if len(constraints_per_shape) != len(meshes):
        raise ValueError("one constraint list per shape required")
    diags = [m.bbox_diagonal for m in meshes]
    med_diag = float(np.median(diags))
    tolerances = ([cfg.violation_tolerance] * len(meshes)
                  if cfg.violation_tolerance is not None
                  else [1e-3 * d for d in diags])
    seed_rng = np.random.default_rng(cfg.seed)

    system = init_particles(meshes, cfg.seed)
    log = ConvergenceLog()
    it = 0
    level = 0
    while True:
        mus = _resolve_mus(cfg, meshes, level)
        # Entropy gradients scale as 1/(J * sigma) and the per-shape
        # width s_i^2 premultiplier contributes sigma^2, so a J-sized
        # step yields displacements proportional to local spacing.
        jn = system.num_particles
        step = cfg.initial_step or _STEP_AUTO_FACTOR * jn
        sigmas = [sigma_values(system.positions[i], cfg, diags[i])
                  for i in range(system.num_shapes)]
        scales = _step_scales(system, cfg, sigmas)
        alpha = _resolve_alpha(cfg, system, scales, step)
        threshold = cfg.convergence_threshold or 2e-4 * float(
            np.median(scales))
        level_converged = False
        prev_f = math.inf
        for _ in range(cfg.iterations_per_level):
            system, mean_disp = gauss_seidel_iteration(
                system, constraints_per_shape, cfg, step, mus, alpha)
            f, parts = objective_value(system, constraints_per_shape, cfg,
                                       mus, alpha)
            log.append(it, f, parts["sampling"], parts["correspondence"],
                       parts["penalty"], mean_disp,
                       _violation_count(system, constraints_per_shape,
                                        tolerances))
            it += 1
            if f > prev_f:
                step *= cfg.step_decay
            prev_f = f
            if mean_disp < threshold:
                level_converged = True
                break
        if system.num_particles >= cfg.target_j:
            log.converged = level_converged
            return system, log
        # Children born most of a target-spacing apart tile consistently
        # across shapes; near-coincident pairs would instead expand along
        # each shape's own preferred direction and desync the indices.
        epsilon = cfg.split_epsilon or (
            _SPLIT_SPACING_FRAC * med_diag
            / math.sqrt(2.0 * system.num_particles))
        system = split_particles(system, epsilon,
                                 int(seed_rng.integers(2 ** 63)))
        level += 1


# -- particle file I/O ---------------------------------------------------------


def save_particles(path, positions: np.ndarray) -> None:
    """Write one "x y z" line per particle, 17 significant digits."""
    lines = ["%.17g %.17g %.17g" % tuple(p) for p in positions]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_particles(path) -> np.ndarray:
    rows = []
    for ln, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), 1):
        tok = line.split()
        if not tok:
            continue
        if len(tok) != 3:
            raise ValueError(f"{path}: line {ln}: expected 3 coordinates")
        rows.append([float(t) for t in tok])
    return np.array(rows, dtype=np.float64).reshape(-1, 3)
