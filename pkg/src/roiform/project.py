"""Project files: a list of shapes plus optimizer settings, and the batch
operations that run on them (asset generation, optimization, statistics,
violation checks, penalty-pass benchmarking).

All paths inside a project file are stored relative to the file's directory
so a project tree can be moved or copied wholesale.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import constraints as _constraints
from . import datagen, fields, stats
from .geometry import TriangleMesh, load_mesh, save_mesh
from .optimizer import (
    ConvergenceLog,
    OptimizerConfig,
    ParticleSystem,
    load_particles,
    optimize,
    save_particles,
)

__all__ = [
    "ProjectError",
    "ShapeEntry",
    "Project",
    "load_project",
    "save_project",
    "ellipsoid_experiment_config",
    "generate_ellipsoid_assets",
    "load_shape_inputs",
    "run_optimize",
    "run_check",
    "run_stats",
    "run_bench",
]


class ProjectError(ValueError):
    """Project file violates the schema or its invariants."""


@dataclass(frozen=True)
class ShapeEntry:
    """One cohort member: where its mesh, constraints, and output live."""

    name: str
    mesh_path: Path
    constraint_path: Path | None
    particle_path: Path


@dataclass(frozen=True)
class Project:
    shapes: tuple[ShapeEntry, ...]
    config: OptimizerConfig
    root: Path

    def __post_init__(self) -> None:
        seen = set()
        for entry in self.shapes:
            key = str(entry.mesh_path)
            if key in seen:
                raise ProjectError(f"duplicate mesh path in project: {key}")
            seen.add(key)


def _rel(path: Path, root: Path) -> str:
    try:
        return path.relative_to(root).as_posix()
    except ValueError:
        return str(path)


def save_project(path, project: Project) -> None:
    path = Path(path)
    root = path.parent
    doc = {
        "version": 1,
        "optimizer": dataclasses.asdict(project.config),
        "shapes": [
            {
                "name": e.name,
                "mesh": _rel(e.mesh_path, root),
                "constraints": _rel(e.constraint_path, root) if e.constraint_path else None,
                "particles": _rel(e.particle_path, root),
            }
            for e in project.shapes
        ],
    }
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_project(path) -> Project:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"project file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ProjectError(f"project file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "shapes" not in doc:
        raise ProjectError("project file must be an object with a 'shapes' list")
    root = path.parent
    try:
        config = OptimizerConfig(**doc.get("optimizer", {}))
    except TypeError as exc:
        raise ProjectError(f"unknown optimizer option: {exc}") from exc
    entries = []
    for i, raw in enumerate(doc["shapes"]):
        try:
            name = raw.get("name") or f"shape{i:03d}"
            mesh = root / raw["mesh"]
            constr = root / raw["constraints"] if raw.get("constraints") else None
            particles = root / raw.get("particles", f"particles/{name}.particles")
        except (TypeError, KeyError) as exc:
            raise ProjectError(f"shape entry {i} is malformed: {exc}") from exc
        entries.append(ShapeEntry(name, mesh, constr, particles))
    return Project(shapes=tuple(entries), config=config, root=root)


def ellipsoid_experiment_config(target_j: int = 64, seed: int = 0,
                                iterations: int | None = None) -> OptimizerConfig:
    """Optimizer settings tuned for the ellipsoid cohort experiment.

    The cohort's three axis-value factors have identical variance, so the
    leading modes only align with the axes when shapes agree tightly on
    particle placement; that takes a strong correspondence weight and a
    generous iteration budget compared to the class defaults.
    """
    return OptimizerConfig(
        target_j=target_j,
        iterations_per_level=iterations if iterations is not None else 300,
        w=300.0,
        seed=seed,
    )


def generate_ellipsoid_assets(
    out_dir,
    axis_values: Sequence[float],
    subdiv: int = 3,
    amplitude_frac: float = 0.3,
    config: OptimizerConfig | None = None,
) -> Path:
    """Write the ellipsoid cohort (meshes, face-mask constraint files, project
    file) under out_dir and return the project file path."""
    if not axis_values:
        raise ValueError("axis_values must be non-empty")
    out_dir = Path(out_dir)
    (out_dir / "meshes").mkdir(parents=True, exist_ok=True)
    (out_dir / "constraints").mkdir(parents=True, exist_ok=True)
    (out_dir / "particles").mkdir(parents=True, exist_ok=True)
    meshes = datagen.gen_ellipsoid_cohort(axis_values, subdiv)
    entries = []
    for (a, b, c), mesh in zip(datagen.cohort_axes(axis_values), meshes):
        name = f"ell_a{a:g}_b{b:g}_c{c:g}"
        mesh_path = out_dir / "meshes" / f"{name}.ply"
        constr_path = out_dir / "constraints" / f"{name}.json"
        save_mesh(mesh, mesh_path)
        mask = datagen.sine_boundary_mask(mesh, amplitude_frac)
        doc = {"planes": [], "spheres": [], "ffcs": [{"face_mask": mask.included.astype(int).tolist()}]}
        constr_path.write_text(json.dumps(doc) + "\n", encoding="utf-8")
        entries.append(
            ShapeEntry(name, mesh_path, constr_path, out_dir / "particles" / f"{name}.particles")
        )
    project = Project(shapes=tuple(entries), config=config or OptimizerConfig(), root=out_dir)
    project_path = out_dir / "project.json"
    save_project(project_path, project)
    return project_path


def load_shape_inputs(project: Project):
    """Load every shape's mesh and constraint list. Raises FileNotFoundError
    for missing meshes and whatever the parsers raise for malformed files."""
    meshes = []
    constraints_per_shape = []
    for entry in project.shapes:
        if not entry.mesh_path.is_file():
            raise FileNotFoundError(f"mesh file not found: {entry.mesh_path}")
        mesh = load_mesh(entry.mesh_path)
        cons = []
        if entry.constraint_path is not None:
            if not entry.constraint_path.is_file():
                raise FileNotFoundError(f"constraint file not found: {entry.constraint_path}")
            cons = _constraints.load_constraints(entry.constraint_path, mesh)
        meshes.append(mesh)
        constraints_per_shape.append(cons)
    return meshes, constraints_per_shape


def _violation_tolerances(project: Project, meshes, tolerance: float | None):
    if tolerance is not None:
        return [tolerance] * len(meshes)
    if project.config.violation_tolerance is not None:
        return [project.config.violation_tolerance] * len(meshes)
    return [1e-3 * m.bbox_diagonal for m in meshes]


def run_optimize(
    project: Project,
    seed: int | None = None,
    progress: Callable[[str], None] | None = None,
) -> dict:
    """Optimize all shapes in the project; write particle files, the
    convergence CSV, and a violation report. Returns the report dict."""
    say = progress or (lambda msg: None)
    meshes, constraints_per_shape = load_shape_inputs(project)
    config = project.config
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
    say(f"optimizing {len(meshes)} shapes to J={config.target_j}")
    t0 = time.perf_counter()
    system, log = optimize(meshes, constraints_per_shape, config)
    elapsed = time.perf_counter() - t0
    say(f"finished in {elapsed:.1f}s ({len(log.F)} iterations)")
    for entry, positions in zip(project.shapes, system.positions):
        entry.particle_path.parent.mkdir(parents=True, exist_ok=True)
        save_particles(entry.particle_path, positions)
    log.to_csv(project.root / "convergence.csv")
    report = _check_report(project, meshes, constraints_per_shape, system.positions, None)
    report["elapsed_seconds"] = elapsed
    report["iterations"] = len(log.F)
    report["converged"] = log.converged
    report_path = project.root / "violations.json"
    report_path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    say(f"violations: {report['total_violations']} (tolerance {report['tolerance']})")
    return report


def _check_report(project, meshes, constraints_per_shape, positions, tolerance):
    tols = _violation_tolerances(project, meshes, tolerance)
    per_shape = []
    total = 0
    for entry, mesh, cons, pos, tol in zip(
        project.shapes, meshes, constraints_per_shape, positions, tols
    ):
        system = ParticleSystem(meshes=[mesh], positions=[np.asarray(pos)])
        rep = _constraints.check_violations(system, [cons], tol)
        per_shape.append(
            {
                "name": entry.name,
                "violations": rep.count,
                "max_g": rep.max_g,
                "tolerance": tol,
            }
        )
        total += rep.count
    return {
        "tolerance": "per-shape 1e-3*diag" if tolerance is None else tolerance,
        "total_violations": total,
        "shapes": per_shape,
    }


def run_check(project: Project, tolerance: float | None = None) -> dict:
    """Re-check existing particle files against the project's constraints."""
    meshes, constraints_per_shape = load_shape_inputs(project)
    positions = []
    for entry in project.shapes:
        if not entry.particle_path.is_file():
            raise FileNotFoundError(f"particle file not found: {entry.particle_path}")
        positions.append(load_particles(entry.particle_path))
    return _check_report(project, meshes, constraints_per_shape, positions, tolerance)


def run_stats(
    particle_files: Sequence[Path],
    out_dir,
    modes: int = 3,
    t_values: Sequence[float] = (-2.0, -1.0, 0.0, 1.0, 2.0),
) -> stats.ShapeModel:
    """PCA over the given particle files; writes model JSON, compactness CSV,
    and mode-shape .particles exports into out_dir."""
    positions = [load_particles(p) for p in particle_files]
    model = stats.compute_pca(positions)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stats.save_model(out_dir / "model.json", model)
    comp = stats.compactness(model)
    lines = ["mode,eigenvalue,cumulative_ratio"]
    for k in range(model.num_modes):
        lines.append(f"{k + 1},{model.eigenvalues[k]:.17g},{comp[k]:.17g}")
    (out_dir / "compactness.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for m in range(min(modes, model.num_modes)):
        for t in t_values:
            shape = stats.mode_shape(model, m, t)
            save_particles(out_dir / f"mode{m + 1}_{t:+g}.particles", shape)
    return model


def _fit_aic(j: np.ndarray, t: np.ndarray, degree_terms) -> float:
    """AIC of a least-squares fit of t on the given powers of j."""
    X = np.stack([j.astype(np.float64) ** d for d in degree_terms], axis=1)
    coef, *_ = np.linalg.lstsq(X, t, rcond=None)
    resid = t - X @ coef
    n = t.shape[0]
    rss = float(resid @ resid)
    k = X.shape[1]
    return n * math.log(max(rss, 1e-300) / n) + 2 * k


def run_bench(
    j_values: Sequence[int],
    repetitions: int,
    out_dir=None,
    seed: int = 0,
) -> dict:
    """Time one penalty pass (gradient of every particle's penalty terms
    against a fixed constraint set) for each J; fit linear vs quadratic.

    Returns {"samples": [(J, rep, seconds)...], "aic_linear", "aic_quadratic",
    "prefers_linear", "ratio_max_min"} where ratio is t(max J)/t(min J) using
    per-J median times.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if not j_values:
        raise ValueError("at least one J value required")
    mesh = datagen.gen_ellipsoid_mesh(10.0, 20.0, 40.0, 3)
    mask = datagen.sine_boundary_mask(mesh)
    loops = fields.trace_boundary_loops(mesh, mask)
    field = fields.build_field(mesh, loops, mask)
    cons = [
        _constraints.FreeForm(field=field, mesh=mesh),
        _constraints.Plane(origin=(0.0, 0.0, -60.0), normal=(0.0, 0.0, 1.0)),
        _constraints.Sphere(center=(0.0, 0.0, 120.0), radius=20.0,
                            mode=_constraints.EXCLUDE_INSIDE),
    ]
    mu = _constraints.default_mu(mesh)
    rng = np.random.default_rng(seed)
    samples = []
    medians = {}
    for j in j_values:
        pts = rng.normal(size=(int(j), 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        pts *= np.array([10.0, 20.0, 40.0])
        sps = [fields.closest_point(mesh, p) for p in pts]
        pts = np.array([sp.position for sp in sps])
        # Each timing sample covers ~2048 particle queries regardless of J,
        # so small-J passes are not lost in timer noise; dt is per pass.
        inner = max(1, 2048 // int(j))
        times = []
        for rep in range(repetitions + 1):
            t0 = time.perf_counter()
            for _ in range(inner):
                for p, sp in zip(pts, sps):
                    _constraints.total_penalty_gradient(cons, p, mu, 2, sp)
            dt = (time.perf_counter() - t0) / inner
            if rep == 0:
                continue  # warm-up pass excluded from the record
            times.append(dt)
            samples.append((int(j), rep, dt))
        medians[int(j)] = float(np.median(times))
    arr_j = np.array([s[0] for s in samples], dtype=np.float64)
    arr_t = np.array([s[2] for s in samples], dtype=np.float64)
    result = {
        "samples": samples,
        "median_seconds": medians,
        "ratio_max_min": medians[max(medians)] / medians[min(medians)],
    }
    if len(set(arr_j)) >= 3:
        result["aic_linear"] = _fit_aic(arr_j, arr_t, (0, 1))
        result["aic_quadratic"] = _fit_aic(arr_j, arr_t, (0, 1, 2))
        result["prefers_linear"] = bool(result["aic_linear"] <= result["aic_quadratic"])
    else:
        result["fit_note"] = "need at least 3 distinct J values for the AIC comparison"
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        lines = ["J,rep,seconds"]
        lines += [f"{j},{rep},{dt:.9f}" for j, rep, dt in samples]
        (out_dir / "bench_scaling.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        summary = {k: v for k, v in result.items() if k != "samples"}
        (out_dir / "bench_report.json").write_text(
            json.dumps(summary, indent=2) + "\n", encoding="utf-8"
        )
    return result
