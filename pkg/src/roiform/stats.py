"""PCA over corresponding particle systems: mean shape, modes, compactness.

Each shape contributes one observation vector in R^{3J} (its J particles
flattened row-major).  The decomposition works in the span of the I
observations, so cost scales with the cohort size, never with 3J x 3J.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "TooFewShapes",
    "ShapeModel",
    "shape_matrix",
    "compute_pca",
    "mode_shape",
    "compactness",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]


class TooFewShapes(ValueError):
    """PCA needs at least two shapes."""


@dataclass(frozen=True)
class ShapeModel:
    """Mean and principal modes of a cohort of corresponding particle sets.

    mean: (3J,) cohort mean vector.
    eigenvalues: (K,) descending, non-negative, K <= I - 1.
    eigenvectors: (3J, K), orthonormal columns, one per eigenvalue.
    """

    mean: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    num_shapes: int
    num_particles: int

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        vals = np.asarray(self.eigenvalues, dtype=np.float64)
        vecs = np.asarray(self.eigenvectors, dtype=np.float64)
        if mean.ndim != 1 or mean.shape[0] != 3 * self.num_particles:
            raise ValueError("mean must be a flat vector of length 3*J")
        if vals.ndim != 1 or vecs.shape != (mean.shape[0], vals.shape[0]):
            raise ValueError("eigenvectors must be (3J, K) matching K eigenvalues")
        if np.any(vals < -1e-10):
            raise ValueError("eigenvalues must be non-negative")
        vals = np.maximum(vals, 0.0)
        if np.any(np.diff(vals) > 1e-12 * max(vals[0] if vals.size else 0.0, 1.0)):
            raise ValueError("eigenvalues must be sorted descending")
        if vals.shape[0] > max(self.num_shapes - 1, 0):
            raise ValueError("at most I-1 modes for I shapes")
        if vecs.size:
            gram = vecs.T @ vecs
            if not np.allclose(gram, np.eye(vals.shape[0]), atol=1e-8):
                raise ValueError("eigenvector columns must be orthonormal")
        for name, arr in (("mean", mean), ("eigenvalues", vals), ("eigenvectors", vecs)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_modes(self) -> int:
        return int(self.eigenvalues.shape[0])


def shape_matrix(shapes) -> np.ndarray:
    """Stack per-shape particle arrays into an (I, 3J) observation matrix.

    Accepts a ParticleSystem (anything with a .positions list) or a plain
    sequence of (J, 3) arrays.
    """
    positions = getattr(shapes, "positions", shapes)
    rows = [np.asarray(p, dtype=np.float64) for p in positions]
    if not rows:
        raise TooFewShapes("no shapes given")
    j = rows[0].shape[0]
    for r in rows:
        if r.ndim != 2 or r.shape != (j, 3):
            raise ValueError("all shapes must share the same (J, 3) particle layout")
    return np.stack([r.reshape(-1) for r in rows])


def compute_pca(shapes) -> ShapeModel:
    """Principal modes of the corresponding particle vectors.

    Decomposes the centered observations through their I-dimensional row
    space (economy SVD), then lifts to R^{3J}; equivalent to
    eigendecomposing the 3J x 3J covariance normalized by (I - 1), at a
    cost that scales with the cohort size instead.
    """
    data = shape_matrix(shapes)
    i = data.shape[0]
    if i < 2:
        raise TooFewShapes(f"need at least 2 shapes, got {i}")
    mean = data.mean(axis=0)
    centered = data - mean
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    k = min(i - 1, data.shape[1])
    svals = svals[:k]
    vecs = vt[:k].T
    # Sign convention: largest-magnitude component of each mode positive,
    # so repeated runs serialize identically.
    flip = np.sign(vecs[np.argmax(np.abs(vecs), axis=0), np.arange(k)])
    flip[flip == 0] = 1.0
    vecs = vecs * flip
    eigenvalues = svals**2 / (i - 1)
    return ShapeModel(
        mean=mean,
        eigenvalues=eigenvalues,
        eigenvectors=vecs,
        num_shapes=i,
        num_particles=data.shape[1] // 3,
    )


def mode_shape(model: ShapeModel, mode: int, t: float) -> np.ndarray:
    """Particles of (mean + t * sqrt(eigenvalue) * eigenvector), shape (J, 3)."""
    if not 0 <= mode < model.num_modes:
        raise IndexError(f"mode {mode} out of range [0, {model.num_modes})")
    offset = t * np.sqrt(model.eigenvalues[mode]) * model.eigenvectors[:, mode]
    return (model.mean + offset).reshape(model.num_particles, 3)


def compactness(model: ShapeModel) -> np.ndarray:
    """Cumulative explained-variance ratios, one per mode, ending at 1.

    A model with zero total variance reports full coverage at every prefix.
    """
    total = float(model.eigenvalues.sum())
    if model.num_modes == 0:
        return np.zeros(0)
    if total <= 0.0:
        return np.ones(model.num_modes)
    return np.cumsum(model.eigenvalues) / total


def model_to_dict(model: ShapeModel) -> dict:
    return {
        "num_shapes": model.num_shapes,
        "num_particles": model.num_particles,
        "mean": model.mean.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "eigenvectors": model.eigenvectors.reshape(-1).tolist(),
    }


def model_from_dict(data: dict) -> ShapeModel:
    try:
        i = int(data["num_shapes"])
        j = int(data["num_particles"])
        vals = np.asarray(data["eigenvalues"], dtype=np.float64)
        vecs = np.asarray(data["eigenvectors"], dtype=np.float64)
        mean = np.asarray(data["mean"], dtype=np.float64)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed model payload: {exc!r}") from None
    if vecs.size != 3 * j * vals.shape[0]:
        raise ValueError("eigenvector payload does not match 3*J*K")
    return ShapeModel(
        mean=mean,
        eigenvalues=vals,
        eigenvectors=vecs.reshape(3 * j, vals.shape[0]),
        num_shapes=i,
        num_particles=j,
    )


def save_model(path, model: ShapeModel) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)) + "\n", encoding="utf-8")


def load_model(path) -> ShapeModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
