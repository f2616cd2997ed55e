"""Correspondence particle optimization on mesh cohorts with painted,
plane, and sphere region-of-interest constraints."""

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    TriangleMesh,
    SurfacePoint,
    closest_point,
    project_to_surface,
    geodesic_from_sources,
    load_mesh,
    save_mesh,
)
