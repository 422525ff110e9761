"""Exact polyhedral core: point enumeration, facet enumeration, projections."""
from .core import (
    DEFAULT_POINT_CAP,
    MAX_HULL_DIM,
    CapExceeded,
    Canonicalizer,
    Equation,
    Inequality,
    Polyhedron,
    ProjectionCheck,
    canonical_polyhedron,
    certify_hull,
    check_projection_equality,
    coordinate_projection,
    count_by,
    count_facets,
    enumerate_feasible_points,
    extreme_points_of_integer_hull,
    format_facets,
    hull_facets,
    instance_hull,
    polyhedron_json,
    polyhedron_vertices,
    project_points,
    vertices_of,
)
from ._kernels import backend, select_backend
