"""Discrete configurations: vertex placement plus a per-cell linear field."""

from dataclasses import dataclass, replace

import numpy as np

from src.errors import BodyMismatch, OrientationViolation
from .body import SimplicialBody, _frozen, cell_scales, check_orientation


def _field_array(body: SimplicialBody, values) -> np.ndarray:
    array = np.array(values, dtype=float)
    expected = (body.n_cells, body.dim, body.dim)
    if array.shape != expected:
        raise BodyMismatch(f"field has shape {array.shape}, body needs {expected}")
    return array


def _check_field_orientation(field: np.ndarray) -> None:
    dets = np.linalg.det(field)
    flipped = np.flatnonzero(~(dets > 0))
    if len(flipped):
        raise OrientationViolation(flipped.tolist(), "field")


@dataclass(frozen=True, eq=False)
class StandaloneField:
    """Per-cell linear maps with no base map attached."""

    body: SimplicialBody
    field: np.ndarray

    def __post_init__(self):
        array = _field_array(self.body, self.field)
        _check_field_orientation(array)
        object.__setattr__(self, "field", _frozen(array))


@dataclass(frozen=True, eq=False)
class Configuration:
    """Vector bundle morphism over a simplicial body.

    `base` places every vertex in space; `field[c]` maps reference vectors of
    cell c to space vectors. `injective` is True only after a global overlap
    test has passed.
    """

    body: SimplicialBody
    base: np.ndarray
    field: np.ndarray
    injective: bool = False

    def __post_init__(self):
        base = np.array(self.base, dtype=float)
        if base.shape != self.body.ref_coords.shape:
            raise BodyMismatch(
                f"base has shape {base.shape}, body needs {self.body.ref_coords.shape}"
            )
        check_orientation(
            np.linalg.det(self.body.edge_matrices(base)),
            cell_scales(self.body.cells, base),
            self.body.dim,
            self.body.degeneracy_eps,
            "placed edge matrix",
        )
        array = _field_array(self.body, self.field)
        _check_field_orientation(array)
        object.__setattr__(self, "base", _frozen(base))
        object.__setattr__(self, "field", _frozen(array))

    @classmethod
    def identity(cls, body: SimplicialBody) -> "Configuration":
        """Reference placement with the identity field: the perfect crystal."""
        eye = np.broadcast_to(np.eye(body.dim), (body.n_cells, body.dim, body.dim))
        return cls(body, body.ref_coords.copy(), eye)

    def with_field(self, field) -> "Configuration":
        return replace(self, field=field, injective=False)

    def as_field(self) -> StandaloneField:
        return StandaloneField(self.body, self.field)

    def placed_barycenters(self) -> np.ndarray:
        return self.body.barycenters(self.base)


@dataclass(frozen=True, eq=False)
class HolonomyReport:
    """Per-cell relative residual ||field - T base||_F / max(1, ||T base||_F)."""

    holonomic: bool
    residuals: np.ndarray
    tol: float

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if len(self.residuals) else 0.0

    @property
    def worst_cell(self) -> int:
        return int(np.argmax(self.residuals))


@dataclass(frozen=True, eq=False)
class GradientVerdict:
    """Outcome of integrating a standalone field over the body.

    On success `base` is the reconstructed vertex placement with vertex 0 at
    the origin; otherwise `violating_facets` lists the interior facets whose
    cells disagree on the position of a shared vertex.
    """

    is_gradient: bool
    base: np.ndarray | None
    violating_facets: list[int]
    inconsistent_vertices: list[int]
    max_defect: float
    tol: float


@dataclass(frozen=True, eq=False)
class InjectivityResult:
    injective: bool
    overlapping_cells: list[tuple[int, int]]
    coincident_vertices: list[tuple[int, int]]
    configuration: Configuration | None = None
