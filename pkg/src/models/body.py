"""Oriented simplicial protobody with a single reference chart."""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.errors import DegenerateCell, InvalidBody, OrientationViolation

logger = logging.getLogger(__name__)

DEFAULT_DEGENERACY_EPS = 1e-14


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def stacked_edge_matrices(cells: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Per-cell matrices whose columns are x_i - x_0 in cell-local vertex order.

    Returns an array of shape (n_cells, dim, dim).
    """
    corners = coords[cells]
    return np.transpose(corners[:, 1:, :] - corners[:, :1, :], (0, 2, 1))


def cell_scales(cells: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Longest edge of every cell, used to scale degeneracy thresholds."""
    corners = coords[cells]
    k = cells.shape[1]
    longest = np.zeros(len(cells))
    for i in range(k):
        for j in range(i + 1, k):
            longest = np.maximum(longest, np.linalg.norm(corners[:, i] - corners[:, j], axis=1))
    return longest


@dataclass(frozen=True)
class FacetTable:
    """Facets as sorted vertex tuples with their one or two incident cells.

    `right` is -1 on boundary facets. `cell_facets[c, k]` is the facet of
    cell c opposite its local vertex k.
    """

    vertices: np.ndarray
    left: np.ndarray
    right: np.ndarray
    cell_facets: np.ndarray

    @property
    def count(self) -> int:
        return len(self.vertices)

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(self.right >= 0)

    @property
    def boundary(self) -> np.ndarray:
        return np.flatnonzero(self.right < 0)

    @classmethod
    def build(cls, cells: np.ndarray) -> "FacetTable":
        m, k = cells.shape
        # facet opposite local vertex i: drop column i
        faces = np.stack([np.delete(cells, i, axis=1) for i in range(k)], axis=1)
        faces = np.sort(faces.reshape(m * k, k - 1), axis=1)
        unique, inverse, counts = np.unique(
            faces, axis=0, return_inverse=True, return_counts=True
        )
        inverse = inverse.reshape(-1)
        if np.any(counts > 2):
            bad = unique[np.flatnonzero(counts > 2)[0]]
            raise InvalidBody(f"facet {bad.tolist()} is shared by more than two cells")

        order = np.argsort(inverse, kind="stable")
        owners = order // k
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        left = owners[starts]
        right = np.full(len(unique), -1, dtype=np.int64)
        shared = counts == 2
        right[shared] = owners[starts[shared] + 1]

        return cls(
            vertices=_frozen(unique.astype(np.int64)),
            left=_frozen(left.astype(np.int64)),
            right=_frozen(right),
            cell_facets=_frozen(inverse.reshape(m, k).astype(np.int64)),
        )


@dataclass(frozen=True, eq=False)
class SimplicialBody:
    """Oriented simplicial mesh of triangles (dim 2) or tetrahedra (dim 3).

    Every cell has a positive reference edge-matrix determinant, so one
    orientation is shared by the whole body.
    """

    ref_coords: np.ndarray
    cells: np.ndarray
    degeneracy_eps: float = DEFAULT_DEGENERACY_EPS
    facets: FacetTable = field(init=False, repr=False)

    def __post_init__(self):
        coords = np.array(self.ref_coords, dtype=float)
        cells = np.array(self.cells, dtype=np.int64)
        if coords.ndim != 2 or coords.shape[1] not in (2, 3):
            raise InvalidBody(f"vertices must have shape (n, 2) or (n, 3), got {coords.shape}")
        dim = coords.shape[1]
        if cells.ndim != 2 or cells.shape[1] != dim + 1:
            raise InvalidBody(f"cells must have {dim + 1} vertices each, got shape {cells.shape}")
        if len(cells) == 0:
            raise InvalidBody("body has no cells")
        out_of_range = np.argwhere((cells < 0) | (cells >= len(coords)))
        if len(out_of_range):
            c, k = out_of_range[0]
            raise InvalidBody(
                f"cells[{c}][{k}] = {cells[c, k]} is out of range for {len(coords)} vertices"
            )
        ordered = np.sort(cells, axis=1)
        repeated = np.flatnonzero(np.any(ordered[:, 1:] == ordered[:, :-1], axis=1))
        if len(repeated):
            raise InvalidBody(f"cells[{repeated[0]}] repeats a vertex: {cells[repeated[0]].tolist()}")

        object.__setattr__(self, "ref_coords", _frozen(coords))
        object.__setattr__(self, "cells", _frozen(cells))
        object.__setattr__(self, "facets", FacetTable.build(cells))

        dets = np.linalg.det(stacked_edge_matrices(cells, coords))
        check_orientation(dets, cell_scales(cells, coords), dim, self.degeneracy_eps, "reference edge matrix")
        logger.debug(
            f"Body built: dim={dim}, vertices={len(coords)}, cells={len(cells)}, "
            f"facets={self.facets.count}"
        )

    @property
    def dim(self) -> int:
        return self.ref_coords.shape[1]

    @property
    def n_vertices(self) -> int:
        return len(self.ref_coords)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def edge_matrices(self, coords: Optional[np.ndarray] = None) -> np.ndarray:
        """Stacked edge matrices of every cell; reference chart when coords is None."""
        return stacked_edge_matrices(self.cells, self.ref_coords if coords is None else coords)

    def barycenters(self, coords: Optional[np.ndarray] = None) -> np.ndarray:
        points = self.ref_coords if coords is None else coords
        return points[self.cells].mean(axis=1)

    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.facets.vertices[self.facets.boundary])

    def min_edge_length(self) -> float:
        corners = self.ref_coords[self.cells]
        k = self.dim + 1
        lengths = [
            np.linalg.norm(corners[:, i] - corners[:, j], axis=1)
            for i in range(k)
            for j in range(i + 1, k)
        ]
        return float(np.min(lengths))

    def diameter(self, coords: Optional[np.ndarray] = None) -> float:
        points = self.ref_coords if coords is None else coords
        return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))

    def same_as(self, other: "SimplicialBody") -> bool:
        """Identical vertex coordinates and cell table."""
        if self is other:
            return True
        return (
            self.ref_coords.shape == other.ref_coords.shape
            and self.cells.shape == other.cells.shape
            and np.array_equal(self.cells, other.cells)
            and np.array_equal(self.ref_coords, other.ref_coords)
        )

    def submesh(self, keep_cells: np.ndarray) -> "SimplicialBody":
        """Body made of the selected cells, vertices renumbered in original order."""
        cells = self.cells[np.asarray(keep_cells)]
        used = np.unique(cells)
        renumber = np.full(self.n_vertices, -1, dtype=np.int64)
        renumber[used] = np.arange(len(used))
        return SimplicialBody(self.ref_coords[used], renumber[cells], self.degeneracy_eps)


def check_orientation(
    dets: np.ndarray,
    scales: np.ndarray,
    dim: int,
    eps: float,
    what: str,
) -> None:
    """Raise DegenerateCell for |det| below eps * scale**dim, OrientationViolation for det < 0."""
    thresholds = eps * np.maximum(scales, np.finfo(float).tiny) ** dim
    degenerate = np.flatnonzero(np.abs(dets) < thresholds)
    if len(degenerate):
        c = int(degenerate[0])
        raise DegenerateCell(c, float(dets[c]), f"{what} of cell {c} is degenerate (det={dets[c]:.3e})")
    flipped = np.flatnonzero(dets <= 0)
    if len(flipped):
        raise OrientationViolation(flipped.tolist(), what)
