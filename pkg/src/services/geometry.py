"""Edge matrices, diffeomorphism actions, structured grids and simplex overlap."""

import itertools
import logging
from typing import Sequence

import numpy as np

from src.errors import DegenerateCell, InvalidBody
from src.models.body import SimplicialBody, cell_scales
from src.models.diffeo import SpaceDiffeo

logger = logging.getLogger(__name__)

# Kuhn subdivision of the unit cube: one tetrahedron per axis permutation
_KUHN_PATHS = list(itertools.permutations(range(3)))


def edge_matrix(body: SimplicialBody, cell: int, coords: np.ndarray | None = None) -> np.ndarray:
    """Columns x_i - x_0 (i = 1..n) of one cell under the given placement."""
    if not 0 <= cell < body.n_cells:
        raise IndexError(f"cell {cell} out of range for {body.n_cells} cells")
    points = body.ref_coords if coords is None else np.asarray(coords, dtype=float)
    corners = points[body.cells[cell]]
    matrix = (corners[1:] - corners[0]).T
    scale = cell_scales(body.cells[cell : cell + 1], points)[0]
    det = np.linalg.det(matrix)
    if abs(det) < body.degeneracy_eps * max(scale, np.finfo(float).tiny) ** body.dim:
        raise DegenerateCell(cell, float(det))
    return matrix


def apply_diffeo(g: SpaceDiffeo, y) -> np.ndarray:
    return g.apply(y)


def apply_tangent(g: SpaceDiffeo, y, v) -> np.ndarray:
    return g.apply_tangent(y, v)


def barycentric(body: SimplicialBody, coords: np.ndarray, cell: int, points) -> np.ndarray:
    """Barycentric coordinates (k, n+1) of points with respect to one placed cell."""
    corners = np.asarray(coords, dtype=float)[body.cells[cell]]
    E = (corners[1:] - corners[0]).T
    local = np.linalg.solve(E, (np.atleast_2d(points) - corners[0]).T).T
    return np.column_stack([1.0 - local.sum(axis=1), local])


def structured_grid(
    shape: Sequence[int],
    spacing: float | Sequence[float] = 1.0,
    origin: Sequence[float] | None = None,
) -> SimplicialBody:
    """Positively oriented simplicial grid over a box of squares or cubes.

    Squares are split along their (i,j)-(i+1,j+1) diagonal into
    [v00, v10, v11] and [v00, v11, v01]; cubes into six Kuhn tetrahedra
    sharing the main diagonal.
    """
    shape = tuple(int(s) for s in shape)
    dim = len(shape)
    if dim not in (2, 3) or min(shape) < 1:
        raise InvalidBody(f"grid shape must have 2 or 3 positive entries, got {shape}")
    spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (dim,))
    origin = np.zeros(dim) if origin is None else np.asarray(origin, dtype=float)

    axes = [np.arange(s + 1) for s in shape]
    lattice = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    coords = origin + lattice * spacing
    strides = np.array([np.prod([s + 1 for s in shape[k + 1 :]], dtype=np.int64) for k in range(dim)])

    corners = np.stack(np.meshgrid(*[np.arange(s) for s in shape], indexing="ij"), axis=-1)
    corners = corners.reshape(-1, dim)
    base = corners @ strides

    if dim == 2:
        v00, v10, v01, v11 = base, base + strides[0], base + strides[1], base + strides[0] + strides[1]
        cells = np.stack(
            [np.column_stack([v00, v10, v11]), np.column_stack([v00, v11, v01])], axis=1
        ).reshape(-1, 3)
    else:
        tets = []
        for path in _KUHN_PATHS:
            walk = [base]
            for axis in path:
                walk.append(walk[-1] + strides[axis])
            tets.append(np.column_stack(walk))
        cells = np.stack(tets, axis=1).reshape(-1, 4)
        # odd permutations are negatively oriented
        E = np.transpose(coords[cells][:, 1:] - coords[cells][:, :1], (0, 2, 1))
        flip = np.linalg.det(E) < 0
        cells[flip, 1], cells[flip, 2] = cells[flip, 2].copy(), cells[flip, 1].copy()

    logger.debug(f"Structured grid {shape}: {len(coords)} vertices, {len(cells)} cells")
    return SimplicialBody(coords, cells)


def _separating_axes(P: np.ndarray, Q: np.ndarray) -> list[np.ndarray]:
    dim = P.shape[1]
    if dim == 2:
        axes = []
        for S in (P, Q):
            for i, j in ((0, 1), (1, 2), (2, 0)):
                edge = S[j] - S[i]
                axes.append(np.array([-edge[1], edge[0]]))
        return axes
    faces = [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)]
    axes = []
    for S in (P, Q):
        for a, b, c in faces:
            axes.append(np.cross(S[b] - S[a], S[c] - S[a]))
    pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    for i, j in pairs:
        for k, l in pairs:
            axes.append(np.cross(P[j] - P[i], Q[l] - Q[k]))
    return axes


def simplices_overlap(P: np.ndarray, Q: np.ndarray, tol: float = 1e-12) -> bool:
    """True when two simplices share interior points.

    Separating-axis test over face normals (and edge cross products in 3D);
    simplices that only touch along a face, edge or vertex do not overlap.
    """
    scale = max(np.ptp(np.vstack([P, Q]), axis=0).max(), np.finfo(float).tiny)
    for axis in _separating_axes(P, Q):
        norm = np.linalg.norm(axis)
        if norm <= tol * scale:
            continue
        axis = axis / norm
        p, q = P @ axis, Q @ axis
        if p.max() <= q.min() + tol * scale or q.max() <= p.min() + tol * scale:
            return False
    return True
