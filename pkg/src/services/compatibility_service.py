"""Tangent maps, holonomicity and gradient integrability of per-cell fields."""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components
from scipy.spatial import cKDTree

from src.config import RunConfig
from src.errors import DisconnectedBody
from src.models.body import SimplicialBody
from src.models.configuration import (
    Configuration,
    GradientVerdict,
    HolonomyReport,
    InjectivityResult,
    StandaloneField,
)
from .geometry import simplices_overlap

logger = logging.getLogger(__name__)


def tangent_maps(body: SimplicialBody, base: np.ndarray) -> np.ndarray:
    """Constant gradient E_placed · E_ref^-1 of the piecewise-affine base map, per cell."""
    E_ref = body.edge_matrices()
    E_def = body.edge_matrices(base)
    return np.swapaxes(
        np.linalg.solve(np.swapaxes(E_ref, 1, 2), np.swapaxes(E_def, 1, 2)), 1, 2
    )


def dual_graph(body: SimplicialBody):
    """Sparse cell adjacency across interior facets."""
    interior = body.facets.interior
    left = body.facets.left[interior]
    right = body.facets.right[interior]
    data = np.ones(len(interior))
    return coo_matrix((data, (left, right)), shape=(body.n_cells, body.n_cells)).tocsr()


@dataclass(frozen=True, eq=False)
class CellIntegration:
    """Per-cell affine maps x = F_c X + t_c chained along a dual spanning tree."""

    order: np.ndarray
    translations: np.ndarray


def integrate_cells(body: SimplicialBody, field: np.ndarray) -> CellIntegration:
    """Chain per-cell affine maps from cell 0 across tree facets.

    Each child agrees with its parent at the first vertex of the shared facet,
    so tree facets carry only the tangential jump of the field.
    """
    graph = dual_graph(body)
    n_components, _ = connected_components(graph, directed=False)
    if n_components != 1:
        raise DisconnectedBody(n_components)

    order, predecessors = breadth_first_order(
        graph, 0, directed=False, return_predecessors=True
    )
    facets = body.facets
    shared = {}
    for f in facets.interior:
        shared[(int(facets.left[f]), int(facets.right[f]))] = f
        shared[(int(facets.right[f]), int(facets.left[f]))] = f

    X = body.ref_coords
    translations = np.zeros((body.n_cells, body.dim))
    for c in order[1:]:
        p = predecessors[c]
        anchor = X[facets.vertices[shared[(int(c), int(p))], 0]]
        translations[c] = translations[p] + (field[p] - field[c]) @ anchor

    logger.debug(f"Integrated {len(order)} cells along a dual spanning tree")
    return CellIntegration(order=order, translations=translations)


def facet_defects(body: SimplicialBody, field: np.ndarray, integration: CellIntegration):
    """Position mismatch of the two cell maps at every vertex of every interior facet.

    Returns (interior facet ids, defects of shape (n_interior, dim, dim)).
    """
    facets = body.facets
    interior = facets.interior
    L, R = facets.left[interior], facets.right[interior]
    X = body.ref_coords[facets.vertices[interior]]
    t = integration.translations
    from_left = np.einsum("fij,fkj->fki", field[L], X) + t[L][:, None, :]
    from_right = np.einsum("fij,fkj->fki", field[R], X) + t[R][:, None, :]
    return interior, from_left - from_right


def facet_incompatibility(body: SimplicialBody, field: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Squared tangential jumps plus squared closure defect per interior facet."""
    integration = integrate_cells(body, field)
    interior, defects = facet_defects(body, field, integration)
    facets = body.facets
    L, R = facets.left[interior], facets.right[interior]
    X = body.ref_coords[facets.vertices[interior]]
    jump = field[L] - field[R]

    k = body.dim
    tangential = np.zeros(len(interior))
    for a in range(k):
        for b in range(a + 1, k):
            t = X[:, b] - X[:, a]
            tangential += np.sum(np.einsum("fij,fj->fi", jump, t) ** 2, axis=1)
    closure = np.sum(defects[:, 0, :] ** 2, axis=1)
    return interior, tangential + closure


class CompatibilityService:
    """Holonomicity and integrability checks for configurations and fields."""

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()

    def tangent_map(self, configuration: Configuration) -> StandaloneField:
        """Discrete tangent map of the base map, one matrix per cell."""
        return StandaloneField(
            configuration.body, tangent_maps(configuration.body, configuration.base)
        )

    def is_holonomic(self, configuration: Configuration, tol: Optional[float] = None) -> HolonomyReport:
        """Compare the field against the tangent map of the base, cell by cell."""
        tol = self.config.tol_rel if tol is None else tol
        T = tangent_maps(configuration.body, configuration.base)
        scale = np.maximum(1.0, np.linalg.norm(T, axis=(1, 2)))
        residuals = np.linalg.norm(configuration.field - T, axis=(1, 2)) / scale
        holonomic = bool(residuals.max() <= tol)
        logger.info(
            f"Holonomicity: {'holonomic' if holonomic else 'not holonomic'} "
            f"(max residual {residuals.max():.3e}, tol {tol:.1e})"
        )
        return HolonomyReport(holonomic=holonomic, residuals=residuals, tol=tol)

    def field_is_gradient(self, field: StandaloneField, tol: Optional[float] = None) -> GradientVerdict:
        """Integrate the field along a dual spanning tree and test every interior facet."""
        tol = self.config.tol_rel if tol is None else tol
        body = field.body
        F = field.field
        integration = integrate_cells(body, F)
        interior, defects = facet_defects(body, F, integration)

        scale = max(1.0, body.diameter() * float(np.linalg.norm(F, axis=(1, 2)).max()))
        per_vertex = np.linalg.norm(defects, axis=2)
        bad = per_vertex > tol * scale
        violating = sorted(int(f) for f in interior[np.any(bad, axis=1)])
        inconsistent = sorted(
            {int(v) for v in body.facets.vertices[interior][bad].ravel()}
        )
        max_defect = float(per_vertex.max() / scale) if per_vertex.size else 0.0

        base = None
        if not violating:
            base = self._reconstruct_base(body, F, integration)
        logger.info(
            f"Gradient test: {len(violating)} violating facets of {len(interior)} interior "
            f"(max relative defect {max_defect:.3e})"
        )
        return GradientVerdict(
            is_gradient=not violating,
            base=base,
            violating_facets=violating,
            inconsistent_vertices=inconsistent,
            max_defect=max_defect,
            tol=tol,
        )

    @staticmethod
    def _reconstruct_base(body: SimplicialBody, F: np.ndarray, integration: CellIntegration) -> np.ndarray:
        rank = np.empty(body.n_cells, dtype=np.int64)
        rank[integration.order] = np.arange(len(integration.order))
        cell_of = np.repeat(np.arange(body.n_cells), body.dim + 1)
        vertex_of = body.cells.ravel()
        by_rank = np.argsort(rank[cell_of], kind="stable")
        _, first = np.unique(vertex_of[by_rank], return_index=True)
        cells = cell_of[by_rank][first]
        X = body.ref_coords
        base = np.einsum("vij,vj->vi", F[cells], X) + integration.translations[cells]
        return base - base[0]

    def incompatibility_norm(self, field: StandaloneField) -> float:
        """Sum over interior facets of squared tangential jumps and closure defects."""
        _, contributions = facet_incompatibility(field.body, field.field)
        return float(contributions.sum())

    def cell_residuals(self, field: StandaloneField) -> np.ndarray:
        """Each facet contribution split evenly between its two cells."""
        body = field.body
        interior, contributions = facet_incompatibility(body, field.field)
        residuals = np.zeros(body.n_cells)
        np.add.at(residuals, body.facets.left[interior], 0.5 * contributions)
        np.add.at(residuals, body.facets.right[interior], 0.5 * contributions)
        return residuals

    def check_injectivity(self, configuration: Configuration) -> InjectivityResult:
        """Pairwise overlap test on bounding-box candidates plus coincident vertices."""
        body = configuration.body
        placed = configuration.base[body.cells]
        lo, hi = placed.min(axis=1), placed.max(axis=1)
        tol = 1e-12 * body.diameter(configuration.base)

        coincident = sorted(
            tuple(sorted(pair)) for pair in cKDTree(configuration.base).query_pairs(tol)
        )
        overlapping = []
        for i in range(body.n_cells - 1):
            candidates = np.flatnonzero(
                np.all(lo[i + 1 :] < hi[i] - tol, axis=1) & np.all(hi[i + 1 :] > lo[i] + tol, axis=1)
            ) + i + 1
            for j in candidates:
                if simplices_overlap(placed[i], placed[j]):
                    overlapping.append((i, int(j)))

        injective = not overlapping and not coincident
        logger.info(
            f"Injectivity: {len(overlapping)} overlapping cell pairs, "
            f"{len(coincident)} coincident vertex pairs"
        )
        return InjectivityResult(
            injective=injective,
            overlapping_cells=overlapping,
            coincident_vertices=coincident,
            configuration=replace(configuration, injective=True) if injective else None,
        )
