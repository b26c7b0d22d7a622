"""Compatible/anelastic factorization and the action of space displacements."""

import logging
from typing import Optional

import numpy as np

from src.config import RunConfig
from src.errors import BodyMismatch, DegenerateCell, OrientationViolation
from src.models.configuration import Configuration
from src.models.diffeo import SpaceDiffeo
from src.models.embodiment import DecompositionResult, Embodiment, ViewIFactors
from .compatibility_service import tangent_maps

logger = logging.getLogger(__name__)


def relative_deviation(a: np.ndarray, b: np.ndarray) -> float:
    """Max over cells of ||a - b||_F / max(1, ||a||_F)."""
    scale = np.maximum(1.0, np.linalg.norm(a, axis=(1, 2)))
    return float((np.linalg.norm(a - b, axis=(1, 2)) / scale).max())


class DecompositionService:
    """Split a configuration into a compatible factor after its embodiment (F = F^e F^p)."""

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()

    def _guarded_tangent(self, configuration: Configuration) -> np.ndarray:
        T = tangent_maps(configuration.body, configuration.base)
        cond = np.linalg.cond(T)
        bad = np.flatnonzero(~(cond <= self.config.cond_max))
        if len(bad):
            c = int(bad[0])
            raise DegenerateCell(
                c,
                float(np.linalg.det(T[c])),
                f"tangent map of cell {c} is ill-conditioned (cond={cond[c]:.3e})",
            )
        return T

    def decompose(self, configuration: Configuration) -> DecompositionResult:
        """F_ae = T^-1 field per cell; the compatible factor keeps the base with field T."""
        T = self._guarded_tangent(configuration)
        f_ae = np.linalg.solve(T, configuration.field)
        residual = relative_deviation(configuration.field, T @ f_ae)
        result = DecompositionResult(
            compatible=Configuration(configuration.body, configuration.base, T),
            anelastic=Embodiment(configuration.body, f_ae),
            residual=residual,
        )
        logger.info(f"Decomposed {configuration.body.n_cells} cells, residual {residual:.3e}")
        return result

    def push_forward(self, configuration: Configuration, g: SpaceDiffeo) -> Configuration:
        """Apply a compatible displacement: base -> g(base), field -> Tg field.

        Affine g acts on the field by its matrix; other g use Tg at the
        barycenter of each placed cell.
        """
        if g.dim != configuration.body.dim:
            raise BodyMismatch(f"displacement of dim {g.dim} on a body of dim {configuration.body.dim}")
        base = g.apply(configuration.base)
        if g.is_affine:
            field = g.matrix @ configuration.field
        else:
            field = g.tangent(configuration.placed_barycenters()) @ configuration.field

        body = configuration.body
        flipped = np.flatnonzero(~(np.linalg.det(field) > 0))
        if len(flipped):
            raise OrientationViolation(flipped.tolist(), "pushed-forward field")
        flipped = np.flatnonzero(~(np.linalg.det(body.edge_matrices(base)) > 0))
        if len(flipped):
            raise OrientationViolation(flipped.tolist(), "pushed-forward placed edge matrix")
        return Configuration(body, base, field)

    def embodiment_of(self, configuration: Configuration) -> Embodiment:
        return self.decompose(configuration).anelastic

    def view_I_factors(self, configuration: Configuration) -> ViewIFactors:
        """Release each cell by F_ae^-1, then pack it with the original field."""
        f_ae = self.embodiment_of(configuration).f_ae
        release = np.linalg.inv(f_ae)
        return ViewIFactors(
            release=release,
            pack=configuration,
            total=configuration.field @ release,
        )

    def realize(self, embodiment: Embodiment, base: np.ndarray) -> Configuration:
        """Configuration with the given base whose embodiment is `embodiment`."""
        body = embodiment.body
        return Configuration(body, base, tangent_maps(body, np.asarray(base, dtype=float)) @ embodiment.f_ae)

    def material_vectors(self, configuration: Configuration, cell: int, vectors) -> np.ndarray:
        """Space vectors at a cell pulled back by the tangent map into the reference fiber."""
        T = tangent_maps(configuration.body, configuration.base)[cell]
        return np.linalg.solve(T, np.atleast_2d(vectors).T).T

    def compare_embodiments(self, first: Embodiment, second: Embodiment) -> float:
        if not first.body.same_as(second.body):
            raise BodyMismatch("embodiments live over different bodies")
        return relative_deviation(first.f_ae, second.f_ae)
