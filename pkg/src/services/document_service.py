"""Conversion between on-disk documents and domain objects."""

import logging
from typing import Optional

import numpy as np

from src.config import RunConfig
from src.models.body import SimplicialBody
from src.models.configuration import Configuration, StandaloneField
from src.models.document import MESH_FORMAT, MeshFieldDocument
from src.models.embodiment import Embodiment
from .compatibility_service import tangent_maps

logger = logging.getLogger(__name__)


def _field_from_rows(rows: list[list[float]], dim: int) -> np.ndarray:
    return np.asarray(rows, dtype=float).reshape(-1, dim, dim)


def _rows_from_field(field: np.ndarray) -> list[list[float]]:
    m, n, _ = field.shape
    return field.reshape(m, n * n).tolist()


class DocumentService:
    """Builds bodies, fields and configurations from MeshFieldDocuments and back."""

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()

    def body(self, document: MeshFieldDocument) -> SimplicialBody:
        return SimplicialBody(
            np.asarray(document.vertices, dtype=float),
            np.asarray(document.cells, dtype=np.int64),
            degeneracy_eps=self.config.degeneracy_eps,
        )

    def base(self, document: MeshFieldDocument, body: SimplicialBody) -> np.ndarray:
        """Placed coordinates, or the reference placement when the document has none."""
        if document.base is None:
            return body.ref_coords.copy()
        return np.asarray(document.base, dtype=float)

    def configuration(self, document: MeshFieldDocument, body: Optional[SimplicialBody] = None) -> Configuration:
        """Configuration from a document; a missing field defaults to the tangent map of the base."""
        body = body or self.body(document)
        base = self.base(document, body)
        if document.field is None:
            field = tangent_maps(body, base)
        else:
            field = _field_from_rows(document.field, body.dim)
        return Configuration(body, base, field)

    def field(self, document: MeshFieldDocument, body: Optional[SimplicialBody] = None) -> StandaloneField:
        return self.configuration(document, body).as_field()

    def from_configuration(
        self, configuration: Configuration, metadata: Optional[dict[str, str]] = None
    ) -> MeshFieldDocument:
        body = configuration.body
        return MeshFieldDocument(
            format_version=MESH_FORMAT,
            dim=body.dim,
            vertices=body.ref_coords.tolist(),
            cells=body.cells.tolist(),
            base=configuration.base.tolist(),
            field=_rows_from_field(configuration.field),
            metadata=dict(metadata or {}),
        )

    def from_embodiment(
        self, embodiment: Embodiment, metadata: Optional[dict[str, str]] = None
    ) -> MeshFieldDocument:
        """Embodiment written over the identity base map."""
        body = embodiment.body
        return MeshFieldDocument(
            format_version=MESH_FORMAT,
            dim=body.dim,
            vertices=body.ref_coords.tolist(),
            cells=body.cells.tolist(),
            base=body.ref_coords.tolist(),
            field=_rows_from_field(embodiment.f_ae),
            metadata={"role": "embodiment", **(metadata or {})},
        )
