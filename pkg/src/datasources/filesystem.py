"""Local filesystem document store."""

import logging
from pathlib import Path
from typing import TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from src.errors import DocumentError
from src.models.document import FamilyManifest, MeshFieldDocument
from .base import DocumentStore

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

CSV_FLOAT_FORMAT = "%.17g"


def format_validation_error(error: ValidationError) -> str:
    """One line per problem: `loc.path: message`."""
    lines = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item.get("loc", ())) or "<document>"
        lines.append(f"{loc}: {item.get('msg')}")
    return "; ".join(lines)


class FileSystemStore(DocumentStore):
    """Reads and writes documents on the local filesystem."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else None

    def _path(self, path: str) -> Path:
        p = Path(path)
        if self.root is not None and not p.is_absolute():
            p = self.root / p
        return p

    def _read_model(self, path: str, model: type[ModelT]) -> ModelT:
        location = self._path(path)
        try:
            text = location.read_text(encoding="utf-8")
        except OSError as e:
            raise DocumentError(f"cannot read {location}: {e}") from e
        try:
            return model.model_validate_json(text)
        except ValidationError as e:
            raise DocumentError(f"{location}: {format_validation_error(e)}") from e

    def _write(self, path: str, text: str) -> str:
        location = self._path(path)
        location.parent.mkdir(parents=True, exist_ok=True)
        location.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {location}")
        return str(location)

    def read_mesh(self, path: str) -> MeshFieldDocument:
        return self._read_model(path, MeshFieldDocument)

    def write_mesh(self, path: str, document: MeshFieldDocument) -> str:
        return self._write(path, document.model_dump_json(indent=2, exclude_none=True) + "\n")

    def read_manifest(self, path: str) -> FamilyManifest:
        return self._read_model(path, FamilyManifest)

    def resolve(self, manifest_path: str, relative: str) -> str:
        p = Path(relative)
        if p.is_absolute():
            return str(p)
        return str(self._path(manifest_path).parent / p)

    def write_points(self, path: str, points: np.ndarray) -> str:
        location = self._path(path)
        location.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(np.atleast_2d(np.asarray(points, dtype=float)))
        frame.to_csv(location, header=False, index=False, float_format=CSV_FLOAT_FORMAT)
        logger.info(f"Wrote {len(frame)} points to {location}")
        return str(location)

    def write_text(self, path: str, text: str) -> str:
        return self._write(path, text)
