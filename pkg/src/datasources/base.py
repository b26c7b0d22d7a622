"""Abstract base class for document stores."""

from abc import ABC, abstractmethod

import numpy as np

from src.models.document import FamilyManifest, MeshFieldDocument


class DocumentStore(ABC):
    """
    Abstract interface for reading inputs and writing command outputs.

    Commands only talk to a store, so the filesystem can be swapped for an
    in-memory store in tests or another backend later.
    """

    @abstractmethod
    def read_mesh(self, path: str) -> MeshFieldDocument:
        """
        Read and validate a mesh+field document.

        Args:
            path: Document location

        Returns:
            Validated MeshFieldDocument

        Raises:
            DocumentError: unreadable file, bad JSON or failed validation; the
                message names the offending line or field path
        """
        pass

    @abstractmethod
    def write_mesh(self, path: str, document: MeshFieldDocument) -> str:
        """
        Write a mesh+field document.

        Returns:
            The location written
        """
        pass

    @abstractmethod
    def read_manifest(self, path: str) -> FamilyManifest:
        """
        Read and validate a family manifest.

        Args:
            path: Manifest location; document paths inside it are relative to it

        Returns:
            Validated FamilyManifest
        """
        pass

    @abstractmethod
    def resolve(self, manifest_path: str, relative: str) -> str:
        """Location of a document referenced from a manifest."""
        pass

    @abstractmethod
    def write_points(self, path: str, points: np.ndarray) -> str:
        """
        Write a point set as CSV, one point per line, 17 significant digits.

        Returns:
            The location written
        """
        pass

    @abstractmethod
    def write_text(self, path: str, text: str) -> str:
        """Write a text artifact (SVG report) and return its location."""
        pass
