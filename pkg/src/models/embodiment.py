"""Embodiments: oriented bundle isomorphisms over the identity of the body."""

from dataclasses import dataclass

import numpy as np

from src.errors import BodyMismatch, OrientationViolation
from .body import SimplicialBody, _frozen
from .configuration import Configuration


@dataclass(frozen=True, eq=False)
class Embodiment:
    """Per-cell F_ae over the identity base map.

    The set of embodiments on one body is a group under cellwise matrix
    product; `compose` and `inverse` realize it.
    """

    body: SimplicialBody
    f_ae: np.ndarray

    def __post_init__(self):
        array = np.array(self.f_ae, dtype=float)
        expected = (self.body.n_cells, self.body.dim, self.body.dim)
        if array.shape != expected:
            raise BodyMismatch(f"embodiment has shape {array.shape}, body needs {expected}")
        flipped = np.flatnonzero(~(np.linalg.det(array) > 0))
        if len(flipped):
            raise OrientationViolation(flipped.tolist(), "embodiment")
        object.__setattr__(self, "f_ae", _frozen(array))

    @classmethod
    def identity(cls, body: SimplicialBody) -> "Embodiment":
        return cls(body, np.broadcast_to(np.eye(body.dim), (body.n_cells, body.dim, body.dim)))

    def _require_same_body(self, other: "Embodiment") -> None:
        if not self.body.same_as(other.body):
            raise BodyMismatch("embodiments live over different bodies")

    def compose(self, other: "Embodiment") -> "Embodiment":
        """Cellwise self · other."""
        self._require_same_body(other)
        return Embodiment(self.body, self.f_ae @ other.f_ae)

    def inverse(self) -> "Embodiment":
        return Embodiment(self.body, np.linalg.inv(self.f_ae))

    def is_identity(self, tol: float = 1e-10) -> bool:
        deviation = np.linalg.norm(self.f_ae - np.eye(self.body.dim), axis=(1, 2))
        return bool(np.all(deviation <= tol * np.sqrt(self.body.dim)))


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    """compatible.field · anelastic.f_ae reproduces the original field."""

    compatible: Configuration
    anelastic: Embodiment
    residual: float


@dataclass(frozen=True, eq=False)
class ViewIFactors:
    """Release every small neighbourhood, then pack it incompatibly.

    `release[c]` is F_ae[c]^-1; `pack` is the original configuration;
    `total[c] = pack.field[c] @ release[c]` is the compatible tangent map.
    """

    release: np.ndarray
    pack: Configuration
    total: np.ndarray
