"""Diffeomorphisms of the flat space chart acting on points and tangent vectors."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.errors import DiffeoNotInvertible, DiffeoValidationError

logger = logging.getLogger(__name__)

# Vectorized callables: points (k, n) -> points (k, n); tangents (k, n) -> (k, n, n)
PointMap = Callable[[np.ndarray], np.ndarray]
TangentMap = Callable[[np.ndarray], np.ndarray]

FD_REL_TOL = 1e-5


def _as_points(y: np.ndarray, dim: int) -> tuple[np.ndarray, bool]:
    points = np.asarray(y, dtype=float)
    single = points.ndim == 1
    points = np.atleast_2d(points)
    if points.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {np.shape(y)}")
    return points, single


@dataclass(frozen=True, eq=False)
class SpaceDiffeo:
    """Orientation preserving diffeomorphism g of the space chart.

    Affine kind stores A and c and acts by y -> A y + c. User kind stores a
    vectorized point map and its exact tangent map; use `SpaceDiffeo.user`
    so the pair is validated by finite differences.
    """

    kind: str
    dim: int
    matrix: Optional[np.ndarray] = None
    translation: Optional[np.ndarray] = None
    point_map: Optional[PointMap] = None
    tangent_map: Optional[TangentMap] = None
    inverse_map: Optional[PointMap] = None
    name: str = ""

    @classmethod
    def affine(cls, matrix, translation=None, name: str = "affine") -> "SpaceDiffeo":
        A = np.array(matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DiffeoValidationError(f"affine matrix must be square, got shape {A.shape}")
        c = np.zeros(A.shape[0]) if translation is None else np.array(translation, dtype=float)
        if c.shape != (A.shape[0],):
            raise DiffeoValidationError(
                f"translation must have length {A.shape[0]}, got shape {c.shape}"
            )
        det = np.linalg.det(A)
        if not det > 0:
            raise DiffeoValidationError(f"affine displacement needs det(A) > 0, got {det:.6g}")
        A.setflags(write=False)
        c.setflags(write=False)
        return cls(kind="affine", dim=A.shape[0], matrix=A, translation=c, name=name)

    @classmethod
    def identity(cls, dim: int) -> "SpaceDiffeo":
        return cls.affine(np.eye(dim), name="identity")

    @classmethod
    def translation_by(cls, c) -> "SpaceDiffeo":
        c = np.asarray(c, dtype=float)
        return cls.affine(np.eye(len(c)), c, name="translation")

    @classmethod
    def rotation(cls, theta: float, translation=None) -> "SpaceDiffeo":
        """Planar rotation by theta (radians)."""
        cos, sin = np.cos(theta), np.sin(theta)
        return cls.affine([[cos, -sin], [sin, cos]], translation, name="rotation")

    @classmethod
    def user(
        cls,
        dim: int,
        point_map: PointMap,
        tangent_map: TangentMap,
        inverse_map: Optional[PointMap] = None,
        name: str = "user",
        sample_points: Optional[np.ndarray] = None,
    ) -> "SpaceDiffeo":
        """Register a user diffeomorphism after a finite-difference tangent check."""
        g = cls(
            kind="user",
            dim=dim,
            point_map=point_map,
            tangent_map=tangent_map,
            inverse_map=inverse_map,
            name=name,
        )
        if sample_points is None:
            sample_points = np.random.default_rng(0).uniform(-1.0, 1.0, size=(8, dim))
        g.validate(np.atleast_2d(np.asarray(sample_points, dtype=float)))
        return g

    @property
    def is_affine(self) -> bool:
        return self.kind == "affine"

    def validate(self, points: np.ndarray) -> None:
        """Compare the tangent rule against central differences of the point map."""
        values = np.asarray(self.point_map(points), dtype=float)
        if values.shape != points.shape:
            raise DiffeoValidationError(
                f"{self.name}: point map returned shape {values.shape}, expected {points.shape}"
            )
        tangents = np.asarray(self.tangent_map(points), dtype=float)
        if tangents.shape != (len(points), self.dim, self.dim):
            raise DiffeoValidationError(
                f"{self.name}: tangent map returned shape {tangents.shape}, "
                f"expected {(len(points), self.dim, self.dim)}"
            )

        steps = 1e-6 * np.maximum(1.0, np.abs(points).max(axis=1))
        numeric = np.empty_like(tangents)
        for j in range(self.dim):
            offset = np.zeros_like(points)
            offset[:, j] = steps
            forward = np.asarray(self.point_map(points + offset), dtype=float)
            backward = np.asarray(self.point_map(points - offset), dtype=float)
            numeric[:, :, j] = (forward - backward) / (2.0 * steps[:, None])

        errors = np.linalg.norm(numeric - tangents, axis=(1, 2)) / np.maximum(
            1.0, np.linalg.norm(tangents, axis=(1, 2))
        )
        worst = int(np.argmax(errors))
        if errors[worst] > FD_REL_TOL:
            raise DiffeoValidationError(
                f"{self.name}: tangent map disagrees with finite differences at "
                f"{points[worst].tolist()} (relative error {errors[worst]:.3e})"
            )
        dets = np.linalg.det(tangents)
        if np.any(dets <= 0):
            bad = int(np.flatnonzero(dets <= 0)[0])
            raise DiffeoValidationError(
                f"{self.name}: tangent map is not orientation preserving at {points[bad].tolist()}"
            )
        logger.debug(f"Validated user diffeomorphism {self.name} at {len(points)} points")

    def apply(self, y) -> np.ndarray:
        """g(y) for one point (n,) or a stack of points (k, n)."""
        points, single = _as_points(y, self.dim)
        if self.is_affine:
            out = points @ self.matrix.T + self.translation
        else:
            out = np.asarray(self.point_map(points), dtype=float)
        return out[0] if single else out

    def tangent(self, y) -> np.ndarray:
        """Tg(y) as (n, n) for one point or (k, n, n) for a stack."""
        points, single = _as_points(y, self.dim)
        if self.is_affine:
            out = np.broadcast_to(self.matrix, (len(points), self.dim, self.dim)).copy()
        else:
            out = np.asarray(self.tangent_map(points), dtype=float)
        return out[0] if single else out

    def apply_tangent(self, y, v) -> np.ndarray:
        """Tg(y) v; for the affine kind this is A v regardless of y."""
        if self.is_affine:
            return np.asarray(v, dtype=float) @ self.matrix.T
        return np.einsum("...ij,...j->...i", self.tangent(y), np.asarray(v, dtype=float))

    def compose(self, other: "SpaceDiffeo") -> "SpaceDiffeo":
        """self after other, i.e. y -> self(other(y))."""
        if self.dim != other.dim:
            raise DiffeoValidationError(f"cannot compose dims {self.dim} and {other.dim}")
        if self.is_affine and other.is_affine:
            return SpaceDiffeo.affine(
                self.matrix @ other.matrix,
                self.matrix @ other.translation + self.translation,
                name=f"{self.name}*{other.name}",
            )

        def point_map(points):
            return self.apply(other.apply(points))

        def tangent_map(points):
            return self.tangent(other.apply(points)) @ other.tangent(points)

        inverse_map = None
        if self.invertible and other.invertible:
            def inverse_map(points):
                return other.inverse().apply(self.inverse().apply(points))

        return SpaceDiffeo(
            kind="user",
            dim=self.dim,
            point_map=point_map,
            tangent_map=tangent_map,
            inverse_map=inverse_map,
            name=f"{self.name}*{other.name}",
        )

    @property
    def invertible(self) -> bool:
        return self.is_affine or self.inverse_map is not None

    def inverse(self) -> "SpaceDiffeo":
        if self.is_affine:
            A_inv = np.linalg.inv(self.matrix)
            return SpaceDiffeo.affine(A_inv, -A_inv @ self.translation, name=f"{self.name}^-1")
        if self.inverse_map is None:
            raise DiffeoNotInvertible(f"{self.name}: no inverse map was supplied")

        def tangent_map(points):
            return np.linalg.inv(self.tangent(self.inverse_map(points)))

        return SpaceDiffeo(
            kind="user",
            dim=self.dim,
            point_map=self.inverse_map,
            tangent_map=tangent_map,
            inverse_map=self.point_map,
            name=f"{self.name}^-1",
        )

    def describe(self) -> dict:
        if self.is_affine:
            return {
                "kind": "affine",
                "matrix": self.matrix.tolist(),
                "translation": self.translation.tolist(),
            }
        return {"kind": "user", "name": self.name}
