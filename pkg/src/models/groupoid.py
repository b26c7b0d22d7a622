"""Finite groupoid tables and the body-point quotient."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .diffeo import SpaceDiffeo


@dataclass
class FiniteGroupoid:
    """Objects 0..n_objects-1 and morphisms 0..n_morphisms-1.

    `compose[(m2, m1)]` is m2 after m1 and is defined when
    target[m1] == source[m2]. Tables are plain lists so a groupoid can be
    built up incrementally and mutated for verification trials.
    """

    n_objects: int
    source: list[int] = field(default_factory=list)
    target: list[int] = field(default_factory=list)
    identity: list[int] = field(default_factory=list)
    inverse: dict[int, int] = field(default_factory=dict)
    compose: dict[tuple[int, int], int] = field(default_factory=dict)
    witnesses: list[Optional[SpaceDiffeo]] = field(default_factory=list)

    @property
    def n_morphisms(self) -> int:
        return len(self.source)

    def add_morphism(self, source: int, target: int, witness: Optional[SpaceDiffeo] = None) -> int:
        self.source.append(source)
        self.target.append(target)
        self.witnesses.append(witness)
        return len(self.source) - 1

    def composable_pairs(self):
        """All (m2, m1) with target(m1) == source(m2)."""
        by_source: dict[int, list[int]] = {}
        for m in range(self.n_morphisms):
            by_source.setdefault(self.source[m], []).append(m)
        for m1 in range(self.n_morphisms):
            for m2 in by_source.get(self.target[m1], []):
                yield m2, m1

    def hom(self, source: int, target: int) -> list[int]:
        return [
            m for m in range(self.n_morphisms)
            if self.source[m] == source and self.target[m] == target
        ]

    def copy(self) -> "FiniteGroupoid":
        return FiniteGroupoid(
            n_objects=self.n_objects,
            source=list(self.source),
            target=list(self.target),
            identity=list(self.identity),
            inverse=dict(self.inverse),
            compose=dict(self.compose),
            witnesses=list(self.witnesses),
        )


class AxiomCheck(BaseModel):
    """Outcome of one groupoid axiom."""
    model_config = ConfigDict(populate_by_name=True)

    axiom: str
    passed: bool
    counterexample: Optional[list[int]] = Field(
        default=None, description="Violating object or morphism tuple"
    )
    detail: str = ""


class AxiomReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    checks: list[AxiomCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed(self) -> list[AxiomCheck]:
        return [check for check in self.checks if not check.passed]

    def check(self, axiom: str) -> AxiomCheck:
        return next(c for c in self.checks if c.axiom == axiom)


@dataclass(frozen=True, eq=False)
class PlacedPointSet:
    """Disjoint union of the configuration images: pairs (y, config id).

    `image_of[i][p]` is the element index of protobody point p under
    configuration i; coincident points of one configuration share an element.
    """

    points: np.ndarray
    config_ids: np.ndarray
    image_of: list[np.ndarray]

    def elements_of(self, config_index: int) -> np.ndarray:
        return np.flatnonzero(self.config_ids == config_index)


@dataclass(frozen=True, eq=False)
class BodyPointSpace:
    """Orbits of placed points; `projection[i]` maps elements of config i to orbit ids."""

    placed: PlacedPointSet
    orbits: list[list[int]]
    projection: list[dict[int, int]]

    @property
    def count(self) -> int:
        return len(self.orbits)

    def body_point_of(self, config_index: int, protobody_point: int) -> int:
        element = int(self.placed.image_of[config_index][protobody_point])
        return self.projection[config_index][element]
