"""Finite point configurations, embodiment classes and reference systems."""

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from src.errors import BodyMismatch
from .diffeo import SpaceDiffeo

AFFINE_GROUP = "affine"


@dataclass(frozen=True, eq=False)
class PointConfigurationSet:
    """Maps of one finite protobody into space, plus the displacement group.

    Configurations need not be injective. `group` is either "affine" (search
    the affine subgroup) or an explicit list of displacements.
    """

    labels: list[str]
    configs: list[np.ndarray]
    group: Union[str, list[SpaceDiffeo]] = AFFINE_GROUP

    def __post_init__(self):
        arrays = [np.array(c, dtype=float) for c in self.configs]
        for i, array in enumerate(arrays):
            if array.ndim != 2 or array.shape[0] != len(self.labels):
                raise BodyMismatch(
                    f"configs[{i}] has shape {array.shape}; protobody has {len(self.labels)} points"
                )
            if array.shape[1] != arrays[0].shape[1]:
                raise BodyMismatch(f"configs[{i}] lives in a different space dimension")
            array.setflags(write=False)
        object.__setattr__(self, "configs", arrays)
        if isinstance(self.group, str) and self.group != AFFINE_GROUP:
            raise ValueError(f"unknown group {self.group!r}; expected 'affine' or a displacement list")

    @property
    def dim(self) -> int:
        return self.configs[0].shape[1] if self.configs else 0

    @property
    def searches_affine(self) -> bool:
        return isinstance(self.group, str)


@dataclass(frozen=True, eq=False)
class AffineDisplacement:
    """Affine fit k2 ~ A k1 + c found by least squares."""

    matrix: np.ndarray
    translation: np.ndarray
    residual: float
    degenerate: bool = False

    def as_diffeo(self) -> SpaceDiffeo:
        return SpaceDiffeo.affine(self.matrix, self.translation, name="found")


@dataclass
class EmbodimentClass:
    """Indices of configurations sharing one embodiment; representative is the lowest."""

    members: list[int]

    @property
    def representative(self) -> int:
        return self.members[0]


@dataclass
class BaseWitness:
    class_index: int
    representative: int
    displacement: Optional[AffineDisplacement]
    note: str


@dataclass
class BaseEmbodimentReport:
    """All embodiment classes map onto the single base embodiment of embeddings."""

    image: list[str]
    class_to_base: list[int]
    witnesses: list[BaseWitness]
    fibers_differ: bool


@dataclass
class ReferenceSystem:
    """Chosen reference configuration per embodiment class."""

    classes: list[EmbodimentClass]
    references: list[int]
    displacements: dict[int, Optional[AffineDisplacement]] = field(default_factory=dict)

    def class_of(self, config_index: int) -> int:
        for k, cls in enumerate(self.classes):
            if config_index in cls.members:
                return k
        raise KeyError(f"configuration {config_index} belongs to no class")

    def reference_for(self, config_index: int) -> int:
        return self.references[self.class_of(config_index)]
