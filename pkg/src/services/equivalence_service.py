"""Compatibility relation, embodiment classes and reference configurations."""

import logging
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy.linalg import lstsq

from src.config import RunConfig
from src.errors import BodyMismatch, ProvidedRepresentativeNotInClass
from src.models.configuration import Configuration
from src.models.diffeo import SpaceDiffeo
from src.models.point_configuration import (
    AffineDisplacement,
    BaseEmbodimentReport,
    BaseWitness,
    EmbodimentClass,
    ReferenceSystem,
)
from .decomposition_service import DecompositionService, relative_deviation

logger = logging.getLogger(__name__)

LOWEST_INDEX = "lowest-index"
BASE_EMBODIMENT = "e_bar"


def point_scale(*point_sets: np.ndarray) -> float:
    """Extent of the union of point sets, at least 1."""
    stacked = np.vstack([np.atleast_2d(p) for p in point_sets])
    if stacked.size == 0:
        return 1.0
    return max(1.0, float(np.ptp(stacked, axis=0).max()))


def find_affine_displacement(
    k1: np.ndarray, k2: np.ndarray, tol: float = 1e-9
) -> Optional[AffineDisplacement]:
    """Orientation preserving affine g with g(k1) = k2 on every point, if one exists.

    Solves for the deviation (A - I, c) from the identity by least squares on
    homogeneous coordinates. When k1 is affinely degenerate the minimum-norm
    deviation is returned with `degenerate` set.
    """
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    if k1.shape != k2.shape:
        raise BodyMismatch(f"point maps have shapes {k1.shape} and {k2.shape}")
    n_points, dim = k1.shape
    if n_points == 0:
        return AffineDisplacement(np.eye(dim), np.zeros(dim), 0.0, degenerate=True)

    H = np.column_stack([k1, np.ones(n_points)])
    deviation, _, rank, _ = lstsq(H, k2 - k1)
    A = np.eye(dim) + deviation[:dim].T
    c = deviation[dim]
    residual = float(np.linalg.norm(k1 @ A.T + c - k2, axis=1).max())
    if residual > tol * point_scale(k1, k2):
        logger.debug(f"No affine displacement: residual {residual:.3e}")
        return None
    if not np.linalg.det(A) > 0:
        logger.debug("Affine fit reverses orientation")
        return None
    degenerate = rank < dim + 1
    if degenerate:
        logger.warning(
            f"Affine correspondence is degenerate (rank {rank} < {dim + 1}); "
            "returning the minimum-norm displacement"
        )
    return AffineDisplacement(A, c, residual, degenerate=degenerate)


class EquivalenceService:
    """Embodiment classes of bundle configurations over one body."""

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()
        self.decomposition = DecompositionService(self.config)

    @staticmethod
    def _require_same_body(configs: Sequence[Configuration]) -> None:
        for i, c in enumerate(configs[1:], start=1):
            if not c.body.same_as(configs[0].body):
                raise BodyMismatch(f"configuration {i} lives over a different body than configuration 0")

    def deviation(self, first: Configuration, second: Configuration) -> float:
        """Max cellwise relative difference of the two embodiments."""
        self._require_same_body([first, second])
        return self.decomposition.compare_embodiments(
            self.decomposition.embodiment_of(first),
            self.decomposition.embodiment_of(second),
        )

    def are_compatible(self, first: Configuration, second: Configuration, tol: Optional[float] = None) -> bool:
        tol = self.config.tol_rel if tol is None else tol
        return self.deviation(first, second) <= tol

    def partition_into_embodiments(
        self, configs: Sequence[Configuration], tol: Optional[float] = None
    ) -> list[EmbodimentClass]:
        """Greedy partition against class representatives taken in input order."""
        tol = self.config.tol_rel if tol is None else tol
        if not configs:
            return []
        self._require_same_body(configs)
        invariants = [self.decomposition.embodiment_of(c).f_ae for c in configs]

        classes: list[EmbodimentClass] = []
        for i, f_ae in enumerate(invariants):
            for cls in classes:
                if relative_deviation(invariants[cls.representative], f_ae) <= tol:
                    cls.members.append(i)
                    break
            else:
                classes.append(EmbodimentClass(members=[i]))
        logger.info(f"Partitioned {len(configs)} configurations into {len(classes)} embodiments")
        return classes

    def base_embodiment_map(
        self, configs: Sequence[Configuration], classes: Sequence[EmbodimentClass]
    ) -> BaseEmbodimentReport:
        """Every class maps to the one base embodiment; witness the base displacements."""
        witnesses = []
        if classes:
            anchor = configs[classes[0].representative].base
        for k, cls in enumerate(classes):
            base = configs[cls.representative].base
            found = find_affine_displacement(anchor, base, self.config.tol_rel)
            if found is None:
                logger.warning(f"Base of class {k} is not affinely related to class 0; witness not constructed")
                note = "non-affine, not constructed"
            else:
                note = "affine"
            witnesses.append(BaseWitness(k, cls.representative, found, note))
        return BaseEmbodimentReport(
            image=[BASE_EMBODIMENT],
            class_to_base=[0] * len(classes),
            witnesses=witnesses,
            fibers_differ=len(classes) > 1,
        )

    def assign_references(
        self,
        configs: Sequence[Configuration],
        classes: Sequence[EmbodimentClass],
        chooser: Union[str, Mapping[int, int]] = LOWEST_INDEX,
    ) -> ReferenceSystem:
        """One reference per class, plus the affine displacement from it to each member."""
        references = []
        for k, cls in enumerate(classes):
            if isinstance(chooser, str):
                if chooser != LOWEST_INDEX:
                    raise ValueError(f"unknown chooser {chooser!r}")
                ref = cls.representative
            else:
                ref = int(chooser.get(k, cls.representative))
                if ref not in cls.members or not self.are_compatible(
                    configs[ref], configs[cls.representative]
                ):
                    raise ProvidedRepresentativeNotInClass(k, ref)
            references.append(ref)

        displacements = {}
        for cls, ref in zip(classes, references):
            for member in cls.members:
                displacements[member] = find_affine_displacement(
                    configs[ref].base, configs[member].base, self.config.tol_rel
                )
        return ReferenceSystem(list(classes), references, displacements)

    def displacement_from_reference(
        self, system: ReferenceSystem, configs: Sequence[Configuration], member: int
    ) -> Optional[SpaceDiffeo]:
        """Displacement carrying the member's reference onto the member, checked by push-forward."""
        found = system.displacements.get(member)
        if found is None:
            logger.warning(f"Configuration {member} is not affinely reachable from its reference")
            return None
        g = found.as_diffeo()
        reference = configs[system.reference_for(member)]
        pushed = self.decomposition.push_forward(reference, g)
        target = configs[member]
        scale = point_scale(target.base)
        base_error = float(np.abs(pushed.base - target.base).max())
        field_error = relative_deviation(target.field, pushed.field)
        if base_error > self.config.tol_rel * scale or field_error > self.config.tol_rel:
            logger.warning(
                f"Displacement to configuration {member} does not carry the field "
                f"(base error {base_error:.3e}, field error {field_error:.3e})"
            )
            return None
        return g
