"""Exception hierarchy for the kinematics toolkit."""

from typing import Optional, Sequence


class AnelkinError(Exception):
    """Base class for every error raised by the toolkit."""


class InvalidBody(AnelkinError):
    """Cell table references missing vertices, repeats a vertex or is non-manifold."""


class DegenerateCell(AnelkinError):
    """A cell's edge matrix is (numerically) singular."""

    def __init__(self, cell: int, det: float, message: Optional[str] = None):
        self.cell = cell
        self.det = det
        super().__init__(message or f"cell {cell} is degenerate (det={det:.3e})")


class OrientationViolation(AnelkinError):
    """A placed cell or a fiber map has non-positive determinant."""

    def __init__(self, cells: Sequence[int], what: str = "placed edge matrix"):
        self.cells = list(cells)
        self.what = what
        shown = ", ".join(str(c) for c in self.cells[:10])
        more = "" if len(self.cells) <= 10 else f" (+{len(self.cells) - 10} more)"
        super().__init__(f"{what} has det <= 0 on cells [{shown}]{more}")


class DisconnectedBody(AnelkinError):
    """The dual graph of the body has more than one component."""

    def __init__(self, n_components: int):
        self.n_components = n_components
        super().__init__(f"body has {n_components} connected components, expected 1")


class BodyMismatch(AnelkinError):
    """Two objects that must live over the same body do not."""


class DiffeoValidationError(AnelkinError):
    """A space diffeomorphism failed registration checks."""


class DiffeoNotInvertible(AnelkinError):
    """A user diffeomorphism was used where its inverse is needed but none was supplied."""


class ProvidedRepresentativeNotInClass(AnelkinError):
    """A chosen reference configuration is not a member of its class."""

    def __init__(self, class_index: int, config_index: int):
        self.class_index = class_index
        self.config_index = config_index
        super().__init__(
            f"configuration {config_index} is not a member of embodiment class {class_index}"
        )


class AxiomsNotVerified(AnelkinError):
    """An operation needs a groupoid whose axioms hold."""


class ClosureExplosion(AnelkinError):
    """Morphism closure exceeded the configured bound."""

    def __init__(self, bound: int):
        self.bound = bound
        super().__init__(f"morphism closure exceeded {bound} morphisms")


class WitnessInconsistency(AnelkinError):
    """A witness displacement maps an image point outside the target image."""

    def __init__(
        self,
        source: int,
        target: int,
        point: int,
        distance: float,
        message: Optional[str] = None,
    ):
        self.source = source
        self.target = target
        self.point = point
        self.distance = distance
        super().__init__(
            message
            or f"witness {source}->{target} sends image point {point} "
            f"{distance:.3e} away from the target image"
        )


class CoreOnFacet(AnelkinError):
    """The dislocation core lies on a facet (or outside the grid)."""


class SegmentOnFacet(AnelkinError):
    """A loop segment runs along a facet, so its cell is ambiguous."""

    def __init__(self, segment: int, cells: Sequence[int]):
        self.segment = segment
        self.cells = list(cells)
        super().__init__(
            f"loop segment {segment} lies on the facet shared by cells {self.cells}; "
            "perturb the loop"
        )


class SegmentOutsideBody(AnelkinError):
    """Part of a loop segment is not covered by any cell."""

    def __init__(self, segment: int):
        self.segment = segment
        super().__init__(f"loop segment {segment} leaves the body")


class LoopNotClosed(AnelkinError):
    """First and last loop points differ."""


class WindowUnbounded(AnelkinError):
    """Cut-and-project acceptance window is not bounded."""


class DegenerateFrame(AnelkinError):
    """Subspace frame vectors are linearly dependent."""


class PointBudgetExceeded(AnelkinError):
    """Strip enumeration produced more points than the count bound allows."""

    def __init__(self, count: int, bound: int):
        self.count = count
        self.bound = bound
        super().__init__(f"cut-and-project produced {count} points, bound is {bound}")


class InvalidSpec(AnelkinError):
    """Synthetic-data spec is out of range."""


class DocumentError(AnelkinError):
    """Input document failed to parse or validate."""


class ConfigError(AnelkinError):
    """Invalid run configuration."""


class UsageError(AnelkinError):
    """Bad command-line arguments."""
