"""Specs and results for synthetic crystal data."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.errors import InvalidSpec
from .configuration import Configuration

DISLOCATION_KINDS = ("edge", "screw")
SAMPLINGS = ("volterra", "barycenter")
WINDOW_KINDS = ("canonical", "box")


@dataclass(frozen=True)
class DislocationSpec:
    """Isolated dislocation in a 2D structured grid.

    shape counts squares per side; the default core sits at the centroid of
    the lower triangle of the square just up-right of the grid centre.
    """

    shape: tuple[int, int] = (32, 32)
    burgers: tuple[float, float] = (1.0, 0.0)
    spacing: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)
    core: Optional[tuple[float, float]] = None
    kind: str = "edge"
    sampling: str = "volterra"
    nu: float = 0.3
    core_radius: float = 0.0

    def __post_init__(self):
        for name in ("shape", "burgers", "origin"):
            if len(getattr(self, name)) != 2:
                raise InvalidSpec(f"{name} must have 2 components, got {tuple(getattr(self, name))}")
        if self.core is not None and len(self.core) != 2:
            raise InvalidSpec(f"core must have 2 components, got {tuple(self.core)}")
        if min(self.shape) < 8:
            raise InvalidSpec(f"dislocation grid needs at least 8 squares per side, got {self.shape}")
        if not np.linalg.norm(self.burgers) > 0:
            raise InvalidSpec("Burgers vector must be non-zero")
        if self.kind not in DISLOCATION_KINDS:
            raise InvalidSpec(f"unknown dislocation kind {self.kind!r}")
        if self.sampling not in SAMPLINGS:
            raise InvalidSpec(f"unknown sampling {self.sampling!r}")
        if not -1.0 < self.nu < 0.5:
            raise InvalidSpec(f"Poisson ratio must lie in (-1, 0.5), got {self.nu}")
        if self.spacing <= 0:
            raise InvalidSpec("grid spacing must be positive")

    def core_point(self) -> np.ndarray:
        if self.core is not None:
            return np.asarray(self.core, dtype=float)
        i, j = self.shape[0] // 2, self.shape[1] // 2
        # centroid of triangle (i,j),(i+1,j),(i+1,j+1)
        local = np.array([i + 2.0 / 3.0, j + 1.0 / 3.0])
        return np.asarray(self.origin, dtype=float) + self.spacing * local


@dataclass(frozen=True, eq=False)
class DislocatedCrystal:
    """Punctured grid carrying the dislocated field over the identity base map."""

    configuration: Configuration
    core: np.ndarray
    core_cell: int
    removed_cells: list[int]
    hole_vertices: list[int]


@dataclass(frozen=True)
class CutProjectSpec:
    """Strip projection of Z^(2n) onto an n-dimensional subspace.

    `frame` holds n row vectors spanning the physical subspace. `extent` is
    the half-width of the accepted region along each physical coordinate.
    The window is the projected unit hypercube scaled by `window_scale`
    ("canonical") or a box with `half_widths` in perpendicular coordinates.
    """

    frame: tuple[tuple[float, ...], ...]
    extent: float = 10.0
    window: str = "canonical"
    window_scale: float = 1.0
    half_widths: Optional[tuple[float, ...]] = None
    window_shift: float = 1e-9
    max_points: int = 1_000_000

    def __post_init__(self):
        frame = np.asarray(self.frame, dtype=float)
        if frame.ndim != 2 or frame.shape[1] != 2 * frame.shape[0]:
            raise InvalidSpec(f"frame must be n x 2n, got shape {frame.shape}")
        if self.window not in WINDOW_KINDS:
            raise InvalidSpec(f"unknown window {self.window!r}")
        if self.extent <= 0:
            raise InvalidSpec("extent must be positive")
        if self.max_points <= 0:
            raise InvalidSpec("max_points must be positive")

    @property
    def physical_dim(self) -> int:
        return len(self.frame)

    @classmethod
    def fibonacci(cls, extent: float = 10.0, **kwargs) -> "CutProjectSpec":
        """Line of slope 1/phi through Z^2."""
        phi = (1.0 + np.sqrt(5.0)) / 2.0
        return cls(frame=((phi, 1.0),), extent=extent, **kwargs)

    @classmethod
    def slope(cls, slope: float, extent: float = 10.0, **kwargs) -> "CutProjectSpec":
        return cls(frame=((1.0, float(slope)),), extent=extent, **kwargs)


@dataclass(frozen=True, eq=False)
class CutProjectResult:
    points: np.ndarray
    lattice_points: np.ndarray
    parallel_basis: np.ndarray
    perp_basis: np.ndarray
    window_vertices: Optional[np.ndarray] = field(default=None)


@dataclass(frozen=True, eq=False)
class BurgersSplit:
    parallel: np.ndarray
    perp: np.ndarray
    parallel_embedded: np.ndarray
    perp_embedded: np.ndarray
