"""Command reports printed as JSON on stdout."""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from .groupoid import AxiomReport


class ReportHeader(BaseModel):
    """Provenance embedded in every report."""
    model_config = ConfigDict(populate_by_name=True)

    tool: str = "anelkin"
    version: str
    command: str
    config: dict = Field(description="Effective RunConfig")
    seed: int


class CheckReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    header: ReportHeader
    holonomic: Optional[bool] = Field(default=None, description="None when the document has no base")
    max_holonomy_residual: Optional[float] = None
    gradient: bool
    incompatibility_norm: float
    violating_facets: list[int]
    inconsistent_vertices: list[int]
    compatible: bool


class DecomposeReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    header: ReportHeader
    residual: float = Field(description="Max relative multiply-back error")
    tol_decomp: float
    identity_embodiment: bool
    outputs: list[str] = Field(default_factory=list)


class EquivReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    header: ReportHeader
    equivalent: bool
    max_deviation: float
    tol: float
    affine: Optional[dict] = None


class OrbitEntry(BaseModel):
    members: list[int]
    body_points: Optional[int] = Field(default=None, description="|B_e| for point families")


class GroupoidReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    header: ReportHeader
    family: str = Field(description="'points' or 'bundles'")
    n_objects: int
    n_morphisms: int
    axioms: AxiomReport
    orbits: list[OrbitEntry]
    partition_agrees: Optional[bool] = Field(
        default=None, description="Bundle families: orbits equal the embodiment partition"
    )


class SynthReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    header: ReportHeader
    kind: str
    outputs: list[str]
    n_points: Optional[int] = None
    n_cells: Optional[int] = None
    metadata: dict[str, str] = Field(default_factory=dict)


class BurgersReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    header: ReportHeader
    burgers: list[float]
    norm: float
    loop: list[int]
    shift: list[float]
    convention: str


class SvgReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    header: ReportHeader
    output: str
    max_cell_residual: float
    incompatibility_norm: float
