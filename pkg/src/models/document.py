"""On-disk document formats."""

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

MESH_FORMAT = "anelkin/1"
FAMILY_FORMAT = "anelkin-family/1"


class MeshFieldDocument(BaseModel):
    """Mesh with an optional placed base and per-cell field.

    `field` holds one row-major dim*dim list per cell.
    """
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    format_version: Literal["anelkin/1"] = Field(description="Exact format tag")
    dim: Literal[2, 3]
    vertices: list[list[float]] = Field(description="Reference coordinates, one row per vertex")
    cells: list[list[int]] = Field(description="dim+1 vertex indices per cell")
    base: Optional[list[list[float]]] = Field(default=None, description="Placed vertex coordinates")
    field: Optional[list[list[float]]] = Field(default=None, description="Row-major per-cell matrices")
    metadata: dict[str, str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_shapes(self) -> "MeshFieldDocument":
        n_vertices = len(self.vertices)
        for i, row in enumerate(self.vertices):
            if len(row) != self.dim:
                raise ValueError(f"vertices[{i}] has {len(row)} coordinates, expected {self.dim}")
        for c, cell in enumerate(self.cells):
            if len(cell) != self.dim + 1:
                raise ValueError(f"cells[{c}] has {len(cell)} vertices, expected {self.dim + 1}")
            for k, v in enumerate(cell):
                if not 0 <= v < n_vertices:
                    raise ValueError(f"cells[{c}][{k}] = {v} is out of range for {n_vertices} vertices")
        if self.base is not None:
            if len(self.base) != n_vertices:
                raise ValueError(f"base has {len(self.base)} rows, expected {n_vertices}")
            for i, row in enumerate(self.base):
                if len(row) != self.dim:
                    raise ValueError(f"base[{i}] has {len(row)} coordinates, expected {self.dim}")
        if self.field is not None:
            if len(self.field) != len(self.cells):
                raise ValueError(f"field has {len(self.field)} rows, expected {len(self.cells)}")
            for c, row in enumerate(self.field):
                if len(row) != self.dim * self.dim:
                    raise ValueError(f"field[{c}] has {len(row)} entries, expected {self.dim * self.dim}")
        return self


class AffineEntry(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    matrix: list[list[float]]
    translation: list[float]


class FamilyManifest(BaseModel):
    """Family of configurations for the groupoid command.

    Either `configs` (point maps of the protobody `points`) or `documents`
    (MeshFieldDocument paths relative to the manifest) must be given.
    """
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    format_version: Literal["anelkin-family/1"]
    points: list[str] = Field(default_factory=list, description="Protobody point labels")
    configs: list[list[list[float]]] = Field(default_factory=list)
    group: Union[Literal["affine"], list[AffineEntry]] = "affine"
    documents: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_family(self) -> "FamilyManifest":
        if bool(self.configs) == bool(self.documents):
            raise ValueError("manifest must list either configs or documents, not both or neither")
        for i, config in enumerate(self.configs):
            if len(config) != len(self.points):
                raise ValueError(
                    f"configs[{i}] places {len(config)} points, protobody has {len(self.points)}"
                )
        return self
