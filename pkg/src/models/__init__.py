from .body import FacetTable, SimplicialBody
from .diffeo import SpaceDiffeo
from .configuration import (
    Configuration,
    GradientVerdict,
    HolonomyReport,
    InjectivityResult,
    StandaloneField,
)
from .embodiment import DecompositionResult, Embodiment, ViewIFactors
from .point_configuration import (
    AffineDisplacement,
    BaseEmbodimentReport,
    BaseWitness,
    EmbodimentClass,
    PointConfigurationSet,
    ReferenceSystem,
)
from .groupoid import AxiomCheck, AxiomReport, BodyPointSpace, FiniteGroupoid, PlacedPointSet
from .lattice import BurgersSplit, CutProjectResult, CutProjectSpec, DislocatedCrystal, DislocationSpec
from .document import AffineEntry, FamilyManifest, MeshFieldDocument

__all__ = [
    "FacetTable",
    "SimplicialBody",
    "SpaceDiffeo",
    "Configuration",
    "GradientVerdict",
    "HolonomyReport",
    "InjectivityResult",
    "StandaloneField",
    "DecompositionResult",
    "Embodiment",
    "ViewIFactors",
    "AffineDisplacement",
    "BaseEmbodimentReport",
    "BaseWitness",
    "EmbodimentClass",
    "PointConfigurationSet",
    "ReferenceSystem",
    "AxiomCheck",
    "AxiomReport",
    "BodyPointSpace",
    "FiniteGroupoid",
    "PlacedPointSet",
    "BurgersSplit",
    "CutProjectResult",
    "CutProjectSpec",
    "DislocatedCrystal",
    "DislocationSpec",
    "AffineEntry",
    "FamilyManifest",
    "MeshFieldDocument",
]
