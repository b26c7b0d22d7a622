from .compatibility_service import CompatibilityService
from .decomposition_service import DecompositionService
from .equivalence_service import EquivalenceService
from .groupoid_service import GroupoidService
from .lattice_service import LatticeService
from .document_service import DocumentService
from .report_service import ReportService

__all__ = [
    "CompatibilityService",
    "DecompositionService",
    "EquivalenceService",
    "GroupoidService",
    "LatticeService",
    "DocumentService",
    "ReportService",
]
