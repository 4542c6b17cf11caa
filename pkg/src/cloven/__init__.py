"""Cell complexes of planar directed trees, their cut-class nerves and homology."""

from ._jit import JIT_ENABLED
from .arity import Arity, SizeGuardError
from .chain_complex import build_full_complex, split_y_and_clov, subfamily_complex
from .cuts_nerve import CutClass, build_nerve, jointly_realizable
from .homology import chain_homology, cohomology, smith_normal_form
from .koszul_report import batch, verify_arity
from .planar_trees import PlanarTreeCell, enumerate_cells

__version__ = "0.1.0"

__all__ = [
    "JIT_ENABLED",
    "Arity",
    "SizeGuardError",
    "PlanarTreeCell",
    "enumerate_cells",
    "CutClass",
    "build_nerve",
    "jointly_realizable",
    "build_full_complex",
    "split_y_and_clov",
    "subfamily_complex",
    "cohomology",
    "chain_homology",
    "smith_normal_form",
    "verify_arity",
    "batch",
]
