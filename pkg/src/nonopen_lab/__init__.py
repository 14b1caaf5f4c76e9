"""Public package for the nonopen-lab numerical toolkit and CLI."""

from .gauges import GaugeKind, GaugeSpec
from .maps import MapSpec, SolveResult, f_eval, f_invert_radial, jf_apply, jf_solve
from .space_models import GridFunction, ModelKind, SpaceModel, SparseVector

__version__ = "0.1.1"

__all__ = [
    "GaugeKind",
    "GaugeSpec",
    "GridFunction",
    "MapSpec",
    "ModelKind",
    "SolveResult",
    "SpaceModel",
    "SparseVector",
    "__version__",
    "f_eval",
    "f_invert_radial",
    "jf_apply",
    "jf_solve",
]
