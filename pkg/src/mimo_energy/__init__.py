"""Energy-consumption statistics of a multi-user MIMO downlink with mobility.

Subpackages cover the pipeline end to end: special functions, cell geometry
and reflected random walks, channels, exact precoders, large-system
deterministic equivalents, the Gaussian energy law, planning applications,
and a reproducible Monte-Carlo engine with a compiled hot kernel.
"""

__version__ = "0.1.0"

from .asymptotics import SchemeKind
from .channel import PathlossModel
from .config import ExperimentConfig
from .energy import EnergyLaw
from .geometry import CellGeometry, WalkParams
from .precoding import SinrTargets
from .simkit import run_ensemble, run_trial

__all__ = [
    "__version__",
    "SchemeKind",
    "PathlossModel",
    "ExperimentConfig",
    "EnergyLaw",
    "CellGeometry",
    "WalkParams",
    "SinrTargets",
    "run_ensemble",
    "run_trial",
]
