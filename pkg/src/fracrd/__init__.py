"""Time-space fractional reaction-diffusion solver with invariant checks."""
from .operators import DIRICHLET, NEUMANN, Domain1D, Field, SpectralOperator
from .reactions import DiffusionParams, KineticParams, classify_regime
from .specfun import mittag_leffler, wright_phi
from .stepper import L1_IMEX, ML_MILD, SolverConfig, simulate

__version__ = "0.1.0"

__all__ = [
    "DIRICHLET",
    "NEUMANN",
    "Domain1D",
    "Field",
    "SpectralOperator",
    "DiffusionParams",
    "KineticParams",
    "classify_regime",
    "mittag_leffler",
    "wright_phi",
    "L1_IMEX",
    "ML_MILD",
    "SolverConfig",
    "simulate",
]
