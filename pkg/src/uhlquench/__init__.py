"""Uhlmann quench: parallel-transported purification dynamics of mixed states."""

from .matfun import DensityMatrix, hermitian_eig, psd_sqrt, thermal_state, unitary_evolution
from .quench import QuenchScenario, TrajectorySample, UhlmannQuench, rate_function
from .spin_half import SpinHalfParams

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "QuenchScenario",
    "SpinHalfParams",
    "TrajectorySample",
    "UhlmannQuench",
    "hermitian_eig",
    "psd_sqrt",
    "rate_function",
    "thermal_state",
    "unitary_evolution",
]
