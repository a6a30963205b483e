"""Stability of periodic traveling waves for quasilinear Schrodinger equations.

The modules follow the computation in order: ``model`` (the coefficient
polynomials), ``profile`` (the wave and its averages), ``action`` (the action
integral and its derivatives), ``spectral`` (Evans function and root
counting), ``modulation`` (the low-frequency symbol and the criteria),
``asymptotics`` (small-amplitude and large-period limits) and ``madelung``.
"""

from .errors import ConfigurationError, NumericalError, WavestabError
from .model import ModelSpec, make_model
from .profile import WaveParams, WaveProfile, solve_profile, turning_points, wave_averages

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ModelSpec",
    "NumericalError",
    "WaveParams",
    "WaveProfile",
    "WavestabError",
    "make_model",
    "solve_profile",
    "turning_points",
    "wave_averages",
]
