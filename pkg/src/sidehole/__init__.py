"""Resonances of a flute tube with small side holes.

Three coordinated solvers:

* :mod:`sidehole.secular`  -- the 1-D limit operator (closed-form secular
  equation, shooting, and a finite-difference oracle);
* :mod:`sidehole.alpha`    -- the hole coupling constant from the rescaled
  half-space problem (plus a capacitance oracle);
* :mod:`sidehole.tube3d`   -- a 3-D finite-volume eigenvalue oracle on the
  thin tube, checked for convergence toward the 1-D model.
"""

__version__ = "0.1.0"

from .model import (DEFAULT_SQUARE_HOLE_ALPHA, BoreProfile, EigenSolution1D,
                    EndCondition, HoleSpec, ModelConfig, SideholeError,
                    TubeSpec, ValidationError, cents, to_frequency_hz,
                    validate)
from .secular import (GeneralizedProblem, SecularProblem, Spectrum1D,
                      eigenfunction, fd_oracle, find_roots, secular_eval,
                      shooting_spectrum)

__all__ = [
    "__version__",
    "DEFAULT_SQUARE_HOLE_ALPHA",
    "BoreProfile", "EigenSolution1D", "EndCondition", "HoleSpec",
    "ModelConfig", "SideholeError", "TubeSpec", "ValidationError",
    "cents", "to_frequency_hz", "validate",
    "GeneralizedProblem", "SecularProblem", "Spectrum1D",
    "eigenfunction", "fd_oracle", "find_roots", "secular_eval",
    "shooting_spectrum",
]
