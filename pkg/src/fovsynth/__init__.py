"""Shortest paths for a unicycle that must keep a landmark in a sensor cone.

Public surface:

* :class:`fovsynth.synthesis.Synthesis` -- the planner (plan / classify /
  thresholds / partition / family_length / upper_bound / language),
* :mod:`fovsynth.geometry` / :mod:`fovsynth.sensor` -- the underlying
  spiral and cone primitives,
* :mod:`fovsynth.verify` -- independent recomputation of feasibility and
  kinematic consistency for any planned path,
* :mod:`fovsynth.oracle` -- brute-force numerical oracles used to validate
  the synthesis,
* ``fovsynth`` console script (:mod:`fovsynth.cli`).
"""

from .geometry import Arc, PolarPoint, wrap_pi
from .sensor import Cone, SensorCase, bearing
from .synthesis import (
    ConsistencyError,
    DomainError,
    Path,
    Synthesis,
)

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "Cone",
    "ConsistencyError",
    "DomainError",
    "Path",
    "PolarPoint",
    "SensorCase",
    "Synthesis",
    "bearing",
    "wrap_pi",
    "__version__",
]
