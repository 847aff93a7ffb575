"""Shared fixtures: one planner per cone regime, reused across the suite."""

import math

import pytest

from fovsynth.synthesis import Synthesis

# One pinned cone per regime, as (gamma, delta).  Offsets and apertures are
# chosen so every threshold and region of the regime is exercised well away
# from the regime boundaries, plus a mirror-symmetric rear-edge cone where
# the lateral structure degenerates nicely.
CONFIGS = {
    "side": (math.pi / 4, math.pi / 6),
    "frontal": (0.10, 0.50),
    "borderline_frontal": (0.25, 0.50),
    "borderline_side": ((math.pi - 1.2) / 2, 1.2),
    "lateral": (1.0208, 1.2),
    "symmetric_lateral": (math.pi / 2, 0.8),
}

# The five canonical regimes; the acceptance sweeps run exactly these.
CASES = ["side", "frontal", "borderline_frontal", "borderline_side", "lateral"]


@pytest.fixture(scope="session")
def planners():
    return {name: Synthesis(g, d) for name, (g, d) in CONFIGS.items()}
