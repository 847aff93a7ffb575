"""Sensor-cone model: bearing computations and straight-segment visibility.

The robot carries a sensor whose field of view is the bearing interval
``[phi1, phi2]`` with ``phi1 = gamma - delta/2`` and ``phi2 = gamma + delta/2``,
where ``gamma`` is the mounting offset of the cone axis from the heading and
``delta`` its angular aperture.  The *bearing* of the landmark from a robot at
position ``x`` with heading ``theta`` is

    beta = wrap(atan2(-x_y, -x_x) - theta)        # in (-pi, pi]

i.e. the signed angle from the heading vector to the landmark direction.  The
visibility constraint is simply ``phi1 <= beta <= phi2``.

The position of the cone relative to the heading splits the planner into five
qualitatively different regimes.  With ``gamma`` canonical in [0, pi/2]:

    frontal            0 <= gamma < delta/2          (phi1 < 0 < phi2)
    borderline_frontal gamma == delta/2              (phi1 == 0)
    side               delta/2 < gamma < (pi-delta)/2
    borderline_side    gamma == (pi-delta)/2         (phi2 == pi/2)
    lateral            (pi-delta)/2 < gamma <= pi/2  (phi2 > pi/2)

Along a straight segment the bearing is monotone (the landmark direction
rotates one way as the perpendicular foot is passed), so visibility along a
whole segment reduces to checking its two endpoints.  That O(1) test is the
workhorse of the planner and of the independent oracles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .geometry import PolarPoint, wrap_pi

_CASE_EPS = 1e-12


class SensorCase(enum.Enum):
    FRONTAL = "frontal"
    BORDERLINE_FRONTAL = "borderline_frontal"
    SIDE = "side"
    BORDERLINE_SIDE = "borderline_side"
    LATERAL = "lateral"


@dataclass(frozen=True)
class Cone:
    """A canonical sensor cone (gamma in [0, pi/2], 0 < delta <= pi/2)."""

    gamma: float
    delta: float
    phi1: float
    phi2: float
    case: SensorCase

    @staticmethod
    def from_gamma_delta(gamma: float, delta: float) -> "Cone":
        if not (0.0 < delta <= math.pi / 2 + _CASE_EPS):
            raise ValueError(f"aperture delta must be in (0, pi/2], got {delta!r}")
        if not (-_CASE_EPS <= gamma <= math.pi / 2 + _CASE_EPS):
            raise ValueError(
                f"canonical cone offset gamma must be in [0, pi/2], got {gamma!r}"
            )
        gamma = min(max(gamma, 0.0), math.pi / 2)
        delta = min(delta, math.pi / 2)
        case = classify_case(gamma, delta)
        return Cone(gamma, delta, gamma - delta / 2, gamma + delta / 2, case)

    def contains(self, beta: float, tol: float = 0.0) -> bool:
        return self.phi1 - tol <= beta <= self.phi2 + tol

    @property
    def is_frontal_family(self) -> bool:
        return self.case in (SensorCase.FRONTAL, SensorCase.BORDERLINE_FRONTAL)


def classify_case(gamma: float, delta: float) -> SensorCase:
    """Which of the five cone regimes ``(gamma, delta)`` falls in.

    Boundary membership is decided to ``1e-12``.  The doubly degenerate corner
    ``delta = pi/2, gamma = pi/4`` satisfies both borderline conditions and is
    reported as borderline-frontal (the radial edge dominates the structure).
    """
    half = delta / 2
    side_limit = (math.pi - delta) / 2
    if gamma < half - _CASE_EPS:
        return SensorCase.FRONTAL
    if gamma <= half + _CASE_EPS:
        return SensorCase.BORDERLINE_FRONTAL
    if gamma < side_limit - _CASE_EPS:
        return SensorCase.SIDE
    if gamma <= side_limit + _CASE_EPS:
        return SensorCase.BORDERLINE_SIDE
    return SensorCase.LATERAL


# ---------------------------------------------------------------------------
# bearings


def bearing(x: float, y: float, theta: float) -> float:
    """Signed bearing of the landmark (at the origin) from pose (x, y, theta)."""
    return wrap_pi(math.atan2(-y, -x) - theta)


def heading_for_bearing(psi: float, beta: float) -> float:
    """Heading that realises bearing ``beta`` at polar angle ``psi``."""
    return psi + math.pi - beta


def chord_bearings(
    a: PolarPoint, b: PolarPoint, drive: int
) -> tuple[float, float, float]:
    """Bearings at both ends of the straight segment a -> b, plus the heading.

    ``drive`` is +1 when the robot moves nose-first from ``a`` to ``b`` and -1
    when it backs up along the same segment (heading away from ``b``).
    """
    ax, ay = a.xy
    bx, by = b.xy
    dx, dy = bx - ax, by - ay
    n = math.hypot(dx, dy)
    if n == 0.0:
        raise ValueError("degenerate chord")
    theta = math.atan2(dy, dx) if drive > 0 else math.atan2(-dy, -dx)
    return bearing(ax, ay, theta), bearing(bx, by, theta), theta


def straight_feasible(
    a: PolarPoint, b: PolarPoint, drive: int, cone: Cone, tol: float = 0.0
) -> bool:
    """Whole-segment visibility test for a straight move from ``a`` to ``b``.

    The bearing is monotone along a straight segment, so the segment is
    feasible iff both endpoint bearings are inside the cone -- except when the
    segment passes through the landmark itself, where the bearing flips by pi;
    there the endpoint bearings are 0 and pi and cannot both fit in a cone of
    aperture <= pi/2, so the test needs no special casing.  Endpoints at the
    landmark are allowed (their bearing is taken from the other end's ray).
    """
    if a.dist(b) == 0.0:
        return True
    ba, bb, _ = chord_bearings(a, b, drive)
    ok_a = cone.contains(ba, tol) or a.rho == 0.0
    ok_b = cone.contains(bb, tol) or b.rho == 0.0
    return ok_a and ok_b


# ---------------------------------------------------------------------------
# the boundary arc of the straight-reachable set
#
# Fix a target G and a bearing edge phi != 0.  The points V from which a
# straight segment to G starts exactly at bearing phi (with the heading on the
# far side, as happens where a cone-edge arc hands over to a straight) form a
# circular arc through G, tangent at G to the bearing-phi direction:
#
#     V(alpha) = ( rho_G * sin(phi - alpha) / sin(phi),  psi_G + alpha )
#
# with alpha running from 0 (V = G) towards phi.  The chord |V G| is
# rho_G * sin(alpha) / sin(phi) and the bearing *at the G end* of the segment
# is phi - alpha.  For phi = pi/2 the arc is the half circle on diameter
# landmark--G.  These arcs bound the set of points that can reach G with a
# single straight cone-edge-compatible segment, and they are exactly where
# optimal paths switch between a cone-edge arc and a straight.


def boundary_arc_point(g: PolarPoint, phi: float, alpha: float) -> PolarPoint:
    """Point at parameter ``alpha`` on the straight-set boundary arc of ``g``."""
    s = math.sin(phi)
    if abs(s) < 1e-15:
        raise ValueError("boundary arc undefined for radial bearing")
    return PolarPoint(g.rho * math.sin(phi - alpha) / s, g.psi + alpha)


def boundary_arc_chord(g: PolarPoint, phi: float, alpha: float) -> float:
    """Chord length from the arc point at ``alpha`` back to ``g``."""
    return g.rho * abs(math.sin(alpha) / math.sin(phi))


def gf_point(g: PolarPoint, cone: Cone) -> PolarPoint:
    """Far end of the straight-set boundary arc: the switch point mate of ``g``.

    At this point a backward straight that leaves the bearing-phi2 edge lands
    tangentially on the bearing-phi1 edge.  Only meaningful when both cone
    edges have positive sine (side-family cones).
    """
    return PolarPoint(
        g.rho * math.sin(cone.phi1) / math.sin(cone.phi2),
        g.psi + (cone.phi2 - cone.phi1),
    )


def gb_point(g: PolarPoint, cone: Cone) -> PolarPoint:
    """Inverse of :func:`gf_point`."""
    return PolarPoint(
        g.rho * math.sin(cone.phi2) / math.sin(cone.phi1),
        g.psi - (cone.phi2 - cone.phi1),
    )
