"""Planar geometry primitives used by the field-of-view planner.

Everything lives in a landmark-centred frame: the landmark sits at the
origin and positions are usually handled in polar coordinates ``(rho, psi)``.
The key curve family is the equiangular (logarithmic) spiral along which the
landmark is seen under a constant bearing ``phi``:

    rho(psi) = rho0 * exp(-(psi - psi0) / tan(phi))

Two degenerate members matter and are handled explicitly everywhere:

* ``phi = 0``       -- the spiral collapses to a radial ray (constant psi),
* ``phi = +-pi/2``  -- it collapses to a circle centred on the landmark.

Angles are radians.  ``psi`` values on arcs are kept *unwrapped* so that an
arc may wind several times around the origin without ambiguity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

TWO_PI = 2.0 * math.pi

# |cos(phi)| below this the spiral is treated as a circle, |tan(phi)| below
# it as a radial ray.  Well above float noise, far below any sensible cone.
_DEGENERATE_EPS = 1e-9


def wrap_pi(a: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    elif a > math.pi:
        a -= TWO_PI
    return a


def wrap_from(a: float, lo: float) -> float:
    """Wrap an angle into the half-open interval [lo, lo + 2*pi)."""
    w = a - TWO_PI * math.floor((a - lo) / TWO_PI)
    if w >= lo + TWO_PI:  # rounding at the seam for inputs a hair below lo
        return lo
    return w


def angle_of(x: float, y: float) -> float:
    return math.atan2(y, x)


@dataclass(frozen=True)
class PolarPoint:
    """A point in the landmark frame.

    ``psi`` is *not* wrapped: callers that build multi-winding arcs rely on
    carrying the unwrapped angle through a construction.
    """

    rho: float
    psi: float

    @property
    def xy(self) -> tuple[float, float]:
        return (self.rho * math.cos(self.psi), self.rho * math.sin(self.psi))

    @staticmethod
    def from_xy(x: float, y: float) -> "PolarPoint":
        return PolarPoint(math.hypot(x, y), math.atan2(y, x))

    def wrapped(self) -> "PolarPoint":
        return replace(self, psi=wrap_pi(self.psi))

    def rotated(self, dpsi: float) -> "PolarPoint":
        return PolarPoint(self.rho, self.psi + dpsi)

    def scaled(self, k: float) -> "PolarPoint":
        return PolarPoint(self.rho * k, self.psi)

    def mirrored(self) -> "PolarPoint":
        """Reflection across the goal axis (psi -> -psi)."""
        return PolarPoint(self.rho, -self.psi)

    def dist(self, other: "PolarPoint") -> float:
        ax, ay = self.xy
        bx, by = other.xy
        return math.hypot(bx - ax, by - ay)


def is_radial(phi: float) -> bool:
    """True when the constant-bearing curve for ``phi`` is a radial ray."""
    return abs(math.sin(phi)) < _DEGENERATE_EPS


def is_circular(phi: float) -> bool:
    """True when the constant-bearing curve for ``phi`` is a circle."""
    return abs(math.cos(phi)) < _DEGENERATE_EPS


def spiral_rho_after(rho_from: float, dpsi: float, phi: float) -> float:
    """Radius after sweeping ``dpsi`` along the constant-bearing-``phi`` spiral.

    Valid for circles too (``cot(phi) = 0`` keeps the radius constant); the
    radial-ray case has no radius-vs-angle law and raises.
    """
    if is_radial(phi):
        raise ValueError("radial arc: radius is not a function of angle")
    return rho_from * math.exp(-dpsi / math.tan(phi))


def spiral_delta_psi(rho_from: float, rho_to: float, phi: float) -> float:
    """Signed angular sweep taking the bearing-``phi`` spiral between two radii.

    Positive means counter-clockwise.  Undefined for circles (radius never
    changes) and identically zero for radial rays.
    """
    if is_circular(phi):
        raise ValueError("circular arc: angle is not a function of radius")
    if is_radial(phi):
        return 0.0
    return math.tan(phi) * math.log(rho_from / rho_to)


def spiral_arc_length(rho_a: float, rho_b: float, phi: float, dpsi: float = 0.0) -> float:
    """Arc length along a constant-bearing curve between two of its points.

    For a proper spiral (and for radial rays) the length is
    ``|rho_a - rho_b| / |cos(phi)|``; for circles it is ``rho * |dpsi|``.
    """
    c = abs(math.cos(phi))
    if c < _DEGENERATE_EPS:
        return 0.5 * (rho_a + rho_b) * abs(dpsi)
    return abs(rho_a - rho_b) / c


def w_coord(rho: float, psi: float, phi: float, rho_ref: float) -> float:
    """Spiral coordinate: the (unwrapped) angle at which the bearing-``phi``
    spiral through ``(rho, psi)`` crosses the circle of radius ``rho_ref``.

    Constant along every bearing-``phi`` spiral, which makes it the natural
    "which spiral am I on" label.  Undefined for circles.
    """
    if is_circular(phi):
        raise ValueError("w-coordinate undefined for circular bearing")
    return psi - math.tan(phi) * math.log(rho_ref / rho)


def spiral_intersection(
    a: PolarPoint, phi_a: float, b: PolarPoint, phi_b: float
) -> PolarPoint:
    """First crossing of two constant-bearing curves, nearest ``a``'s anchor.

    Each curve is the bearing-``phi`` spiral (radial ray / circle in the
    degenerate cases) through its anchor point.  Two non-parallel curves
    cross countably many times, once per relative winding; this returns the
    crossing whose unwrapped angle is closest to ``a.psi``, which is the
    "first encounter" every switching-point construction wants.

    Raises ``ValueError`` for parallel pairs: two circles or two rays of
    different size/direction never meet, and equal-pitch spirals are either
    the same curve or disjoint.
    """
    rad_a, rad_b = is_radial(phi_a), is_radial(phi_b)
    cir_a, cir_b = is_circular(phi_a), is_circular(phi_b)
    if rad_a and rad_b:
        if abs(wrap_pi(a.psi - b.psi)) < _DEGENERATE_EPS:
            raise ValueError("identical radial rays")
        raise ValueError("distinct radial rays never intersect")
    if cir_a and cir_b:
        if abs(a.rho - b.rho) < _DEGENERATE_EPS * (a.rho + b.rho):
            raise ValueError("identical circles")
        raise ValueError("concentric circles never intersect")
    if rad_a:  # every crossing sits on a's ray; b supplies the radius there
        if cir_b:
            return PolarPoint(b.rho, a.psi)
        return PolarPoint(spiral_rho_after(b.rho, a.psi - b.psi, phi_b), a.psi)
    if rad_b:
        psi = b.psi + TWO_PI * round((a.psi - b.psi) / TWO_PI)
        if cir_a:
            return PolarPoint(a.rho, psi)
        return PolarPoint(spiral_rho_after(a.rho, psi - a.psi, phi_a), psi)
    if cir_a:  # single plane point where b passes radius a.rho
        psi = b.psi + spiral_delta_psi(b.rho, a.rho, phi_b)
        return PolarPoint(a.rho, a.psi + wrap_pi(psi - a.psi))
    if cir_b:
        return PolarPoint(b.rho, a.psi + spiral_delta_psi(a.rho, b.rho, phi_a))
    ta, tb = math.tan(phi_a), math.tan(phi_b)
    if abs(ta - tb) < 1e-14 * (1.0 + abs(ta) + abs(tb)):
        if abs(wrap_pi(w_coord(a.rho, a.psi, phi_a, 1.0) - w_coord(b.rho, b.psi, phi_b, 1.0))) < 1e-12:
            raise ValueError("identical spirals")
        raise ValueError("equal-pitch spirals never intersect")
    # unwrapped crossing, one per relative winding k of b:
    #   ln rho_a - (psi - a.psi)/ta = ln rho_b - (psi - b.psi - 2 pi k)/tb
    den = 1.0 / tb - 1.0 / ta
    base = math.log(b.rho / a.rho) - a.psi / ta + b.psi / tb
    k_real = (a.psi - b.psi - tb * math.log(b.rho / a.rho)) / TWO_PI
    best = None
    for k in (math.floor(k_real), math.ceil(k_real)):
        psi = (base + TWO_PI * k / tb) / den
        if best is None or abs(psi - a.psi) < abs(best - a.psi):
            best = psi
    return PolarPoint(spiral_rho_after(a.rho, best - a.psi, phi_a), best)


def conjugate_inversion(p: PolarPoint, rho_ref: float) -> PolarPoint:
    """Inversion in the circle of radius ``rho_ref`` composed with psi -> -psi.

    This is the start/goal exchange map of the planning problem: it is an
    involution, fixes the goal circle set-wise, and sends every
    constant-bearing spiral to another spiral of the *same* bearing.
    """
    return PolarPoint(rho_ref * rho_ref / p.rho, -p.psi)


def adaptive_polyline(
    f,
    max_chord_err: float,
    *,
    n_seed: int = 17,
    max_depth: int = 12,
    skip_beyond: float | None = None,
) -> list["PolarPoint"]:
    """Sample the curve ``f: [0, 1] -> PolarPoint`` as a bounded-error polyline.

    Parameter intervals are bisected until the curve midpoint lies within
    ``max_chord_err`` of the chord between the interval endpoints (or the
    depth cap is hit), so flat stretches stay sparse and tight bends dense.
    Segments sampling entirely beyond radius ``skip_beyond`` are accepted
    unrefined; callers that clip to a window use this to keep curves that
    shoot off to huge radii (e.g. inversion images) from being subdivided
    outside the picture.
    """
    ts = [i / (n_seed - 1) for i in range(n_seed)]
    pts = [f(t) for t in ts]
    out = [pts[0]]
    stack = [
        (ts[i], pts[i], ts[i + 1], pts[i + 1], 0)
        for i in range(n_seed - 2, -1, -1)
    ]
    while stack:
        t0, p0, t1, p1, depth = stack.pop()
        tm = 0.5 * (t0 + t1)
        pm = f(tm)
        offscreen = skip_beyond is not None and min(p0.rho, pm.rho, p1.rho) > skip_beyond
        x0, y0 = p0.xy
        x1, y1 = p1.xy
        xm, ym = pm.xy
        dx, dy = x1 - x0, y1 - y0
        seg = math.hypot(dx, dy)
        if seg < 1e-300:
            dev = math.hypot(xm - x0, ym - y0)
        else:
            dev = abs(dx * (ym - y0) - dy * (xm - x0)) / seg
        if depth < max_depth and dev > max_chord_err and not offscreen:
            stack.append((tm, pm, t1, p1, depth + 1))
            stack.append((t0, p0, tm, pm, depth + 1))
        else:
            out.append(pm)
            out.append(p1)
    return out


# ---------------------------------------------------------------------------
# Path arcs


@dataclass(frozen=True)
class Arc:
    """One primitive piece of a planned path.

    kind:   "E1" / "E2"  constant-bearing arc at the cone edge (spiral,
                         radial ray or circle depending on the edge angle),
            "S"          straight segment,
            "ROT"        rotation in place (zero length).
    drive:  +1 forward, -1 backward, 0 for rotations.
    phi:    the bearing held along an E-arc (in the output frame), None
            otherwise.
    start/end: endpoints with unwrapped ``psi`` (equal for rotations).
    theta_start/theta_end: heading at the endpoints (unwrapped for ROT so the
            sweep direction is explicit).
    """

    kind: str
    drive: int
    start: PolarPoint
    end: PolarPoint
    length: float
    phi: float | None = None
    theta_start: float = 0.0
    theta_end: float = 0.0

    def point_at(self, t: float) -> tuple[PolarPoint, float]:
        """Point and heading at fraction ``t`` in [0, 1] along the arc."""
        if self.kind == "ROT":
            th = self.theta_start + t * (self.theta_end - self.theta_start)
            return self.start, th
        if self.kind == "S":
            ax, ay = self.start.xy
            bx, by = self.end.xy
            x = ax + t * (bx - ax)
            y = ay + t * (by - ay)
            return PolarPoint.from_xy(x, y), self.theta_start
        # constant-bearing arc
        if is_radial(self.phi):
            rho = self.start.rho + t * (self.end.rho - self.start.rho)
            p = PolarPoint(rho, self.start.psi)
        else:
            psi = self.start.psi + t * (self.end.psi - self.start.psi)
            if is_circular(self.phi):
                rho = self.start.rho
            else:
                rho = spiral_rho_after(self.start.rho, psi - self.start.psi, self.phi)
            p = PolarPoint(rho, psi)
        th = p.psi + math.pi - self.phi
        return p, th

    def sample_count(self, max_chord_err: float) -> int:
        """Number of samples so the polyline chord error stays below the bound."""
        if self.kind == "ROT":
            return 2
        if self.kind == "S":
            return 2
        dpsi = abs(self.end.psi - self.start.psi)
        if dpsi < 1e-12:
            return 2
        rho = max(self.start.rho, self.end.rho)
        # sagitta of a circular step of angle h at radius rho is ~ rho*h^2/8
        h = math.sqrt(8.0 * max_chord_err / max(rho, 1e-300))
        return max(8, min(100000, int(math.ceil(dpsi / max(h, 1e-6))) + 1))


def mirror_arc(arc: Arc) -> Arc:
    """Reflect an arc across the goal axis (psi -> -psi, bearings negate)."""
    return Arc(
        kind=arc.kind,
        drive=arc.drive,
        start=arc.start.mirrored(),
        end=arc.end.mirrored(),
        length=arc.length,
        phi=None if arc.phi is None else -arc.phi,
        theta_start=-arc.theta_start,
        theta_end=-arc.theta_end,
    )


def similarity_arc(arc: Arc, scale: float, dpsi: float) -> Arc:
    """Rotate by ``dpsi`` about the landmark and scale radii by ``scale``."""
    return Arc(
        kind=arc.kind,
        drive=arc.drive,
        start=arc.start.scaled(scale).rotated(dpsi),
        end=arc.end.scaled(scale).rotated(dpsi),
        length=arc.length * scale,
        phi=arc.phi,
        theta_start=arc.theta_start + dpsi,
        theta_end=arc.theta_end + dpsi,
    )


def reverse_arc(arc: Arc) -> Arc:
    """Traverse an arc in the opposite order with the heading kept pointwise."""
    return Arc(
        kind=arc.kind,
        drive=-arc.drive,
        start=arc.end,
        end=arc.start,
        length=arc.length,
        phi=arc.phi,
        theta_start=arc.theta_end,
        theta_end=arc.theta_start,
    )
