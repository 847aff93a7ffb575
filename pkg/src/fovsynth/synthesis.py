"""Shortest-path synthesis under a limited-field-of-view landmark constraint.

The vehicle is a unicycle (forward/backward unit speed, free turning) that
must drive from a start position to a goal position while a fixed landmark
stays inside the sensor cone described by :class:`fovsynth.sensor.Cone`.
Rotations in place are free and are feasible whenever the swept bearing
interval stays inside the cone.

Optimal paths are concatenations of a small alphabet of primitives:

* ``E1`` / ``E2`` arcs -- travel holding the landmark on a cone edge
  (logarithmic spirals; radial rays when the edge angle is 0, circles when
  it is +-pi/2),
* ``S`` segments     -- straight moves, possible only while both endpoint
  bearings sit in the cone,
* ``*``              -- a free rotation in place joining two edge arcs.

For every start this module constructs the handful of candidate paths whose
switch points satisfy the first-order optimality (tangency / alignment)
conditions, validates them exactly, and returns the shortest.  The candidate
set is closed under the start/goal exchange symmetry (``conjugate_inversion``
composed with time reversal), which supplies the "primed" mirror families
serving starts on the other side of the goal ray and starts outside the goal
circle.

The classification of the plane by winning family reproduces the closed-form
region decomposition, and the closed-form thresholds (``psi_r1``, ``psi_r2``)
are exposed separately so tests can confront the two routes.

All geometry here is exact (logarithms, monotone bisections); nothing is
discretised.  Independent numerical cross-checks live in
:mod:`fovsynth.oracle`.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property

from .geometry import (
    Arc,
    PolarPoint,
    TWO_PI,
    adaptive_polyline,
    conjugate_inversion,
    is_circular,
    is_radial,
    mirror_arc,
    reverse_arc,
    similarity_arc,
    spiral_arc_length,
    spiral_delta_psi,
    spiral_rho_after,
    w_coord,
    wrap_from,
    wrap_pi,
)
from .sensor import (
    Cone,
    SensorCase,
    bearing,
    boundary_arc_point,
    chord_bearings,
    gb_point,
    gf_point,
    heading_for_bearing,
    straight_feasible,
)

DEFAULT_TOL = 1e-9

# Region labels in tie-break order: when two candidates tie in length the
# earlier family wins, and native constructions beat image (primed) ones.
REGION_ORDER = [
    "I", "II", "III", "IV", "V", "VI", "V+", "W",
    "II'", "IV'", "V'", "VI'", "V+'", "W'",
]

_PRIMED = {
    "I": "I", "II": "II'", "III": "III", "IV": "IV'", "V": "V'",
    "VI": "VI'", "V+": "V+'", "W": "W'",
}


class DomainError(ValueError):
    """Raised for inputs outside the supported problem domain."""


class ConsistencyError(RuntimeError):
    """Raised when the planner cannot assemble any valid path (a bug)."""


def _env_tol() -> float:
    raw = os.environ.get("FOV_SYNTH_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        val = float(raw)
    except ValueError as exc:
        raise DomainError(f"FOV_SYNTH_TOL is not a number: {raw!r}") from exc
    if not (0.0 < val < 1e-2):
        raise DomainError(f"FOV_SYNTH_TOL out of range (0, 1e-2): {val!r}")
    return val


@dataclass(frozen=True)
class Path:
    """A planned path in the true (caller's) frame.

    ``word`` uses the canonical-frame symbols; when ``reversed_frame`` is set
    the physical drive directions are the canonical word's with +/- swapped
    (this swap is already applied to ``word`` and to the arcs).  ``length``
    is exact; for paths that pass through the landmark the emitted arcs are
    truncated at a tiny radius and the sum of arc lengths falls short of
    ``length`` by a documented hair (< 1e-8 of the goal radius).
    """

    arcs: tuple[Arc, ...]
    word: str
    region: str
    image: bool
    length: float
    q: PolarPoint
    goal_rho: float
    mirrored: bool = False
    reversed_frame: bool = False

    def to_dict(self) -> dict:
        def pt(p: PolarPoint, theta: float) -> dict:
            x, y = p.xy
            return {
                "x": x, "y": y, "rho": p.rho, "psi": wrap_pi(p.psi),
                "theta": wrap_pi(theta),
            }

        return {
            "schema": "fovsynth.path.v1",
            "q": {"rho": self.q.rho, "psi": wrap_pi(self.q.psi)},
            "goal_rho": self.goal_rho,
            "region": self.region,
            "image": self.image,
            "mirrored": self.mirrored,
            "reversed": self.reversed_frame,
            "word": self.word,
            "total_length": self.length,
            "arcs": [
                {
                    "kind": a.kind,
                    "dir": a.drive,
                    "phi": a.phi,
                    "length": a.length,
                    "start": pt(a.start, a.theta_start),
                    "end": pt(a.end, a.theta_end),
                }
                for a in self.arcs
            ],
        }


@dataclass
class _Candidate:
    arcs: list[Arc]
    region: str
    image: bool = False
    length_override: float | None = None

    @property
    def length(self) -> float:
        if self.length_override is not None:
            return self.length_override
        return sum(a.length for a in self.arcs)


def _word_of(arcs) -> str:
    parts = []
    for a in arcs:
        if a.kind == "ROT":
            parts.append("*")
        else:
            parts.append(a.kind + ("+" if a.drive > 0 else "-"))
    return "".join(parts)


def _dirswap_word(word: str) -> str:
    return word.replace("+", "\x00").replace("-", "+").replace("\x00", "-")


class Synthesis:
    """Planner for a fixed sensor cone and goal radius.

    Parameters
    ----------
    gamma:
        Cone-axis offset from the heading, radians, in ``[-pi, pi]``.  Values
        outside the canonical ``[0, pi/2]`` are reduced internally: a negative
        offset mirrors the problem across the goal ray, an offset beyond
        ``pi/2`` additionally swaps forward and backward drive.  Results are
        mapped back to the caller's frame; ``Path.mirrored`` and
        ``Path.reversed_frame`` record what was applied.
    delta:
        Cone aperture, radians, in ``(0, pi/2]``.
    goal_rho:
        Distance of the goal from the landmark (default 1).  The goal sits at
        polar angle 0; rotate queries into this frame.
    tol:
        Feasibility slack (radians for angles, relative for lengths).
        Defaults to the ``FOV_SYNTH_TOL`` environment variable or 1e-9.
    """

    def __init__(
        self,
        gamma: float,
        delta: float,
        *,
        goal_rho: float = 1.0,
        tol: float | None = None,
    ) -> None:
        if not (math.isfinite(gamma) and math.isfinite(delta)):
            raise DomainError("gamma and delta must be finite")
        if not (-math.pi <= gamma <= math.pi):
            raise DomainError(f"gamma must be in [-pi, pi], got {gamma!r}")
        if not (0.0 < delta <= math.pi / 2 + 1e-12):
            raise DomainError(f"delta must be in (0, pi/2], got {delta!r}")
        if not (math.isfinite(goal_rho) and goal_rho > 0.0):
            raise DomainError(f"goal_rho must be positive, got {goal_rho!r}")

        self.gamma_raw = gamma
        self.delta = min(delta, math.pi / 2)
        self.mirrored = gamma < 0.0
        g = abs(gamma)
        self.reversed_frame = g > math.pi / 2
        if self.reversed_frame:
            g = math.pi - g
        self.cone = Cone.from_gamma_delta(g, self.delta)
        self.case = self.cone.case
        self.rho_p = float(goal_rho)
        self.tol = _env_tol() if tol is None else float(tol)
        self.eps0 = 1e-9 * self.rho_p

        c = self.cone
        self.phi1 = c.phi1
        self.phi2 = c.phi2
        self.beta21 = c.phi2 - c.phi1
        self.sin1 = math.sin(c.phi1)
        self.sin2 = math.sin(c.phi2)
        self.cos1 = math.cos(c.phi1)
        self.cos2 = math.cos(c.phi2)
        self.tan1 = math.tan(c.phi1)
        self.cos_sum = self.cos1 + self.cos2
        self.goal = PolarPoint(self.rho_p, 0.0)

        self._bside = self.case is SensorCase.BORDERLINE_SIDE
        self._bf = self.case is SensorCase.BORDERLINE_FRONTAL
        self._frontal_family = self.cone.is_frontal_family
        self._side_family = not self._frontal_family
        # tan(phi2) is unusable at the borderline-side singularity
        self.tan2 = math.tan(c.phi2) if not self._bside else math.inf

        # radius ratio between the two ends of a goal-tangent boundary arc
        self.sf = self.sin1 / self.sin2

        # Anchor point M on the edge2 curve of the goal: the switch locus of
        # the edge1->edge2->straight family starts there.  Undefined when
        # cos(phi1)+cos(phi2) ~ 0 (fully symmetric lateral cone).
        self.m_defined = self.cos_sum > 1e-12
        if self.m_defined:
            self.rho_m = self.rho_p * self.sin2 * math.sin(self.beta21) / self.cos_sum
            if self._bside:
                self.psi_m = (1.0 + self.sin1) / self.cos1
            else:
                self.psi_m = self.tan2 * math.log(self.rho_p / self.rho_m)
            self.point_m = PolarPoint(self.rho_m, self.psi_m)
        else:
            self.rho_m = math.inf
            self.psi_m = math.inf
            self.point_m = None

        if self._side_family:
            self.point_pf = gf_point(self.goal, c)
        else:
            self.point_pf = None

    # ------------------------------------------------------------------
    # thresholds

    @cached_property
    def psi_r1(self) -> float:
        """w1 spiral coordinate of the switch-locus anchor M.

        On the goal circle this is where the edge1->edge2->straight family
        activates (below it the straight tail vanishes and plain edge pairs
        win).  One closed form covers every case; the borderline-side limit
        is (1+sin(phi1))/cos(phi1), and the value is +inf for a fully
        symmetric lateral cone (M undefined).
        """
        if not self.m_defined:
            return math.inf
        if self._bside:
            return (1.0 + self.sin1) / self.cos1
        return (self.tan2 - self.tan1) * math.log(
            self.cos_sum / (self.sin2 * math.sin(self.beta21))
        )

    @cached_property
    def psi_r2(self) -> float:
        """Angle on the goal circle beyond which winding through the landmark
        is optimal.  Closed form for side-family cones and the borderline
        frontal cone; solved numerically for frontal cones, where no
        real-valued closed form exists.
        """
        if self._side_family:
            if not self.m_defined:
                return math.inf
            return self.beta21 + self.psi_r1 + self.tan1 * math.log(self.sf)
        if self._bf:
            return self.phi2 + self.psi_r1
        return self._frontal_psi_r2_numeric()

    def _frontal_psi_r2_numeric(self) -> float:
        def is_through(psi: float) -> bool:
            return self._plan_canonical(PolarPoint(self.rho_p, psi)).region == "III"

        lo, hi = 1e-6, math.pi
        if is_through(lo):
            return 0.0
        if not is_through(hi):
            return math.inf
        n = 96
        prev = lo
        for i in range(1, n + 1):
            x = lo + (hi - lo) * i / n
            if is_through(x):
                hi, lo = x, prev
                break
            prev = x
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if is_through(mid):
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def thresholds(self) -> dict:
        """Synthesis thresholds and special points (canonical frame)."""
        out = {
            "case": self.case.value,
            "phi1": self.phi1,
            "phi2": self.phi2,
            "psi_r1": self.psi_r1,
            "psi_r2": self.psi_r2,
            "psi_r1_clamped": self.psi_r1 > math.pi,
            "psi_r2_clamped": self.psi_r2 > math.pi,
            "psi_r2_method": "numeric"
            if (self._frontal_family and not self._bf)
            else "closed_form",
        }
        if self.m_defined:
            out["point_m"] = {"rho": self.rho_m, "psi": self.psi_m}
        if self.point_pf is not None:
            out["point_pf"] = {"rho": self.point_pf.rho, "psi": self.point_pf.psi}
        return out

    # ------------------------------------------------------------------
    # closed-form length of the stationary two-branch family from the goal
    # circle (used by tests to confront thresholds with their derivation)

    def family_length(self, psi_q: float, alpha: float) -> float:
        """Length of the stationary candidate family from ``(goal_rho, psi_q)``.

        ``alpha`` locates the switch onto the final straight: the straight
        leaves the edge2 arc at polar angle ``alpha`` along the goal's
        boundary arc.  For ``alpha <= phi2 - phi1`` the straight lands on the
        goal itself (branch 1); beyond that it lands on the goal's inner
        edge1 arc and a trailing edge1 piece appears (branch 2; side-family
        cones only).
        """
        b21 = self.beta21
        if alpha < -1e-12:
            raise DomainError("alpha must be nonnegative")
        if self._bside:
            return self._family_length_bside(psi_q, alpha)
        kfac = self.cos_sum / (self.cos1 * self.cos2)
        if alpha <= b21 + 1e-15:
            m = math.sin(self.phi2 - alpha) / self.sin2
            if m <= 0.0:
                raise DomainError("alpha beyond the boundary arc of the goal")
            if abs(self.tan1) < 1e-15:
                core = math.exp(-(psi_q - alpha) / self.tan2) * m
                return self.rho_p * (
                    math.cos(alpha) / self.cos2 + 1.0 / self.cos1 - kfac * core
                )
            t1 = 1.0 / self.tan1
            t2 = 1.0 / self.tan2
            cc = t1 * t2 / (t2 - t1)
            dd = t1 / (t2 - t1)
            return self.rho_p * (
                math.cos(alpha) / self.cos2
                + 1.0 / self.cos1
                - kfac * math.exp((psi_q - alpha) * cc) * m ** (-dd)
            )
        if not self._side_family:
            raise DomainError("branch 2 requires a side-family cone")
        t1 = 1.0 / self.tan1
        t2 = 1.0 / self.tan2
        cc = t1 * t2 / (t2 - t1)
        dd = t1 / (t2 - t1)
        bval = (
            math.cos(b21) / self.cos2
            - 1.0 / self.cos1
            - kfac * math.exp((psi_q - b21) * cc) * self.sf ** (-dd)
        )
        r = math.exp(-t1 * (alpha - b21))
        return self.rho_p * (2.0 / self.cos1 + r * bval)

    def _family_length_bside(self, psi_q: float, alpha: float) -> float:
        b21 = self.beta21
        if alpha <= b21 + 1e-15:
            ca = math.cos(alpha)
            if ca <= 0.0:
                raise DomainError("alpha beyond the boundary arc of the goal")
            sweep = psi_q + self.tan1 * math.log(1.0 / ca) - alpha
            return self.rho_p * ((1.0 - ca) / self.cos1 + ca * sweep + math.sin(alpha))
        t1 = 1.0 / self.tan1
        r = math.exp(-t1 * (alpha - b21))
        rs = r * self.sin1
        sweep = psi_q + self.tan1 * math.log(1.0 / rs) - alpha
        return self.rho_p * (
            (1.0 - rs) / self.cos1
            + rs * sweep
            + r * self.cos1
            + (1.0 - r) / self.cos1
        )

    def upper_bound(self, rho: float, psi: float) -> float:
        """Constructive bound from the case's simplest feasible path.

        Frontal family: drive radially in to the landmark and back out to
        the goal (``rho + rho_p``).  Borderline side: inner-edge spiral to
        the goal radius, then around the goal circle.  Side/lateral:
        inner-edge spiral to its first meet with the goal's outer-edge
        spiral at or below both radii, then the outer edge out to the goal.
        Each construction is kinematically feasible, so no plan length may
        exceed it.
        """
        if rho <= 0.0:
            raise DomainError("query must be away from the landmark")
        if self._frontal_family:
            return rho + self.rho_p
        if self._bside:
            sweep = wrap_pi(psi + self.tan1 * math.log(rho / self.rho_p))
            return abs(rho - self.rho_p) / self.cos1 + self.rho_p * abs(sweep)
        t1, t2 = self.tan1, self.tan2
        dt = t2 - t1
        lo = min(rho, self.rho_p)
        base = t2 * math.log(self.rho_p) - t1 * math.log(rho) - psi
        k_thr = (dt * (math.log(lo) + 1e-12) - base) / TWO_PI
        k = math.floor(k_thr) if dt > 0 else math.ceil(k_thr)
        meet = min(math.exp((base + TWO_PI * k) / dt), lo)
        return (rho - meet) / self.cos1 + (self.rho_p - meet) / abs(self.cos2)

    # ------------------------------------------------------------------
    # arc builders (return None when a piece is empty or inconsistent)

    def _earc(
        self, kind: str, phi: float, drive: int, p_from: PolarPoint, rho_to: float
    ) -> Arc | None:
        if rho_to < 0.0:
            return None
        drho = rho_to - p_from.rho
        if abs(drho) <= 1e-15 * self.rho_p:
            return None
        want = -drive * (1.0 if math.cos(phi) >= 0.0 else -1.0)
        if drho * want < 0.0:
            return None
        if is_circular(phi):
            return None
        if is_radial(phi):
            end = PolarPoint(rho_to, p_from.psi)
            dpsi = 0.0
        else:
            if rho_to <= 0.0:
                return None
            dpsi = spiral_delta_psi(p_from.rho, rho_to, phi)
            end = PolarPoint(rho_to, p_from.psi + dpsi)
        return Arc(
            kind=kind,
            drive=drive,
            start=p_from,
            end=end,
            length=spiral_arc_length(p_from.rho, rho_to, phi, dpsi),
            phi=phi,
            theta_start=heading_for_bearing(p_from.psi, phi),
            theta_end=heading_for_bearing(end.psi, phi),
        )

    def _carc(
        self, kind: str, phi: float, drive: int, p_from: PolarPoint, psi_to: float
    ) -> Arc | None:
        """Circular edge arc (borderline-side cones), ending at angle psi_to."""
        dpsi = psi_to - p_from.psi
        if abs(dpsi) <= 1e-15:
            return None
        want = drive * (1.0 if math.sin(phi) >= 0.0 else -1.0)
        if dpsi * want < 0.0:
            return None
        return Arc(
            kind=kind,
            drive=drive,
            start=p_from,
            end=PolarPoint(p_from.rho, psi_to),
            length=p_from.rho * abs(dpsi),
            phi=phi,
            theta_start=heading_for_bearing(p_from.psi, phi),
            theta_end=heading_for_bearing(psi_to, phi),
        )

    def _chord(self, drive: int, a: PolarPoint, b: PolarPoint) -> Arc | None:
        d = a.dist(b)
        if d <= 1e-15 * self.rho_p:
            return None
        if not straight_feasible(a, b, drive, self.cone, self.tol):
            return None
        _, _, theta = chord_bearings(a, b, drive)
        return Arc(
            kind="S", drive=drive, start=a, end=b, length=d,
            phi=None, theta_start=theta, theta_end=theta,
        )

    def _join(
        self,
        pieces: list[Arc | None],
        region: str,
        q: PolarPoint,
        *,
        length_override: float | None = None,
    ) -> _Candidate | None:
        """Insert junction rotations, validate continuity, assemble.

        ``None`` entries stand for intentionally empty pieces and are
        dropped.  Any *failed* (invalid) piece must abort the candidate
        before calling here.
        """
        arcs = [a for a in pieces if a is not None]
        if not arcs:
            return None
        gap_tol = max(4.0 * self.eps0, 1e-11 * self.rho_p)
        if arcs[0].start.dist(q) > gap_tol:
            return None
        if arcs[-1].end.dist(self.goal) > gap_tol:
            return None
        out: list[Arc] = [arcs[0]]
        for nxt in arcs[1:]:
            prev = out[-1]
            near_origin = (
                prev.end.rho <= 3.0 * self.eps0 and nxt.start.rho <= 3.0 * self.eps0
            )
            if prev.end.dist(nxt.start) > gap_tol and not near_origin:
                return None
            dth = wrap_pi(nxt.theta_start - prev.theta_end)
            if abs(dth) > 1e-12:
                at = prev.end
                if not near_origin:
                    b_from = bearing(*at.xy, prev.theta_end)
                    b_to = bearing(*nxt.start.xy, nxt.theta_start)
                    if not (
                        self.cone.contains(b_from, self.tol)
                        and self.cone.contains(b_to, self.tol)
                    ):
                        return None
                out.append(
                    Arc(
                        kind="ROT", drive=0, start=at, end=at, length=0.0,
                        phi=None,
                        theta_start=prev.theta_end,
                        theta_end=prev.theta_end + dth,
                    )
                )
            out.append(nxt)
        return _Candidate(out, region, length_override=length_override)

    # ------------------------------------------------------------------
    # spiral coordinates and 1-D solvers

    def _w1(self, p: PolarPoint) -> float:
        return w_coord(p.rho, p.psi, self.phi1, self.rho_p)

    def _w2(self, p: PolarPoint) -> float:
        return w_coord(p.rho, p.psi, self.phi2, self.rho_p)

    @staticmethod
    def _bisect_monotone(f, lo, hi, target, increasing, iters=80):
        flo, fhi = f(lo), f(hi)
        if increasing:
            if target < flo - 1e-12 or target > fhi + 1e-12:
                return None
        else:
            if target > flo + 1e-12 or target < fhi - 1e-12:
                return None
        a, b = lo, hi
        for _ in range(iters):
            m = 0.5 * (a + b)
            if (f(m) < target) == increasing:
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    @staticmethod
    def _golden_min(f, lo, hi, *, n_seed=32, iters=70):
        """Coarse scan + golden-section refinement of a scalar function."""
        xs = [lo + (hi - lo) * i / (n_seed - 1) for i in range(n_seed)]
        vals = [f(x) for x in xs]
        best_i = min(range(n_seed), key=lambda i: vals[i])
        if not math.isfinite(vals[best_i]):
            return None
        a = xs[max(0, best_i - 1)]
        b = xs[min(n_seed - 1, best_i + 1)]
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        x1 = b - invphi * (b - a)
        x2 = a + invphi * (b - a)
        f1, f2 = f(x1), f(x2)
        for _ in range(iters):
            if f1 <= f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - invphi * (b - a)
                f1 = f(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + invphi * (b - a)
                f2 = f(x2)
        x = 0.5 * (a + b)
        fx = f(x)
        return (x, fx) if math.isfinite(fx) else None

    # ------------------------------------------------------------------
    # candidate constructions (canonical frame; q.psi in (-pi, pi])

    def _cand_direct_chords(self, q: PolarPoint) -> list[_Candidate]:
        out = []
        for drive in (-1, 1):
            arc = self._chord(drive, q, self.goal)
            if arc is not None:
                cand = self._join([arc], "I", q)
                if cand is not None:
                    out.append(cand)
        return out

    def _cand_edge_pair(self, q: PolarPoint) -> list[_Candidate]:
        """Edge1 forward, then edge2 backward straight into the goal."""
        if self._bside:
            if q.rho < self.rho_p * (1.0 - 1e-12):
                return []
            e1 = self._earc("E1", self.phi1, 1, q, self.rho_p)
            if e1 is not None:
                n_pt = e1.end
            elif abs(q.rho - self.rho_p) <= 1e-9 * self.rho_p:
                n_pt = q
            else:
                return []
            sweep = wrap_from(n_pt.psi, 0.0)
            c_arc = self._carc("E2", self.phi2, -1, n_pt, n_pt.psi - sweep)
            cand = self._join([e1, c_arc], "II", q)
            return [cand] if cand is not None else []
        tand = self.tan2 - self.tan1
        if abs(tand) < 1e-14:
            return []
        out = []
        for k in (-1, 0, 1, 2):
            ln_rho_n = (
                TWO_PI * k
                - q.psi
                - self.tan1 * math.log(q.rho)
                + self.tan2 * math.log(self.rho_p)
            ) / tand
            if not math.isfinite(ln_rho_n):
                continue
            rho_n = math.exp(ln_rho_n)
            if rho_n < self.eps0:
                continue
            e1 = self._earc("E1", self.phi1, 1, q, rho_n)
            if e1 is None and abs(rho_n - q.rho) > 1e-9 * self.rho_p:
                continue
            n_pt = e1.end if e1 is not None else q
            e2 = self._earc("E2", self.phi2, -1, n_pt, self.rho_p)
            if e2 is None and abs(rho_n - self.rho_p) > 1e-9 * self.rho_p:
                continue
            cand = self._join([e1, e2], "II", q)
            if cand is not None:
                out.append(cand)
        return out

    # -- the edge1 -> edge2 -> straight family --------------------------

    def _vm_alpha_hi(self) -> float:
        return self.beta21 if self._side_family else self.phi2 * (1.0 - 1e-12)

    def _w1_vm(self, alpha: float) -> float:
        """w1 spiral coordinate along the switch locus (boundary arc of M)."""
        m = math.sin(self.phi2 - alpha) / self.sin2
        rho = self.rho_m * m
        return self.psi_m + alpha - self.tan1 * math.log(self.rho_p / rho)

    def _cand_v_family(self, q: PolarPoint) -> list[_Candidate]:
        if not self.m_defined:
            return []
        hi = self._vm_alpha_hi()
        if hi <= 1e-15:
            return []
        w_lo = self._w1_vm(0.0)
        w_hi = self._w1_vm(hi)
        target = w_lo + wrap_from(self._w1(q) - w_lo, 0.0)
        out = []
        while target <= w_hi + 1e-15:
            alpha = self._bisect_monotone(self._w1_vm, 0.0, hi, target, True)
            if alpha is not None:
                cand = self._build_v_path(q, alpha)
                if cand is not None:
                    out.append(cand)
            target += TWO_PI
        return out

    def _build_v_path(self, q: PolarPoint, alpha: float) -> _Candidate | None:
        """edge1+ -> edge2- -> straight-, switching at locus angle alpha."""
        m = math.sin(self.phi2 - alpha) / self.sin2
        rho_n = self.rho_m * m
        if rho_n <= self.eps0:
            return None
        e1 = self._earc("E1", self.phi1, 1, q, rho_n)
        if e1 is None:
            if abs(rho_n - q.rho) > 1e-9 * self.rho_p:
                return None
            n_pt = q
        else:
            n_pt = e1.end
        if self._bside:
            psi_ref = boundary_arc_point(self.goal, self.phi2, alpha).psi
            sweep = wrap_from(n_pt.psi - psi_ref, 0.0)
            e2 = self._carc("E2", self.phi2, -1, n_pt, n_pt.psi - sweep)
            m1 = e2.end if e2 is not None else n_pt
        else:
            rho_m1 = self.rho_p * m
            ref = boundary_arc_point(self.goal, self.phi2, alpha)
            e2 = self._earc("E2", self.phi2, -1, n_pt, rho_m1)
            if e2 is None:
                if abs(rho_m1 - n_pt.rho) > 1e-9 * self.rho_p:
                    return None
                m1 = n_pt
            else:
                if abs(wrap_pi(e2.end.psi - ref.psi)) > 1e-6:
                    return None
                m1 = e2.end
        goal_end = PolarPoint(self.rho_p, m1.psi - alpha)
        chord = self._chord(-1, m1, goal_end)
        if chord is None and m1.dist(goal_end) > 1e-11 * self.rho_p:
            return None
        return self._join([e1, e2, chord], "V", q)

    # -- through-landmark candidates -------------------------------------

    def _cand_through_origin(self, q: PolarPoint) -> list[_Candidate]:
        if self._frontal_family:
            return self._cand_radial_through(q)
        total = (q.rho + self.rho_p) / self.cos1
        pieces: list[Arc | None] = []
        if q.rho > self.eps0:
            pieces.append(self._earc("E1", self.phi1, 1, q, self.eps0))
        psi_b = self.tan1 * math.log(self.rho_p / self.eps0)
        pieces.append(
            self._earc("E1", self.phi1, -1, PolarPoint(self.eps0, psi_b), self.rho_p)
        )
        cand = self._join(pieces, "III", q, length_override=total)
        return [cand] if cand is not None else []

    def _cand_radial_through(self, q: PolarPoint) -> list[_Candidate]:
        """Straight through the landmark (frontal-family cones only)."""
        total = q.rho + self.rho_p
        pieces: list[Arc | None] = []
        if q.rho > self.eps0:
            a = PolarPoint(self.eps0, q.psi)
            th = wrap_pi(q.psi + math.pi)
            pieces.append(
                Arc(
                    kind="S", drive=1, start=q, end=a, length=q.rho - self.eps0,
                    phi=None, theta_start=th, theta_end=th,
                )
            )
        pieces.append(
            Arc(
                kind="S", drive=-1, start=PolarPoint(self.eps0, 0.0), end=self.goal,
                length=self.rho_p - self.eps0,
                phi=None, theta_start=math.pi, theta_end=math.pi,
            )
        )
        cand = self._join(pieces, "III", q, length_override=total)
        return [cand] if cand is not None else []

    # -- edge2 backward with a straight tail -----------------------------

    def _w2_vp(self, alpha: float) -> float:
        """w2 spiral coordinate along the goal's boundary arc (decreasing)."""
        m = math.sin(self.phi2 - alpha) / self.sin2
        return alpha - self.tan2 * math.log(1.0 / m)

    def _cand_edge2_chord(self, q: PolarPoint) -> list[_Candidate]:
        label = "IV" if self._side_family else "V"
        if self._bside:
            if q.rho > self.rho_p * (1.0 + 1e-12):
                return []
            alpha = math.acos(min(1.0, q.rho / self.rho_p))
            sweep = wrap_from(q.psi - alpha, 0.0)
            c_arc = self._carc("E2", self.phi2, -1, q, q.psi - sweep)
            start = c_arc.end if c_arc is not None else q
            goal_end = PolarPoint(self.rho_p, start.psi - alpha)
            chord = self._chord(-1, start, goal_end)
            if chord is None and start.dist(goal_end) > 1e-11 * self.rho_p:
                return []
            cand = self._join([c_arc, chord], label, q)
            return [cand] if cand is not None else []
        hi = self._vm_alpha_hi()
        # w2 along the boundary arc runs from 0 at alpha=0 to w2_vp(hi);
        # it decreases for side/frontal cones and increases for lateral ones
        w_hi_val = self._w2_vp(hi)
        increasing = w_hi_val > 0.0
        lo_val, hi_val = (0.0, w_hi_val) if increasing else (w_hi_val, 0.0)
        target = lo_val + wrap_from(self._w2(q) - lo_val, 0.0)
        out = []
        while target <= hi_val + 1e-15:
            alpha = self._bisect_monotone(self._w2_vp, 0.0, hi, target, increasing)
            if alpha is not None:
                ref = boundary_arc_point(self.goal, self.phi2, alpha)
                e2 = self._earc("E2", self.phi2, -1, q, ref.rho)
                m1 = None
                if e2 is None:
                    if abs(ref.rho - q.rho) <= 1e-9 * self.rho_p and (
                        abs(wrap_pi(q.psi - ref.psi)) <= 1e-6
                    ):
                        m1 = q
                elif abs(wrap_pi(e2.end.psi - ref.psi)) <= 1e-6:
                    m1 = e2.end
                if m1 is not None:
                    goal_end = PolarPoint(self.rho_p, m1.psi - alpha)
                    chord = self._chord(-1, m1, goal_end)
                    if chord is not None or m1.dist(goal_end) <= 1e-11 * self.rho_p:
                        cand = self._join([e2, chord], label, q)
                        if cand is not None:
                            out.append(cand)
            target += TWO_PI
        return out

    def _cand_edge2_chord_edge1(self, q: PolarPoint) -> list[_Candidate]:
        """edge2 backward, straight, edge1 backward into the goal."""
        if not self._side_family:
            return []
        pf = self.point_pf
        if self._bside:
            rho_pf = self.rho_p * self.sf
            if q.rho > rho_pf * (1.0 + 1e-12):
                return []
            psi_m1 = pf.psi + self.tan1 * math.log(rho_pf / max(q.rho, self.eps0))
            sweep = wrap_from(q.psi - psi_m1, 0.0)
            c_arc = self._carc("E2", self.phi2, -1, q, q.psi - sweep)
            m1 = c_arc.end if c_arc is not None else q
            m2 = gb_point(m1, self.cone)
            chord = self._chord(-1, m1, m2)
            if chord is None and m1.dist(m2) > 1e-11 * self.rho_p:
                return []
            e1 = self._earc("E1", self.phi1, -1, m2, self.rho_p)
            if e1 is None and abs(m2.rho - self.rho_p) > 1e-9 * self.rho_p:
                return []
            cand = self._join([c_arc, chord, e1], "IV", q)
            return [cand] if cand is not None else []
        w1_pf = self._w1(pf)
        w2_q = self._w2(q)
        out = []
        for b in (-1, 0, 1):
            for a in (-1, 0, 1):
                w1t = w1_pf + TWO_PI * b
                w2t = w2_q + TWO_PI * a
                lcap = (w1t - w2t) / (self.tan2 - self.tan1)
                rho_m1 = self.rho_p * math.exp(-lcap)
                psi_m1 = w1t + self.tan1 * lcap
                if not (self.eps0 < rho_m1 < 4.0 * max(q.rho, self.rho_p)):
                    continue
                e2 = self._earc("E2", self.phi2, -1, q, rho_m1)
                if e2 is None:
                    if abs(rho_m1 - q.rho) > 1e-9 * self.rho_p or (
                        abs(wrap_pi(q.psi - psi_m1)) > 1e-6
                    ):
                        continue
                    m1 = q
                else:
                    if abs(wrap_pi(e2.end.psi - psi_m1)) > 1e-6:
                        continue
                    m1 = e2.end
                m2 = gb_point(m1, self.cone)
                if m2.rho > self.rho_p * (1.0 + 1e-11):
                    continue
                chord = self._chord(-1, m1, m2)
                if chord is None and m1.dist(m2) > 1e-11 * self.rho_p:
                    continue
                e1 = self._earc("E1", self.phi1, -1, m2, self.rho_p)
                if e1 is None and abs(m2.rho - self.rho_p) > 1e-9 * self.rho_p:
                    continue
                cand = self._join([e2, chord, e1], "IV", q)
                if cand is not None:
                    out.append(cand)
        return out

    def _cand_chord_edge1(self, q: PolarPoint) -> list[_Candidate]:
        """Straight backward onto a tangent point of the goal's edge1 arc."""
        if not self._side_family:
            return []
        qx, qy = q.xy

        def h(s: float) -> float:
            rho = spiral_rho_after(self.rho_p, s, self.phi1)
            th = heading_for_bearing(s, self.phi1)
            vx = qx - rho * math.cos(s)
            vy = qy - rho * math.sin(s)
            return math.cos(th) * vy - math.sin(th) * vx

        out = []
        s_max = 4.0 * math.pi
        n = 720
        prev_s, prev_h = 1e-9, h(1e-9)
        for i in range(1, n + 1):
            s = s_max * i / n
            cur = h(s)
            if (prev_h < 0.0) != (cur < 0.0) or prev_h == 0.0:
                lo, hi_, flo = prev_s, s, prev_h
                for _ in range(70):
                    mid = 0.5 * (lo + hi_)
                    if (h(mid) < 0.0) == (flo < 0.0):
                        lo = mid
                    else:
                        hi_ = mid
                root = 0.5 * (lo + hi_)
                rho2 = spiral_rho_after(self.rho_p, root, self.phi1)
                m2 = PolarPoint(rho2, root)
                th = heading_for_bearing(root, self.phi1)
                mx, my = m2.xy
                if math.cos(th) * (qx - mx) + math.sin(th) * (qy - my) > 0.0:
                    chord = self._chord(-1, q, m2)
                    if chord is not None or q.dist(m2) <= 1e-11 * self.rho_p:
                        e1 = self._earc("E1", self.phi1, -1, m2, self.rho_p)
                        if e1 is not None or abs(rho2 - self.rho_p) <= 1e-9 * self.rho_p:
                            cand = self._join([chord, e1], "VI", q)
                            if cand is not None:
                                out.append(cand)
            prev_s, prev_h = s, cur
        return out

    # -- frontal-family leading-straight candidates ----------------------

    def _launch_geom(self, q: PolarPoint, tau: float) -> tuple[float, float, float]:
        rho_a = q.rho * math.sin(self.phi1 - tau) / self.sin1
        return rho_a, q.psi + tau, q.rho * abs(math.sin(tau) / self.sin1)

    def _launch_len_pair(self, q: PolarPoint, tau: float) -> float:
        if not (self.phi1 < tau < 0.0):
            return math.inf
        rho_a, psi_a, ell0 = self._launch_geom(q, tau)
        if rho_a <= self.eps0:
            return math.inf
        tand = self.tan2 - self.tan1
        best = math.inf
        for k in (-1, 0, 1, 2):
            ln_rho_n = (
                TWO_PI * k
                - psi_a
                - self.tan1 * math.log(rho_a)
                + self.tan2 * math.log(self.rho_p)
            ) / tand
            rho_n = math.exp(ln_rho_n)
            if rho_n <= self.eps0:
                continue
            if rho_n > rho_a * (1.0 + 1e-12) or rho_n > self.rho_p * (1.0 + 1e-12):
                continue
            best = min(
                best,
                ell0 + (rho_a - rho_n) / self.cos1 + (self.rho_p - rho_n) / self.cos2,
            )
        return best

    def _launch_len_v(self, q: PolarPoint, tau: float) -> float:
        if not (self.phi1 < tau < 0.0):
            return math.inf
        rho_a, psi_a, ell0 = self._launch_geom(q, tau)
        if rho_a <= self.eps0:
            return math.inf
        w1_a = psi_a - self.tan1 * math.log(self.rho_p / rho_a)
        hi = self._vm_alpha_hi()
        w_lo = self._w1_vm(0.0)
        w_hi = self._w1_vm(hi)
        target = w_lo + wrap_from(w1_a - w_lo, 0.0)
        best = math.inf
        while target <= w_hi + 1e-15:
            alpha = self._bisect_monotone(self._w1_vm, 0.0, hi, target, True, iters=60)
            if alpha is not None:
                m = math.sin(self.phi2 - alpha) / self.sin2
                rho_n = self.rho_m * m
                rho_m1 = self.rho_p * m
                if rho_n <= rho_a * (1.0 + 1e-12) and rho_n <= rho_m1 * (1.0 + 1e-12):
                    best = min(
                        best,
                        ell0
                        + (rho_a - rho_n) / self.cos1
                        + (rho_m1 - rho_n) / self.cos2
                        + self.rho_p * math.sin(alpha) / self.sin2,
                    )
            target += TWO_PI
        return best

    def _frontal_tail_edge_pair(self, a_pt: PolarPoint) -> _Candidate | None:
        cands = self._cand_edge_pair(a_pt)
        return min(cands, key=lambda c: c.length) if cands else None

    def _frontal_tail_v(self, a_pt: PolarPoint) -> _Candidate | None:
        cands = self._cand_v_family(a_pt)
        return min(cands, key=lambda c: c.length) if cands else None

    def _cand_frontal_launch(self, q: PolarPoint) -> list[_Candidate]:
        """Leading forward straight tangent onto an edge1 arc (frontal only)."""
        if not self._frontal_family or self._bf or q.rho <= self.eps0:
            return []
        lo = self.phi1 * (1.0 - 1e-9)
        hi = self.phi1 * 1e-9
        out = []
        for len_fn, tail_fn, label in (
            (self._launch_len_pair, self._frontal_tail_edge_pair, "V+"),
            (self._launch_len_v, self._frontal_tail_v, "W"),
        ):
            res = self._golden_min(lambda t: len_fn(q, t), lo, hi, n_seed=48, iters=70)
            if res is None:
                continue
            tau = res[0]
            a_pt = boundary_arc_point(q, self.phi1, tau)
            if a_pt.rho <= self.eps0:
                continue
            chord = self._chord(1, q, a_pt)
            if chord is None:
                continue
            tail = tail_fn(a_pt)
            if tail is None:
                continue
            cand = self._join([chord, *tail.arcs], label, q)
            if cand is not None:
                out.append(cand)
        return out

    # ------------------------------------------------------------------
    # native + image candidate collection

    _NATIVE_BUILDERS = (
        "_cand_edge_pair",
        "_cand_v_family",
        "_cand_edge2_chord",
        "_cand_edge2_chord_edge1",
        "_cand_chord_edge1",
        "_cand_frontal_launch",
    )

    def _native_candidates(self, q: PolarPoint) -> list[_Candidate]:
        cands = self._cand_direct_chords(q)
        cands += self._cand_through_origin(q)
        if q.rho <= self.eps0:
            return cands
        for name in self._NATIVE_BUILDERS:
            cands += getattr(self, name)(q)
        return cands

    def _dual_candidates(self, q: PolarPoint) -> list[_Candidate]:
        """Images of the native constructions under start/goal exchange.

        The exchange is conjugate inversion about the goal circle composed
        with time reversal; it preserves feasibility and scales lengths by
        rho_q / rho_p, so transforming the native candidates of the
        exchanged start yields valid candidates for the true start.
        """
        if q.rho <= self.eps0:
            return []
        q2 = conjugate_inversion(q, self.rho_p)
        if q2.rho <= self.eps0:
            return []
        scale = q.rho / self.rho_p
        duals = []
        for name in self._NATIVE_BUILDERS:
            for cand in getattr(self, name)(q2):
                arcs = [
                    reverse_arc(similarity_arc(a, scale, q.psi))
                    for a in reversed(cand.arcs)
                ]
                duals.append(_Candidate(arcs, _PRIMED[cand.region], image=True))
        return duals

    # ------------------------------------------------------------------
    # public planning API

    def plan(self, rho: float, psi: float) -> Path:
        """Shortest feasible path from ``(rho, psi)`` to the goal."""
        if not (math.isfinite(rho) and math.isfinite(psi)) or rho < 0.0:
            raise DomainError(f"invalid start ({rho!r}, {psi!r})")
        sign = -1.0 if (self.mirrored ^ self.reversed_frame) else 1.0
        path_c = self._plan_canonical(PolarPoint(rho, wrap_pi(sign * psi)))
        return self._to_true_frame(path_c, PolarPoint(rho, wrap_pi(psi)))

    def classify(self, rho: float, psi: float) -> tuple[str, bool]:
        """Region label of the winning candidate family and its image flag."""
        path = self.plan(rho, psi)
        return path.region, path.image

    def _plan_canonical(self, q: PolarPoint) -> Path:
        if abs(q.rho - self.rho_p) <= 1e-15 * self.rho_p and abs(wrap_pi(q.psi)) <= 1e-15:
            return Path(
                arcs=(), word="", region="I", image=False, length=0.0,
                q=q, goal_rho=self.rho_p,
            )
        cands = self._native_candidates(q) + self._dual_candidates(q)
        if not cands:
            raise ConsistencyError(
                f"no feasible candidate from ({q.rho}, {q.psi}); this is a bug"
            )
        best = min(cands, key=lambda c: c.length)
        tie = 1e-12 * self.rho_p
        for c in cands:
            if c.length <= best.length + tie:
                if (REGION_ORDER.index(c.region), c.image) < (
                    REGION_ORDER.index(best.region),
                    best.image,
                ):
                    best = c
        return Path(
            arcs=tuple(best.arcs),
            word=_word_of(best.arcs),
            region=best.region,
            image=best.image,
            length=best.length,
            q=q,
            goal_rho=self.rho_p,
        )

    def _to_true_frame(self, path_c: Path, q_true: PolarPoint) -> Path:
        arcs = list(path_c.arcs)
        word = path_c.word
        if self.reversed_frame:
            arcs = [mirror_arc(self._flip_drive(a)) for a in arcs]
            word = _dirswap_word(word)
        if self.mirrored:
            arcs = [mirror_arc(a) for a in arcs]
        return Path(
            arcs=tuple(arcs),
            word=word,
            region=path_c.region,
            image=path_c.image,
            length=path_c.length,
            q=q_true,
            goal_rho=self.rho_p,
            mirrored=self.mirrored,
            reversed_frame=self.reversed_frame,
        )

    @staticmethod
    def _flip_drive(a: Arc) -> Arc:
        """Swap forward/backward drive, keeping the trace (heading flips)."""
        return Arc(
            kind=a.kind,
            drive=-a.drive,
            start=a.start,
            end=a.end,
            length=a.length,
            phi=None if a.phi is None else wrap_pi(a.phi - math.pi),
            theta_start=a.theta_start + math.pi,
            theta_end=a.theta_end + math.pi,
        )

    # ------------------------------------------------------------------
    # language description (consumed by the numeric oracles and the CLI)

    def language(self) -> dict:
        """Candidate words of the optimal language for this cone case."""
        if self._frontal_family:
            natives = ["S-", "S+", "S+*S-", "E1+*E2-", "E1+*E2-S-", "E2-S-"]
            images = ["E2+*E1-", "S+E2+*E1-", "S+E2+"]
            if not self._bf:
                natives += ["S+E1+*E2-", "S+E1+*E2-S-"]
                images += ["E2+*E1-S-", "S+E2+*E1-S-"]
        else:
            natives = [
                "S-", "S+", "E1+*E2-", "E1+*E2-S-", "E1+*E1-",
                "E2-S-", "E2-S-E1-", "S-E1-",
            ]
            images = ["E2+*E1-", "S+E2+*E1-", "S+E2+", "E1+S+E2+", "E1+S+"]
        return {
            "case": self.case.value,
            "native_words": natives,
            "image_words": images,
        }

    # ------------------------------------------------------------------
    # plane partition

    def partition(
        self,
        n_rho: int = 96,
        n_psi: int = 192,
        rho_max: float | None = None,
        *,
        max_chord_err: float | None = None,
    ) -> dict:
        """Classify a polar grid and sample the analytic border curves.

        Every grid cell records the winning region label, its word and its
        length.  Border curves are adaptive polylines with chord error at
        most ``max_chord_err`` (default 0.1% of the goal radius).
        """
        if n_rho < 2 or n_psi < 2:
            raise DomainError("grid must be at least 2x2")
        rho_max = 1.5 * self.rho_p if rho_max is None else float(rho_max)
        if rho_max <= 0.0:
            raise DomainError("rho_max must be positive")
        rhos = [rho_max * (i + 1) / n_rho for i in range(n_rho)]
        psis = [-math.pi + TWO_PI * (j + 0.5) / n_psi for j in range(n_psi)]
        labels: list[list[str]] = []
        words: list[list[str]] = []
        lengths: list[list[float]] = []
        for r in rhos:
            row_l, row_w, row_n = [], [], []
            for p in psis:
                path = self.plan(r, p)
                row_l.append(path.region)
                row_w.append(path.word)
                row_n.append(path.length)
            labels.append(row_l)
            words.append(row_w)
            lengths.append(row_n)
        return {
            "schema": "fovsynth.partition.v1",
            "gamma": self.gamma_raw,
            "delta": self.delta,
            "case": self.case.value,
            "goal_rho": self.rho_p,
            "rho": rhos,
            "psi": psis,
            "labels": labels,
            "words": words,
            "lengths": lengths,
            "borders": self._border_curves(rho_max, max_chord_err=max_chord_err),
        }

    def _spiral_closure(
        self, anchor: PolarPoint, phi: float, rho_hi: float, rho_lo: float
    ):
        """Parameterisation of the edge spiral through ``anchor``."""
        if is_radial(phi):
            return lambda t: PolarPoint(rho_hi + (rho_lo - rho_hi) * t, anchor.psi)
        if is_circular(phi):
            return lambda t: PolarPoint(anchor.rho, anchor.psi + TWO_PI * t)

        def f(t: float) -> PolarPoint:
            rho = rho_hi * (rho_lo / rho_hi) ** t
            return PolarPoint(rho, anchor.psi + spiral_delta_psi(anchor.rho, rho, phi))

        return f

    def _border_curves(
        self, rho_max: float, max_chord_err: float | None = None
    ) -> list[dict]:
        err = 1e-3 * self.rho_p if max_chord_err is None else float(max_chord_err)
        named: list[tuple[str, object]] = [
            ("goal_circle", lambda t: PolarPoint(self.rho_p, -math.pi + TWO_PI * t)),
            (
                "edge1_goal",
                self._spiral_closure(self.goal, self.phi1, self.rho_p, self.eps0 * 10),
            ),
        ]
        if self.m_defined and self.point_m is not None:
            if not self._bside:
                named.append((
                    "edge2_goal_to_m",
                    self._spiral_closure(self.goal, self.phi2, self.rho_p, self.rho_m),
                ))
            hi = self._vm_alpha_hi()
            named.append((
                "switch_arc_m",
                lambda t, _hi=hi: boundary_arc_point(self.point_m, self.phi2, _hi * t),
            ))
        hi = self._vm_alpha_hi()
        named.append((
            "boundary_arc_goal",
            lambda t, _hi=hi: boundary_arc_point(self.goal, self.phi2, _hi * t),
        ))
        if self.point_pf is not None:
            ax, ay = self.point_pf.xy
            bx, by = self.goal.xy
            named.append((
                "chord_goal_pf",
                lambda t: PolarPoint.from_xy(ax + t * (bx - ax), ay + t * (by - ay)),
            ))
        if self._side_family:
            for nm, w in (("edge1_r1", self.psi_r1), ("edge1_r2", self.psi_r2)):
                if not math.isfinite(w):
                    continue
                named.append((nm, self._spiral_closure(
                    PolarPoint(self.rho_p, w), self.phi1, rho_max, self.eps0 * 10
                )))

        curves: list[dict] = []
        clip = rho_max * 1.02

        def emit(name: str, f) -> None:
            pts = adaptive_polyline(f, err, skip_beyond=clip)
            xy = [p.xy for p in pts if p.rho <= clip]
            if len(xy) >= 2:
                curves.append({"name": name, "points": xy})

        for name, f in named:
            emit(name, f)
            # the start/goal exchange image of every border bounds the
            # exterior synthesis; the inversion blows up at the landmark,
            # which the off-screen skip absorbs
            emit(name + "_image", lambda t, _f=f: conjugate_inversion(_f(t), self.rho_p))
        return curves
