"""Independent checks on planned paths.

Nothing here trusts the planner's bookkeeping: each check densely samples a
path into world-frame poses ``(x, y, theta)`` and recomputes the quantity it
cares about (landmark bearing, junction gaps, arc lengths) from those poses
alone.  The planner truncates through-origin pieces at a tiny radius, and the
landmark bearing is undefined at the origin itself, so every check exempts a
small disc ``rho <= origin_exempt`` around the landmark.

The visibility check takes the cone as a raw ``(gamma, delta)`` pair instead
of a canonical :class:`~fovsynth.sensor.Cone`: paths planned for a mirrored or
rear-facing sensor live in the true frame where the cone may straddle the
``+-pi`` seam, so membership is tested as ``|wrap(beta - gamma)| <= delta/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import Arc, PolarPoint, is_circular, wrap_pi
from .sensor import bearing

# Default chord-error budget for sampling, as a fraction of the path scale.
_TRACE_ERR_FRAC = 1e-4


@dataclass(frozen=True)
class TraceSample:
    """One sampled pose along a path."""

    s: float  # cumulative arc length at the sample
    x: float
    y: float
    theta: float
    rho: float
    psi: float  # wrapped to (-pi, pi]
    beta: float  # landmark bearing recomputed from the pose
    arc_index: int

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "x": self.x,
            "y": self.y,
            "theta": wrap_pi(self.theta),
            "rho": self.rho,
            "psi": self.psi,
            "beta": self.beta,
            "arc_index": self.arc_index,
        }


def _path_scale(path) -> float:
    return max(path.goal_rho, path.q.rho, 1e-300)


def default_origin_exempt(path) -> float:
    """Radius of the disc where bearing checks are skipped.

    Three times the planner's own truncation radius: inside it a
    through-origin path has been clipped and the bearing is meaningless.
    """
    return 3e-9 * path.goal_rho


def trace_path(path, *, max_chord_err: float | None = None) -> list[TraceSample]:
    """Sample a path into world poses with bounded polyline chord error."""
    err = _TRACE_ERR_FRAC * _path_scale(path) if max_chord_err is None else max_chord_err
    out: list[TraceSample] = []
    s = 0.0
    for i, arc in enumerate(path.arcs):
        n = max(arc.sample_count(err), 2)
        for k in range(n):
            t = k / (n - 1)
            p, th = arc.point_at(t)
            x, y = p.xy
            out.append(
                TraceSample(
                    s=s + t * arc.length,
                    x=x,
                    y=y,
                    theta=th,
                    rho=p.rho,
                    psi=wrap_pi(p.psi),
                    beta=bearing(x, y, th),
                    arc_index=i,
                )
            )
        s += arc.length
    return out


# ---------------------------------------------------------------------------
# visibility


@dataclass(frozen=True)
class VisibilityReport:
    max_violation: float  # radians outside the cone; <= 0 means always inside
    n_samples: int
    n_exempt: int
    worst: TraceSample | None

    @property
    def ok(self) -> bool:
        return self.max_violation <= 0.0

    def to_dict(self) -> dict:
        return {
            "max_violation": self.max_violation,
            "n_samples": self.n_samples,
            "n_exempt": self.n_exempt,
            "worst": None if self.worst is None else self.worst.to_dict(),
        }


def check_visibility(
    path,
    gamma: float,
    delta: float,
    *,
    tol: float = 1e-9,
    max_chord_err: float | None = None,
    origin_exempt: float | None = None,
) -> VisibilityReport:
    """Largest excursion of the recomputed bearing outside the cone.

    ``max_violation`` is reported net of ``tol``: a path that stays within
    ``tol`` of the cone edges scores <= 0.
    """
    exempt = default_origin_exempt(path) if origin_exempt is None else origin_exempt
    samples = trace_path(path, max_chord_err=max_chord_err)
    worst: TraceSample | None = None
    worst_v = -math.inf
    n_exempt = 0
    for smp in samples:
        if smp.rho <= exempt:
            n_exempt += 1
            continue
        v = abs(wrap_pi(smp.beta - gamma)) - delta / 2 - tol
        if v > worst_v:
            worst_v = v
            worst = smp
    if worst is None:
        worst_v = 0.0
    return VisibilityReport(
        max_violation=worst_v, n_samples=len(samples), n_exempt=n_exempt, worst=worst
    )


# ---------------------------------------------------------------------------
# continuity


@dataclass(frozen=True)
class ContinuityReport:
    max_gap: float  # largest position jump between consecutive arcs
    max_heading_jump: float  # largest heading jump at a junction (rad)
    length_mismatch: float  # |sum of arc lengths - reported total|
    n_junctions: int
    origin_gaps: int  # junction gaps inside the exemption disc (clipped origin)

    def ok(self, *, gap_tol: float, heading_tol: float, length_tol: float) -> bool:
        return (
            self.max_gap <= gap_tol
            and self.max_heading_jump <= heading_tol
            and self.length_mismatch <= length_tol
        )

    def to_dict(self) -> dict:
        return {
            "max_gap": self.max_gap,
            "max_heading_jump": self.max_heading_jump,
            "length_mismatch": self.length_mismatch,
            "n_junctions": self.n_junctions,
            "origin_gaps": self.origin_gaps,
        }


def check_continuity(path, *, origin_exempt: float | None = None) -> ContinuityReport:
    """Junction gaps, heading jumps and the length bookkeeping of a path.

    A gap whose two endpoints both lie inside the exemption disc is counted in
    ``origin_gaps`` instead of ``max_gap``: through-origin paths are clipped
    there on purpose, and the matching length shortfall shows up (bounded by
    the clip radius over ``cos(phi1)``) in ``length_mismatch``.
    """
    exempt = default_origin_exempt(path) if origin_exempt is None else origin_exempt
    max_gap = 0.0
    max_jump = 0.0
    origin_gaps = 0
    arcs = path.arcs
    for a, b in zip(arcs, arcs[1:]):
        gap = a.end.dist(b.start)
        if a.end.rho <= exempt and b.start.rho <= exempt:
            origin_gaps += 1
        else:
            max_gap = max(max_gap, gap)
        max_jump = max(max_jump, abs(wrap_pi(a.theta_end - b.theta_start)))
    total = sum(a.length for a in arcs)
    return ContinuityReport(
        max_gap=max_gap,
        max_heading_jump=max_jump,
        length_mismatch=abs(total - path.length),
        n_junctions=max(len(arcs) - 1, 0),
        origin_gaps=origin_gaps,
    )


# ---------------------------------------------------------------------------
# per-arc motion consistency


@dataclass(frozen=True)
class ArcConsistencyReport:
    max_edge_bearing_dev: float  # |beta - phi| along constant-bearing arcs
    max_straight_heading_dev: float  # heading vs chord direction on straights
    max_monotonicity_defect: float  # wrong-direction |beta| drift on straights
    n_arcs: int

    def ok(self, *, tol: float) -> bool:
        return (
            self.max_edge_bearing_dev <= tol
            and self.max_straight_heading_dev <= tol
            and self.max_monotonicity_defect <= tol
        )

    def to_dict(self) -> dict:
        return {
            "max_edge_bearing_dev": self.max_edge_bearing_dev,
            "max_straight_heading_dev": self.max_straight_heading_dev,
            "max_monotonicity_defect": self.max_monotonicity_defect,
            "n_arcs": self.n_arcs,
        }


def check_arcs(
    path,
    *,
    n_per_arc: int = 65,
    origin_exempt: float | None = None,
) -> ArcConsistencyReport:
    """Sharp per-arc invariants, checked pointwise.

    * Constant-bearing arcs must hold their bearing exactly: ``beta == phi``
      at every sample.  This is the integrated form of the motion equations
      for those arcs, so it doubles as an ODE check.
    * On straights the heading must equal the chord direction (forward) or
      its opposite (backward).
    * Along a straight, ``|beta|`` may only grow when driving forward and
      only shrink when backing up.
    """
    exempt = default_origin_exempt(path) if origin_exempt is None else origin_exempt
    edge_dev = 0.0
    heading_dev = 0.0
    mono = 0.0
    for arc in path.arcs:
        if arc.kind == "ROT":
            continue
        if arc.kind == "S":
            ax, ay = arc.start.xy
            bx, by = arc.end.xy
            dx, dy = bx - ax, by - ay
            if math.hypot(dx, dy) > 0.0:
                want = math.atan2(dy, dx) if arc.drive > 0 else math.atan2(-dy, -dx)
                heading_dev = max(heading_dev, abs(wrap_pi(arc.theta_start - want)))
            prev_abs = None
            for k in range(n_per_arc):
                t = k / (n_per_arc - 1)
                p, th = arc.point_at(t)
                if p.rho <= exempt:
                    prev_abs = None
                    continue
                x, y = p.xy
                b = abs(bearing(x, y, th))
                if prev_abs is not None:
                    drift = (prev_abs - b) if arc.drive > 0 else (b - prev_abs)
                    mono = max(mono, drift)
                prev_abs = b
        else:
            for k in range(n_per_arc):
                t = k / (n_per_arc - 1)
                p, th = arc.point_at(t)
                if p.rho <= exempt:
                    continue
                x, y = p.xy
                edge_dev = max(edge_dev, abs(wrap_pi(bearing(x, y, th) - arc.phi)))
    return ArcConsistencyReport(
        max_edge_bearing_dev=edge_dev,
        max_straight_heading_dev=heading_dev,
        max_monotonicity_defect=mono,
        n_arcs=len(path.arcs),
    )


# ---------------------------------------------------------------------------
# radius monotonicity


@dataclass(frozen=True)
class RadiusMonotoneReport:
    max_defect: float  # worst wrong-way radius drift between samples
    n_checked: int
    n_exempt: int  # circles and straddling straights (see below)

    def ok(self, *, tol: float) -> bool:
        return self.max_defect <= tol

    def to_dict(self) -> dict:
        return {
            "max_defect": self.max_defect,
            "n_checked": self.n_checked,
            "n_exempt": self.n_exempt,
        }


def check_radius_monotone(path, *, n_per_arc: int = 33) -> RadiusMonotoneReport:
    """Distance to the landmark must change one way along each moving arc.

    Unit-speed motion gives ``d(rho)/ds = -drive * cos(beta)``, so on a
    constant-bearing arc the radius drifts with the fixed sign of
    ``-drive * cos(phi)`` (circles keep it constant and are exempt), and on
    a straight it drifts with the sign of ``-drive * cos(beta)`` as long as
    the bearing's cosine keeps one sign.  A straight whose bearing crosses
    +-pi/2 mid-chord (possible only when the cone reaches past the shoulder
    line) genuinely dips toward the landmark and back out; such arcs are
    counted in ``n_exempt`` instead of checked.
    """
    worst = 0.0
    checked = 0
    exempt = 0
    for arc in path.arcs:
        if arc.kind == "ROT":
            continue
        if arc.kind == "S":
            tiny = default_origin_exempt(path)
            cends = [
                math.cos(bearing(*p.xy, th))
                for p, th in ((arc.start, arc.theta_start), (arc.end, arc.theta_end))
                if p.rho > tiny
            ]
            if not cends:
                exempt += 1
                continue
            if len(cends) == 2 and cends[0] * cends[1] < 0.0:
                exempt += 1
                continue
            sign = -arc.drive * (1.0 if sum(cends) >= 0.0 else -1.0)
        else:
            if is_circular(arc.phi):
                exempt += 1
                continue
            sign = -arc.drive * (1.0 if math.cos(arc.phi) >= 0.0 else -1.0)
        prev = None
        for k in range(n_per_arc):
            p, _ = arc.point_at(k / (n_per_arc - 1))
            if prev is not None:
                worst = max(worst, -sign * (p.rho - prev))
            prev = p.rho
        checked += 1
    return RadiusMonotoneReport(max_defect=worst, n_checked=checked, n_exempt=exempt)


# ---------------------------------------------------------------------------
# radial confinement


@dataclass(frozen=True)
class ConfinementReport:
    max_rho: float
    bound: float
    excess: float  # max(0, max_rho - bound), before any slack

    def ok(self, *, slack: float) -> bool:
        return self.max_rho <= self.bound * (1.0 + slack)

    def to_dict(self) -> dict:
        return {"max_rho": self.max_rho, "bound": self.bound, "excess": self.excess}


def check_confinement(path, *, max_chord_err: float | None = None) -> ConfinementReport:
    """Does the path stay inside the disc spanned by start and goal radii?

    Holds for every cone family except some lateral ones, where the optimal
    switch locus genuinely bulges outside the start/goal disc; callers decide
    whether an excess is an error or a property to log.
    """
    bound = max(path.q.rho, path.goal_rho)
    max_rho = 0.0
    for smp in trace_path(path, max_chord_err=max_chord_err):
        max_rho = max(max_rho, smp.rho)
    return ConfinementReport(max_rho=max_rho, bound=bound, excess=max(0.0, max_rho - bound))


# ---------------------------------------------------------------------------
# endpoint agreement


@dataclass(frozen=True)
class EndpointReport:
    start_gap: float  # distance from the first arc start to the query point
    goal_gap: float  # distance from the last arc end to the goal
    n_arcs: int

    def ok(self, *, tol: float) -> bool:
        return self.start_gap <= tol and self.goal_gap <= tol

    def to_dict(self) -> dict:
        return {"start_gap": self.start_gap, "goal_gap": self.goal_gap, "n_arcs": self.n_arcs}


def check_endpoints(path, goal_psi: float = 0.0) -> EndpointReport:
    """Distance of the traced endpoints from the query point and the goal."""
    goal = PolarPoint(path.goal_rho, goal_psi)
    if not path.arcs:
        gap = path.q.dist(goal)
        return EndpointReport(start_gap=0.0, goal_gap=gap, n_arcs=0)
    return EndpointReport(
        start_gap=path.arcs[0].start.dist(path.q),
        goal_gap=path.arcs[-1].end.dist(goal),
        n_arcs=len(path.arcs),
    )


# ---------------------------------------------------------------------------
# aggregate


@dataclass(frozen=True)
class PathReport:
    visibility: VisibilityReport
    continuity: ContinuityReport
    arcs: ArcConsistencyReport
    confinement: ConfinementReport
    endpoints: EndpointReport
    issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "issues": list(self.issues),
            "visibility": self.visibility.to_dict(),
            "continuity": self.continuity.to_dict(),
            "arcs": self.arcs.to_dict(),
            "confinement": self.confinement.to_dict(),
            "endpoints": self.endpoints.to_dict(),
        }


def verify_path(
    path,
    gamma: float,
    delta: float,
    *,
    tol: float = 1e-9,
    check_confine: bool = True,
) -> PathReport:
    """Run every check on one planned path and collect failures.

    ``gamma`` is the cone offset in the same frame as the path (i.e. the raw,
    possibly negative or rear-facing value the plan was made for).  Tolerances
    scale with the path size; the confinement check is advisory for lateral
    cones, so callers may disable it.
    """
    scale = _path_scale(path)
    vis = check_visibility(path, gamma, delta, tol=tol)
    cont = check_continuity(path)
    arcs = check_arcs(path)
    conf = check_confinement(path)
    ends = check_endpoints(path)

    issues: list[str] = []
    if not vis.ok:
        issues.append(f"visibility violated by {vis.max_violation:.3e} rad")
    # clipped-origin shortfall: one clip radius per origin gap, divided by the
    # worst-case cosine (the through-origin pieces run along the cone edge)
    len_tol = 2e-8 * scale + 8.0 * default_origin_exempt(path)
    if not cont.ok(gap_tol=1e-7 * scale, heading_tol=1e-7, length_tol=len_tol):
        issues.append(
            "discontinuity: gap={:.3e} heading_jump={:.3e} length_mismatch={:.3e}".format(
                cont.max_gap, cont.max_heading_jump, cont.length_mismatch
            )
        )
    if not arcs.ok(tol=max(1e-7, tol)):
        issues.append(
            "arc inconsistency: edge_dev={:.3e} heading_dev={:.3e} mono={:.3e}".format(
                arcs.max_edge_bearing_dev,
                arcs.max_straight_heading_dev,
                arcs.max_monotonicity_defect,
            )
        )
    if check_confine and not conf.ok(slack=1e-9):
        issues.append(f"left the start/goal disc by {conf.excess:.3e}")
    if not ends.ok(tol=1e-7 * scale):
        issues.append(
            f"endpoint mismatch: start_gap={ends.start_gap:.3e} goal_gap={ends.goal_gap:.3e}"
        )
    return PathReport(
        visibility=vis,
        continuity=cont,
        arcs=arcs,
        confinement=conf,
        endpoints=ends,
        issues=issues,
    )
