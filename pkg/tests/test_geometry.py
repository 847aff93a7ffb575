"""Constant-bearing curve laws checked against first-principles numerics.

The independent references come first and never call back into the library:
the radius law is integrated as an ODE in polar form, arc length is
recomputed by quadrature of the speed, the two-curve crossing is re-found by
bisection on the radius difference, and the unit-speed kinematics are
integrated in the plane with the heading recomputed from position at every
step.  The closed forms in :mod:`fovsynth.geometry` have to match these, not
the other way round.
"""

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from fovsynth.geometry import (
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
    spiral_intersection,
    spiral_rho_after,
    w_coord,
    wrap_from,
    wrap_pi,
)

# ---------------------------------------------------------------------------
# independent references


def ode_radius(rho0: float, phi: float, dpsi: float) -> float:
    """Radius after sweeping ``dpsi`` with the landmark held at bearing phi.

    Integrates the bearing-hold motion law in polar form,
    d(rho)/d(psi) = -rho / tan(phi), with a high-order adaptive integrator.
    """
    cot = 1.0 / math.tan(phi)
    sol = solve_ivp(
        lambda _psi, y: [-y[0] * cot],
        (0.0, dpsi),
        [rho0],
        rtol=1e-12,
        atol=1e-14,
        method="DOP853",
    )
    assert sol.success
    return float(sol.y[0, -1])


def quad_arc_length(rho0: float, phi: float, dpsi: float) -> float:
    """Arc length by quadrature of ds = sqrt(d_rho^2 + rho^2 d_psi^2)."""
    cot = 1.0 / math.tan(phi)

    def speed(psi: float) -> float:
        rho = rho0 * math.exp(-psi * cot)
        return math.hypot(rho * cot, rho)

    val, err = quad(speed, 0.0, dpsi, limit=200)
    assert err < 1e-9
    return abs(val)


def ode_ride(rho0, psi0, phi, drive, s_end):
    """Plane kinematics of a bearing-hold ride at unit speed.

    The heading is recomputed from the position at every step as the one
    that puts the landmark (at the origin) at bearing ``phi``; nothing here
    knows the spiral closed forms.  Returns the end point.
    """

    def rhs(_s, state):
        x, y = state
        theta = math.atan2(y, x) + math.pi - phi
        return [drive * math.cos(theta), drive * math.sin(theta)]

    x0, y0 = rho0 * math.cos(psi0), rho0 * math.sin(psi0)
    sol = solve_ivp(
        rhs, (0.0, s_end), [x0, y0], rtol=1e-12, atol=1e-14, method="DOP853"
    )
    assert sol.success
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def bisect_sign_change(f, lo: float, hi: float, iters: int = 200) -> float:
    flo = f(lo)
    assert flo * f(hi) < 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0.0) == (flo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


proper_phi = st.floats(-1.45, 1.45).filter(lambda p: abs(p) > 0.03)
any_pitch_phi = st.floats(0.05, math.pi - 0.05).filter(
    lambda p: abs(p - math.pi / 2) > 0.05
)
radius = st.floats(0.05, 20.0)
sweep = st.floats(-3.0, 3.0)


# ---------------------------------------------------------------------------
# radius law


class TestRadiusLaw:
    def test_pinned_half_radius_sweep(self):
        # 45-degree bearing from (2, 0): a sweep of ln 2 halves the radius
        assert spiral_rho_after(2.0, math.log(2.0), math.pi / 4) == pytest.approx(
            1.0, rel=1e-12
        )
        assert ode_radius(2.0, math.pi / 4, math.log(2.0)) == pytest.approx(
            1.0, rel=1e-9
        )

    @settings(deadline=None)
    @given(rho0=radius, phi=any_pitch_phi, dpsi=sweep)
    def test_matches_ode(self, rho0, phi, dpsi):
        assume(abs(dpsi / math.tan(phi)) < 8.0)
        closed = spiral_rho_after(rho0, dpsi, phi)
        assert closed == pytest.approx(ode_radius(rho0, phi, dpsi), rel=1e-9)

    @given(rho0=radius, rho1=radius, phi=any_pitch_phi)
    def test_round_trip_through_sweep(self, rho0, rho1, phi):
        assume(abs(math.log(rho0 / rho1) * math.tan(phi)) < 40.0)
        dpsi = spiral_delta_psi(rho0, rho1, phi)
        assert spiral_rho_after(rho0, dpsi, phi) == pytest.approx(rho1, rel=1e-12)

    def test_degenerate_forms_guarded(self):
        with pytest.raises(ValueError):
            spiral_rho_after(1.0, 0.5, 0.0)  # radial ray: no radius law
        with pytest.raises(ValueError):
            spiral_delta_psi(1.0, 2.0, math.pi / 2)  # circle: no sweep law
        assert spiral_delta_psi(1.0, 2.0, 0.0) == 0.0  # ray sweeps nothing


# ---------------------------------------------------------------------------
# arc length


class TestArcLength:
    def test_pinned_sixty_degree_chord(self):
        # between radii 2 and 1 at a 60-degree bearing: (2-1)/cos(pi/3) = 2
        assert spiral_arc_length(2.0, 1.0, math.pi / 3) == pytest.approx(
            2.0, rel=1e-12
        )
        dpsi = spiral_delta_psi(2.0, 1.0, math.pi / 3)
        assert quad_arc_length(2.0, math.pi / 3, dpsi) == pytest.approx(2.0, rel=1e-9)

    def test_zero_for_equal_radii(self):
        assert spiral_arc_length(1.3, 1.3, 0.7) == 0.0

    @settings(deadline=None)
    @given(rho0=radius, rho1=radius, phi=any_pitch_phi)
    def test_matches_quadrature(self, rho0, rho1, phi):
        assume(abs(math.log(rho0 / rho1) * math.tan(phi)) < 10.0)
        dpsi = spiral_delta_psi(rho0, rho1, phi)
        closed = spiral_arc_length(rho0, rho1, phi, dpsi)
        assert closed == pytest.approx(quad_arc_length(rho0, phi, dpsi), rel=1e-9)

    @given(
        rho0=radius, rho1=radius, phi=any_pitch_phi, cut=st.floats(0.01, 0.99)
    )
    def test_additive_under_splitting(self, rho0, rho1, phi, cut):
        rho_mid = rho0 + cut * (rho1 - rho0)
        whole = spiral_arc_length(rho0, rho1, phi)
        parts = spiral_arc_length(rho0, rho_mid, phi) + spiral_arc_length(
            rho_mid, rho1, phi
        )
        assert parts == pytest.approx(whole, rel=1e-12, abs=1e-15)

    def test_circle_branch_uses_sweep(self):
        assert spiral_arc_length(1.5, 1.5, math.pi / 2, 0.8) == pytest.approx(
            1.5 * 0.8, rel=1e-15
        )

    @settings(deadline=None, max_examples=40)
    @given(rho0=radius, phi=any_pitch_phi, s=st.floats(0.01, 2.0))
    def test_ride_kinematics_close_the_loop(self, rho0, phi, s):
        """Unit-speed plane integration lands where the closed forms say."""
        drive = 1 if abs(phi) < math.pi / 2 else -1
        s_end = min(s, 0.8 * rho0 / abs(math.cos(phi)))  # stay away from the landmark
        x, y = ode_ride(rho0, 0.3, phi, drive, s_end)
        rho_end = math.hypot(x, y)
        # radius shrinks at cos(phi) per unit length when driving forward
        assert rho_end == pytest.approx(
            rho0 - drive * s_end * math.cos(phi), rel=1e-8, abs=1e-10
        )
        assert spiral_arc_length(rho0, rho_end, phi) == pytest.approx(
            s_end, rel=1e-7, abs=1e-9
        )
        psi_end = 0.3 + spiral_delta_psi(rho0, rho_end, phi)
        assert wrap_pi(math.atan2(y, x) - psi_end) == pytest.approx(
            0.0, abs=1e-7
        )


# ---------------------------------------------------------------------------
# two-curve crossings


class TestSpiralIntersection:
    def test_pinned_crossing_against_bisection(self):
        # 2 e^{-psi} meets e^{psi} where the radius difference changes sign
        psi_star = bisect_sign_change(
            lambda p: 2.0 * math.exp(-p) - math.exp(p), 0.0, 1.0
        )
        got = spiral_intersection(
            PolarPoint(2.0, 0.0), math.pi / 4, PolarPoint(1.0, 0.0), -math.pi / 4
        )
        assert got.psi == pytest.approx(psi_star, abs=1e-12)
        assert got.psi == pytest.approx(math.log(math.sqrt(2.0)), rel=1e-12)
        assert got.rho == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_shared_anchor_is_the_crossing(self):
        a = PolarPoint(1.0, 0.3)
        got = spiral_intersection(a, 0.5, a, 1.0)
        assert got.rho == pytest.approx(a.rho, rel=1e-12)
        assert got.psi == pytest.approx(a.psi, abs=1e-12)

    def test_spiral_meets_circle_at_its_radius(self):
        got = spiral_intersection(
            PolarPoint(2.0, 1.0), math.pi / 4, PolarPoint(1.0, 0.0), math.pi / 2
        )
        assert got.rho == pytest.approx(1.0, rel=1e-15)
        assert got.psi == pytest.approx(1.0 + math.log(2.0), rel=1e-12)

    def test_ray_pins_the_angle(self):
        got = spiral_intersection(
            PolarPoint(0.7, 0.4), 0.0, PolarPoint(2.0, 0.0), math.pi / 4
        )
        assert got.psi == pytest.approx(0.4, abs=1e-15)
        assert got.rho == pytest.approx(2.0 * math.exp(-0.4), rel=1e-12)

    def test_parallel_pairs_raise(self):
        with pytest.raises(ValueError):
            spiral_intersection(PolarPoint(1, 0), 0.0, PolarPoint(2, 1.0), 0.0)
        with pytest.raises(ValueError):
            spiral_intersection(
                PolarPoint(1, 0), math.pi / 2, PolarPoint(2, 0), math.pi / 2
            )
        with pytest.raises(ValueError):
            spiral_intersection(PolarPoint(1, 0), 0.7, PolarPoint(2, 0.1), 0.7)

    @given(
        rho_a=radius,
        psi_a=st.floats(-3.0, 3.0),
        phi_a=proper_phi,
        rho_b=radius,
        psi_b=st.floats(-3.0, 3.0),
        phi_b=proper_phi,
        k=st.integers(-2, 2),
    )
    def test_on_both_curves_and_winding_stable(
        self, rho_a, psi_a, phi_a, rho_b, psi_b, phi_b, k
    ):
        assume(abs(math.tan(phi_a) - math.tan(phi_b)) > 1e-3)
        a, b = PolarPoint(rho_a, psi_a), PolarPoint(rho_b, psi_b)
        got = spiral_intersection(a, phi_a, b, phi_b)
        assume(1e-6 < got.rho < 1e6)
        # lies on a's curve at its unwrapped angle
        assert got.rho == pytest.approx(
            spiral_rho_after(rho_a, got.psi - psi_a, phi_a), rel=1e-9
        )
        # lies on b's curve up to a whole winding
        dw = w_coord(got.rho, got.psi, phi_b, 1.0) - w_coord(rho_b, psi_b, phi_b, 1.0)
        assert wrap_pi(dw) == pytest.approx(0.0, abs=1e-9 * (1 + abs(dw)))
        # shifting b's anchor a few windings along its own curve changes nothing
        b2 = PolarPoint(
            spiral_rho_after(rho_b, TWO_PI * k, phi_b), psi_b + TWO_PI * k
        )
        assume(1e-6 < b2.rho < 1e6)
        again = spiral_intersection(a, phi_a, b2, phi_b)
        assert again.psi == pytest.approx(got.psi, abs=1e-9)
        assert again.rho == pytest.approx(got.rho, rel=1e-9)


# ---------------------------------------------------------------------------
# the start/goal exchange map


class TestConjugateInversion:
    @given(rho=radius, psi=st.floats(-7.0, 7.0), ref=st.floats(0.2, 5.0))
    def test_involution(self, rho, psi, ref):
        p = PolarPoint(rho, psi)
        q = conjugate_inversion(conjugate_inversion(p, ref), ref)
        assert q.rho == pytest.approx(rho, rel=1e-15)
        assert q.psi == pytest.approx(psi, abs=1e-15)

    @given(psi=st.floats(-7.0, 7.0), ref=st.floats(0.2, 5.0))
    def test_fixes_the_reference_circle(self, psi, ref):
        img = conjugate_inversion(PolarPoint(ref, psi), ref)
        assert img.rho == pytest.approx(ref, rel=1e-15)

    def test_is_a_rotation_and_scale_of_the_goal(self):
        # the image of the reference point equals rotate(-psi) o scale(ref/rho)
        q = PolarPoint(0.7, 1.1)
        ref = 1.3
        via_map = conjugate_inversion(q, ref)
        via_similarity = PolarPoint(ref, 0.0).scaled(ref / q.rho).rotated(-q.psi)
        assert via_map.rho == pytest.approx(via_similarity.rho, rel=1e-15)
        assert via_map.psi == pytest.approx(via_similarity.psi, abs=1e-15)

    @given(
        rho0=st.floats(0.2, 5.0),
        psi0=st.floats(-3.0, 3.0),
        phi=proper_phi,
        ref=st.floats(0.2, 5.0),
    )
    def test_preserves_bearing_curves(self, rho0, psi0, phi, ref):
        """Images of same-bearing points stay on one same-bearing curve."""
        pts = [
            PolarPoint(
                spiral_rho_after(rho0, d, phi), psi0 + d
            )
            for d in (0.0, 0.4, 1.1)
        ]
        assume(all(1e-4 < p.rho < 1e4 for p in pts))
        ws = {
            round(w_coord(im.rho, im.psi, phi, ref), 9)
            for im in (conjugate_inversion(p, ref) for p in pts)
        }
        assert len(ws) == 1


# ---------------------------------------------------------------------------
# angle wrapping


class TestWrapping:
    @given(a=st.floats(-50.0, 50.0))
    def test_wrap_pi_range_and_congruence(self, a):
        w = wrap_pi(a)
        assert -math.pi < w <= math.pi
        assert math.sin(w - a) == pytest.approx(0.0, abs=1e-9)

    def test_wrap_pi_keeps_pi(self):
        assert wrap_pi(math.pi) == math.pi
        assert wrap_pi(-math.pi) == math.pi

    @given(a=st.floats(-50.0, 50.0), lo=st.floats(-7.0, 7.0))
    def test_wrap_from_range(self, a, lo):
        w = wrap_from(a, lo)
        assert lo <= w < lo + TWO_PI
        assert math.sin(w - a) == pytest.approx(0.0, abs=1e-9)


# ---------------------------------------------------------------------------
# arcs as value objects


def make_spiral_arc(phi, drive, start, rho_to):
    """Assemble a consistent bearing-hold arc from the closed-form laws."""
    dpsi = spiral_delta_psi(start.rho, rho_to, phi)
    end = PolarPoint(rho_to, start.psi + dpsi)
    return Arc(
        kind="E1",
        drive=drive,
        start=start,
        end=end,
        length=spiral_arc_length(start.rho, rho_to, phi, dpsi),
        phi=phi,
        theta_start=start.psi + math.pi - phi,
        theta_end=end.psi + math.pi - phi,
    )


class TestArcSampling:
    def test_endpoints_and_heading_identity(self):
        arc = make_spiral_arc(0.6, 1, PolarPoint(2.0, 0.5), 0.8)
        p0, th0 = arc.point_at(0.0)
        p1, th1 = arc.point_at(1.0)
        assert (p0.rho, p0.psi) == pytest.approx((2.0, 0.5))
        assert (p1.rho, p1.psi) == pytest.approx((arc.end.rho, arc.end.psi))
        for t in (0.0, 0.3, 0.77, 1.0):
            p, th = arc.point_at(t)
            assert wrap_pi(th - (p.psi + math.pi - arc.phi)) == pytest.approx(
                0.0, abs=1e-12
            )
            # interior samples respect the radius law
            assert p.rho == pytest.approx(
                spiral_rho_after(2.0, p.psi - 0.5, 0.6), rel=1e-12
            )

    def test_sample_count_grows_with_tightness(self):
        arc = make_spiral_arc(1.2, 1, PolarPoint(2.0, 0.0), 0.3)
        assert arc.sample_count(1e-5) > arc.sample_count(1e-2) >= 2

    def test_similarity_scales_lengths_exactly(self):
        arc = make_spiral_arc(0.6, 1, PolarPoint(2.0, 0.5), 0.8)
        for k in (0.25, 3.0):
            img = similarity_arc(arc, k, 0.9)
            assert img.length == pytest.approx(k * arc.length, rel=1e-15)
            assert img.start.rho == pytest.approx(k * arc.start.rho, rel=1e-15)
            assert img.start.psi == pytest.approx(arc.start.psi + 0.9, abs=1e-15)

    def test_mirror_is_an_involution(self):
        arc = make_spiral_arc(0.6, -1, PolarPoint(1.4, -0.8), 2.1)
        back = mirror_arc(mirror_arc(arc))
        assert back.start.psi == pytest.approx(arc.start.psi, abs=1e-15)
        assert back.phi == pytest.approx(arc.phi, abs=1e-15)
        assert back.length == arc.length
        # a mirrored arc holds the negated bearing
        assert mirror_arc(arc).phi == pytest.approx(-arc.phi, abs=1e-15)

    def test_reverse_swaps_endpoints_and_drive(self):
        arc = make_spiral_arc(0.6, 1, PolarPoint(2.0, 0.5), 0.8)
        rev = reverse_arc(arc)
        assert rev.drive == -arc.drive
        assert rev.start.rho == pytest.approx(arc.end.rho, rel=1e-15)
        assert rev.end.rho == pytest.approx(arc.start.rho, rel=1e-15)
        assert rev.length == arc.length
        assert reverse_arc(rev).start.rho == pytest.approx(
            arc.start.rho, rel=1e-15
        )


# ---------------------------------------------------------------------------
# adaptive curve sampling


class TestAdaptivePolyline:
    def test_unit_circle_respects_chord_budget(self):
        err = 1e-3
        pts = adaptive_polyline(
            lambda t: PolarPoint(1.0, math.pi * t), err
        )
        assert len(pts) >= 30
        assert pts[0].psi == pytest.approx(0.0, abs=1e-12)
        assert pts[-1].psi == pytest.approx(math.pi, abs=1e-12)
        for a, b in zip(pts, pts[1:]):
            # sagitta of a unit-circle segment must respect the budget
            gap = abs(b.psi - a.psi)
            assert 1.0 - math.cos(gap / 2.0) <= 4.0 * err

    def test_offscreen_segments_stay_coarse(self):
        def f(t):
            # hairpin that shoots far outside the clip radius
            return PolarPoint(1.0 + 400.0 * math.sin(math.pi * t) ** 2, 2.0 * t)

        tight = adaptive_polyline(f, 1e-4)
        clipped = adaptive_polyline(f, 1e-4, skip_beyond=2.0)
        assert len(clipped) < len(tight) / 4
